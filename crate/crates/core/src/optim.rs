//! Derivative-free local minimizers: Nelder–Mead with adaptive coefficients
//! and a compass (coordinate pattern) search used for polishing.

/// Result of a local minimization.
#[derive(Clone, Debug)]
pub struct Minimum {
    pub x: Vec<f64>,
    pub value: f64,
    pub evals: usize,
}

#[derive(Clone, Debug)]
pub struct NelderMead {
    pub max_evals: usize,
    pub initial_step: f64,
    /// Stop when the spread of simplex values falls below this.
    pub f_tol: f64,
    /// Stop when the simplex diameter falls below this.
    pub x_tol: f64,
    /// Stop as soon as a value at or below the target is seen.
    pub target: Option<f64>,
}

impl Default for NelderMead {
    fn default() -> Self {
        Self { max_evals: 2000, initial_step: 0.1, f_tol: 1e-12, x_tol: 1e-10, target: None }
    }
}

fn worse(a: f64, b: f64) -> bool {
    // NaN sorts last
    match (a.is_nan(), b.is_nan()) {
        (true, false) => true,
        (false, true) => false,
        _ => a > b,
    }
}

impl NelderMead {
    pub fn minimize<F: FnMut(&[f64]) -> f64>(&self, mut f: F, x0: &[f64]) -> Minimum {
        let n = x0.len();
        let mut evals = 0usize;
        let mut eval = |x: &[f64], evals: &mut usize| {
            *evals += 1;
            f(x)
        };
        if n == 0 {
            let value = eval(x0, &mut evals);
            return Minimum { x: vec![], value, evals };
        }
        let nf = n as f64;
        let (alpha, gamma, rho, sigma) = if n > 2 {
            (1.0, 1.0 + 2.0 / nf, 0.75 - 1.0 / (2.0 * nf), 1.0 - 1.0 / nf)
        } else {
            (1.0, 2.0, 0.5, 0.5)
        };
        let hit = |v: f64| self.target.is_some_and(|t| v <= t);

        let mut simplex: Vec<(Vec<f64>, f64)> = Vec::with_capacity(n + 1);
        let v0 = eval(x0, &mut evals);
        simplex.push((x0.to_vec(), v0));
        if hit(v0) {
            return Minimum { x: x0.to_vec(), value: v0, evals };
        }
        for i in 0..n {
            let mut x = x0.to_vec();
            let step = if x[i].abs() > 1e-8 { self.initial_step * x[i].abs().max(0.25) } else { self.initial_step };
            x[i] += step;
            let v = eval(&x, &mut evals);
            if hit(v) {
                return Minimum { x, value: v, evals };
            }
            simplex.push((x, v));
        }

        let mut centroid = vec![0.0; n];
        let mut trial = vec![0.0; n];
        let mut trial2 = vec![0.0; n];
        while evals < self.max_evals {
            simplex.sort_by(|a, b| {
                if worse(a.1, b.1) {
                    std::cmp::Ordering::Greater
                } else if worse(b.1, a.1) {
                    std::cmp::Ordering::Less
                } else {
                    std::cmp::Ordering::Equal
                }
            });
            let best = simplex[0].1;
            let worst = simplex[n].1;
            let spread = (worst - best).abs();
            let diameter = simplex[1..]
                .iter()
                .map(|(x, _)| x.iter().zip(&simplex[0].0).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max))
                .fold(0.0, f64::max);
            if diameter <= self.x_tol || (spread.is_finite() && spread <= self.f_tol) {
                break;
            }

            centroid.iter_mut().for_each(|c| *c = 0.0);
            for (x, _) in &simplex[..n] {
                for (c, xi) in centroid.iter_mut().zip(x) {
                    *c += xi / nf;
                }
            }
            let xw = simplex[n].0.clone();
            for i in 0..n {
                trial[i] = centroid[i] + alpha * (centroid[i] - xw[i]);
            }
            let fr = eval(&trial, &mut evals);
            if hit(fr) {
                return Minimum { x: trial, value: fr, evals };
            }
            let second_worst = simplex[n - 1].1;
            if fr < best {
                // expansion
                for i in 0..n {
                    trial2[i] = centroid[i] + gamma * (trial[i] - centroid[i]);
                }
                let fe = eval(&trial2, &mut evals);
                if hit(fe) {
                    return Minimum { x: trial2.clone(), value: fe, evals };
                }
                simplex[n] = if fe < fr { (trial2.clone(), fe) } else { (trial.clone(), fr) };
                continue;
            }
            if fr < second_worst {
                simplex[n] = (trial.clone(), fr);
                continue;
            }
            // contraction (outside if the reflection improved on the worst)
            let outside = fr < worst;
            for i in 0..n {
                trial2[i] = if outside {
                    centroid[i] + rho * (trial[i] - centroid[i])
                } else {
                    centroid[i] - rho * (centroid[i] - xw[i])
                };
            }
            let fc = eval(&trial2, &mut evals);
            if hit(fc) {
                return Minimum { x: trial2.clone(), value: fc, evals };
            }
            let accept = if outside { fc <= fr } else { fc < worst };
            if accept {
                simplex[n] = (trial2.clone(), fc);
                continue;
            }
            // shrink toward the best vertex
            let x_best = simplex[0].0.clone();
            for vertex in simplex.iter_mut().skip(1) {
                for (xi, bi) in vertex.0.iter_mut().zip(&x_best) {
                    *xi = bi + sigma * (*xi - bi);
                }
                vertex.1 = eval(&vertex.0, &mut evals);
                if hit(vertex.1) {
                    return Minimum { x: vertex.0.clone(), value: vertex.1, evals };
                }
            }
        }
        let (x, value) = simplex
            .into_iter()
            .min_by(|a, b| if worse(a.1, b.1) { std::cmp::Ordering::Greater } else { std::cmp::Ordering::Less })
            .expect("non-empty simplex");
        Minimum { x, value, evals }
    }
}

/// Compass search: tries `±step` along each coordinate, halving the step when
/// no move improves.
pub fn compass_search<F: FnMut(&[f64]) -> f64>(
    mut f: F,
    x0: &[f64],
    initial_step: f64,
    min_step: f64,
    max_evals: usize,
) -> Minimum {
    let mut x = x0.to_vec();
    let mut value = f(&x);
    let mut evals = 1;
    let mut step = initial_step;
    while step >= min_step && evals < max_evals {
        let mut improved = false;
        for i in 0..x.len() {
            for dir in [1.0, -1.0] {
                let old = x[i];
                x[i] = old + dir * step;
                let v = f(&x);
                evals += 1;
                if v < value {
                    value = v;
                    improved = true;
                    break;
                }
                x[i] = old;
            }
        }
        if !improved {
            step *= 0.5;
        }
    }
    Minimum { x, value, evals }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rosenbrock(x: &[f64]) -> f64 {
        (1.0 - x[0]).powi(2) + 100.0 * (x[1] - x[0] * x[0]).powi(2)
    }

    #[test]
    fn nelder_mead_finds_rosenbrock_minimum() {
        let nm = NelderMead { max_evals: 5000, ..Default::default() };
        let m = nm.minimize(rosenbrock, &[-1.2, 1.0]);
        assert!(m.value < 1e-8, "{m:?}");
        assert!((m.x[0] - 1.0).abs() < 1e-3);
    }

    #[test]
    fn nelder_mead_handles_higher_dimensions_and_kinks() {
        let f = |x: &[f64]| x.iter().enumerate().map(|(i, v)| (v - i as f64).abs()).sum::<f64>();
        let nm = NelderMead { max_evals: 20000, ..Default::default() };
        let m = nm.minimize(f, &[0.0; 6]);
        let p = compass_search(f, &m.x, 0.1, 1e-10, 20000);
        assert!(p.value < 1e-6, "{p:?}");
    }

    #[test]
    fn nelder_mead_stops_at_target() {
        let nm = NelderMead { target: Some(0.5), ..Default::default() };
        let m = nm.minimize(|x| x[0] * x[0], &[2.0]);
        assert!(m.value <= 0.5);
        assert!(m.evals < 50);
    }

    #[test]
    fn nelder_mead_tolerates_infinite_values() {
        let f = |x: &[f64]| if x[0] < 0.0 { f64::INFINITY } else { (x[0] - 1.0).powi(2) + x[1] * x[1] };
        let m = NelderMead::default().minimize(f, &[0.1, 0.3]);
        assert!(m.value < 1e-8);
    }

    #[test]
    fn compass_polishes_a_quadratic() {
        let m = compass_search(|x| (x[0] - 0.3).powi(2) + (x[1] + 0.7).powi(2), &[0.0, 0.0], 0.5, 1e-9, 10_000);
        assert!(m.value < 1e-12);
    }
}
