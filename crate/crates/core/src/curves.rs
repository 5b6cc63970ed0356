//! Lengths of curves under a pseudodistance (partition sums) or an
//! infinitesimal metric (quadrature), and the explicit chain along the test
//! curve `γ(t) = (ti/2, 1/2)` of the example domain.

use serde::{Deserialize, Serialize};

use crate::disc_search::{lempert_upper, SearchConfig, Witness};
use crate::error::{Error, Result};
use crate::example_domains::Example3Domain;
use crate::geometry::{CPoint, CVector, DomainModel, C64};

/// A curve `[0, 1] → C^n` with its derivative.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum ParametricCurve {
    Segment { from: CPoint, to: CPoint },
    Constant { point: CPoint },
    /// `t ↦ (ti/2, 1/2)`.
    Example3Gamma,
}

impl ParametricCurve {
    pub fn segment(from: CPoint, to: CPoint) -> Result<Self> {
        crate::geometry::check_dim(from.dim(), to.dim())?;
        Ok(ParametricCurve::Segment { from, to })
    }

    pub fn dim(&self) -> usize {
        match self {
            ParametricCurve::Segment { from, .. } => from.dim(),
            ParametricCurve::Constant { point } => point.dim(),
            ParametricCurve::Example3Gamma => 2,
        }
    }

    pub fn point(&self, t: f64) -> CPoint {
        match self {
            ParametricCurve::Segment { from, to } => from.offset(C64::new(t, 0.0), &to.diff(from)),
            ParametricCurve::Constant { point } => point.clone(),
            ParametricCurve::Example3Gamma => {
                CPoint::from_vec_unchecked(vec![C64::new(0.0, t / 2.0), C64::new(0.5, 0.0)])
            }
        }
    }

    pub fn derivative(&self, _t: f64) -> CVector {
        match self {
            ParametricCurve::Segment { from, to } => to.diff(from),
            ParametricCurve::Constant { point } => CVector::zeros(point.dim()),
            ParametricCurve::Example3Gamma => {
                CVector::from_vec_unchecked(vec![C64::new(0.0, 0.5), C64::new(0.0, 0.0)])
            }
        }
    }
}

/// `Σ_i d(γ((i−1)/P), γ(i/P))`.
pub fn length_by_distance<D>(d: D, curve: &ParametricCurve, partitions: usize) -> Result<f64>
where
    D: Fn(&CPoint, &CPoint) -> Result<f64>,
{
    if partitions == 0 {
        return Err(Error::InvalidParameter("partitions must be at least 1".into()));
    }
    let mut total = 0.0;
    let mut prev = curve.point(0.0);
    for i in 1..=partitions {
        let next = curve.point(i as f64 / partitions as f64);
        total += d(&prev, &next)?;
        prev = next;
    }
    Ok(total)
}

/// Partition sums for `P = 1, 2, 4, …, 2^max_doublings`.
pub fn length_ladder<D>(d: D, curve: &ParametricCurve, max_doublings: u32) -> Result<Vec<(usize, f64)>>
where
    D: Fn(&CPoint, &CPoint) -> Result<f64>,
{
    (0..=max_doublings)
        .map(|k| {
            let p = 1usize << k;
            Ok((p, length_by_distance(&d, curve, p)?))
        })
        .collect()
}

/// Composite trapezoid rule for `∫₀¹ μ(γ(t); γ'(t)) dt` on `Q` nodes.
pub fn length_by_metric<M>(mu: M, curve: &ParametricCurve, quadrature_points: usize) -> Result<f64>
where
    M: Fn(&CPoint, &CVector) -> Result<f64>,
{
    if quadrature_points < 2 {
        return Err(Error::InvalidParameter("quadrature needs at least 2 points".into()));
    }
    let h = 1.0 / (quadrature_points - 1) as f64;
    let mut total = 0.0;
    for i in 0..quadrature_points {
        let t = i as f64 * h;
        let weight = if i == 0 || i + 1 == quadrature_points { 0.5 } else { 1.0 };
        total += weight * mu(&curve.point(t), &curve.derivative(t))?;
    }
    Ok(total * h)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ChainExperimentConfig {
    /// Largest allowed distance from `γ(t)` to the nearest singular line.
    pub hop_radius: f64,
    pub search: SearchConfig,
}

impl Default for ChainExperimentConfig {
    fn default() -> Self {
        Self { hop_radius: 0.25, search: SearchConfig::linear() }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SegmentKind {
    /// From the curve to a singular line, at constant height.
    Hop,
    /// Along a singular line `{λ} × C`.
    Vertical,
    /// Along `C × {0}`.
    Transport,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SegmentReport {
    pub kind: SegmentKind,
    pub from: CPoint,
    pub to: CPoint,
    /// Certified upper bound for `k̃*`.
    pub lempert_star: f64,
    /// `tanh⁻¹` of the above.
    pub cost: f64,
    pub min_margin: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ChainReport {
    pub t0: f64,
    pub t1: f64,
    pub k_terms: usize,
    pub j_terms: usize,
    pub segments: Vec<SegmentReport>,
    /// Upper bound for `k(γ(t0), γ(t1))`.
    pub total: f64,
    /// Distances from `γ(t0)`, `γ(t1)` to the singular lines used.
    pub hop_distances: [f64; 2],
    /// First coordinates of those lines.
    pub lines: [C64; 2],
}

impl ChainReport {
    pub fn points(&self) -> Vec<CPoint> {
        let mut pts: Vec<CPoint> = self.segments.iter().map(|s| s.from.clone()).collect();
        if let Some(last) = self.segments.last() {
            pts.push(last.to.clone());
        }
        pts
    }
}

/// Chain `γ(t0) → (λ_a, ½) → (λ_a, 0) → (λ_b, 0) → (λ_b, ½) → γ(t1)` through
/// the nearest singular lines, each segment costed with a certified disc.
pub fn example3_chain_experiment(
    dom: &Example3Domain,
    t0: f64,
    t1: f64,
    cfg: &ChainExperimentConfig,
) -> Result<ChainReport> {
    for t in [t0, t1] {
        if !(0.0..=1.0).contains(&t) {
            return Err(Error::InvalidParameter(format!("curve parameter {t} outside [0, 1]")));
        }
    }
    let model = DomainModel::from_example3(dom.clone());
    let gamma = ParametricCurve::Example3Gamma;
    let (a, b) = (gamma.point(t0), gamma.point(t1));
    let mut report = ChainReport {
        t0,
        t1,
        k_terms: dom.params().k_terms(),
        j_terms: dom.params().j_terms(),
        segments: vec![],
        total: 0.0,
        hop_distances: [0.0; 2],
        lines: [C64::new(0.0, 0.0); 2],
    };
    if t0 == t1 {
        return Ok(report);
    }
    let mut line_for = |p: &CPoint, slot: usize| -> Result<C64> {
        let (lambda, dist) = dom.nearest_singular_line(p[0]);
        if dist > cfg.hop_radius {
            return Err(Error::NoSingularLine { point: p.to_string(), radius: cfg.hop_radius });
        }
        report.hop_distances[slot] = dist;
        report.lines[slot] = lambda;
        Ok(lambda)
    };
    let la = line_for(&a, 0)?;
    let lb = line_for(&b, 1)?;
    let height = a[1];
    let pt = |x: C64, y: C64| CPoint::from_vec_unchecked(vec![x, y]);
    let zero = C64::new(0.0, 0.0);
    let legs = [
        (SegmentKind::Hop, a.clone(), pt(la, height)),
        (SegmentKind::Vertical, pt(la, height), pt(la, zero)),
        (SegmentKind::Transport, pt(la, zero), pt(lb, zero)),
        (SegmentKind::Vertical, pt(lb, zero), pt(lb, height)),
        (SegmentKind::Hop, pt(lb, height), b.clone()),
    ];
    for (kind, from, to) in legs {
        if from == to {
            continue;
        }
        let est = lempert_upper(&model, &from, &to, &cfg.search)?;
        let min_margin = match &est.witness {
            Witness::Disc { certificate, .. } => certificate.min_margin,
            Witness::Constant => f64::INFINITY,
            _ => {
                return Err(Error::VacuousBound(est.value));
            }
        };
        let cost = crate::disc_search::atanh_checked(est.value)?;
        report.total += cost;
        report.segments.push(SegmentReport { kind, from, to, lempert_star: est.value, cost, min_margin });
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::example_domains::Example3Params;
    use crate::oracles::{oracle_kappa, OracleDomainTag};

    #[test]
    fn euclidean_segment_length() {
        let seg = ParametricCurve::segment(CPoint::from_real(&[0.0]).unwrap(), CPoint::from_real(&[1.0]).unwrap())
            .unwrap();
        for (_, l) in length_ladder(|a: &CPoint, b: &CPoint| Ok(a.distance(b)), &seg, 4).unwrap() {
            assert!((l - 1.0).abs() < 1e-12);
        }
        let c = ParametricCurve::Constant { point: CPoint::origin(2) };
        assert_eq!(length_by_distance(|a: &CPoint, b: &CPoint| Ok(a.distance(b)), &c, 8).unwrap(), 0.0);
    }

    #[test]
    fn poincare_length_of_a_radius() {
        let seg = ParametricCurve::segment(CPoint::from_real(&[0.0]).unwrap(), CPoint::from_real(&[0.5]).unwrap())
            .unwrap();
        let mu = |z: &CPoint, x: &CVector| Ok(oracle_kappa(&OracleDomainTag::UnitDisc, z, x)?.value);
        let l = length_by_metric(mu, &seg, 257).unwrap();
        assert!((l - 0.5f64.atanh()).abs() < 1e-5, "{l}");
    }

    #[test]
    fn gamma_speed() {
        let l = length_by_metric(|_: &CPoint, x: &CVector| Ok(x.norm()), &ParametricCurve::Example3Gamma, 5).unwrap();
        assert!((l - 0.5).abs() < 1e-15);
        assert_eq!(length_by_metric(|_: &CPoint, _: &CVector| Ok(0.0), &ParametricCurve::Example3Gamma, 9).unwrap(), 0.0);
    }

    #[test]
    fn chain_between_equal_parameters_is_empty() {
        let dom = Example3Domain::new(Example3Params::new(20, 10).unwrap());
        let r = example3_chain_experiment(&dom, 0.3, 0.3, &Default::default()).unwrap();
        assert_eq!(r.total, 0.0);
        assert!(r.segments.is_empty());
    }

    #[test]
    fn transport_along_the_zero_line_is_free() {
        let dom = Example3Domain::new(Example3Params::new(20, 10).unwrap());
        let model = DomainModel::from_example3(dom);
        let a = CPoint::new(vec![C64::new(-3.0, 1.0), C64::new(0.0, 0.0)]).unwrap();
        let b = CPoint::new(vec![C64::new(5.0, -2.0), C64::new(0.0, 0.0)]).unwrap();
        let est = lempert_upper(&model, &a, &b, &SearchConfig::linear()).unwrap();
        assert!(est.value < 1e-9, "{}", est.value);
    }
}
