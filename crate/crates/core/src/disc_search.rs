//! Upper bounds for the Lempert function `k̃*` and the Kobayashi–Royden metric
//! `κ` by searching over polynomial analytic discs.
//!
//! A candidate disc `f(ζ) = c₀ + c₁ζ + … + c_dζ^d` always satisfies the
//! interpolation constraints exactly: `c₀ = z`, and either `f(α) = w` (Lempert)
//! or `α·c₁ = X` (Kobayashi–Royden); `c₁` is solved for, the higher
//! coefficients are free. Containment `f(ρ𝔻) ⊂ D` is certified by requiring the
//! domain margin to be at least `margin_eps` at `boundary_samples` equispaced
//! points of the circle `|ζ| = ρ`. The reported value is `α/ρ`: the disc
//! `ζ ↦ f(ρζ)` lives on the unit disc and hits the target at `α/ρ`.
//!
//! For each degree the smallest feasible `α` is located by bisection, with a
//! Nelder–Mead search over the free coefficients deciding feasibility. The
//! search runs `restarts` independent chains (chain 0 warm-started, the others
//! randomly perturbed) through degrees `1..=degree`; the result is the minimum
//! over chains, so adding degrees or restarts never increases it.

use std::f64::consts::PI;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{check_dim, CPoint, CVector, DomainModel, C64};
use crate::optim::NelderMead;
use crate::rng;

/// Knobs of the disc search.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SearchConfig {
    pub degree: usize,
    pub restarts: usize,
    pub rho: f64,
    pub boundary_samples: usize,
    pub margin_eps: f64,
    /// Function evaluations per Nelder–Mead feasibility run.
    pub max_iters: usize,
    pub seed: u64,
    /// Relative width at which the bisection on `α` stops.
    pub alpha_rel_tol: f64,
}

impl Default for SearchConfig {
    fn default() -> Self {
        Self { degree: 4, restarts: 8, rho: 0.995, boundary_samples: 256, margin_eps: 1e-3, max_iters: 400, seed: 0, alpha_rel_tol: 1e-6 }
    }
}

impl SearchConfig {
    /// Degree-one discs only: the linear-disc bound.
    pub fn linear() -> Self {
        Self { degree: 1, restarts: 1, ..Self::default() }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidParameter(m));
        if self.degree == 0 {
            return bad("search degree must be at least 1".into());
        }
        if self.restarts == 0 {
            return bad("search restarts must be at least 1".into());
        }
        if !(self.rho > 0.0 && self.rho < 1.0) {
            return bad(format!("rho must lie in (0, 1), got {}", self.rho));
        }
        if self.boundary_samples < 8 {
            return bad(format!("boundary_samples must be at least 8, got {}", self.boundary_samples));
        }
        if !(self.margin_eps > 0.0) {
            return bad(format!("margin_eps must be positive, got {}", self.margin_eps));
        }
        if self.max_iters == 0 {
            return bad("max_iters must be positive".into());
        }
        if !(self.alpha_rel_tol > 0.0 && self.alpha_rel_tol < 0.5) {
            return bad(format!("alpha_rel_tol must lie in (0, 0.5), got {}", self.alpha_rel_tol));
        }
        Ok(())
    }
}

/// Polynomial map `ζ ↦ center + Σ_k coeffs[k-1] ζ^k`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AnalyticDisc {
    pub center: CPoint,
    pub coeffs: Vec<CVector>,
}

impl AnalyticDisc {
    pub fn constant(center: CPoint) -> Self {
        Self { center, coeffs: vec![] }
    }

    pub fn degree(&self) -> usize {
        self.coeffs.len()
    }

    pub fn eval(&self, zeta: C64) -> CPoint {
        let n = self.center.dim();
        let mut out = self.center.as_slice().to_vec();
        let mut p = C64::new(1.0, 0.0);
        for c in &self.coeffs {
            p *= zeta;
            for i in 0..n {
                out[i] += c[i] * p;
            }
        }
        CPoint::from_vec_unchecked(out)
    }

    /// Derivative at the origin.
    pub fn velocity(&self) -> CVector {
        self.coeffs.first().cloned().unwrap_or_else(|| CVector::zeros(self.center.dim()))
    }
}

/// Discretized containment certificate on the circle `|ζ| = radius`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ContainmentCert {
    pub boundary_samples: usize,
    pub radius: f64,
    pub min_margin: f64,
}

/// Minimum margin of `disc` over `samples` equispaced points of `|ζ| = radius`.
pub fn certify(dom: &DomainModel, disc: &AnalyticDisc, radius: f64, samples: usize) -> Result<ContainmentCert> {
    check_dim(dom.dim(), disc.center.dim())?;
    let margin_at = |s: usize| {
        let zeta = C64::from_polar(radius, 2.0 * PI * s as f64 / samples as f64);
        nan_low(dom.margin_slice(disc.eval(zeta).as_slice()))
    };
    let min_margin = if dom.is_expensive() {
        (0..samples).into_par_iter().map(margin_at).reduce(|| f64::INFINITY, f64::min)
    } else {
        (0..samples).map(margin_at).fold(f64::INFINITY, f64::min)
    };
    Ok(ContainmentCert { boundary_samples: samples, radius, min_margin })
}

fn nan_low(x: f64) -> f64 {
    if x.is_nan() {
        f64::NEG_INFINITY
    } else {
        x
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum BoundKind {
    UpperBound,
    OracleExact,
}

impl BoundKind {
    pub fn as_str(self) -> &'static str {
        match self {
            BoundKind::UpperBound => "upper-bound",
            BoundKind::OracleExact => "oracle-exact",
        }
    }
}

/// What achieved a reported value.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "kebab-case")]
pub enum Witness {
    /// A certified disc hitting its target at parameter `alpha` (on the
    /// `ρ`-scaled disc).
    Disc { disc: AnalyticDisc, alpha: f64, certificate: ContainmentCert },
    Constant,
    Oracle { tag: String },
    Decomposition { parts: Vec<CVector> },
    Chain { points: Vec<CPoint> },
    Vacuous,
}

impl Witness {
    pub fn summary(&self) -> String {
        match self {
            Witness::Disc { disc, certificate, .. } => {
                format!("disc(deg={},min_margin={:.3e})", disc.degree(), certificate.min_margin)
            }
            Witness::Constant => "constant".into(),
            Witness::Oracle { tag } => format!("oracle({tag})"),
            Witness::Decomposition { parts } => {
                let p: Vec<String> = parts.iter().map(|v| format!("[{v}]")).collect();
                format!("parts{}", p.join(""))
            }
            Witness::Chain { points } => format!("chain({} segments)", points.len().saturating_sub(1)),
            Witness::Vacuous => "vacuous".into(),
        }
    }
}

/// A value with its bound direction and witness.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MetricEstimate {
    pub value: f64,
    pub kind: BoundKind,
    pub witness: Witness,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub diagnostic: Option<String>,
}

impl MetricEstimate {
    pub fn upper(value: f64, witness: Witness) -> Self {
        Self { value, kind: BoundKind::UpperBound, witness, diagnostic: None }
    }

    pub fn exact(value: f64, witness: Witness) -> Self {
        Self { value, kind: BoundKind::OracleExact, witness, diagnostic: None }
    }

    pub fn zero() -> Self {
        Self::upper(0.0, Witness::Constant)
    }
}

/// `k̃ = tanh⁻¹ k̃*`.
pub fn lempert_tanh(est: &MetricEstimate) -> Result<f64> {
    atanh_checked(est.value)
}

pub(crate) fn atanh_checked(v: f64) -> Result<f64> {
    if !(0.0..1.0).contains(&v) {
        return Err(Error::VacuousBound(v));
    }
    Ok(v.atanh())
}

const ALPHA_MIN: f64 = 1e-12;
const QUANTUM: f64 = (1u64 << 40) as f64;

/// Unit direction with its dominant component rotated to the positive real
/// axis and snapped to a `2^-40` grid, so that `X` and `λX` share it.
pub(crate) fn canonical_direction(x: &CVector) -> Vec<C64> {
    let norm = x.norm();
    let mags: Vec<f64> = x.as_slice().iter().map(|c| c.norm()).collect();
    let max = mags.iter().cloned().fold(0.0, f64::max);
    let p = mags.iter().position(|&m| m >= max * (1.0 - 1e-9)).unwrap_or(0);
    let phase = x[p].conj() / mags[p];
    let q = |v: f64| (v * QUANTUM).round() / QUANTUM;
    x.as_slice()
        .iter()
        .map(|c| {
            let u = c * phase / norm;
            C64::new(q(u.re), q(u.im))
        })
        .collect()
}

#[derive(Clone, Copy)]
enum Target<'a> {
    /// `f(α) = w`
    Point(&'a [C64]),
    /// `α·c₁ = u`
    Direction(&'a [C64]),
}

struct Searcher<'a> {
    dom: &'a DomainModel,
    cfg: &'a SearchConfig,
    z: &'a [C64],
    target: Target<'a>,
    n: usize,
    /// `ζ_s^k` for `s < S`, `k ≤ degree`, row-major.
    powers: Vec<C64>,
    stride: usize,
    alpha_max: f64,
    coeff_scale: f64,
}

#[derive(Clone, Debug)]
struct Candidate {
    alpha: f64,
    degree: usize,
    /// Free coefficients `c₂..c_degree`, interleaved re/im.
    free: Vec<f64>,
    chain: usize,
}

impl<'a> Searcher<'a> {
    fn new(dom: &'a DomainModel, cfg: &'a SearchConfig, z: &'a [C64], target: Target<'a>) -> Self {
        let s = cfg.boundary_samples;
        let stride = cfg.degree + 1;
        let mut powers = Vec::with_capacity(s * stride);
        for i in 0..s {
            let zeta = C64::from_polar(cfg.rho, 2.0 * PI * i as f64 / s as f64);
            let mut p = C64::new(1.0, 0.0);
            for _ in 0..stride {
                powers.push(p);
                p *= zeta;
            }
        }
        let alpha_max = match target {
            Target::Point(_) => cfg.rho * (1.0 - 1e-9),
            Target::Direction(_) => 1e12,
        };
        let n = z.len();
        let m0 = nan_low(dom.margin_slice(z)).clamp(1e-3, 1.0);
        Self { dom, cfg, z, target, n, powers, stride, alpha_max, coeff_scale: 0.3 * m0 / (n as f64).sqrt() }
    }

    /// Full coefficient table `c₀..c_degree` (each an `n`-vector), flattened.
    fn coeffs(&self, alpha: f64, degree: usize, free: &[f64]) -> Vec<C64> {
        let n = self.n;
        let mut c = vec![C64::new(0.0, 0.0); (degree + 1) * n];
        c[..n].copy_from_slice(self.z);
        for k in 2..=degree {
            for i in 0..n {
                let o = ((k - 2) * n + i) * 2;
                c[k * n + i] = C64::new(free[o], free[o + 1]);
            }
        }
        for i in 0..n {
            c[n + i] = match self.target {
                Target::Direction(u) => u[i] / alpha,
                Target::Point(w) => {
                    let mut rhs = w[i] - self.z[i];
                    let mut ap = alpha;
                    for k in 2..=degree {
                        ap *= alpha;
                        rhs -= c[k * n + i] * ap;
                    }
                    rhs / alpha
                }
            };
        }
        c
    }

    fn margin_at(&self, c: &[C64], degree: usize, s: usize, buf: &mut [C64]) -> f64 {
        let n = self.n;
        let pw = &self.powers[s * self.stride..s * self.stride + degree + 1];
        for i in 0..n {
            let mut acc = C64::new(0.0, 0.0);
            for (k, p) in pw.iter().enumerate() {
                acc += c[k * n + i] * p;
            }
            buf[i] = acc;
        }
        nan_low(self.dom.margin_slice(&buf[..n]))
    }

    fn min_margin(&self, c: &[C64], degree: usize) -> f64 {
        let s = self.cfg.boundary_samples;
        if self.dom.is_expensive() {
            (0..s)
                .into_par_iter()
                .map_init(|| vec![C64::new(0.0, 0.0); self.n], |buf, i| self.margin_at(c, degree, i, buf))
                .reduce(|| f64::INFINITY, f64::min)
        } else {
            let mut buf = [C64::new(0.0, 0.0); 8];
            let mut big = vec![];
            let buf: &mut [C64] = if self.n <= 8 {
                &mut buf
            } else {
                big.resize(self.n, C64::new(0.0, 0.0));
                &mut big
            };
            (0..s).map(|i| self.margin_at(c, degree, i, buf)).fold(f64::INFINITY, f64::min)
        }
    }

    fn certified(&self, c: &[C64], degree: usize) -> bool {
        let s = self.cfg.boundary_samples;
        let eps = self.cfg.margin_eps;
        if self.dom.is_expensive() {
            !(0..s)
                .into_par_iter()
                .map_init(|| vec![C64::new(0.0, 0.0); self.n], |buf, i| self.margin_at(c, degree, i, buf))
                .any(|m| m < eps)
        } else {
            let mut buf = vec![C64::new(0.0, 0.0); self.n];
            (0..s).all(|i| self.margin_at(c, degree, i, &mut buf) >= eps)
        }
    }

    /// Tries to find free coefficients making the disc feasible at `alpha`.
    fn feasible_at(&self, alpha: f64, degree: usize, start: &[f64]) -> Option<Vec<f64>> {
        if self.certified(&self.coeffs(alpha, degree, start), degree) {
            return Some(start.to_vec());
        }
        if degree < 2 {
            return None;
        }
        let eps = self.cfg.margin_eps;
        let nm = NelderMead {
            max_evals: self.cfg.max_iters,
            initial_step: self.coeff_scale,
            f_tol: 1e-14,
            x_tol: 1e-12,
            target: Some(-eps),
        };
        let m = nm.minimize(|b| -self.min_margin(&self.coeffs(alpha, degree, b), degree), start);
        (m.value <= -eps && self.certified(&self.coeffs(alpha, degree, &m.x), degree)).then_some(m.x)
    }

    /// Pushes `alpha` down from the feasible `hi` by halving then bisection.
    fn descend(&self, hi: f64, degree: usize, free: Vec<f64>) -> (f64, Vec<f64>) {
        let (mut hi, mut best) = (hi, free);
        let mut lo = hi;
        loop {
            let trial = lo * 0.5;
            if trial < ALPHA_MIN {
                return (hi, best);
            }
            match self.feasible_at(trial, degree, &best) {
                Some(b) => {
                    hi = trial;
                    lo = trial;
                    best = b;
                }
                None => {
                    lo = trial;
                    break;
                }
            }
        }
        for _ in 0..80 {
            if hi - lo <= self.cfg.alpha_rel_tol * hi {
                break;
            }
            let mid = 0.5 * (lo + hi);
            match self.feasible_at(mid, degree, &best) {
                Some(b) => {
                    hi = mid;
                    best = b;
                }
                None => lo = mid,
            }
        }
        (hi, best)
    }

    /// Linear disc: feasibility is monotone in `alpha`, so bracket and bisect.
    /// Linear disc: feasibility is monotone in `alpha`, so bracket the
    /// threshold and close the bracket with the Illinois method.
    fn linear(&self) -> Option<f64> {
        let margin = nan_low(self.dom.margin_slice(self.z)).max(1e-9);
        let gap = |a: f64| self.min_margin(&self.coeffs(a, 1, &[]), 1) - self.cfg.margin_eps;
        let guess = match self.target {
            Target::Point(w) => {
                let d: f64 = w.iter().zip(self.z).map(|(a, b)| (a - b).norm_sqr()).sum::<f64>().sqrt();
                self.cfg.rho * d / margin
            }
            Target::Direction(_) => self.cfg.rho / margin,
        };
        let mut hi = guess.clamp(ALPHA_MIN, self.alpha_max);
        let mut g_hi = gap(hi);
        let (mut lo, mut g_lo);
        if g_hi >= 0.0 {
            loop {
                lo = hi * 0.25;
                if lo < ALPHA_MIN {
                    return Some(hi);
                }
                g_lo = gap(lo);
                if g_lo < 0.0 {
                    break;
                }
                hi = lo;
                g_hi = g_lo;
            }
        } else {
            loop {
                lo = hi;
                g_lo = g_hi;
                if hi >= self.alpha_max {
                    return None;
                }
                hi = (hi * 4.0).min(self.alpha_max);
                g_hi = gap(hi);
                if g_hi >= 0.0 {
                    break;
                }
            }
        }
        let tol = self.cfg.alpha_rel_tol;
        let mut side = 0i8;
        for _ in 0..200 {
            let width = hi - lo;
            if width <= tol * hi {
                break;
            }
            let mut a = if g_lo.is_finite() && g_hi.is_finite() && g_hi > g_lo {
                hi - g_hi * width / (g_hi - g_lo)
            } else {
                0.5 * (lo + hi)
            };
            let step = 0.5 * tol * hi;
            a = a.clamp(lo + step, hi - step);
            let g = gap(a);
            if g >= 0.0 {
                hi = a;
                g_hi = g;
                if side == 1 {
                    g_lo *= 0.5;
                }
                side = 1;
            } else {
                lo = a;
                g_lo = g;
                if side == -1 {
                    g_hi *= 0.5;
                }
                side = -1;
            }
        }
        Some(hi)
    }

    fn pad(&self, free: &[f64], degree: usize) -> Vec<f64> {
        let mut out = free.to_vec();
        out.resize(2 * self.n * (degree.saturating_sub(1)), 0.0);
        out
    }

    /// One restart chain through degrees `2..=degree`.
    fn run_chain(&self, chain: usize, start: &Candidate) -> Candidate {
        let mut best = start.clone();
        let mut cur_free = start.free.clone();
        for degree in start.degree.max(2)..=self.cfg.degree {
            let mut free = self.pad(&cur_free, degree);
            if chain > 0 {
                let mut r = rng::stream(self.cfg.seed, &[chain as u64, degree as u64]);
                let scale = if degree == 2 { self.coeff_scale } else { 0.3 * self.coeff_scale };
                for v in free.iter_mut() {
                    *v += scale * (2.0 * rand::Rng::random::<f64>(&mut r) - 1.0);
                }
            }
            let hi = best.alpha;
            let Some(feasible) = self.feasible_at(hi, degree, &free) else {
                cur_free = free;
                continue;
            };
            let (alpha, b) = self.descend(hi, degree, feasible);
            cur_free = b.clone();
            if alpha < best.alpha {
                best = Candidate { alpha, degree, free: b, chain };
            }
        }
        best
    }

    fn witness(&self, cand: &Candidate) -> Result<Witness> {
        let c = self.coeffs(cand.alpha, cand.degree, &cand.free);
        let n = self.n;
        let coeffs: Vec<CVector> =
            (1..=cand.degree).map(|k| CVector::from_vec_unchecked(c[k * n..(k + 1) * n].to_vec())).collect();
        let disc = AnalyticDisc { center: CPoint::from_vec_unchecked(self.z.to_vec()), coeffs };
        let certificate = certify(self.dom, &disc, self.cfg.rho, self.cfg.boundary_samples)?;
        Ok(Witness::Disc { disc, alpha: cand.alpha, certificate })
    }

    fn seed_candidate(&self, seed: &MetricEstimate) -> Option<Candidate> {
        let Witness::Disc { disc, alpha, .. } = &seed.witness else { return None };
        if disc.center.as_slice() != self.z || disc.degree() == 0 || disc.degree() > self.cfg.degree {
            return None;
        }
        let free: Vec<f64> = disc.coeffs[1..]
            .iter()
            .flat_map(|v| v.as_slice().iter().flat_map(|c| [c.re, c.im]).collect::<Vec<_>>())
            .collect();
        let c = self.coeffs(*alpha, disc.degree(), &free);
        self.certified(&c, disc.degree())
            .then(|| Candidate { alpha: *alpha, degree: disc.degree(), free, chain: usize::MAX })
    }

    fn search(&self, seeds: &[MetricEstimate]) -> Option<Candidate> {
        let mut start = self.linear().map(|alpha| Candidate { alpha, degree: 1, free: vec![], chain: 0 });
        for cand in seeds.iter().filter_map(|s| self.seed_candidate(s)) {
            if start.as_ref().is_none_or(|b| cand.alpha < b.alpha) {
                start = Some(cand);
            }
        }
        let start = start.unwrap_or(Candidate { alpha: self.alpha_max, degree: 1, free: vec![], chain: 0 });
        let results: Vec<Candidate> =
            (0..self.cfg.restarts).into_par_iter().map(|chain| self.run_chain(chain, &start)).collect();
        let feasible_start = start.alpha < self.alpha_max;
        results
            .into_iter()
            .filter(|c| c.alpha < self.alpha_max || feasible_start)
            .min_by(|a, b| {
                a.alpha.total_cmp(&b.alpha).then(a.degree.cmp(&b.degree)).then(a.chain.cmp(&b.chain))
            })
    }
}

/// Upper bound for `k̃*_D(z, w)`.
pub fn lempert_upper(dom: &DomainModel, z: &CPoint, w: &CPoint, cfg: &SearchConfig) -> Result<MetricEstimate> {
    lempert_upper_seeded(dom, z, w, cfg, &[])
}

/// As [`lempert_upper`], also trying the discs of earlier estimates as starts.
pub fn lempert_upper_seeded(
    dom: &DomainModel,
    z: &CPoint,
    w: &CPoint,
    cfg: &SearchConfig,
    seeds: &[MetricEstimate],
) -> Result<MetricEstimate> {
    cfg.validate()?;
    check_dim(dom.dim(), z.dim())?;
    check_dim(dom.dim(), w.dim())?;
    dom.require_inside(z)?;
    dom.require_inside(w)?;
    if z == w {
        return Ok(MetricEstimate::zero());
    }
    let searcher = Searcher::new(dom, cfg, z.as_slice(), Target::Point(w.as_slice()));
    match searcher.search(seeds) {
        Some(best) => {
            let witness = searcher.witness(&best)?;
            Ok(MetricEstimate::upper(best.alpha / cfg.rho, witness))
        }
        None => Ok(MetricEstimate {
            value: 1.0,
            kind: crate::disc_search::BoundKind::UpperBound,
            witness: Witness::Vacuous,
            diagnostic: Some(format!(
                "no certified disc of degree ≤ {} joins {z} to {w}; returning the vacuous bound",
                cfg.degree
            )),
        }),
    }
}

/// Upper bound for `κ_D(z; X)`. The direction is normalized before the search
/// and the result rescaled by `‖X‖`.
pub fn kobayashi_royden_upper(
    dom: &DomainModel,
    z: &CPoint,
    x: &CVector,
    cfg: &SearchConfig,
) -> Result<MetricEstimate> {
    kobayashi_royden_upper_seeded(dom, z, x, cfg, &[])
}

pub fn kobayashi_royden_upper_seeded(
    dom: &DomainModel,
    z: &CPoint,
    x: &CVector,
    cfg: &SearchConfig,
    seeds: &[MetricEstimate],
) -> Result<MetricEstimate> {
    cfg.validate()?;
    check_dim(dom.dim(), z.dim())?;
    check_dim(dom.dim(), x.dim())?;
    dom.require_inside(z)?;
    if x.is_zero() {
        return Ok(MetricEstimate::zero());
    }
    let u = canonical_direction(x);
    let searcher = Searcher::new(dom, cfg, z.as_slice(), Target::Direction(&u));
    match searcher.search(seeds) {
        Some(best) => {
            let witness = searcher.witness(&best)?;
            Ok(MetricEstimate::upper(x.norm() * best.alpha / cfg.rho, witness))
        }
        None => Ok(MetricEstimate {
            value: f64::INFINITY,
            kind: BoundKind::UpperBound,
            witness: Witness::Vacuous,
            diagnostic: Some(format!("no certified disc found at {z} in direction {x}")),
        }),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{DomainDescriptor, Gauge};

    fn disc() -> DomainModel {
        DomainModel::new(&DomainDescriptor::UnitDisc).unwrap()
    }

    fn quick() -> SearchConfig {
        SearchConfig { degree: 3, restarts: 2, boundary_samples: 128, ..Default::default() }
    }

    #[test]
    fn tanh_values() {
        let e = |v| MetricEstimate::upper(v, Witness::Constant);
        assert_eq!(lempert_tanh(&e(0.0)).unwrap(), 0.0);
        assert!((lempert_tanh(&e(0.5)).unwrap() - 0.5493).abs() < 1e-4);
        assert!((lempert_tanh(&e(0.9)).unwrap() - 1.4722).abs() < 1e-4);
        assert_eq!(lempert_tanh(&e(1.0)), Err(Error::VacuousBound(1.0)));
    }

    #[test]
    fn lempert_on_unit_disc_from_origin() {
        let d = disc();
        let z = CPoint::from_real(&[0.0]).unwrap();
        let w = CPoint::from_real(&[0.5]).unwrap();
        let est = lempert_upper(&d, &z, &w, &quick()).unwrap();
        assert!(est.value >= 0.5 - 1e-9, "{}", est.value);
        assert!(est.value <= 0.5 * 1.01, "{}", est.value);
        let Witness::Disc { disc, alpha, certificate } = &est.witness else { panic!() };
        assert!(certificate.min_margin >= 1e-3);
        assert!((disc.eval(C64::new(*alpha, 0.0)).distance(&w)) < 1e-12);
    }

    #[test]
    fn identical_points_cost_nothing() {
        let d = DomainModel::new(&DomainDescriptor::unit_ball(2)).unwrap();
        let z = CPoint::from_real(&[0.1, 0.2]).unwrap();
        let est = lempert_upper(&d, &z, &z, &quick()).unwrap();
        assert_eq!(est.value, 0.0);
        assert_eq!(est.witness, Witness::Constant);
    }

    #[test]
    fn linear_disc_bound_on_balanced_domain() {
        let d = DomainModel::new(&DomainDescriptor::balanced(Gauge::MaxGeo { c: 2.0 }, 2)).unwrap();
        let h = d.balanced_gauge().unwrap().clone();
        let z = CPoint::origin(2);
        for w in [[0.2, 0.2], [0.5, 0.01], [0.0, 0.7]] {
            let w = CPoint::from_real(&w).unwrap();
            let est = lempert_upper(&d, &z, &w, &SearchConfig::linear()).unwrap();
            let hw = h.eval_slice(w.as_slice());
            // the disc ζ ↦ ζ w / h(w) up to the ρ and margin slack
            assert!(est.value <= hw / (0.995 * (1.0 - 1e-3)) + 1e-6, "{} vs {hw}", est.value);
            assert!(est.value >= hw - 1e-9);
        }
    }

    #[test]
    fn kappa_on_unit_disc_at_origin() {
        let d = disc();
        let z = CPoint::from_real(&[0.0]).unwrap();
        let est = kobayashi_royden_upper(&d, &z, &CVector::from_real(&[1.0]).unwrap(), &quick()).unwrap();
        assert!(est.value >= 1.0 - 1e-9 && est.value <= 1.01, "{}", est.value);
    }

    #[test]
    fn kappa_zero_vector() {
        let d = DomainModel::new(&DomainDescriptor::unit_ball(2)).unwrap();
        let est = kobayashi_royden_upper(&d, &CPoint::origin(2), &CVector::zeros(2), &quick()).unwrap();
        assert_eq!(est.value, 0.0);
    }

    #[test]
    fn kappa_on_polydisc() {
        let d = DomainModel::new(&DomainDescriptor::unit_polydisc(2)).unwrap();
        let x = CVector::from_real(&[1.0, 2.0]).unwrap();
        let est = kobayashi_royden_upper(&d, &CPoint::origin(2), &x, &quick()).unwrap();
        assert!(est.value >= 2.0 - 1e-9 && est.value <= 2.0 * 1.01, "{}", est.value);
    }

    #[test]
    fn outside_points_are_rejected() {
        let d = disc();
        let z = CPoint::from_real(&[1.2]).unwrap();
        let w = CPoint::from_real(&[0.0]).unwrap();
        assert!(matches!(lempert_upper(&d, &z, &w, &quick()), Err(Error::NotInDomain(_))));
        assert!(matches!(
            kobayashi_royden_upper(&d, &z, &CVector::from_real(&[1.0]).unwrap(), &quick()),
            Err(Error::NotInDomain(_))
        ));
    }

    #[test]
    fn config_validation() {
        let d = disc();
        let z = CPoint::from_real(&[0.0]).unwrap();
        let w = CPoint::from_real(&[0.1]).unwrap();
        for cfg in [
            SearchConfig { degree: 0, ..quick() },
            SearchConfig { rho: 1.0, ..quick() },
            SearchConfig { boundary_samples: 4, ..quick() },
            SearchConfig { margin_eps: 0.0, ..quick() },
        ] {
            assert!(matches!(lempert_upper(&d, &z, &w, &cfg), Err(Error::InvalidParameter(_))));
        }
    }

    #[test]
    fn homogeneity_is_exact_up_to_rounding() {
        let d = DomainModel::new(&DomainDescriptor::unit_ball(2)).unwrap();
        let z = CPoint::from_real(&[0.2, -0.1]).unwrap();
        let x = CVector::new(vec![C64::new(0.3, 0.4), C64::new(-0.2, 0.1)]).unwrap();
        let base = kobayashi_royden_upper(&d, &z, &x, &quick()).unwrap().value;
        for lam in [C64::new(2.0, 0.0), C64::new(0.0, -3.5), C64::new(-0.7, 0.2)] {
            let v = kobayashi_royden_upper(&d, &z, &x.scale(lam), &quick()).unwrap().value;
            assert!((v - lam.norm() * base).abs() <= 1e-12 * v.max(1.0), "{v} vs {}", lam.norm() * base);
        }
    }

    #[test]
    fn more_degree_or_restarts_never_hurts() {
        let d = DomainModel::new(&DomainDescriptor::unit_ball(2)).unwrap();
        let z = CPoint::from_real(&[0.3, 0.2]).unwrap();
        let w = CPoint::new(vec![C64::new(-0.1, 0.2), C64::new(0.1, -0.3)]).unwrap();
        let run = |degree, restarts| {
            let cfg = SearchConfig { degree, restarts, boundary_samples: 96, ..Default::default() };
            lempert_upper(&d, &z, &w, &cfg).unwrap().value
        };
        let (d2, d3) = (run(2, 2), run(3, 2));
        assert!(d3 <= d2);
        let (r1, r3) = (run(3, 1), run(3, 3));
        assert!(r3 <= r1);
    }

    #[test]
    fn seeding_from_a_subdomain_never_hurts() {
        let ball = DomainModel::new(&DomainDescriptor::unit_ball(2)).unwrap();
        let poly = DomainModel::new(&DomainDescriptor::unit_polydisc(2)).unwrap();
        let z = CPoint::from_real(&[0.1, 0.3]).unwrap();
        let w = CPoint::from_real(&[-0.4, 0.2]).unwrap();
        let cfg = quick();
        let on_ball = lempert_upper(&ball, &z, &w, &cfg).unwrap();
        let on_poly = lempert_upper_seeded(&poly, &z, &w, &cfg, std::slice::from_ref(&on_ball)).unwrap();
        assert!(on_poly.value <= on_ball.value);
    }
}
