//! Difference-quotient estimators for the derivatives `𝒟k^(m)` (limsup) and
//! `𝒟̲k^(m)` (liminf), the liminf `κ̲` of the metric itself, and the two
//! verification checks built from them.
//!
//! The schedule acts on the unit direction `u` of `X`: at level `i` it samples
//! complex `t` with `|t| ∈ [ρ_i/2, ρ_i]`, `w` with `‖w − z‖ ≤ ρ_i` and `Y` with
//! `‖Y − u‖ ≤ ρ_i`, records `k(w, w + tY)/|t|`, and the result is rescaled by
//! `‖X‖`. Each sample draws from its own random stream keyed by
//! `(seed, level, index)`, so traces do not depend on the worker count.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::disc_search::{canonical_direction, SearchConfig};
use crate::error::{Error, Result};
use crate::geometry::{check_dim, fmt_num, CPoint, CVector, DomainModel, C64};
use crate::higher_metrics::{
    chain_cost, mth_kobayashi, Chain, InfinitesimalMetric, LadderConfig, LempertEvaluator, OracleKappa,
    OracleLempert, SearchKappa, SearchLempert,
};
use crate::oracles::OracleDomainTag;
use crate::rng;
use rand::Rng;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ShrinkSchedule {
    pub rho0: f64,
    pub levels: usize,
    pub factor: f64,
    pub samples_per_level: usize,
    pub seed: u64,
}

impl Default for ShrinkSchedule {
    fn default() -> Self {
        Self { rho0: 0.1, levels: 6, factor: 0.5, samples_per_level: 64, seed: 0 }
    }
}

impl ShrinkSchedule {
    pub fn validate(&self) -> Result<()> {
        if !(self.rho0 > 0.0 && self.rho0.is_finite()) {
            return Err(Error::InvalidParameter(format!("rho0 must be positive, got {}", self.rho0)));
        }
        if !(self.factor > 0.0 && self.factor < 1.0) {
            return Err(Error::InvalidParameter(format!("factor must lie in (0, 1), got {}", self.factor)));
        }
        if self.samples_per_level < 8 {
            return Err(Error::InvalidParameter(format!(
                "samples_per_level must be at least 8, got {}",
                self.samples_per_level
            )));
        }
        if self.levels == 0 {
            return Err(Error::InvalidParameter("levels must be at least 1".into()));
        }
        Ok(())
    }

    pub fn radius(&self, level: usize) -> f64 {
        self.rho0 * self.factor.powi(level as i32)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LevelTrace {
    pub rho: f64,
    pub max: f64,
    pub min: f64,
    pub samples: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct QuotientTrace {
    pub levels: Vec<LevelTrace>,
    /// Last-level maximum.
    pub upper_limit: f64,
    /// Last-level minimum.
    pub lower_limit: f64,
    /// Two-level extrapolants `(q_L − f·q_{L−1})/(1 − f)`, clamped at 0.
    pub upper_extrapolated: f64,
    pub lower_extrapolated: f64,
}

impl QuotientTrace {
    fn from_levels(levels: Vec<LevelTrace>, factor: f64) -> Self {
        let last = &levels[levels.len() - 1];
        let (upper_limit, lower_limit) = (last.max, last.min);
        let extrap = |pick: fn(&LevelTrace) -> f64| {
            if levels.len() < 2 {
                return pick(last);
            }
            let prev = pick(&levels[levels.len() - 2]);
            ((pick(last) - factor * prev) / (1.0 - factor)).max(0.0)
        };
        let upper_extrapolated = extrap(|l| l.max);
        let lower_extrapolated = extrap(|l| l.min);
        Self { levels, upper_limit, lower_limit, upper_extrapolated, lower_extrapolated }
    }

    fn zero(sched: &ShrinkSchedule) -> Self {
        let levels = (0..sched.levels)
            .map(|i| LevelTrace { rho: sched.radius(i), max: 0.0, min: 0.0, samples: 0 })
            .collect();
        Self::from_levels(levels, sched.factor)
    }

    fn scaled(mut self, s: f64) -> Self {
        for l in &mut self.levels {
            l.max *= s;
            l.min *= s;
        }
        self.upper_limit *= s;
        self.lower_limit *= s;
        self.upper_extrapolated *= s;
        self.lower_extrapolated *= s;
        self
    }
}

/// A function of two points, typically `k^(m)` or an upper bound for it.
pub trait TwoPointEvaluator: Sync {
    fn domain(&self) -> &DomainModel;
    fn distance(&self, a: &CPoint, b: &CPoint) -> Result<f64>;
}

/// `k̃ = tanh⁻¹ k̃*` from a Lempert evaluator.
pub struct LempertDistance<'a> {
    pub base: &'a dyn LempertEvaluator,
}

impl TwoPointEvaluator for LempertDistance<'_> {
    fn domain(&self) -> &DomainModel {
        self.base.domain()
    }
    fn distance(&self, a: &CPoint, b: &CPoint) -> Result<f64> {
        if a == b {
            return Ok(0.0);
        }
        self.base.lempert(a, b)
    }
}

/// Upper bound for `k^(m)(a, b)`: the cheaper of the single segment and the
/// chain that follows a decomposition of the reference direction, with each
/// part rescaled coordinatewise to fit `b − a`.
pub struct ChainDistance<'a> {
    pub base: &'a dyn LempertEvaluator,
    pub reference: CVector,
    pub parts: Vec<CVector>,
    pub margin_eps: f64,
}

impl ChainDistance<'_> {
    fn seed_chain(&self, a: &CPoint, b: &CPoint) -> Chain {
        let step = b.diff(a);
        let n = step.dim();
        let m = self.parts.len();
        let mut points = vec![a.clone()];
        let mut cur = a.clone();
        for (j, part) in self.parts.iter().enumerate() {
            if j + 1 == m {
                points.push(b.clone());
                break;
            }
            let p: Vec<C64> = (0..n)
                .map(|i| {
                    let r = self.reference[i];
                    if r.norm() > 1e-12 {
                        part[i] * (step[i] / r)
                    } else {
                        step[i] / m as f64
                    }
                })
                .collect();
            cur = cur.offset(C64::new(1.0, 0.0), &CVector::from_vec_unchecked(p));
            points.push(cur.clone());
        }
        Chain { points }
    }
}

impl TwoPointEvaluator for ChainDistance<'_> {
    fn domain(&self) -> &DomainModel {
        self.base.domain()
    }
    fn distance(&self, a: &CPoint, b: &CPoint) -> Result<f64> {
        if a == b {
            return Ok(0.0);
        }
        let single = self.base.lempert(a, b)?;
        if self.parts.len() < 2 {
            return Ok(single);
        }
        let chained = chain_cost(self.base, &self.seed_chain(a, b), self.margin_eps);
        Ok(single.min(chained))
    }
}

const RETRY_CAP: u64 = 200;

fn sample_triple(
    dom: &DomainModel,
    z: &CPoint,
    u: &[C64],
    rho: f64,
    seed: u64,
    level: usize,
    index: usize,
) -> Result<(CPoint, CPoint, C64)> {
    let n = z.dim();
    for attempt in 0..RETRY_CAP {
        let mut r = rng::stream(seed, &[level as u64, index as u64, attempt]);
        let modulus = rho * 0.5f64.powf(r.random::<f64>());
        let t = C64::from_polar(modulus, 2.0 * std::f64::consts::PI * r.random::<f64>());
        let dw = rng::unit_ball(&mut r, n);
        let dy = rng::unit_ball(&mut r, n);
        let w: Vec<C64> = z.as_slice().iter().zip(&dw).map(|(a, d)| a + d * rho).collect();
        let y: Vec<C64> = u.iter().zip(&dy).map(|(a, d)| a + d * rho).collect();
        let w2: Vec<C64> = w.iter().zip(&y).map(|(a, b)| a + t * b).collect();
        if dom.margin_slice(&w) > 0.0 && dom.margin_slice(&w2) > 0.0 {
            return Ok((CPoint::from_vec_unchecked(w), CPoint::from_vec_unchecked(w2), t));
        }
    }
    Err(Error::SampleExhausted(RETRY_CAP as usize))
}

/// Per-level max/min of `k(w, w + tY)/|t|`.
pub fn derivative_estimate(
    kmap: &dyn TwoPointEvaluator,
    z: &CPoint,
    x: &CVector,
    sched: &ShrinkSchedule,
) -> Result<QuotientTrace> {
    sched.validate()?;
    let dom = kmap.domain();
    check_dim(dom.dim(), z.dim())?;
    check_dim(dom.dim(), x.dim())?;
    dom.require_inside(z)?;
    if x.is_zero() {
        return Ok(QuotientTrace::zero(sched));
    }
    let u = canonical_direction(x);
    let mut levels = Vec::with_capacity(sched.levels);
    for level in 0..sched.levels {
        let rho = sched.radius(level);
        let quotients: Vec<f64> = (0..sched.samples_per_level)
            .into_par_iter()
            .map(|i| {
                let (w, w2, t) = sample_triple(dom, z, &u, rho, sched.seed, level, i)?;
                Ok(kmap.distance(&w, &w2)? / t.norm())
            })
            .collect::<Result<Vec<f64>>>()?;
        let max = quotients.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let min = quotients.iter().cloned().fold(f64::INFINITY, f64::min);
        levels.push(LevelTrace { rho, max, min, samples: quotients.len() });
    }
    Ok(QuotientTrace::from_levels(levels, sched.factor).scaled(x.norm()))
}

/// Per-level max/min of `κ(z'; X')` over `‖z' − z‖ ≤ ρ_i`, `‖X' − X‖ ≤ ρ_i‖X‖`;
/// the lower limit is the estimate of `κ̲(z; X)`.
pub fn underline_kappa(
    metric: &dyn InfinitesimalMetric,
    dom: &DomainModel,
    z: &CPoint,
    x: &CVector,
    sched: &ShrinkSchedule,
) -> Result<QuotientTrace> {
    sched.validate()?;
    check_dim(dom.dim(), z.dim())?;
    check_dim(dom.dim(), x.dim())?;
    dom.require_inside(z)?;
    if x.is_zero() {
        return Ok(QuotientTrace::zero(sched));
    }
    let u = canonical_direction(x);
    let mut levels = Vec::with_capacity(sched.levels);
    for level in 0..sched.levels {
        let rho = sched.radius(level);
        let values: Vec<f64> = (0..sched.samples_per_level)
            .into_par_iter()
            .map(|i| {
                let (w, w2, t) = sample_triple(dom, z, &u, rho, sched.seed, level, i)?;
                let y = w2.diff(&w).scale(t.inv());
                Ok(metric.kappa(&w, &y)?.value)
            })
            .collect::<Result<Vec<f64>>>()?;
        let max = values.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let min = values.iter().cloned().fold(f64::INFINITY, f64::min);
        levels.push(LevelTrace { rho, max, min, samples: values.len() });
    }
    Ok(QuotientTrace::from_levels(levels, sched.factor).scaled(x.norm()))
}

/// Settings shared by the verification checks.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct CheckConfig {
    pub schedule: ShrinkSchedule,
    pub ladder: LadderConfig,
    /// Disc search used where no closed form exists; balanced domains use it
    /// away from the origin.
    pub search: SearchConfig,
    pub rel_tol: f64,
    pub abs_tol: f64,
    pub theorem1_tol: f64,
}

impl Default for CheckConfig {
    fn default() -> Self {
        Self {
            schedule: ShrinkSchedule::default(),
            ladder: LadderConfig::default(),
            search: SearchConfig { alpha_rel_tol: 1e-5, ..SearchConfig::linear() },
            rel_tol: 0.02,
            abs_tol: 1e-3,
            theorem1_tol: 0.03,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CheckRow {
    pub check: String,
    pub domain: String,
    pub z: CPoint,
    pub x: CVector,
    pub m: usize,
    /// `κ^(m)(z; X)`.
    pub kappa_m: f64,
    pub upper: f64,
    pub lower: f64,
    pub tol: f64,
    pub pass: bool,
    pub witness: String,
    pub trace: QuotientTrace,
}

struct Backends {
    metric: Box<dyn InfinitesimalMetric>,
    lempert: Box<dyn LempertEvaluator>,
}

fn backends(dom: &DomainModel, z: &CPoint, search: &SearchConfig) -> Backends {
    let at_origin = z.as_slice().iter().all(|c| c.norm() == 0.0);
    match OracleDomainTag::from_domain(dom) {
        Ok(OracleDomainTag::BalancedAtOrigin { .. }) => {
            let metric: Box<dyn InfinitesimalMetric> = if at_origin {
                Box::new(OracleKappa::new(dom).expect("balanced oracle"))
            } else {
                Box::new(SearchKappa { dom: dom.clone(), cfg: search.clone() })
            };
            Backends { metric, lempert: Box::new(SearchLempert { dom: dom.clone(), cfg: search.clone() }) }
        }
        Ok(_) => Backends {
            metric: Box::new(OracleKappa::new(dom).expect("oracle")),
            lempert: Box::new(OracleLempert::new(dom).expect("oracle")),
        },
        Err(_) => Backends {
            metric: Box::new(SearchKappa { dom: dom.clone(), cfg: search.clone() }),
            lempert: Box::new(SearchLempert { dom: dom.clone(), cfg: search.clone() }),
        },
    }
}

/// `κ^(m)` at the unit direction of `X`, its decomposition and `‖X‖`.
fn kappa_m_unit(
    metric: &dyn InfinitesimalMetric,
    z: &CPoint,
    x: &CVector,
    m: usize,
    ladder: &LadderConfig,
) -> Result<(f64, CVector, Vec<CVector>, String)> {
    let u = CVector::from_vec_unchecked(canonical_direction(x));
    let est = mth_kobayashi(metric, z, &u, m, ladder)?;
    let parts = match &est.witness {
        crate::disc_search::Witness::Decomposition { parts } => parts.clone(),
        _ => vec![u.clone()],
    };
    Ok((est.value, u, parts, est.witness.summary()))
}

fn quotient_trace(
    lempert: &dyn LempertEvaluator,
    z: &CPoint,
    x: &CVector,
    u: CVector,
    parts: Vec<CVector>,
    cfg: &CheckConfig,
) -> Result<QuotientTrace> {
    if parts.len() < 2 {
        derivative_estimate(&LempertDistance { base: lempert }, z, x, &cfg.schedule)
    } else {
        let kmap = ChainDistance { base: lempert, reference: u, parts, margin_eps: cfg.ladder.margin_eps };
        derivative_estimate(&kmap, z, x, &cfg.schedule)
    }
}

fn check_m(m: usize) -> Result<()> {
    if m < 1 {
        return Err(Error::InvalidParameter("m must be at least 1".into()));
    }
    Ok(())
}

/// `κ^(m)(z; X)` together with the quotient trace of `k^(m)` at `(z, X)`,
/// using closed forms where available and disc search elsewhere.
pub fn kappa_and_trace(
    dom: &DomainModel,
    z: &CPoint,
    x: &CVector,
    m: usize,
    cfg: &CheckConfig,
) -> Result<(f64, QuotientTrace, String)> {
    check_m(m)?;
    check_dim(dom.dim(), z.dim())?;
    check_dim(dom.dim(), x.dim())?;
    dom.require_inside(z)?;
    let b = backends(dom, z, &cfg.search);
    if x.is_zero() {
        let trace = derivative_estimate(&LempertDistance { base: b.lempert.as_ref() }, z, x, &cfg.schedule)?;
        return Ok((0.0, trace, "zero".into()));
    }
    let (k_unit, u, parts, witness) = kappa_m_unit(b.metric.as_ref(), z, x, m, &cfg.ladder)?;
    let trace = quotient_trace(b.lempert.as_ref(), z, x, u, parts, cfg)?;
    Ok((k_unit * x.norm(), trace, witness))
}

/// `κ^(m)(z; X) ≥ 𝒟k^(m)(z; X)` up to `rel_tol·lhs + abs_tol`.
pub fn prop2_check(dom: &DomainModel, z: &CPoint, x: &CVector, m: usize, cfg: &CheckConfig) -> Result<CheckRow> {
    let (kappa_m, trace, witness) = kappa_and_trace(dom, z, x, m, cfg)?;
    let tol = cfg.rel_tol * kappa_m + cfg.abs_tol;
    Ok(CheckRow {
        check: "prop2".into(),
        domain: dom.label(),
        z: z.clone(),
        x: x.clone(),
        m,
        kappa_m,
        upper: trace.upper_limit,
        lower: trace.lower_limit,
        tol,
        pass: kappa_m >= trace.upper_limit - tol,
        witness,
        trace,
    })
}

/// Both quotient limits of `k^(m)` agree with `κ^(m)` within `theorem1_tol`
/// (relative), on a domain with closed-form metric.
pub fn theorem1_check(dom: &DomainModel, z: &CPoint, x: &CVector, m: usize, cfg: &CheckConfig) -> Result<CheckRow> {
    check_m(m)?;
    check_dim(dom.dim(), x.dim())?;
    if let OracleDomainTag::BalancedAtOrigin { .. } = OracleDomainTag::from_domain(dom)? {
        return Err(Error::OracleUnsupported(
            "the equality check needs a metric known near z; use the disc, polydisc or ball".into(),
        ));
    }
    let (kappa_m, trace, witness) = kappa_and_trace(dom, z, x, m, cfg)?;
    let tol = cfg.theorem1_tol * kappa_m;
    let pass = (kappa_m - trace.upper_limit).abs() <= tol && (kappa_m - trace.lower_limit).abs() <= tol;
    Ok(CheckRow {
        check: "theorem1".into(),
        domain: dom.label(),
        z: z.clone(),
        x: x.clone(),
        m,
        kappa_m,
        upper: trace.upper_limit,
        lower: trace.lower_limit,
        tol,
        pass,
        witness,
        trace,
    })
}

impl CheckRow {
    pub fn summary(&self) -> String {
        format!(
            "{} {} z=({}) X=({}) m={} kappa_m={} upper={} lower={} tol={} {}",
            self.check,
            self.domain,
            self.z,
            self.x,
            self.m,
            fmt_num(self.kappa_m),
            fmt_num(self.upper),
            fmt_num(self.lower),
            fmt_num(self.tol),
            if self.pass { "pass" } else { "FAIL" }
        )
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{DomainDescriptor, Gauge};

    fn disc() -> DomainModel {
        DomainModel::new(&DomainDescriptor::UnitDisc).unwrap()
    }

    #[test]
    fn schedule_validation() {
        assert!(ShrinkSchedule { factor: 1.0, ..Default::default() }.validate().is_err());
        assert!(ShrinkSchedule { samples_per_level: 4, ..Default::default() }.validate().is_err());
        assert!(ShrinkSchedule { rho0: 0.0, ..Default::default() }.validate().is_err());
        assert!((ShrinkSchedule::default().radius(2) - 0.025).abs() < 1e-15);
    }

    #[test]
    fn disc_quotients_approach_kappa() {
        let d = disc();
        let base = OracleLempert::new(&d).unwrap();
        let x = CVector::from_real(&[1.0]).unwrap();
        let tr = derivative_estimate(&LempertDistance { base: &base }, &CPoint::origin(1), &x, &Default::default())
            .unwrap();
        assert!((tr.upper_limit - 1.0).abs() < 0.03, "{tr:?}");
        assert!((tr.lower_limit - 1.0).abs() < 0.03, "{tr:?}");
        assert!(tr.upper_limit >= tr.lower_limit);
    }

    #[test]
    fn zero_direction_gives_zero() {
        let d = disc();
        let base = OracleLempert::new(&d).unwrap();
        let tr = derivative_estimate(&LempertDistance { base: &base }, &CPoint::origin(1), &CVector::zeros(1), &Default::default())
            .unwrap();
        assert_eq!(tr.upper_limit, 0.0);
        assert_eq!(tr.lower_limit, 0.0);
    }

    #[test]
    fn checks_on_the_disc() {
        let d = disc();
        let cfg = CheckConfig::default();
        let z = CPoint::from_real(&[0.5]).unwrap();
        let x = CVector::from_real(&[1.0]).unwrap();
        let row = theorem1_check(&d, &z, &x, 1, &cfg).unwrap();
        assert!(row.pass, "{}", row.summary());
        assert!((row.kappa_m - 4.0 / 3.0).abs() < 1e-12);
        assert!(prop2_check(&d, &z, &x, 1, &cfg).unwrap().pass);
    }

    #[test]
    fn theorem1_rejects_balanced_domains() {
        let d = DomainModel::new(&DomainDescriptor::balanced(Gauge::GeoMean, 2)).unwrap();
        let r = theorem1_check(&d, &CPoint::origin(2), &CVector::unit(2, 0), 1, &CheckConfig::default());
        assert!(matches!(r, Err(Error::OracleUnsupported(_))));
    }

    #[test]
    fn underline_kappa_on_disc() {
        let d = disc();
        let metric = OracleKappa::new(&d).unwrap();
        let tr = underline_kappa(&metric, &d, &CPoint::origin(1), &CVector::from_real(&[1.0]).unwrap(), &Default::default())
            .unwrap();
        assert!((tr.lower_limit - 1.0).abs() < 0.01, "{tr:?}");
    }
}
