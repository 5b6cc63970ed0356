//! Higher-order objects built on `κ` and `k̃`: the m-th Kobayashi metric
//! `κ^(m)` (decompositions of `X`), the Kobayashi–Buseman metric
//! `κ̂ = κ^(2n−1)`, the m-th Lempert function `k^(m)` (chains from `z` to `w`),
//! the Kobayashi pseudodistance, and the convex-hull gauge of a 2D Reinhardt
//! balanced domain.
//!
//! Ladders are nested: the best decomposition (chain) of level `m` padded with
//! a zero part (a repeated point) is a candidate at level `m + 1` and keeps its
//! value, so the outputs are nonincreasing in `m` exactly.

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::disc_search::{
    atanh_checked, kobayashi_royden_upper, lempert_upper, MetricEstimate, SearchConfig, Witness,
};
use crate::error::{Error, Result};
use crate::geometry::{check_dim, CPoint, CVector, DomainModel, MinkowskiFunctional, C64};
use crate::optim::{compass_search, NelderMead};
use crate::oracles::{oracle_kappa, oracle_lempert, OracleDomainTag};
use crate::rng;

/// Budgets of the decomposition and chain searches.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct LadderConfig {
    /// Starts per decomposition level (seeds first, random fill after).
    pub restarts: usize,
    pub max_evals: usize,
    pub seed: u64,
    pub hull_points: usize,
    pub max_m: usize,
    /// Optimized chain starts per level; 0 evaluates the seeds only.
    pub chain_restarts: usize,
    pub chain_max_evals: usize,
    /// Intermediate chain points must keep at least this margin.
    pub margin_eps: f64,
}

impl Default for LadderConfig {
    fn default() -> Self {
        Self {
            restarts: 16,
            max_evals: 3000,
            seed: 0,
            hull_points: 2048,
            max_m: 8,
            chain_restarts: 4,
            chain_max_evals: 600,
            margin_eps: 1e-3,
        }
    }
}

impl LadderConfig {
    pub fn validate(&self) -> Result<()> {
        if self.hull_points < 8 {
            return Err(Error::InvalidParameter(format!("hull_points must be at least 8, got {}", self.hull_points)));
        }
        if self.max_m == 0 {
            return Err(Error::InvalidParameter("max_m must be at least 1".into()));
        }
        if !(self.margin_eps >= 0.0) {
            return Err(Error::InvalidParameter("margin_eps must be nonnegative".into()));
        }
        Ok(())
    }
}

/// Something that returns `κ(z; X)` or an upper bound for it.
pub trait InfinitesimalMetric: Sync {
    fn dim(&self) -> usize;
    fn kappa(&self, z: &CPoint, x: &CVector) -> Result<MetricEstimate>;
}

/// Something that returns `k̃*(z, w)` or an upper bound for it.
pub trait LempertEvaluator: Sync {
    fn domain(&self) -> &DomainModel;
    fn lempert_star(&self, z: &CPoint, w: &CPoint) -> Result<MetricEstimate>;

    /// `k̃ = tanh⁻¹ k̃*`, infinite for a vacuous bound.
    fn lempert(&self, z: &CPoint, w: &CPoint) -> Result<f64> {
        let est = self.lempert_star(z, w)?;
        Ok(atanh_checked(est.value).unwrap_or(f64::INFINITY))
    }
}

pub struct OracleKappa {
    pub tag: OracleDomainTag,
}

impl OracleKappa {
    pub fn new(dom: &DomainModel) -> Result<Self> {
        Ok(Self { tag: OracleDomainTag::from_domain(dom)? })
    }
}

impl InfinitesimalMetric for OracleKappa {
    fn dim(&self) -> usize {
        self.tag.dim()
    }
    fn kappa(&self, z: &CPoint, x: &CVector) -> Result<MetricEstimate> {
        oracle_kappa(&self.tag, z, x)
    }
}

pub struct SearchKappa {
    pub dom: DomainModel,
    pub cfg: SearchConfig,
}

impl InfinitesimalMetric for SearchKappa {
    fn dim(&self) -> usize {
        self.dom.dim()
    }
    fn kappa(&self, z: &CPoint, x: &CVector) -> Result<MetricEstimate> {
        kobayashi_royden_upper(&self.dom, z, x, &self.cfg)
    }
}

pub struct OracleLempert {
    pub tag: OracleDomainTag,
    pub dom: DomainModel,
}

impl OracleLempert {
    pub fn new(dom: &DomainModel) -> Result<Self> {
        Ok(Self { tag: OracleDomainTag::from_domain(dom)?, dom: dom.clone() })
    }
}

impl LempertEvaluator for OracleLempert {
    fn domain(&self) -> &DomainModel {
        &self.dom
    }
    fn lempert_star(&self, z: &CPoint, w: &CPoint) -> Result<MetricEstimate> {
        oracle_lempert(&self.tag, z, w)
    }
}

pub struct SearchLempert {
    pub dom: DomainModel,
    pub cfg: SearchConfig,
}

impl LempertEvaluator for SearchLempert {
    fn domain(&self) -> &DomainModel {
        &self.dom
    }
    fn lempert_star(&self, z: &CPoint, w: &CPoint) -> Result<MetricEstimate> {
        lempert_upper(&self.dom, z, w, &self.cfg)
    }
}

/// `m` vectors summing to `X`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Decomposition {
    pub parts: Vec<CVector>,
}

impl Decomposition {
    /// Builds the decomposition whose last part is `X` minus the free ones.
    pub fn from_free(x: &CVector, free: &[CVector]) -> Self {
        let mut last = x.clone();
        for p in free {
            last = last.sub(p);
        }
        let mut parts = free.to_vec();
        parts.push(last);
        Self { parts }
    }

    pub fn sum(&self) -> CVector {
        let n = self.parts[0].dim();
        self.parts.iter().fold(CVector::zeros(n), |acc, p| acc.add(p))
    }
}

/// Points `z = z_0, …, z_m = w`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Chain {
    pub points: Vec<CPoint>,
}

impl Chain {
    pub fn segments(&self) -> usize {
        self.points.len().saturating_sub(1)
    }

    /// Repeats the last point until the chain has `m` segments.
    pub fn padded(&self, m: usize) -> Chain {
        let mut points = self.points.clone();
        while points.len() < m + 1 {
            points.push(points[points.len() - 1].clone());
        }
        Chain { points }
    }

    pub fn linear(z: &CPoint, w: &CPoint, m: usize) -> Chain {
        let d = w.diff(z);
        let mut points: Vec<CPoint> =
            (0..m).map(|j| z.offset(C64::new(j as f64 / m as f64, 0.0), &d)).collect();
        points.push(w.clone());
        Chain { points }
    }
}

fn reals(v: &[C64]) -> impl Iterator<Item = f64> + '_ {
    v.iter().flat_map(|c| [c.re, c.im])
}

fn complexes(x: &[f64]) -> Vec<C64> {
    x.chunks(2).map(|p| C64::new(p[0], p[1])).collect()
}

fn best_of(results: Vec<(f64, Vec<f64>)>) -> Option<(f64, Vec<f64>)> {
    // first index wins ties, regardless of evaluation order
    results.into_iter().fold(None, |acc, r| match acc {
        Some(a) if !(r.0 < a.0) => Some(a),
        _ => Some(r),
    })
}

/// Local search from `start`: Nelder–Mead then a compass polish.
fn local_search<F: Fn(&[f64]) -> f64>(f: F, start: &[f64], scale: f64, max_evals: usize) -> (f64, Vec<f64>) {
    let nm = NelderMead { max_evals, initial_step: 0.25 * scale, f_tol: 1e-13, x_tol: 1e-11 * scale, target: None };
    let m = nm.minimize(&f, start);
    let p = compass_search(&f, &m.x, 0.02 * scale, 1e-10 * scale, max_evals / 2 + 1);
    if p.value < m.value {
        (p.value, p.x)
    } else {
        (m.value, m.x)
    }
}

/// One rung of the decomposition ladder.
fn decomposition_level(
    metric: &dyn InfinitesimalMetric,
    z: &CPoint,
    x: &CVector,
    m: usize,
    prev: &(f64, Decomposition),
    cfg: &LadderConfig,
) -> (f64, Decomposition) {
    let n = x.dim();
    let cost = |free: &[f64]| -> f64 {
        let parts: Vec<CVector> =
            free.chunks(2 * n).map(|c| CVector::from_vec_unchecked(complexes(c))).collect();
        let d = Decomposition::from_free(x, &parts);
        let mut total = 0.0;
        for p in &d.parts {
            match metric.kappa(z, p) {
                Ok(e) => total += e.value,
                Err(_) => return f64::INFINITY,
            }
        }
        total
    };
    let to_free = |d: &Decomposition| -> Vec<f64> {
        d.parts[..d.parts.len() - 1].iter().flat_map(|p| reals(p.as_slice()).collect::<Vec<_>>()).collect()
    };

    let mut starts: Vec<Vec<f64>> = Vec::new();
    // previous level with an extra zero part
    let mut padded = prev.1.parts.clone();
    padded.insert(padded.len() - 1, CVector::zeros(n));
    starts.push(to_free(&Decomposition { parts: padded.clone() }));
    let even: Vec<CVector> = (0..m - 1).map(|_| x.scale(C64::new(1.0 / m as f64, 0.0))).collect();
    starts.push(to_free(&Decomposition::from_free(x, &even)));
    // axis splits: coordinate i goes to part (i + shift) mod m
    for shift in 0..m.min(n) {
        let parts: Vec<CVector> = (0..m - 1)
            .map(|j| {
                let v: Vec<C64> = (0..n)
                    .map(|i| if (i + shift) % m == j { x[i] } else { C64::new(0.0, 0.0) })
                    .collect();
                CVector::from_vec_unchecked(v)
            })
            .collect();
        starts.push(to_free(&Decomposition::from_free(x, &parts)));
    }
    let scale = x.norm();
    while starts.len() < cfg.restarts.max(1) {
        let mut r = rng::stream(cfg.seed, &[1, m as u64, starts.len() as u64]);
        let base = starts[starts.len() % 2].clone();
        starts.push(base.iter().map(|v| v + scale * (r.random::<f64>() - 0.5)).collect());
    }
    starts.truncate(cfg.restarts.max(2));

    let results: Vec<(f64, Vec<f64>)> =
        starts.par_iter().map(|s| local_search(cost, s, scale, cfg.max_evals)).collect();
    let mut best = prev.0;
    let mut best_d = Decomposition { parts: padded };
    if let Some((v, free)) = best_of(results) {
        if v < best {
            best = v;
            let parts: Vec<CVector> =
                free.chunks(2 * n).map(|c| CVector::from_vec_unchecked(complexes(c))).collect();
            best_d = Decomposition::from_free(x, &parts);
        }
    }
    (best, best_d)
}

/// Values `κ^(1), …, κ^(m)` of the nested ladder, with the last witness.
pub fn kobayashi_ladder(
    metric: &dyn InfinitesimalMetric,
    z: &CPoint,
    x: &CVector,
    m: usize,
    cfg: &LadderConfig,
) -> Result<(Vec<f64>, Decomposition)> {
    if m < 1 {
        return Err(Error::InvalidParameter("m must be at least 1".into()));
    }
    check_dim(metric.dim(), z.dim())?;
    check_dim(metric.dim(), x.dim())?;
    let first = metric.kappa(z, x)?.value;
    let mut cur = (first, Decomposition { parts: vec![x.clone()] });
    let mut values = vec![first];
    if x.is_zero() {
        values.resize(m, 0.0);
        cur.1.parts.resize(m, CVector::zeros(x.dim()));
        return Ok((values, cur.1));
    }
    for level in 2..=m {
        cur = decomposition_level(metric, z, x, level, &cur, cfg);
        values.push(cur.0);
    }
    Ok((values, cur.1))
}

/// Upper bound for `κ^(m)(z; X)`; `m = 1` is the metric itself.
pub fn mth_kobayashi(
    metric: &dyn InfinitesimalMetric,
    z: &CPoint,
    x: &CVector,
    m: usize,
    cfg: &LadderConfig,
) -> Result<MetricEstimate> {
    if m == 1 {
        check_dim(metric.dim(), x.dim())?;
        return metric.kappa(z, x);
    }
    let (values, d) = kobayashi_ladder(metric, z, x, m, cfg)?;
    let kind = metric.kappa(z, &CVector::zeros(x.dim()))?.kind;
    Ok(MetricEstimate { value: values[m - 1], kind, witness: Witness::Decomposition { parts: d.parts }, diagnostic: None })
}

/// `κ̂ = κ^(2n−1)`.
pub fn kobayashi_buseman(
    metric: &dyn InfinitesimalMetric,
    z: &CPoint,
    x: &CVector,
    cfg: &LadderConfig,
) -> Result<MetricEstimate> {
    let m = 2 * metric.dim() - 1;
    let mut est = mth_kobayashi(metric, z, x, m, cfg)?;
    est.diagnostic = Some(format!("kobayashi-buseman via m = {m}"));
    Ok(est)
}

/// Gauge of the convex hull of a 2D complete Reinhardt balanced domain,
/// from a polygon through the boundary of its modulus shadow.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HullFunctional {
    pub base: MinkowskiFunctional,
    /// Supporting half-planes `n·p ≤ c` with `n ≥ 0`, stored as `(n, c)`.
    facets: Vec<([f64; 2], f64)>,
    /// Axis directions along which the shadow is unbounded.
    recession: [bool; 2],
    unbounded: bool,
}

fn cross(o: [f64; 2], a: [f64; 2], b: [f64; 2]) -> f64 {
    (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0])
}

fn convex_hull(mut pts: Vec<[f64; 2]>) -> Vec<[f64; 2]> {
    pts.sort_by(|a, b| a[0].total_cmp(&b[0]).then(a[1].total_cmp(&b[1])));
    pts.dedup();
    if pts.len() < 3 {
        return pts;
    }
    let mut lower: Vec<[f64; 2]> = Vec::new();
    for &p in &pts {
        while lower.len() >= 2 && cross(lower[lower.len() - 2], lower[lower.len() - 1], p) <= 0.0 {
            lower.pop();
        }
        lower.push(p);
    }
    let mut upper: Vec<[f64; 2]> = Vec::new();
    for &p in pts.iter().rev() {
        while upper.len() >= 2 && cross(upper[upper.len() - 2], upper[upper.len() - 1], p) <= 0.0 {
            upper.pop();
        }
        upper.push(p);
    }
    lower.pop();
    upper.pop();
    lower.extend(upper);
    lower
}

impl HullFunctional {
    pub fn new(base: &MinkowskiFunctional, points: usize) -> Result<Self> {
        if !base.gauge.is_reinhardt() {
            return Err(Error::NotReinhardt);
        }
        check_dim(2, base.dim)?;
        if points < 8 {
            return Err(Error::InvalidParameter(format!("hull resolution must be at least 8, got {points}")));
        }
        let h = |x: f64, y: f64| base.eval_slice(&[C64::new(x, 0.0), C64::new(y, 0.0)]);
        let recession = [h(1.0, 0.0) == 0.0, h(0.0, 1.0) == 0.0];
        let mut shadow = vec![[0.0, 0.0]];
        let mut interior_recession = false;
        for i in 0..points {
            let theta = std::f64::consts::FRAC_PI_2 * i as f64 / (points - 1) as f64;
            let (s, c) = theta.sin_cos();
            let hv = h(c, s);
            if hv == 0.0 {
                if i != 0 && i != points - 1 {
                    interior_recession = true;
                }
                continue;
            }
            let p = [c / hv, s / hv];
            shadow.push(p);
            shadow.push([p[0], 0.0]);
            shadow.push([0.0, p[1]]);
        }
        let unbounded = interior_recession || (recession[0] && recession[1]);
        let mut facets = Vec::new();
        if !unbounded {
            let hull = convex_hull(shadow);
            for k in 0..hull.len() {
                let (a, b) = (hull[k], hull[(k + 1) % hull.len()]);
                // counter-clockwise order: outward normal is (dy, -dx)
                let (dx, dy) = (b[0] - a[0], b[1] - a[1]);
                let len = dx.hypot(dy);
                if len == 0.0 {
                    continue;
                }
                let nrm = [dy / len, -dx / len];
                if nrm[0] < -1e-12 || nrm[1] < -1e-12 {
                    continue;
                }
                let nrm = [nrm[0].max(0.0), nrm[1].max(0.0)];
                // a shadow unbounded along an axis only admits normals orthogonal to it
                if (recession[0] && nrm[0] > 1e-12) || (recession[1] && nrm[1] > 1e-12) {
                    continue;
                }
                let c = nrm[0] * a[0] + nrm[1] * a[1];
                if c > 0.0 {
                    facets.push((nrm, c));
                }
            }
            for axis in 0..2 {
                if recession[1 - axis] {
                    // strip {p_axis ≤ max}
                    let top = facets_max(&hull, axis);
                    let mut nrm = [0.0, 0.0];
                    nrm[axis] = 1.0;
                    facets.push((nrm, top));
                }
            }
        }
        Ok(Self { base: base.clone(), facets, recession, unbounded })
    }

    /// `ĥ(X)` evaluated at the moduli of `X`.
    pub fn eval(&self, x: &CVector) -> Result<f64> {
        check_dim(2, x.dim())?;
        if self.unbounded {
            return Ok(0.0);
        }
        let v = [x[0].norm(), x[1].norm()];
        Ok(self.facets.iter().map(|(nrm, c)| (nrm[0] * v[0] + nrm[1] * v[1]) / c).fold(0.0, f64::max))
    }

    pub fn is_unbounded(&self) -> bool {
        self.unbounded
    }

    pub fn recession(&self) -> [bool; 2] {
        self.recession
    }
}

fn facets_max(hull: &[[f64; 2]], axis: usize) -> f64 {
    hull.iter().map(|p| p[axis]).fold(0.0, f64::max)
}

/// `ĥ(X)` for a 2D Reinhardt gauge at resolution `points`.
pub fn hull_functional(h: &MinkowskiFunctional, x: &CVector, points: usize) -> Result<f64> {
    HullFunctional::new(h, points)?.eval(x)
}

pub(crate) fn chain_cost(eval: &dyn LempertEvaluator, chain: &Chain, eps: f64) -> f64 {
    let dom = eval.domain();
    for p in &chain.points[1..chain.points.len().saturating_sub(1)] {
        if !(dom.margin_slice(p.as_slice()) >= eps) {
            return f64::INFINITY;
        }
    }
    let mut total = 0.0;
    for pair in chain.points.windows(2) {
        if pair[0] == pair[1] {
            continue;
        }
        match eval.lempert(&pair[0], &pair[1]) {
            Ok(v) => total += v,
            Err(_) => return f64::INFINITY,
        }
    }
    total
}

/// Values `k^(1), …, k^(m)` of the nested chain ladder, with the last chain.
/// `seeds` are extra starting chains from `z` to `w` with at most `m`
/// segments.
pub fn lempert_ladder(
    eval: &dyn LempertEvaluator,
    z: &CPoint,
    w: &CPoint,
    m: usize,
    seeds: &[Chain],
    cfg: &LadderConfig,
) -> Result<(Vec<f64>, Chain)> {
    if m < 1 {
        return Err(Error::InvalidParameter("m must be at least 1".into()));
    }
    let dom = eval.domain();
    check_dim(dom.dim(), z.dim())?;
    check_dim(dom.dim(), w.dim())?;
    dom.require_inside(z)?;
    dom.require_inside(w)?;
    for s in seeds {
        if s.points.first() != Some(z) || s.points.last() != Some(w) {
            return Err(Error::InvalidParameter("seed chains must join the queried endpoints".into()));
        }
    }
    let n = dom.dim();
    let first = if z == w { 0.0 } else { eval.lempert(z, w)? };
    let mut best = (first, Chain { points: vec![z.clone(), w.clone()] });
    let mut values = vec![first];
    for level in 2..=m {
        let mut cands: Vec<(f64, Chain)> = vec![(best.0, best.1.padded(level))];
        let linear = Chain::linear(z, w, level);
        cands.push((chain_cost(eval, &linear, cfg.margin_eps), linear));
        for s in seeds.iter().filter(|s| s.segments() <= level) {
            let c = s.padded(level);
            cands.push((chain_cost(eval, &c, cfg.margin_eps), c));
        }
        let mut top = cands.iter().fold(None::<&(f64, Chain)>, |acc, c| match acc {
            Some(a) if !(c.0 < a.0) => Some(a),
            _ => Some(c),
        });
        let mut level_best = top.take().cloned().expect("candidates");
        if cfg.chain_restarts > 0 && level_best.0 > 0.0 {
            let scale = w.distance(z).max(1e-3);
            let to_free = |c: &Chain| -> Vec<f64> {
                c.points[1..level].iter().flat_map(|p| reals(p.as_slice()).collect::<Vec<_>>()).collect()
            };
            let build = |free: &[f64]| -> Chain {
                let mut points = vec![z.clone()];
                points.extend(free.chunks(2 * n).map(|c| CPoint::from_vec_unchecked(complexes(c))));
                points.push(w.clone());
                Chain { points }
            };
            let mut starts = vec![to_free(&level_best.1)];
            for r in 1..cfg.chain_restarts {
                let mut g = rng::stream(cfg.seed, &[2, level as u64, r as u64]);
                let base = to_free(&cands[r % cands.len()].1);
                starts.push(base.iter().map(|v| v + 0.2 * scale * (g.random::<f64>() - 0.5)).collect());
            }
            let cost = |free: &[f64]| chain_cost(eval, &build(free), cfg.margin_eps);
            let results: Vec<(f64, Vec<f64>)> =
                starts.par_iter().map(|s| local_search(cost, s, scale, cfg.chain_max_evals)).collect();
            if let Some((v, free)) = best_of(results) {
                if v < level_best.0 {
                    level_best = (v, build(&free));
                }
            }
        }
        best = level_best;
        values.push(best.0);
    }
    Ok((values, best.1))
}

/// Upper bound for `k^(m)(z, w)`.
pub fn mth_lempert(
    eval: &dyn LempertEvaluator,
    z: &CPoint,
    w: &CPoint,
    m: usize,
    seeds: &[Chain],
    cfg: &LadderConfig,
) -> Result<MetricEstimate> {
    let (values, chain) = lempert_ladder(eval, z, w, m, seeds, cfg)?;
    let kind = eval.lempert_star(z, z)?.kind;
    Ok(MetricEstimate { value: values[m - 1], kind, witness: Witness::Chain { points: chain.points }, diagnostic: None })
}

/// `k = inf_m k^(m)` over `m ≤ cfg.max_m`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DistanceEstimate {
    pub estimate: MetricEstimate,
    /// Smallest `m` attaining the reported value.
    pub stabilizing_m: usize,
    pub ladder: Vec<f64>,
}

pub fn kobayashi_distance(
    eval: &dyn LempertEvaluator,
    z: &CPoint,
    w: &CPoint,
    seeds: &[Chain],
    cfg: &LadderConfig,
) -> Result<DistanceEstimate> {
    cfg.validate()?;
    let (ladder, chain) = lempert_ladder(eval, z, w, cfg.max_m, seeds, cfg)?;
    let value = ladder[ladder.len() - 1];
    let stabilizing_m = ladder.iter().position(|v| *v <= value).map_or(cfg.max_m, |i| i + 1);
    let mut estimate = MetricEstimate::upper(value, Witness::Chain { points: chain.points });
    estimate.kind = eval.lempert_star(z, z)?.kind;
    Ok(DistanceEstimate { estimate, stabilizing_m, ladder })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{DomainDescriptor, Gauge};

    fn balanced(g: Gauge) -> OracleKappa {
        OracleKappa::new(&DomainModel::new(&DomainDescriptor::balanced(g, 2)).unwrap()).unwrap()
    }

    fn v(x: &[f64]) -> CVector {
        CVector::from_real(x).unwrap()
    }

    #[test]
    fn hull_of_max_geo() {
        let h = MinkowskiFunctional::new(Gauge::MaxGeo { c: 2.0 }, 2).unwrap();
        let hull = HullFunctional::new(&h, 2048).unwrap();
        assert!((hull.eval(&v(&[1.0, 1.0])).unwrap() - 1.6).abs() < 1e-3);
        assert!((hull.eval(&v(&[1.0, 0.0])).unwrap() - 1.0).abs() < 1e-9);
        assert!((hull.eval(&v(&[0.2, 1.0])).unwrap() - 1.0).abs() < 1e-3);
    }

    #[test]
    fn hull_degenerate_and_convex_cases() {
        let geo = MinkowskiFunctional::new(Gauge::GeoMean, 2).unwrap();
        assert_eq!(hull_functional(&geo, &v(&[1.0, 1.0]), 2048).unwrap(), 0.0);
        let max = MinkowskiFunctional::new(Gauge::Max, 2).unwrap();
        let l1 = MinkowskiFunctional::new(Gauge::L1, 2).unwrap();
        for x in [[1.0, 0.3], [0.2, 0.9], [0.5, 0.5]] {
            let x = v(&x);
            assert!((hull_functional(&max, &x, 2048).unwrap() - max.eval(&x).unwrap()).abs() < 2e-3);
            assert!((hull_functional(&l1, &x, 2048).unwrap() - l1.eval(&x).unwrap()).abs() < 1e-6);
        }
        let lin = MinkowskiFunctional::new(Gauge::MaxLinear { rows: vec![vec![C64::new(1.0, 0.0); 2]] }, 2).unwrap();
        assert_eq!(hull_functional(&lin, &v(&[1.0, 1.0]), 64), Err(Error::NotReinhardt));
    }

    #[test]
    fn ladder_is_nested_and_finds_the_hull() {
        let metric = balanced(Gauge::MaxGeo { c: 2.0 });
        let (values, d) = kobayashi_ladder(&metric, &CPoint::origin(2), &v(&[1.0, 1.0]), 3, &LadderConfig::default())
            .unwrap();
        assert_eq!(values[0], 2.0);
        assert!(values[1] <= values[0] && values[2] <= values[1]);
        assert!((values[2] - 1.6).abs() < 0.08, "{values:?}");
        let s = d.sum();
        assert!(s.sub(&v(&[1.0, 1.0])).norm() < 1e-12);
    }

    #[test]
    fn axis_split_kills_the_geometric_mean() {
        let metric = balanced(Gauge::GeoMean);
        let est = mth_kobayashi(&metric, &CPoint::origin(2), &v(&[1.0, 1.0]), 2, &LadderConfig::default()).unwrap();
        assert_eq!(est.value, 0.0);
    }

    #[test]
    fn disc_distance_does_not_improve_with_chains() {
        let dom = DomainModel::new(&DomainDescriptor::UnitDisc).unwrap();
        let eval = OracleLempert::new(&dom).unwrap();
        let z = CPoint::from_real(&[-0.3]).unwrap();
        let w = CPoint::new(vec![C64::new(0.4, 0.2)]).unwrap();
        let d = kobayashi_distance(&eval, &z, &w, &[], &LadderConfig { max_m: 4, ..Default::default() }).unwrap();
        assert!((d.ladder[0] - d.estimate.value).abs() < 1e-9, "{:?}", d.ladder);
        assert_eq!(d.stabilizing_m, 1);
    }

    #[test]
    fn identical_endpoints_cost_nothing() {
        let dom = DomainModel::new(&DomainDescriptor::unit_ball(2)).unwrap();
        let eval = OracleLempert::new(&dom).unwrap();
        let z = CPoint::from_real(&[0.1, 0.2]).unwrap();
        let est = mth_lempert(&eval, &z, &z, 3, &[], &LadderConfig::default()).unwrap();
        assert_eq!(est.value, 0.0);
    }
}
