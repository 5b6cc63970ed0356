//! The pseudoconvex domain `D = {ψ < 1}` in `C^2` built from the subharmonic
//! series
//!
//! ```text
//! u(λ) = Σ_k (1/k²) log(|λ − 1/k| / 4)
//! v(λ) = Σ_j u(λ/2 − r_j) / (2j²)
//! ψ(z) = |z₂| exp(‖z‖² + v(z₁))
//! ```
//!
//! Both series are truncated (`K` terms in `k`, `J` terms in `j`). Every
//! discarded term is negative on the bounded region used by the experiments,
//! so the truncated `ψ` dominates the exact one there: a disc certified inside
//! the truncated domain also lies in the exact domain.

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::geometry::{check_dim, CPoint, C64};

/// `ζ'(2)`.
const ZETA_PRIME_2: f64 = -0.937_548_254_315_843_8;

/// Exact value of `u(0) = ζ'(2) − (π²/6)·log 4`.
pub fn u_at_origin_exact() -> f64 {
    ZETA_PRIME_2 - PI * PI / 6.0 * 4f64.ln()
}

/// `sup |u(μ)|` over `{Re μ ≤ 0, |μ| ≤ 3}`; equals `|u(0)|`.
pub fn u_sup_left_half() -> f64 {
    -u_at_origin_exact()
}

/// A real number or minus infinity.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum ExtReal {
    NegInfinity,
    Finite(f64),
}

impl ExtReal {
    pub fn is_neg_infinity(self) -> bool {
        matches!(self, ExtReal::NegInfinity)
    }

    pub fn finite(self) -> Option<f64> {
        match self {
            ExtReal::Finite(x) => Some(x),
            ExtReal::NegInfinity => None,
        }
    }

    pub fn to_f64(self) -> f64 {
        self.finite().unwrap_or(f64::NEG_INFINITY)
    }
}

/// Truncated `u(λ) = Σ_{k≤K} (1/k²) log(|λ − 1/k| / 4)`.
pub fn eval_u(lambda: C64, k_terms: usize) -> ExtReal {
    let mut sum = 0.0;
    for k in 1..=k_terms {
        let kf = k as f64;
        let d = (lambda - C64::new(1.0 / kf, 0.0)).norm_sqr();
        if d == 0.0 {
            return ExtReal::NegInfinity;
        }
        sum += (0.5 * d.ln() - 4f64.ln()) / (kf * kf);
    }
    ExtReal::Finite(sum)
}

/// Bound on `|u(λ) − u_K(λ)|` valid for `|λ| ≤ 3` with `Re λ ≤ 0` or
/// `|λ| ≥ 2/(K+1)`: there `1/k ≤ |λ − 1/k| ≤ 4` for every `k > K`.
pub fn u_tail_bound(k_terms: usize) -> f64 {
    let k = k_terms as f64;
    ((4.0 * k).ln() + 1.0) / k
}

/// Whether `λ` lies in the set on which [`u_tail_bound`] holds.
pub fn in_u_tail_region(lambda: C64, k_terms: usize) -> bool {
    lambda.norm() <= 3.0 && (lambda.re <= 0.0 || lambda.norm() >= 2.0 / (k_terms as f64 + 1.0))
}

/// Bound on `|v(λ) − v_{K,J}(λ)|` valid for `Re λ ≤ 0, |λ| ≤ 5`.
pub fn v_tail_bound(k_terms: usize, j_terms: usize) -> f64 {
    PI * PI / 12.0 * u_tail_bound(k_terms) + u_sup_left_half() / (2.0 * j_terms as f64)
}

/// First `count` terms of the dyadic enumeration of `[0, i/2]`:
/// `0, i/2, i/4, i/8, 3i/8, i/16, 3i/16, …`.
pub fn dyadic_sequence(count: usize) -> Vec<C64> {
    let mut out = Vec::with_capacity(count);
    out.push(C64::new(0.0, 0.0));
    out.push(C64::new(0.0, 0.5));
    let mut level = 1u32;
    while out.len() < count {
        let denom = (1u64 << level) as f64;
        let mut odd = 1u64;
        while odd < (1u64 << level) && out.len() < count {
            out.push(C64::new(0.0, 0.5 * odd as f64 / denom));
            odd += 2;
        }
        level += 1;
    }
    out.truncate(count);
    out
}

/// Truncation orders and the dense sequence `(r_j)` on `[0, i/2]`.
#[derive(Clone, Debug, PartialEq)]
pub struct Example3Params {
    k_terms: usize,
    j_terms: usize,
    rseq: Vec<C64>,
}

impl Example3Params {
    pub const MIN_TERMS: usize = 10;

    /// Uses the dyadic sequence for `(r_j)`.
    pub fn new(k_terms: usize, j_terms: usize) -> Result<Self> {
        Self::with_sequence(k_terms, dyadic_sequence(j_terms))
    }

    pub fn with_sequence(k_terms: usize, rseq: Vec<C64>) -> Result<Self> {
        let j_terms = rseq.len();
        if k_terms < Self::MIN_TERMS || j_terms < Self::MIN_TERMS {
            return Err(Error::InvalidParameter(format!(
                "example3 needs K ≥ {0} and J ≥ {0}, got K = {k_terms}, J = {j_terms}",
                Self::MIN_TERMS
            )));
        }
        if let Some(r) = rseq.iter().find(|r| r.re != 0.0 || r.im < 0.0 || r.im > 0.5) {
            return Err(Error::InvalidParameter(format!("r_j = {r} is not on the segment [0, i/2]")));
        }
        Ok(Self { k_terms, j_terms, rseq })
    }

    pub fn k_terms(&self) -> usize {
        self.k_terms
    }

    pub fn j_terms(&self) -> usize {
        self.j_terms
    }

    pub fn rseq(&self) -> &[C64] {
        &self.rseq
    }
}

/// Truncated `v(λ) = Σ_{j≤J} u_K(λ/2 − r_j) / (2j²)`.
pub fn eval_v(lambda: C64, params: &Example3Params) -> ExtReal {
    let half = lambda * 0.5;
    let mut sum = 0.0;
    for (j, r) in params.rseq.iter().enumerate() {
        let jf = (j + 1) as f64;
        match eval_u(half - r, params.k_terms) {
            ExtReal::NegInfinity => return ExtReal::NegInfinity,
            ExtReal::Finite(u) => sum += u / (2.0 * jf * jf),
        }
    }
    ExtReal::Finite(sum)
}

/// The truncated domain with precomputed log-potential centers.
#[derive(Clone, Debug)]
pub struct Example3Domain {
    params: Example3Params,
    u_tail_bound: f64,
    v_tail_bound: f64,
    /// `r_j + 1/k`, row-major in `(j, k)`.
    centers: Vec<C64>,
    /// `1 / (2 j² k²)`.
    weights: Vec<f64>,
    /// `log 4 · Σ weights`.
    log4_mass: f64,
}

impl Example3Domain {
    pub fn new(params: Example3Params) -> Self {
        let mut centers = Vec::with_capacity(params.j_terms * params.k_terms);
        let mut weights = Vec::with_capacity(centers.capacity());
        for (j, r) in params.rseq.iter().enumerate() {
            let jf = (j + 1) as f64;
            for k in 1..=params.k_terms {
                let kf = k as f64;
                centers.push(r + C64::new(1.0 / kf, 0.0));
                weights.push(1.0 / (2.0 * jf * jf * kf * kf));
            }
        }
        let log4_mass = 4f64.ln() * weights.iter().sum::<f64>();
        Self {
            u_tail_bound: u_tail_bound(params.k_terms),
            v_tail_bound: v_tail_bound(params.k_terms, params.j_terms),
            params,
            centers,
            weights,
            log4_mass,
        }
    }

    pub fn params(&self) -> &Example3Params {
        &self.params
    }

    pub fn u_tail_bound(&self) -> f64 {
        self.u_tail_bound
    }

    pub fn v_tail_bound(&self) -> f64 {
        self.v_tail_bound
    }

    /// Same value as [`eval_v`], summed from the precomputed centers. The
    /// singular set is exactly `{2(r_j + 1/k)}`.
    pub fn v(&self, lambda: C64) -> ExtReal {
        let half = lambda * 0.5;
        let mut sum = 0.0;
        for (c, w) in self.centers.iter().zip(&self.weights) {
            let d = (half - c).norm_sqr();
            if d == 0.0 {
                return ExtReal::NegInfinity;
            }
            sum += w * d.ln();
        }
        ExtReal::Finite(0.5 * sum - self.log4_mass)
    }

    pub(crate) fn psi_slice(&self, z: &[C64]) -> f64 {
        if z[1].norm_sqr() == 0.0 {
            return 0.0;
        }
        match self.v(z[0]) {
            ExtReal::NegInfinity => 0.0,
            ExtReal::Finite(v) => z[1].norm() * (z[0].norm_sqr() + z[1].norm_sqr() + v).exp(),
        }
    }

    /// First coordinates `2(r_j + 1/k)` of the vertical lines `{λ} × C` on
    /// which `ψ ≡ 0`.
    pub fn singular_first_coordinates(&self) -> Vec<C64> {
        self.centers.iter().map(|c| c * 2.0).collect()
    }

    /// The singular first coordinate closest to `lambda`, with its distance.
    pub fn nearest_singular_line(&self, lambda: C64) -> (C64, f64) {
        let mut best = (C64::new(0.0, 0.0), f64::INFINITY);
        for c in &self.centers {
            let s = c * 2.0;
            let d = (s - lambda).norm();
            if d < best.1 {
                best = (s, d);
            }
        }
        best
    }
}

/// `ψ(z) = |z₂| exp(‖z‖² + v(z₁))`; zero on `C × {0}` and on the singular
/// vertical lines.
pub fn eval_psi(z: &CPoint, dom: &Example3Domain) -> Result<f64> {
    check_dim(2, z.dim())?;
    Ok(dom.psi_slice(z.as_slice()))
}

/// Lower bound for the exact `ψ` given the truncated value, valid where
/// [`v_tail_bound`] holds.
pub fn psi_lower_with_tail(z: &CPoint, dom: &Example3Domain) -> Result<f64> {
    let psi = eval_psi(z, dom)?;
    Ok(psi * (-dom.v_tail_bound()).exp())
}
