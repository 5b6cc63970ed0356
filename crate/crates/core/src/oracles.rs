//! Closed-form values of `κ` and `k̃*` on the model domains.

use serde::{Deserialize, Serialize};

use crate::disc_search::{MetricEstimate, Witness};
use crate::error::{Error, Result};
use crate::geometry::{check_dim, CPoint, CVector, DomainDescriptor, DomainModel, MinkowskiFunctional, C64};

/// Domains with a known metric.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum OracleDomainTag {
    UnitDisc,
    Polydisc { radii: Vec<f64> },
    EuclideanBall { radius: f64, dim: usize },
    /// Only the origin is supported.
    BalancedAtOrigin { h: MinkowskiFunctional },
}

impl OracleDomainTag {
    pub fn from_domain(dom: &DomainModel) -> Result<Self> {
        Self::from_descriptor(dom.descriptor())
    }

    pub fn from_descriptor(desc: &DomainDescriptor) -> Result<Self> {
        Ok(match desc {
            DomainDescriptor::UnitDisc => OracleDomainTag::UnitDisc,
            DomainDescriptor::Polydisc { radii } => OracleDomainTag::Polydisc { radii: radii.clone() },
            DomainDescriptor::EuclideanBall { radius, dim } => {
                OracleDomainTag::EuclideanBall { radius: *radius, dim: *dim }
            }
            DomainDescriptor::Balanced { h, dim } => {
                OracleDomainTag::BalancedAtOrigin { h: MinkowskiFunctional::new(h.clone(), *dim)? }
            }
            other => return Err(Error::OracleUnsupported(format!("no closed form for {}", other.label()))),
        })
    }

    pub fn dim(&self) -> usize {
        match self {
            OracleDomainTag::UnitDisc => 1,
            OracleDomainTag::Polydisc { radii } => radii.len(),
            OracleDomainTag::EuclideanBall { dim, .. } => *dim,
            OracleDomainTag::BalancedAtOrigin { h } => h.dim,
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            OracleDomainTag::UnitDisc => "unit-disc",
            OracleDomainTag::Polydisc { .. } => "polydisc",
            OracleDomainTag::EuclideanBall { .. } => "euclidean-ball",
            OracleDomainTag::BalancedAtOrigin { .. } => "balanced-at-origin",
        }
    }

    fn inside(&self, z: &[C64]) -> Result<()> {
        let ok = match self {
            OracleDomainTag::UnitDisc => z[0].norm() < 1.0,
            OracleDomainTag::Polydisc { radii } => z.iter().zip(radii).all(|(c, r)| c.norm() < *r),
            OracleDomainTag::EuclideanBall { radius, .. } => {
                z.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt() < *radius
            }
            OracleDomainTag::BalancedAtOrigin { h } => h.eval_slice(z) < 1.0,
        };
        if ok {
            Ok(())
        } else {
            let p: Vec<String> = z.iter().map(|c| crate::geometry::fmt_complex(*c)).collect();
            Err(Error::NotInDomain(format!("({}) is outside the {} oracle domain", p.join(", "), self.name())))
        }
    }

    fn witness(&self) -> Witness {
        Witness::Oracle { tag: self.name().into() }
    }
}

fn mobius(z: C64, w: C64, r: f64) -> f64 {
    // automorphism distance on the disc of radius r
    (r * (z - w) / (r * r - z.conj() * w)).norm()
}

fn origin(z: &[C64]) -> bool {
    z.iter().all(|c| *c == C64::new(0.0, 0.0))
}

/// `κ(z; X)` on an oracle domain.
pub fn oracle_kappa(tag: &OracleDomainTag, z: &CPoint, x: &CVector) -> Result<MetricEstimate> {
    check_dim(tag.dim(), z.dim())?;
    check_dim(tag.dim(), x.dim())?;
    let (zs, xs) = (z.as_slice(), x.as_slice());
    tag.inside(zs)?;
    let value = match tag {
        OracleDomainTag::UnitDisc => xs[0].norm() / (1.0 - zs[0].norm_sqr()),
        OracleDomainTag::Polydisc { radii } => zs
            .iter()
            .zip(xs)
            .zip(radii)
            .map(|((zi, xi), r)| xi.norm() * r / (r * r - zi.norm_sqr()))
            .fold(0.0, f64::max),
        OracleDomainTag::EuclideanBall { radius, .. } => {
            let zr: Vec<C64> = zs.iter().map(|c| c / radius).collect();
            let xr: Vec<C64> = xs.iter().map(|c| c / radius).collect();
            let zz: f64 = zr.iter().map(|c| c.norm_sqr()).sum();
            let xx: f64 = xr.iter().map(|c| c.norm_sqr()).sum();
            let zx: C64 = zr.iter().zip(&xr).map(|(a, b)| a.conj() * b).sum();
            let d = 1.0 - zz;
            ((xx * d + zx.norm_sqr()) / (d * d)).sqrt()
        }
        OracleDomainTag::BalancedAtOrigin { h } => {
            if !origin(zs) {
                return Err(Error::OracleUnsupported("the balanced oracle is only available at z = 0".into()));
            }
            h.eval_slice(xs)
        }
    };
    Ok(MetricEstimate::exact(value, tag.witness()))
}

/// `k̃*(z, w)` on an oracle domain.
pub fn oracle_lempert(tag: &OracleDomainTag, z: &CPoint, w: &CPoint) -> Result<MetricEstimate> {
    check_dim(tag.dim(), z.dim())?;
    check_dim(tag.dim(), w.dim())?;
    let (zs, ws) = (z.as_slice(), w.as_slice());
    tag.inside(zs)?;
    tag.inside(ws)?;
    let value = match tag {
        OracleDomainTag::UnitDisc => mobius(zs[0], ws[0], 1.0),
        OracleDomainTag::Polydisc { radii } => {
            zs.iter().zip(ws).zip(radii).map(|((a, b), r)| mobius(*a, *b, *r)).fold(0.0, f64::max)
        }
        OracleDomainTag::EuclideanBall { radius, .. } => {
            let zr: Vec<C64> = zs.iter().map(|c| c / radius).collect();
            let wr: Vec<C64> = ws.iter().map(|c| c / radius).collect();
            let zz: f64 = zr.iter().map(|c| c.norm_sqr()).sum();
            let ww: f64 = wr.iter().map(|c| c.norm_sqr()).sum();
            let zw: C64 = zr.iter().zip(&wr).map(|(a, b)| a.conj() * b).sum();
            let s = 1.0 - (1.0 - zz) * (1.0 - ww) / (C64::new(1.0, 0.0) - zw).norm_sqr();
            s.max(0.0).sqrt()
        }
        OracleDomainTag::BalancedAtOrigin { h } => {
            if origin(zs) {
                h.eval_slice(ws)
            } else if origin(ws) {
                h.eval_slice(zs)
            } else {
                return Err(Error::OracleUnsupported(
                    "the balanced oracle needs one endpoint at the origin".into(),
                ));
            }
        }
    };
    Ok(MetricEstimate::exact(value, tag.witness()))
}
