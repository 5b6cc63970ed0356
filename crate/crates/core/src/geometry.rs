//! Points, tangent vectors, Minkowski gauges and model domains in `C^n`.

use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::example_domains::{Example3Domain, Example3Params};

pub type C64 = Complex64;

/// Formats a real number with 12 significant digits, shortest round-trip form.
pub fn fmt_num(x: f64) -> String {
    if !x.is_finite() {
        return format!("{x}");
    }
    let rounded: f64 = format!("{x:.11e}").parse().unwrap_or(x);
    let a = rounded.abs();
    if a == 0.0 || (1e-4..1e12).contains(&a) {
        format!("{rounded}")
    } else {
        format!("{rounded:e}")
    }
}

pub(crate) fn fmt_complex(c: C64) -> String {
    if c.im == 0.0 {
        fmt_num(c.re)
    } else if c.re == 0.0 {
        format!("{}i", fmt_num(c.im))
    } else if c.im < 0.0 {
        format!("{}-{}i", fmt_num(c.re), fmt_num(-c.im))
    } else {
        format!("{}+{}i", fmt_num(c.re), fmt_num(c.im))
    }
}

/// Parses `1.5`, `-2i`, `i`, `0.3-0.4i`, `1e-3+2e-1i`.
pub fn parse_complex(s: &str) -> Result<C64> {
    let s: String = s.chars().filter(|c| !c.is_whitespace()).collect();
    let bad = || Error::Parse(format!("cannot parse complex number `{s}`"));
    if s.is_empty() {
        return Err(bad());
    }
    let Some(body) = s.strip_suffix('i') else {
        return s.parse::<f64>().map(|re| C64::new(re, 0.0)).map_err(|_| bad());
    };
    // split at the last sign that is not a leading sign or an exponent sign
    let bytes = body.as_bytes();
    let split = (1..bytes.len())
        .rev()
        .find(|&k| (bytes[k] == b'+' || bytes[k] == b'-') && !matches!(bytes[k - 1], b'e' | b'E'));
    let imag = |t: &str| -> Result<f64> {
        match t {
            "" | "+" => Ok(1.0),
            "-" => Ok(-1.0),
            _ => t.parse::<f64>().map_err(|_| bad()),
        }
    };
    match split {
        Some(k) => {
            let re = body[..k].parse::<f64>().map_err(|_| bad())?;
            Ok(C64::new(re, imag(&body[k..])?))
        }
        None => Ok(C64::new(0.0, imag(body)?)),
    }
}

/// Parses a comma separated list of complex numbers.
pub fn parse_complex_list(s: &str) -> Result<Vec<C64>> {
    s.split(',').map(parse_complex).collect()
}

macro_rules! complex_tuple {
    ($(#[$meta:meta])* $name:ident, $what:literal) => {
        $(#[$meta])*
        #[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
        #[serde(transparent)]
        pub struct $name(Vec<C64>);

        impl $name {
            pub fn new(coords: Vec<C64>) -> Result<Self> {
                if coords.is_empty() {
                    return Err(Error::Empty);
                }
                if coords.iter().any(|c| !c.re.is_finite() || !c.im.is_finite()) {
                    return Err(Error::NonFinite($what));
                }
                Ok(Self(coords))
            }

            pub fn from_real(coords: &[f64]) -> Result<Self> {
                Self::new(coords.iter().map(|&x| C64::new(x, 0.0)).collect())
            }

            pub fn zeros(n: usize) -> Self {
                Self(vec![C64::new(0.0, 0.0); n.max(1)])
            }

            pub fn dim(&self) -> usize {
                self.0.len()
            }

            pub fn as_slice(&self) -> &[C64] {
                &self.0
            }

            pub fn norm_sqr(&self) -> f64 {
                self.0.iter().map(|c| c.norm_sqr()).sum()
            }

            pub fn norm(&self) -> f64 {
                self.norm_sqr().sqrt()
            }

            pub fn into_vec(self) -> Vec<C64> {
                self.0
            }

            pub(crate) fn from_vec_unchecked(v: Vec<C64>) -> Self {
                Self(v)
            }
        }

        impl std::ops::Index<usize> for $name {
            type Output = C64;
            fn index(&self, i: usize) -> &C64 {
                &self.0[i]
            }
        }

        impl fmt::Display for $name {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                let parts: Vec<String> = self.0.iter().map(|&c| fmt_complex(c)).collect();
                write!(f, "{}", parts.join(","))
            }
        }

        impl FromStr for $name {
            type Err = Error;
            fn from_str(s: &str) -> Result<Self> {
                Self::new(parse_complex_list(s)?)
            }
        }
    };
}

complex_tuple!(
    /// A point of `C^n`.
    CPoint,
    "point"
);
complex_tuple!(
    /// A tangent vector of `C^n`; the zero vector is valid.
    CVector,
    "vector"
);

impl CPoint {
    pub fn origin(n: usize) -> Self {
        Self::zeros(n)
    }

    /// `self + t·v`.
    pub fn offset(&self, t: C64, v: &CVector) -> CPoint {
        CPoint(self.0.iter().zip(v.as_slice()).map(|(a, b)| a + t * b).collect())
    }

    /// `self - other` as a tangent vector.
    pub fn diff(&self, other: &CPoint) -> CVector {
        CVector::from_vec_unchecked(self.0.iter().zip(&other.0).map(|(a, b)| a - b).collect())
    }

    pub fn distance(&self, other: &CPoint) -> f64 {
        self.diff(other).norm()
    }
}

impl CVector {
    pub fn scale(&self, s: C64) -> CVector {
        CVector(self.0.iter().map(|c| c * s).collect())
    }

    pub fn add(&self, other: &CVector) -> CVector {
        CVector(self.0.iter().zip(&other.0).map(|(a, b)| a + b).collect())
    }

    pub fn sub(&self, other: &CVector) -> CVector {
        CVector(self.0.iter().zip(&other.0).map(|(a, b)| a - b).collect())
    }

    /// Hermitian product `Σ conj(a_i) b_i`.
    pub fn inner(&self, other: &CVector) -> C64 {
        self.0.iter().zip(&other.0).map(|(a, b)| a.conj() * b).sum()
    }

    pub fn is_zero(&self) -> bool {
        self.0.iter().all(|c| c.re == 0.0 && c.im == 0.0)
    }

    pub fn unit(n: usize, i: usize) -> CVector {
        let mut v = vec![C64::new(0.0, 0.0); n];
        v[i] = C64::new(1.0, 0.0);
        CVector(v)
    }
}

pub(crate) fn check_dim(expected: usize, got: usize) -> Result<()> {
    if expected == got {
        Ok(())
    } else {
        Err(Error::DimensionMismatch { expected, got })
    }
}

fn default_c() -> f64 {
    2.0
}

/// Absolutely homogeneous gauges defining balanced domains `{h < 1}`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "h", rename_all = "kebab-case")]
pub enum Gauge {
    /// Euclidean norm: the unit ball.
    Euclidean,
    /// Maximum modulus: the unit polydisc.
    Max,
    /// Sum of moduli.
    L1,
    /// Geometric mean of the moduli, `(Π|z_i|)^{1/n}`.
    GeoMean,
    /// `max(max_i |z_i|, c·(Π|z_i|)^{1/n})`.
    MaxGeo {
        #[serde(default = "default_c")]
        c: f64,
    },
    /// `max_k |⟨a_k, z⟩|` for the given rows `a_k` (not Reinhardt in general).
    MaxLinear { rows: Vec<Vec<C64>> },
}

impl Gauge {
    fn raw(&self, z: &[C64]) -> f64 {
        let geo = |z: &[C64]| -> f64 {
            let n = z.len() as f64;
            z.iter().map(|c| c.norm()).product::<f64>().powf(1.0 / n)
        };
        let max_mod = |z: &[C64]| z.iter().map(|c| c.norm()).fold(0.0, f64::max);
        match self {
            Gauge::Euclidean => z.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt(),
            Gauge::Max => max_mod(z),
            Gauge::L1 => z.iter().map(|c| c.norm()).sum(),
            Gauge::GeoMean => geo(z),
            Gauge::MaxGeo { c } => max_mod(z).max(c * geo(z)),
            Gauge::MaxLinear { rows } => rows
                .iter()
                .map(|a| a.iter().zip(z).map(|(ai, zi)| ai.conj() * zi).sum::<C64>().norm())
                .fold(0.0, f64::max),
        }
    }

    /// Whether `h` depends only on the moduli and is nondecreasing in each.
    pub fn is_reinhardt(&self) -> bool {
        !matches!(self, Gauge::MaxLinear { .. })
    }

    pub fn is_convex(&self) -> bool {
        matches!(self, Gauge::Euclidean | Gauge::Max | Gauge::L1 | Gauge::MaxLinear { .. })
    }

    pub fn short_name(&self) -> String {
        match self {
            Gauge::Euclidean => "euclidean".into(),
            Gauge::Max => "max".into(),
            Gauge::L1 => "l1".into(),
            Gauge::GeoMean => "geo-mean".into(),
            Gauge::MaxGeo { c } => format!("max-geo(c={})", fmt_num(*c)),
            Gauge::MaxLinear { rows } => format!("max-linear({} rows)", rows.len()),
        }
    }
}

/// A gauge bound to a dimension. Evaluation normalizes the argument to the
/// unit sphere and rescales, so `h(λX) = |λ| h(X)` holds by construction.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MinkowskiFunctional {
    pub gauge: Gauge,
    pub dim: usize,
}

impl MinkowskiFunctional {
    pub fn new(gauge: Gauge, dim: usize) -> Result<Self> {
        if dim == 0 {
            return Err(Error::InvalidDescriptor("dimension must be positive".into()));
        }
        match &gauge {
            Gauge::MaxGeo { c } if !(c.is_finite() && *c > 0.0) => {
                return Err(Error::InvalidDescriptor(format!("max-geo constant must be positive, got {c}")));
            }
            Gauge::MaxLinear { rows } => {
                if rows.is_empty() {
                    return Err(Error::InvalidDescriptor("max-linear needs at least one row".into()));
                }
                for r in rows {
                    check_dim(dim, r.len())?;
                }
            }
            _ => {}
        }
        Ok(Self { gauge, dim })
    }

    pub fn eval_slice(&self, z: &[C64]) -> f64 {
        let norm = z.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
        if norm == 0.0 {
            return 0.0;
        }
        let mut unit = [C64::new(0.0, 0.0); 8];
        if z.len() <= unit.len() {
            for (u, c) in unit.iter_mut().zip(z) {
                *u = c / norm;
            }
            norm * self.gauge.raw(&unit[..z.len()])
        } else {
            let unit: Vec<C64> = z.iter().map(|c| c / norm).collect();
            norm * self.gauge.raw(&unit)
        }
    }

    pub fn eval(&self, x: &CVector) -> Result<f64> {
        check_dim(self.dim, x.dim())?;
        Ok(self.eval_slice(x.as_slice()))
    }
}

/// `membership(z) ⇔ h(z) < 1`.
pub fn balanced_membership(h: &MinkowskiFunctional, z: &CPoint) -> Result<bool> {
    check_dim(h.dim, z.dim())?;
    Ok(h.eval_slice(z.as_slice()) < 1.0)
}

fn default_radius() -> f64 {
    1.0
}
fn default_dim() -> usize {
    2
}
fn default_k_terms() -> usize {
    200
}
fn default_j_terms() -> usize {
    60
}

/// Serializable description of a model domain.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum DomainDescriptor {
    UnitDisc,
    Polydisc {
        radii: Vec<f64>,
    },
    EuclideanBall {
        #[serde(default = "default_radius")]
        radius: f64,
        #[serde(default = "default_dim")]
        dim: usize,
    },
    Balanced {
        #[serde(flatten)]
        h: Gauge,
        #[serde(default = "default_dim")]
        dim: usize,
    },
    Product {
        first: Box<DomainDescriptor>,
        second: Box<DomainDescriptor>,
    },
    Example3 {
        #[serde(rename = "K", default = "default_k_terms")]
        k_terms: usize,
        #[serde(rename = "J", default = "default_j_terms")]
        j_terms: usize,
    },
}

impl DomainDescriptor {
    pub fn balanced(h: Gauge, dim: usize) -> Self {
        DomainDescriptor::Balanced { h, dim }
    }

    pub fn unit_ball(dim: usize) -> Self {
        DomainDescriptor::EuclideanBall { radius: 1.0, dim }
    }

    pub fn unit_polydisc(dim: usize) -> Self {
        DomainDescriptor::Polydisc { radii: vec![1.0; dim] }
    }

    /// Short label used in reports.
    pub fn label(&self) -> String {
        match self {
            DomainDescriptor::UnitDisc => "unit-disc".into(),
            DomainDescriptor::Polydisc { radii } => {
                let r: Vec<String> = radii.iter().map(|&r| fmt_num(r)).collect();
                format!("polydisc({})", r.join("/"))
            }
            DomainDescriptor::EuclideanBall { radius, dim } => format!("ball(r={},n={dim})", fmt_num(*radius)),
            DomainDescriptor::Balanced { h, dim } => format!("balanced({},n={dim})", h.short_name()),
            DomainDescriptor::Product { first, second } => format!("product({}x{})", first.label(), second.label()),
            DomainDescriptor::Example3 { k_terms, j_terms } => format!("example3(K={k_terms},J={j_terms})"),
        }
    }
}

impl FromStr for DomainDescriptor {
    type Err = Error;

    /// Accepts a shorthand name or a TOML inline table such as
    /// `{ kind = "balanced", h = "max-geo", c = 2.0 }`.
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        if s.starts_with('{') {
            let wrapped = format!("domain = {s}");
            #[derive(Deserialize)]
            struct Wrap {
                domain: DomainDescriptor,
            }
            let parsed: Wrap = toml::from_str(&wrapped).map_err(|e| {
                let msg = e.to_string();
                if msg.contains("unknown variant") {
                    Error::UnknownDescriptor(s.to_string())
                } else if msg.contains("missing field") {
                    Error::InvalidDescriptor(msg.trim().replace('\n', " "))
                } else {
                    Error::Parse(msg)
                }
            })?;
            return Ok(parsed.domain);
        }
        Ok(match s {
            "unit-disc" | "disc" => DomainDescriptor::UnitDisc,
            "polydisc" | "bidisc" => DomainDescriptor::unit_polydisc(2),
            "ball" | "euclidean-ball" => DomainDescriptor::unit_ball(2),
            "max-geo" => DomainDescriptor::balanced(Gauge::MaxGeo { c: 2.0 }, 2),
            "geo-mean" => DomainDescriptor::balanced(Gauge::GeoMean, 2),
            "example3" => DomainDescriptor::Example3 { k_terms: 200, j_terms: 60 },
            other => return Err(Error::UnknownDescriptor(other.to_string())),
        })
    }
}

#[derive(Clone, Debug)]
enum Shape {
    UnitDisc,
    Polydisc(Vec<f64>),
    Ball { radius: f64 },
    Balanced(MinkowskiFunctional),
    Product { first: Box<DomainModel>, second: Box<DomainModel>, split: usize },
    Example3(Arc<Example3Domain>),
}

/// A domain in `C^n` given by a continuous margin: positive inside, negative
/// outside.
#[derive(Clone, Debug)]
pub struct DomainModel {
    descriptor: DomainDescriptor,
    shape: Shape,
    dim: usize,
}

/// Instantiates a model domain.
pub fn make_model_domain(descriptor: &DomainDescriptor) -> Result<DomainModel> {
    let (shape, dim) = match descriptor {
        DomainDescriptor::UnitDisc => (Shape::UnitDisc, 1),
        DomainDescriptor::Polydisc { radii } => {
            if radii.is_empty() {
                return Err(Error::InvalidDescriptor("polydisc needs at least one radius".into()));
            }
            if radii.iter().any(|&r| !(r.is_finite() && r > 0.0)) {
                return Err(Error::InvalidDescriptor(format!("polydisc radii must be positive: {radii:?}")));
            }
            (Shape::Polydisc(radii.clone()), radii.len())
        }
        DomainDescriptor::EuclideanBall { radius, dim } => {
            if !(radius.is_finite() && *radius > 0.0) {
                return Err(Error::InvalidDescriptor(format!("ball radius must be positive, got {radius}")));
            }
            if *dim == 0 {
                return Err(Error::InvalidDescriptor("dimension must be positive".into()));
            }
            (Shape::Ball { radius: *radius }, *dim)
        }
        DomainDescriptor::Balanced { h, dim } => (Shape::Balanced(MinkowskiFunctional::new(h.clone(), *dim)?), *dim),
        DomainDescriptor::Product { first, second } => {
            let a = make_model_domain(first)?;
            let b = make_model_domain(second)?;
            let split = a.dim();
            let dim = a.dim() + b.dim();
            (Shape::Product { first: Box::new(a), second: Box::new(b), split }, dim)
        }
        DomainDescriptor::Example3 { k_terms, j_terms } => {
            let params = Example3Params::new(*k_terms, *j_terms)?;
            (Shape::Example3(Arc::new(Example3Domain::new(params))), 2)
        }
    };
    Ok(DomainModel { descriptor: descriptor.clone(), shape, dim })
}

impl DomainModel {
    pub fn new(descriptor: &DomainDescriptor) -> Result<Self> {
        make_model_domain(descriptor)
    }

    pub fn from_example3(dom: Example3Domain) -> Self {
        let descriptor = DomainDescriptor::Example3 {
            k_terms: dom.params().k_terms(),
            j_terms: dom.params().j_terms(),
        };
        DomainModel { descriptor, shape: Shape::Example3(Arc::new(dom)), dim: 2 }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn descriptor(&self) -> &DomainDescriptor {
        &self.descriptor
    }

    pub fn label(&self) -> String {
        self.descriptor.label()
    }

    /// Margin on a raw coordinate slice; the slice must have length `dim()`.
    pub fn margin_slice(&self, z: &[C64]) -> f64 {
        match &self.shape {
            Shape::UnitDisc => 1.0 - z[0].norm(),
            Shape::Polydisc(radii) => radii.iter().zip(z).map(|(r, c)| r - c.norm()).fold(f64::INFINITY, f64::min),
            Shape::Ball { radius, .. } => radius - z.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt(),
            Shape::Balanced(h) => 1.0 - h.eval_slice(z),
            Shape::Product { first, second, split } => {
                first.margin_slice(&z[..*split]).min(second.margin_slice(&z[*split..]))
            }
            Shape::Example3(dom) => 1.0 - dom.psi_slice(z),
        }
    }

    pub fn margin(&self, z: &CPoint) -> Result<f64> {
        check_dim(self.dim, z.dim())?;
        Ok(self.margin_slice(z.as_slice()))
    }

    pub fn contains(&self, z: &CPoint) -> Result<bool> {
        Ok(self.margin(z)? > 0.0)
    }

    pub fn require_inside(&self, z: &CPoint) -> Result<()> {
        if self.contains(z)? {
            Ok(())
        } else {
            Err(Error::NotInDomain(z.to_string()))
        }
    }

    /// Whether a margin evaluation is costly enough to be worth parallelizing.
    pub fn is_expensive(&self) -> bool {
        match &self.shape {
            Shape::Example3(_) => true,
            Shape::Product { first, second, .. } => first.is_expensive() || second.is_expensive(),
            _ => false,
        }
    }

    pub fn balanced_gauge(&self) -> Option<&MinkowskiFunctional> {
        match &self.shape {
            Shape::Balanced(h) => Some(h),
            _ => None,
        }
    }

    pub fn example3(&self) -> Option<&Example3Domain> {
        match &self.shape {
            Shape::Example3(d) => Some(d),
            _ => None,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng;
    use rand::Rng;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    #[test]
    fn parses_complex_literals() {
        assert_eq!(parse_complex("1.5").unwrap(), c(1.5, 0.0));
        assert_eq!(parse_complex("-2i").unwrap(), c(0.0, -2.0));
        assert_eq!(parse_complex("i").unwrap(), c(0.0, 1.0));
        assert_eq!(parse_complex("0.3-0.4i").unwrap(), c(0.3, -0.4));
        assert_eq!(parse_complex("1e-3+2e-1i").unwrap(), c(1e-3, 0.2));
        assert_eq!(parse_complex("-1e-3-i").unwrap(), c(-1e-3, -1.0));
        assert!(parse_complex("abc").is_err());
        let p: CPoint = "0.5,-0.9i".parse().unwrap();
        assert_eq!(p.to_string(), "0.5,-0.9i");
    }

    #[test]
    fn rejects_non_finite_points() {
        assert_eq!(CPoint::new(vec![c(f64::NAN, 0.0)]), Err(Error::NonFinite("point")));
        assert_eq!(CVector::new(vec![]), Err(Error::Empty));
    }

    #[test]
    fn unit_disc_membership() {
        let d = make_model_domain(&DomainDescriptor::UnitDisc).unwrap();
        assert_eq!(d.dim(), 1);
        assert!(d.contains(&CPoint::from_real(&[0.5]).unwrap()).unwrap());
        assert!(!d.contains(&CPoint::from_real(&[1.5]).unwrap()).unwrap());
    }

    #[test]
    fn euclidean_balanced_is_the_ball() {
        let d = make_model_domain(&DomainDescriptor::balanced(Gauge::Euclidean, 2)).unwrap();
        assert!(d.contains(&CPoint::from_real(&[0.6, 0.7]).unwrap()).unwrap());
        assert!(!d.contains(&CPoint::from_real(&[0.8, 0.7]).unwrap()).unwrap());
    }

    #[test]
    fn polydisc_membership() {
        let d = make_model_domain(&DomainDescriptor::unit_polydisc(2)).unwrap();
        assert!(d.contains(&CPoint::new(vec![c(0.9, 0.0), c(0.0, -0.9)]).unwrap()).unwrap());
        assert!(!d.contains(&CPoint::from_real(&[1.1, 0.0]).unwrap()).unwrap());
    }

    #[test]
    fn descriptor_errors() {
        assert!(matches!(
            make_model_domain(&DomainDescriptor::Polydisc { radii: vec![1.0, -1.0] }),
            Err(Error::InvalidDescriptor(_))
        ));
        assert!(matches!(
            make_model_domain(&DomainDescriptor::EuclideanBall { radius: 0.0, dim: 2 }),
            Err(Error::InvalidDescriptor(_))
        ));
        assert!(matches!("moon".parse::<DomainDescriptor>(), Err(Error::UnknownDescriptor(_))));
        assert!(matches!(
            r#"{ kind = "torus" }"#.parse::<DomainDescriptor>(),
            Err(Error::UnknownDescriptor(_))
        ));
        // balanced without a gauge does not parse
        assert!(r#"{ kind = "balanced" }"#.parse::<DomainDescriptor>().is_err());
    }

    #[test]
    fn descriptor_toml_forms() {
        let d: DomainDescriptor = r#"{ kind = "balanced", h = "max-geo", c = 2.0 }"#.parse().unwrap();
        assert_eq!(d, DomainDescriptor::balanced(Gauge::MaxGeo { c: 2.0 }, 2));
        let p: DomainDescriptor = r#"{ kind = "polydisc", radii = [1.0, 0.5] }"#.parse().unwrap();
        assert_eq!(p, DomainDescriptor::Polydisc { radii: vec![1.0, 0.5] });
        let e: DomainDescriptor = r#"{ kind = "example3", K = 50, J = 20 }"#.parse().unwrap();
        assert_eq!(e, DomainDescriptor::Example3 { k_terms: 50, j_terms: 20 });
        let prod: DomainDescriptor =
            r#"{ kind = "product", first = { kind = "unit-disc" }, second = { kind = "unit-disc" } }"#
                .parse()
                .unwrap();
        let dom = make_model_domain(&prod).unwrap();
        assert_eq!(dom.dim(), 2);
        assert!(dom.contains(&CPoint::from_real(&[0.9, -0.9]).unwrap()).unwrap());
    }

    #[test]
    fn balanced_membership_examples() {
        let max = MinkowskiFunctional::new(Gauge::Max, 2).unwrap();
        assert!(balanced_membership(&max, &CPoint::from_real(&[0.5, 0.99]).unwrap()).unwrap());
        let mg = MinkowskiFunctional::new(Gauge::MaxGeo { c: 2.0 }, 2).unwrap();
        let z = CPoint::from_real(&[0.9, 0.1]).unwrap();
        assert!((mg.eval(&z.diff(&CPoint::origin(2))).unwrap() - 0.9).abs() < 1e-15);
        assert!(balanced_membership(&mg, &z).unwrap());
        let geo = MinkowskiFunctional::new(Gauge::GeoMean, 2).unwrap();
        assert!(balanced_membership(&geo, &CPoint::origin(2)).unwrap());
        assert!(matches!(
            balanced_membership(&geo, &CPoint::origin(3)),
            Err(Error::DimensionMismatch { expected: 2, got: 3 })
        ));
    }

    fn all_models() -> Vec<DomainModel> {
        [
            DomainDescriptor::UnitDisc,
            DomainDescriptor::Polydisc { radii: vec![1.0, 0.5] },
            DomainDescriptor::unit_ball(2),
            DomainDescriptor::balanced(Gauge::Euclidean, 2),
            DomainDescriptor::balanced(Gauge::Max, 2),
            DomainDescriptor::balanced(Gauge::L1, 2),
            DomainDescriptor::balanced(Gauge::GeoMean, 2),
            DomainDescriptor::balanced(Gauge::MaxGeo { c: 2.0 }, 2),
            DomainDescriptor::Example3 { k_terms: 20, j_terms: 10 },
        ]
        .iter()
        .map(|d| make_model_domain(d).unwrap())
        .collect()
    }

    /// Lipschitz bound of the margin in the sampled box, used to scale the
    /// perturbation radius (1 for distance-like margins).
    fn lipschitz_hint(d: &DomainModel) -> f64 {
        match d.descriptor() {
            DomainDescriptor::Balanced { h: Gauge::L1, .. } => 1.5,
            DomainDescriptor::Balanced { h: Gauge::GeoMean, .. } => 2.0,
            DomainDescriptor::Balanced { h: Gauge::MaxGeo { .. }, .. } => 2.5,
            DomainDescriptor::Example3 { .. } => 8.0,
            _ => 1.0,
        }
    }

    #[test]
    fn margin_sign_matches_membership_and_is_stable() {
        for d in all_models() {
            let n = d.dim();
            let lip = lipschitz_hint(&d);
            let mut rng = rng::stream(11, &[n as u64]);
            let mut interior = 0;
            while interior < 1000 {
                let z = CPoint::new(rng::unit_ball(&mut rng, n).into_iter().map(|c| c * 1.3).collect()).unwrap();
                let m = d.margin(&z).unwrap();
                assert_eq!(m > 0.0, d.contains(&z).unwrap());
                if m <= 0.0 {
                    continue;
                }
                interior += 1;
                let radius = m / (2.0 * lip) * rng.random::<f64>();
                let dir = rng::unit_sphere(&mut rng, n);
                let v = CVector::new(dir).unwrap();
                let zp = z.offset(C64::new(radius, 0.0), &v);
                assert!(d.contains(&zp).unwrap(), "{}: {} perturbed by {} left the domain", d.label(), z, radius);
            }
        }
    }

    #[test]
    fn balanced_domains_are_complete_circled() {
        for d in all_models() {
            let Some(h) = d.balanced_gauge() else { continue };
            let mut rng = rng::stream(5, &[]);
            for _ in 0..500 {
                let z = CPoint::new(rng::unit_ball(&mut rng, 2).into_iter().map(|c| c * 2.0).collect()).unwrap();
                if !balanced_membership(h, &z).unwrap() {
                    continue;
                }
                let lam = rng::unit_ball(&mut rng, 1)[0];
                let lz = CPoint::new(z.as_slice().iter().map(|c| c * lam).collect()).unwrap();
                assert!(balanced_membership(h, &lz).unwrap());
            }
        }
    }

    #[test]
    fn gauge_homogeneity() {
        let mut rng = rng::stream(3, &[]);
        for g in [Gauge::Euclidean, Gauge::Max, Gauge::L1, Gauge::GeoMean, Gauge::MaxGeo { c: 2.0 }] {
            let h = MinkowskiFunctional::new(g, 2).unwrap();
            for _ in 0..200 {
                let x = CVector::new(rng::unit_ball(&mut rng, 2)).unwrap();
                let lam = C64::new(rng.random_range(-3.0..3.0), rng.random_range(-3.0..3.0));
                let lhs = h.eval(&x.scale(lam)).unwrap();
                let rhs = lam.norm() * h.eval(&x).unwrap();
                assert!((lhs - rhs).abs() <= 1e-14 * (1.0 + rhs), "{lhs} vs {rhs}");
            }
            assert_eq!(h.eval(&CVector::zeros(2)).unwrap(), 0.0);
        }
    }

    #[test]
    fn fmt_num_uses_twelve_digits() {
        assert_eq!(fmt_num(4.0 / 3.0), "1.33333333333");
        assert_eq!(fmt_num(2.0), "2");
        assert_eq!(fmt_num(1e-20), "1e-20");
        assert_eq!(fmt_num(-2.5e-7), "-2.5e-7");
    }
}
