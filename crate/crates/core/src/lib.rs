//! Numerical laboratory for invariant metrics on domains in `C^n`.
//!
//! The crate computes certified upper bounds for the Lempert function and the
//! Kobayashi–Royden metric by searching over polynomial analytic discs, builds
//! the higher-order objects on top of them (m-th Kobayashi metrics, the
//! Kobayashi–Buseman metric, m-th Lempert functions, the Kobayashi
//! pseudodistance), estimates their difference-quotient derivatives, and
//! compares everything against closed-form values on model domains.
//!
//! Module map:
//!
//! * [`geometry`]: points, vectors, gauges and model domains.
//! * [`example_domains`]: the pseudoconvex domain built from a subharmonic series.
//! * [`disc_search`]: polynomial-disc upper bounds for `k̃*` and `κ`.
//! * [`oracles`]: closed-form values on the disc, polydisc, ball and balanced domains.
//! * [`higher_metrics`]: decompositions, chains and convex-hull gauges.
//! * [`derivatives`]: limsup/liminf quotient estimators and the verification checks.
//! * [`curves`]: length functionals and the chain experiment along the test curve.
//! * [`driver`]: experiment configuration, reports and the `iml` command line.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod curves;
pub mod derivatives;
pub mod disc_search;
pub mod driver;
pub mod error;
pub mod example_domains;
pub mod geometry;
pub mod higher_metrics;
pub mod optim;
pub mod oracles;
pub mod rng;

pub use error::{Error, Result};
pub use geometry::{CPoint, CVector, DomainDescriptor, DomainModel, Gauge, MinkowskiFunctional, C64};
