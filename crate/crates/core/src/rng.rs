//! Deterministic random streams.
//!
//! Every random draw in the crate comes from a generator keyed by a base seed
//! and a path of integers (level, sample index, restart, ...), so results do
//! not depend on how work is split across threads.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::geometry::C64;

fn splitmix(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9E37_79B9_7F4A_7C15);
    x = (x ^ (x >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    x ^ (x >> 31)
}

/// Generator for the stream `(seed, path...)`.
pub fn stream(seed: u64, path: &[u64]) -> ChaCha8Rng {
    let mut h = splitmix(seed);
    for &p in path {
        h = splitmix(h ^ splitmix(p.wrapping_add(0x1234_5678)));
    }
    ChaCha8Rng::seed_from_u64(h)
}

/// Uniform sample from the closed unit ball of `C^n` (viewed as `R^{2n}`).
pub fn unit_ball<R: Rng>(rng: &mut R, n: usize) -> Vec<C64> {
    let mut v: Vec<C64> = (0..n)
        .map(|_| C64::new(rng.sample(StandardNormal), rng.sample(StandardNormal)))
        .collect();
    let norm = v.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
    let radius = rng.random::<f64>().powf(1.0 / (2 * n) as f64);
    let scale = if norm > 0.0 { radius / norm } else { 0.0 };
    v.iter_mut().for_each(|c| *c *= scale);
    v
}

/// Uniform sample from the unit sphere of `C^n`.
pub fn unit_sphere<R: Rng>(rng: &mut R, n: usize) -> Vec<C64> {
    loop {
        let v: Vec<C64> = (0..n)
            .map(|_| C64::new(rng.sample(StandardNormal), rng.sample(StandardNormal)))
            .collect();
        let norm = v.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
        if norm > 1e-12 {
            return v.into_iter().map(|c| c / norm).collect();
        }
    }
}
