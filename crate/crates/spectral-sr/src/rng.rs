//! Seed derivation and direction sampling shared by the seeded operators.
//!
//! Streams are keyed by `(seed, stream index)` through a splitmix64 finalizer
//! so independently keyed draws stay deterministic regardless of evaluation
//! order.

use rand::Rng;
use rand_distr::StandardNormal;

pub(crate) fn mix_seed(seed: u64, stream: u64) -> u64 {
    let mut z = seed ^ stream.wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Uniform direction on the unit sphere of `dims`-dimensional space.
pub(crate) fn unit_direction(rng: &mut impl Rng, dims: usize) -> Vec<f64> {
    loop {
        let v: Vec<f64> = (0..dims).map(|_| rng.sample(StandardNormal)).collect();
        let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        if norm > 1e-12 {
            return v.into_iter().map(|x| x / norm).collect();
        }
    }
}
