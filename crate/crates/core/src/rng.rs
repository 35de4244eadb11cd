//! Seeds, substream derivation and Gaussian sampling.
//!
//! A seed is expanded into a [`ChaCha8Rng`] and normal variates are drawn with
//! `rand_distr`'s ziggurat `StandardNormal`. Sub-seeds are derived with the
//! SplitMix64 finalizer, so `seed.child(tag)` gives a well-separated stream for
//! every tag. The exact stream is stable within a release, not across releases.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::matrix::DenseMatrix;

const GOLDEN_GAMMA: u64 = 0x9e37_79b9_7f4a_7c15;

/// SplitMix64 output function.
#[inline]
pub fn splitmix64(x: u64) -> u64 {
    let mut z = x.wrapping_add(GOLDEN_GAMMA);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct RngSeed(pub u64);

impl RngSeed {
    /// Sub-seed for stream `tag`: `splitmix64(splitmix64(seed) ^ tag·γ)`.
    #[inline]
    pub fn child(self, tag: u64) -> RngSeed {
        RngSeed(splitmix64(splitmix64(self.0) ^ tag.wrapping_mul(GOLDEN_GAMMA)))
    }

    pub fn rng(self) -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(self.0)
    }
}

impl From<u64> for RngSeed {
    fn from(v: u64) -> Self {
        RngSeed(v)
    }
}

pub(crate) fn fill_standard_normal<R: Rng + ?Sized>(rng: &mut R, buf: &mut [f64]) {
    for v in buf {
        *v = rng.sample(StandardNormal);
    }
}

/// `p × n` matrix of i.i.d. standard normal entries, filled row by row.
pub fn sample_standard_gaussian_matrix(p: usize, n: usize, seed: RngSeed) -> DenseMatrix {
    assert!(p > 0 && n > 0, "dimensions must be positive");
    let mut rng = seed.rng();
    let mut data = vec![0.0; p * n];
    fill_standard_normal(&mut rng, &mut data);
    DenseMatrix::from_parts(p, n, data)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn same_seed_same_matrix() {
        let a = sample_standard_gaussian_matrix(4, 9, RngSeed(17));
        let b = sample_standard_gaussian_matrix(4, 9, RngSeed(17));
        assert_eq!(a.as_slice(), b.as_slice());
        let c = sample_standard_gaussian_matrix(4, 9, RngSeed(18));
        assert_ne!(a.as_slice(), c.as_slice());
    }

    #[test]
    fn children_differ() {
        let s = RngSeed(1);
        assert_ne!(s.child(0), s.child(1));
        assert_ne!(s.child(0), RngSeed(2).child(0));
        assert_eq!(s.child(7), RngSeed(1).child(7));
    }

    #[test]
    fn moments_of_a_million_draws() {
        let n = 1_000_000;
        let m = sample_standard_gaussian_matrix(1, n, RngSeed(2024));
        let xs = m.as_slice();
        let mean = xs.iter().sum::<f64>() / n as f64;
        let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
        let m4 = xs.iter().map(|x| x.powi(4)).sum::<f64>() / n as f64;
        assert!(mean.abs() < 4e-3, "mean {mean}");
        assert!((var - 1.0).abs() < 0.01, "variance {var}");
        assert!((m4 - 3.0).abs() < 0.03 * 3.0, "fourth moment {m4}");
    }
}
