//! Seed derivation for reproducible, schedule-independent random streams.
//!
//! A root seed keys a ChaCha generator; the `(trial, tag)` pair selects one
//! of its 2^64 independent streams. Two trials never share generator state,
//! so results do not depend on the order in which trials execute.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;
use rand_distr::StandardNormal;
use nalgebra::Complex;

use crate::scalar::Real;

/// Identifies which random quantity a stream feeds.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
#[repr(u8)]
pub enum StreamTag {
    Amplitudes = 1,
    Noise = 2,
    Covariance = 3,
    Geometry = 4,
}

const TAG_BITS: u32 = 4;

/// Root seed together with a trial index.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub struct TrialSeed {
    pub root: u64,
    pub trial: u64,
}

impl TrialSeed {
    pub fn new(root: u64, trial: u64) -> Self {
        Self { root, trial }
    }

    pub fn stream(&self, tag: StreamTag) -> ChaCha12Rng {
        substream(self.root, self.trial, tag)
    }
}

impl From<u64> for TrialSeed {
    fn from(root: u64) -> Self {
        Self { root, trial: 0 }
    }
}

/// Independent generator for `(root, trial, tag)`.
pub fn substream(root: u64, trial: u64, tag: StreamTag) -> ChaCha12Rng {
    assert!(trial < (1 << (64 - TAG_BITS)), "trial index out of range");
    let mut rng = ChaCha12Rng::seed_from_u64(root);
    rng.set_stream((trial << TAG_BITS) | tag as u64);
    rng
}

/// Circularly-symmetric complex Gaussian with `E|z|^2 = variance`.
pub fn complex_gaussian<T: Real, R: Rng + ?Sized>(rng: &mut R, variance: f64) -> Complex<T> {
    let s = (variance / 2.0).sqrt();
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    Complex::new(T::lit(s * re), T::lit(s * im))
}
