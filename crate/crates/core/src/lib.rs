//! Multi-snapshot subspace methods for line spectral estimation.
//!
//! Snapshots `y(t) = Phi x(t) + e(t)` of a uniform `M`-sensor array are
//! turned into an empirical covariance, its leading eigenvectors estimate the
//! signal space, and either MUSIC (noise-space correlation minima) or ESPRIT
//! (shift invariance) recovers the source frequencies on the torus `[0, 1)`.
//! The [`bounds`] module adds conditioning and Cramer-Rao diagnostics.
//!
//! Every routine is generic over a [`Real`] scalar; the `*64` aliases below
//! fix it to `f64`, which is what the accuracy guarantees are stated for.

pub mod bounds;
pub mod error;
pub mod esprit;
pub mod export;
pub mod linalg;
pub mod music;
pub mod rng;
pub mod scalar;
pub mod signal_model;
pub mod subspace;

pub use error::{ClumpRule, Error, Result};
pub use rng::TrialSeed;
pub use scalar::{CMatrix, CVector, Real};

pub type SupportSet64 = signal_model::SupportSet<f64>;
pub type ClumpsSpec64 = signal_model::ClumpsSpec<f64>;
pub type SteeringMatrix64 = signal_model::SteeringMatrix<f64>;
pub type AmplitudeBatch64 = signal_model::AmplitudeBatch<f64>;
pub type NoiseModel64 = signal_model::NoiseModel<f64>;
pub type SnapshotBatch64 = signal_model::SnapshotBatch<f64>;
pub type CovarianceMatrix64 = subspace::CovarianceMatrix<f64>;
pub type SubspaceBasis64 = subspace::SubspaceBasis<f64>;
pub type NscProfile64 = music::NscProfile<f64>;
pub type EspritSolution64 = esprit::EspritSolution<f64>;
pub type CrbResult64 = bounds::CrbResult<f64>;
pub type TheoryBound64 = bounds::TheoryBound<f64>;

pub type SupportSet32 = signal_model::SupportSet<f32>;
pub type SubspaceBasis32 = subspace::SubspaceBasis<f32>;
pub type NscProfile32 = music::NscProfile<f32>;
