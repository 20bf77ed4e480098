//! Monte-Carlo experiment engine for the subspace estimators in `spectral`:
//! seeded trials, one-parameter sweeps with log-log slope fits, and
//! two-parameter phase-transition grids, all emitted as CSV.
//!
//! Every trial draws from its own `(root_seed, trial)` random streams, so
//! results are bit-identical for any thread count and trial order.

pub mod checks;
pub mod config;
pub mod error;
pub mod fit;
pub mod output;
pub mod phase;
pub mod presets;
pub mod sampling;
pub mod sweep;
pub mod trial;

pub use config::{Abscissa, Axis, CovarianceRoute, Estimator, ExperimentConfig, Geometry, Metric, Parameter};
pub use error::{HarnessError, Result};
pub use fit::{fit_loglog_slope, LineFit};
pub use phase::{phase, phase_grid, PhaseGrid};
pub use sweep::{sweep, SweepResult, SweepRow};
pub use trial::{run_trial, Experiment, TrialOutcome};
