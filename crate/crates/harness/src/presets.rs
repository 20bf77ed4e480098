//! The two-clump configurations used by the reproduction checks: `M = 100`,
//! two clumps of `lambda` points anchored at 0.1 and 0.6, i.i.d. `CN(0, 1)`
//! amplitudes.

use spectral::ClumpsSpec64;

use crate::config::{Abscissa, Axis, Estimator, ExperimentConfig, Geometry, Parameter, PhaseSpec, SweepSpec};

pub const SENSORS: usize = 100;
pub const NUM_CLUMPS: usize = 2;
pub const FIRST_ANCHOR: f64 = 0.1;
/// Inter-clump gap in Rayleigh units; the anchors are ~49 apart.
pub const BETA: f64 = 20.0;
pub const DEFAULT_SRF: f64 = 5.0;
pub const DEFAULT_NU: f64 = 0.1;
pub const ROOT_SEED: u64 = 20_240_601;

pub fn clumps(lambda: usize, srf: f64) -> ClumpsSpec64 {
    ClumpsSpec64::equispaced(NUM_CLUMPS, lambda, 1.0 / srf, BETA, SENSORS, FIRST_ANCHOR)
}

/// Snapshot count used at the default operating point.
pub fn default_snapshots(lambda: usize) -> usize {
    if lambda >= 3 {
        25_000
    } else {
        1000
    }
}

/// `SRF in {2, ..., 10}` restricted to admissible clumps, `(lambda - 1) < SRF`.
pub fn srf_values(lambda: usize) -> Vec<f64> {
    (2..=10).map(f64::from).filter(|&s| (lambda as f64 - 1.0) < s).collect()
}

pub fn base(lambda: usize) -> ExperimentConfig {
    let mut cfg = ExperimentConfig::new(Geometry::Clumps(clumps(lambda, DEFAULT_SRF)), default_snapshots(lambda), DEFAULT_NU);
    cfg.estimator = Estimator::Both;
    cfg.root_seed = ROOT_SEED;
    cfg
}

fn with_sweep(mut cfg: ExperimentConfig, axis: Axis, abscissa: Abscissa) -> ExperimentConfig {
    cfg.sweep = Some(SweepSpec { axis, abscissa });
    cfg
}

/// Error versus noise: `nu in logspace[1e-3, 10^-1.5]`, 6 points.
pub fn noise_sweep(lambda: usize) -> ExperimentConfig {
    with_sweep(base(lambda), Axis::logspace(Parameter::Nu, -3.0, -1.5, 6), Abscissa::Value)
}

/// Error versus snapshots at `nu = 0.1`: `L in logspace[1e2, 1e4]`, 6 points.
pub fn snapshot_sweep(lambda: usize) -> ExperimentConfig {
    with_sweep(base(lambda), Axis::logspace(Parameter::Snapshots, 2.0, 4.0, 6), Abscissa::Value)
}

/// Error versus SRF; each row also carries `sigma_S(Phi)` so the same runs
/// give the conditioning fit.
pub fn srf_sweep(lambda: usize) -> ExperimentConfig {
    with_sweep(base(lambda), Axis::new(Parameter::Srf, srf_values(lambda)), Abscissa::Srf)
}

fn with_phase(mut cfg: ExperimentConfig, x: Axis, y: Axis) -> ExperimentConfig {
    cfg.estimator = Estimator::Esprit;
    cfg.phase = Some(PhaseSpec { x, y, threshold: -1.0 });
    cfg
}

/// Noise axis shared by the phase grids: `nu in logspace[10^-1.5, 10]`,
/// 6 points. The `md = Delta / 2` transition sits between 0.3 and 7 for
/// every column of both grids below.
pub fn phase_noise_axis() -> Axis {
    Axis::logspace(Parameter::Nu, -1.5, 1.0, 6)
}

/// Transition in the `(L, nu)` plane at the default SRF.
pub fn phase_nu_l(lambda: usize) -> ExperimentConfig {
    with_phase(base(lambda), Axis::logspace(Parameter::Snapshots, 2.0, 4.0, 6), phase_noise_axis())
}

/// Transition in the `(SRF, nu)` plane at the default `L`, with
/// `SRF in logspace[lambda, 10]`.
pub fn phase_nu_srf(lambda: usize) -> ExperimentConfig {
    let lo = (lambda as f64).log10();
    with_phase(base(lambda), Axis::logspace(Parameter::Srf, lo, 1.0, 6), phase_noise_axis())
}
