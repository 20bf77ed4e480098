//! Two-parameter phase-transition grids of `log2(md / Delta)`.

use serde::Serialize;

use crate::config::{Axis, ExperimentConfig, Metric, Parameter};
use crate::error::{HarnessError, Result};
use crate::fit::{fit_loglog_slope, LineFit};
use crate::sweep::run_all;
use crate::trial::Experiment;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PhaseGrid {
    pub x_parameter: Parameter,
    pub y_parameter: Parameter,
    pub xs: Vec<f64>,
    pub ys: Vec<f64>,
    /// Mean `log2(md / Delta)`; `cells[i * ys.len() + j]` is `(xs[i], ys[j])`.
    pub cells: Vec<f64>,
    pub threshold: f64,
    /// Per column, the `y` where the cell value first crosses `threshold`
    /// (linear interpolation in `log10 y`).
    pub crossings: Vec<Option<f64>>,
    /// Line through `(log10 x, log10 y_crossing)`; needs >= 3 crossings.
    pub fit: Option<LineFit>,
    /// Column values without a crossing.
    pub skipped_columns: Vec<f64>,
}

impl PhaseGrid {
    pub fn cell(&self, i: usize, j: usize) -> f64 {
        self.cells[i * self.ys.len() + j]
    }

    pub fn slope(&self) -> Option<f64> {
        self.fit.map(|f| f.slope)
    }
}

/// Grid over `config.phase`.
pub fn phase(config: &ExperimentConfig) -> Result<PhaseGrid> {
    let spec = config
        .phase
        .as_ref()
        .ok_or_else(|| HarnessError::Config("no \"phase\" section".into()))?;
    phase_grid(config, &spec.x, &spec.y, spec.threshold)
}

/// Mean `log2(md / Delta)` over `config.trials()` trials per cell, then the
/// per-column transition and a log-log line through the transitions.
///
/// A zero md is floored at `eps * Delta` (i.e. -52 in log2 units) so that
/// exact recoveries stay finite.
pub fn phase_grid(config: &ExperimentConfig, x: &Axis, y: &Axis, threshold: f64) -> Result<PhaseGrid> {
    let (xs, ys) = (x.values.resolve(), y.values.resolve());
    if xs.len() < 4 || ys.len() < 4 {
        return Err(HarnessError::Config("both phase axes need >= 4 values".into()));
    }
    let mut experiments = Vec::with_capacity(xs.len() * ys.len());
    for &xv in &xs {
        let cx = config.point(x.parameter, xv)?;
        for &yv in &ys {
            experiments.push(Experiment::new(&cx.point(y.parameter, yv)?)?);
        }
    }
    let trials = config.trials();
    log::info!("phase grid {} x {}: {} cells x {trials} trials", x.parameter.name(), y.parameter.name(), experiments.len());
    let outcomes = run_all(&experiments, trials);
    let cells: Vec<f64> = experiments
        .iter()
        .zip(&outcomes)
        .map(|(exp, trial_outcomes)| {
            let delta = exp.support().min_separation().unwrap_or(1.0);
            let logs: Vec<f64> = trial_outcomes
                .iter()
                .filter_map(|o| o.metric(Metric::Md))
                .map(|(md, _)| (md.max(f64::EPSILON * delta) / delta).log2())
                .collect();
            logs.iter().sum::<f64>() / logs.len() as f64
        })
        .collect();

    let ny = ys.len();
    let crossings: Vec<Option<f64>> = (0..xs.len())
        .map(|i| first_crossing(&ys, &cells[i * ny..(i + 1) * ny], threshold))
        .collect();
    let points: Vec<(f64, f64)> = xs.iter().zip(&crossings).filter_map(|(&xv, c)| c.map(|yc| (xv, yc))).collect();
    let skipped_columns: Vec<f64> = xs.iter().zip(&crossings).filter(|(_, c)| c.is_none()).map(|(&xv, _)| xv).collect();
    for xv in &skipped_columns {
        log::warn!("phase grid: no transition in column {} = {xv}", x.parameter.name());
    }
    let fit = if points.len() >= 3 { fit_loglog_slope(&points).ok() } else { None };
    Ok(PhaseGrid { x_parameter: x.parameter, y_parameter: y.parameter, xs, ys, cells, threshold, crossings, fit, skipped_columns })
}

/// First `y` at which `values` reaches `level`, interpolating linearly in
/// `log10 y` between neighbouring cells.
pub fn first_crossing(ys: &[f64], values: &[f64], level: f64) -> Option<f64> {
    for j in 0..values.len().saturating_sub(1) {
        let (a, b) = (values[j] - level, values[j + 1] - level);
        if a == 0.0 {
            return Some(ys[j]);
        }
        if a * b < 0.0 || b == 0.0 {
            let t = a / (a - b);
            let (l0, l1) = (ys[j].log10(), ys[j + 1].log10());
            return Some(10f64.powf(l0 + t * (l1 - l0)));
        }
    }
    None
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn crossing_interpolates_in_log_space() {
        let ys = [1.0, 10.0, 100.0];
        let y = first_crossing(&ys, &[-3.0, -2.0, 0.0], -1.0).unwrap();
        assert!((y - 10f64.powf(1.5)).abs() < 1e-9);
        assert_eq!(first_crossing(&ys, &[-1.0, 0.0, 1.0], -1.0), Some(1.0));
        assert_eq!(first_crossing(&ys, &[-3.0, -2.5, -2.0], -1.0), None);
        // Decreasing columns cross too.
        let y = first_crossing(&ys, &[2.0, 0.0, -2.0], -1.0).unwrap();
        assert!((y - 10f64.powf(1.5)).abs() < 1e-9);
    }
}
