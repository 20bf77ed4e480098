//! One-parameter Monte-Carlo sweeps with log-log slope fits.

use rayon::prelude::*;
use serde::Serialize;
use spectral::bounds::sigma_s;

use crate::config::{Abscissa, ExperimentConfig, Metric, Parameter, SweepSpec};
use crate::error::{HarnessError, Result};
use crate::fit::{fit_loglog_slope, LineFit};
use crate::trial::{Experiment, TrialOutcome};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepRow {
    pub value: f64,
    /// Horizontal coordinate used in the fit.
    pub abscissa: f64,
    pub sigma_s: f64,
    /// `None` for a single source.
    pub srf: Option<f64>,
    pub mean: f64,
    /// Sample standard deviation (`n - 1` denominator).
    pub std: f64,
    pub n: usize,
    pub censored: usize,
}

impl SweepRow {
    pub fn all_censored(&self) -> bool {
        self.n > 0 && self.censored == self.n
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepResult {
    pub parameter: Parameter,
    pub metric: Metric,
    pub abscissa: Abscissa,
    pub rows: Vec<SweepRow>,
    pub fit: Option<LineFit>,
    /// Swept values left out of the fit (fully censored or zero mean).
    pub excluded: Vec<f64>,
    /// Why no fit was produced, when `fit` is `None`.
    pub fit_note: Option<String>,
}

/// Mean and sample standard deviation, accumulated in the given order.
pub fn mean_std(values: &[f64]) -> (f64, f64) {
    let n = values.len();
    if n == 0 {
        return (f64::NAN, f64::NAN);
    }
    let mean = values.iter().sum::<f64>() / n as f64;
    if n == 1 {
        return (mean, 0.0);
    }
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
    (mean, var.sqrt())
}

/// Runs `experiments x trials` work items in parallel and returns the
/// outcomes grouped per experiment, in trial order.
pub(crate) fn run_all(experiments: &[Experiment], trials: usize) -> Vec<Vec<TrialOutcome>> {
    let outcomes: Vec<TrialOutcome> = (0..experiments.len() * trials)
        .into_par_iter()
        .map(|k| experiments[k / trials].run_trial((k % trials) as u64))
        .collect();
    outcomes.chunks(trials).map(<[TrialOutcome]>::to_vec).collect()
}

/// Sweeps the axis in `config.sweep`; one result per metric.
pub fn sweep(config: &ExperimentConfig) -> Result<Vec<SweepResult>> {
    let spec = config
        .sweep
        .as_ref()
        .ok_or_else(|| HarnessError::Config("no \"sweep\" section".into()))?;
    sweep_axis(config, spec)
}

pub fn sweep_axis(config: &ExperimentConfig, spec: &SweepSpec) -> Result<Vec<SweepResult>> {
    let values = spec.axis.values.resolve();
    if values.len() < 3 {
        return Err(HarnessError::Config(format!("a sweep needs >= 3 values, got {}", values.len())));
    }
    let experiments = values
        .iter()
        .map(|&v| Experiment::new(&config.point(spec.axis.parameter, v)?))
        .collect::<Result<Vec<_>>>()?;
    let trials = config.trials();
    log::info!("sweep over {}: {} points x {trials} trials", spec.axis.parameter.name(), values.len());
    let outcomes = run_all(&experiments, trials);

    let metrics = experiments[0].metrics();
    let mut results = Vec::with_capacity(metrics.len());
    for metric in metrics {
        let mut rows = Vec::with_capacity(values.len());
        for ((&value, exp), trial_outcomes) in values.iter().zip(&experiments).zip(&outcomes) {
            let scored: Vec<(f64, bool)> = trial_outcomes.iter().filter_map(|o| o.metric(metric)).collect();
            let vals: Vec<f64> = scored.iter().map(|p| p.0).collect();
            let (mean, std) = mean_std(&vals);
            let sig = sigma_s(exp.steering());
            let srf = exp.support().srf(exp.steering().sensors()).ok();
            let abscissa = match spec.abscissa {
                Abscissa::Value => value,
                Abscissa::SigmaS => sig,
                Abscissa::Srf => srf.unwrap_or(f64::NAN),
            };
            rows.push(SweepRow {
                value,
                abscissa,
                sigma_s: sig,
                srf,
                mean,
                std,
                n: vals.len(),
                censored: scored.iter().filter(|p| p.1).count(),
            });
        }
        let (usable, excluded): (Vec<&SweepRow>, Vec<&SweepRow>) =
            rows.iter().partition(|r| !r.all_censored() && r.mean > 0.0 && r.abscissa > 0.0);
        for r in &excluded {
            log::warn!("{} at {} = {}: excluded from fit", metric.name(), spec.axis.parameter.name(), r.value);
        }
        let points: Vec<(f64, f64)> = usable.iter().map(|r| (r.abscissa, r.mean)).collect();
        let (fit, fit_note) = match fit_loglog_slope(&points) {
            Ok(f) => (Some(f), None),
            Err(e) => (None, Some(e.to_string())),
        };
        let excluded = excluded.iter().map(|r| r.value).collect();
        results.push(SweepResult { parameter: spec.axis.parameter, metric, abscissa: spec.abscissa, rows, fit, excluded, fit_note });
    }
    Ok(results)
}
