//! One Monte-Carlo trial: draw a covariance, estimate the signal space, run
//! the estimators and score them against the truth.

use serde::Serialize;
use spectral::esprit::{esprit_estimate, matching_distance};
use spectral::music::{extract_support, nsc_sup_perturbation, sample_nsc, NscProfile};
use spectral::subspace::signal_space;
use spectral::{SteeringMatrix64, SubspaceBasis64, SupportSet64, TrialSeed};

use crate::config::{ExperimentConfig, Metric};
use crate::error::Result;
use crate::sampling::sample_covariance;

/// Error recorded for a trial whose estimator degenerated: the torus diameter.
pub const MD_CENSOR: f64 = 0.5;

/// Error recorded for a failed NSC comparison; both profiles lie in `[0, 1]`.
pub const NSC_CENSOR: f64 = 1.0;

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize)]
pub struct TrialOutcome {
    pub nsc_sup: Option<f64>,
    /// ESPRIT matching distance, or MUSIC's when ESPRIT is not run.
    pub md: Option<f64>,
    pub music_md: Option<f64>,
    pub md_censored: bool,
    pub music_censored: bool,
}

impl TrialOutcome {
    /// Value of `metric` and whether it was censored.
    pub fn metric(&self, metric: Metric) -> Option<(f64, bool)> {
        match metric {
            Metric::NscSup => self.nsc_sup.map(|v| (v, self.music_censored)),
            Metric::MusicMd => self.music_md.map(|v| (v, self.music_censored)),
            Metric::Md => self.md.map(|v| (v, self.md_censored)),
        }
    }
}

/// A validated configuration with everything shared between trials
/// precomputed: the support, `Phi` and the true NSC profile.
#[derive(Debug, Clone)]
pub struct Experiment {
    config: ExperimentConfig,
    support: SupportSet64,
    phi: SteeringMatrix64,
    truth_profile: Option<NscProfile<f64>>,
    grid: usize,
}

impl Experiment {
    pub fn new(config: &ExperimentConfig) -> Result<Self> {
        config.validate()?;
        let support = config.geometry.support()?;
        let m = config.sensors()?;
        let phi = SteeringMatrix64::new(&support, m)?;
        let grid = config.grid_size()?;
        let truth_profile = if config.estimator.runs_music() {
            let truth = SubspaceBasis64::signal_space_of(&phi)?;
            Some(sample_nsc(&truth, grid)?.with_tag("truth"))
        } else {
            None
        };
        Ok(Self { config: config.clone(), support, phi, truth_profile, grid })
    }

    pub fn config(&self) -> &ExperimentConfig {
        &self.config
    }

    pub fn support(&self) -> &SupportSet64 {
        &self.support
    }

    pub fn steering(&self) -> &SteeringMatrix64 {
        &self.phi
    }

    /// Metrics this experiment produces, in reporting order.
    pub fn metrics(&self) -> Vec<Metric> {
        let e = self.config.estimator;
        let mut out = Vec::new();
        if e.runs_music() {
            out.push(Metric::NscSup);
        }
        out.push(Metric::Md);
        if e.runs_music() && e.runs_esprit() {
            out.push(Metric::MusicMd);
        }
        out
    }

    /// Estimated signal space of trial `index`: the same draw `run_trial` scores.
    pub fn signal_basis(&self, index: u64) -> Result<SubspaceBasis64> {
        let cfg = &self.config;
        let seed = TrialSeed::new(cfg.root_seed, index);
        let cov = sample_covariance(&self.phi, &self.support, cfg.nu, cfg.snapshots, cfg.covariance, seed)?;
        Ok(signal_space(&cov, self.support.len())?)
    }

    /// True NSC profile on the experiment grid, when MUSIC is run.
    pub fn truth_profile(&self) -> Option<&NscProfile<f64>> {
        self.truth_profile.as_ref()
    }

    pub fn grid(&self) -> usize {
        self.grid
    }

    /// Runs trial `index`; deterministic in `(root_seed, index)`.
    ///
    /// Estimator degeneracies are censored, never propagated: md becomes
    /// [`MD_CENSOR`] and the NSC perturbation [`NSC_CENSOR`].
    pub fn run_trial(&self, index: u64) -> TrialOutcome {
        let cfg = &self.config;
        let basis = self.signal_basis(index);
        let mut out = TrialOutcome::default();
        let basis = match basis {
            Ok(b) => b,
            Err(e) => {
                log::warn!("trial {index}: covariance step failed: {e}");
                if cfg.estimator.runs_music() {
                    out.nsc_sup = Some(NSC_CENSOR);
                    out.music_md = Some(MD_CENSOR);
                    out.music_censored = true;
                }
                out.md = Some(MD_CENSOR);
                out.md_censored = true;
                return out;
            }
        };
        if let Some(truth) = &self.truth_profile {
            match self.music(&basis, truth) {
                Ok((nsc, md)) => {
                    out.nsc_sup = Some(nsc);
                    out.music_md = Some(md.min(MD_CENSOR));
                }
                Err(e) => {
                    log::debug!("trial {index}: MUSIC censored: {e}");
                    out.nsc_sup = Some(NSC_CENSOR);
                    out.music_md = Some(MD_CENSOR);
                    out.music_censored = true;
                }
            }
        }
        if cfg.estimator.runs_esprit() {
            match esprit_estimate(&basis).and_then(|sol| matching_distance(&self.support, &sol.estimated_support)) {
                Ok(md) => out.md = Some(md.min(MD_CENSOR)),
                Err(e) => {
                    log::debug!("trial {index}: ESPRIT censored: {e}");
                    out.md = Some(MD_CENSOR);
                    out.md_censored = true;
                }
            }
        } else {
            out.md = out.music_md;
            out.md_censored = out.music_censored;
        }
        out
    }

    fn music(&self, basis: &SubspaceBasis64, truth: &NscProfile<f64>) -> spectral::Result<(f64, f64)> {
        let profile = sample_nsc(basis, self.grid)?;
        let nsc = nsc_sup_perturbation(truth, &profile)?;
        let est = extract_support(&profile, self.support.len(), self.config.refine)?;
        Ok((nsc, matching_distance(&self.support, &est.support)?))
    }
}

/// Convenience wrapper: prepares `config` and runs one trial.
pub fn run_trial(config: &ExperimentConfig, index: u64) -> Result<TrialOutcome> {
    Ok(Experiment::new(config)?.run_trial(index))
}
