use std::fs::{self, File};
use std::io::BufWriter;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use serde::Serialize;
use serde_json::json;
use spectral::bounds::{bound_shapes, crb, crb_clumps_scaling, noise_level_admissible, sigma_s, BoundInputs};
use spectral::esprit::{esprit_estimate, matching_distance};
use spectral::music::{extract_support, nsc_sup_perturbation, sample_nsc};
use spectral::{CMatrix, SteeringMatrix64};
use spectral_harness::checks::{all_pass, run_suite, Suite, TrialBudget};
use spectral_harness::output::{write_crossings_csv, write_fit_csv, write_phase_csv, write_sweep_csv};
use spectral_harness::{phase, sweep, Estimator, Experiment, ExperimentConfig, Geometry, HarnessError};

use crate::{Cli, Command};

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error(transparent)]
    Harness(#[from] HarnessError),
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
}

impl CliError {
    pub fn exit_code(&self) -> ExitCode {
        match self {
            CliError::Harness(HarnessError::Model(e)) if e.is_degeneracy() => ExitCode::from(2),
            _ => ExitCode::from(1),
        }
    }
}

impl From<spectral::Error> for CliError {
    fn from(e: spectral::Error) -> Self {
        CliError::Harness(e.into())
    }
}

type Result<T> = std::result::Result<T, CliError>;

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> CliError + '_ {
    move |source| CliError::Io { path: path.to_path_buf(), source }
}

fn load_config(cli: &Cli) -> Result<ExperimentConfig> {
    let path = cli
        .config
        .as_ref()
        .ok_or_else(|| CliError::Usage("this command needs --config PATH".into()))?;
    let text = fs::read_to_string(path).map_err(io_err(path))?;
    let mut cfg = ExperimentConfig::from_json(&text)?;
    if let Some(seed) = cli.seed {
        cfg.root_seed = seed;
    }
    Ok(cfg)
}

fn create(dir: &Path, name: &str) -> Result<BufWriter<File>> {
    fs::create_dir_all(dir).map_err(io_err(dir))?;
    let path = dir.join(name);
    Ok(BufWriter::new(File::create(&path).map_err(io_err(&path))?))
}

fn write_json<T: Serialize>(dir: &Path, name: &str, value: &T) -> Result<()> {
    let mut w = create(dir, name)?;
    serde_json::to_writer_pretty(&mut w, value).map_err(HarnessError::from)?;
    std::io::Write::flush(&mut w).map_err(io_err(&dir.join(name)))?;
    Ok(())
}

/// Copy of `cfg` that runs only `estimator`, without sweep or grid sections.
fn single(cfg: &ExperimentConfig, estimator: Estimator) -> ExperimentConfig {
    let mut c = cfg.clone();
    c.estimator = estimator;
    c.sweep = None;
    c.phase = None;
    c
}

pub fn dispatch(cli: &Cli) -> Result<ExitCode> {
    match &cli.command {
        Command::Music { trial } => music(cli, *trial),
        Command::Esprit { trial } => esprit(cli, *trial),
        Command::Bounds => bounds(cli),
        Command::Sweep => run_sweep(cli),
        Command::Phase => run_phase(cli),
        Command::Check { suite, trials } => check(cli, suite, *trials),
    }
}

fn music(cli: &Cli, trial: u64) -> Result<ExitCode> {
    let exp = Experiment::new(&single(&load_config(cli)?, Estimator::Music))?;
    let basis = exp.signal_basis(trial)?;
    let profile = sample_nsc(&basis, exp.grid())?;
    let est = extract_support(&profile, exp.support().len(), exp.config().refine)?;
    let md = matching_distance(exp.support(), &est.support)?;
    let nsc = match exp.truth_profile() {
        Some(truth) => Some(nsc_sup_perturbation(truth, &profile)?),
        None => None,
    };
    let mut w = create(&cli.out, "nsc.csv")?;
    profile.write_csv(&mut w)?;
    write_json(
        &cli.out,
        "result.json",
        &json!({
            "estimated_support": est.support.points(),
            "md": md,
            "nsc_sup": nsc,
            "degenerate_peaks": est.degenerate_peaks,
            "grid_size": exp.grid(),
        }),
    )?;
    println!("MUSIC md = {md:e}");
    if est.degenerate_peaks {
        eprintln!("degenerate_peaks: fewer than S local minima, estimate padded");
        return Ok(ExitCode::from(2));
    }
    Ok(ExitCode::SUCCESS)
}

fn esprit(cli: &Cli, trial: u64) -> Result<ExitCode> {
    let exp = Experiment::new(&single(&load_config(cli)?, Estimator::Esprit))?;
    let sol = esprit_estimate(&exp.signal_basis(trial)?)?;
    let md = matching_distance(exp.support(), &sol.estimated_support)?;
    let eigenvalues: Vec<[f64; 2]> = sol.eigenvalues.iter().map(|z| [z.re, z.im]).collect();
    write_json(
        &cli.out,
        "result.json",
        &json!({ "estimated_support": sol.estimated_support.points(), "md": md, "eigenvalues": eigenvalues }),
    )?;
    println!("ESPRIT md = {md:e}");
    Ok(ExitCode::SUCCESS)
}

fn bounds(cli: &Cli) -> Result<ExitCode> {
    let cfg = load_config(cli)?;
    let support = &cfg.geometry.support()?;
    let phi = &SteeringMatrix64::new(support, cfg.sensors()?)?;
    let (m, s) = (phi.sensors(), phi.sources());
    let sig = sigma_s(phi);
    // A lone point is one full period away from itself.
    let delta = support.min_separation().unwrap_or(1.0);
    // Unit-variance i.i.d. amplitudes: X = I.
    let x = CMatrix::identity(s, s);
    let shapes = bound_shapes(BoundInputs {
        sensors: m,
        sources: s,
        snapshots: cfg.snapshots,
        nu: cfg.nu,
        lambda_s: 1.0,
        sigma_s: sig,
        delta,
    });
    let shapes = match shapes {
        Ok(v) => v,
        Err(e) => {
            log::warn!("bound shapes unavailable: {e}");
            Vec::new()
        }
    };
    let get = |name: &str| shapes.iter().find(|b| b.name == name).map(|b| b.value);
    let bounds: Vec<_> = shapes
        .iter()
        .filter(|b| b.constant_free)
        .map(|b| json!({ "name": b.name, "value": b.value, "constant_free": b.constant_free }))
        .collect();
    let (crb_trace, crb_error) = match crb(support, &x, cfg.nu, cfg.snapshots, m) {
        Ok(r) => (Some(r.trace_bound), None),
        Err(e) => (None, Some(e.to_string())),
    };
    let clumps_scaling = match &cfg.geometry {
        Geometry::Clumps(spec) => crb_clumps_scaling(spec, &x, cfg.nu, cfg.snapshots).ok(),
        Geometry::Support(_) => None,
    };
    let report = json!({
        "sigma_S": sig,
        "srf": support.srf(m).ok(),
        "delta": delta,
        "xi": get("xi"),
        "rho": get("rho"),
        "noise_admissible": noise_level_admissible(cfg.nu, sig, 1.0),
        "bounds": bounds,
        "crb_trace": crb_trace,
        "crb_error": crb_error,
        "crb_clumps_scaling": clumps_scaling,
    });
    write_json(&cli.out, "bounds.json", &report)?;
    println!("{}", serde_json::to_string_pretty(&report).map_err(HarnessError::from)?);
    Ok(ExitCode::SUCCESS)
}

fn run_sweep(cli: &Cli) -> Result<ExitCode> {
    let cfg = load_config(cli)?;
    let results = sweep(&cfg)?;
    write_sweep_csv(&results, create(&cli.out, "sweep.csv")?)?;
    write_fit_csv(&results, create(&cli.out, "fit.csv")?)?;
    for r in &results {
        match (&r.fit, &r.fit_note) {
            (Some(f), _) => println!("{} vs {}: slope {:.4} (residual {:.3})", r.metric.name(), r.parameter.name(), f.slope, f.residual),
            (None, note) => println!("{} vs {}: no fit ({})", r.metric.name(), r.parameter.name(), note.as_deref().unwrap_or("")),
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn run_phase(cli: &Cli) -> Result<ExitCode> {
    let cfg = load_config(cli)?;
    let grid = phase(&cfg)?;
    write_phase_csv(&grid, create(&cli.out, "phase.csv")?)?;
    write_crossings_csv(&grid, create(&cli.out, "crossings.csv")?)?;
    match grid.slope() {
        Some(k) => println!("transition slope {k:.4}"),
        None => println!("transition slope undefined: {} of {} columns cross", grid.xs.len() - grid.skipped_columns.len(), grid.xs.len()),
    }
    Ok(ExitCode::SUCCESS)
}

fn check(cli: &Cli, suite: &str, trials: Option<usize>) -> Result<ExitCode> {
    let suite: Suite = suite.parse()?;
    let budget = trials.map(TrialBudget::uniform).unwrap_or_default();
    let outcomes = run_suite(suite, budget)?;
    for o in &outcomes {
        println!("{o}");
    }
    if cli.out != Path::new(".") {
        write_json(&cli.out, "check.json", &outcomes)?;
    }
    if all_pass(&outcomes) {
        Ok(ExitCode::SUCCESS)
    } else {
        println!("{} of {} checks failed", outcomes.iter().filter(|o| !o.pass).count(), outcomes.len());
        Ok(ExitCode::from(3))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn degeneracies_exit_2_and_input_errors_exit_1() {
        let degenerate = CliError::from(spectral::Error::ShiftInvarianceDegenerate("rank 1".into()));
        assert_eq!(degenerate.exit_code(), ExitCode::from(2));
        let invalid = CliError::from(spectral::Error::InvalidSupport("empty".into()));
        assert_eq!(invalid.exit_code(), ExitCode::from(1));
        assert_eq!(CliError::Usage("x".into()).exit_code(), ExitCode::from(1));
    }
}
