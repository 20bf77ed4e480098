//! Behaviour of the experiment engine on small configurations.

use nalgebra::Complex;
use spectral::subspace::{signal_space, sin_theta_distance};
use spectral::{CMatrix, SteeringMatrix64, SubspaceBasis64, SupportSet64, TrialSeed};
use spectral_harness::output::{write_crossings_csv, write_phase_csv, write_sweep_csv};
use spectral_harness::sampling::sample_covariance;
use spectral_harness::trial::MD_CENSOR;
use spectral_harness::{
    phase_grid, presets, sweep, Axis, CovarianceRoute, Estimator, Experiment, ExperimentConfig, Geometry, Metric, Parameter,
};

fn small(nu: f64) -> ExperimentConfig {
    let support = SupportSet64::new([0.1, 0.3, 0.32]).unwrap();
    let mut cfg = ExperimentConfig::new(Geometry::Support(support), 40, nu);
    cfg.sensors = Some(16);
    cfg.root_seed = 77;
    cfg.with_trials(12)
}

fn small_sweep() -> ExperimentConfig {
    let mut cfg = small(0.1);
    cfg.sweep = Some(spectral_harness::config::SweepSpec {
        axis: Axis::logspace(Parameter::Nu, -2.0, -1.0, 3),
        abscissa: spectral_harness::Abscissa::Value,
    });
    cfg
}

#[test]
fn sweeps_are_identical_for_any_thread_count() {
    let cfg = small_sweep();
    let run = |threads: usize| {
        rayon::ThreadPoolBuilder::new().num_threads(threads).build().unwrap().install(|| sweep(&cfg).unwrap())
    };
    let one = run(1);
    assert_eq!(one, run(3));
    assert_eq!(one, sweep(&cfg).unwrap());
}

#[test]
fn a_different_root_seed_changes_the_draws() {
    let a = Experiment::new(&small(0.1)).unwrap().run_trial(0);
    let b = Experiment::new(&small(0.1).with_seed(78)).unwrap().run_trial(0);
    assert_ne!(a.md, b.md);
}

#[test]
fn sweep_rows_carry_every_trial() {
    let results = sweep(&small_sweep()).unwrap();
    let metrics: Vec<Metric> = results.iter().map(|r| r.metric).collect();
    assert_eq!(metrics, vec![Metric::NscSup, Metric::Md, Metric::MusicMd]);
    for r in &results {
        assert_eq!(r.rows.len(), 3);
        assert!(r.fit.is_some());
        for row in &r.rows {
            assert_eq!(row.n, 12);
            assert!(row.mean >= 0.0 && row.std >= 0.0);
        }
    }
}

#[test]
fn noiseless_trials_are_exact() {
    let exp = Experiment::new(&small(0.0)).unwrap();
    for i in 0..3 {
        let o = exp.run_trial(i);
        assert!(o.nsc_sup.unwrap() <= 1e-9, "{o:?}");
        assert!(o.md.unwrap() <= 1e-9, "{o:?}");
        assert!(o.music_md.unwrap() <= 1e-5, "{o:?}");
    }
}

#[test]
fn errors_never_exceed_the_censoring_cap() {
    // Noise far above the signal: estimates are essentially random.
    let exp = Experiment::new(&small(30.0).with_trials(20)).unwrap();
    for i in 0..20 {
        let o = exp.run_trial(i);
        assert!(o.md.unwrap() <= MD_CENSOR && o.music_md.unwrap() <= MD_CENSOR);
        assert!((0.0..=1.0).contains(&o.nsc_sup.unwrap()));
    }
}

/// The Wishart shortcut and explicit snapshots must describe the same law:
/// compare the mean covariance with `Phi Phi^* + nu^2 I` and the mean
/// subspace error between the two routes.
#[test]
fn wishart_route_matches_explicit_snapshots() {
    let support = SupportSet64::new([0.1, 0.3, 0.32]).unwrap();
    let (m, l, nu, trials) = (12usize, 30usize, 0.4, 400u64);
    let phi = SteeringMatrix64::new(&support, m).unwrap();
    let truth = SubspaceBasis64::signal_space_of(&phi).unwrap();
    let population = phi.matrix() * phi.matrix().adjoint() + CMatrix::identity(m, m) * Complex::new(nu * nu, 0.0);
    let scale = population.norm();
    let mut summary = Vec::new();
    for route in [CovarianceRoute::Wishart, CovarianceRoute::Snapshots] {
        let mut mean = CMatrix::zeros(m, m);
        let mut dist = Vec::new();
        for t in 0..trials {
            let cov = sample_covariance(&phi, &support, nu, l, route, TrialSeed::new(5, t)).unwrap();
            mean += cov.matrix();
            dist.push(sin_theta_distance(&truth, &signal_space(&cov, 3).unwrap()).unwrap());
        }
        mean /= Complex::new(trials as f64, 0.0);
        let rel = (&mean - &population).norm() / scale;
        // Entrywise standard error is about sqrt(1 / (L trials)) relative.
        assert!(rel < 0.03, "{route:?}: mean covariance off by {rel}");
        let d = dist.iter().sum::<f64>() / trials as f64;
        let sd = (dist.iter().map(|x| (x - d).powi(2)).sum::<f64>() / (trials - 1) as f64).sqrt();
        summary.push((d, sd / (trials as f64).sqrt()));
    }
    let (a, b) = (summary[0], summary[1]);
    let se = (a.1 * a.1 + b.1 * b.1).sqrt();
    assert!((a.0 - b.0).abs() < 4.0 * se, "mean distances {} vs {} (se {se})", a.0, b.0);
}

#[test]
fn wishart_route_handles_fewer_snapshots_than_dimension() {
    let support = SupportSet64::new([0.1, 0.5]).unwrap();
    let phi = SteeringMatrix64::new(&support, 8).unwrap();
    let cov = sample_covariance(&phi, &support, 0.1, 3, CovarianceRoute::Wishart, TrialSeed::new(1, 0)).unwrap();
    let eig = cov.matrix().clone().symmetric_eigen().eigenvalues;
    assert_eq!(eig.iter().filter(|&&v| v > 1e-10).count(), 3);
}

#[test]
fn default_operating_point_has_finite_statistics() {
    let cfg = presets::snapshot_sweep(2).with_trials(4);
    for r in sweep(&cfg).unwrap() {
        for row in &r.rows {
            assert!(row.mean.is_finite() && row.std.is_finite() && row.mean > 0.0);
            assert_eq!(row.censored, 0);
        }
    }
}

#[test]
fn phase_grid_and_csv_outputs() {
    let mut cfg = small(0.1).with_trials(3);
    cfg.estimator = Estimator::Esprit;
    let x = Axis::logspace(Parameter::Snapshots, 1.0, 2.5, 4);
    let y = Axis::logspace(Parameter::Nu, -2.0, 1.0, 4);
    let g = phase_grid(&cfg, &x, &y, -1.0).unwrap();
    assert_eq!(g.cells.len(), 16);
    assert!(g.cells.iter().all(|c| c.is_finite() && *c <= (0.5 / 0.02f64).log2() + 1e-9));
    assert_eq!(g.crossings.len(), 4);

    let mut buf = Vec::new();
    write_phase_csv(&g, &mut buf).unwrap();
    let text = String::from_utf8(buf).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next().unwrap(), "L,nu,cell");
    assert_eq!(lines.count(), 16);

    let mut buf = Vec::new();
    write_crossings_csv(&g, &mut buf).unwrap();
    assert_eq!(String::from_utf8(buf).unwrap().lines().count(), 5);

    let mut buf = Vec::new();
    write_sweep_csv(&sweep(&small_sweep().with_trials(2)).unwrap(), &mut buf).unwrap();
    let text = String::from_utf8(buf).unwrap();
    assert!(text.starts_with("metric,value,abscissa,sigma_s,srf,mean,std,n,censored"));
    assert_eq!(text.lines().count(), 1 + 3 * 3);
}

#[test]
fn config_round_trips_through_json() {
    let cfg = presets::phase_nu_srf(3);
    let back = ExperimentConfig::from_json(&cfg.to_json().unwrap()).unwrap();
    assert_eq!(cfg, back);
}
