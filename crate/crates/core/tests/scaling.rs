//! Scaling laws checked through log-log fits computed here from raw values.

use nalgebra::Complex;
use spectral::bounds::{crb, sigma_s};
use spectral::signal_model::{steering_matrix, synthesize_snapshots, AmplitudeSource, NoiseModel};
use spectral::subspace::{empirical_covariance, signal_space, sin_theta_distance};
use spectral::{CMatrix, ClumpsSpec64, SubspaceBasis64, SupportSet64};

fn slope(xs: &[f64], ys: &[f64]) -> f64 {
    let lx: Vec<f64> = xs.iter().map(|x| x.log10()).collect();
    let ly: Vec<f64> = ys.iter().map(|y| y.log10()).collect();
    let n = lx.len() as f64;
    let (mx, my) = (lx.iter().sum::<f64>() / n, ly.iter().sum::<f64>() / n);
    let sxy: f64 = lx.iter().zip(&ly).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = lx.iter().map(|x| (x - mx).powi(2)).sum();
    sxy / sxx
}

fn clumps(lambda: usize, srf: f64) -> ClumpsSpec64 {
    ClumpsSpec64::equispaced(2, lambda, 1.0 / srf, 20.0, 100, 0.1)
}

/// SRF values that give an admissible clump of size `lambda`.
fn srfs(lambda: usize) -> Vec<f64> {
    (2..=10).map(f64::from).filter(|&srf| (lambda as f64 - 1.0) < srf).collect()
}

#[test]
fn smallest_singular_value_decays_with_clump_cardinality() {
    for lambda in 1..=3usize {
        let grid = srfs(lambda);
        let sig: Vec<f64> = grid
            .iter()
            .map(|&srf| sigma_s(&steering_matrix(&clumps(lambda, srf).generate().unwrap(), 100).unwrap()))
            .collect();
        let k = slope(&grid, &sig);
        let want = -(lambda as f64 - 1.0);
        assert!((k - want).abs() <= 0.3, "lambda={lambda}: slope {k}, want {want}");
    }
}

#[test]
fn crb_exponent_follows_clump_cardinality() {
    for lambda in 2..=3usize {
        let x = CMatrix::identity(2 * lambda, 2 * lambda);
        let grid = srfs(lambda);
        let tr: Vec<f64> = grid
            .iter()
            .map(|&srf| crb(&clumps(lambda, srf).generate().unwrap(), &x, 0.1, 100, 100).unwrap().trace_bound)
            .collect();
        let k = slope(&grid, &tr);
        let want = 2.0 * lambda as f64 - 2.0;
        assert!((k - want).abs() <= 0.3, "lambda={lambda}: slope {k}, want {want}");
    }
}

#[test]
fn crb_rescaling_identities() {
    let support = SupportSet64::new([0.1, 0.13, 0.5]).unwrap();
    let x = CMatrix::from_fn(3, 3, |i, j| if i == j { Complex::new(2.0, 0.0) } else { Complex::new(0.3, 0.1 * (i as f64 - j as f64)) });
    let base = crb(&support, &x, 0.2, 40, 32).unwrap().trace_bound;
    let nu2 = crb(&support, &x, 0.4, 40, 32).unwrap().trace_bound;
    let l2 = crb(&support, &x, 0.2, 80, 32).unwrap().trace_bound;
    assert!((nu2 / base - 4.0).abs() <= 1e-12 * 4.0);
    assert!((base / l2 - 2.0).abs() <= 1e-12 * 2.0);
}

#[test]
fn single_source_crb_closed_form() {
    for &(nu, l, xbar, w) in &[(0.1, 50usize, 2.0, 0.3), (1.0, 1, 0.5, 0.0), (0.03, 1000, 7.0, 0.77)] {
        let x = CMatrix::from_element(1, 1, Complex::new(xbar, 0.0));
        let got = crb(&SupportSet64::new([w]).unwrap(), &x, nu, l, 2).unwrap().trace_bound;
        let want = nu * nu / (4.0 * std::f64::consts::PI.powi(2) * l as f64 * xbar);
        assert!((got - want).abs() <= 1e-9 * want, "{got} vs {want}");
    }
}

#[test]
fn empirical_signal_space_converges_at_root_l_rate() {
    let support = SupportSet64::new([0.1, 0.4, 0.45]).unwrap();
    let m = 16;
    let truth = SubspaceBasis64::signal_space_of(&steering_matrix(&support, m).unwrap()).unwrap();
    let ls = [100usize, 400, 1600, 6400];
    let trials = 20;
    let errs: Vec<f64> = ls
        .iter()
        .map(|&l| {
            (0..trials)
                .map(|t| {
                    let b = synthesize_snapshots(&support, m, l, &AmplitudeSource::ComplexGaussian, NoiseModel::gaussian(0.3).unwrap(), spectral::TrialSeed::new(7, t as u64)).unwrap();
                    let u = signal_space(&empirical_covariance(&b), 3).unwrap();
                    sin_theta_distance(&truth, &u).unwrap()
                })
                .sum::<f64>()
                / trials as f64
        })
        .collect();
    let k = slope(&ls.map(|l| l as f64), &errs);
    assert!((k + 0.5).abs() <= 0.1, "slope {k}");
}
