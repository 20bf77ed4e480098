//! Empirical covariance draws for Monte-Carlo trials.
//!
//! With `Z = [X_raw; E / nu]` the `(S + M) x L` matrix of i.i.d. `CN(0, 1)`
//! amplitudes and normalized noise, the scaled snapshot matrix is
//! `Y_L = B Z / sqrt(L)` with `B = [Phi, nu I]`, so
//! `Y_hat = B (Z Z^* / L) B^*`. `Z Z^*` is complex Wishart `CW_p(L, I)` and
//! can be drawn through its Bartlett factor at a cost independent of `L`.

use nalgebra::Complex;
use rand::Rng;
use rand_distr::{Distribution, Gamma};
use spectral::rng::{complex_gaussian, StreamTag};
use spectral::signal_model::{synthesize_snapshots, AmplitudeSource, NoiseModel};
use spectral::subspace::{empirical_covariance, CovarianceMatrix};
use spectral::{CMatrix, SteeringMatrix64, SupportSet64, TrialSeed};

use crate::config::CovarianceRoute;
use crate::error::{HarnessError, Result};

/// Lower-triangular `T` with `T T^* ~ CW_p(dof, I)`.
///
/// `|T_ii|^2 ~ Gamma(dof - i, 1)` (0-based `i`) and the strictly lower
/// entries are `CN(0, 1)`, all independent. Requires `dof >= p`.
pub fn bartlett_factor<R: Rng + ?Sized>(rng: &mut R, p: usize, dof: usize) -> CMatrix<f64> {
    assert!(dof >= p, "Bartlett factor needs dof >= dimension");
    let mut t = CMatrix::zeros(p, p);
    for i in 0..p {
        let shape = (dof - i) as f64;
        let g: f64 = Gamma::new(shape, 1.0).expect("positive shape").sample(rng);
        t[(i, i)] = Complex::new(g.sqrt(), 0.0);
        for j in 0..i {
            t[(i, j)] = complex_gaussian(rng, 1.0);
        }
    }
    t
}

/// Draws `Y_hat` for one trial.
pub fn sample_covariance(
    phi: &SteeringMatrix64,
    support: &SupportSet64,
    nu: f64,
    snapshots: usize,
    route: CovarianceRoute,
    seed: TrialSeed,
) -> Result<CovarianceMatrix<f64>> {
    match route {
        CovarianceRoute::Snapshots => {
            let noise = NoiseModel::gaussian(nu)?;
            let batch = synthesize_snapshots(support, phi.sensors(), snapshots, &AmplitudeSource::ComplexGaussian, noise, seed)?;
            Ok(empirical_covariance(&batch))
        }
        CovarianceRoute::Wishart => wishart_covariance(phi, nu, snapshots, seed),
    }
}

fn wishart_covariance(phi: &SteeringMatrix64, nu: f64, snapshots: usize, seed: TrialSeed) -> Result<CovarianceMatrix<f64>> {
    let (m, s) = (phi.sensors(), phi.sources());
    let p = s + m;
    let mut rng = seed.stream(StreamTag::Covariance);
    // `factor` is any F with F F^* distributed as Z Z^*.
    let factor = if snapshots >= p {
        bartlett_factor(&mut rng, p, snapshots)
    } else {
        CMatrix::from_fn(p, snapshots, |_, _| complex_gaussian(&mut rng, 1.0))
    };
    let top = factor.rows(0, s);
    let bottom = factor.rows(s, m);
    let c = phi.matrix() * top + bottom * Complex::new(nu, 0.0);
    let y = (&c * c.adjoint()) / Complex::new(snapshots as f64, 0.0);
    CovarianceMatrix::from_hermitian(y, snapshots).map_err(HarnessError::from)
}
