//! Conditioning and optimality diagnostics: `sigma_S(Phi)`, constant-free
//! shapes of the stability bounds, and Cramer-Rao matrices.

use nalgebra::DMatrix;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg;
use crate::scalar::{CMatrix, Real};
use crate::signal_model::{derivative_matrix, ClumpsSpec, SteeringMatrix, SupportSet};
use crate::subspace::SubspaceBasis;

/// Relative smallest Fisher eigenvalue below which the matrix counts as singular.
pub const FISHER_RCOND_MIN: f64 = 1e-14;

/// `S`-th largest singular value of the steering matrix.
pub fn sigma_s<T: Real>(phi: &SteeringMatrix<T>) -> T {
    let sv = phi.singular_values();
    sv[phi.sources() - 1]
}

/// Model quantities the bound shapes depend on.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BoundInputs<T> {
    pub sensors: usize,
    pub sources: usize,
    pub snapshots: usize,
    pub nu: T,
    /// `lambda_S(X)`.
    pub lambda_s: T,
    /// `sigma_S(Phi)`.
    pub sigma_s: T,
    /// Minimum separation.
    pub delta: T,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TheoryBound<T> {
    pub name: &'static str,
    pub value: T,
    /// True when an unknown multiplicative constant was dropped: the value is
    /// a shape, meaningful only up to scale.
    pub constant_free: bool,
    pub inputs: BoundInputs<T>,
}

/// Evaluates every bound shape and the large-SNR regime quantities `xi`, `rho`.
///
/// * `subspace_distance`, `nsc_perturbation`: `M nu^2 / (lambda_S sigma_S^2 L)`
/// * `esprit_moderate_snr`: `16^{S+2} S^3 M^2 nu^2 / (lambda_S sigma_S^4 L)`
/// * `esprit_large_snr`: `M nu^2 / (sigma_S^2 lambda_S L)`
/// * `xi = sigma_S^2 lambda_S L / (M nu^2)`
/// * `rho = 4^{S+2} sigma_S^2 Delta / (sqrt(6) S^2 M)`
pub fn bound_shapes<T: Real>(inputs: BoundInputs<T>) -> Result<Vec<TheoryBound<T>>> {
    let BoundInputs { sensors, sources, snapshots, nu, lambda_s, sigma_s, delta } = inputs;
    if sensors == 0 || sources == 0 || snapshots == 0 {
        return Err(Error::InvalidArgument("M, S and L must be positive".into()));
    }
    for (name, v) in [("nu", nu), ("lambda_S", lambda_s), ("sigma_S", sigma_s), ("Delta", delta)] {
        if !(v > T::zero()) {
            return Err(Error::InvalidArgument(format!("{name} must be positive, got {v}")));
        }
    }
    let m = T::from_usize_lossy(sensors);
    let s = T::from_usize_lossy(sources);
    let l = T::from_usize_lossy(snapshots);
    let noise = nu * nu / l;
    let sig2 = sigma_s * sigma_s;
    let subspace = m * noise / (lambda_s * sig2);
    let moderate = T::lit(16.0).powi(sources as i32 + 2) * s.powi(3) * m * m * noise / (lambda_s * sig2 * sig2);
    let xi = sig2 * lambda_s / (m * noise);
    let rho = T::lit(4.0).powi(sources as i32 + 2) * sig2 * delta / (T::lit(6.0).sqrt() * s * s * m);
    let b = |name, value, constant_free| TheoryBound { name, value, constant_free, inputs };
    Ok(vec![
        b("subspace_distance", subspace, true),
        b("nsc_perturbation", subspace, true),
        b("esprit_moderate_snr", moderate, true),
        b("esprit_large_snr", subspace, true),
        b("xi", xi, false),
        b("rho", rho, false),
    ])
}

/// Whether `nu <= sigma_S(Phi) sqrt(lambda_S(X))` holds.
pub fn noise_level_admissible<T: Real>(nu: T, sigma_s: T, lambda_s: T) -> bool {
    nu <= sigma_s * lambda_s.max(T::zero()).sqrt()
}

#[derive(Debug, Clone, PartialEq)]
pub struct CrbResult<T: Real> {
    /// `(nu^2 / 2L) Re(Psi^* (I - P_Phi) Psi ⊙ X)^{-1}`.
    pub matrix: DMatrix<T>,
    /// `Tr(matrix) / S`, a lower bound on the per-source mean-square error.
    pub trace_bound: T,
    /// Smallest Fisher eigenvalue relative to `max_j |psi_j|^2 ||X||_2`.
    pub rcond: T,
    /// Constant-free clumps scaling, when a clumps geometry was supplied.
    pub scaling_reference: Option<T>,
}

impl<T: Real> CrbResult<T> {
    pub fn with_clumps_reference(mut self, spec: &ClumpsSpec<T>, x: &CMatrix<T>, nu: T, snapshots: usize) -> Result<Self> {
        self.scaling_reference = Some(crb_clumps_scaling(spec, x, nu, snapshots)?);
        Ok(self)
    }
}

/// Cramer-Rao matrix for the support under the Gaussian snapshot model.
///
/// `I - P_Phi` is applied through an orthonormal basis of `R(Phi)` and the
/// Hermitian product is formed from the projected derivative columns, so an
/// ill-conditioned `Phi` never gets inverted. The order of operations is
/// Hadamard product with `X`, then real part, then the inverse.
pub fn crb<T: Real>(
    support: &SupportSet<T>,
    x: &CMatrix<T>,
    nu: T,
    snapshots: usize,
    sensors: usize,
) -> Result<CrbResult<T>> {
    let s = support.len();
    if x.nrows() != s || x.ncols() != s {
        return Err(Error::DimensionMismatch(format!("X is {}x{}, support has {s} points", x.nrows(), x.ncols())));
    }
    if snapshots == 0 || !(nu >= T::zero()) {
        return Err(Error::InvalidArgument("need L >= 1 and nu >= 0".into()));
    }
    if x.clone().cholesky().is_none() {
        return Err(Error::AmplitudeCovarianceNotPd);
    }
    let phi = SteeringMatrix::new(support, sensors)?;
    let q = SubspaceBasis::signal_space_of(&phi)?;
    let psi = derivative_matrix(support, sensors);
    let residual = &psi - q.basis() * (q.basis().adjoint() * &psi);
    let h = residual.adjoint() * &residual;
    let fisher = DMatrix::from_fn(s, s, |i, j| (h[(i, j)] * x[(i, j)]).re);
    let fisher = (&fisher + fisher.transpose()) * T::lit(0.5);
    let (evals, evecs) = linalg::real_symmetric_eigen(&fisher);
    // Measured against the unprojected scale so that a residual made of pure
    // rounding noise is still recognised as singular.
    let psi_scale = psi.column_iter().map(|c| c.norm_squared()).fold(T::zero(), |a, b| a.max(b));
    let x_norm = linalg::hermitian_eigen_desc(x).eigenvalues[0];
    let reference = (psi_scale * x_norm).max(evals[s - 1]);
    let rcond = if reference > T::zero() { evals[0].max(T::zero()) / reference } else { T::zero() };
    if !(rcond >= T::lit(FISHER_RCOND_MIN)) {
        return Err(Error::FisherSingular { rcond: rcond.as_f64() });
    }
    let inv_diag = DMatrix::from_diagonal(&nalgebra::DVector::from_iterator(s, evals.iter().map(|&v| T::one() / v)));
    let inverse = &evecs * inv_diag * evecs.transpose();
    let scale = nu * nu / (T::lit(2.0) * T::from_usize_lossy(snapshots));
    let mut matrix = inverse * scale;
    matrix = (&matrix + matrix.transpose()) * T::lit(0.5);
    let trace_bound = matrix.trace() / T::from_usize_lossy(s);
    Ok(CrbResult { matrix, trace_bound, rcond, scaling_reference: None })
}

/// Constant-free clumps CRB shape `SRF^{2 lambda - 2} nu^2 / (L (M-1)^3 ||X||_2)`
/// with `SRF = 1 / alpha`. Requires every clump to have the same size.
pub fn crb_clumps_scaling<T: Real>(spec: &ClumpsSpec<T>, x: &CMatrix<T>, nu: T, snapshots: usize) -> Result<T> {
    let lambda = spec
        .common_clump_size()
        .ok_or_else(|| Error::InvalidArgument("clumps scaling needs equal clump sizes".into()))?;
    if snapshots == 0 || spec.sensors < 2 {
        return Err(Error::InvalidArgument("need L >= 1 and M >= 2".into()));
    }
    let x_norm = linalg::hermitian_eigen_desc(x).eigenvalues[0];
    if !(x_norm > T::zero()) {
        return Err(Error::AmplitudeCovarianceNotPd);
    }
    let srf = spec.nominal_srf();
    let m1 = T::from_usize_lossy(spec.sensors - 1);
    Ok(srf.powi(2 * lambda as i32 - 2) * nu * nu / (T::from_usize_lossy(snapshots) * m1.powi(3) * x_norm))
}
