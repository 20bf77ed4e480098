//! Empirical covariance, signal-space extraction and the sin-theta distance
//! between equal-dimension subspaces.

use nalgebra::Complex;

use crate::error::{Error, Result};
use crate::linalg;
use crate::scalar::{CMatrix, CVector, Real};
use crate::signal_model::{SnapshotBatch, SteeringMatrix};

/// Hermitian positive semi-definite covariance `Y_L Y_L^*`.
#[derive(Debug, Clone, PartialEq)]
pub struct CovarianceMatrix<T: Real> {
    matrix: CMatrix<T>,
    snapshots: usize,
}

impl<T: Real> CovarianceMatrix<T> {
    /// Wraps a Hermitian matrix (the upper triangle is mirrored to enforce symmetry).
    pub fn from_hermitian(matrix: CMatrix<T>, snapshots: usize) -> Result<Self> {
        if matrix.nrows() != matrix.ncols() {
            return Err(Error::DimensionMismatch("covariance must be square".into()));
        }
        let mut m = matrix;
        hermitize(&mut m);
        Ok(Self { matrix: m, snapshots })
    }

    pub fn matrix(&self) -> &CMatrix<T> {
        &self.matrix
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn snapshots(&self) -> usize {
        self.snapshots
    }

    /// The noiseless population covariance `Phi X Phi^*`.
    pub fn population(phi: &SteeringMatrix<T>, amplitude_cov: &CMatrix<T>) -> Result<Self> {
        if amplitude_cov.nrows() != phi.sources() || amplitude_cov.ncols() != phi.sources() {
            return Err(Error::DimensionMismatch("amplitude covariance does not match support".into()));
        }
        Self::from_hermitian(phi.matrix() * amplitude_cov * phi.matrix().adjoint(), 0)
    }
}

pub(crate) fn hermitize<T: Real>(m: &mut CMatrix<T>) {
    let n = m.nrows();
    let half = T::lit(0.5);
    for i in 0..n {
        m[(i, i)] = Complex::from(m[(i, i)].re);
        for j in i + 1..n {
            let v = (m[(i, j)] + m[(j, i)].conj()).scale(half);
            m[(i, j)] = v;
            m[(j, i)] = v.conj();
        }
    }
}

/// `Y_hat = Y_L Y_L^* = (1/L) sum_l y(t_l) y(t_l)^*`.
pub fn empirical_covariance<T: Real>(batch: &SnapshotBatch<T>) -> CovarianceMatrix<T> {
    let y = batch.data();
    let mut m = y * y.adjoint();
    hermitize(&mut m);
    CovarianceMatrix { matrix: m, snapshots: batch.snapshots() }
}

/// Orthonormal basis of an `S`-dimensional subspace of `C^M`.
#[derive(Debug, Clone, PartialEq)]
pub struct SubspaceBasis<T: Real> {
    basis: CMatrix<T>,
    eigenvalues: Vec<T>,
    degenerate: bool,
}

impl<T: Real> SubspaceBasis<T> {
    /// Takes columns that are already orthonormal.
    pub fn from_orthonormal(basis: CMatrix<T>, eigenvalues: Vec<T>) -> Result<Self> {
        let s = basis.ncols();
        if s == 0 || s > basis.nrows() {
            return Err(Error::DimensionMismatch(format!(
                "basis of {} columns in C^{}",
                s,
                basis.nrows()
            )));
        }
        let gram = basis.adjoint() * &basis;
        let defect = (gram - CMatrix::identity(s, s)).norm();
        if defect > T::lit(1e-8) {
            return Err(Error::InvalidArgument(format!("columns are not orthonormal (defect {defect})")));
        }
        Ok(Self { basis, eigenvalues, degenerate: false })
    }

    /// Orthonormal basis of the column span of `a` (assumed full column rank);
    /// `eigenvalues` are the eigenvalues of `a a^*` on that span.
    pub fn span_of(a: &CMatrix<T>) -> Result<Self> {
        if a.ncols() == 0 || a.ncols() > a.nrows() {
            return Err(Error::DimensionMismatch(format!("span of {}x{} matrix", a.nrows(), a.ncols())));
        }
        let (u, sv) = linalg::left_singular_basis(a);
        let s = a.ncols();
        let basis = u.columns(0, s).into_owned();
        Ok(Self { basis, eigenvalues: sv.iter().map(|&x| x * x).collect(), degenerate: false })
    }

    /// Basis of the true signal space `R(Phi)`.
    pub fn signal_space_of(phi: &SteeringMatrix<T>) -> Result<Self> {
        Self::span_of(phi.matrix())
    }

    pub fn basis(&self) -> &CMatrix<T> {
        &self.basis
    }

    pub fn eigenvalues(&self) -> &[T] {
        &self.eigenvalues
    }

    /// Set when the `S`-th and `(S+1)`-th eigenvalues tie, so the span is not unique.
    pub fn is_degenerate(&self) -> bool {
        self.degenerate
    }

    pub fn ambient_dim(&self) -> usize {
        self.basis.nrows()
    }

    pub fn dim(&self) -> usize {
        self.basis.ncols()
    }

    /// Right-multiplies by `q`, which must be unitary; the span is unchanged.
    pub fn rotated(&self, q: &CMatrix<T>) -> Result<Self> {
        if q.nrows() != self.dim() || q.ncols() != self.dim() {
            return Err(Error::DimensionMismatch("rotation size".into()));
        }
        Self::from_orthonormal(&self.basis * q, self.eigenvalues.clone())
    }

    /// `U^* v`.
    pub fn coefficients(&self, v: &CVector<T>) -> CVector<T> {
        self.basis.adjoint() * v
    }

    /// Component of `v` orthogonal to the subspace, `(I - P_U) v`.
    pub fn project_out(&self, v: &CVector<T>) -> CVector<T> {
        v - &self.basis * self.coefficients(v)
    }

    /// Orthogonal projector `U U^*` (M x M; used for cross-checks only).
    pub fn projector(&self) -> CMatrix<T> {
        &self.basis * self.basis.adjoint()
    }
}

/// Eigenvectors of the `S` largest eigenvalues of a Hermitian covariance.
///
/// A tie between eigenvalues `S` and `S+1` is logged and recorded on the
/// returned basis; the solver's order decides which vector is kept.
pub fn signal_space<T: Real>(cov: &CovarianceMatrix<T>, s: usize) -> Result<SubspaceBasis<T>> {
    let m = cov.dim();
    if s == 0 || s > m {
        return Err(Error::InvalidArgument(format!("signal dimension {s} outside 1..={m}")));
    }
    let eig = linalg::hermitian_eigen_desc(cov.matrix());
    let degenerate = s < m && {
        let scale = eig.eigenvalues[0].abs().max(T::one());
        (eig.eigenvalues[s - 1] - eig.eigenvalues[s]).abs() <= T::lit(1e-12) * scale
    };
    if degenerate {
        log::warn!(
            "eigenvalues {} and {} coincide ({}); signal space is ambiguous",
            s,
            s + 1,
            eig.eigenvalues[s]
        );
    }
    Ok(SubspaceBasis {
        basis: eig.eigenvectors.columns(0, s).into_owned(),
        eigenvalues: eig.eigenvalues[..s].to_vec(),
        degenerate,
    })
}

/// Largest sine of the canonical angles, `||P_A - P_B||_2`.
///
/// Evaluated as `||(I - P_B) A||_2`, whose singular values are the sines
/// themselves, so small angles keep full relative accuracy.
pub fn sin_theta_distance<T: Real>(a: &SubspaceBasis<T>, b: &SubspaceBasis<T>) -> Result<T> {
    check_same_shape(a, b)?;
    let residual = a.basis() - b.basis() * (b.basis().adjoint() * a.basis());
    Ok(linalg::spectral_norm(&residual).min(T::one()))
}

/// The cosine route `sqrt(1 - sigma_S(A^* B)^2)`; accurate only away from zero angle.
pub fn sin_theta_from_cosines<T: Real>(a: &SubspaceBasis<T>, b: &SubspaceBasis<T>) -> Result<T> {
    check_same_shape(a, b)?;
    let cross = a.basis().adjoint() * b.basis();
    let sigma_min = *linalg::singular_values(&cross).last().expect("non-empty");
    Ok((T::one() - sigma_min.min(T::one()).powi(2)).max(T::zero()).sqrt())
}

/// The projector route `||P_A - P_B||_2` (forms M x M matrices).
pub fn sin_theta_from_projectors<T: Real>(a: &SubspaceBasis<T>, b: &SubspaceBasis<T>) -> Result<T> {
    check_same_shape(a, b)?;
    Ok(linalg::spectral_norm(&(a.projector() - b.projector())))
}

fn check_same_shape<T: Real>(a: &SubspaceBasis<T>, b: &SubspaceBasis<T>) -> Result<()> {
    if a.ambient_dim() != b.ambient_dim() || a.dim() != b.dim() {
        return Err(Error::DimensionMismatch(format!(
            "subspaces of dimension {} in C^{} and {} in C^{}",
            a.dim(),
            a.ambient_dim(),
            b.dim(),
            b.ambient_dim()
        )));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::signal_model::{steering_matrix, synthesize_snapshots, AmplitudeSource, NoiseModel, SupportSet};
    use nalgebra::DVector;

    fn c(x: f64) -> Complex<f64> {
        Complex::new(x, 0.0)
    }

    fn column(v: &[f64]) -> SubspaceBasis<f64> {
        SubspaceBasis::from_orthonormal(CMatrix::from_iterator(v.len(), 1, v.iter().map(|&x| c(x))), vec![1.0]).unwrap()
    }

    #[test]
    fn single_snapshot_covariance() {
        let b = SnapshotBatch::from_raw(&CMatrix::from_column_slice(2, 1, &[c(1.0), c(0.0)])).unwrap();
        let cov = empirical_covariance(&b);
        assert_eq!(cov.matrix(), &CMatrix::from_row_slice(2, 2, &[c(1.0), c(0.0), c(0.0), c(0.0)]));
    }

    #[test]
    fn noiseless_covariance_is_population() {
        let s = SupportSet::new([0.1, 0.35]).unwrap();
        let b = synthesize_snapshots(&s, 5, 4, &AmplitudeSource::ComplexGaussian, NoiseModel::noiseless(), 2).unwrap();
        let phi = steering_matrix(&s, 5).unwrap();
        let pop = CovarianceMatrix::population(&phi, b.ground_truth().unwrap().amplitudes.covariance()).unwrap();
        let cov = empirical_covariance(&b);
        assert!((cov.matrix() - pop.matrix()).norm() < 1e-12);
    }

    #[test]
    fn diagonal_signal_space() {
        let d = CMatrix::from_diagonal(&DVector::from_vec(vec![c(3.0), c(2.0), c(1.0)]));
        let u = signal_space(&CovarianceMatrix::from_hermitian(d, 1).unwrap(), 2).unwrap();
        assert_eq!(u.eigenvalues(), &[3.0, 2.0]);
        let e12 = SubspaceBasis::from_orthonormal(CMatrix::identity(3, 2), vec![]).unwrap();
        assert!(sin_theta_distance(&u, &e12).unwrap() < 1e-14);
        assert!(!u.is_degenerate());
    }

    #[test]
    fn tied_eigenvalues_are_flagged() {
        let d = CMatrix::from_diagonal(&DVector::from_vec(vec![c(3.0), c(1.0), c(1.0)]));
        let u = signal_space(&CovarianceMatrix::from_hermitian(d, 1).unwrap(), 2).unwrap();
        assert!(u.is_degenerate());
    }

    #[test]
    fn full_dimension_signal_space_for_orthogonal_pair() {
        let s = SupportSet::new([0.0, 0.5]).unwrap();
        let b = synthesize_snapshots(&s, 2, 3, &AmplitudeSource::ComplexGaussian, NoiseModel::noiseless(), 9).unwrap();
        let u = signal_space(&empirical_covariance(&b), 2).unwrap();
        let truth = SubspaceBasis::signal_space_of(&steering_matrix(&s, 2).unwrap()).unwrap();
        assert!(sin_theta_distance(&u, &truth).unwrap() < 1e-12);
    }

    #[test]
    fn noiseless_signal_space_matches_range_of_phi() {
        let s = SupportSet::new([0.11, 0.52, 0.83]).unwrap();
        let b = synthesize_snapshots(&s, 16, 5, &AmplitudeSource::ComplexGaussian, NoiseModel::noiseless(), 4).unwrap();
        let u = signal_space(&empirical_covariance(&b), 3).unwrap();
        let truth = SubspaceBasis::signal_space_of(&steering_matrix(&s, 16).unwrap()).unwrap();
        assert!(sin_theta_distance(&u, &truth).unwrap() < 1e-10);
    }

    #[test]
    fn simple_angles() {
        let e1 = column(&[1.0, 0.0]);
        let e2 = column(&[0.0, 1.0]);
        assert_eq!(sin_theta_distance(&e1, &e1).unwrap(), 0.0);
        assert!((sin_theta_distance(&e1, &e2).unwrap() - 1.0).abs() < 1e-15);
        let t = std::f64::consts::PI / 6.0;
        let rot = column(&[t.cos(), t.sin()]);
        assert!((sin_theta_distance(&e1, &rot).unwrap() - 0.5).abs() < 1e-15);
        let e3 = column(&[1.0, 0.0, 0.0]);
        assert!(matches!(sin_theta_distance(&e1, &e3), Err(Error::DimensionMismatch(_))));
    }

    #[test]
    fn small_angles_keep_relative_accuracy() {
        let t = 1e-12f64;
        let a = column(&[1.0, 0.0]);
        let b = column(&[t.cos(), t.sin()]);
        let d = sin_theta_distance(&a, &b).unwrap();
        assert!((d - t.sin()).abs() < 1e-20, "{d}");
    }

    #[test]
    fn rejects_non_orthonormal_columns() {
        let m = CMatrix::from_column_slice(2, 1, &[c(1.0), c(1.0)]);
        assert!(SubspaceBasis::from_orthonormal(m, vec![]).is_err());
    }
}
