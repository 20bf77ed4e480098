//! Dense decompositions with the ordering and cutoff conventions the
//! estimators rely on.

use nalgebra::{Complex, ComplexField, DMatrix, Schur, SymmetricEigen};

use crate::error::{Error, Result};
use crate::scalar::{CMatrix, Real};

/// Eigen-decomposition of a Hermitian matrix, eigenvalues sorted descending.
pub struct HermitianEigen<T: Real> {
    pub eigenvalues: Vec<T>,
    pub eigenvectors: CMatrix<T>,
}

pub fn hermitian_eigen_desc<T: Real>(a: &CMatrix<T>) -> HermitianEigen<T> {
    let n = a.nrows();
    let eig = SymmetricEigen::new(a.clone());
    let mut order: Vec<usize> = (0..n).collect();
    // Stable sort keeps solver order for exact ties.
    order.sort_by(|&i, &j| {
        eig.eigenvalues[j]
            .partial_cmp(&eig.eigenvalues[i])
            .unwrap_or(std::cmp::Ordering::Equal)
    });
    let eigenvalues = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let eigenvectors = CMatrix::from_fn(n, n, |r, c| eig.eigenvectors[(r, order[c])]);
    HermitianEigen {
        eigenvalues,
        eigenvectors,
    }
}

/// Eigenvalues of a real symmetric matrix, ascending, with eigenvectors.
pub(crate) fn real_symmetric_eigen<T: Real>(a: &DMatrix<T>) -> (Vec<T>, DMatrix<T>) {
    let n = a.nrows();
    let eig = SymmetricEigen::new(a.clone());
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| {
        eig.eigenvalues[i]
            .partial_cmp(&eig.eigenvalues[j])
            .unwrap_or(std::cmp::Ordering::Equal)
    });
    let values = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let vectors = DMatrix::from_fn(n, n, |r, c| eig.eigenvectors[(r, order[c])]);
    (values, vectors)
}

/// Thin SVD `a = U diag(sigma) V^*` with `k = min(m, n)` triplets, sorted by
/// descending singular value.
pub struct ThinSvd<T: Real> {
    pub u: CMatrix<T>,
    pub singular_values: Vec<T>,
    pub v: CMatrix<T>,
}

const JACOBI_MAX_SWEEPS: usize = 80;

/// One-sided (Hestenes) Jacobi SVD.
///
/// nalgebra's complex bidiagonal SVD can return factors that do not
/// reconstruct the input when singular values repeat, which is the normal
/// case for steering matrices on symmetric geometries. Column-pair rotations
/// are accurate regardless of multiplicity and cheap at the sizes used here.
pub fn thin_svd<T: Real>(a: &CMatrix<T>) -> ThinSvd<T> {
    let (m, n) = a.shape();
    if m < n {
        let t = thin_svd(&a.adjoint());
        return ThinSvd { u: t.v, singular_values: t.singular_values, v: t.u };
    }
    let mut g = a.clone();
    let mut v = CMatrix::<T>::identity(n, n);
    let eps = T::default_epsilon();
    for _ in 0..JACOBI_MAX_SWEEPS {
        let mut rotated = false;
        for p in 0..n {
            for q in p + 1..n {
                let alpha = g.column(p).norm_squared();
                let beta = g.column(q).norm_squared();
                let gamma = g.column(p).dotc(&g.column(q));
                let gabs = gamma.modulus();
                if !(gabs > eps * (alpha * beta).sqrt()) {
                    continue;
                }
                rotated = true;
                let zeta = (beta - alpha) / (T::lit(2.0) * gabs);
                let sign = if zeta >= T::zero() { T::one() } else { -T::one() };
                let t = sign / (zeta.abs() + (T::one() + zeta * zeta).sqrt());
                let c = T::one() / (T::one() + t * t).sqrt();
                let s = c * t;
                let phase = (gamma / Complex::new(gabs, T::zero())).conj();
                rotate_columns(&mut g, p, q, c, s, phase);
                rotate_columns(&mut v, p, q, c, s, phase);
            }
        }
        if !rotated {
            break;
        }
    }
    let norms: Vec<T> = (0..n).map(|j| g.column(j).norm()).collect();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| norms[j].partial_cmp(&norms[i]).unwrap_or(std::cmp::Ordering::Equal));
    let u = CMatrix::from_fn(m, n, |r, c| {
        let j = order[c];
        if norms[j] > T::zero() {
            g[(r, j)] / Complex::new(norms[j], T::zero())
        } else {
            Complex::new(T::zero(), T::zero())
        }
    });
    let v = CMatrix::from_fn(n, n, |r, c| v[(r, order[c])]);
    ThinSvd { u, singular_values: order.iter().map(|&j| norms[j]).collect(), v }
}

/// `x_p <- c x_p - s w x_q`, `x_q <- s x_p + c w x_q` with `|w| = 1`.
fn rotate_columns<T: Real>(x: &mut CMatrix<T>, p: usize, q: usize, c: T, s: T, w: Complex<T>) {
    let (c, s) = (Complex::new(c, T::zero()), Complex::new(s, T::zero()));
    for r in 0..x.nrows() {
        let xp = x[(r, p)];
        let xq = x[(r, q)] * w;
        x[(r, p)] = c * xp - s * xq;
        x[(r, q)] = s * xp + c * xq;
    }
}

/// Singular values in descending order.
pub fn singular_values<T: Real>(a: &CMatrix<T>) -> Vec<T> {
    thin_svd(a).singular_values
}

/// Left singular vectors of `a` (first `min(m, n)` of them, descending order)
/// together with the matching singular values.
pub fn left_singular_basis<T: Real>(a: &CMatrix<T>) -> (CMatrix<T>, Vec<T>) {
    let svd = thin_svd(a);
    (svd.u, svd.singular_values)
}

/// Least-squares solution of `a x = b` through the pseudo-inverse, treating
/// singular values below `rel_cutoff * sigma_1` as zero.
///
/// Returns the solution and the numerical rank of `a`.
pub fn least_squares<T: Real>(
    a: &CMatrix<T>,
    b: &CMatrix<T>,
    rel_cutoff: T,
) -> Result<(CMatrix<T>, usize)> {
    if a.nrows() != b.nrows() {
        return Err(Error::DimensionMismatch(format!(
            "least squares with {} and {} rows",
            a.nrows(),
            b.nrows()
        )));
    }
    let svd = thin_svd(a);
    let sigma_max = svd.singular_values.first().copied().unwrap_or_else(T::zero);
    let cutoff = rel_cutoff * sigma_max;
    let rank = svd.singular_values.iter().filter(|&&s| s > cutoff).count();
    // x = V diag(1/s) U^* b over the retained singular triplets.
    let mut utb = svd.u.adjoint() * b;
    for (i, s) in svd.singular_values.iter().enumerate() {
        let scale = if *s > cutoff { T::one() / *s } else { T::zero() };
        utb.row_mut(i).scale_mut(scale);
    }
    Ok((svd.v * utb, rank))
}

/// Eigenvalues of a general complex square matrix (no ordering).
pub fn complex_eigenvalues<T: Real>(a: &CMatrix<T>) -> Result<Vec<Complex<T>>> {
    let n = a.nrows();
    if n != a.ncols() {
        return Err(Error::DimensionMismatch("eigenvalues of a non-square matrix".into()));
    }
    if n == 1 {
        return Ok(vec![a[(0, 0)]]);
    }
    let schur = Schur::try_new(a.clone(), T::default_epsilon(), 10_000).ok_or_else(|| {
        Error::ShiftInvarianceDegenerate("Schur iteration did not converge".into())
    })?;
    // The double-shift iteration can leave 2x2 blocks on the diagonal even in
    // complex arithmetic; their eigenvalues come from the block's quadratic.
    let (_, t) = schur.unpack();
    let negligible = |i: usize| {
        let scale = t[(i, i)].modulus() + t[(i + 1, i + 1)].modulus();
        t[(i + 1, i)].modulus() <= T::default_epsilon() * scale.max(T::lit(f64::MIN_POSITIVE))
    };
    let mut out = Vec::with_capacity(n);
    let mut i = 0;
    while i < n {
        if i + 1 < n && !negligible(i) {
            let (a, b, c, d) = (t[(i, i)], t[(i, i + 1)], t[(i + 1, i)], t[(i + 1, i + 1)]);
            let half = Complex::new(T::lit(0.5), T::zero());
            let mean = (a + d) * half;
            let diff = (a - d) * half;
            let root = ComplexField::sqrt(diff * diff + b * c);
            out.push(mean + root);
            out.push(mean - root);
            i += 2;
        } else {
            out.push(t[(i, i)]);
            i += 1;
        }
    }
    Ok(out)
}

/// Spectral norm of a complex matrix.
pub fn spectral_norm<T: Real>(a: &CMatrix<T>) -> T {
    if a.nrows() == 0 || a.ncols() == 0 {
        return T::zero();
    }
    singular_values(a)[0]
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn c(re: f64, im: f64) -> Complex<f64> {
        Complex::new(re, im)
    }

    #[test]
    fn eigenvalues_come_out_descending() {
        let a = CMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![
            c(1.0, 0.0),
            c(3.0, 0.0),
            c(2.0, 0.0),
        ]));
        let eig = hermitian_eigen_desc(&a);
        assert_eq!(eig.eigenvalues, vec![3.0, 2.0, 1.0]);
        assert_relative_eq!(eig.eigenvectors[(1, 0)].norm(), 1.0, epsilon = 1e-14);
    }

    #[test]
    fn least_squares_reports_rank() {
        let a = CMatrix::from_row_slice(3, 2, &[c(1., 0.), c(2., 0.), c(2., 0.), c(4., 0.), c(3., 0.), c(6., 0.)]);
        let b = CMatrix::from_element(3, 1, c(1.0, 0.0));
        let (_, rank) = least_squares(&a, &b, 1e-12).unwrap();
        assert_eq!(rank, 1);
    }

    #[test]
    fn complex_eigenvalues_of_similarity_transform() {
        let d = [c(0.0, 1.0), c(-1.0, 0.0), c(0.6, -0.8)];
        let q = CMatrix::from_row_slice(
            3,
            3,
            &[c(1., 0.), c(0.5, 0.2), c(0., 1.), c(0.3, 0.), c(1., 0.), c(0.2, -0.1), c(0., 0.), c(0.4, 0.4), c(1., 0.)],
        );
        let q_inv = q.clone().try_inverse().unwrap();
        let a = &q * CMatrix::from_diagonal(&nalgebra::DVector::from_row_slice(&d)) * q_inv;
        let ev = complex_eigenvalues(&a).unwrap();
        for want in d {
            let best = ev.iter().map(|z| (z - want).norm()).fold(f64::MAX, f64::min);
            assert!(best < 1e-12, "{want} missing from {ev:?}");
        }
    }

    #[test]
    fn svd_reconstructs_with_repeated_singular_values() {
        // Rows 0..M-1 of an orthonormal steering basis: two singular values equal 1.
        let m = 24;
        let cols: Vec<Complex<f64>> = (0..3)
            .flat_map(|j| {
                let w = [0.0878, 0.5087, 0.6946][j];
                (0..m).map(move |k| Complex::from_polar(1.0, -2.0 * std::f64::consts::PI * k as f64 * w))
            })
            .collect();
        let phi = CMatrix::from_column_slice(m, 3, &cols);
        let q = phi.qr().q();
        let rot = CMatrix::from_row_slice(3, 3, &[c(0.6, 0.0), c(0.0, 0.8), c(0.0, 0.0), c(0.0, 0.8), c(0.6, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(0.0, -1.0)]);
        let a = (q * rot).rows(0, m - 1).into_owned();
        let svd = thin_svd(&a);
        let sigma = CMatrix::from_diagonal(&nalgebra::DVector::from_iterator(3, svd.singular_values.iter().map(|&x| c(x, 0.0))));
        assert!((&svd.u * sigma * svd.v.adjoint() - &a).norm() < 1e-13);
        assert!((svd.u.adjoint() * &svd.u - CMatrix::identity(3, 3)).norm() < 1e-13);
        assert!(svd.singular_values.windows(2).all(|w| w[0] >= w[1]));
    }

    #[test]
    fn svd_of_wide_matrix_uses_the_adjoint() {
        let a = CMatrix::from_row_slice(1, 2, &[c(3.0, 0.0), c(0.0, 4.0)]);
        let svd = thin_svd(&a);
        assert_relative_eq!(svd.singular_values[0], 5.0, epsilon = 1e-14);
        assert_eq!((svd.u.nrows(), svd.u.ncols(), svd.v.nrows()), (1, 1, 2));
    }
}
