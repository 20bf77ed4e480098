//! ESPRIT: frequencies from the shift invariance of the signal space, and the
//! matching distance between supports.

use nalgebra::Complex;

use crate::error::{Error, Result};
use crate::linalg;
use crate::scalar::{torus_distance, wrap_unit, CMatrix, Real};
use crate::signal_model::{SnapshotBatch, SupportSet};
use crate::subspace::{empirical_covariance, signal_space, SubspaceBasis};

/// Singular values of the top block below this fraction of the largest are
/// treated as zero in the pseudo-inverse.
pub const PINV_RELATIVE_CUTOFF: f64 = 1e-12;

/// Largest size solved by exhaustive permutation search.
pub const BRUTE_FORCE_MAX: usize = 8;

#[derive(Debug, Clone, PartialEq)]
pub struct EspritSolution<T: Real> {
    /// Least-squares solution of `U0 Psi = U1`.
    pub psi_hat: CMatrix<T>,
    pub eigenvalues: Vec<Complex<T>>,
    pub estimated_support: SupportSet<T>,
}

/// Maps an eigenvalue `e^{-2 pi i w}` back to `w` in `[0, 1)` using the
/// principal argument in `(-pi, pi]`.
pub fn frequency_from_eigenvalue<T: Real>(z: Complex<T>) -> T {
    wrap_unit(-z.im.atan2(z.re) / T::two_pi())
}

/// Runs ESPRIT on an orthonormal signal-space basis (`M >= S + 1`).
pub fn esprit_estimate<T: Real>(basis: &SubspaceBasis<T>) -> Result<EspritSolution<T>> {
    let m = basis.ambient_dim();
    let s = basis.dim();
    if m < s + 1 {
        return Err(Error::TooFewSensors { sensors: m, sources: s, required: s + 1 });
    }
    let u = basis.basis();
    let u0 = u.rows(0, m - 1).into_owned();
    let u1 = u.rows(1, m - 1).into_owned();
    let (psi_hat, rank) = linalg::least_squares(&u0, &u1, T::lit(PINV_RELATIVE_CUTOFF))?;
    if rank < s {
        return Err(Error::ShiftInvarianceDegenerate(format!(
            "top block has numerical rank {rank} < {s}"
        )));
    }
    let eigenvalues = linalg::complex_eigenvalues(&psi_hat)?;
    let estimated_support = SupportSet::new(eigenvalues.iter().map(|&z| frequency_from_eigenvalue(z)))
        .map_err(|e| Error::ShiftInvarianceDegenerate(format!("eigenvalues give {e}")))?;
    Ok(EspritSolution { psi_hat, eigenvalues, estimated_support })
}

/// `min over permutations p of max_j |w_hat_{p(j)} - w_j|_T`.
///
/// Exhaustive for up to [`BRUTE_FORCE_MAX`] points, otherwise the cyclic
/// order-preserving matcher.
pub fn matching_distance<T: Real>(truth: &SupportSet<T>, estimate: &SupportSet<T>) -> Result<T> {
    if truth.len() != estimate.len() {
        return Err(Error::CardinalityMismatch { left: truth.len(), right: estimate.len() });
    }
    if truth.len() <= BRUTE_FORCE_MAX {
        Ok(matching_distance_brute_force(truth.points(), estimate.points()))
    } else {
        Ok(matching_distance_cyclic(truth.points(), estimate.points()))
    }
}

/// Exhaustive search over all permutations (Heap's algorithm).
pub fn matching_distance_brute_force<T: Real>(a: &[T], b: &[T]) -> T {
    assert_eq!(a.len(), b.len(), "matching needs equal sizes");
    let n = a.len();
    let cost = |perm: &[usize]| {
        perm.iter()
            .enumerate()
            .fold(T::zero(), |m, (j, &p)| m.max(torus_distance(a[j], b[p])))
    };
    let mut perm: Vec<usize> = (0..n).collect();
    let mut best = cost(&perm);
    let mut c = vec![0usize; n];
    let mut i = 1;
    while i < n {
        if c[i] < i {
            if i % 2 == 0 {
                perm.swap(0, i);
            } else {
                perm.swap(c[i], i);
            }
            best = best.min(cost(&perm));
            c[i] += 1;
            i = 1;
        } else {
            c[i] = 0;
            i += 1;
        }
    }
    best
}

/// Sorts both sets around the circle and minimises over the `n` cyclic
/// shifts of the order-preserving assignment. A bottleneck matching on a
/// circle always has an optimum of this form.
pub fn matching_distance_cyclic<T: Real>(a: &[T], b: &[T]) -> T {
    assert_eq!(a.len(), b.len(), "matching needs equal sizes");
    // Order by wrapped position but measure on the inputs as given, so every
    // pairwise distance is bit-identical to the exhaustive search.
    let order = |v: &[T]| {
        let mut idx: Vec<usize> = (0..v.len()).collect();
        idx.sort_by(|&i, &j| wrap_unit(v[i]).partial_cmp(&wrap_unit(v[j])).expect("finite"));
        idx
    };
    let (ia, ib) = (order(a), order(b));
    let n = a.len();
    if n == 0 {
        return T::zero();
    }
    (0..n)
        .map(|shift| {
            (0..n).fold(T::zero(), |m, j| m.max(torus_distance(a[ia[j]], b[ib[(j + shift) % n]])))
        })
        .fold(T::one(), |m, c| m.min(c))
}

/// Covariance, signal space, ESPRIT, and (when the batch carries ground
/// truth) the matching distance to the true support.
pub fn esprit_pipeline<T: Real>(batch: &SnapshotBatch<T>, s: usize) -> Result<(EspritSolution<T>, Option<T>)> {
    let cov = empirical_covariance(batch);
    let basis = signal_space(&cov, s)?;
    let sol = esprit_estimate(&basis)?;
    let md = match batch.ground_truth() {
        Some(gt) => Some(matching_distance(&gt.support, &sol.estimated_support)?),
        None => None,
    };
    Ok((sol, md))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::signal_model::{steering_matrix, synthesize_snapshots, AmplitudeSource, NoiseModel};

    fn set(p: &[f64]) -> SupportSet<f64> {
        SupportSet::new(p.iter().copied()).unwrap()
    }

    #[test]
    fn matching_distance_examples() {
        assert_eq!(matching_distance(&set(&[0.1, 0.5]), &set(&[0.1, 0.5])).unwrap(), 0.0);
        let d = matching_distance(&set(&[0.95, 0.05]), &set(&[0.97, 0.03])).unwrap();
        assert!((d - 0.02).abs() < 1e-12);
        let d = matching_distance(&set(&[0.0, 0.4]), &set(&[0.5, 0.9])).unwrap();
        assert!((d - 0.1).abs() < 1e-12);
        assert!(matches!(
            matching_distance(&set(&[0.0]), &set(&[0.1, 0.2])),
            Err(Error::CardinalityMismatch { left: 1, right: 2 })
        ));
    }

    #[test]
    fn scalar_case() {
        let s = set(&[0.25]);
        let u = SubspaceBasis::signal_space_of(&steering_matrix(&s, 3).unwrap()).unwrap();
        let sol = esprit_estimate(&u).unwrap();
        assert!((sol.psi_hat[(0, 0)] - Complex::new(0.0, -1.0)).norm() < 1e-14);
        assert!((sol.estimated_support.points()[0] - 0.25).abs() < 1e-14);
    }

    #[test]
    fn noiseless_two_sources_exact() {
        let s = set(&[0.2, 0.7]);
        let u = SubspaceBasis::signal_space_of(&steering_matrix(&s, 16).unwrap()).unwrap();
        let sol = esprit_estimate(&u).unwrap();
        assert!(matching_distance(&s, &sol.estimated_support).unwrap() <= 1e-10);
        for z in &sol.eigenvalues {
            assert!((z.norm() - 1.0).abs() <= 1e-10);
        }
    }

    #[test]
    fn requires_an_extra_sensor() {
        let s = set(&[0.2, 0.7]);
        let u = SubspaceBasis::signal_space_of(&steering_matrix(&s, 2).unwrap()).unwrap();
        assert!(matches!(esprit_estimate(&u), Err(Error::TooFewSensors { .. })));
    }

    #[test]
    fn noiseless_pipeline() {
        let s = set(&[0.05, 0.31, 0.33, 0.9]);
        let b = synthesize_snapshots(&s, 20, 6, &AmplitudeSource::ComplexGaussian, NoiseModel::noiseless(), 1).unwrap();
        let (_, md) = esprit_pipeline(&b, 4).unwrap();
        assert!(md.unwrap() <= 1e-9);
    }

    #[test]
    fn eigenvalue_to_frequency_convention() {
        let w = frequency_from_eigenvalue(Complex::new(-1.0f64, 0.0));
        assert!((w - 0.5).abs() < 1e-15);
        let w = frequency_from_eigenvalue(Complex::from_polar(1.0f64, -2.0 * std::f64::consts::PI * 0.9));
        assert!((w - 0.9).abs() < 1e-12);
    }
}
