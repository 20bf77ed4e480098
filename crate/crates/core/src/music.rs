//! Noise-space correlation, its grid profile, and MUSIC peak extraction.
//!
//! `R(w) = ||(I - P_U) phi(w)|| / sqrt(M)` vanishes exactly on the support
//! when `U` spans the true signal space and `M > S`. MUSIC samples `R` on an
//! equispaced circular grid and keeps its `S` deepest local minima
//! (equivalently the largest peaks of the imaging function `1/R`).

use std::io::Write;

use nalgebra::Complex;
use rustfft::FftPlanner;

use crate::error::{Error, Result};
use crate::scalar::{wrap_unit, Real};
use crate::signal_model::{steering_vector, SupportSet};
use crate::subspace::SubspaceBasis;

/// Grid points per sensor the default grid aims for.
pub const GRID_POINTS_PER_SENSOR: usize = 64;
/// Smallest grid the default ever uses.
pub const MIN_DEFAULT_GRID: usize = 4096;

/// Default grid size `max(4096, 64 M)`.
pub fn default_grid_size(sensors: usize) -> usize {
    MIN_DEFAULT_GRID.max(GRID_POINTS_PER_SENSOR * sensors)
}

/// Squared NSC below which the FFT value is replaced by the direct residual.
const DIRECT_REFINE_LEVEL: f64 = 1e-4;

/// `R(omega)`, clamped to `[0, 1]`.
pub fn noise_space_correlation<T: Real>(basis: &SubspaceBasis<T>, omega: T) -> T {
    let m = basis.ambient_dim();
    let phi = steering_vector(omega, m);
    let r = basis.project_out(&phi).norm() / T::from_usize_lossy(m).sqrt();
    r.min(T::one())
}

/// `R` sampled on the grid `k / G`, `k = 0..G-1`.
#[derive(Debug, Clone, PartialEq)]
pub struct NscProfile<T: Real> {
    values: Vec<T>,
    basis_tag: String,
}

impl<T: Real> NscProfile<T> {
    pub fn from_values(values: Vec<T>, basis_tag: impl Into<String>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::InvalidArgument("empty profile".into()));
        }
        if let Some(v) = values.iter().find(|v| !(**v >= T::zero() && **v <= T::one())) {
            return Err(Error::InvalidArgument(format!("profile value {v} outside [0, 1]")));
        }
        Ok(Self { values, basis_tag: basis_tag.into() })
    }

    pub fn grid_size(&self) -> usize {
        self.values.len()
    }

    pub fn values(&self) -> &[T] {
        &self.values
    }

    pub fn basis_tag(&self) -> &str {
        &self.basis_tag
    }

    pub fn omega(&self, k: usize) -> T {
        T::from_usize_lossy(k) / T::from_usize_lossy(self.values.len())
    }

    pub fn with_tag(mut self, tag: impl Into<String>) -> Self {
        self.basis_tag = tag.into();
        self
    }

    /// Writes `omega,value` rows.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["omega", "value"])?;
        for (k, v) in self.values.iter().enumerate() {
            w.write_record([self.omega(k).as_f64().to_string(), v.as_f64().to_string()])?;
        }
        w.flush()?;
        Ok(())
    }
}

/// Samples `R` on `grid` equispaced points.
///
/// The projections `U^* phi(k/G)` are the length-`G` DFTs of the conjugated
/// basis columns, so the whole profile costs `S` FFTs. Where the profile is
/// small the FFT value loses precision to cancellation and is recomputed
/// from the explicit residual.
pub fn sample_nsc<T: Real>(basis: &SubspaceBasis<T>, grid: usize) -> Result<NscProfile<T>> {
    let m = basis.ambient_dim();
    let min = 4 * m;
    if grid < min {
        return Err(Error::GridTooSmall { grid, min });
    }
    let mut energy = vec![T::zero(); grid];
    let mut planner = FftPlanner::<T>::new();
    let fft = planner.plan_fft_forward(grid);
    let mut buf = vec![Complex::new(T::zero(), T::zero()); grid];
    for col in basis.basis().column_iter() {
        buf.iter_mut().for_each(|z| *z = Complex::new(T::zero(), T::zero()));
        // Sum_k conj(u_k) e^{-2 pi i k n / G} is the forward DFT of conj(u).
        for (k, u) in col.iter().enumerate() {
            buf[k] = u.conj();
        }
        fft.process(&mut buf);
        for (e, z) in energy.iter_mut().zip(&buf) {
            *e += z.norm_sqr();
        }
    }
    let mf = T::from_usize_lossy(m);
    let level = T::lit(DIRECT_REFINE_LEVEL);
    let gf = T::from_usize_lossy(grid);
    let values = energy
        .iter()
        .enumerate()
        .map(|(k, &e)| {
            let r2 = (T::one() - e / mf).max(T::zero());
            if r2 < level {
                noise_space_correlation(basis, T::from_usize_lossy(k) / gf)
            } else {
                r2.sqrt().min(T::one())
            }
        })
        .collect();
    Ok(NscProfile { values, basis_tag: String::new() })
}

/// Support estimate from a profile.
#[derive(Debug, Clone, PartialEq)]
pub struct MusicEstimate<T: Real> {
    pub support: SupportSet<T>,
    /// Fewer than `S` circular local minima existed; the remainder were padded
    /// with the smallest remaining grid values.
    pub degenerate_peaks: bool,
    /// Grid indices the estimate was built from.
    pub grid_indices: Vec<usize>,
}

/// Circular strict local minima of `values`; a flat run counts once, at its
/// leftmost index, when both neighbours of the run are strictly larger.
pub fn circular_local_minima<T: Real>(values: &[T]) -> Vec<usize> {
    let n = values.len();
    if n < 3 {
        return Vec::new();
    }
    let mut out = Vec::new();
    for i in 0..n {
        let prev = values[(i + n - 1) % n];
        if !(prev > values[i]) {
            continue;
        }
        let mut j = (i + 1) % n;
        let mut steps = 0;
        while values[j] == values[i] && steps < n {
            j = (j + 1) % n;
            steps += 1;
        }
        if steps < n && values[j] > values[i] {
            out.push(i);
        }
    }
    out
}

/// Picks the `S` deepest circular local minima of the profile. With `refine`
/// each pick moves by a parabolic fit through the squared profile on its
/// three-point stencil, clamped to half a cell.
pub fn extract_support<T: Real>(profile: &NscProfile<T>, s: usize, refine: bool) -> Result<MusicEstimate<T>> {
    let g = profile.grid_size();
    if s == 0 || s > g {
        return Err(Error::InvalidArgument(format!("cannot extract {s} peaks from {g} grid points")));
    }
    let v = profile.values();
    let mut minima = circular_local_minima(v);
    minima.sort_by(|&a, &b| v[a].partial_cmp(&v[b]).unwrap_or(std::cmp::Ordering::Equal).then(a.cmp(&b)));
    minima.truncate(s);
    let found = minima.len();
    let degenerate_peaks = found < s;
    let mut picks = minima.clone();
    if degenerate_peaks {
        let mut rest: Vec<usize> = (0..g).filter(|k| !minima.contains(k)).collect();
        rest.sort_by(|&a, &b| v[a].partial_cmp(&v[b]).unwrap_or(std::cmp::Ordering::Equal).then(a.cmp(&b)));
        picks.extend(rest.into_iter().take(s - found));
    }
    let gf = T::from_usize_lossy(g);
    let grid_points = || picks.iter().map(|&k| T::from_usize_lossy(k) / gf);
    let support = if refine {
        let refined = picks.iter().enumerate().map(|(i, &k)| {
            let offset = if i < found { parabolic_offset(v, k) } else { T::zero() };
            wrap_unit((T::from_usize_lossy(k) + offset) / gf)
        });
        SupportSet::new(refined).or_else(|_| SupportSet::new(grid_points()))?
    } else {
        SupportSet::new(grid_points())?
    };
    Ok(MusicEstimate { support, degenerate_peaks, grid_indices: picks })
}

/// Vertex offset (in cells) of the parabola through the squared values at
/// `k-1, k, k+1`. The squared profile is smooth at a zero of `R`, where `R`
/// itself has a corner.
fn parabolic_offset<T: Real>(v: &[T], k: usize) -> T {
    let n = v.len();
    let sq = |i: usize| v[i] * v[i];
    let (fm, f0, fp) = (sq((k + n - 1) % n), sq(k), sq((k + 1) % n));
    let denom = fm - f0 - f0 + fp;
    if !(denom > T::zero()) {
        return T::zero();
    }
    let half = T::lit(0.5);
    (half * (fm - fp) / denom).max(-half).min(half)
}

/// Grid sup-norm `max_k |R_hat(w_k) - R(w_k)|`, a lower bound on the continuum sup.
pub fn nsc_sup_perturbation<T: Real>(truth: &NscProfile<T>, estimate: &NscProfile<T>) -> Result<T> {
    if truth.grid_size() != estimate.grid_size() {
        return Err(Error::GridMismatch { left: truth.grid_size(), right: estimate.grid_size() });
    }
    Ok(truth
        .values()
        .iter()
        .zip(estimate.values())
        .fold(T::zero(), |m, (a, b)| m.max((*a - *b).abs())))
}

/// MUSIC from a signal-space basis: sample, then extract.
pub fn music_estimate<T: Real>(
    basis: &SubspaceBasis<T>,
    s: usize,
    grid: usize,
    refine: bool,
) -> Result<(NscProfile<T>, MusicEstimate<T>)> {
    let profile = sample_nsc(basis, grid)?;
    let est = extract_support(&profile, s, refine)?;
    Ok((profile, est))
}
