//! Point supports on the torus, Fourier steering vectors and the snapshot
//! model `y(t) = Phi x(t) + e(t)`.

use nalgebra::{Complex, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{ClumpRule, Error, Result};
use crate::linalg;
use crate::rng::{complex_gaussian, StreamTag, TrialSeed};
use crate::scalar::{torus_distance, unit_phasor, wrap_unit, CMatrix, CVector, Real};

/// Relative slack used when checking geometric rules built from floating
/// point arithmetic (a point placed at exactly `beta/(M-1)` must pass).
const GEOMETRY_SLACK: f64 = 1e-9;

/// Sorted set of distinct points on the torus `[0, 1)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "SupportRepr<T>", into = "SupportRepr<T>")]
#[serde(bound(serialize = "T: Real + Serialize", deserialize = "T: Real + Deserialize<'de>"))]
pub struct SupportSet<T: Real> {
    points: Vec<T>,
}

#[derive(Serialize, Deserialize)]
struct SupportRepr<T> {
    points: Vec<T>,
}

impl<T: Real> TryFrom<SupportRepr<T>> for SupportSet<T> {
    type Error = Error;
    fn try_from(r: SupportRepr<T>) -> Result<Self> {
        SupportSet::new(r.points)
    }
}

impl<T: Real> From<SupportSet<T>> for SupportRepr<T> {
    fn from(s: SupportSet<T>) -> Self {
        SupportRepr { points: s.points }
    }
}

impl<T: Real> SupportSet<T> {
    /// Reduces every point mod 1, sorts, and rejects empty, non-finite or
    /// repeated inputs.
    pub fn new(points: impl IntoIterator<Item = T>) -> Result<Self> {
        let mut pts = Vec::new();
        for p in points {
            if !p.is_finite() {
                return Err(Error::InvalidSupport(format!("non-finite point {p}")));
            }
            pts.push(wrap_unit(p));
        }
        if pts.is_empty() {
            return Err(Error::InvalidSupport("empty support".into()));
        }
        pts.sort_by(|a, b| a.partial_cmp(b).expect("finite"));
        // Points that coincide modulo 1 up to rounding (0.2 and 1.2) are duplicates.
        let tol = T::default_epsilon() * T::lit(8.0);
        let n = pts.len();
        if let Some(i) = (0..n).find(|&i| n > 1 && torus_distance(pts[i], pts[(i + 1) % n]) <= tol) {
            return Err(Error::InvalidSupport(format!("repeated point {}", pts[i])));
        }
        Ok(Self { points: pts })
    }

    pub fn points(&self) -> &[T] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Minimum wrap-around distance between two points.
    pub fn min_separation(&self) -> Result<T> {
        let n = self.points.len();
        if n < 2 {
            return Err(Error::UndefinedSeparation(n));
        }
        // Sorted on the circle: only cyclic neighbours can realise the minimum.
        let mut best = T::one() - self.points[n - 1] + self.points[0];
        for w in self.points.windows(2) {
            best = best.min(w[1] - w[0]);
        }
        Ok(best)
    }

    /// Super-resolution factor `1 / ((M - 1) Delta)`.
    pub fn srf(&self, sensors: usize) -> Result<T> {
        if sensors < 2 {
            return Err(Error::InvalidArgument(format!(
                "super-resolution factor needs M >= 2, got {sensors}"
            )));
        }
        let delta = self.min_separation()?;
        Ok(T::one() / (T::from_usize_lossy(sensors - 1) * delta))
    }

    pub fn map_points<U: Real>(&self, f: impl Fn(T) -> U) -> Result<SupportSet<U>> {
        SupportSet::new(self.points.iter().map(|&p| f(p)))
    }
}

/// Separated-clumps geometry: `num_clumps` groups of equally spaced points.
///
/// Spacings are in Rayleigh units `1/(M-1)`: points inside clump `r` sit at
/// `anchor_r + j * alpha / (M - 1)`, and distinct clumps are at least
/// `beta / (M - 1)` apart.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound(serialize = "T: Real + Serialize", deserialize = "T: Real + Deserialize<'de>"))]
pub struct ClumpsSpec<T: Real> {
    pub num_clumps: usize,
    pub clump_sizes: Vec<usize>,
    pub alpha: T,
    pub beta: T,
    /// Left-most point of each clump. Empty means equispaced anchors from 0.
    #[serde(default)]
    pub anchors: Vec<T>,
    #[serde(rename = "M")]
    pub sensors: usize,
}

impl<T: Real> ClumpsSpec<T> {
    /// Clumps of equal size with anchors `offset + r / num_clumps`.
    pub fn equispaced(
        num_clumps: usize,
        clump_size: usize,
        alpha: T,
        beta: T,
        sensors: usize,
        offset: T,
    ) -> Self {
        let anchors = (0..num_clumps)
            .map(|r| wrap_unit(offset + T::from_usize_lossy(r) / T::from_usize_lossy(num_clumps)))
            .collect();
        Self {
            num_clumps,
            clump_sizes: vec![clump_size; num_clumps],
            alpha,
            beta,
            anchors,
            sensors,
        }
    }

    /// Largest clump cardinality.
    pub fn max_clump_size(&self) -> usize {
        self.clump_sizes.iter().copied().max().unwrap_or(0)
    }

    /// The shared clump size when every clump has the same cardinality.
    pub fn common_clump_size(&self) -> Option<usize> {
        let first = *self.clump_sizes.first()?;
        self.clump_sizes.iter().all(|&s| s == first).then_some(first)
    }

    /// Intra-clump spacing `alpha / (M - 1)` as a torus length.
    pub fn spacing(&self) -> T {
        self.alpha / T::from_usize_lossy(self.sensors.saturating_sub(1).max(1))
    }

    /// Nominal super-resolution factor `1 / alpha`.
    pub fn nominal_srf(&self) -> T {
        T::one() / self.alpha
    }

    pub fn with_alpha(&self, alpha: T) -> Self {
        Self { alpha, ..self.clone() }
    }

    fn anchors_or_default(&self) -> Vec<T> {
        if self.anchors.is_empty() {
            (0..self.num_clumps)
                .map(|r| T::from_usize_lossy(r) / T::from_usize_lossy(self.num_clumps))
                .collect()
        } else {
            self.anchors.clone()
        }
    }

    fn clump_points(&self) -> Vec<Vec<T>> {
        let eps = self.spacing();
        self.anchors_or_default()
            .iter()
            .zip(&self.clump_sizes)
            .map(|(&a, &n)| {
                (0..n)
                    .map(|j| wrap_unit(a + T::from_usize_lossy(j) * eps))
                    .collect()
            })
            .collect()
    }

    /// Builds the support, checking every separated-clumps rule.
    pub fn generate(&self) -> Result<SupportSet<T>> {
        if self.num_clumps == 0 {
            return Err(Error::InvalidArgument("num_clumps must be positive".into()));
        }
        if self.clump_sizes.len() != self.num_clumps {
            return Err(Error::InvalidArgument(format!(
                "{} clump sizes for {} clumps",
                self.clump_sizes.len(),
                self.num_clumps
            )));
        }
        if !self.anchors.is_empty() && self.anchors.len() != self.num_clumps {
            return Err(Error::InvalidArgument(format!(
                "{} anchors for {} clumps",
                self.anchors.len(),
                self.num_clumps
            )));
        }
        if self.clump_sizes.contains(&0) {
            return Err(Error::InvalidArgument("clump sizes must be positive".into()));
        }
        if self.sensors < 2 {
            return Err(Error::InvalidArgument("need M >= 2".into()));
        }
        if !(self.alpha > T::zero()) || !(self.beta > T::zero()) {
            return Err(Error::InvalidArgument("alpha and beta must be positive".into()));
        }
        let widest = T::from_usize_lossy(self.max_clump_size() - 1) * self.alpha;
        if widest > T::one() + T::lit(GEOMETRY_SLACK) {
            return Err(Error::ClumpViolation {
                rule: ClumpRule::Width,
                detail: format!("widest clump spans {widest} Rayleigh lengths"),
            });
        }
        if widest >= T::one() {
            return Err(Error::ClumpViolation {
                rule: ClumpRule::Spacing,
                detail: format!("(lambda - 1) * alpha = {widest} must be below 1"),
            });
        }
        let clumps = self.clump_points();
        let rayleigh = T::one() / T::from_usize_lossy(self.sensors - 1);
        let slack = T::one() - T::lit(GEOMETRY_SLACK);
        if self.num_clumps > 1 {
            let gap = self.beta * rayleigh;
            for r in 0..clumps.len() {
                for s in r + 1..clumps.len() {
                    let d = clump_distance(&clumps[r], &clumps[s]);
                    if d < gap * slack {
                        return Err(Error::ClumpViolation {
                            rule: ClumpRule::Gap,
                            detail: format!(
                                "clumps {r} and {s} are {} Rayleigh lengths apart, need {}",
                                d / rayleigh,
                                self.beta
                            ),
                        });
                    }
                }
            }
        }
        let support = SupportSet::new(clumps.into_iter().flatten())
            .map_err(|e| Error::ClumpViolation { rule: ClumpRule::Spacing, detail: e.to_string() })?;
        if support.len() >= 2 {
            let delta = support.min_separation()?;
            if delta < self.spacing() * slack {
                return Err(Error::ClumpViolation {
                    rule: ClumpRule::Spacing,
                    detail: format!("minimum separation {delta} below alpha/(M-1)"),
                });
            }
        }
        Ok(support)
    }
}

fn clump_distance<T: Real>(a: &[T], b: &[T]) -> T {
    let mut best = T::one();
    for &x in a {
        for &y in b {
            best = best.min(torus_distance(x, y));
        }
    }
    best
}

/// Free-function form of [`ClumpsSpec::generate`].
pub fn generate_clumps_support<T: Real>(spec: &ClumpsSpec<T>) -> Result<SupportSet<T>> {
    spec.generate()
}

/// Array response `[e^{-2 pi i k omega}]_{k=0..M-1}`.
pub fn steering_vector<T: Real>(omega: T, sensors: usize) -> CVector<T> {
    let w = wrap_unit(omega);
    DVector::from_fn(sensors, |k, _| unit_phasor(T::from_usize_lossy(k) * w))
}

/// Derivative of the steering vector in `omega`: entries `(-2 pi i k) e^{-2 pi i k omega}`.
pub fn derivative_steering<T: Real>(omega: T, sensors: usize) -> CVector<T> {
    let w = wrap_unit(omega);
    DVector::from_fn(sensors, |k, _| {
        let kf = T::from_usize_lossy(k);
        unit_phasor(kf * w) * Complex::new(T::zero(), -T::two_pi() * kf)
    })
}

/// Fourier sensing matrix whose columns are steering vectors of the support.
#[derive(Debug, Clone, PartialEq)]
pub struct SteeringMatrix<T: Real> {
    matrix: CMatrix<T>,
}

impl<T: Real> SteeringMatrix<T> {
    pub fn new(support: &SupportSet<T>, sensors: usize) -> Result<Self> {
        if sensors < support.len() {
            return Err(Error::TooFewSensors { sensors, sources: support.len(), required: support.len() });
        }
        let pts = support.points();
        let matrix = CMatrix::from_fn(sensors, pts.len(), |k, j| {
            unit_phasor(T::from_usize_lossy(k) * pts[j])
        });
        Ok(Self { matrix })
    }

    pub fn matrix(&self) -> &CMatrix<T> {
        &self.matrix
    }

    pub fn sensors(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn sources(&self) -> usize {
        self.matrix.ncols()
    }

    /// Singular values, descending.
    pub fn singular_values(&self) -> Vec<T> {
        linalg::singular_values(&self.matrix)
    }
}

pub fn steering_matrix<T: Real>(support: &SupportSet<T>, sensors: usize) -> Result<SteeringMatrix<T>> {
    SteeringMatrix::new(support, sensors)
}

/// Matrix of derivative steering vectors, one column per support point.
pub fn derivative_matrix<T: Real>(support: &SupportSet<T>, sensors: usize) -> CMatrix<T> {
    let cols: Vec<CVector<T>> = support
        .points()
        .iter()
        .map(|&w| derivative_steering(w, sensors))
        .collect();
    CMatrix::from_columns(&cols)
}

/// Source amplitudes over `L` snapshots, stored scaled by `1/sqrt(L)`.
#[derive(Debug, Clone, PartialEq)]
pub struct AmplitudeBatch<T: Real> {
    columns: CMatrix<T>,
    covariance: CMatrix<T>,
    lambda_min: T,
}

impl<T: Real> AmplitudeBatch<T> {
    /// From raw amplitudes `[x(t_1) ... x(t_L)]` (S x L, unscaled).
    pub fn from_raw(raw: &CMatrix<T>) -> Result<Self> {
        let snapshots = raw.ncols();
        if snapshots == 0 || raw.nrows() == 0 {
            return Err(Error::InvalidArgument("amplitude matrix must be non-empty".into()));
        }
        let columns = raw / Complex::from(T::from_usize_lossy(snapshots).sqrt());
        Ok(Self::from_scaled(columns))
    }

    /// From an already `1/sqrt(L)`-scaled amplitude matrix.
    pub fn from_scaled(columns: CMatrix<T>) -> Self {
        let covariance = &columns * columns.adjoint();
        let lambda_min = linalg::hermitian_eigen_desc(&covariance)
            .eigenvalues
            .last()
            .copied()
            .unwrap_or(T::zero())
            .max(T::zero());
        Self { columns, covariance, lambda_min }
    }

    /// The scaled matrix `X_L`.
    pub fn columns(&self) -> &CMatrix<T> {
        &self.columns
    }

    /// `X = X_L X_L^*`.
    pub fn covariance(&self) -> &CMatrix<T> {
        &self.covariance
    }

    pub fn lambda_min(&self) -> T {
        self.lambda_min
    }

    /// Whether the amplitude covariance is strictly positive definite.
    pub fn is_full_rank(&self) -> bool {
        self.lambda_min > T::zero()
    }

    pub fn sources(&self) -> usize {
        self.columns.nrows()
    }

    pub fn snapshots(&self) -> usize {
        self.columns.ncols()
    }
}

/// Where amplitudes come from when synthesising snapshots.
#[derive(Debug, Clone, PartialEq)]
pub enum AmplitudeSource<T: Real> {
    /// Explicit raw amplitudes, S x L.
    Explicit(CMatrix<T>),
    /// i.i.d. CN(0, 1) entries.
    ComplexGaussian,
}

/// Additive noise: i.i.d. circular complex Gaussian entries of standard deviation `nu`.
///
/// Real and imaginary parts are independent with variance `nu^2 / 2`, so
/// `E[e e^*] = nu^2 I`. Only the Gaussian law is generated; a general
/// sub-Gaussian law would enter the theory through its proxy parameter,
/// which has no runtime role.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NoiseModel<T> {
    pub nu: T,
}

impl<T: Real> NoiseModel<T> {
    pub fn gaussian(nu: T) -> Result<Self> {
        if !(nu >= T::zero()) || !nu.is_finite() {
            return Err(Error::InvalidArgument(format!("noise level must be >= 0, got {nu}")));
        }
        Ok(Self { nu })
    }

    pub fn noiseless() -> Self {
        Self { nu: T::zero() }
    }
}

/// The generating model attached to a synthetic batch.
#[derive(Debug, Clone, PartialEq)]
pub struct GroundTruth<T: Real> {
    pub support: SupportSet<T>,
    pub amplitudes: AmplitudeBatch<T>,
    pub noise: NoiseModel<T>,
    pub seed: TrialSeed,
}

/// `L` snapshots stored as the scaled matrix `Y_L = [y(t_1) ... y(t_L)] / sqrt(L)`.
#[derive(Debug, Clone, PartialEq)]
pub struct SnapshotBatch<T: Real> {
    data: CMatrix<T>,
    ground_truth: Option<GroundTruth<T>>,
}

impl<T: Real> SnapshotBatch<T> {
    /// Wraps raw measurements `[y(t_1) ... y(t_L)]` (M x L, unscaled).
    pub fn from_raw(raw: &CMatrix<T>) -> Result<Self> {
        if raw.ncols() == 0 || raw.nrows() == 0 {
            return Err(Error::InvalidArgument("snapshot matrix must be non-empty".into()));
        }
        let scale = Complex::from(T::from_usize_lossy(raw.ncols()).sqrt());
        Ok(Self { data: raw / scale, ground_truth: None })
    }

    pub fn from_scaled(data: CMatrix<T>, ground_truth: Option<GroundTruth<T>>) -> Self {
        Self { data, ground_truth }
    }

    pub fn sensors(&self) -> usize {
        self.data.nrows()
    }

    pub fn snapshots(&self) -> usize {
        self.data.ncols()
    }

    /// The scaled matrix `Y_L`.
    pub fn data(&self) -> &CMatrix<T> {
        &self.data
    }

    /// Unscaled snapshots `sqrt(L) Y_L`.
    pub fn raw(&self) -> CMatrix<T> {
        &self.data * Complex::from(T::from_usize_lossy(self.snapshots()).sqrt())
    }

    pub fn ground_truth(&self) -> Option<&GroundTruth<T>> {
        self.ground_truth.as_ref()
    }
}

/// Draws `L` snapshots of `Phi x + e`. Amplitudes and noise come from separate
/// streams of `seed`, so the same seed always reproduces the same batch.
pub fn synthesize_snapshots<T: Real>(
    support: &SupportSet<T>,
    sensors: usize,
    snapshots: usize,
    amplitudes: &AmplitudeSource<T>,
    noise: NoiseModel<T>,
    seed: impl Into<TrialSeed>,
) -> Result<SnapshotBatch<T>> {
    let seed = seed.into();
    if snapshots < 1 {
        return Err(Error::InvalidArgument("need at least one snapshot".into()));
    }
    let phi = SteeringMatrix::new(support, sensors)?;
    let s = support.len();
    let raw_x = match amplitudes {
        AmplitudeSource::Explicit(x) => {
            if x.nrows() != s || x.ncols() != snapshots {
                return Err(Error::DimensionMismatch(format!(
                    "amplitudes are {}x{}, expected {s}x{snapshots}",
                    x.nrows(),
                    x.ncols()
                )));
            }
            x.clone()
        }
        AmplitudeSource::ComplexGaussian => {
            let mut rng = seed.stream(StreamTag::Amplitudes);
            CMatrix::from_fn(s, snapshots, |_, _| complex_gaussian(&mut rng, 1.0))
        }
    };
    let amps = AmplitudeBatch::from_raw(&raw_x)?;
    let mut data = phi.matrix() * amps.columns();
    if noise.nu > T::zero() {
        // Entries of E_L = [e(t_1) ... e(t_L)] / sqrt(L) have variance nu^2 / L.
        let var = noise.nu.as_f64().powi(2) / snapshots as f64;
        let mut rng = seed.stream(StreamTag::Noise);
        // Column-major fill keeps the draw order tied to (snapshot, sensor).
        for l in 0..snapshots {
            for k in 0..sensors {
                data[(k, l)] += complex_gaussian::<T, _>(&mut rng, var);
            }
        }
    }
    Ok(SnapshotBatch {
        data,
        ground_truth: Some(GroundTruth { support: support.clone(), amplitudes: amps, noise, seed }),
    })
}
