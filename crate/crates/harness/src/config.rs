//! Experiment description, parsed from a single JSON document.

use serde::{Deserialize, Serialize};
use spectral::music::default_grid_size;
use spectral::{ClumpsSpec64, SupportSet64};

use crate::error::{HarnessError, Result};

/// Where the sources sit.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Geometry {
    Clumps(ClumpsSpec64),
    Support(SupportSet64),
}

impl Geometry {
    pub fn support(&self) -> Result<SupportSet64> {
        match self {
            Geometry::Clumps(spec) => Ok(spec.generate()?),
            Geometry::Support(s) => Ok(s.clone()),
        }
    }

    /// Largest clump cardinality (1 for an explicit support).
    pub fn clump_size(&self) -> usize {
        match self {
            Geometry::Clumps(spec) => spec.max_clump_size(),
            Geometry::Support(_) => 1,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AmplitudeModel {
    /// i.i.d. `CN(0, 1)` entries.
    #[default]
    ComplexGaussian,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Estimator {
    Music,
    Esprit,
    #[default]
    Both,
}

impl Estimator {
    pub fn runs_music(self) -> bool {
        matches!(self, Estimator::Music | Estimator::Both)
    }

    pub fn runs_esprit(self) -> bool {
        matches!(self, Estimator::Esprit | Estimator::Both)
    }
}

/// How the empirical covariance of a trial is drawn.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CovarianceRoute {
    /// Draw the `(S + M)`-dimensional complex Wishart factor directly
    /// (Bartlett decomposition) and map it through `[Phi, nu I]`.
    #[default]
    Wishart,
    /// Synthesize all `L` snapshots and form `Y_L Y_L^*`.
    Snapshots,
}

/// Per-trial error measure.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Metric {
    /// Grid sup-norm of the noise-space correlation perturbation.
    NscSup,
    /// Matching distance of ESPRIT, or of MUSIC when ESPRIT is not run.
    Md,
    /// Matching distance of the MUSIC support estimate.
    MusicMd,
}

impl Metric {
    pub fn name(self) -> &'static str {
        match self {
            Metric::NscSup => "nsc_sup",
            Metric::Md => "md",
            Metric::MusicMd => "music_md",
        }
    }
}

/// A model quantity that a sweep or grid axis varies.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Parameter {
    #[serde(rename = "nu")]
    Nu,
    #[serde(rename = "L")]
    Snapshots,
    /// Super-resolution factor `1/alpha` of a clumps geometry; `M` and the
    /// anchors stay fixed.
    #[serde(rename = "srf")]
    Srf,
    #[serde(rename = "alpha")]
    Alpha,
}

impl Parameter {
    pub fn name(self) -> &'static str {
        match self {
            Parameter::Nu => "nu",
            Parameter::Snapshots => "L",
            Parameter::Srf => "srf",
            Parameter::Alpha => "alpha",
        }
    }
}

/// Axis values: an explicit list, or `{"logspace": [lo_exp, hi_exp, n]}` /
/// `{"linspace": [lo, hi, n]}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum AxisValues {
    List(Vec<f64>),
    Logspace { logspace: (f64, f64, usize) },
    Linspace { linspace: (f64, f64, usize) },
}

impl AxisValues {
    pub fn resolve(&self) -> Vec<f64> {
        let spaced = |lo: f64, hi: f64, n: usize| -> Vec<f64> {
            match n {
                0 => vec![],
                1 => vec![lo],
                _ => (0..n).map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64).collect(),
            }
        };
        match self {
            AxisValues::List(v) => v.clone(),
            AxisValues::Logspace { logspace: (lo, hi, n) } => {
                spaced(*lo, *hi, *n).into_iter().map(|e| 10f64.powf(e)).collect()
            }
            AxisValues::Linspace { linspace: (lo, hi, n) } => spaced(*lo, *hi, *n),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Axis {
    pub parameter: Parameter,
    pub values: AxisValues,
}

impl Axis {
    pub fn new(parameter: Parameter, values: Vec<f64>) -> Self {
        Self { parameter, values: AxisValues::List(values) }
    }

    pub fn logspace(parameter: Parameter, lo_exp: f64, hi_exp: f64, n: usize) -> Self {
        Self { parameter, values: AxisValues::Logspace { logspace: (lo_exp, hi_exp, n) } }
    }
}

/// Quantity on the horizontal axis of a sweep fit.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Abscissa {
    /// The swept value itself.
    #[default]
    Value,
    /// `sigma_S(Phi)` of the geometry at each swept value.
    SigmaS,
    /// Super-resolution factor `1/((M-1) Delta)` of the generated support.
    Srf,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepSpec {
    #[serde(flatten)]
    pub axis: Axis,
    #[serde(default)]
    pub abscissa: Abscissa,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PhaseSpec {
    /// Column axis; one transition point is located per column.
    pub x: Axis,
    /// Axis scanned within a column.
    pub y: Axis,
    /// Level of the mean `log2(md / Delta)` that marks the transition.
    #[serde(default = "default_threshold")]
    pub threshold: f64,
}

fn default_threshold() -> f64 {
    -1.0
}

fn default_true() -> bool {
    true
}

/// Full description of a Monte-Carlo experiment.
///
/// Every swept quantity not named by an axis is held at the value given here.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub geometry: Geometry,
    /// Sensor count. Required for an explicit support; for clumps it must
    /// agree with the spec's own `M` when given.
    #[serde(rename = "M", default, skip_serializing_if = "Option::is_none")]
    pub sensors: Option<usize>,
    #[serde(rename = "L")]
    pub snapshots: usize,
    pub nu: f64,
    #[serde(default)]
    pub amplitudes: AmplitudeModel,
    #[serde(default)]
    pub estimator: Estimator,
    /// Trials per sweep point or grid cell. Defaults to 100, or 2500 when
    /// some clump has three or more points.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub trials: Option<usize>,
    #[serde(default)]
    pub root_seed: u64,
    /// MUSIC grid size; defaults to `max(4096, 64 M)`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub grid_size: Option<usize>,
    #[serde(default = "default_true")]
    pub refine: bool,
    #[serde(default)]
    pub covariance: CovarianceRoute,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sweep: Option<SweepSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub phase: Option<PhaseSpec>,
}

impl ExperimentConfig {
    /// Minimal configuration with defaults for everything optional.
    pub fn new(geometry: Geometry, snapshots: usize, nu: f64) -> Self {
        Self {
            geometry,
            sensors: None,
            snapshots,
            nu,
            amplitudes: AmplitudeModel::default(),
            estimator: Estimator::default(),
            trials: None,
            root_seed: 0,
            grid_size: None,
            refine: true,
            covariance: CovarianceRoute::default(),
            sweep: None,
            phase: None,
        }
    }

    /// Parses and validates a JSON document. Syntax errors carry their location.
    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: Self = serde_json::from_str(text).map_err(|e| HarnessError::Parse {
            line: e.line(),
            column: e.column(),
            message: e.to_string(),
        })?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn sensors(&self) -> Result<usize> {
        match (&self.geometry, self.sensors) {
            (Geometry::Clumps(spec), None) => Ok(spec.sensors),
            (Geometry::Clumps(spec), Some(m)) if m == spec.sensors => Ok(m),
            (Geometry::Clumps(spec), Some(m)) => Err(HarnessError::Config(format!(
                "M = {m} disagrees with the clumps spec (M = {})",
                spec.sensors
            ))),
            (Geometry::Support(_), Some(m)) => Ok(m),
            (Geometry::Support(_), None) => Err(HarnessError::Config("an explicit support needs \"M\"".into())),
        }
    }

    pub fn trials(&self) -> usize {
        self.trials.unwrap_or(if self.geometry.clump_size() >= 3 { 2500 } else { 100 })
    }

    pub fn grid_size(&self) -> Result<usize> {
        Ok(self.grid_size.unwrap_or(default_grid_size(self.sensors()?)))
    }

    pub fn with_trials(mut self, trials: usize) -> Self {
        self.trials = Some(trials);
        self
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.root_seed = seed;
        self
    }

    /// Copy with one parameter replaced.
    pub fn with_parameter(&self, parameter: Parameter, value: f64) -> Result<Self> {
        let mut cfg = self.clone();
        match parameter {
            Parameter::Nu => cfg.nu = value,
            Parameter::Snapshots => {
                if !(value >= 1.0 && value.is_finite()) {
                    return Err(HarnessError::Config(format!("L = {value} is not a positive count")));
                }
                cfg.snapshots = value.round() as usize;
            }
            Parameter::Srf | Parameter::Alpha => {
                let Geometry::Clumps(spec) = &self.geometry else {
                    return Err(HarnessError::Config(format!(
                        "sweeping {} needs a clumps geometry",
                        parameter.name()
                    )));
                };
                if !(value > 0.0 && value.is_finite()) {
                    return Err(HarnessError::Config(format!("{} = {value} must be positive", parameter.name())));
                }
                let alpha = if parameter == Parameter::Srf { 1.0 / value } else { value };
                cfg.geometry = Geometry::Clumps(spec.with_alpha(alpha));
            }
        }
        Ok(cfg)
    }

    /// Single-point configuration: one parameter replaced, axes removed.
    pub fn point(&self, parameter: Parameter, value: f64) -> Result<Self> {
        let mut cfg = self.with_parameter(parameter, value)?;
        cfg.sweep = None;
        cfg.phase = None;
        Ok(cfg)
    }

    /// Checks the fixed configuration and every point of its sweep/grid axes.
    pub fn validate(&self) -> Result<()> {
        self.validate_point()?;
        if let Some(sweep) = &self.sweep {
            let values = sweep.axis.values.resolve();
            if values.len() < 3 {
                return Err(HarnessError::Config(format!("a sweep needs >= 3 values, got {}", values.len())));
            }
            for v in values {
                self.with_parameter(sweep.axis.parameter, v)?.validate_point()?;
            }
        }
        if let Some(phase) = &self.phase {
            let (xs, ys) = (phase.x.values.resolve(), phase.y.values.resolve());
            if xs.len() < 4 || ys.len() < 4 {
                return Err(HarnessError::Config("both phase axes need >= 4 values".into()));
            }
            if phase.x.parameter == phase.y.parameter {
                return Err(HarnessError::Config("phase axes must vary different parameters".into()));
            }
            for &x in &xs {
                let cx = self.with_parameter(phase.x.parameter, x)?;
                for &y in &ys {
                    cx.with_parameter(phase.y.parameter, y)?.validate_point()?;
                }
            }
        }
        Ok(())
    }

    fn validate_point(&self) -> Result<()> {
        let m = self.sensors()?;
        let support = self.geometry.support()?;
        let s = support.len();
        if m < s {
            return Err(HarnessError::Config(format!("M = {m} is below S = {s}")));
        }
        if self.estimator.runs_esprit() && m < s + 1 {
            return Err(HarnessError::Config(format!("ESPRIT needs M >= S + 1 = {}", s + 1)));
        }
        if self.snapshots == 0 {
            return Err(HarnessError::Config("L must be positive".into()));
        }
        if !(self.nu >= 0.0 && self.nu.is_finite()) {
            return Err(HarnessError::Config(format!("nu = {} must be finite and >= 0", self.nu)));
        }
        if self.trials == Some(0) {
            return Err(HarnessError::Config("trials must be positive".into()));
        }
        let g = self.grid_size()?;
        if self.estimator.runs_music() && g < 4 * m {
            return Err(HarnessError::Config(format!("grid_size {g} is below 4 M = {}", 4 * m)));
        }
        Ok(())
    }
}
