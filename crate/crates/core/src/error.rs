use std::fmt;

/// Which separated-clumps rule a geometry violates.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ClumpRule {
    /// A clump does not fit inside one Rayleigh length `1/(M-1)`.
    Width,
    /// Intra-clump spacing rule: `(lambda_r - 1) * alpha < 1` and `Delta >= alpha/(M-1)`.
    Spacing,
    /// Two clumps are closer than `beta/(M-1)`.
    Gap,
}

impl fmt::Display for ClumpRule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ClumpRule::Width => f.write_str("clump width (a)"),
            ClumpRule::Spacing => f.write_str("intra-clump spacing (b)"),
            ClumpRule::Gap => f.write_str("inter-clump gap (c)"),
        }
    }
}

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("invalid support: {0}")]
    InvalidSupport(String),
    #[error("minimum separation is undefined for a support with {0} point(s)")]
    UndefinedSeparation(usize),
    #[error("too few sensors: M = {sensors} cannot resolve S = {sources} sources (need M >= {required})")]
    TooFewSensors { sensors: usize, sources: usize, required: usize },
    #[error("separated-clumps rule violated, {rule}: {detail}")]
    ClumpViolation { rule: ClumpRule, detail: String },
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("cardinality mismatch: {left} vs {right}")]
    CardinalityMismatch { left: usize, right: usize },
    #[error("profile grids differ: {left} vs {right} points")]
    GridMismatch { left: usize, right: usize },
    #[error("grid of {grid} points is below the minimum of {min}")]
    GridTooSmall { grid: usize, min: usize },
    #[error("shift_invariance_degenerate: {0}")]
    ShiftInvarianceDegenerate(String),
    #[error("fisher_singular: reciprocal condition number {rcond:e}")]
    FisherSingular { rcond: f64 },
    #[error("amplitude covariance is not positive definite")]
    AmplitudeCovarianceNotPd,
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    /// True for failures that come from the estimator rather than from the input.
    pub fn is_degeneracy(&self) -> bool {
        matches!(
            self,
            Error::ShiftInvarianceDegenerate(_) | Error::FisherSingular { .. }
        )
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
