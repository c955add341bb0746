use thiserror::Error;

/// Domain failures raised by the analysis modules.
///
/// Orbit escape is not an error; it is reported in-band by the map API.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum LabError {
    #[error("invalid interval [{lo}, {hi}]: endpoints must be finite with lo < hi")]
    InvalidInterval { lo: f64, hi: f64 },
    #[error("degenerate gap on the c-axis ({which}): denominator {denominator} is not positive")]
    DegenerateGap { which: &'static str, denominator: f64 },
    #[error("invalid sign triple for block {block}: entries must be +1 or -1")]
    InvalidSigns { block: String },
    #[error("perturbation C1 bound {bound} is not below 1/2")]
    PerturbationTooLarge { bound: f64 },
    #[error("invalid perturbation: {0}")]
    InvalidPerturbation(String),
    #[error("Newton iteration did not reach the residual target (residual {residual:e})")]
    NewtonDivergence { residual: f64 },
    #[error("branch {branch} has no isolated fixed point in its block")]
    NoFixedPoint { branch: char },
    #[error("graph transform did not converge after {iterations} iterations (last change {last_change:e})")]
    NoConvergence { iterations: usize, last_change: f64 },
    #[error("(u,c) inversion failed at grid node ({x}, {y})")]
    RootNotFound { x: f64, y: f64 },
    #[error("the invariant surfaces do not intersect inside the blocks")]
    EmptyIntersection,
    #[error("refinement depth {depth} exceeds the cap {cap}")]
    DepthCap { depth: usize, cap: usize },
    #[error("thickness needs at least two intervals, got {count}")]
    InsufficientGaps { count: usize },
    #[error("precondition violated: {0}")]
    PreconditionViolated(String),
    #[error("thickness must be positive, got {0}")]
    NonPositiveTau(f64),
    #[error("box counting needs a non-empty input")]
    EmptyInput,
    #[error("box counting needs at least two distinct positive scales")]
    DegenerateScales,
    #[error("configuration error: {0}")]
    Config(String),
}

impl LabError {
    /// Stable machine-readable tag used in JSON error objects.
    pub fn kind(&self) -> &'static str {
        match self {
            LabError::InvalidInterval { .. } => "InvalidInterval",
            LabError::DegenerateGap { .. } => "DegenerateGap",
            LabError::InvalidSigns { .. } => "InvalidSigns",
            LabError::PerturbationTooLarge { .. } => "PerturbationTooLarge",
            LabError::InvalidPerturbation(_) => "InvalidPerturbation",
            LabError::NewtonDivergence { .. } => "NewtonDivergence",
            LabError::NoFixedPoint { .. } => "NoFixedPoint",
            LabError::NoConvergence { .. } => "NoConvergence",
            LabError::RootNotFound { .. } => "RootNotFound",
            LabError::EmptyIntersection => "EmptyIntersection",
            LabError::DepthCap { .. } => "DepthCap",
            LabError::InsufficientGaps { .. } => "InsufficientGaps",
            LabError::PreconditionViolated(_) => "PreconditionViolated",
            LabError::NonPositiveTau(_) => "NonPositiveTau",
            LabError::EmptyInput => "EmptyInput",
            LabError::DegenerateScales => "DegenerateScales",
            LabError::Config(_) => "Config",
        }
    }
}

pub type Result<T> = std::result::Result<T, LabError>;
