use thiserror::Error;

/// Failures raised by the numerical pipeline.
///
/// Each variant corresponds to a hypothesis of the instability construction
/// that the inputs violated, or to a numerical kernel that did not converge.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum LabError {
    #[error("profile has no interior critical point with negative curvature")]
    NoCriticalPoint,
    #[error("critical point at y = {a} is degenerate (|U''| = {curvature:e})")]
    DegenerateCritical { a: f64, curvature: f64 },
    #[error("unknown profile family `{0}`")]
    UnknownFamily(String),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("heat-kernel quadrature did not converge at y = {y}, t = {t} (estimate {estimate:e})")]
    QuadratureFailure { t: f64, y: f64, estimate: f64 },
    #[error("curvature along the critical path fell below the floor at t = {t}")]
    CurvatureVanished { t: f64 },
    #[error("tail integration left the decaying branch at z = {z}")]
    TailBlowup { z: f64 },
    #[error("no eigenvalue with negative imaginary part found in the search rectangle")]
    NoRootFound,
    #[error("corrector seed has zero mass")]
    ZeroMass,
    #[error("requested time {t} exceeds the critical-path horizon {horizon}")]
    HorizonExceeded { t: f64, horizon: f64 },
    #[error("time step {dt:e} violates the advection guard {limit:e}")]
    CflViolation { dt: f64, limit: f64 },
    #[error("mode state became non-finite at t = {t}")]
    NonFiniteState { t: f64 },
    #[error("fit window holds {got} samples, need at least {need}")]
    WindowTooShort { got: usize, need: usize },
    #[error("power-law fit needs at least {need} distinct points, got {got}")]
    InsufficientData { got: usize, need: usize },
    #[error("tail of the profile is below the floor everywhere on the far grid")]
    TailBelowFloor,
    #[error("i/o: {0}")]
    Io(String),
}

impl LabError {
    /// Stable machine-readable tag used in error JSON.
    pub fn kind(&self) -> &'static str {
        match self {
            LabError::NoCriticalPoint => "NoCriticalPoint",
            LabError::DegenerateCritical { .. } => "DegenerateCritical",
            LabError::UnknownFamily(_) => "UnknownFamily",
            LabError::InvalidParameter(_) => "InvalidParameter",
            LabError::QuadratureFailure { .. } => "QuadratureFailure",
            LabError::CurvatureVanished { .. } => "CurvatureVanished",
            LabError::TailBlowup { .. } => "TailBlowup",
            LabError::NoRootFound => "NoRootFound",
            LabError::ZeroMass => "ZeroMass",
            LabError::HorizonExceeded { .. } => "HorizonExceeded",
            LabError::CflViolation { .. } => "CflViolation",
            LabError::NonFiniteState { .. } => "NonFiniteState",
            LabError::WindowTooShort { .. } => "WindowTooShort",
            LabError::InsufficientData { .. } => "InsufficientData",
            LabError::TailBelowFloor => "TailBelowFloor",
            LabError::Io(_) => "Io",
        }
    }

    /// Configuration-type errors, as opposed to numerical failures.
    pub fn is_config(&self) -> bool {
        matches!(
            self,
            LabError::UnknownFamily(_) | LabError::InvalidParameter(_)
        )
    }
}

pub type Result<T> = std::result::Result<T, LabError>;
