use alloc::string::String;

/// Errors raised by the simulation core.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("invalid mode index {0} (expected 1 or 2)")]
    InvalidMode(usize),

    #[error("invalid qubit index {0}")]
    InvalidQubit(usize),

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("tensor dimension {dim} exceeds cap {cap}")]
    DimensionOverflow { dim: usize, cap: usize },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("resonant drive (delta = 0) has no closed-form circular trajectory")]
    ResonantDrive,

    #[error("unsupported sideband order: {0}")]
    UnsupportedSideband(String),

    #[error("displacement |alpha|^2 = {alpha_sq:.3} exceeds leakage guard n_max/4 = {limit:.3}")]
    LeakageGuard { alpha_sq: f64, limit: f64 },

    #[error("time step too coarse: {0}")]
    StepTooCoarse(String),

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("schedule does not close: residual |alpha| = {residual:.3e} > {bound:.3e}")]
    ScheduleNotClosed { residual: f64, bound: f64 },

    #[error("solver failed to converge: {0}")]
    NoConvergence(String),

    #[error("resonant energy denominator in Stark shift")]
    ResonantDenominator,

    #[error("geometry mismatch: {0}")]
    GeometryMismatch(String),

    #[error("parameter outside validity window: {0}")]
    OutsideValidity(String),
}

impl Error {
    /// True for errors that indicate a physics precondition rather than a
    /// malformed input or a numerical failure.
    pub fn is_physics_precondition(&self) -> bool {
        matches!(
            self,
            Error::ResonantDrive
                | Error::LeakageGuard { .. }
                | Error::Precondition(_)
                | Error::ScheduleNotClosed { .. }
                | Error::ResonantDenominator
                | Error::GeometryMismatch(_)
                | Error::OutsideValidity(_)
        )
    }

    /// True for numerical convergence failures.
    pub fn is_numeric_failure(&self) -> bool {
        matches!(self, Error::StepTooCoarse(_) | Error::NoConvergence(_))
    }
}

pub type Result<T> = core::result::Result<T, Error>;
