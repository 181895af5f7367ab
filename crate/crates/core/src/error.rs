use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

/// Errors raised by the model, solvers and simulation engine.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid parameter `{field}`: {reason}")]
    InvalidParameter { field: String, reason: String },

    #[error("mass matrix is singular (|det| = {det:e} below floor {floor:e})")]
    SingularMassMatrix { det: f64, floor: f64 },

    #[error("speed ratio {nu} is outside the turbine torque schedule [0.87, 1.67]")]
    OutOfScheduleRange { nu: f64 },

    #[error("no physical (non-negative real) flow velocity root")]
    NoPhysicalRoot,

    #[error("Φ has no sign change on stator angle bounds [{lo_deg:.3}°, {hi_deg:.3}°]")]
    NoBracket { lo_deg: f64, hi_deg: f64 },

    #[error("output power ω_t·|τ_t| is zero")]
    ZeroOutputPower,

    #[error("steady-state solution at ν = {nu} is infeasible")]
    InfeasibleSolution { nu: f64 },

    #[error("no feasible steady start point: {0}")]
    InfeasibleInitialization(String),

    #[error("state dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("non-finite state at step {step} (t = {time} s)")]
    NonFiniteState { step: usize, time: f64 },

    #[error("scaled parameters are invalid: {0}")]
    InvalidResult(String),

    #[error("operating point solve did not converge: {0}")]
    NoConvergence(String),

    #[error("configuration parse error: {0}")]
    Parse(String),
}

impl Error {
    pub(crate) fn invalid(field: &str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            field: field.to_string(),
            reason: reason.into(),
        }
    }

    /// True for failures of the numerical machinery (as opposed to bad input).
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            Error::NoPhysicalRoot
                | Error::NoBracket { .. }
                | Error::ZeroOutputPower
                | Error::InfeasibleSolution { .. }
                | Error::InfeasibleInitialization(_)
                | Error::NonFiniteState { .. }
                | Error::NoConvergence(_)
        )
    }
}
