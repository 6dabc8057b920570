use thiserror::Error;

/// Errors raised by the physics and numerics modules.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("elliptic parameter m = {0} outside [0, 1)")]
    EllipticDomain(f64),

    #[error("field point ({x}, {y}, {z}) m lies on a loop conductor")]
    OnConductor { x: f64, y: f64, z: f64 },

    #[error("negative evaluation time {0} s")]
    NegativeTime(f64),

    #[error("branch separation {separation} m does not stay below the ND distance {distance} m")]
    BranchOverlap { separation: f64, distance: f64 },

    #[error("ND distance {distance} m is below the Casimir-Polder bound d_min = {d_min} m")]
    BelowMinimumDistance { distance: f64, d_min: f64 },

    #[error("two-qubit state not normalized (norm² = {0})")]
    NotNormalized(f64),

    #[error("step size underflow at t = {t} s")]
    StepSizeUnderflow { t: f64, last_state: Vec<f64> },

    #[error("non-finite integrator state at t = {t} s")]
    NonFinite { t: f64 },

    #[error("integrator exceeded {0} steps")]
    TooManySteps(usize),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Error {
    Error::InvalidParameter {
        name,
        reason: reason.into(),
    }
}
