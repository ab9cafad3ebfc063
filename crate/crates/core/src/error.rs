use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// The requested time lies outside the field's validity window.
    #[error("time {t} outside field validity window [{start}, {horizon}]")]
    OutsideWindow { t: f64, start: f64, horizon: f64 },

    #[error("integration failed: {0}")]
    Integration(String),

    #[error("no path to goal")]
    NoPath,

    #[error("no feasible departure time in window")]
    NoFeasibleDeparture,

    #[error("objective is not finite anywhere in the bracket")]
    NonFiniteObjective,

    #[error("graph too large for exhaustive enumeration ({vertices} > {limit} vertices)")]
    TooLarge { vertices: usize, limit: usize },

    #[error("simulation failed at ({x}, {y}), t = {t}: {reason}")]
    Simulation {
        x: f64,
        y: f64,
        t: f64,
        reason: String,
    },
}

impl Error {
    pub(crate) fn arg(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }
}
