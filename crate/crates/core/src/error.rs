//! Error type shared across the crate.

use thiserror::Error;

/// Crate-wide result alias.
pub type Result<T, E = BcoError> = std::result::Result<T, E>;

/// Everything that can go wrong while configuring or running a learner.
#[derive(Debug, Error)]
pub enum BcoError {
    /// A vector had the wrong length for the set or loss it was used with.
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    /// A parameter was outside its documented domain.
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// The round protocol was broken (queries before `begin_round`,
    /// non-consecutive rounds, play past the horizon).
    #[error("protocol violation: {0}")]
    ProtocolViolation(String),

    /// More oracle queries in one round than the feedback mode allows.
    #[error("query budget exceeded in round {round}")]
    BudgetExceeded { round: usize },

    /// A submitted decision fell outside the feasible set.
    #[error("infeasible query in round {round}: distance outside the set exceeds tolerance ({excess:.3e})")]
    InfeasibleQuery { round: usize, excess: f64 },

    /// A gradient estimate exceeded the bound the surrogate was promised.
    #[error("gradient estimate norm {norm:.6e} exceeds the stated bound {bound:.6e}")]
    EstimatorBoundViolation { norm: f64, bound: f64 },

    /// The exploration radius cannot fit inside the set at this horizon
    /// (the shrink factor would reach 1).
    #[error("horizon too small: exploration radius {delta:.6e} must shrink below the inner radius {inner_radius:.6e}")]
    HorizonTooSmall { delta: f64, inner_radius: f64 },

    /// A ledger was asked for an accounting it does not have the rows for.
    #[error("incomplete ledger: {0}")]
    IncompleteLedger(String),

    /// The requested accounting has no closed form for this scenario.
    #[error("unsupported scenario: {0}")]
    UnsupportedScenario(String),

    /// Filesystem or formatting failure while persisting results.
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

impl BcoError {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        BcoError::InvalidArgument(msg.into())
    }

    pub(crate) fn protocol(msg: impl Into<String>) -> Self {
        BcoError::ProtocolViolation(msg.into())
    }
}
