//! Error types shared by every module of the crate.

use thiserror::Error;

/// Crate-wide error type.
#[derive(Debug, Error)]
pub enum Error {
    /// A parameter is outside its admissible range.
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: String, reason: String },

    /// An operation that requires a deterministic estimator received the
    /// stochastic posterior-sampler reference.
    #[error("contract violation: {0}")]
    ContractViolation(String),

    /// A posterior was requested for a measurement with zero marginal mass.
    #[error("undefined posterior: column {y_index} has zero marginal probability")]
    UndefinedPosterior { y_index: usize },

    /// Training produced a non-finite loss.
    #[error("training diverged at step {step}: {which} loss is not finite")]
    TrainingDiverged { step: usize, which: String },

    /// The exhaustive enumeration guard was exceeded.
    #[error("enumeration too large: {maps} maps exceeds the guard of {guard}")]
    EnumerationTooLarge { maps: u128, guard: u64 },

    /// A theorem assertion failed; carries the offending map.
    #[error(
        "theorem verification failed for map {map_id} (assignment {assignment:?}): \
         K = {lipschitz} < bound g = {bound} at W_p = {wp}"
    )]
    VerificationFailure {
        map_id: u64,
        assignment: Vec<usize>,
        wp: f64,
        lipschitz: f64,
        bound: f64,
    },

    /// Numerical failure inside a solver (non-PSD matrix, infeasible flow, ...).
    #[error("numerical error: {0}")]
    Numerical(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    /// Shorthand for the most common error kind.
    pub fn invalid(name: &str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            name: name.to_string(),
            reason: reason.into(),
        }
    }
}
