use thiserror::Error;

/// Errors raised by the model, solver and post-processing layers.
///
/// Scalars are carried as `f64` so the error type does not depend on the
/// solver's scalar parameter.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("rejected input: {0}")]
    InvalidInput(String),

    #[error("non-finite value {value} at {location}")]
    NonFinite { location: String, value: f64 },

    #[error("velocity model queried at negative separation {separation}")]
    NegativeSeparation { separation: f64 },

    #[error("state out of bounds in cell {cell}: q = {value} outside [{lower}, {upper}]")]
    StateOutOfBounds {
        cell: usize,
        value: f64,
        lower: f64,
        upper: f64,
    },

    #[error("flux input q = {value} outside [0, {upper}] beyond roundoff")]
    FluxInputOutOfBounds { value: f64, upper: f64 },

    #[error("degenerate trace: o(gamma_L) - q^L = {gap} is below 1e-9")]
    DegenerateTrace { gap: f64 },

    #[error("smooth-contact speed formula inapplicable: need q_x^R < o'(gamma_R) < 0, got q_x^R = {qx}, o' = {o_prime}")]
    InapplicableRegime { qx: f64, o_prime: f64 },

    #[error("grid mismatch between fields")]
    GridMismatch,

    #[error("obstacle must be positive on the coincidence region, found o({x}) = {value}")]
    NonPositiveObstacle { x: f64, value: f64 },

    #[error("scenario is not admissible ({0} violations); pass force to run anyway")]
    Inadmissible(usize),
}

pub type Result<T> = std::result::Result<T, Error>;
