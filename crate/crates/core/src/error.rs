//! Crate-wide error type.

use thiserror::Error;

/// Errors produced by the solver library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("grid mismatch between trajectories: {0}")]
    GridMismatch(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("semigroup time must be nonnegative, got {0}")]
    NegativeTime(f64),

    #[error("period must be positive, got {0}")]
    NonPositivePeriod(f64),

    #[error("fractional order {order} not defined under the {convention} convention")]
    UnsupportedOrder { order: f64, convention: &'static str },

    #[error("alpha must lie in {range}, got {alpha}")]
    AlphaOutOfRange { alpha: f64, range: &'static str },

    #[error("nonlinearity produced a non-finite value at x = {x}, t = {t}")]
    HandleOutput { x: f64, t: f64 },

    #[error("g must vanish at both boundaries: g({x}, {t}) = {value}")]
    BoundaryViolation { x: f64, t: f64, value: f64 },

    #[error("direct AG evaluation requires g_x and g_xx handles")]
    MissingDerivativeHandles,

    #[error("evaluation failed at time index {index}: {source}")]
    Evaluation {
        index: usize,
        #[source]
        source: Box<Error>,
    },

    #[error("off-grid sample at t = {0} under the grid-aligned interpolation rule")]
    OffGridSample(f64),

    #[error("Picard iteration diverged at iteration {iteration} (norm {norm:.3e})")]
    Diverged { iteration: usize, norm: f64 },

    #[error("time step {dt} exceeds the delay bound {bound}")]
    StepBound { dt: f64, bound: f64 },

    #[error("history spans {duration} but the largest delay is {required}")]
    HistoryTooShort { duration: f64, required: f64 },

    #[error("non-finite state at t = {0}")]
    NonFiniteState(f64),

    #[error("manufactured recipe references mode {mode} above n_modes = {n_modes}")]
    RecipeMode { mode: usize, n_modes: usize },

    #[error("unknown problem {0:?}; known: heat_decay, example51, manufactured_linear, manufactured_neutral, manufactured")]
    UnknownProblem(String),

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
