use thiserror::Error;

/// Errors produced by the process model, transforms, solvers and simulators.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid state window [{n_min}, {n_max}]: {reason}")]
    InvalidWindow {
        n_min: i64,
        n_max: i64,
        reason: &'static str,
    },

    #[error("state {n} lies outside the rate table domain [{n_min}, {n_max}]")]
    OutOfDomain { n: i64, n_min: i64, n_max: i64 },

    #[error("non-positive rates at states {states:?}")]
    NonPositiveRates { states: Vec<i64> },

    #[error("invalid parameter `{name}` = {value}: {reason}")]
    InvalidParameter {
        name: &'static str,
        value: f64,
        reason: &'static str,
    },

    #[error(
        "equal birth and death ratio (c = 1): the recurrence has no positive non-constant solution"
    )]
    NoNonConstantSolution,

    #[error("initial increment d_0 = 0 gives a constant sequence, which is not strictly monotone")]
    DegenerateIncrement,

    #[error("nu sequence is not positive at state {state} (value {value})")]
    NuNotPositive { state: i64, value: f64 },

    #[error("nu sequence is not monotone at state {state}")]
    NuNotMonotone { state: i64 },

    #[error("nu sequence overflows at state {state}")]
    NuOverflow { state: i64 },

    #[error("nu sequence does not solve the recurrence at state {state}: residual {residual:e} exceeds {bound:e}")]
    IncompatibleNu {
        state: i64,
        residual: f64,
        bound: f64,
    },

    #[error("predicted probability {value} exceeds 1: inconsistent nu/process pairing")]
    InconsistentCrossing { value: f64 },

    #[error("first-passage quantities need distinct start and target states (both {state})")]
    SameState { state: i64 },

    #[error("domain error: {0}")]
    Domain(String),

    #[error("Bessel series for order {order} at {x} did not converge within {terms} terms")]
    BesselNotConverged { order: i64, x: f64, terms: usize },

    #[error("step size underflow at t = {t}: the system is too stiff; widen the window or shorten the horizon")]
    StepSizeUnderflow { t: f64 },

    #[error("truncation deficit {deficit:e} exceeds {limit:e}: window too small")]
    WindowTooSmall { deficit: f64, limit: f64 },

    #[error("time grid error: {0}")]
    Grid(String),
}

pub type Result<T> = std::result::Result<T, Error>;
