use thiserror::Error;

/// Errors raised by the library. Out-of-domain iterates are not errors.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid input: {0}")]
    Invalid(String),
    #[error("delay evaluated outside its domain at t = {0}")]
    Domain(f64),
    #[error("delay evaluation produced a non-positive value {value} at t = {t}")]
    NonPositiveDelay { t: f64, value: f64 },
    #[error("inf of the delay on [0, {t}] is not positive; the iteration counter is undefined")]
    NoPositiveInfimum { t: f64 },
    #[error("orbit of t = {t} exceeded the step cap {cap}")]
    StepCap { t: f64, cap: usize },
    #[error("history requested at s = {s}, outside the stored support starting at {left}")]
    HistoryOutOfRange { s: f64, left: f64 },
    #[error("stepping reached s = {s}, which is not yet constructed (block starts at {block_start})")]
    OrderViolation { s: f64, block_start: f64 },
    #[error("state-dependent delay returned {value} outside [{min}, {max}] at t = {t}")]
    StateDelayOutOfRange { t: f64, value: f64, min: f64, max: f64 },
    #[error("eigenvalue iteration did not converge")]
    NoConvergence,
    #[error("matrix has no nonzero eigenvalue")]
    Nilpotent,
    #[error("no certificate: {0}")]
    NoCertificate(String),
    #[error("root bracket failed: {0}")]
    Bracket(String),
    #[error("window [{lo}, {hi}] exceeds the available history")]
    Window { lo: f64, hi: f64 },
}

pub type Result<T> = std::result::Result<T, Error>;
