//! Linear difference equations with time-varying delay, `x(t) = A x(t − τ(t))`.
//!
//! Exact solutions through the iteration counter `𝐧(t)`, block stepping, hypothesis audits,
//! decay certificates in an adapted norm, push-forward density diagnostics, transport
//! equations reduced to difference equations, and regulated-function classification.

pub mod cli;
pub mod delay;
pub mod error;
pub mod hypotheses;
pub mod kernel;
pub mod matrix;
pub mod measure;
pub mod registry;
pub mod regulated;
pub mod scenario;
pub mod signal;
pub mod solver;
pub mod spectral;
pub mod stability;
pub mod transport;

pub use delay::{DelayKind, DelaySpec, Interpolation, Segment};
pub use error::{Error, Result};
pub use hypotheses::{audit_hypotheses, HypothesisReport, Verdict};
pub use kernel::{iterate_sigma, iteration_count, largest_delay, n_of};
pub use matrix::SystemMatrix;
pub use scenario::{NormRequest, Scenario, Window};
pub use signal::Signal;
pub use solver::{solve_representation, solve_representation_trajectory, solve_stepping, Trajectory};
