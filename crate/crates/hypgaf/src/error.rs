//! Error type shared by every evaluation route.

use std::fmt;

/// Everything that can go wrong while evaluating the variance of the zero
/// count by any of the four routes.
#[derive(Debug, Clone, PartialEq)]
pub enum Error {
    /// An argument lies outside the mathematical domain of the operation.
    Domain(String),
    /// An iterative scheme (quadrature subdivision, series summation)
    /// stopped at its budget with the error estimate still above target.
    ConvergenceFailure {
        /// Relative error actually reached when the budget ran out.
        achieved: f64,
        /// Relative error that was requested.
        required: f64,
    },
    /// A result failed an internal consistency check (residual imaginary
    /// part, root too close to the contour, non-finite intermediate).
    NumericalInstability(String),
    /// The closed-form route only handles positive integer intensities.
    UnsupportedIntensity(f64),
    /// An asymptotic formula was requested outside the regime where the
    /// limit theorem backing it applies.
    RegimeMismatch(String),
    /// The sampled series nearly vanishes somewhere on the counting circle,
    /// so the winding number would be unreliable at this exact radius.
    CircleTooClose,
    /// Phase increments along the counting circle never settled below the
    /// aliasing threshold within the refinement budget.
    RefinementExhausted,
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::Domain(msg) => write!(f, "domain error: {msg}"),
            Error::ConvergenceFailure { achieved, required } => write!(
                f,
                "convergence failure: reached relative error {achieved:.3e}, required {required:.3e}"
            ),
            Error::NumericalInstability(msg) => write!(f, "numerical instability: {msg}"),
            Error::UnsupportedIntensity(l) => write!(
                f,
                "unsupported intensity L = {l}: closed forms need a positive integer"
            ),
            Error::RegimeMismatch(msg) => write!(f, "regime mismatch: {msg}"),
            Error::CircleTooClose => write!(
                f,
                "series nearly vanishes on the counting circle; retry with a perturbed radius"
            ),
            Error::RefinementExhausted => write!(
                f,
                "phase increments on the counting circle did not settle within the refinement budget"
            ),
        }
    }
}

impl std::error::Error for Error {}

/// Convenience alias used throughout the crate.
pub type Result<T> = std::result::Result<T, Error>;
