//! Variance of the zero count of the hyperbolic Gaussian analytic function.
//!
//! The hyperbolic GAF with intensity `L > 0` is the random power series
//!
//! ```text
//! f_L(z) = sum_{n >= 0} a_n binom(L + n - 1, n)^{1/2} z^n ,
//! ```
//!
//! with i.i.d. standard complex Gaussian coefficients `a_n`; it is the
//! Gaussian process on the unit disc with covariance kernel
//! `(1 - z conj(w))^{-L}`. This crate computes the variance of the number
//! of its zeros in the centred disc of radius `r < 1` by four mutually
//! verifying routes:
//!
//! * [`quadrature::variance`] — adaptive Gauss–Kronrod evaluation of the
//!   exact one-dimensional variance integral (the reference route);
//! * [`closed_form::variance_closed`] — elementary formulas at `L = 1, 2`
//!   and contour-residue sums at other integer intensities;
//! * [`asymptotics`] — the `r -> 1` laws on either side of the `L = 1/2`
//!   phase transition, the critical log law, and the regime classifier;
//! * [`mc`] — direct Monte Carlo: sample truncated series, count zeros by
//!   winding number, and compare moments.
//!
//! The expected count is `E[n_L(r)] = L r^2 / (1 - r^2)` for every `L`,
//! smooth in `L`; the variance instead changes character at `L = 1/2`:
//! for `L > 1/2` it grows like `c_L / (1 - r)` with a constant `c_L`
//! analytic in `L`, for `L < 1/2` like `c_L (1 - r)^{2L - 2}`, and exactly
//! at `L = 1/2` like `ln(1/(1-r)) / (8 pi (1 - r))`.
//!
//! ```
//! use hypgaf::{quadrature, ModelParams, QuadConfig};
//!
//! let p = ModelParams::new(1.0, 0.9).unwrap();
//! let report = quadrature::variance(&p, &QuadConfig::default()).unwrap();
//! // Exact value: r^2 / (1 - r^4).
//! let exact = 0.81 / (1.0 - 0.9f64.powi(4));
//! assert!((report.variance - exact).abs() <= 1e-10 * exact);
//! ```

pub mod asymptotics;
pub mod closed_form;
pub mod error;
mod gk;
pub mod mc;
pub mod params;
pub mod quadrature;
pub mod selftest;
pub mod specfun;

pub use asymptotics::{Regime, RegimeBands};
pub use error::{Error, Result};
pub use mc::{McConfig, McSummary};
pub use params::{Method, ModelParams, VarianceReport};
pub use quadrature::{IntegralForm, IntegralResult, QuadConfig};
pub use specfun::Accuracy;
