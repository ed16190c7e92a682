//! Core parameter and report types shared by all evaluation routes.

use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};

/// The two knobs of the model: intensity `L > 0` and disc radius
/// `r` in `(0, 1)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModelParams {
    /// Intensity of the zero process; the mean density is `L/pi` times
    /// hyperbolic measure.
    pub l: f64,
    /// Radius of the centered disc whose zero count is studied.
    pub r: f64,
}

impl ModelParams {
    /// Validating constructor.
    pub fn new(l: f64, r: f64) -> Result<Self> {
        if !l.is_finite() || l <= 0.0 {
            return Err(Error::Domain(format!(
                "intensity L must be a positive finite real, got {l}"
            )));
        }
        if !r.is_finite() || !(r > 0.0 && r < 1.0) {
            return Err(Error::Domain(format!(
                "radius r must lie strictly inside (0, 1), got {r}"
            )));
        }
        Ok(ModelParams { l, r })
    }

    /// `1 - r^2`, computed as `(1-r)(1+r)` to keep full precision as
    /// `r -> 1`.
    pub(crate) fn one_minus_r2(&self) -> f64 {
        (1.0 - self.r) * (1.0 + self.r)
    }
}

/// Which route produced a variance figure.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    /// Adaptive quadrature of the exact integral.
    Quadrature,
    /// Exact elementary formula (integer intensities 1 and 2).
    ClosedForm,
    /// Contour-residue sum (general positive integer intensity).
    Residue,
    /// Fixed-intensity limit law as `r -> 1`.
    Asymptotic,
    /// Uniform near-transition crossover formula.
    Crossover,
    /// Monte Carlo simulation of the zero count.
    MonteCarlo,
}

impl Method {
    /// Short lowercase tag used in CSV output and CLI flags.
    pub fn as_str(&self) -> &'static str {
        match self {
            Method::Quadrature => "quad",
            Method::ClosedForm => "closed",
            Method::Residue => "residue",
            Method::Asymptotic => "asymptotic",
            Method::Crossover => "crossover",
            Method::MonteCarlo => "mc",
        }
    }
}

/// A mean/variance answer together with how it was obtained and how much it
/// can be trusted.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VarianceReport {
    /// `E[n_L(r)] = L r^2 / (1 - r^2)`, exact in all routes.
    pub expected_count: f64,
    /// `V[n_L(r)]` by the route in `method`.
    pub variance: f64,
    /// Route that produced `variance`.
    pub method: Method,
    /// Parameter regime of `(L, r)` under the default classification bands.
    pub regime: crate::asymptotics::Regime,
    /// Error bound on `variance` where the route provides one
    /// (quadrature, closed forms); `None` for pure limit laws.
    pub err_est: Option<f64>,
}
