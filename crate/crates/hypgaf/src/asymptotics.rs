//! Asymptotic laws of the zero-count variance as `r -> 1`, in every
//! intensity regime, plus the regime classifier.
//!
//! The transition sits at `L = 1/2`:
//!
//! * supercritical (`L > 1/2`): `V ~ c_L / (1-r)` with
//!   `c_L = (L^2/(8 sqrt(pi))) sum_n Gamma(Ln - 1/2)/Gamma(Ln + 1)`,
//!   equivalently `(L^2/(2 pi)) INT_0^inf x^2 / (((1+x^2)^L - 1)(1+x^2)) dx`;
//! * critical (`L = 1/2`): `V ~ (1/(8 pi)) log(1/(1-r)) / (1-r)`;
//! * subcritical (`L < 1/2`): `V ~ c_L / (1-r)^{2-2L}` with
//!   `c_L = L^2 Gamma(1/2-L) / (4 sqrt(pi) Gamma(1-L))`.
//!
//! The crossover evaluator carries the uniform near-transition formulas that
//! degenerate into all three laws.

use crate::error::{Error, Result};
use crate::gk;
use crate::params::{Method, ModelParams, VarianceReport};
use crate::quadrature::{expected_count, QuadConfig};
use crate::specfun::{gamma_ratio, ln_gamma, zeta_tail, Accuracy};
use serde::{Deserialize, Serialize};

/// Which part of parameter space `(L, r)` sits in.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Regime {
    /// `L` above the transition: variance grows like `1/(1-r)`.
    #[serde(rename = "supercritical")]
    Supercritical,
    /// `L` at the transition (within the critical band).
    #[serde(rename = "critical")]
    Critical,
    /// `L` below the transition: growth `(1-r)^{2L-2}`.
    #[serde(rename = "subcritical")]
    Subcritical,
    /// `L` so large the sqrt(L) law applies on top of supercriticality.
    #[serde(rename = "large_L")]
    LargeL,
    /// Just above the transition (crossover band, opt-in).
    #[serde(rename = "near_half_plus")]
    NearHalfPlus,
    /// Just below the transition (crossover band, opt-in).
    #[serde(rename = "near_half_minus")]
    NearHalfMinus,
    /// Tiny `L` with `L/(1-r)` large: the doubly-uniform small-L law.
    #[serde(rename = "small_L")]
    SmallL,
}

impl Regime {
    /// Stable lowercase tag used in CSV output.
    pub fn as_str(&self) -> &'static str {
        match self {
            Regime::Supercritical => "supercritical",
            Regime::Critical => "critical",
            Regime::Subcritical => "subcritical",
            Regime::LargeL => "large_L",
            Regime::NearHalfPlus => "near_half_plus",
            Regime::NearHalfMinus => "near_half_minus",
            Regime::SmallL => "small_L",
        }
    }
}

/// Thresholds for [`classify_regime`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RegimeBands {
    /// Half-width of the critical band around `L = 1/2`.
    pub critical: f64,
    /// `L` at or above this is tagged `large_L`.
    pub large_l: f64,
    /// `L` at or below this is a candidate for `small_L`.
    pub small_l: f64,
    /// `small_L` additionally requires `L/(1-r)` at least this large
    /// (the regime needs the expected count to diverge).
    pub small_l_min_ratio: f64,
    /// Half-width of the opt-in near-transition bands; `0` disables the
    /// `near_half_plus` / `near_half_minus` tags.
    pub near: f64,
}

impl Default for RegimeBands {
    fn default() -> Self {
        RegimeBands {
            critical: 1e-12,
            large_l: 100.0,
            small_l: 0.1,
            small_l_min_ratio: 10.0,
            near: 0.0,
        }
    }
}

/// How a value of the asymptotic constant `c_L` was produced.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ConstantForm {
    /// Supercritical integral representation.
    Integral,
    /// Supercritical Gamma-ratio series.
    GammaSeries,
    /// Subcritical closed form in Gamma functions.
    SubcriticalGamma,
}

/// The constant `c_L` of the fixed-intensity limit laws.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AsymptoticConstant {
    /// Value of `c_L`; strictly positive.
    pub c: f64,
    /// Representation that produced it.
    pub form: ConstantForm,
}

const HALF_BAND: f64 = 1e-12;

/// Supercritical `c_L` from the Gamma-ratio series
/// `(L^2/(8 sqrt(pi))) sum_{n>=1} Gamma(Ln - 1/2)/Gamma(Ln + 1)`.
///
/// Terms decay like `(Ln)^{-3/2}`; the sum is cut at an `N` chosen from the
/// requested tolerance and finished with a two-term Euler-Maclaurin tail of
/// the `(Ln)^{-3/2} + (3/8)(Ln)^{-5/2}` expansion.
pub fn c_supercritical_series(l: f64, acc: &Accuracy) -> Result<AsymptoticConstant> {
    if !(l > 0.5) || !l.is_finite() {
        return Err(Error::Domain(format!(
            "supercritical constant needs L > 1/2, got {l}"
        )));
    }
    // The dropped next-order term of the tail behaves like
    // ~ 1/(2.6 L^2 N^{5/2}) relative to c_L; invert for N.
    let n_needed = (1.0 / (2.6 * acc.rel_tol * l * l)).powf(0.4).ceil();
    let n = (n_needed as usize).max(100);
    if n > acc.max_terms {
        return Err(Error::ConvergenceFailure {
            achieved: 1.0 / (2.6 * l * l * (acc.max_terms as f64).powf(2.5)),
            required: acc.rel_tol,
        });
    }
    // Ascending term magnitudes: sum from n = N down to 1.
    let mut sum = 0.0f64;
    for k in (1..=n).rev() {
        let a = l * k as f64;
        sum += (ln_gamma(a - 0.5)? - ln_gamma(a + 1.0)?).exp();
    }
    let tail = l.powf(-1.5) * zeta_tail(1.5, n) + 0.375 * l.powf(-2.5) * zeta_tail(2.5, n);
    let c = l * l / (8.0 * std::f64::consts::PI.sqrt()) * (sum + tail);
    Ok(AsymptoticConstant {
        c,
        form: ConstantForm::GammaSeries,
    })
}

/// Supercritical `c_L` from the integral representation
/// `(L^2/(2 pi)) INT_0^inf x^2 / (((1+x^2)^L - 1)(1+x^2)) dx`.
///
/// `[0, 1]` is integrated directly (the integrand tends to `1/L` at zero);
/// `[1, inf)` is mapped by `x = e^s`, under which the algebraic tail
/// `x^{1-2L}` becomes a clean exponential decay.
pub fn c_supercritical_integral(l: f64, cfg: &QuadConfig) -> Result<AsymptoticConstant> {
    if !(l > 0.5) || !l.is_finite() {
        return Err(Error::Domain(format!(
            "supercritical constant needs L > 1/2, got {l}"
        )));
    }
    cfg.validate()?;

    let inner = |x: f64| {
        if x == 0.0 {
            return 1.0 / l;
        }
        let x2 = x * x;
        x2 / ((l * x2.ln_1p()).exp_m1() * (1.0 + x2))
    };
    let head = gk::integrate_adaptive(inner, &[0.0, 1.0], cfg.rel_tol, 0.0, cfg.max_depth)?;

    // Tail decays like exp(s (1 - 2L)); pick the truncation point so the
    // remainder is negligible at double precision, and evaluate in log
    // space once e^{2s} would overflow intermediate terms.
    let s_max = (47.0 / (2.0 * l - 1.0)).clamp(20.0, 5000.0);
    let mut seeds = vec![0.0];
    let mut s = 1.0;
    while s < s_max {
        seeds.push(s);
        s *= 2.0;
    }
    seeds.push(s_max);
    let tail_f = |s: f64| {
        if s <= 15.0 {
            let x = s.exp();
            let x2 = x * x;
            x * x2 / ((l * x2.ln_1p()).exp_m1() * (1.0 + x2))
        } else {
            // ln of x^3 / ((e^u - 1)(1 + x^2)) with u = L ln(1 + e^{2s}).
            let u = l * (2.0 * s + (-2.0 * s).exp().ln_1p());
            let ln_h = s - u - (-(-u).exp()).ln_1p() - (-2.0 * s).exp().ln_1p();
            ln_h.exp()
        }
    };
    let tail = gk::integrate_adaptive(tail_f, &seeds, cfg.rel_tol, 0.0, cfg.max_depth)?;

    let c = l * l / (2.0 * std::f64::consts::PI) * (head.value + tail.value);
    Ok(AsymptoticConstant {
        c,
        form: ConstantForm::Integral,
    })
}

/// Subcritical `c_L = L^2 Gamma(1/2 - L) / (4 sqrt(pi) Gamma(1 - L))` for
/// `0 < L < 1/2`.
pub fn c_subcritical(l: f64) -> Result<AsymptoticConstant> {
    if !(l > 0.0 && l < 0.5) {
        return Err(Error::Domain(format!(
            "subcritical constant needs 0 < L < 1/2, got {l}"
        )));
    }
    let c = l * l / (4.0 * std::f64::consts::PI.sqrt()) * gamma_ratio(0.5 - l, 1.0 - l)?;
    Ok(AsymptoticConstant {
        c,
        form: ConstantForm::SubcriticalGamma,
    })
}

/// Fixed-intensity limit law, valid as `r -> 1`:
/// `c_L/(1-r)` above the transition, the log law at it, and
/// `c_L/(1-r)^{2-2L}` below. Refuses `r < 0.5` rather than extrapolate.
pub fn asymptotic_variance(p: &ModelParams) -> Result<VarianceReport> {
    if p.r < 0.5 {
        return Err(Error::Domain(format!(
            "asymptotic law is an r -> 1 statement; refusing r = {} < 0.5",
            p.r
        )));
    }
    let omr = 1.0 - p.r;
    let variance = if (p.l - 0.5).abs() <= HALF_BAND {
        (1.0 / omr).ln() / (8.0 * std::f64::consts::PI * omr)
    } else if p.l > 0.5 {
        c_supercritical_series(p.l, &Accuracy::default())?.c / omr
    } else {
        c_subcritical(p.l)?.c / omr.powf(2.0 - 2.0 * p.l)
    };
    Ok(VarianceReport {
        expected_count: expected_count(p),
        variance,
        method: Method::Asymptotic,
        regime: classify_regime(p, &RegimeBands::default()),
        err_est: None,
    })
}

/// Uniform crossover formulas near the transition, all evaluated with
/// `expm1`/`log1p` so they degenerate smoothly into the critical log law:
///
/// * `L > 1/2`:  `(1 - (1-r)^{2L-1}) / (8 pi (2L-1) (1-r))`;
/// * `0.1 < L < 1/2`:  `(1 - (1-r)^{1-2L}) / (8 pi (1-2L) (1-r)^{2-2L})`;
/// * `L <= 0.1` (needs `L/(1-r) >= 10`):
///   `(L^2/4) (1-r)^{2L-2} / (1 - (1-r)^{2L})`;
/// * inside the critical band: the log law itself.
pub fn crossover_variance(p: &ModelParams) -> Result<VarianceReport> {
    let omr = 1.0 - p.r;
    let ln_omr = omr.ln();
    let eight_pi = 8.0 * std::f64::consts::PI;
    let (variance, regime) = if (p.l - 0.5).abs() <= HALF_BAND {
        ((-ln_omr) / (eight_pi * omr), Regime::Critical)
    } else if p.l <= 0.1 {
        let ratio = p.l / omr;
        if ratio < 10.0 {
            return Err(Error::RegimeMismatch(format!(
                "small-L crossover needs L/(1-r) >= 10 (expected count must be large), got {ratio:.3}"
            )));
        }
        let v = (p.l * p.l / 4.0) * omr.powf(2.0 * p.l - 2.0)
            / (-(2.0 * p.l * ln_omr).exp_m1());
        (v, Regime::SmallL)
    } else if p.l > 0.5 {
        let a = 2.0 * p.l - 1.0;
        let v = (-(a * ln_omr).exp_m1()) / (eight_pi * a * omr);
        (v, Regime::NearHalfPlus)
    } else {
        let a = 1.0 - 2.0 * p.l;
        let v = (-(a * ln_omr).exp_m1()) / (eight_pi * a * omr.powf(2.0 - 2.0 * p.l));
        (v, Regime::NearHalfMinus)
    };
    Ok(VarianceReport {
        expected_count: expected_count(p),
        variance,
        method: Method::Crossover,
        regime,
        err_est: None,
    })
}

/// Deterministic regime tag for `(L, r)`.
///
/// `large_L` and `small_L` take precedence as the more specific laws; the
/// near-transition tags appear only when `bands.near > 0`.
pub fn classify_regime(p: &ModelParams, bands: &RegimeBands) -> Regime {
    if p.l >= bands.large_l {
        return Regime::LargeL;
    }
    if p.l <= bands.small_l && p.l / (1.0 - p.r) >= bands.small_l_min_ratio {
        return Regime::SmallL;
    }
    let d = p.l - 0.5;
    if d.abs() <= bands.critical {
        return Regime::Critical;
    }
    if bands.near > 0.0 && d.abs() <= bands.near {
        return if d > 0.0 {
            Regime::NearHalfPlus
        } else {
            Regime::NearHalfMinus
        };
    }
    if d > 0.0 {
        Regime::Supercritical
    } else {
        Regime::Subcritical
    }
}
