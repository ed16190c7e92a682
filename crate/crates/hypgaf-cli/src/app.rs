//! Dispatch logic shared by the binary and its tests: method selection,
//! grid expansion, thread resolution, and exit-code mapping.

use crate::record::RunRecord;
use clap::ValueEnum;
use hypgaf::asymptotics::{asymptotic_variance, classify_regime, crossover_variance, RegimeBands};
use hypgaf::mc::{mc_estimate, McConfig};
use hypgaf::quadrature::{expected_count, variance as quad_variance, QuadConfig};
use hypgaf::{closed_form, Error, ModelParams};
use std::time::Instant;

/// Evaluation route selected on the command line.
#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum MethodArg {
    /// Adaptive Gauss-Kronrod quadrature of the exact variance integral.
    Quad,
    /// Elementary closed forms (L = 1, 2); other integers fall through to
    /// the residue sum.
    Closed,
    /// Contour-residue sum (integer L up to 64).
    Residue,
    /// Leading-order law of the matching regime (r >= 0.5 only).
    Asymptotic,
    /// Uniform crossover law near L = 1/2.
    Crossover,
    /// Monte Carlo over sampled zero counts.
    Mc,
}

/// Sweep output format.
#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum FormatArg {
    Csv,
    Json,
}

/// Tuning knobs shared by the `variance` and `sweep` subcommands.
#[derive(Debug, Clone)]
pub struct EvalOptions {
    pub rel_tol: Option<f64>,
    pub max_depth: Option<u32>,
    pub samples: usize,
    pub seed: u64,
    pub trunc_eps: Option<f64>,
}

impl Default for EvalOptions {
    fn default() -> Self {
        EvalOptions {
            rel_tol: None,
            max_depth: None,
            samples: 1000,
            seed: 0,
            trunc_eps: None,
        }
    }
}

fn quad_config(opts: &EvalOptions) -> QuadConfig {
    let mut cfg = QuadConfig::default();
    if let Some(t) = opts.rel_tol {
        cfg.rel_tol = t;
    }
    if let Some(d) = opts.max_depth {
        cfg.max_depth = d;
    }
    cfg
}

fn mc_config(opts: &EvalOptions) -> McConfig {
    let mut cfg = McConfig {
        samples: opts.samples,
        seed: opts.seed,
        ..McConfig::default()
    };
    if let Some(e) = opts.trunc_eps {
        cfg.trunc_eps = e;
    }
    cfg
}

/// Evaluate one parameter point with one method.
pub fn run_one(p: &ModelParams, method: MethodArg, opts: &EvalOptions) -> Result<RunRecord, Error> {
    let start = Instant::now();
    let record = match method {
        MethodArg::Quad => {
            let rep = quad_variance(p, &quad_config(opts))?;
            from_report(p, rep)
        }
        MethodArg::Closed => {
            let rep = closed_form::variance_closed(p)?;
            from_report(p, rep)
        }
        MethodArg::Residue => {
            let rounded = p.l.round();
            if (p.l - rounded).abs() > 1e-9 * p.l.max(1.0) || rounded < 1.0 {
                return Err(Error::UnsupportedIntensity(p.l));
            }
            let l = rounded as u32;
            let integral = closed_form::residue_i(l, p.r)?;
            let omr2 = (1.0 - p.r) * (1.0 + p.r);
            let prefactor = p.l * p.l * p.r.powi(4)
                / (2.0 * std::f64::consts::PI * omr2 * omr2);
            let v = prefactor * integral;
            RunRecord {
                l: p.l,
                r: p.r,
                method: "residue".to_string(),
                expected_count: expected_count(p),
                variance: v,
                err_est_or_ci: Some(1e-12 * l as f64 * v),
                regime: classify_regime(p, &RegimeBands::default()).as_str().to_string(),
                wall_time_ms: 0,
            }
        }
        MethodArg::Asymptotic => {
            let rep = asymptotic_variance(p)?;
            from_report(p, rep)
        }
        MethodArg::Crossover => {
            let rep = crossover_variance(p)?;
            from_report(p, rep)
        }
        MethodArg::Mc => {
            let summary = mc_estimate(p, &mc_config(opts))?;
            RunRecord {
                l: p.l,
                r: p.r,
                method: "mc".to_string(),
                expected_count: summary.mean_hat,
                variance: summary.var_hat,
                err_est_or_ci: Some(0.5 * (summary.var_ci_95[1] - summary.var_ci_95[0])),
                regime: classify_regime(p, &RegimeBands::default()).as_str().to_string(),
                wall_time_ms: 0,
            }
        }
    };
    Ok(RunRecord {
        wall_time_ms: start.elapsed().as_millis() as u64,
        ..record
    })
}

fn from_report(p: &ModelParams, rep: hypgaf::VarianceReport) -> RunRecord {
    RunRecord {
        l: p.l,
        r: p.r,
        method: rep.method.as_str().to_string(),
        expected_count: rep.expected_count,
        variance: rep.variance,
        err_est_or_ci: rep.err_est,
        regime: rep.regime.as_str().to_string(),
        wall_time_ms: 0,
    }
}

/// Parse a geometric radius grid `"A..B"` into `r = 1 - 10^{-k}` for
/// `k = A..=B`.
pub fn parse_r_geom(spec: &str) -> Result<Vec<f64>, String> {
    let (a, b) = spec
        .split_once("..")
        .ok_or_else(|| format!("--r-geom expects \"A..B\", got \"{spec}\""))?;
    let a: u32 = a
        .trim()
        .parse()
        .map_err(|_| format!("--r-geom start \"{a}\" is not a positive integer"))?;
    let b: u32 = b
        .trim()
        .parse()
        .map_err(|_| format!("--r-geom end \"{b}\" is not a positive integer"))?;
    if a == 0 || b < a || b > 15 {
        return Err(format!(
            "--r-geom needs 1 <= A <= B <= 15, got {a}..{b}"
        ));
    }
    Ok((a..=b).map(|k| 1.0 - 10f64.powi(-(k as i32))).collect())
}

/// Thread count from the flag, else `HYPGAF_THREADS`, else the rayon
/// default. The flag always wins; a set but unparsable variable is a usage
/// error only when no flag is given.
pub fn resolve_threads(flag: Option<usize>) -> Result<Option<usize>, String> {
    if let Some(n) = flag {
        if n == 0 {
            return Err("--threads must be positive".to_string());
        }
        return Ok(Some(n));
    }
    match std::env::var("HYPGAF_THREADS") {
        Ok(raw) => {
            let n: usize = raw
                .trim()
                .parse()
                .map_err(|_| format!("HYPGAF_THREADS must be a positive integer, got \"{raw}\""))?;
            if n == 0 {
                return Err("HYPGAF_THREADS must be positive".to_string());
            }
            Ok(Some(n))
        }
        Err(_) => Ok(None),
    }
}

/// Exit code for a failed evaluation: 2 for domain/usage-level rejections,
/// 3 for numerical failures.
pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::Domain(_) | Error::UnsupportedIntensity(_) | Error::RegimeMismatch(_) => 2,
        Error::ConvergenceFailure { .. }
        | Error::NumericalInstability(_)
        | Error::CircleTooClose
        | Error::RefinementExhausted => 3,
    }
}
