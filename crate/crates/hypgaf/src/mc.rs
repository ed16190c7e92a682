//! Monte Carlo ground truth: sample the hyperbolic GAF as a truncated
//! random series, count zeros in `|z| < r` by the argument principle, and
//! estimate the mean and variance of the count with confidence intervals.
//!
//! The series is truncated where the kernel diagonal
//! `K_L(z, z) = (1 - r^2)^{-L}` has absorbed all but a `trunc_eps` fraction
//! of its mass, so the discretization error is tied directly to the
//! covariance structure of the process. Zeros are counted by the winding
//! number of the sampled polynomial around the circle `|z| = r`, refined
//! until every phase increment is unambiguous.

use crate::error::{Error, Result};
use crate::params::ModelParams;
use crate::quadrature::expected_count;
use crate::specfun;
use num_complex::Complex64;
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

/// One sampled path of the truncated GAF.
#[derive(Debug, Clone)]
pub struct GafSample {
    /// Coefficients `c_n = a_n * binom(L+n-1, n)^{1/2}`, `n = 0..=trunc_order`.
    pub coeffs: Vec<Complex64>,
    /// Truncation order `N` (the degree of the sampled polynomial).
    pub trunc_order: usize,
    /// Parameters the sample was drawn for.
    pub params: ModelParams,
    /// Zero count in `|z| < r`, filled in by [`count_zeros`] callers.
    pub zero_count: Option<u32>,
}

/// Monte Carlo controls.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct McConfig {
    /// Number of independent samples (at least 2).
    pub samples: usize,
    /// Base seed; sample `i` uses RNG stream `i + 1` of this seed.
    pub seed: u64,
    /// Relative kernel-tail tolerance for the truncation order, in `(0, 1e-3]`.
    pub trunc_eps: f64,
    /// Initial number of circle points for the winding count.
    pub circle_points_init: usize,
    /// Maximum number of point-doubling refinements.
    pub max_refine: u32,
}

impl Default for McConfig {
    fn default() -> Self {
        McConfig {
            samples: 1000,
            seed: 0,
            trunc_eps: 1e-10,
            circle_points_init: 256,
            max_refine: 14,
        }
    }
}

impl McConfig {
    /// Check the invariants `samples >= 2`, `trunc_eps in (0, 1e-3]`,
    /// `circle_points_init >= 8`.
    pub fn validate(&self) -> Result<()> {
        if self.samples < 2 {
            return Err(Error::Domain(format!(
                "need at least 2 samples for a variance estimate, got {}",
                self.samples
            )));
        }
        if !(self.trunc_eps > 0.0 && self.trunc_eps <= 1e-3) {
            return Err(Error::Domain(format!(
                "trunc_eps must lie in (0, 1e-3], got {}",
                self.trunc_eps
            )));
        }
        if self.circle_points_init < 8 {
            return Err(Error::Domain(format!(
                "circle_points_init must be at least 8, got {}",
                self.circle_points_init
            )));
        }
        Ok(())
    }
}

/// Moment estimates from a Monte Carlo run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct McSummary {
    /// Number of samples actually aggregated.
    pub n_samples: usize,
    /// Sample mean of the zero count.
    pub mean_hat: f64,
    /// Unbiased sample variance of the zero count.
    pub var_hat: f64,
    /// 95% normal-approximation confidence interval for the mean.
    pub mean_ci_95: [f64; 2],
    /// 95% confidence interval for the variance, via the fourth central moment.
    pub var_ci_95: [f64; 2],
    /// Base seed the run used.
    pub seed: u64,
    /// Truncation order of the sampled series.
    pub trunc_order: usize,
    /// Set when the expected count is below `1e-4`: the run is dominated by
    /// the zero-count-zero event and the variance interval is unreliable.
    pub mean_dominated: bool,
}

/// Natural log of the coefficient standard deviation,
/// `(1/2) ln binom(L+n-1, n) = (1/2)(ln G(L+n) - ln G(n+1) - ln G(L))`.
///
/// # Panics
/// If `l` is not strictly positive.
pub fn log_coeff_weight(l: f64, n: u32) -> f64 {
    assert!(l > 0.0 && l.is_finite(), "intensity must be positive");
    let nf = n as f64;
    let a = specfun::ln_gamma(l + nf).expect("l + n > 0");
    let b = specfun::ln_gamma(nf + 1.0).expect("n + 1 >= 1");
    let c = specfun::ln_gamma(l).expect("l > 0");
    0.5 * (a - b - c)
}

/// Smallest `N` with `sum_{n > N} binom(L+n-1, n) r^{2n} <= trunc_eps * (1-r^2)^{-L}`,
/// i.e. the truncated kernel diagonal captures all but `trunc_eps` of the
/// variance of `f_L` on `|z| = r`.
///
/// The tail is bounded by the ratio test: with `t_n` the current term and
/// `q_n = (L+n)/(n+1) r^2` the next term ratio, every later ratio is at most
/// `Q = max(q_n, r^2)` (ratios decrease towards `r^2` for `L >= 1` and
/// increase towards it for `L < 1`), so the tail after `t_n` is at most
/// `t_n q_n / (1 - Q)`. Runs in log space to survive `r` near 1.
pub fn truncation_order(p: &ModelParams, trunc_eps: f64) -> Result<usize> {
    if !(trunc_eps > 0.0 && trunc_eps <= 1e-3) {
        return Err(Error::Domain(format!(
            "trunc_eps must lie in (0, 1e-3], got {trunc_eps}"
        )));
    }
    let r2 = p.r * p.r;
    // ln of eps * (1-r^2)^{-L}.
    let ln_target = trunc_eps.ln() - p.l * p.one_minus_r2().ln();

    let mut ln_t = 0.0; // ln t_0, t_0 = 1
    let mut n: usize = 0;
    loop {
        let q = (p.l + n as f64) / (n as f64 + 1.0) * r2;
        let big_q = q.max(r2);
        let ln_tail_bound = ln_t + q.ln() - (-big_q).ln_1p();
        if ln_tail_bound <= ln_target {
            return Ok(n);
        }
        ln_t += q.ln();
        n += 1;
        if n > 100_000_000 {
            return Err(Error::ConvergenceFailure {
                achieved: (ln_tail_bound - ln_target).exp() * trunc_eps,
                required: trunc_eps,
            });
        }
    }
}

/// Draw one truncated GAF path of degree `trunc_order` from `rng`.
///
/// Each `a_n` is a standard complex Gaussian — independent real and
/// imaginary parts of mean 0 and variance 1/2, so `E|a_n|^2 = 1` — scaled
/// by `exp(log_coeff_weight(L, n))`. The draw order (real then imaginary,
/// `n` ascending) is part of the reproducibility contract.
pub fn sample_gaf<R: Rng + ?Sized>(p: &ModelParams, trunc_order: usize, rng: &mut R) -> GafSample {
    let scale = std::f64::consts::FRAC_1_SQRT_2;
    let coeffs = (0..=trunc_order as u32)
        .map(|n| {
            let re: f64 = rng.sample(StandardNormal);
            let im: f64 = rng.sample(StandardNormal);
            let weight = log_coeff_weight(p.l, n).exp();
            Complex64::new(re * scale * weight, im * scale * weight)
        })
        .collect();
    GafSample {
        coeffs,
        trunc_order,
        params: *p,
        zero_count: None,
    }
}

/// Count the zeros of the sampled polynomial in `|z| < r` by the argument
/// principle: evaluate on `M` circle points (Horner), sum the phase
/// increments, and accept once every increment has magnitude below `pi/2`,
/// doubling `M` up to `cfg.max_refine` times otherwise.
pub fn count_zeros(s: &GafSample, r: f64, cfg: &McConfig) -> Result<u32> {
    if !(r > 0.0 && r < 1.0) {
        return Err(Error::Domain(format!(
            "winding contour must satisfy 0 < r < 1, got {r}"
        )));
    }
    let mut m = cfg.circle_points_init.max(8);
    for _ in 0..=cfg.max_refine {
        let values: Vec<Complex64> = (0..m)
            .map(|j| {
                let z = Complex64::from_polar(r, 2.0 * std::f64::consts::PI * j as f64 / m as f64);
                let mut f = Complex64::new(0.0, 0.0);
                for c in s.coeffs.iter().rev() {
                    f = f * z + c;
                }
                f
            })
            .collect();

        let mut min_mod = f64::INFINITY;
        let mut max_mod = 0.0f64;
        for v in &values {
            let n = v.norm();
            min_mod = min_mod.min(n);
            max_mod = max_mod.max(n);
        }
        if min_mod < 1e-12 * max_mod {
            return Err(Error::CircleTooClose);
        }

        let mut sum = 0.0;
        let mut resolved = true;
        for j in 0..m {
            let inc = (values[(j + 1) % m] * values[j].conj()).arg();
            if inc.abs() >= std::f64::consts::FRAC_PI_2 {
                resolved = false;
                break;
            }
            sum += inc;
        }
        if resolved {
            let winding = sum / (2.0 * std::f64::consts::PI);
            let rounded = winding.round();
            if (winding - rounded).abs() > 1e-6 * (1.0 + winding.abs()) {
                return Err(Error::NumericalInstability(format!(
                    "phase increments summed to {winding} turns, far from an integer"
                )));
            }
            if rounded < 0.0 {
                return Err(Error::NumericalInstability(format!(
                    "negative winding number {rounded} for an analytic function"
                )));
            }
            return Ok(rounded as u32);
        }
        m *= 2;
    }
    Err(Error::RefinementExhausted)
}

/// Count zeros with the standard retry policy: on [`Error::CircleTooClose`]
/// shrink the contour by a factor `1 - 1e-9` and try again, up to three
/// retries; all other errors propagate immediately.
fn count_with_retries(s: &GafSample, cfg: &McConfig) -> Result<u32> {
    let mut r = s.params.r;
    let mut last = Err(Error::CircleTooClose);
    for _ in 0..4 {
        last = count_zeros(s, r, cfg);
        match last {
            Err(Error::CircleTooClose) => r *= 1.0 - 1e-9,
            _ => return last,
        }
    }
    last
}

/// Run `cfg.samples` independent draws and summarize the zero counts.
///
/// Sample `i` always uses stream `i + 1` of the base seed, so the summary
/// is bitwise reproducible regardless of how the work is scheduled across
/// threads; counts are aggregated in sample order by a single-threaded
/// one-pass accumulator of the first four moments.
pub fn mc_estimate(p: &ModelParams, cfg: &McConfig) -> Result<McSummary> {
    cfg.validate()?;
    let trunc_order = truncation_order(p, cfg.trunc_eps)?;

    let counts: Vec<u32> = (0..cfg.samples)
        .into_par_iter()
        .map(|i| {
            let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
            rng.set_stream(i as u64 + 1);
            let sample = sample_gaf(p, trunc_order, &mut rng);
            count_with_retries(&sample, cfg)
        })
        .collect::<Result<_>>()?;

    // One-pass mean and central moments M2..M4 (stable update formulas).
    let mut n = 0.0f64;
    let mut mean = 0.0f64;
    let mut m2 = 0.0f64;
    let mut m3 = 0.0f64;
    let mut m4 = 0.0f64;
    for &c in &counts {
        let x = c as f64;
        let n1 = n;
        n += 1.0;
        let delta = x - mean;
        let delta_n = delta / n;
        let delta_n2 = delta_n * delta_n;
        let term1 = delta * delta_n * n1;
        mean += delta_n;
        m4 += term1 * delta_n2 * (n * n - 3.0 * n + 3.0) + 6.0 * delta_n2 * m2 - 4.0 * delta_n * m3;
        m3 += term1 * delta_n * (n - 2.0) - 3.0 * delta_n * m2;
        m2 += term1;
    }
    let nf = counts.len() as f64;
    let var_hat = m2 / (nf - 1.0);
    let mean_half = 1.96 * (var_hat / nf).sqrt();
    // Var(s^2) ~ (m4 - s^4 (n-3)/(n-1)) / n with m4 the central fourth moment.
    let m4_hat = m4 / nf;
    let var_of_var = (m4_hat - var_hat * var_hat * (nf - 3.0) / (nf - 1.0)) / nf;
    let var_half = 1.96 * var_of_var.max(0.0).sqrt();

    Ok(McSummary {
        n_samples: counts.len(),
        mean_hat: mean,
        var_hat,
        mean_ci_95: [mean - mean_half, mean + mean_half],
        var_ci_95: [var_hat - var_half, var_hat + var_half],
        seed: cfg.seed,
        trunc_order,
        mean_dominated: expected_count(p) < 1e-4,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn params(l: f64, r: f64) -> ModelParams {
        ModelParams::new(l, r).unwrap()
    }

    fn poly_sample(coeffs: Vec<Complex64>, r: f64) -> GafSample {
        let n = coeffs.len() - 1;
        GafSample {
            coeffs,
            trunc_order: n,
            params: params(1.0, r),
            zero_count: None,
        }
    }

    fn re(x: f64) -> Complex64 {
        Complex64::new(x, 0.0)
    }

    #[test]
    fn log_coeff_weight_values() {
        // L = 1: binom(n, n) = 1 for every n.
        for n in [0, 1, 5, 40] {
            assert!(log_coeff_weight(1.0, n).abs() < 1e-13);
        }
        // binom(4, 3) = 4.
        assert_relative_eq!(
            log_coeff_weight(2.0, 3),
            std::f64::consts::LN_2,
            max_relative = 1e-13
        );
        // binom(1.5, 2) = G(2.5)/(G(3) G(0.5)) = 3/8.
        assert_relative_eq!(
            log_coeff_weight(0.5, 2),
            -0.49041462650586311843,
            max_relative = 1e-13
        );
    }

    #[test]
    fn truncation_order_geometric_cases() {
        // L = 1 tails are geometric: N = ceil(ln eps / (2 ln r)) - 1.
        assert_eq!(truncation_order(&params(1.0, 0.9), 1e-12).unwrap(), 131);
        assert_eq!(truncation_order(&params(1.0, 0.5), 1e-12).unwrap(), 19);
    }

    #[test]
    fn truncation_order_monotone_in_radius() {
        let n_90 = truncation_order(&params(2.0, 0.90), 1e-10).unwrap();
        let n_95 = truncation_order(&params(2.0, 0.95), 1e-10).unwrap();
        assert!(n_95 > n_90, "N(0.95) = {n_95} <= N(0.9) = {n_90}");
    }

    #[test]
    fn truncation_order_rejects_bad_eps() {
        assert!(truncation_order(&params(1.0, 0.5), 0.0).is_err());
        assert!(truncation_order(&params(1.0, 0.5), 1e-2).is_err());
    }

    #[test]
    fn sample_gaf_is_reproducible() {
        let p = params(1.5, 0.7);
        let mut rng1 = ChaCha8Rng::seed_from_u64(42);
        rng1.set_stream(3);
        let mut rng2 = ChaCha8Rng::seed_from_u64(42);
        rng2.set_stream(3);
        let s1 = sample_gaf(&p, 50, &mut rng1);
        let s2 = sample_gaf(&p, 50, &mut rng2);
        assert_eq!(s1.coeffs, s2.coeffs);

        let mut rng3 = ChaCha8Rng::seed_from_u64(42);
        rng3.set_stream(4);
        let s3 = sample_gaf(&p, 50, &mut rng3);
        assert_ne!(s1.coeffs, s3.coeffs);
    }

    #[test]
    fn coefficients_have_unit_second_moment() {
        // At L = 1 the weights are all 1, so the coefficients are the raw
        // standard complex Gaussians.
        let p = params(1.0, 0.5);
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        rng.set_stream(1);
        let mut sum = 0.0;
        let mut count = 0usize;
        for _ in 0..100 {
            let s = sample_gaf(&p, 999, &mut rng);
            for c in &s.coeffs {
                sum += c.norm_sqr();
                count += 1;
            }
        }
        let mean = sum / count as f64;
        assert!(
            (0.99..=1.01).contains(&mean),
            "E|a|^2 estimate {mean} outside [0.99, 1.01] over {count} draws"
        );
    }

    #[test]
    fn empirical_kernel_diagonal_matches() {
        // E |f_L(z)|^2 = (1 - |z|^2)^{-L} at z = 0.5.
        for l in [1.0, 0.75] {
            let p = params(l, 0.5);
            let n = truncation_order(&p, 1e-12).unwrap();
            let z = re(0.5);
            let draws = 10_000;
            let mut sum = 0.0;
            let mut sum_sq = 0.0;
            for i in 0..draws {
                let mut rng = ChaCha8Rng::seed_from_u64(99);
                rng.set_stream(i + 1);
                let s = sample_gaf(&p, n, &mut rng);
                let mut f = Complex64::new(0.0, 0.0);
                for c in s.coeffs.iter().rev() {
                    f = f * z + c;
                }
                let v = f.norm_sqr();
                sum += v;
                sum_sq += v * v;
            }
            let mean = sum / draws as f64;
            let var = (sum_sq - sum * sum / draws as f64) / (draws as f64 - 1.0);
            let se = (var / draws as f64).sqrt();
            let exact = 0.75f64.powf(-l);
            assert!(
                (mean - exact).abs() <= 3.0 * se,
                "L={l}: kernel diagonal {mean} vs {exact} (se {se})"
            );
        }
    }

    #[test]
    fn winding_counts_monomial() {
        let s = poly_sample(vec![re(0.0), re(0.0), re(0.0), re(1.0)], 0.7);
        let cfg = McConfig::default();
        assert_eq!(count_zeros(&s, 0.7, &cfg).unwrap(), 3);
    }

    #[test]
    fn winding_counts_linear_root() {
        let cfg = McConfig::default();
        let s = poly_sample(vec![re(-0.3), re(1.0)], 0.5);
        assert_eq!(count_zeros(&s, 0.5, &cfg).unwrap(), 1);
        assert_eq!(count_zeros(&s, 0.2, &cfg).unwrap(), 0);
    }

    #[test]
    fn winding_counts_quadratic_with_outside_root() {
        // (z - 0.4)(z - 0.8) = z^2 - 1.2 z + 0.32.
        let cfg = McConfig::default();
        let s = poly_sample(vec![re(0.32), re(-1.2), re(1.0)], 0.6);
        assert_eq!(count_zeros(&s, 0.6, &cfg).unwrap(), 1);
    }

    #[test]
    fn winding_invariant_under_global_phase() {
        let p = params(1.0, 0.8);
        let n = truncation_order(&p, 1e-10).unwrap();
        let cfg = McConfig::default();
        for stream in 1..=20u64 {
            let mut rng = ChaCha8Rng::seed_from_u64(5);
            rng.set_stream(stream);
            let s = sample_gaf(&p, n, &mut rng);
            let base = count_with_retries(&s, &cfg).unwrap();
            let phase = Complex64::from_polar(1.0, 1.234_567);
            let rotated = GafSample {
                coeffs: s.coeffs.iter().map(|c| c * phase).collect(),
                ..s.clone()
            };
            assert_eq!(count_with_retries(&rotated, &cfg).unwrap(), base);
        }
    }

    #[test]
    fn winding_stable_under_extra_refinement() {
        let p = params(2.0, 0.7);
        let n = truncation_order(&p, 1e-10).unwrap();
        let cfg = McConfig::default();
        let finer = McConfig {
            circle_points_init: 4 * cfg.circle_points_init,
            ..cfg.clone()
        };
        for stream in 1..=100u64 {
            let mut rng = ChaCha8Rng::seed_from_u64(17);
            rng.set_stream(stream);
            let s = sample_gaf(&p, n, &mut rng);
            let a = count_with_retries(&s, &cfg).unwrap();
            let b = count_with_retries(&s, &finer).unwrap();
            assert_eq!(a, b, "stream {stream}: count changed under refinement");
        }
    }

    #[test]
    fn zero_on_contour_reports_circle_too_close() {
        // f(z) = z - 0.5 vanishes exactly at the first sampled circle point.
        let cfg = McConfig::default();
        let s = poly_sample(vec![re(-0.5), re(1.0)], 0.5);
        assert!(matches!(
            count_zeros(&s, 0.5, &cfg),
            Err(Error::CircleTooClose)
        ));
        // The retry wrapper shrinks the contour off the root and recovers.
        assert_eq!(count_with_retries(&s, &cfg).unwrap(), 0);
    }

    #[test]
    fn mc_estimate_covers_known_moments() {
        let p = params(1.0, 0.6);
        let cfg = McConfig {
            samples: 1500,
            seed: 7,
            ..McConfig::default()
        };
        let s = mc_estimate(&p, &cfg).unwrap();
        assert_eq!(s.n_samples, 1500);
        assert!(!s.mean_dominated);
        // E[n] = 0.36/0.64, V[n] = r^2/(1-r^4).
        let mean = 0.5625;
        let var = 0.36 / (1.0 - 0.6f64.powi(4));
        assert!(
            s.mean_ci_95[0] <= mean && mean <= s.mean_ci_95[1],
            "mean CI {:?} misses {mean}",
            s.mean_ci_95
        );
        assert!(
            s.var_ci_95[0] <= var && var <= s.var_ci_95[1],
            "var CI {:?} misses {var}",
            s.var_ci_95
        );
        // Intervals contain their point estimates.
        assert!(s.mean_ci_95[0] <= s.mean_hat && s.mean_hat <= s.mean_ci_95[1]);
        assert!(s.var_ci_95[0] <= s.var_hat && s.var_hat <= s.var_ci_95[1]);
        assert!(s.var_hat >= 0.0);
    }

    #[test]
    fn mc_estimate_is_deterministic() {
        let p = params(0.5, 0.5);
        let cfg = McConfig {
            samples: 64,
            seed: 123,
            ..McConfig::default()
        };
        let a = mc_estimate(&p, &cfg).unwrap();
        let b = mc_estimate(&p, &cfg).unwrap();
        assert_eq!(a, b);
        assert_eq!(
            serde_json::to_string(&a).unwrap(),
            serde_json::to_string(&b).unwrap()
        );
    }

    #[test]
    fn mc_estimate_flags_mean_dominated_runs() {
        let p = params(1.0, 0.009);
        let cfg = McConfig {
            samples: 16,
            seed: 3,
            ..McConfig::default()
        };
        let s = mc_estimate(&p, &cfg).unwrap();
        assert!(s.mean_dominated);
    }

    #[test]
    fn mc_config_validation() {
        let bad = McConfig {
            samples: 1,
            ..McConfig::default()
        };
        assert!(bad.validate().is_err());
        let bad = McConfig {
            trunc_eps: 0.0,
            ..McConfig::default()
        };
        assert!(bad.validate().is_err());
        let bad = McConfig {
            trunc_eps: 1e-2,
            ..McConfig::default()
        };
        assert!(bad.validate().is_err());
        assert!(McConfig::default().validate().is_ok());
    }

    #[test]
    fn welford_matches_two_pass_moments() {
        // Cross-check the one-pass accumulator against naive formulas on a
        // deterministic integer series.
        let counts: Vec<u32> = (0..200u32).map(|i| (i * i * 7 + 3) % 23).collect();
        let nf = counts.len() as f64;
        let mean: f64 = counts.iter().map(|&c| c as f64).sum::<f64>() / nf;
        let var: f64 =
            counts.iter().map(|&c| (c as f64 - mean).powi(2)).sum::<f64>() / (nf - 1.0);
        // One-pass, as in mc_estimate.
        let mut n = 0.0f64;
        let mut m = 0.0f64;
        let mut m2 = 0.0f64;
        for &c in &counts {
            let x = c as f64;
            let n1 = n;
            n += 1.0;
            let delta = x - m;
            let delta_n = delta / n;
            m += delta_n;
            m2 += delta * delta_n * n1;
        }
        assert_relative_eq!(m, mean, max_relative = 1e-13);
        assert_relative_eq!(m2 / (nf - 1.0), var, max_relative = 1e-12);
    }
}
