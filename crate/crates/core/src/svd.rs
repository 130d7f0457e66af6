//! Posterior odds of the unit root with a uniform prior on a stationary
//! interval `[a, 1)`, either with a fixed lower bound or with one chosen
//! from the data.

use serde::{Deserialize, Serialize};

use crate::ar1::{fit_ar1, Ar1Fit, TimeSeries};
use crate::error::{Error, Result};
use crate::evidence::{Evidence, Method};
use crate::special::{ln_c_t, StudentT};

/// Magnitude at which log Bayes factors are capped when the t-CDF terms
/// underflow.
pub const LOG_BF_CAP: f64 = 700.0;

pub const DEFAULT_ALPHA: f64 = 0.05;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SvdResult {
    pub evidence: Evidence,
    /// Lower bound of the stationary interval, clamped to `[-1, 1)`.
    pub a: f64,
    /// Lower bound before clamping (equal to `a` for the fixed variant).
    pub a_unclamped: f64,
    /// Tail mass constant of the data-driven bound; `None` for a fixed bound.
    pub alpha: Option<f64>,
    /// `(1 − ρ̂)/s`.
    pub tau: f64,
    /// Set when a t-CDF term underflowed and the evidence hit the cap.
    pub saturated: bool,
}

/// Log posterior odds terms shared by both variants: `−ln C_T − ½ ln(T−1) −
/// (T/2) ln(SSE0/SSE1)`.
fn common_terms(fit: &Ar1Fit) -> f64 {
    let n = fit.t as f64;
    -ln_c_t(fit.t) - 0.5 * (n - 1.0).ln() - 0.5 * n * (fit.sse0 / fit.sse1).ln()
}

fn t_dist(fit: &Ar1Fit) -> Result<StudentT> {
    if fit.t < 3 {
        return Err(Error::invalid("SVD odds need T >= 3"));
    }
    StudentT::new(fit.t as f64 - 1.0).ok_or_else(|| Error::invalid("bad degrees of freedom"))
}

fn capped(log_bf: f64) -> (f64, bool) {
    if log_bf.is_finite() && log_bf.abs() <= LOG_BF_CAP {
        (log_bf, false)
    } else if log_bf.is_nan() {
        (f64::NAN, true)
    } else {
        (LOG_BF_CAP.copysign(log_bf), true)
    }
}

pub fn svd_fixed(series: &TimeSeries, a: f64, prior_odds: f64) -> Result<SvdResult> {
    svd_fixed_fit(&fit_ar1(series)?, a, prior_odds)
}

/// Fixed-bound posterior odds on an existing fit.
pub fn svd_fixed_fit(fit: &Ar1Fit, a: f64, prior_odds: f64) -> Result<SvdResult> {
    let dist = t_dist(fit)?;
    let s = fit.s_rho;
    let upper = 1.0f64.min(fit.rho_hat + 30.0 * s);
    if !(a >= -1.0 && a < upper) {
        return Err(Error::invalid(format!("lower bound a = {a} must lie in [-1, {upper})")));
    }
    if !(prior_odds > 0.0) {
        return Err(Error::invalid("prior odds must be positive"));
    }
    let ln_mass = dist.ln_interval((a - fit.rho_hat) / s, (1.0 - fit.rho_hat) / s);
    let log_bf = common_terms(fit) + (1.0 - a).ln() - s.ln() - ln_mass;
    let (log_bf, saturated) = capped(log_bf);
    if saturated {
        log::debug!("fixed-bound odds saturated at rho_hat={}", fit.rho_hat);
    }
    Ok(SvdResult {
        evidence: Evidence::new(log_bf, Method::Svd, prior_odds)?,
        a,
        a_unclamped: a,
        alpha: None,
        tau: (1.0 - fit.rho_hat) / s,
        saturated,
    })
}

pub fn svd_data_driven(series: &TimeSeries, alpha: f64) -> Result<SvdResult> {
    svd_data_driven_fit(&fit_ar1(series)?, alpha)
}

/// Data-driven lower bound `a* = ρ̂ + s F⁻¹(α P)`, where `P = F((1 − ρ̂)/s)` is
/// the flat-posterior mass below one. Prior odds are fixed at one.
pub fn svd_data_driven_fit(fit: &Ar1Fit, alpha: f64) -> Result<SvdResult> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::invalid(format!("alpha must lie in (0, 1), got {alpha}")));
    }
    let dist = t_dist(fit)?;
    let s = fit.s_rho;
    let tau = (1.0 - fit.rho_hat) / s;
    let ln_mass = dist.ln_cdf(tau);
    let q = dist.quantile_ln(alpha.ln() + ln_mass);
    let a_star = fit.rho_hat + s * q;
    if !(a_star < 1.0) {
        // No stationary region is left for the alternative.
        return Ok(SvdResult {
            evidence: Evidence::new(LOG_BF_CAP, Method::SvdStar, 1.0)?,
            a: a_star.clamp(-1.0, 1.0 - f64::EPSILON),
            a_unclamped: a_star,
            alpha: Some(alpha),
            tau,
            saturated: true,
        });
    }
    let log_bf = common_terms(fit) + (tau - q).ln() - ln_mass;
    let (log_bf, saturated) = capped(log_bf);
    Ok(SvdResult {
        evidence: Evidence::new(log_bf, Method::SvdStar, 1.0)?,
        a: a_star.max(-1.0),
        a_unclamped: a_star,
        alpha: Some(alpha),
        tau,
        saturated,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ar1::simulate_ar1;
    use crate::special::ln_beta_reg;
    use proptest::prelude::*;

    fn sample(rho: f64, t: usize, seed: u64) -> Ar1Fit {
        fit_ar1(&simulate_ar1(rho, t, 0.0, 1.0, seed).unwrap()).unwrap()
    }

    /// Direct numeric integration of the normalised t-kernel over [a, 1].
    fn oracle_log_k1(fit: &Ar1Fit, a: f64) -> f64 {
        let n = fit.t as f64;
        let m = 200_000;
        let h = (1.0 - a) / m as f64;
        let kernel = |rho: f64| {
            let z = (rho - fit.rho_hat) / fit.s_rho;
            (1.0 + z * z / (n - 1.0)).powf(-n / 2.0)
        };
        let mut acc = kernel(a) + kernel(1.0);
        for i in 1..m {
            let w = if i % 2 == 1 { 4.0 } else { 2.0 };
            acc += w * kernel(a + i as f64 * h);
        }
        let integral = acc * h / 3.0 / (1.0 - a);
        // K1 = (SSE0/SSE1)^{-T/2} / average kernel over [a, 1].
        -0.5 * n * (fit.sse0 / fit.sse1).ln() - integral.ln()
    }

    #[test]
    fn closed_form_matches_direct_integration() {
        for (rho, seed) in [(0.9, 1u64), (1.0, 2), (0.5, 3)] {
            let fit = sample(rho, 60, seed);
            for a in [-1.0, 0.0, 0.5] {
                let got = svd_fixed_fit(&fit, a, 1.0).unwrap().evidence.log_bf_01;
                let want = oracle_log_k1(&fit, a);
                assert!((got - want).abs() < 1e-7, "rho={rho} a={a}: {got} vs {want}");
            }
        }
    }

    #[test]
    fn prior_odds_shift_log_odds_only() {
        let fit = sample(0.95, 100, 4);
        let a = svd_fixed_fit(&fit, -1.0, 1.0).unwrap();
        let b = svd_fixed_fit(&fit, -1.0, 3.0).unwrap();
        assert_eq!(a.evidence.log_bf_01, b.evidence.log_bf_01);
        assert!((b.evidence.posterior_odds() / a.evidence.posterior_odds() - 3.0).abs() < 1e-12);
    }

    #[test]
    fn data_driven_equals_fixed_at_the_chosen_bound() {
        for (rho, seed) in [(0.9, 5u64), (1.0, 6), (0.99, 7)] {
            let fit = sample(rho, 100, seed);
            for alpha in [0.001, 0.05, 0.1] {
                let star = svd_data_driven_fit(&fit, alpha).unwrap();
                let fixed = svd_fixed_fit(&fit, star.a_unclamped.max(-1.0), 1.0).unwrap();
                if star.a_unclamped >= -1.0 {
                    let diff = star.evidence.log_bf_01 - fixed.evidence.log_bf_01;
                    assert!((diff - (1.0 - alpha).ln()).abs() < 1e-9, "diff={diff}");
                }
            }
        }
    }

    #[test]
    fn bound_below_one_for_stationary_looking_data() {
        let dist = StudentT::new(99.0).unwrap();
        for k in 0..60 {
            let tau = 0.25 * k as f64;
            let fit = Ar1Fit {
                rho_hat: 1.0 - 0.01 * tau,
                s_rho: 0.01,
                ..sample(0.9, 100, 8)
            };
            let r = svd_data_driven_fit(&fit, 0.05).unwrap();
            assert!(r.a_unclamped.is_finite() && r.a_unclamped < 1.0);
            // Boundary case: tail mass α·α.
            let q = dist.quantile(0.05 * 0.05);
            assert!(fit.rho_hat + fit.s_rho * q < 1.0);
        }
    }

    #[test]
    fn explosive_samples_still_evaluate() {
        let fit = sample(1.03, 200, 9);
        assert!(fit.rho_hat > 1.0);
        let r = svd_data_driven_fit(&fit, 0.05).unwrap();
        assert!(r.a_unclamped < 1.0);
        assert!(r.evidence.log_bf_01.is_finite());
    }

    #[test]
    fn strongly_stationary_sample_saturates_instead_of_failing() {
        let fit = Ar1Fit {
            rho_hat: 0.0,
            s_rho: 1e-4,
            sse0: 1e6,
            ..sample(0.2, 200, 10)
        };
        let r = svd_fixed_fit(&fit, -1.0, 1.0).unwrap();
        assert!(r.evidence.log_bf_01 >= -LOG_BF_CAP);
        let r = svd_data_driven_fit(&fit, 0.05).unwrap();
        assert!(r.saturated && r.evidence.log_bf_01 == -LOG_BF_CAP);
    }

    #[test]
    fn rejects_bound_outside_range() {
        let fit = sample(0.5, 50, 11);
        assert!(svd_fixed_fit(&fit, 1.0, 1.0).is_err());
        assert!(svd_fixed_fit(&fit, -1.5, 1.0).is_err());
        assert!(svd_data_driven_fit(&fit, 0.0).is_err());
        // Lower bound must stay within 30 standard errors of the estimate.
        let tight = Ar1Fit {
            rho_hat: 0.2,
            s_rho: 0.01,
            ..fit
        };
        assert!(svd_fixed_fit(&tight, 0.6, 1.0).is_err());
    }

    #[test]
    fn incomplete_beta_agrees_with_cdf() {
        let d = StudentT::new(10.0).unwrap();
        let t: f64 = -1.3;
        let x = 10.0 / (10.0 + t * t);
        let direct = 0.5 * ln_beta_reg(5.0, 0.5, x.ln(), (1.0 - x).ln()).exp();
        assert!((d.cdf(t) - direct).abs() < 1e-14);
    }

    proptest! {
        #[test]
        fn scale_invariance(seed in any::<u64>(), c in 1e-3f64..1e3) {
            let s = simulate_ar1(0.95, 80, 0.0, 1.0, seed).unwrap();
            let a = svd_fixed(&s, -1.0, 1.0).unwrap().evidence.log_bf_01;
            let b = svd_fixed(&s.scaled(c), -1.0, 1.0).unwrap().evidence.log_bf_01;
            prop_assert!((a - b).abs() < 1e-10 * a.abs().max(1.0));
            let a = svd_data_driven(&s, 0.05).unwrap().evidence.log_bf_01;
            let b = svd_data_driven(&s.scaled(c), 0.05).unwrap().evidence.log_bf_01;
            prop_assert!((a - b).abs() < 1e-10 * a.abs().max(1.0));
        }

        #[test]
        fn odds_increase_with_interval_width(seed in any::<u64>(), a in -1.0f64..0.5, d in 0.01f64..0.3) {
            let fit = sample(0.97, 100, seed);
            prop_assume!(a + d < 1.0f64.min(fit.rho_hat + 30.0 * fit.s_rho));
            let wide = svd_fixed_fit(&fit, a, 1.0).unwrap().evidence.log_bf_01;
            let narrow = svd_fixed_fit(&fit, a + d, 1.0).unwrap().evidence.log_bf_01;
            prop_assert!(wide > narrow);
        }
    }
}
