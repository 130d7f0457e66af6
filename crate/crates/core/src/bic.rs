//! BIC approximation of the unit-root Bayes factor.

use serde::{Deserialize, Serialize};

use crate::ar1::{fit_ar1, Ar1Fit, TimeSeries};
use crate::error::{Error, Result};
use crate::evidence::{Evidence, Method};

/// Free parameters under the unit root (σ only).
pub const D0: usize = 1;
/// Free parameters under the alternative (ρ and σ).
pub const D1: usize = 2;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BicResult {
    pub bic0: f64,
    pub bic1: f64,
    /// `bic0 − bic1`; positive values favour the stationary alternative.
    pub delta_bic_01: f64,
    pub evidence: Evidence,
    pub d0: usize,
    pub d1: usize,
    /// Effective sample size, equal to `T`.
    pub n: usize,
}

/// `d log n − 2 loglik` for the restricted (`ρ = 1`) or unrestricted model.
pub fn bic_of_fit(fit: &Ar1Fit, restricted: bool) -> Result<f64> {
    let (d, loglik, sse) = if restricted {
        (D0, fit.loglik0, fit.sse0)
    } else {
        (D1, fit.loglik1, fit.sse1)
    };
    if !(sse > 0.0) {
        return Err(Error::PerfectFit);
    }
    Ok(d as f64 * (fit.t as f64).ln() - 2.0 * loglik)
}

/// `ΔBIC01` from residual sums of squares: `n log(SSE0/SSE1) + (d0 − d1) log n`.
pub fn delta_bic_from_sse(sse0: f64, sse1: f64, n: usize) -> f64 {
    let n = n as f64;
    n * (sse0 / sse1).ln() + (D0 as f64 - D1 as f64) * n.ln()
}

/// `t² − log T`, the t-statistic shortcut for `ΔBIC01`.
pub fn bic_from_tstat(t_stat: f64, t: usize) -> f64 {
    t_stat * t_stat - (t as f64).ln()
}

pub fn bic_test(series: &TimeSeries, prior_odds: f64) -> Result<BicResult> {
    bic_test_fit(&fit_ar1(series)?, prior_odds)
}

/// BIC test on an existing fit. Cross-checks the likelihood and SSE routes.
pub fn bic_test_fit(fit: &Ar1Fit, prior_odds: f64) -> Result<BicResult> {
    let bic0 = bic_of_fit(fit, true)?;
    let bic1 = bic_of_fit(fit, false)?;
    let delta = bic0 - bic1;
    let via_sse = delta_bic_from_sse(fit.sse0, fit.sse1, fit.t);
    if (delta - via_sse).abs() > 1e-8 * delta.abs().max(1.0) {
        return Err(Error::numeric(format!(
            "BIC routes disagree: {delta} from likelihoods vs {via_sse} from SSE"
        )));
    }
    Ok(BicResult {
        bic0,
        bic1,
        delta_bic_01: delta,
        evidence: Evidence::new(-0.5 * delta, Method::Bic, prior_odds)?,
        d0: D0,
        d1: D1,
        n: fit.t,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ar1::simulate_ar1;
    use proptest::prelude::*;

    #[test]
    fn plug_in_arithmetic() {
        let fit = Ar1Fit {
            rho_hat: 0.9,
            q: 1.0,
            sse1: 1.0,
            sse0: 1.0,
            sigma2_ml: 0.01,
            sigma2_ols: 0.01,
            s_rho: 0.1,
            loglik1: -139.0,
            loglik0: -140.0,
            t: 100,
        };
        assert!((bic_of_fit(&fit, true).unwrap() - 284.605_170_185_988_1).abs() < 1e-9);
    }

    #[test]
    fn equal_fit_favours_the_unit_root_by_half_log_t() {
        assert!((delta_bic_from_sse(3.0, 3.0, 250) + 250f64.ln()).abs() < 1e-12);
    }

    #[test]
    fn tstat_shortcut_edges() {
        assert_eq!(bic_from_tstat(0.0, 100), -(100f64.ln()));
        assert!(bic_from_tstat(100f64.ln().sqrt(), 100).abs() < 1e-14);
    }

    #[test]
    fn white_noise_prefers_the_alternative() {
        let wins = (0..1000)
            .filter(|&i| {
                let r = bic_test(&simulate_ar1(0.0, 500, 0.0, 1.0, i).unwrap(), 1.0).unwrap();
                r.bic1 < r.bic0
            })
            .count();
        assert!(wins >= 990);
    }

    #[test]
    fn tstat_shortcut_tracks_exact_delta_under_unit_root() {
        let close = (0..1000)
            .filter(|&i| {
                let s = simulate_ar1(1.0, 500, 0.0, 1.0, 40_000 + i).unwrap();
                let fit = fit_ar1(&s).unwrap();
                let exact = bic_test_fit(&fit, 1.0).unwrap().delta_bic_01;
                (bic_from_tstat(fit.df_statistic(), fit.t) - exact).abs() <= 0.1
            })
            .count();
        assert!(close >= 900, "{close}");
    }

    proptest! {
        #[test]
        fn routes_agree(seed in any::<u64>(), rho in -1.0f64..1.05, t in 3usize..400) {
            let s = simulate_ar1(rho, t, 0.0, 1.0, seed).unwrap();
            let fit = fit_ar1(&s).unwrap();
            let r = bic_test_fit(&fit, 1.0).unwrap();
            let b = delta_bic_from_sse(fit.sse0, fit.sse1, fit.t);
            prop_assert!((r.delta_bic_01 - b).abs() <= 1e-8 * r.delta_bic_01.abs().max(1.0));
            prop_assert_eq!(r.delta_bic_01, r.bic0 - r.bic1);
            prop_assert_eq!(r.evidence.log_bf_01, -0.5 * r.delta_bic_01);
        }

        #[test]
        fn monotone_in_sse_ratio(r in 1.0f64..10.0, d in 0.001f64..1.0, n in 5usize..1000) {
            prop_assert!(delta_bic_from_sse(r + d, 1.0, n) > delta_bic_from_sse(r, 1.0, n));
        }

        #[test]
        fn scale_invariant(seed in any::<u64>(), c in 1e-3f64..1e3) {
            let s = simulate_ar1(0.9, 60, 0.0, 1.0, seed).unwrap();
            let a = bic_test(&s, 1.0).unwrap().delta_bic_01;
            let b = bic_test(&s.scaled(c), 1.0).unwrap().delta_bic_01;
            prop_assert!((a - b).abs() <= 1e-9 * a.abs().max(1.0));
        }
    }
}
