//! Closed-form Bayes factors against quadrature of the same integrals.

use unitroot_core::bic::{bic_of_fit, delta_bic_from_sse};
use unitroot_core::oracle::{log_bf01_oracle, PriorSpec};
use unitroot_core::rng::derive_seed;
use unitroot_core::{fit_ar1, simulate_ar1, svd_fixed};

#[test]
fn fixed_bound_odds_match_quadrature() {
    for (k, &(t, rho)) in [(50, 0.5), (50, 0.95), (200, 0.9), (200, 1.0)].iter().enumerate() {
        for rep in 0..5u64 {
            let series = simulate_ar1(rho, t, 0.0, 1.0, derive_seed(17, &[k as u64, rep])).unwrap();
            let fit = fit_ar1(&series).unwrap();
            let closed = svd_fixed(&series, -1.0, 1.0).unwrap().evidence.log_bf_01;
            let quad = log_bf01_oracle(&fit, &PriorSpec::SvdUniform { a: -1.0 }).unwrap();
            let rel = ((closed - quad) / quad).abs();
            assert!(
                rel < 1e-6 || (closed - quad).abs() < 1e-9,
                "T={t} rho={rho}: {closed} vs {quad}"
            );
        }
    }
}

#[test]
fn bic_routes_agree() {
    for seed in 0..50u64 {
        let series = simulate_ar1(0.8, 80, 0.0, 1.0, seed).unwrap();
        let fit = fit_ar1(&series).unwrap();
        let direct = bic_of_fit(&fit, true).unwrap() - bic_of_fit(&fit, false).unwrap();
        let from_sse = delta_bic_from_sse(fit.sse0, fit.sse1, fit.t);
        assert!(((direct - from_sse) / from_sse).abs() < 1e-8);
    }
}
