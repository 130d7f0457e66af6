//! Zero-mean AR(1) series, simulation and conditional least-squares fits.

use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::rng_from_seed;

const LN_2PI: f64 = 1.837_877_066_409_345_5;

/// Observations `x_1..x_T` together with the conditioning value `x_0`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TimeSeries {
    x0: f64,
    values: Vec<f64>,
}

impl TimeSeries {
    pub fn new(x0: f64, values: Vec<f64>) -> Result<Self> {
        if values.len() < 2 {
            return Err(Error::invalid(format!(
                "series needs at least 2 observations after x0, got {}",
                values.len()
            )));
        }
        if !x0.is_finite() || values.iter().any(|v| !v.is_finite()) {
            return Err(Error::invalid("series contains non-finite values"));
        }
        Ok(Self { x0, values })
    }

    /// Treats the first element as `x_0`.
    pub fn from_levels(levels: &[f64]) -> Result<Self> {
        match levels.split_first() {
            Some((&x0, rest)) => Self::new(x0, rest.to_vec()),
            None => Err(Error::invalid("empty series")),
        }
    }

    pub fn x0(&self) -> f64 {
        self.x0
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Number of likelihood contributions, `T`.
    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// `(x_{t−1}, x_t)` pairs for `t = 1..T`.
    pub fn lagged_pairs(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        std::iter::once(self.x0)
            .chain(self.values.iter().copied())
            .zip(self.values.iter().copied())
    }

    pub fn scaled(&self, c: f64) -> Self {
        Self {
            x0: self.x0 * c,
            values: self.values.iter().map(|v| v * c).collect(),
        }
    }

    /// Residual sum of squares `S(ρ) = Σ (x_t − ρ x_{t−1})²`.
    pub fn ssr_at(&self, rho: f64) -> f64 {
        self.lagged_pairs()
            .map(|(lag, x)| {
                let e = x - rho * lag;
                e * e
            })
            .sum()
    }
}

/// Least-squares summary of a zero-mean AR(1) fit conditional on `x_0`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Ar1Fit {
    pub rho_hat: f64,
    /// `Σ x_{t−1}²`.
    pub q: f64,
    /// Unrestricted residual sum of squares.
    pub sse1: f64,
    /// Residual sum of squares under `ρ = 1`.
    pub sse0: f64,
    pub sigma2_ml: f64,
    pub sigma2_ols: f64,
    /// OLS standard error of `rho_hat`.
    pub s_rho: f64,
    pub loglik1: f64,
    pub loglik0: f64,
    pub t: usize,
}

impl Ar1Fit {
    /// `S(ρ)` through the quadratic decomposition around `rho_hat`.
    pub fn ssr_at(&self, rho: f64) -> f64 {
        let d = rho - self.rho_hat;
        self.sse1 + d * d * self.q
    }

    /// Dickey-Fuller statistic `(ρ̂ − 1)/s`.
    pub fn df_statistic(&self) -> f64 {
        (self.rho_hat - 1.0) / self.s_rho
    }
}

fn gaussian_loglik(t: usize, sse: f64) -> f64 {
    let n = t as f64;
    -0.5 * n * (LN_2PI + (sse / n).ln()) - 0.5 * n
}

pub fn fit_ar1(series: &TimeSeries) -> Result<Ar1Fit> {
    let (mut q, mut sxy, mut syy, mut sse0) = (0.0, 0.0, 0.0, 0.0);
    for (lag, x) in series.lagged_pairs() {
        q += lag * lag;
        sxy += lag * x;
        syy += x * x;
        sse0 += (x - lag) * (x - lag);
    }
    if q == 0.0 {
        return Err(Error::DegenerateSeries);
    }
    let rho_hat = sxy / q;
    let sse1 = series.ssr_at(rho_hat);
    // Rounding leaves residuals of order eps·|x| in an exact recursion.
    if sse1 <= 1e-26 * syy.max(q) {
        return Err(Error::PerfectFit);
    }
    let t = series.len();
    let sigma2_ml = sse1 / t as f64;
    let sigma2_ols = sse1 / (t as f64 - 1.0);
    Ok(Ar1Fit {
        rho_hat,
        q,
        sse1,
        sse0,
        sigma2_ml,
        sigma2_ols,
        s_rho: (sigma2_ols / q).sqrt(),
        loglik1: gaussian_loglik(t, sse1),
        loglik0: gaussian_loglik(t, sse0),
        t,
    })
}

/// Conditional Gaussian log-likelihood at `(ρ, σ)`.
pub fn loglik_at(series: &TimeSeries, rho: f64, sigma: f64) -> Result<f64> {
    if !(sigma > 0.0) || !sigma.is_finite() || !rho.is_finite() {
        return Err(Error::invalid("loglik needs finite rho and sigma > 0"));
    }
    let n = series.len() as f64;
    Ok(-0.5 * n * LN_2PI - n * sigma.ln() - series.ssr_at(rho) / (2.0 * sigma * sigma))
}

/// How the starting value of a simulated path is chosen.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InitialCondition {
    /// `x_0 = 0`.
    Zero,
    /// `x_0 ~ N(0, σ²/(1−ρ²))` for `|ρ| < 1`, zero otherwise.
    #[default]
    Stationary,
}

fn check_sim_args(rho: f64, t: usize, sigma: f64) -> Result<()> {
    if t < 2 {
        return Err(Error::invalid(format!("T must be at least 2, got {t}")));
    }
    if !rho.is_finite() || !sigma.is_finite() || !(sigma > 0.0) {
        return Err(Error::invalid("simulation needs finite rho and sigma > 0"));
    }
    Ok(())
}

/// Simulates `x_t = ρ x_{t−1} + u_t`, `u_t ~ N(0, σ²)`, from the given `x_0`.
pub fn simulate_ar1(rho: f64, t: usize, x0: f64, sigma: f64, seed: u64) -> Result<TimeSeries> {
    if !x0.is_finite() {
        return Err(Error::invalid("x0 must be finite"));
    }
    check_sim_args(rho, t, sigma)?;
    let mut rng = rng_from_seed(seed);
    Ok(simulate_with(&mut rng, rho, t, x0, sigma))
}

/// Simulation driver shared by the Monte Carlo code; draws `x_0` first when
/// the start is stationary.
pub fn simulate_from<R: Rng + ?Sized>(
    rng: &mut R,
    rho: f64,
    t: usize,
    sigma: f64,
    start: InitialCondition,
) -> Result<TimeSeries> {
    check_sim_args(rho, t, sigma)?;
    let x0 = match start {
        InitialCondition::Stationary if rho.abs() < 1.0 => {
            let z: f64 = rng.sample(StandardNormal);
            z * sigma / (1.0 - rho * rho).sqrt()
        }
        _ => 0.0,
    };
    Ok(simulate_with(rng, rho, t, x0, sigma))
}

fn simulate_with<R: Rng + ?Sized>(rng: &mut R, rho: f64, t: usize, x0: f64, sigma: f64) -> TimeSeries {
    let mut prev = x0;
    let values = (0..t)
        .map(|_| {
            let u: f64 = rng.sample(StandardNormal);
            prev = rho * prev + sigma * u;
            prev
        })
        .collect();
    TimeSeries { x0, values }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::Rng;

    fn hand_series() -> TimeSeries {
        TimeSeries::new(1.0, vec![2.0, 6.0]).unwrap()
    }

    #[test]
    fn hand_computed_fit() {
        let fit = fit_ar1(&hand_series()).unwrap();
        assert!((fit.rho_hat - 2.8).abs() < 1e-15);
        assert!((fit.q - 5.0).abs() < 1e-15);
        assert!((fit.sse1 - 0.8).abs() < 1e-13);
        assert!((fit.sse0 - 17.0).abs() < 1e-15);
        assert!((fit.s_rho - 0.4).abs() < 1e-13);
        assert!((fit.df_statistic() - 4.5).abs() < 1e-12);
    }

    #[test]
    fn hand_computed_loglik() {
        let v = loglik_at(&hand_series(), 2.8, 1.0).unwrap();
        let want = -(2.0 * std::f64::consts::PI).ln() - 0.4;
        assert!((v - want).abs() < 1e-12);
        assert!((v + 2.237_877_066).abs() < 1e-8);
    }

    #[test]
    fn loglik_at_ml_point_equals_fit() {
        let s = simulate_ar1(0.7, 80, 0.0, 1.0, 3).unwrap();
        let fit = fit_ar1(&s).unwrap();
        let v = loglik_at(&s, fit.rho_hat, fit.sigma2_ml.sqrt()).unwrap();
        assert!((v - fit.loglik1).abs() < 1e-9);
        let v0 = loglik_at(&s, 1.0, (fit.sse0 / fit.t as f64).sqrt()).unwrap();
        assert!((v0 - fit.loglik0).abs() < 1e-9);
    }

    #[test]
    fn doubling_sigma_shifts_loglik() {
        let s = simulate_ar1(0.3, 40, 0.5, 1.0, 9).unwrap();
        let (rho, sigma) = (0.4, 0.8);
        let a = loglik_at(&s, rho, sigma).unwrap();
        let b = loglik_at(&s, rho, 2.0 * sigma).unwrap();
        let drop = s.len() as f64 * std::f64::consts::LN_2 - s.ssr_at(rho) / (2.0 * sigma * sigma) * 0.75;
        assert!((a - b - drop).abs() < 1e-9);
    }

    #[test]
    fn noise_free_recursion_is_perfect_fit() {
        let rho: f64 = 0.9;
        let x0 = 3.0;
        let values: Vec<f64> = (1..=20).map(|k| x0 * rho.powi(k)).collect();
        let s = TimeSeries::new(x0, values).unwrap();
        assert!(matches!(fit_ar1(&s), Err(Error::PerfectFit)));
    }

    #[test]
    fn zero_series_is_degenerate() {
        let s = TimeSeries::new(0.0, vec![0.0, 0.0, 1.0]).unwrap();
        assert!(matches!(fit_ar1(&s), Err(Error::DegenerateSeries)));
    }

    #[test]
    fn tiny_sigma_gives_near_zero_path() {
        let s = simulate_ar1(0.0, 50, 0.0, 1e-300, 1).unwrap();
        assert!(s.values().iter().all(|v| v.abs() < 1e-290));
    }

    #[test]
    fn random_walk_is_cumulative_sum() {
        let s = simulate_ar1(1.0, 30, 2.5, 1.0, 77).unwrap();
        let mut rng = rng_from_seed(77);
        let mut acc = 2.5;
        for v in s.values() {
            let u: f64 = rng.sample(StandardNormal);
            acc += u;
            assert_eq!(*v, acc);
        }
    }

    #[test]
    fn rejects_bad_arguments() {
        assert!(simulate_ar1(f64::NAN, 10, 0.0, 1.0, 0).is_err());
        assert!(simulate_ar1(0.5, 1, 0.0, 1.0, 0).is_err());
        assert!(simulate_ar1(0.5, 10, 0.0, 0.0, 0).is_err());
        assert!(TimeSeries::new(0.0, vec![1.0]).is_err());
        assert!(TimeSeries::new(0.0, vec![1.0, f64::INFINITY]).is_err());
    }

    #[test]
    fn ols_is_consistent_for_stationary_rho() {
        let mean: f64 = (0..500)
            .map(|i| {
                fit_ar1(&simulate_ar1(0.5, 1000, 0.0, 1.0, 1000 + i).unwrap())
                    .unwrap()
                    .rho_hat
            })
            .sum::<f64>()
            / 500.0;
        assert!((mean - 0.5).abs() < 0.02);
    }

    #[test]
    fn ols_is_biased_down_under_unit_root() {
        let mean: f64 = (0..1000)
            .map(|i| {
                fit_ar1(&simulate_ar1(1.0, 200, 0.0, 1.0, 5000 + i).unwrap())
                    .unwrap()
                    .rho_hat
            })
            .sum::<f64>()
            / 1000.0;
        assert!(mean < 1.0);
    }

    #[test]
    fn stationary_start_has_stationary_variance() {
        let rho: f64 = 0.9;
        let mut rng = rng_from_seed(11);
        let draws: Vec<f64> = (0..20_000)
            .map(|_| {
                simulate_from(&mut rng, rho, 2, 1.0, InitialCondition::Stationary)
                    .unwrap()
                    .x0()
            })
            .collect();
        let var = draws.iter().map(|x| x * x).sum::<f64>() / draws.len() as f64;
        let want = 1.0 / (1.0 - rho * rho);
        assert!((var / want - 1.0).abs() < 0.05);
        let mut rng = rng_from_seed(11);
        let unit = simulate_from(&mut rng, 1.0, 5, 1.0, InitialCondition::Stationary).unwrap();
        assert_eq!(unit.x0(), 0.0);
    }

    proptest! {
        #[test]
        fn quadratic_decomposition_holds(seed in 0u64..10_000, rho in -0.99f64..1.01, probe in -3.0f64..3.0) {
            let s = simulate_ar1(rho, 60, 0.0, 1.0, seed).unwrap();
            let fit = fit_ar1(&s).unwrap();
            let direct = s.ssr_at(probe);
            prop_assert!((direct - fit.ssr_at(probe)).abs() <= 1e-9 * direct);
        }

        #[test]
        fn fit_is_scale_invariant(seed in 0u64..10_000, c in 1e-3f64..1e3) {
            let s = simulate_ar1(0.8, 40, 0.0, 1.0, seed).unwrap();
            let a = fit_ar1(&s).unwrap();
            let b = fit_ar1(&s.scaled(c)).unwrap();
            prop_assert!((a.rho_hat - b.rho_hat).abs() < 1e-10);
            prop_assert!((a.s_rho / b.s_rho - 1.0).abs() < 1e-10);
            prop_assert!((b.sse1 / (a.sse1 * c * c) - 1.0).abs() < 1e-10);
        }

        #[test]
        fn ols_fit_invariants(seed in 0u64..10_000, rho in -1.0f64..1.05) {
            let s = simulate_ar1(rho, 30, 1.0, 1.0, seed).unwrap();
            let fit = fit_ar1(&s).unwrap();
            prop_assert!(fit.sse1 <= fit.sse0 * (1.0 + 1e-12));
            prop_assert!(fit.loglik1 >= fit.loglik0 - 1e-9);
        }

        #[test]
        fn simulation_is_reproducible(seed in any::<u64>()) {
            let a = simulate_ar1(0.95, 25, 0.0, 1.0, seed).unwrap();
            let b = simulate_ar1(0.95, 25, 0.0, 1.0, seed).unwrap();
            prop_assert_eq!(a, b);
        }
    }
}
