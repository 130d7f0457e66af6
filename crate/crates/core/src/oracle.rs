//! Reference marginal likelihoods by quadrature, and Laplace approximations
//! to them.
//!
//! `σ` always carries the improper prior `1/σ` and is integrated out
//! analytically:
//! `∫ L(x | ρ, σ) σ⁻¹ dσ = π^{−T/2} Γ(T/2) / 2 · S(ρ)^{−T/2}`.
//! The constant is kept so that exact and approximate marginals can be
//! compared directly.

use serde::{Deserialize, Serialize};

use crate::ar1::{Ar1Fit, TimeSeries};
use crate::error::{Error, Result};
use crate::quadrature::LogQuadrature;
use crate::special::ln_gamma;

const LN_2PI: f64 = 1.837_877_066_409_345_5;

/// Tabulated log prior density over `ρ`, linearly interpolated and
/// renormalised over the grid range.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LogPriorGrid {
    rho: Vec<f64>,
    log_density: Vec<f64>,
    log_norm: f64,
}

impl LogPriorGrid {
    pub fn new(rho: Vec<f64>, log_density: Vec<f64>) -> Result<Self> {
        if rho.len() < 2 || rho.len() != log_density.len() {
            return Err(Error::invalid("prior grid needs at least two matching points"));
        }
        if rho.windows(2).any(|w| !(w[1] > w[0])) || rho.iter().any(|r| !r.is_finite()) {
            return Err(Error::invalid("prior grid must be finite and strictly increasing"));
        }
        if log_density.iter().any(|v| v.is_nan() || *v == f64::INFINITY) {
            return Err(Error::invalid("prior grid log densities must be < +inf"));
        }
        let mut grid = Self {
            rho,
            log_density,
            log_norm: 0.0,
        };
        let breaks = grid.rho.clone();
        grid.log_norm = LogQuadrature::default().integrate(|r| grid.raw(r), &breaks)?.log_value;
        if !grid.log_norm.is_finite() {
            return Err(Error::invalid("prior grid has no mass"));
        }
        Ok(grid)
    }

    fn raw(&self, rho: f64) -> f64 {
        let k = self.rho.partition_point(|&r| r <= rho);
        if k == 0 || k > self.rho.len() || (k == self.rho.len() && rho > self.rho[k - 1]) {
            return f64::NEG_INFINITY;
        }
        if k == self.rho.len() {
            return self.log_density[k - 1];
        }
        let (r0, r1) = (self.rho[k - 1], self.rho[k]);
        let w = (rho - r0) / (r1 - r0);
        self.log_density[k - 1] * (1.0 - w) + self.log_density[k] * w
    }

    pub fn range(&self) -> (f64, f64) {
        (self.rho[0], self.rho[self.rho.len() - 1])
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum PriorSpec {
    /// `ρ ~ U[a, 1)`.
    SvdUniform {
        a: f64,
    },
    CustomGrid(LogPriorGrid),
}

impl PriorSpec {
    fn support(&self) -> Result<(f64, f64)> {
        match self {
            PriorSpec::SvdUniform { a } => {
                if !(*a >= -1.0 && *a < 1.0) {
                    return Err(Error::invalid(format!("uniform prior needs a in [-1, 1), got {a}")));
                }
                Ok((*a, 1.0))
            }
            PriorSpec::CustomGrid(g) => Ok(g.range()),
        }
    }

    /// Normalised log prior density of `ρ`.
    pub fn log_density(&self, rho: f64) -> f64 {
        match self {
            PriorSpec::SvdUniform { a } => {
                if rho >= *a && rho <= 1.0 {
                    -(1.0 - a).ln()
                } else {
                    f64::NEG_INFINITY
                }
            }
            PriorSpec::CustomGrid(g) => g.raw(rho) - g.log_norm,
        }
    }

    /// First and second derivative of the log prior.
    fn log_density_derivs(&self, rho: f64) -> (f64, f64) {
        match self {
            PriorSpec::SvdUniform { .. } => (0.0, 0.0),
            PriorSpec::CustomGrid(g) => {
                let (lo, hi) = g.range();
                let h = 1e-5 * (hi - lo);
                let (m, c, p) = (g.raw(rho - h), g.raw(rho), g.raw(rho + h));
                ((p - m) / (2.0 * h), (p - 2.0 * c + m) / (h * h))
            }
        }
    }
}

/// `log[π^{−T/2} Γ(T/2) / 2]`.
pub fn log_sigma_constant(t: usize) -> f64 {
    let n = t as f64;
    -0.5 * n * std::f64::consts::PI.ln() + ln_gamma(0.5 * n) - std::f64::consts::LN_2
}

/// Log marginal likelihood under the unit root.
pub fn log_marginal_h0(fit: &Ar1Fit) -> Result<f64> {
    if !(fit.sse0 > 0.0) {
        return Err(Error::DegenerateSeries);
    }
    Ok(log_sigma_constant(fit.t) - 0.5 * fit.t as f64 * fit.sse0.ln())
}

fn integrate_h1<S: Fn(f64) -> f64>(fit: &Ar1Fit, prior: &PriorSpec, ssr: S) -> Result<f64> {
    let (lo, hi) = prior.support()?;
    let hi = hi.min(1.0);
    if !(lo < hi) {
        return Err(Error::invalid("prior support has no mass below one"));
    }
    let mut breaks = vec![lo];
    if fit.rho_hat > lo && fit.rho_hat < hi {
        breaks.push(fit.rho_hat);
    }
    if let PriorSpec::CustomGrid(g) = prior {
        breaks.extend(g.rho.iter().copied().filter(|&r| r > lo && r < hi && r != fit.rho_hat));
        breaks.sort_by(f64::total_cmp);
    }
    breaks.push(hi);
    let n = fit.t as f64;
    let integral = LogQuadrature::default().integrate(|r| prior.log_density(r) - 0.5 * n * ssr(r).ln(), &breaks)?;
    Ok(log_sigma_constant(fit.t) + integral.log_value)
}

/// Log marginal likelihood under the alternative, by quadrature over `ρ`.
pub fn log_marginal_h1(fit: &Ar1Fit, prior: &PriorSpec) -> Result<f64> {
    integrate_h1(fit, prior, |r| fit.ssr_at(r))
}

/// As [`log_marginal_h1`], but evaluating `S(ρ)` from the raw series.
pub fn log_marginal_h1_direct(series: &TimeSeries, fit: &Ar1Fit, prior: &PriorSpec) -> Result<f64> {
    integrate_h1(fit, prior, |r| series.ssr_at(r))
}

/// Exact `ln B01` under `prior`.
pub fn log_bf01_oracle(fit: &Ar1Fit, prior: &PriorSpec) -> Result<f64> {
    Ok(log_marginal_h0(fit)? - log_marginal_h1(fit, prior)?)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LaplaceVariant {
    /// Expansion at the joint posterior mode of `(ρ, σ)`.
    PosteriorMode,
    /// Expansion at the MLE with observed information.
    MleObserved,
    /// Expansion at the MLE with the stationary Fisher information.
    MleExpected,
}

/// Laplace approximation `log_peak + (d/2) ln 2π − ½ ln det(−H)`.
pub fn laplace_log_integral(log_peak: f64, neg_hessian_det: f64, dim: usize) -> f64 {
    log_peak + 0.5 * dim as f64 * LN_2PI - 0.5 * neg_hessian_det.ln()
}

/// Log of the joint integrand in `(ρ, σ)`: likelihood × `π(ρ)` × `1/σ`.
fn log_joint(fit: &Ar1Fit, prior: &PriorSpec, rho: f64, sigma: f64) -> f64 {
    let n = fit.t as f64;
    -0.5 * n * LN_2PI - n * sigma.ln() - fit.ssr_at(rho) / (2.0 * sigma * sigma) + prior.log_density(rho) - sigma.ln()
}

fn posterior_mode(fit: &Ar1Fit, prior: &PriorSpec) -> Result<(f64, f64, [[f64; 2]; 2])> {
    let n = fit.t as f64;
    let mut rho = fit.rho_hat;
    let mut sigma = (fit.sse1 / (n + 1.0)).sqrt();
    let hessian = |rho: f64, sigma: f64| {
        let (_, lp2) = prior.log_density_derivs(rho);
        let s = fit.ssr_at(rho);
        let s2 = sigma * sigma;
        [
            [-fit.q / s2 + lp2, 2.0 * (rho - fit.rho_hat) * fit.q / (s2 * sigma)],
            [
                2.0 * (rho - fit.rho_hat) * fit.q / (s2 * sigma),
                (n + 1.0) / s2 - 3.0 * s / (s2 * s2),
            ],
        ]
    };
    for _ in 0..100 {
        let (lp1, _) = prior.log_density_derivs(rho);
        let s2 = sigma * sigma;
        let grad = [
            -(rho - fit.rho_hat) * fit.q / s2 + lp1,
            -(n + 1.0) / sigma + fit.ssr_at(rho) / (s2 * sigma),
        ];
        let h = hessian(rho, sigma);
        let det = h[0][0] * h[1][1] - h[0][1] * h[1][0];
        if !(h[0][0] < 0.0 && det > 0.0) {
            return Err(Error::numeric("posterior Hessian is not negative definite"));
        }
        // Newton direction −H⁻¹ g, halved until it stays feasible and ascends.
        let step = [
            -(h[1][1] * grad[0] - h[0][1] * grad[1]) / det,
            -(-h[1][0] * grad[0] + h[0][0] * grad[1]) / det,
        ];
        let base = log_joint(fit, prior, rho, sigma);
        let mut lambda = 1.0;
        loop {
            let (r, s) = (rho + lambda * step[0], sigma + lambda * step[1]);
            if s > 0.0 && log_joint(fit, prior, r, s) >= base - 1e-12 * base.abs() {
                rho = r;
                sigma = s;
                break;
            }
            lambda *= 0.5;
            if lambda < 1e-12 {
                return Err(Error::numeric("posterior mode search stalled"));
            }
        }
        if (lambda * step[0]).abs() < 1e-14 * rho.abs().max(1.0) && (lambda * step[1]).abs() < 1e-14 * sigma {
            break;
        }
    }
    Ok((rho, sigma, hessian(rho, sigma)))
}

pub fn log_marginal_laplace(fit: &Ar1Fit, prior: &PriorSpec, variant: LaplaceVariant) -> Result<f64> {
    let (lo, hi) = prior.support()?;
    let hi = hi.min(1.0);
    if !(fit.rho_hat > lo && fit.rho_hat < hi) {
        return Err(Error::BoundaryMode(format!(
            "rho_hat = {} is not interior to the prior support ({lo}, {hi})",
            fit.rho_hat
        )));
    }
    let n = fit.t as f64;
    let sigma_hat = fit.sigma2_ml.sqrt();
    match variant {
        LaplaceVariant::PosteriorMode => {
            let (rho, sigma, h) = posterior_mode(fit, prior)?;
            if !(rho > lo && rho < hi) {
                return Err(Error::BoundaryMode(format!("posterior mode {rho} left the support")));
            }
            let det = h[0][0] * h[1][1] - h[0][1] * h[1][0];
            Ok(laplace_log_integral(log_joint(fit, prior, rho, sigma), det, 2))
        }
        LaplaceVariant::MleObserved => {
            let det = (fit.q / fit.sigma2_ml) * (2.0 * n / fit.sigma2_ml);
            let peak = fit.loglik1 + prior.log_density(fit.rho_hat) - sigma_hat.ln();
            Ok(laplace_log_integral(peak, det, 2))
        }
        LaplaceVariant::MleExpected => {
            if fit.rho_hat.abs() >= 1.0 {
                return Err(Error::BoundaryMode("expected information needs |rho_hat| < 1".into()));
            }
            let info_rho = 1.0 / (1.0 - fit.rho_hat * fit.rho_hat);
            let info_sigma = 2.0 / fit.sigma2_ml;
            let det = n * n * info_rho * info_sigma;
            let peak = fit.loglik1 + prior.log_density(fit.rho_hat) - sigma_hat.ln();
            Ok(laplace_log_integral(peak, det, 2))
        }
    }
}
