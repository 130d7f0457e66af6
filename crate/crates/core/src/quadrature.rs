//! Adaptive Gauss–Legendre quadrature of functions supplied as logarithms.
//!
//! Integrals are accumulated with log-sum-exp, so integrands whose values lie
//! far below the smallest double are handled exactly like ordinary ones.

use std::sync::OnceLock;

use crate::error::{Error, Result};

const ORDER: usize = 20;

/// Nodes and weights of the 20-point rule on [-1, 1].
fn rule() -> &'static [(f64, f64); ORDER] {
    static RULE: OnceLock<[(f64, f64); ORDER]> = OnceLock::new();
    RULE.get_or_init(|| {
        let n = ORDER;
        let mut out = [(0.0, 0.0); ORDER];
        for i in 0..n.div_ceil(2) {
            let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
            let mut dp = 0.0;
            for _ in 0..100 {
                let (mut p0, mut p1) = (1.0, x);
                for k in 2..=n {
                    let kf = k as f64;
                    let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
                    p0 = p1;
                    p1 = p2;
                }
                dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
                let dx = p1 / dp;
                x -= dx;
                if dx.abs() < 1e-16 {
                    break;
                }
            }
            let w = 2.0 / ((1.0 - x * x) * dp * dp);
            out[i] = (-x, w);
            out[n - 1 - i] = (x, w);
        }
        out
    })
}

/// `log Σ exp(v_i)`; `-inf` for an empty or all `-inf` input.
pub fn log_sum_exp(values: &[f64]) -> f64 {
    if values.iter().any(|v| v.is_nan()) {
        return f64::NAN;
    }
    let max = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if max.is_infinite() {
        return max;
    }
    max + values.iter().map(|v| (v - max).exp()).sum::<f64>().ln()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LogQuadrature {
    /// Relative tolerance per panel.
    pub rel_tol: f64,
    /// Panels per segment before refinement.
    pub initial_panels: usize,
    /// Maximum number of bisections of an initial panel.
    pub max_depth: u32,
}

impl Default for LogQuadrature {
    fn default() -> Self {
        Self {
            rel_tol: 1e-9,
            initial_panels: 8,
            max_depth: 40,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LogIntegral {
    pub log_value: f64,
    pub panels: usize,
    pub evaluations: usize,
}

struct Panel {
    lo: f64,
    hi: f64,
    log_value: f64,
    depth: u32,
}

impl LogQuadrature {
    fn panel<F: Fn(f64) -> f64>(&self, log_f: &F, lo: f64, hi: f64) -> f64 {
        let half = 0.5 * (hi - lo);
        let mid = 0.5 * (hi + lo);
        let ln_half = half.ln();
        let mut terms = [0.0; ORDER];
        for (term, &(x, w)) in terms.iter_mut().zip(rule().iter()) {
            *term = w.ln() + ln_half + log_f(mid + half * x);
        }
        log_sum_exp(&terms)
    }

    /// Log of `∫ exp(log_f)` over `[breaks[0], breaks[last]]`, with panel
    /// boundaries forced at every interior break.
    pub fn integrate<F: Fn(f64) -> f64>(&self, log_f: F, breaks: &[f64]) -> Result<LogIntegral> {
        if breaks.len() < 2 || breaks.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::invalid("quadrature breaks must be strictly increasing"));
        }
        if breaks.iter().any(|b| !b.is_finite()) {
            return Err(Error::invalid("quadrature bounds must be finite"));
        }
        let mut evaluations = 0;
        let mut stack = Vec::new();
        for seg in breaks.windows(2) {
            let width = (seg[1] - seg[0]) / self.initial_panels as f64;
            for k in 0..self.initial_panels {
                let lo = seg[0] + width * k as f64;
                let hi = if k + 1 == self.initial_panels {
                    seg[1]
                } else {
                    lo + width
                };
                let log_value = self.panel(&log_f, lo, hi);
                evaluations += ORDER;
                stack.push(Panel {
                    lo,
                    hi,
                    log_value,
                    depth: 0,
                });
            }
        }
        let coarse: Vec<f64> = stack.iter().map(|p| p.log_value).collect();
        let log_total = log_sum_exp(&coarse);
        if log_total.is_nan() {
            return Err(Error::numeric("integrand evaluated to NaN"));
        }
        let negligible = log_total + self.rel_tol.ln() + (1e-3f64).ln();
        stack.reverse();

        let mut accepted = Vec::new();
        while let Some(p) = stack.pop() {
            let mid = 0.5 * (p.lo + p.hi);
            let left = self.panel(&log_f, p.lo, mid);
            let right = self.panel(&log_f, mid, p.hi);
            evaluations += 2 * ORDER;
            let fine = log_sum_exp(&[left, right]);
            if fine.is_nan() {
                return Err(Error::numeric("integrand evaluated to NaN"));
            }
            let converged = fine == f64::NEG_INFINITY && p.log_value == f64::NEG_INFINITY
                || (p.log_value - fine).exp_m1().abs() <= self.rel_tol
                || fine.max(p.log_value) < negligible;
            if converged {
                accepted.push(fine);
                continue;
            }
            if p.depth >= self.max_depth {
                return Err(Error::numeric(format!(
                    "quadrature failed to converge on [{}, {}]",
                    p.lo, p.hi
                )));
            }
            stack.push(Panel {
                lo: mid,
                hi: p.hi,
                log_value: right,
                depth: p.depth + 1,
            });
            stack.push(Panel {
                lo: p.lo,
                hi: mid,
                log_value: left,
                depth: p.depth + 1,
            });
        }
        Ok(LogIntegral {
            log_value: log_sum_exp(&accepted),
            panels: accepted.len(),
            evaluations,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rule_integrates_polynomials_exactly() {
        let weights: f64 = rule().iter().map(|(_, w)| w).sum();
        assert!((weights - 2.0).abs() < 1e-14);
        // ∫_{-1}^{1} x^38 dx = 2/39
        let m: f64 = rule().iter().map(|(x, w)| w * x.powi(38)).sum();
        assert!((m - 2.0 / 39.0).abs() < 1e-14);
    }

    #[test]
    fn gaussian_integral() {
        let q = LogQuadrature::default();
        let r = q.integrate(|x| -0.5 * x * x, &[-12.0, 12.0]).unwrap();
        let want = 0.5 * (2.0 * std::f64::consts::PI).ln();
        assert!((r.log_value - want).abs() < 1e-10);
    }

    #[test]
    fn integrand_far_below_underflow() {
        let q = LogQuadrature::default();
        let shift = -5000.0;
        let r = q.integrate(|x| shift - 0.5 * x * x / 1e-4, &[-1.0, 0.0, 1.0]).unwrap();
        let want = shift + 0.5 * (2.0 * std::f64::consts::PI * 1e-4).ln();
        assert!((r.log_value - want).abs() < 1e-9);
    }

    #[test]
    fn kinked_integrand_converges() {
        let q = LogQuadrature::default();
        let r = q.integrate(|x: f64| x.abs().ln(), &[-1.0, 2.0]).unwrap();
        assert!((r.log_value - 2.5f64.ln()).abs() < 1e-9);
    }

    #[test]
    fn rejects_bad_breaks() {
        let q = LogQuadrature::default();
        assert!(q.integrate(|_| 0.0, &[1.0, 1.0]).is_err());
        assert!(q.integrate(|_| 0.0, &[0.0]).is_err());
        assert!(q.integrate(|_| f64::NAN, &[0.0, 1.0]).is_err());
    }
}
