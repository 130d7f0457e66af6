//! Special functions: log-gamma, regularized incomplete beta and the
//! Student-t distribution, all with log-space entry points so that far tails
//! never underflow.

use std::f64::consts::PI;

const LN_SQRT_2PI: f64 = 0.918_938_533_204_672_8;
const LN_SQRT_PI: f64 = 0.572_364_942_924_700_1;

const LANCZOS_G: f64 = 7.0;
const LANCZOS: [f64; 9] = [
    0.999_999_999_999_809_9,
    676.520_368_121_885_1,
    -1_259.139_216_722_402_8,
    771.323_428_777_653_1,
    -176.615_029_162_140_6,
    12.507_343_278_686_905,
    -0.138_571_095_265_720_12,
    9.984_369_578_019_572e-6,
    1.505_632_735_149_311_6e-7,
];

/// Correction term of the Stirling series, valid for x >= 10.
fn stirling_tail(x: f64) -> f64 {
    let r = 1.0 / x;
    let r2 = r * r;
    r * (1.0 / 12.0
        + r2 * (-1.0 / 360.0
            + r2 * (1.0 / 1260.0
                + r2 * (-1.0 / 1680.0 + r2 * (1.0 / 1188.0 + r2 * (-691.0 / 360_360.0 + r2 / 156.0))))))
}

/// Natural log of the gamma function for x > 0.
pub fn ln_gamma(x: f64) -> f64 {
    if x.is_nan() || x <= 0.0 {
        return f64::NAN;
    }
    if x >= 10.0 {
        return (x - 0.5) * x.ln() - x + LN_SQRT_2PI + stirling_tail(x);
    }
    if x < 0.5 {
        return ln_gamma(x + 1.0) - x.ln();
    }
    let z = x - 1.0;
    let sum = LANCZOS[1..]
        .iter()
        .enumerate()
        .fold(LANCZOS[0], |acc, (i, c)| acc + c / (z + i as f64 + 1.0));
    let t = z + LANCZOS_G + 0.5;
    LN_SQRT_2PI + (z + 0.5) * t.ln() - t + sum.ln()
}

/// `ln Γ(x) − ln Γ(x + ½)` without cancellation at large x.
pub fn ln_gamma_half_ratio(x: f64) -> f64 {
    if x < 10.0 {
        return ln_gamma(x) - ln_gamma(x + 0.5);
    }
    -0.5 * x.ln() + (0.5 - x * (0.5 / x).ln_1p()) + stirling_tail(x) - stirling_tail(x + 0.5)
}

/// `ln B(a, b)`.
pub fn ln_beta(a: f64, b: f64) -> f64 {
    if b == 0.5 {
        LN_SQRT_PI + ln_gamma_half_ratio(a)
    } else if a == 0.5 {
        LN_SQRT_PI + ln_gamma_half_ratio(b)
    } else {
        ln_gamma(a) + ln_gamma(b) - ln_gamma(a + b)
    }
}

/// Continued fraction for the incomplete beta function (modified Lentz).
fn beta_cf(a: f64, b: f64, x: f64) -> f64 {
    const TINY: f64 = 1e-300;
    const EPS: f64 = 1e-16;
    let max_iter = 10_000 + 20 * (a.max(b).sqrt() as usize);
    let qab = a + b;
    let qap = a + 1.0;
    let qam = a - 1.0;
    let guard = |v: f64| if v.abs() < TINY { TINY } else { v };
    let mut c = 1.0;
    let mut d = 1.0 / guard(1.0 - qab * x / qap);
    let mut h = d;
    for m in 1..=max_iter {
        let m = m as f64;
        let m2 = 2.0 * m;
        let aa = m * (b - m) * x / ((qam + m2) * (a + m2));
        d = 1.0 / guard(1.0 + aa * d);
        c = guard(1.0 + aa / c);
        h *= d * c;
        let aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
        d = 1.0 / guard(1.0 + aa * d);
        c = guard(1.0 + aa / c);
        let del = d * c;
        h *= del;
        if (del - 1.0).abs() < EPS {
            break;
        }
    }
    h
}

/// `ln I_x(a, b)`, the log regularized incomplete beta function.
///
/// Both `x` and `y = 1 − x` are taken in log form so callers can pass
/// values that would round to 0 or 1.
pub fn ln_beta_reg(a: f64, b: f64, ln_x: f64, ln_y: f64) -> f64 {
    if ln_x == f64::NEG_INFINITY {
        return f64::NEG_INFINITY;
    }
    if ln_y == f64::NEG_INFINITY {
        return 0.0;
    }
    let x = ln_x.exp();
    let y = ln_y.exp();
    let ln_front = a * ln_x + b * ln_y - ln_beta(a, b);
    if x < (a + 1.0) / (a + b + 2.0) {
        ln_front + beta_cf(a, b, x).ln() - a.ln()
    } else {
        let upper = (ln_front + beta_cf(b, a, y).ln() - b.ln()).exp();
        (-upper).ln_1p()
    }
}

/// Regularized incomplete beta `I_x(a, b)`.
pub fn beta_reg(a: f64, b: f64, x: f64) -> f64 {
    if x <= 0.0 {
        return 0.0;
    }
    if x >= 1.0 {
        return 1.0;
    }
    ln_beta_reg(a, b, x.ln(), (-x).ln_1p()).exp()
}

/// `log(exp(a) + exp(b))`.
pub fn log_add_exp(a: f64, b: f64) -> f64 {
    let (hi, lo) = if a >= b { (a, b) } else { (b, a) };
    if hi == f64::NEG_INFINITY {
        return hi;
    }
    hi + (lo - hi).exp().ln_1p()
}

/// `log(exp(a) − exp(b))` for `a ≥ b`.
pub fn log_sub_exp(a: f64, b: f64) -> f64 {
    if b == f64::NEG_INFINITY {
        return a;
    }
    a + (-(b - a).exp_m1()).ln()
}

/// `ln C_T` with `C_T = Γ((T−1)/2) Γ(1/2) / Γ(T/2)`, the Student-t kernel
/// normaliser for `T − 1` degrees of freedom.
pub fn ln_c_t(t: usize) -> f64 {
    LN_SQRT_PI + ln_gamma_half_ratio((t as f64 - 1.0) / 2.0)
}

/// Student-t distribution with `df` degrees of freedom.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StudentT {
    df: f64,
}

impl StudentT {
    pub fn new(df: f64) -> Option<Self> {
        (df.is_finite() && df > 0.0).then_some(Self { df })
    }

    pub fn df(&self) -> f64 {
        self.df
    }

    pub fn ln_pdf(&self, t: f64) -> f64 {
        let nu = self.df;
        -ln_gamma_half_ratio(nu / 2.0) - 0.5 * (nu * PI).ln() - 0.5 * (nu + 1.0) * (t * t / nu).ln_1p()
    }

    pub fn pdf(&self, t: f64) -> f64 {
        self.ln_pdf(t).exp()
    }

    /// `ln P(T ≤ −|t|)`.
    fn ln_lower_tail(&self, t: f64) -> f64 {
        let nu = self.df;
        let a = t.abs();
        if a == 0.0 {
            return -std::f64::consts::LN_2;
        }
        if a.is_infinite() {
            return f64::NEG_INFINITY;
        }
        let ln_a2 = 2.0 * a.ln();
        let ln_den = if a > 1e100 {
            ln_a2 + (nu / (a * a)).ln_1p()
        } else {
            (nu + a * a).ln()
        };
        -std::f64::consts::LN_2 + ln_beta_reg(nu / 2.0, 0.5, nu.ln() - ln_den, ln_a2 - ln_den)
    }

    pub fn ln_cdf(&self, t: f64) -> f64 {
        if t.is_nan() {
            return f64::NAN;
        }
        let tail = self.ln_lower_tail(t);
        if t <= 0.0 {
            tail
        } else {
            (-tail.exp()).ln_1p()
        }
    }

    pub fn cdf(&self, t: f64) -> f64 {
        self.ln_cdf(t).exp()
    }

    pub fn ln_sf(&self, t: f64) -> f64 {
        self.ln_cdf(-t)
    }

    pub fn sf(&self, t: f64) -> f64 {
        self.ln_sf(t).exp()
    }

    /// Value exceeded with probability `q`.
    pub fn inverse_sf(&self, q: f64) -> f64 {
        -self.quantile(q)
    }

    /// `ln(F(hi) − F(lo))`, accurate when both bounds sit in the same tail.
    pub fn ln_interval(&self, lo: f64, hi: f64) -> f64 {
        if hi <= lo {
            return f64::NEG_INFINITY;
        }
        if hi <= 0.0 {
            log_sub_exp(self.ln_cdf(hi), self.ln_cdf(lo))
        } else if lo >= 0.0 {
            log_sub_exp(self.ln_sf(lo), self.ln_sf(hi))
        } else {
            (-(self.cdf(lo) + self.cdf(-hi))).ln_1p()
        }
    }

    pub fn quantile(&self, p: f64) -> f64 {
        if !(0.0..=1.0).contains(&p) || p.is_nan() {
            return f64::NAN;
        }
        self.quantile_ln(p.ln())
    }

    /// Quantile at probability `exp(ln_p)`; usable for probabilities far
    /// below the smallest positive double.
    pub fn quantile_ln(&self, ln_p: f64) -> f64 {
        if ln_p.is_nan() || ln_p > 0.0 {
            return f64::NAN;
        }
        if ln_p == f64::NEG_INFINITY {
            return f64::NEG_INFINITY;
        }
        if ln_p == 0.0 {
            return f64::INFINITY;
        }
        let half = -std::f64::consts::LN_2;
        if ln_p > half {
            // Reflect into the lower half, where the log CDF keeps precision.
            let ln_q = (-ln_p.exp_m1()).ln();
            return -self.lower_quantile(ln_q);
        }
        self.lower_quantile(ln_p)
    }

    /// Solves `ln F(t) = ln_p` for `t ≤ 0` by safeguarded Newton.
    fn lower_quantile(&self, ln_p: f64) -> f64 {
        let g = |t: f64| self.ln_cdf(t) - ln_p;
        let mut hi = 0.0_f64;
        let mut lo = -1.0_f64;
        while g(lo) > 0.0 {
            hi = lo;
            lo *= 2.0;
            if lo < -1e300 {
                return f64::NEG_INFINITY;
            }
        }
        let mut t = 0.5 * (lo + hi);
        for _ in 0..400 {
            let gt = g(t);
            if gt == 0.0 {
                return t;
            }
            if gt > 0.0 {
                hi = t;
            } else {
                lo = t;
            }
            let slope = (self.ln_pdf(t) - self.ln_cdf(t)).exp();
            let mut next = t - gt / slope;
            if !(next > lo && next < hi) {
                next = if hi < -1.0 && lo / hi > 4.0 {
                    -(lo * hi).sqrt()
                } else {
                    0.5 * (lo + hi)
                };
            }
            let step = (next - t).abs();
            t = next;
            if step <= 1e-13 * t.abs().max(1.0) || (hi - lo) <= 1e-13 * t.abs().max(1.0) {
                break;
            }
        }
        t
    }
}
