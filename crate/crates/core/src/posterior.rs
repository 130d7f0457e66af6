//! Marginal posterior of `ρ` under a flat prior or the Jeffreys prior,
//! tail probabilities `Pr(ρ ≥ 1 | x)` and highest-density regions.

use serde::{Deserialize, Serialize};

use crate::ar1::Ar1Fit;
use crate::error::{Error, Result};
use crate::evidence::logistic;
use crate::quadrature::{log_sum_exp, LogQuadrature};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PriorKind {
    Flat,
    Jeffreys,
}

/// `ln α0(ρ, T)` with `α0 = T/(1−ρ²) − (1−ρ^{2T})/(1−ρ²)²`, the factor the
/// Jeffreys prior contributes to the posterior.
///
/// Near `|ρ| = 1` the closed form cancels catastrophically, so when
/// `T·|1−ρ²|` is small the alternating series
/// `Σ_{k≥2} (−1)^k C(T,k) ε^{k−2}` in `ε = 1−ρ²` is summed instead.
pub fn log_alpha0(rho: f64, t: usize) -> f64 {
    let n = t as f64;
    let eps = (1.0 - rho) * (1.0 + rho);
    if (n * eps).abs() < 1e-3 {
        let mut term = n * (n - 1.0) / 2.0;
        let mut sum = term;
        for k in 3..=t {
            let kf = k as f64;
            term *= -(n - kf + 1.0) / kf * eps;
            sum += term;
            if term.abs() <= 1e-17 * sum.abs() {
                break;
            }
        }
        return sum.ln();
    }
    if eps > 0.0 {
        // Stationary side: numerator n ε − (1 − (1−ε)^n).
        let num = n * eps + (n * (-eps).ln_1p()).exp_m1();
        num.ln() - 2.0 * eps.ln()
    } else {
        // Explosive side, in logs: ((1+d)^n − 1 − n d)/d², d = ρ² − 1.
        let d = -eps;
        let l = n * d.ln_1p();
        let ln_num = if l > 30.0 {
            l + (-(1.0 + n * d) * (-l).exp()).ln_1p()
        } else {
            (l.exp_m1() - n * d).ln()
        };
        ln_num - 2.0 * d.ln()
    }
}

pub fn alpha0(rho: f64, t: usize) -> f64 {
    log_alpha0(rho, t).exp()
}

/// Unnormalised flat-prior log posterior `−(T/2) ln(SSE1 + (ρ−ρ̂)² Q)`.
pub fn log_posterior_flat(fit: &Ar1Fit, rho: f64) -> f64 {
    -0.5 * fit.t as f64 * fit.ssr_at(rho).ln()
}

/// Unnormalised Jeffreys-prior log posterior.
pub fn log_posterior_jeffreys(fit: &Ar1Fit, rho: f64) -> f64 {
    0.5 * log_alpha0(rho, fit.t) + log_posterior_flat(fit, rho)
}

fn log_posterior(fit: &Ar1Fit, kind: PriorKind, rho: f64) -> f64 {
    match kind {
        PriorKind::Flat => log_posterior_flat(fit, rho),
        PriorKind::Jeffreys => log_posterior_jeffreys(fit, rho),
    }
}

/// Half-width, in standard errors, of the window around `ρ̂` that holds
/// the bulk of the mass for a well-behaved sample.
const WINDOW_HALF_WIDTH: f64 = 12.0;
const HPD_CELLS_PER_SEGMENT: usize = 512;

/// `[ρ̂ − w s, max(1 + w s, ρ̂ + w s)]`.
fn window(fit: &Ar1Fit) -> (f64, f64) {
    let w = WINDOW_HALF_WIDTH * fit.s_rho;
    (fit.rho_hat - w, (1.0 + w).max(fit.rho_hat + w))
}

/// Integration coordinate for one piece of the real line. Beyond `|ρ| = 1`
/// the posterior is integrated in `u = 1/ρ`, which maps each infinite tail
/// onto a bounded interval.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Coord {
    Rho,
    Inverse,
}

/// A segment `[lo, hi]` in its own coordinate.
#[derive(Debug, Clone, Copy)]
struct Segment {
    coord: Coord,
    lo: f64,
    hi: f64,
}

/// Posterior of `ρ` over the whole real line.
///
/// Under the Jeffreys prior the explosive tail decays only like `ρ^{-2}`
/// and a second mode appears near `1/ρ̂`, so no finite window is safe.
#[derive(Debug, Clone, PartialEq)]
pub struct PosteriorCurve {
    pub prior_kind: PriorKind,
    fit: Ar1Fit,
    rho_breaks: Vec<f64>,
    range: (f64, f64),
    log_norm: f64,
    quad: LogQuadrature,
}

impl PosteriorCurve {
    pub fn new(fit: &Ar1Fit, prior_kind: PriorKind) -> Result<Self> {
        Self::with_range(fit, prior_kind, (f64::NEG_INFINITY, f64::INFINITY))
    }

    /// Posterior restricted to `range`, equivalent to a prior that is zero
    /// outside it. Either end may be infinite.
    pub fn with_range(fit: &Ar1Fit, prior_kind: PriorKind, range: (f64, f64)) -> Result<Self> {
        if range.0.is_nan() || range.1.is_nan() || !(range.0 < range.1) {
            return Err(Error::invalid(format!("empty posterior range {range:?}")));
        }
        let min_t = match prior_kind {
            PriorKind::Flat => 2,
            PriorKind::Jeffreys => 3,
        };
        if fit.t < min_t {
            return Err(Error::invalid(format!("{prior_kind:?} posterior needs T >= {min_t}")));
        }
        if !(fit.s_rho > 0.0 && fit.s_rho.is_finite()) {
            return Err(Error::numeric("posterior needs a positive finite standard error"));
        }
        let w = WINDOW_HALF_WIDTH * fit.s_rho;
        let anchors = [fit.rho_hat - w, fit.rho_hat, fit.rho_hat + w];
        let mut rho_breaks: Vec<f64> = anchors
            .iter()
            .flat_map(|&c| [c, 1.0 / c])
            .chain([-1.0, 1.0, range.0, range.1])
            .filter(|b| b.is_finite())
            .collect();
        rho_breaks.sort_by(f64::total_cmp);
        rho_breaks.dedup();
        let mut curve = Self {
            prior_kind,
            fit: *fit,
            rho_breaks,
            range,
            log_norm: 0.0,
            quad: LogQuadrature::default(),
        };
        curve.log_norm = curve.log_mass(range.0, range.1)?;
        if !curve.log_norm.is_finite() {
            return Err(Error::numeric("posterior normaliser is not finite"));
        }
        Ok(curve)
    }

    pub fn range(&self) -> (f64, f64) {
        self.range
    }

    pub fn log_norm(&self) -> f64 {
        self.log_norm
    }

    /// Unnormalised log density.
    pub fn log_density(&self, rho: f64) -> f64 {
        log_posterior(&self.fit, self.prior_kind, rho)
    }

    /// Normalised density, zero outside the range.
    pub fn density(&self, rho: f64) -> f64 {
        if rho < self.range.0 || rho > self.range.1 {
            return 0.0;
        }
        (self.log_density(rho) - self.log_norm).exp()
    }

    /// Log density with respect to the segment's own coordinate.
    fn log_density_in(&self, coord: Coord, x: f64) -> f64 {
        match coord {
            Coord::Rho => self.log_density(x),
            Coord::Inverse => self.log_density(1.0 / x) - 2.0 * x.abs().ln(),
        }
    }

    fn to_rho(coord: Coord, x: f64) -> f64 {
        match coord {
            Coord::Rho => x,
            Coord::Inverse => 1.0 / x,
        }
    }

    /// The pieces of `[a, b]` within the range, split at `±1` and at every
    /// stored break.
    fn segments(&self, a: f64, b: f64) -> Vec<Segment> {
        let (a, b) = (a.max(self.range.0), b.min(self.range.1));
        let mut out = Vec::new();
        let mut push = |coord: Coord, lo: f64, hi: f64| {
            if lo >= hi {
                return;
            }
            let mut cuts = vec![lo];
            for &r in &self.rho_breaks {
                let x = match coord {
                    Coord::Rho => r,
                    Coord::Inverse => 1.0 / r,
                };
                if x > lo && x < hi {
                    cuts.push(x);
                }
            }
            cuts.push(hi);
            cuts.sort_by(f64::total_cmp);
            cuts.dedup();
            out.extend(cuts.windows(2).map(|c| Segment {
                coord,
                lo: c[0],
                hi: c[1],
            }));
        };
        // u = 1/ρ reverses order within each tail; 1/±∞ is ∓0.
        let (lo, hi) = (a, b.min(-1.0));
        if lo < hi {
            push(Coord::Inverse, 1.0 / hi, 1.0 / lo);
        }
        push(Coord::Rho, a.max(-1.0), b.min(1.0));
        let (lo, hi) = (a.max(1.0), b);
        if lo < hi {
            push(Coord::Inverse, 1.0 / hi, 1.0 / lo);
        }
        out
    }

    /// Log of the unnormalised mass on `[a, b]`; either end may be infinite.
    fn log_mass(&self, a: f64, b: f64) -> Result<f64> {
        let mut parts = Vec::new();
        for coord in [Coord::Rho, Coord::Inverse] {
            let segs: Vec<Segment> = self.segments(a, b).into_iter().filter(|s| s.coord == coord).collect();
            // Contiguous runs share one adaptive integration.
            let mut i = 0;
            while i < segs.len() {
                let mut breaks = vec![segs[i].lo, segs[i].hi];
                while i + 1 < segs.len() && segs[i + 1].lo == segs[i].hi {
                    i += 1;
                    breaks.push(segs[i].hi);
                }
                i += 1;
                let f = |x: f64| self.log_density_in(coord, x);
                parts.push(self.quad.integrate(f, &breaks)?.log_value);
            }
        }
        Ok(log_sum_exp(&parts))
    }

    /// `Pr(ρ ≥ threshold | x)`.
    pub fn tail_prob_ge(&self, threshold: f64) -> Result<f64> {
        let below = self.log_mass(self.range.0, threshold)?;
        let above = self.log_mass(threshold, self.range.1)?;
        Ok(if below == f64::NEG_INFINITY {
            1.0
        } else {
            logistic(above - below)
        })
    }

    /// `Pr(a ≤ ρ ≤ b | x)`.
    pub fn prob_between(&self, a: f64, b: f64) -> Result<f64> {
        if !(a < b) {
            return Ok(0.0);
        }
        Ok((self.log_mass(a, b)? - self.log_norm).exp().min(1.0))
    }

    /// Highest-density region with mass at least `1 − alpha`, found by
    /// lowering a density level over a grid of cells. Bimodal posteriors
    /// give several disjoint intervals, and a region may reach `±∞`.
    pub fn hpd(&self, alpha: f64) -> Result<Vec<(f64, f64)>> {
        if !(alpha > 0.0 && alpha < 1.0) {
            return Err(Error::invalid(format!("alpha must lie in (0, 1), got {alpha}")));
        }
        struct Cell {
            lo: f64,
            hi: f64,
            level: f64,
            log_mass: f64,
        }
        let n = HPD_CELLS_PER_SEGMENT;
        let mut cells = Vec::new();
        for seg in self.segments(self.range.0, self.range.1) {
            let h = (seg.hi - seg.lo) / n as f64;
            for i in 0..n {
                let x = seg.lo + (i as f64 + 0.5) * h;
                let (a, b) = (
                    Self::to_rho(seg.coord, seg.lo + i as f64 * h),
                    Self::to_rho(seg.coord, seg.lo + (i + 1) as f64 * h),
                );
                cells.push(Cell {
                    lo: a.min(b),
                    hi: a.max(b),
                    level: self.log_density(Self::to_rho(seg.coord, x)),
                    log_mass: self.log_density_in(seg.coord, x) + h.ln(),
                });
            }
        }
        cells.sort_by(|a, b| a.lo.total_cmp(&b.lo));
        let peak = cells.iter().map(|c| c.log_mass).fold(f64::NEG_INFINITY, f64::max);
        let mass: Vec<f64> = cells.iter().map(|c| (c.log_mass - peak).exp()).collect();
        let total: f64 = mass.iter().sum();
        let mut order: Vec<usize> = (0..cells.len()).collect();
        order.sort_by(|&a, &b| cells[b].level.total_cmp(&cells[a].level).then(a.cmp(&b)));
        let target = (1.0 - alpha) * total;
        let mut acc = 0.0;
        let mut keep = vec![false; cells.len()];
        for &i in &order {
            keep[i] = true;
            acc += mass[i];
            if acc >= target {
                break;
            }
        }
        let mut regions: Vec<(f64, f64)> = Vec::new();
        let mut open: Option<(f64, f64)> = None;
        for (cell, &k) in cells.iter().zip(&keep) {
            open = match (k, open) {
                (true, Some((a, b))) if b == cell.lo => Some((a, cell.hi)),
                (true, Some(r)) => {
                    regions.push(r);
                    Some((cell.lo, cell.hi))
                }
                (true, None) => Some((cell.lo, cell.hi)),
                (false, Some(r)) => {
                    regions.push(r);
                    None
                }
                (false, None) => None,
            };
        }
        regions.extend(open);
        Ok(regions)
    }
}

/// Tail probability together with a note on where the mass sits.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TailProbability {
    pub prob: f64,
    /// Posterior mass outside `[ρ̂ − 12s, max(1 + 12s, ρ̂ + 12s)]`. Under the
    /// Jeffreys prior this is the weight of the far explosive mode, which a
    /// truncated integral would silently drop.
    pub distant_mass: f64,
}

/// `Pr(ρ ≥ 1 | x)`, integrating over the whole real line.
pub fn tail_prob_ge_one(fit: &Ar1Fit, kind: PriorKind) -> Result<TailProbability> {
    let curve = PosteriorCurve::new(fit, kind)?;
    let prob = curve.tail_prob_ge(1.0)?;
    let (lo, hi) = window(fit);
    let distant_mass = (1.0 - curve.prob_between(lo, hi)?).max(0.0);
    if distant_mass > 1e-6 {
        log::debug!(
            "{distant_mass:.3e} of the posterior lies outside the central window (rho_hat={:.4})",
            fit.rho_hat
        );
    }
    Ok(TailProbability { prob, distant_mass })
}

pub fn hpd_interval(fit: &Ar1Fit, kind: PriorKind, alpha: f64) -> Result<Vec<(f64, f64)>> {
    PosteriorCurve::new(fit, kind)?.hpd(alpha)
}
