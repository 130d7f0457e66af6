//! Bayes factors, posterior odds and Jeffreys' evidence grades.
//!
//! All Bayes factors are oriented unit root over alternative: positive
//! `log_bf_01` favours `ρ = 1`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    Bic,
    Svd,
    SvdStar,
    Oracle,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Evidence {
    pub log_bf_01: f64,
    pub method: Method,
    pub prior_odds: f64,
}

/// Logistic function evaluated without overflow.
pub fn logistic(z: f64) -> f64 {
    if z >= 0.0 {
        1.0 / (1.0 + (-z).exp())
    } else {
        let e = z.exp();
        e / (1.0 + e)
    }
}

impl Evidence {
    pub fn new(log_bf_01: f64, method: Method, prior_odds: f64) -> Result<Self> {
        if !log_bf_01.is_finite() {
            return Err(Error::numeric(format!("non-finite log Bayes factor for {method:?}")));
        }
        if !(prior_odds > 0.0) || !prior_odds.is_finite() {
            return Err(Error::invalid(format!("prior odds must be positive, got {prior_odds}")));
        }
        Ok(Self {
            log_bf_01,
            method,
            prior_odds,
        })
    }

    /// Same Bayes factor under different prior odds.
    pub fn with_prior_odds(&self, prior_odds: f64) -> Result<Self> {
        Self::new(self.log_bf_01, self.method, prior_odds)
    }

    pub fn log_posterior_odds(&self) -> f64 {
        self.log_bf_01 + self.prior_odds.ln()
    }

    pub fn posterior_odds(&self) -> f64 {
        self.log_posterior_odds().exp()
    }

    /// Posterior probability of the unit root.
    pub fn posterior_prob(&self) -> f64 {
        logistic(self.log_posterior_odds())
    }

    /// Posterior probability of the alternative, `1 − posterior_prob()`
    /// without cancellation.
    pub fn posterior_prob_alternative(&self) -> f64 {
        logistic(-self.log_posterior_odds())
    }

    pub fn grade(&self) -> JeffreysGrade {
        JeffreysGrade::from_log_bf(self.log_bf_01)
    }
}

/// Posterior probability of the unit root for a log Bayes factor and prior odds.
pub fn posterior_prob(log_bf_01: f64, prior_odds: f64) -> f64 {
    logistic(log_bf_01 + prior_odds.ln())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Hypothesis {
    UnitRoot,
    Stationary,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "strength", content = "favours")]
pub enum JeffreysGrade {
    Neutral,
    BarelyWorthMentioning(Hypothesis),
    Substantial(Hypothesis),
    Strong(Hypothesis),
    VeryStrong(Hypothesis),
    Decisive(Hypothesis),
}

impl JeffreysGrade {
    /// Half-decade cut points 1, 3.2, 10, 31.6, 100 applied to `|log10 BF|`.
    pub fn from_log_bf(log_bf_01: f64) -> Self {
        let l10 = log_bf_01 / std::f64::consts::LN_10;
        let side = if l10 > 0.0 {
            Hypothesis::UnitRoot
        } else {
            Hypothesis::Stationary
        };
        let m = l10.abs();
        if m == 0.0 {
            JeffreysGrade::Neutral
        } else if m < 0.5 {
            JeffreysGrade::BarelyWorthMentioning(side)
        } else if m < 1.0 {
            JeffreysGrade::Substantial(side)
        } else if m < 1.5 {
            JeffreysGrade::Strong(side)
        } else if m <= 2.0 {
            JeffreysGrade::VeryStrong(side)
        } else {
            JeffreysGrade::Decisive(side)
        }
    }
}

impl std::fmt::Display for JeffreysGrade {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let (label, side) = match self {
            JeffreysGrade::Neutral => return f.write_str("neutral"),
            JeffreysGrade::BarelyWorthMentioning(h) => ("barely worth mentioning", h),
            JeffreysGrade::Substantial(h) => ("substantial", h),
            JeffreysGrade::Strong(h) => ("strong", h),
            JeffreysGrade::VeryStrong(h) => ("very strong", h),
            JeffreysGrade::Decisive(h) => ("decisive", h),
        };
        let side = match side {
            Hypothesis::UnitRoot => "unit root",
            Hypothesis::Stationary => "stationarity",
        };
        write!(f, "{label} for {side}")
    }
}
