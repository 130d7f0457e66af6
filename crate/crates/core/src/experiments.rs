//! Monte Carlo comparison of the tests over a grid of `(ρ, T)` cells.

use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::ar1::{fit_ar1, simulate_from, InitialCondition};
use crate::bic::bic_test_fit;
use crate::df::{df_pvalue, NullTable, NullTableStore};
use crate::error::{Error, Result};
use crate::evidence::logistic;
use crate::posterior::{tail_prob_ge_one, PriorKind};
use crate::rng::{derive_seed, rng_from_seed, DEFAULT_SEED};
use crate::svd::{svd_data_driven_fit, svd_fixed_fit, DEFAULT_ALPHA};
use crate::table::{fixed, TableFormat, TextTable};

/// Share of failed replications above which a cell is flagged.
pub const MAX_FAILURE_RATE: f64 = 0.01;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum McMethod {
    Svd,
    SvdStar,
    Bic,
    Df,
    PrGe1,
}

impl McMethod {
    /// Column order of rendered tables.
    pub const ALL: [McMethod; 5] = [
        McMethod::Svd,
        McMethod::SvdStar,
        McMethod::Bic,
        McMethod::Df,
        McMethod::PrGe1,
    ];

    pub fn key(self) -> &'static str {
        match self {
            McMethod::Svd => "svd",
            McMethod::SvdStar => "svd_star",
            McMethod::Bic => "bic",
            McMethod::Df => "df",
            McMethod::PrGe1 => "pr_ge1",
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            McMethod::Svd => "SVD",
            McMethod::SvdStar => "SVD*",
            McMethod::Bic => "BIC",
            McMethod::Df => "DF",
            McMethod::PrGe1 => "Pr(rho>=1)",
        }
    }

    /// Methods that produce a Bayes factor, as opposed to a probability.
    pub fn is_bayes_factor(self) -> bool {
        matches!(self, McMethod::Svd | McMethod::SvdStar | McMethod::Bic)
    }
}

impl fmt::Display for McMethod {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.key())
    }
}

impl FromStr for McMethod {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let norm = s.trim().to_ascii_lowercase().replace(['-', '*'], "_");
        match norm.as_str() {
            "svd" => Ok(McMethod::Svd),
            "svd_star" | "svd_" | "svdstar" => Ok(McMethod::SvdStar),
            "bic" => Ok(McMethod::Bic),
            "df" => Ok(McMethod::Df),
            "pr_ge1" | "pr" | "jeffreys" => Ok(McMethod::PrGe1),
            _ => Err(Error::invalid(format!("unknown method '{s}'"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct McGrid {
    pub rhos: Vec<f64>,
    pub ts: Vec<usize>,
    pub reps: usize,
    pub master_seed: u64,
    pub methods: Vec<McMethod>,
    /// Largest `T` for which the posterior tail probability is computed.
    pub pr_ge1_max_t: usize,
    /// Lower bound of the fixed-bound SVD prior.
    pub svd_a: f64,
    pub svd_star_alpha: f64,
    pub prior_kind: PriorKind,
    pub start: InitialCondition,
}

impl Default for McGrid {
    fn default() -> Self {
        Self {
            rhos: vec![0.5, 0.9, 0.95, 0.99, 1.0],
            ts: vec![50, 100, 500],
            reps: 2000,
            master_seed: DEFAULT_SEED,
            methods: McMethod::ALL.to_vec(),
            pr_ge1_max_t: 200,
            svd_a: -1.0,
            svd_star_alpha: DEFAULT_ALPHA,
            prior_kind: PriorKind::Jeffreys,
            start: InitialCondition::Stationary,
        }
    }
}

impl McGrid {
    pub fn validate(&self) -> Result<()> {
        if self.reps == 0 {
            return Err(Error::invalid("reps must be at least 1"));
        }
        if self.rhos.is_empty() || self.ts.is_empty() {
            return Err(Error::invalid("the grid needs at least one rho and one T"));
        }
        if let Some(r) = self.rhos.iter().find(|r| !r.is_finite()) {
            return Err(Error::invalid(format!("rho must be finite, got {r}")));
        }
        if let Some(t) = self.ts.iter().find(|&&t| t < 3) {
            return Err(Error::invalid(format!("T must be at least 3, got {t}")));
        }
        if !(self.svd_star_alpha > 0.0 && self.svd_star_alpha < 1.0) {
            return Err(Error::invalid("SVD* alpha must lie in (0, 1)"));
        }
        if !(-1.0..1.0).contains(&self.svd_a) {
            return Err(Error::invalid("SVD lower bound must lie in [-1, 1)"));
        }
        Ok(())
    }

    fn methods_for(&self, t: usize) -> Vec<McMethod> {
        let mut methods: Vec<McMethod> = McMethod::ALL.into_iter().filter(|m| self.methods.contains(m)).collect();
        if t > self.pr_ge1_max_t {
            methods.retain(|&m| m != McMethod::PrGe1);
        }
        methods
    }
}

/// Averages of one method over the replications of a cell.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MethodSummary {
    pub method: McMethod,
    /// Mean `log BF01`; `None` for DF and the tail probability.
    pub mean_log_bf: Option<f64>,
    pub se_log_bf: Option<f64>,
    /// Mean posterior probability of the unit root (even prior odds), mean
    /// p-value, or mean tail probability.
    pub mean_prob: f64,
    pub se_prob: f64,
    /// Reported entry: `logistic(mean log BF)` for Bayes factors, the mean
    /// otherwise.
    pub table_value: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct McCell {
    pub rho: f64,
    pub t: usize,
    pub reps: usize,
    pub failures: usize,
    /// More than one percent of replications failed.
    pub failed: bool,
    pub summaries: Vec<MethodSummary>,
}

impl McCell {
    pub fn summary(&self, method: McMethod) -> Option<&MethodSummary> {
        self.summaries.iter().find(|s| s.method == method)
    }
}

/// Sum in a fixed binary tree so the result does not depend on thread count.
fn pairwise_sum(xs: &[f64]) -> f64 {
    if xs.len() <= 16 {
        xs.iter().sum()
    } else {
        let (a, b) = xs.split_at(xs.len() / 2);
        pairwise_sum(a) + pairwise_sum(b)
    }
}

fn mean_se(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mean = pairwise_sum(xs) / n;
    if xs.len() < 2 {
        return (mean, 0.0);
    }
    let dev: Vec<f64> = xs.iter().map(|x| (x - mean).powi(2)).collect();
    (mean, (pairwise_sum(&dev) / (n - 1.0) / n).sqrt())
}

struct CellSpec<'a> {
    rho: f64,
    t: usize,
    methods: &'a [McMethod],
    table: Option<&'a NullTable>,
}

/// One replication: a value per method, in `methods` order.
fn replicate(grid: &McGrid, cell: &CellSpec<'_>, seed: u64) -> Result<Vec<f64>> {
    let mut rng = rng_from_seed(seed);
    let series = simulate_from(&mut rng, cell.rho, cell.t, 1.0, grid.start)?;
    let fit = fit_ar1(&series)?;
    cell.methods
        .iter()
        .map(|m| match m {
            McMethod::Svd => Ok(svd_fixed_fit(&fit, grid.svd_a, 1.0)?.evidence.log_bf_01),
            McMethod::SvdStar => Ok(svd_data_driven_fit(&fit, grid.svd_star_alpha)?.evidence.log_bf_01),
            McMethod::Bic => Ok(bic_test_fit(&fit, 1.0)?.evidence.log_bf_01),
            McMethod::Df => {
                let table = cell.table.expect("table fetched for DF cells");
                Ok(df_pvalue(fit.df_statistic(), table))
            }
            McMethod::PrGe1 => Ok(tail_prob_ge_one(&fit, grid.prior_kind)?.prob),
        })
        .collect()
}

fn summarise(method: McMethod, values: &[f64]) -> MethodSummary {
    if method.is_bayes_factor() {
        let (mean_log_bf, se_log_bf) = mean_se(values);
        let probs: Vec<f64> = values.iter().map(|&l| logistic(l)).collect();
        let (mean_prob, se_prob) = mean_se(&probs);
        MethodSummary {
            method,
            mean_log_bf: Some(mean_log_bf),
            se_log_bf: Some(se_log_bf),
            mean_prob,
            se_prob,
            table_value: logistic(mean_log_bf),
        }
    } else {
        let (mean_prob, se_prob) = mean_se(values);
        MethodSummary {
            method,
            mean_log_bf: None,
            se_log_bf: None,
            mean_prob,
            se_prob,
            table_value: mean_prob,
        }
    }
}

/// Runs every cell of the grid, `T` in the outer loop and `ρ` inner.
///
/// Each replication draws from its own stream seeded by the master seed and
/// the cell and replication indices, and results are reduced in replication
/// order, so output is identical for any thread count.
pub fn run_grid(grid: &McGrid, tables: &NullTableStore) -> Result<Vec<McCell>> {
    grid.validate()?;
    let mut cells = Vec::with_capacity(grid.rhos.len() * grid.ts.len());
    for (ti, &t) in grid.ts.iter().enumerate() {
        let methods = grid.methods_for(t);
        let table = if methods.contains(&McMethod::Df) {
            Some(tables.get(t)?)
        } else {
            None
        };
        for (ri, &rho) in grid.rhos.iter().enumerate() {
            let spec = CellSpec {
                rho,
                t,
                methods: &methods,
                table: table.as_deref(),
            };
            let outcomes: Vec<Option<Vec<f64>>> = (0..grid.reps)
                .into_par_iter()
                .map(|rep| {
                    let seed = derive_seed(grid.master_seed, &[ri as u64, ti as u64, rep as u64]);
                    match replicate(grid, &spec, seed) {
                        Ok(v) => Some(v),
                        Err(e) => {
                            log::debug!("rho={rho} T={t} rep={rep}: {e}");
                            None
                        }
                    }
                })
                .collect();
            let ok: Vec<&Vec<f64>> = outcomes.iter().flatten().collect();
            let failures = grid.reps - ok.len();
            let failed = failures as f64 > MAX_FAILURE_RATE * grid.reps as f64 || ok.is_empty();
            if failed {
                log::warn!("cell rho={rho} T={t}: {failures} of {} replications failed", grid.reps);
            }
            let summaries = if ok.is_empty() {
                Vec::new()
            } else {
                methods
                    .iter()
                    .enumerate()
                    .map(|(k, &m)| {
                        let column: Vec<f64> = ok.iter().map(|v| v[k]).collect();
                        summarise(m, &column)
                    })
                    .collect()
            };
            cells.push(McCell {
                rho,
                t,
                reps: grid.reps,
                failures,
                failed,
                summaries,
            });
        }
    }
    Ok(cells)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Layout {
    /// Posterior probabilities of the unit root, p-values and tail
    /// probabilities.
    Probs,
    /// Mean log Bayes factors of the Bayes-factor methods.
    LogBf,
}

fn columns(cells: &[McCell], layout: Layout) -> Vec<McMethod> {
    McMethod::ALL
        .into_iter()
        .filter(|&m| layout == Layout::Probs || m.is_bayes_factor())
        .filter(|&m| cells.iter().any(|c| c.summary(m).is_some()))
        .collect()
}

fn build_table(cells: &[McCell], layout: Layout, with_se: bool, format: TableFormat) -> TextTable {
    let cols = columns(cells, layout);
    let name = |m: McMethod| match format {
        TableFormat::Csv => m.key().to_string(),
        TableFormat::Markdown => m.label().to_string(),
    };
    let mut header = vec!["T".to_string(), "rho".to_string()];
    header.extend(cols.iter().map(|&m| name(m)));
    if with_se {
        header.extend(cols.iter().map(|&m| format!("se_{}", name(m))));
    }
    let mut table = TextTable::new(header);
    let decimals = match layout {
        Layout::Probs => 3,
        Layout::LogBf => 2,
    };
    for cell in cells {
        let pick = |m: McMethod, se: bool| -> String {
            let Some(s) = cell.summary(m) else {
                return String::new();
            };
            let v = match (layout, se) {
                (Layout::Probs, false) => Some(s.table_value),
                (Layout::Probs, true) => Some(s.se_prob),
                (Layout::LogBf, false) => s.mean_log_bf,
                (Layout::LogBf, true) => s.se_log_bf,
            };
            v.map_or_else(String::new, |v| fixed(v, if se { decimals + 1 } else { decimals }))
        };
        let mut row = vec![cell.t.to_string(), format!("{}", cell.rho)];
        row.extend(cols.iter().map(|&m| pick(m, false)));
        if with_se {
            row.extend(cols.iter().map(|&m| pick(m, true)));
        }
        table.push(row);
    }
    table
}

/// Renders the grid one row per cell; methods absent from every cell are
/// left out and cells without a method get a blank entry.
pub fn render_table(cells: &[McCell], layout: Layout, format: TableFormat) -> String {
    build_table(cells, layout, false, format).render(format)
}

/// As [`render_table`] with a standard error column per method appended.
pub fn render_table_with_se(cells: &[McCell], layout: Layout, format: TableFormat) -> String {
    build_table(cells, layout, true, format).render(format)
}
