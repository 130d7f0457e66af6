//! Runs the test battery over a set of observed series and renders the
//! resulting table.

use chrono::NaiveDate;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::ar1::fit_ar1;
use crate::bic::bic_test_fit;
use crate::data_io::SeriesRecord;
use crate::df::{df_test_fit, NullTableStore};
use crate::error::{Error, Result};
use crate::posterior::{tail_prob_ge_one, PriorKind};
use crate::svd::{svd_data_driven_fit, DEFAULT_ALPHA};
use crate::table::{fixed, TableFormat, TextTable};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EmpiricalConfig {
    pub svd_star_alpha: f64,
    pub prior_odds: f64,
    /// Take logs of the levels before testing.
    pub log_levels: bool,
    /// Subtract the sample mean before testing. Off by default: the model
    /// has no intercept and is applied to the levels as given.
    pub demean: bool,
    pub prior_kind: PriorKind,
}

impl Default for EmpiricalConfig {
    fn default() -> Self {
        Self {
            svd_star_alpha: DEFAULT_ALPHA,
            prior_odds: 1.0,
            log_levels: false,
            demean: false,
            prior_kind: PriorKind::Jeffreys,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EmpiricalRow {
    pub id: String,
    pub t: usize,
    pub start: NaiveDate,
    pub end: NaiveDate,
    pub rho_hat: f64,
    pub svd_star_log_bf: f64,
    pub svd_star_prob: f64,
    pub bic_log_bf: f64,
    pub bic_prob: f64,
    pub df_stat: f64,
    pub df_p: f64,
    pub pr_ge1: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SeriesFailure {
    pub id: String,
    pub message: String,
    /// The input was at fault rather than the numerics.
    pub input_error: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EmpiricalMetadata {
    pub first_date: Option<NaiveDate>,
    pub last_date: Option<NaiveDate>,
    /// Distinct sample lengths, ascending.
    pub t_values: Vec<usize>,
    pub config: EmpiricalConfig,
    pub null_table_reps: usize,
    pub null_table_seed: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EmpiricalReport {
    pub metadata: EmpiricalMetadata,
    pub rows: Vec<EmpiricalRow>,
    pub failures: Vec<SeriesFailure>,
}

fn analyse(record: &SeriesRecord, config: &EmpiricalConfig, tables: &NullTableStore) -> Result<EmpiricalRow> {
    record.validate()?;
    let series = record.to_time_series(config.log_levels, config.demean)?;
    let fit = fit_ar1(&series)?;
    let svd_star = svd_data_driven_fit(&fit, config.svd_star_alpha)?;
    let svd_star = svd_star.evidence.with_prior_odds(config.prior_odds)?;
    let bic = bic_test_fit(&fit, config.prior_odds)?.evidence;
    let df = df_test_fit(&fit, &*tables.get(fit.t)?);
    let pr = tail_prob_ge_one(&fit, config.prior_kind)?;
    Ok(EmpiricalRow {
        id: record.id.clone(),
        t: fit.t,
        start: record.first_date().expect("validated record"),
        end: record.last_date().expect("validated record"),
        rho_hat: fit.rho_hat,
        svd_star_log_bf: svd_star.log_bf_01,
        svd_star_prob: svd_star.posterior_prob(),
        bic_log_bf: bic.log_bf_01,
        bic_prob: bic.posterior_prob(),
        df_stat: df.stat,
        df_p: df.p_value,
        pr_ge1: pr.prob,
    })
}

/// Tests every record concurrently; a failing series is reported in
/// `failures` and does not affect the others. Only an invalid config is an
/// error.
pub fn run_empirical(
    records: &[SeriesRecord],
    config: &EmpiricalConfig,
    tables: &NullTableStore,
) -> Result<EmpiricalReport> {
    if !(config.svd_star_alpha > 0.0 && config.svd_star_alpha < 1.0) {
        return Err(Error::invalid("SVD* alpha must lie in (0, 1)"));
    }
    if !(config.prior_odds.is_finite() && config.prior_odds > 0.0) {
        return Err(Error::invalid("prior odds must be positive and finite"));
    }
    let outcomes: Vec<Result<EmpiricalRow>> = records.par_iter().map(|r| analyse(r, config, tables)).collect();
    let mut rows = Vec::new();
    let mut failures = Vec::new();
    for (record, outcome) in records.iter().zip(outcomes) {
        match outcome {
            Ok(row) => rows.push(row),
            Err(e) => {
                log::warn!("series {}: {e}", record.id);
                failures.push(SeriesFailure {
                    id: record.id.clone(),
                    message: e.to_string(),
                    input_error: e.is_input_error(),
                });
            }
        }
    }
    let mut t_values: Vec<usize> = rows.iter().map(|r| r.t).collect();
    t_values.sort_unstable();
    t_values.dedup();
    Ok(EmpiricalReport {
        metadata: EmpiricalMetadata {
            first_date: rows.iter().map(|r| r.start).min(),
            last_date: rows.iter().map(|r| r.end).max(),
            t_values,
            config: config.clone(),
            null_table_reps: tables.reps(),
            null_table_seed: tables.seed(),
        },
        rows,
        failures,
    })
}

impl EmpiricalReport {
    pub fn table(&self, format: TableFormat) -> TextTable {
        let header: &[&str] = match format {
            TableFormat::Csv => &[
                "id",
                "T",
                "svd_star_log_bf",
                "svd_star_prob",
                "bic_log_bf",
                "bic_prob",
                "df_p",
                "pr_ge1",
            ],
            TableFormat::Markdown => &[
                "Series",
                "T",
                "SVD* log BF",
                "SVD* prob",
                "BIC log BF",
                "BIC prob",
                "DF p",
                "Pr(rho>=1)",
            ],
        };
        let mut table = TextTable::new(header.iter().map(|h| h.to_string()).collect());
        for r in &self.rows {
            table.push(vec![
                r.id.clone(),
                r.t.to_string(),
                fixed(r.svd_star_log_bf, 3),
                fixed(r.svd_star_prob, 3),
                fixed(r.bic_log_bf, 3),
                fixed(r.bic_prob, 3),
                fixed(r.df_p, 3),
                fixed(r.pr_ge1, 3),
            ]);
        }
        table
    }

    pub fn render(&self, format: TableFormat) -> String {
        self.table(format).render(format)
    }
}
