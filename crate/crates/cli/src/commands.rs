use std::path::PathBuf;
use std::time::Duration;

use serde::Serialize;
use serde_json::json;
use unitroot_core::ar1::{simulate_from, InitialCondition, TimeSeries};
use unitroot_core::data_io::{fetch_remote, read_csv, CsvSchema, HttpTransport, RemoteConfig, SeriesRecord};
use unitroot_core::df::{df_test_fit, NullTableStore, DEFAULT_TABLE_REPS, MIN_TABLE_REPS};
use unitroot_core::empirical::{run_empirical, EmpiricalConfig, SeriesFailure};
use unitroot_core::evidence::Evidence;
use unitroot_core::experiments::{render_table_with_se, run_grid, Layout, McGrid, McMethod};
use unitroot_core::posterior::{tail_prob_ge_one, PriorKind};
use unitroot_core::rng::rng_from_seed;
use unitroot_core::table::{fixed, TableFormat, TextTable};
use unitroot_core::{bic::bic_test_fit, fit_ar1, simulate_ar1, svd::svd_data_driven_fit, svd::svd_fixed_fit};

use crate::args::{
    EmpiricalArgs, MonteCarloArgs, NullTableArgs, NullTableOptions, OutputFormat, Schema, SeriesOptions, SimulateArgs,
    Start, TableLayout, TestArgs,
};
use crate::config::FileConfig;
use crate::error::CliError;
use crate::output::{Document, RunInfo};

pub struct Context {
    pub seed: u64,
    pub format: OutputFormat,
    pub file: FileConfig,
}

impl Context {
    fn table_format(&self) -> TableFormat {
        match self.format {
            OutputFormat::Markdown => TableFormat::Markdown,
            _ => TableFormat::Csv,
        }
    }

    fn store(&self, opts: &NullTableOptions) -> Result<NullTableStore, CliError> {
        let reps = opts.null_reps.or(self.file.null_reps).unwrap_or(DEFAULT_TABLE_REPS);
        if reps < MIN_TABLE_REPS {
            return Err(CliError::Usage(format!(
                "--null-reps must be at least {MIN_TABLE_REPS}"
            )));
        }
        let cache = opts.cache_dir.clone().or_else(|| self.file.cache_dir.clone());
        Ok(NullTableStore::new(reps, self.seed, cache))
    }
}

/// What a command produced and the exit code it asks for.
pub struct Outcome {
    pub document: Document,
    pub exit_code: i32,
}

impl From<Document> for Outcome {
    fn from(document: Document) -> Self {
        Self { document, exit_code: 0 }
    }
}

fn start_of(start: Start) -> InitialCondition {
    match start {
        Start::Zero => InitialCondition::Zero,
        Start::Stationary => InitialCondition::Stationary,
    }
}

pub fn simulate(args: &SimulateArgs, ctx: &Context) -> Result<Outcome, CliError> {
    let series = match args.x0 {
        Some(x0) => simulate_ar1(args.rho, args.t, x0, args.sigma, ctx.seed)?,
        None => simulate_from(
            &mut rng_from_seed(ctx.seed),
            args.rho,
            args.t,
            args.sigma,
            start_of(args.start),
        )?,
    };
    let levels: Vec<f64> = std::iter::once(series.x0())
        .chain(series.values().iter().copied())
        .collect();
    let mut table = TextTable::new(vec!["t".into(), "x".into()]);
    for (k, x) in levels.iter().enumerate() {
        table.push(vec![k.to_string(), x.to_string()]);
    }
    let config = json!({ "rho": args.rho, "T": args.t, "sigma": args.sigma, "x0": args.x0, "start": format!("{:?}", args.start) });
    Ok(Document {
        info: RunInfo::new("simulate", ctx.seed, &config),
        notes: vec![("rho".into(), args.rho.to_string()), ("T".into(), args.t.to_string())],
        body: table.render(ctx.table_format()),
        json: json!({ "x0": series.x0(), "values": series.values() }),
    }
    .into())
}

fn transform(levels: &[f64], opts: &SeriesOptions) -> Result<TimeSeries, CliError> {
    let mut levels = levels.to_vec();
    if opts.log_levels {
        if levels.iter().any(|&v| v.is_nan() || v <= 0.0) {
            return Err(CliError::Usage("--log-levels needs positive values".into()));
        }
        levels.iter_mut().for_each(|v| *v = v.ln());
    }
    if opts.demean {
        let mean = levels.iter().sum::<f64>() / levels.len() as f64;
        levels.iter_mut().for_each(|v| *v -= mean);
    }
    Ok(TimeSeries::from_levels(&levels)?)
}

fn pick_series(records: Vec<SeriesRecord>, id: Option<&str>) -> Result<SeriesRecord, CliError> {
    match id {
        Some(id) => records
            .into_iter()
            .find(|r| r.id == id)
            .ok_or_else(|| CliError::Usage(format!("no series '{id}' in the input"))),
        None if records.len() == 1 => Ok(records.into_iter().next().expect("one record")),
        None => Err(CliError::Usage(format!(
            "input holds {} series, choose one with --id",
            records.len()
        ))),
    }
}

#[derive(Debug, Serialize)]
struct MethodRow {
    method: McMethod,
    log_bf_01: Option<f64>,
    posterior_prob: Option<f64>,
    grade: Option<String>,
    statistic: Option<f64>,
    p_value: Option<f64>,
}

impl MethodRow {
    fn bayes(method: McMethod, evidence: Evidence) -> Self {
        Self {
            method,
            log_bf_01: Some(evidence.log_bf_01),
            posterior_prob: Some(evidence.posterior_prob()),
            grade: Some(evidence.grade().to_string()),
            statistic: None,
            p_value: None,
        }
    }
}

pub fn test(args: &TestArgs, ctx: &Context) -> Result<Outcome, CliError> {
    let series = match (&args.series, &args.data) {
        (Some(values), _) => transform(values, &args.transform)?,
        (None, Some(path)) => {
            let record = pick_series(read_csv(path, &CsvSchema::Auto)?, args.id.as_deref())?;
            transform(&record.values(), &args.transform)?
        }
        (None, None) => return Err(CliError::Usage("pass --data or --series".into())),
    };
    let fit = fit_ar1(&series)?;
    let mut rows = Vec::new();
    for method in McMethod::ALL.into_iter().filter(|m| args.methods.contains(m)) {
        let row = match method {
            McMethod::Svd => MethodRow::bayes(method, svd_fixed_fit(&fit, args.a, args.prior_odds)?.evidence),
            McMethod::SvdStar => {
                let evidence = svd_data_driven_fit(&fit, args.alpha)?.evidence;
                MethodRow::bayes(method, evidence.with_prior_odds(args.prior_odds)?)
            }
            McMethod::Bic => MethodRow::bayes(method, bic_test_fit(&fit, args.prior_odds)?.evidence),
            McMethod::Df => {
                let df = df_test_fit(&fit, &*ctx.store(&args.tables)?.get(fit.t)?);
                MethodRow {
                    method,
                    log_bf_01: None,
                    posterior_prob: None,
                    grade: None,
                    statistic: Some(df.stat),
                    p_value: Some(df.p_value),
                }
            }
            McMethod::PrGe1 => MethodRow {
                method,
                log_bf_01: None,
                posterior_prob: Some(tail_prob_ge_one(&fit, PriorKind::Jeffreys)?.prob),
                grade: None,
                statistic: None,
                p_value: None,
            },
        };
        rows.push(row);
    }

    let header = ["method", "log_bf_01", "posterior_prob", "grade", "statistic", "p_value"];
    let mut table = TextTable::new(header.iter().map(|h| h.to_string()).collect());
    let num = |v: Option<f64>| v.map_or_else(String::new, |v| fixed(v, 6));
    for r in &rows {
        table.push(vec![
            r.method.to_string(),
            num(r.log_bf_01),
            num(r.posterior_prob),
            r.grade.clone().unwrap_or_default(),
            num(r.statistic),
            num(r.p_value),
        ]);
    }
    let config = json!({
        "data": args.data, "id": args.id, "series": args.series, "methods": args.methods,
        "alpha": args.alpha, "prior_odds": args.prior_odds, "a": args.a,
        "log_levels": args.transform.log_levels, "demean": args.transform.demean,
        "null_reps": ctx.store(&args.tables)?.reps(),
    });
    Ok(Document {
        info: RunInfo::new("test", ctx.seed, &config),
        notes: vec![
            ("T".into(), fit.t.to_string()),
            ("rho_hat".into(), fit.rho_hat.to_string()),
            ("prior_odds".into(), args.prior_odds.to_string()),
        ],
        body: table.render(ctx.table_format()),
        json: json!({ "t": fit.t, "rho_hat": fit.rho_hat, "prior_odds": args.prior_odds, "methods": rows }),
    }
    .into())
}

pub fn montecarlo(args: &MonteCarloArgs, ctx: &Context) -> Result<Outcome, CliError> {
    let grid = McGrid {
        rhos: args.rhos.clone(),
        ts: args.ts.clone(),
        reps: args.reps,
        master_seed: ctx.seed,
        methods: args.methods.clone(),
        pr_ge1_max_t: args.pr_max_t,
        svd_a: args.a,
        svd_star_alpha: args.alpha,
        prior_kind: PriorKind::Jeffreys,
        start: start_of(args.start),
    };
    grid.validate()?;
    let store = ctx.store(&args.tables)?;
    let cells = run_grid(&grid, &store)?;
    let layout = match args.layout {
        TableLayout::Probs => Layout::Probs,
        TableLayout::LogBf => Layout::LogBf,
    };
    let failed = cells.iter().filter(|c| c.failed).count();
    let config = json!({ "grid": grid, "layout": format!("{:?}", args.layout), "null_reps": store.reps() });
    let document = Document {
        info: RunInfo::new("montecarlo", ctx.seed, &config),
        notes: vec![
            ("reps".into(), grid.reps.to_string()),
            ("null_reps".into(), store.reps().to_string()),
            ("failed_cells".into(), failed.to_string()),
        ],
        body: render_table_with_se(&cells, layout, ctx.table_format()),
        json: json!({ "grid": grid, "cells": cells }),
    };
    Ok(Outcome {
        document,
        exit_code: if failed > 0 { 1 } else { 0 },
    })
}

fn load_records(args: &EmpiricalArgs, ctx: &Context) -> Result<(Vec<SeriesRecord>, Vec<SeriesFailure>), CliError> {
    if let Some(path) = &args.data {
        let schema = match args.schema {
            Schema::Auto => CsvSchema::Auto,
            Schema::Wide => CsvSchema::wide(),
            Schema::Long => CsvSchema::long(),
        };
        return Ok((read_csv(path, &schema)?, Vec::new()));
    }
    let keys = args.fetch.clone().unwrap_or_default();
    let defaults = RemoteConfig::default();
    let remote = RemoteConfig {
        endpoint: args
            .endpoint
            .clone()
            .or_else(|| ctx.file.endpoint.clone())
            .unwrap_or(defaults.endpoint),
        timeout: args
            .timeout
            .or(ctx.file.timeout_secs)
            .map(Duration::from_secs_f64)
            .unwrap_or(defaults.timeout),
        cache_dir: args
            .tables
            .cache_dir
            .clone()
            .or_else(|| ctx.file.cache_dir.clone())
            .map(|d: PathBuf| d.join("remote")),
    };
    let mut records = Vec::new();
    let mut failures = Vec::new();
    for key in keys {
        match fetch_remote(&key, &remote, &HttpTransport) {
            Ok(r) => records.push(r),
            Err(e) => {
                log::warn!("{e}");
                failures.push(SeriesFailure {
                    id: key,
                    message: e.to_string(),
                    input_error: e.is_input_error(),
                });
            }
        }
    }
    Ok((records, failures))
}

pub fn empirical(args: &EmpiricalArgs, ctx: &Context) -> Result<Outcome, CliError> {
    let config = EmpiricalConfig {
        svd_star_alpha: args.alpha,
        prior_odds: args.prior_odds,
        log_levels: args.transform.log_levels,
        demean: args.transform.demean,
        prior_kind: PriorKind::Jeffreys,
    };
    let store = ctx.store(&args.tables)?;
    let (records, fetch_failures) = load_records(args, ctx)?;
    let mut report = run_empirical(&records, &config, &store)?;
    report.failures.splice(0..0, fetch_failures);

    let range = match (report.metadata.first_date, report.metadata.last_date) {
        (Some(a), Some(b)) => format!("{a} to {b}"),
        _ => String::new(),
    };
    let t_values: Vec<String> = report.metadata.t_values.iter().map(|t| t.to_string()).collect();
    let mut notes = vec![
        ("dates".into(), range),
        ("T".into(), t_values.join(",")),
        ("log_levels".into(), config.log_levels.to_string()),
        ("demean".into(), config.demean.to_string()),
        ("alpha".into(), config.svd_star_alpha.to_string()),
        ("null_reps".into(), store.reps().to_string()),
    ];
    for f in &report.failures {
        notes.push((format!("failed {}", f.id), f.message.clone()));
    }
    let exit_code = if report.rows.is_empty() {
        if report.failures.iter().all(|f| f.input_error) {
            2
        } else {
            1
        }
    } else {
        0
    };
    let hash_config = json!({
        "data": args.data, "fetch": args.fetch, "schema": format!("{:?}", args.schema),
        "config": config, "null_reps": store.reps(),
    });
    let document = Document {
        info: RunInfo::new("empirical", ctx.seed, &hash_config),
        notes,
        body: report.render(ctx.table_format()),
        json: serde_json::to_value(&report).expect("report serialises"),
    };
    Ok(Outcome { document, exit_code })
}

pub fn build_null_table(args: &NullTableArgs, ctx: &Context) -> Result<Outcome, CliError> {
    if args.t < 3 {
        return Err(CliError::Usage("--T must be at least 3".into()));
    }
    let store = ctx.store(&args.tables)?;
    let table = store.get(args.t)?;
    let config = json!({ "T": args.t, "null_reps": store.reps() });
    let pairs: Vec<(f64, f64)> = table.pairs().collect();
    Ok(Document {
        info: RunInfo::new("build-null-table", ctx.seed, &config),
        notes: vec![("table".into(), table.id())],
        body: table.to_csv(),
        json: json!({ "t": table.t, "reps": table.reps, "seed": table.seed, "id": table.id(), "quantiles": pairs }),
    }
    .into())
}
