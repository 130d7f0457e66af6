//! Dickey-Fuller test without constant, with p-values read from simulated
//! null tables.

use std::collections::HashMap;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::sync::{Arc, Mutex};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::ar1::{fit_ar1, simulate_from, Ar1Fit, InitialCondition, TimeSeries};
use crate::error::{Error, Result};
use crate::rng::{derive_seed, rng_from_seed};

pub const TABLE_POINTS: usize = 1999;
pub const MIN_TABLE_REPS: usize = 10_000;
pub const DEFAULT_TABLE_REPS: usize = 100_000;
const P_MIN: f64 = 0.0005;
const P_MAX: f64 = 0.9995;
const FORMAT_VERSION: u32 = 1;
const HEADER: &str = "# unitroot df null table";

/// `(ρ̂ − 1)/s`; small values reject the unit root.
pub fn df_statistic(series: &TimeSeries) -> Result<f64> {
    Ok(fit_ar1(series)?.df_statistic())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DfResult {
    /// `(ρ̂ − 1)/s`, the negative of `SvdResult::tau`.
    pub stat: f64,
    pub p_value: f64,
    pub t: usize,
    /// Sample length of the table the p-value was read from.
    pub table_t: usize,
    pub table_id: String,
}

/// Empirical quantiles of the statistic under a Gaussian random walk.
#[derive(Debug, Clone, PartialEq)]
pub struct NullTable {
    pub t: usize,
    pub reps: usize,
    pub seed: u64,
    quantiles: Vec<f64>,
}

fn grid_prob(k: usize) -> f64 {
    (k + 1) as f64 / 2000.0
}

impl NullTable {
    pub fn id(&self) -> String {
        format!("df-nc-v{FORMAT_VERSION}-T{}-r{}-s{}", self.t, self.reps, self.seed)
    }

    pub fn quantiles(&self) -> &[f64] {
        &self.quantiles
    }

    /// `(p, quantile)` pairs at `p = 0.0005, 0.0010, …, 0.9995`.
    pub fn pairs(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        self.quantiles.iter().enumerate().map(|(k, &q)| (grid_prob(k), q))
    }

    pub fn median(&self) -> f64 {
        self.quantiles[TABLE_POINTS / 2]
    }

    /// Quantile at `p`, interpolated between stored points.
    pub fn quantile(&self, p: f64) -> f64 {
        let x = (p * 2000.0 - 1.0).clamp(0.0, (TABLE_POINTS - 1) as f64);
        let k = x.floor() as usize;
        if k + 1 >= TABLE_POINTS {
            return self.quantiles[TABLE_POINTS - 1];
        }
        let w = x - k as f64;
        self.quantiles[k] * (1.0 - w) + self.quantiles[k + 1] * w
    }

    fn validate(&self) -> Result<()> {
        if self.quantiles.len() != TABLE_POINTS {
            return Err(Error::numeric("null table has the wrong number of points"));
        }
        if self.quantiles.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::numeric("null table quantiles are not strictly increasing"));
        }
        Ok(())
    }

    pub fn to_csv(&self) -> String {
        let mut out = format!(
            "{HEADER} v{FORMAT_VERSION}\n# T={} reps={} seed={}\np,quantile\n",
            self.t, self.reps, self.seed
        );
        for (p, q) in self.pairs() {
            // Shortest round-trip formatting keeps reloads bit-exact.
            let _ = writeln!(out, "{p},{q:?}");
        }
        out
    }

    pub fn from_csv(text: &str) -> Result<Self> {
        let bad = |row: usize, msg: &str| Error::Parse {
            source_kind: crate::error::Source::LocalCsv,
            row,
            column: "quantile".into(),
            message: msg.into(),
        };
        let mut lines = text.lines();
        let version = lines.next().unwrap_or_default();
        if version != format!("{HEADER} v{FORMAT_VERSION}") {
            return Err(bad(1, "unknown null table format"));
        }
        let meta = lines.next().unwrap_or_default();
        let field = |key: &str| -> Option<u64> {
            meta.trim_start_matches('#')
                .split_whitespace()
                .find_map(|kv| kv.strip_prefix(key)?.strip_prefix('=')?.parse().ok())
        };
        let (Some(t), Some(reps), Some(seed)) = (field("T"), field("reps"), field("seed")) else {
            return Err(bad(2, "missing T/reps/seed metadata"));
        };
        let _ = lines.next();
        let quantiles = lines
            .enumerate()
            .map(|(i, line)| {
                line.split(',')
                    .nth(1)
                    .and_then(|v| v.trim().parse::<f64>().ok())
                    .ok_or_else(|| bad(i + 4, "unparseable quantile"))
            })
            .collect::<Result<Vec<_>>>()?;
        let table = Self {
            t: t as usize,
            reps: reps as usize,
            seed,
            quantiles,
        };
        table.validate()?;
        Ok(table)
    }
}

/// Simulates `reps` random walks of length `T` and tabulates the statistic.
pub fn build_null_table(t: usize, reps: usize, seed: u64) -> Result<NullTable> {
    if reps < MIN_TABLE_REPS {
        return Err(Error::invalid(format!(
            "null table needs at least {MIN_TABLE_REPS} replications, got {reps}"
        )));
    }
    if t < 3 {
        return Err(Error::invalid("null table needs T >= 3"));
    }
    let mut stats: Vec<f64> = (0..reps as u64)
        .into_par_iter()
        .filter_map(|i| {
            let mut rng = rng_from_seed(derive_seed(seed, &[i]));
            let s = simulate_from(&mut rng, 1.0, t, 1.0, InitialCondition::Zero).ok()?;
            fit_ar1(&s).ok().map(|f| f.df_statistic())
        })
        .collect();
    if stats.len() < reps {
        log::warn!("{} null replications failed to fit", reps - stats.len());
    }
    stats.sort_by(f64::total_cmp);
    let n = stats.len();
    let quantiles = (0..TABLE_POINTS)
        .map(|k| {
            // Linear interpolation between order statistics.
            let h = (n - 1) as f64 * grid_prob(k);
            let lo = h.floor() as usize;
            let w = h - lo as f64;
            let hi = (lo + 1).min(n - 1);
            stats[lo] + w * (stats[hi] - stats[lo])
        })
        .collect();
    let table = NullTable {
        t,
        reps,
        seed,
        quantiles,
    };
    table.validate()?;
    Ok(table)
}

/// Left-tail p-value, interpolated linearly and clamped to `[0.0005, 0.9995]`.
pub fn df_pvalue(stat: f64, table: &NullTable) -> f64 {
    let q = &table.quantiles;
    if stat.is_nan() {
        return f64::NAN;
    }
    if stat <= q[0] {
        return P_MIN;
    }
    if stat >= q[TABLE_POINTS - 1] {
        return P_MAX;
    }
    let k = q.partition_point(|&v| v <= stat) - 1;
    let w = (stat - q[k]) / (q[k + 1] - q[k]);
    (grid_prob(k) + w * (grid_prob(k + 1) - grid_prob(k))).clamp(P_MIN, P_MAX)
}

pub fn df_test_fit(fit: &Ar1Fit, table: &NullTable) -> DfResult {
    let stat = fit.df_statistic();
    DfResult {
        stat,
        p_value: df_pvalue(stat, table),
        t: fit.t,
        table_t: table.t,
        table_id: table.id(),
    }
}

/// Builds null tables on demand, memoised in memory and optionally on disk.
#[derive(Debug)]
pub struct NullTableStore {
    reps: usize,
    seed: u64,
    cache_dir: Option<PathBuf>,
    tables: Mutex<HashMap<usize, Arc<NullTable>>>,
}

impl NullTableStore {
    pub fn new(reps: usize, seed: u64, cache_dir: Option<PathBuf>) -> Self {
        Self {
            reps,
            seed,
            cache_dir,
            tables: Mutex::new(HashMap::new()),
        }
    }

    pub fn reps(&self) -> usize {
        self.reps
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    fn cache_path(&self, t: usize) -> Option<PathBuf> {
        self.cache_dir.as_ref().map(|d| {
            d.join(format!(
                "df-nc-v{FORMAT_VERSION}-T{t}-r{}-s{}.csv",
                self.reps, self.seed
            ))
        })
    }

    /// Table for sample length `t`; the seed is derived from the store seed
    /// and `t` so tables for different lengths are independent.
    pub fn get(&self, t: usize) -> Result<Arc<NullTable>> {
        if let Some(tab) = self.tables.lock().expect("table lock").get(&t) {
            return Ok(Arc::clone(tab));
        }
        let table = Arc::new(self.load_or_build(t)?);
        let mut guard = self.tables.lock().expect("table lock");
        Ok(Arc::clone(guard.entry(t).or_insert(table)))
    }

    fn load_or_build(&self, t: usize) -> Result<NullTable> {
        let seed = derive_seed(self.seed, &[t as u64]);
        let path = self.cache_path(t);
        if let Some(path) = &path {
            if let Ok(text) = fs::read_to_string(path) {
                match NullTable::from_csv(&text) {
                    Ok(tab) if tab.t == t && tab.reps == self.reps && tab.seed == seed => return Ok(tab),
                    _ => log::warn!("ignoring stale null table cache {}", path.display()),
                }
            }
        }
        let table = build_null_table(t, self.reps, seed)?;
        if let Some(path) = &path {
            if let Err(e) = write_cache(path, &table) {
                log::warn!("null table kept in memory only: {e}");
            }
        }
        Ok(table)
    }
}

fn write_cache(path: &Path, table: &NullTable) -> Result<()> {
    if let Some(dir) = path.parent() {
        fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    }
    fs::write(path, table.to_csv()).map_err(|e| Error::io(path, e))
}
