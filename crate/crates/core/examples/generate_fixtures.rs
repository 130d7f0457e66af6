//! Writes the bundled CSV fixtures under `data/`.
//!
//! `cargo run -p unitroot-core --example generate_fixtures [-- <out dir>]`
//!
//! The exchange-rate panel is synthetic: nine monthly log-AR(1) series,
//! January 2010 to November 2020, around index level 100. EUR starts 35%
//! above its equilibrium with the least persistence, so over the sample it
//! visibly reverts and is the most clearly stationary of the nine.

use std::fmt::Write as _;
use std::fs;
use std::path::PathBuf;

use chrono::{Months, NaiveDate};
use rand::Rng;
use rand_distr::StandardNormal;
use unitroot_core::rng::{derive_seed, rng_from_seed};

const FIXTURE_SEED: u64 = 20_201_130;
const MONTHS: usize = 131;
const SHOCK_SD: f64 = 0.02;

/// Currency, AR(1) coefficient of its log real exchange rate, and the log
/// deviation from equilibrium before the first month.
const PANEL: [(&str, f64, f64); 9] = [
    ("AUD", 0.97, 0.0),
    ("CAD", 0.99, 0.0),
    ("CHF", 0.99, 0.0),
    ("CNY", 0.985, 0.0),
    ("EUR", 0.95, 0.3),
    ("GBP", 0.98, 0.0),
    ("HKD", 0.995, 0.0),
    ("JPY", 0.99, 0.0),
    ("USD", 0.995, 0.0),
];

fn month(k: usize) -> NaiveDate {
    NaiveDate::from_ymd_opt(2010, 1, 1).unwrap() + Months::new(k as u32)
}

fn log_ar1(rho: f64, start: f64, seed: u64) -> Vec<f64> {
    let mut rng = rng_from_seed(seed);
    let mut y = start;
    (0..MONTHS)
        .map(|_| {
            let u: f64 = rng.sample(StandardNormal);
            y = rho * y + SHOCK_SD * u;
            y
        })
        .collect()
}

fn level(y: f64) -> String {
    format!("{:.4}", 100.0 * y.exp())
}

fn main() -> std::io::Result<()> {
    let out: PathBuf = std::env::args().nth(1).map_or_else(|| "data".into(), PathBuf::from);
    fs::create_dir_all(&out)?;

    let paths: Vec<Vec<f64>> = PANEL
        .iter()
        .enumerate()
        .map(|(k, &(_, rho, start))| log_ar1(rho, start, derive_seed(FIXTURE_SEED, &[k as u64])))
        .collect();

    let mut wide = String::from("date");
    for (id, ..) in PANEL {
        write!(wide, ",{id}").unwrap();
    }
    wide.push('\n');
    for m in 0..MONTHS {
        write!(wide, "{}", month(m).format("%Y-%m")).unwrap();
        for path in &paths {
            write!(wide, ",{}", level(path[m])).unwrap();
        }
        wide.push('\n');
    }
    fs::write(out.join("rer_2010_2020.csv"), wide)?;

    let mut long = String::from("date,id,value\n");
    for ((id, ..), path) in PANEL.iter().zip(&paths) {
        for (m, y) in path.iter().enumerate() {
            writeln!(long, "{},{id},{}", month(m).format("%Y-%m-%d"), level(*y)).unwrap();
        }
    }
    fs::write(out.join("rer_2010_2020_long.csv"), long)?;

    let walk = log_ar1(1.0, 0.0, derive_seed(FIXTURE_SEED, &[99]));
    let mut rw = String::from("date,RW\n");
    for (m, y) in walk.iter().enumerate() {
        writeln!(rw, "{},{}", month(m).format("%Y-%m"), level(*y)).unwrap();
    }
    fs::write(out.join("random_walk.csv"), rw)?;
    Ok(())
}
