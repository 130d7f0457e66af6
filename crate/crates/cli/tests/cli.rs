use std::path::PathBuf;
use std::process::{Command, Output};

use serde_json::Value;
use unitroot_core::table::parse_numeric_table;

fn root() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../..")
}

fn unitroot(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_unitroot"))
        .args(args)
        .current_dir(root())
        .env_remove("UNITROOT_CONFIG")
        .output()
        .expect("binary runs")
}

fn stdout(out: &Output) -> String {
    assert!(
        out.status.success(),
        "exit {:?}: {}",
        out.status.code(),
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout.clone()).unwrap()
}

fn json(out: &Output) -> Value {
    serde_json::from_str(&stdout(out)).unwrap()
}

#[test]
fn random_walk_fixture_favours_unit_root() {
    let out = unitroot(&[
        "test",
        "--data",
        "data/random_walk.csv",
        "--methods",
        "bic",
        "--format",
        "json",
    ]);
    let v = json(&out);
    assert!(v["result"]["methods"][0]["posterior_prob"].as_f64().unwrap() > 0.5);
}

#[test]
fn perfect_fit_is_an_input_error() {
    let out = unitroot(&["test", "--series", "1,2,4"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("perfect fit"));
}

#[test]
fn prior_odds_scale_posterior_odds() {
    let series = "0.3,1.1,0.4,-0.2,0.9,1.4,0.8,0.1,-0.5,0.2,0.7";
    let run = |odds: &str| {
        json(&unitroot(&[
            "test",
            "--series",
            series,
            "--methods",
            "svd,svd-star,bic",
            "--prior-odds",
            odds,
            "--format",
            "json",
        ]))
    };
    let (one, three) = (run("1"), run("3"));
    for k in 0..3 {
        let a = &one["result"]["methods"][k];
        let b = &three["result"]["methods"][k];
        assert_eq!(a["log_bf_01"], b["log_bf_01"]);
        let odds = |m: &Value| {
            let p = m["posterior_prob"].as_f64().unwrap();
            p / (1.0 - p)
        };
        assert!((odds(b) / odds(a) - 3.0).abs() < 1e-9, "{}", a["method"]);
    }
}

#[test]
fn usage_errors_exit_with_two() {
    assert_eq!(unitroot(&["montecarlo", "--reps", "0"]).status.code(), Some(2));
    assert_eq!(
        unitroot(&["montecarlo", "--methods", "nonsense"]).status.code(),
        Some(2)
    );
    assert_eq!(unitroot(&["test"]).status.code(), Some(2));
    let missing = unitroot(&["empirical", "--data", "no/such/file.csv"]);
    assert_eq!(missing.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&missing.stderr).contains("no/such/file.csv"));
}

const SMALL_GRID: [&str; 10] = [
    "montecarlo",
    "--rhos",
    "0.9,1.0",
    "--Ts",
    "40",
    "--reps",
    "30",
    "--null-reps",
    "10000",
    "--seed",
];

#[test]
fn montecarlo_is_deterministic_across_threads() {
    let run = |threads: &str| stdout(&unitroot(&[&SMALL_GRID[..], &["11", "--threads", threads]].concat()));
    let a = run("1");
    assert_eq!(a, run("1"));
    assert_eq!(a, run("4"));
    assert!(a.starts_with("# unitroot "));
    assert!(a.contains("# seed: 11\n"));
    let table = parse_numeric_table(&a, &[]).unwrap();
    assert_eq!(
        &table.header[..7],
        ["T", "rho", "svd", "svd_star", "bic", "df", "pr_ge1"]
    );
    assert_eq!(table.rows.len(), 2);
}

#[test]
fn montecarlo_formats_agree() {
    let csv = stdout(&unitroot(&[&SMALL_GRID[..], &["3"]].concat()));
    let v = json(&unitroot(&[&SMALL_GRID[..], &["3", "--format", "json"]].concat()));
    let table = parse_numeric_table(&csv, &[]).unwrap();
    let bic = table.column("bic").unwrap();
    for (k, cell) in v["result"]["cells"].as_array().unwrap().iter().enumerate() {
        let s = cell["summaries"]
            .as_array()
            .unwrap()
            .iter()
            .find(|s| s["method"] == "bic")
            .unwrap();
        assert!((s["table_value"].as_f64().unwrap() - bic[k].unwrap()).abs() <= 5e-4 + 1e-12);
    }
    let md = stdout(&unitroot(&[&SMALL_GRID[..], &["3", "--format", "markdown"]].concat()));
    assert!(md.contains("| T | rho | SVD | SVD* | BIC | DF | Pr(rho>=1) |"));
}

#[test]
fn empirical_fixture_report() {
    let args = ["empirical", "--data", "data/rer_2010_2020.csv", "--null-reps", "20000"];
    let csv = stdout(&unitroot(&args));
    assert_eq!(csv, stdout(&unitroot(&args)));
    let table = parse_numeric_table(&csv, &["id"]).unwrap();
    assert_eq!(table.rows.len(), 9);
    assert_eq!(
        table.header,
        [
            "T",
            "svd_star_log_bf",
            "svd_star_prob",
            "bic_log_bf",
            "bic_prob",
            "df_p",
            "pr_ge1"
        ]
    );
    let v = json(&unitroot(&[&args[..], &["--format", "json"]].concat()));
    let rows = v["result"]["rows"].as_array().unwrap();
    for (row, parsed) in rows.iter().zip(&table.rows) {
        for (key, k) in [("bic_prob", 4), ("svd_star_log_bf", 1), ("df_p", 5), ("pr_ge1", 6)] {
            assert!(
                (row[key].as_f64().unwrap() - parsed[k].unwrap()).abs() <= 5e-4 + 1e-12,
                "{key}"
            );
        }
    }
    assert_eq!(v["result"]["metadata"]["config"]["demean"], false);
}

#[test]
fn config_file_sets_seed() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("unitroot.toml");
    std::fs::write(&path, "seed = 5\nnull_reps = 10000\n").unwrap();
    let out = Command::new(env!("CARGO_BIN_EXE_unitroot"))
        .args(["simulate", "--rho", "0.5", "--T", "5"])
        .env("UNITROOT_CONFIG", &path)
        .output()
        .unwrap();
    let text = stdout(&out);
    assert!(text.contains("# seed: 5\n"));
    let flagged = Command::new(env!("CARGO_BIN_EXE_unitroot"))
        .args(["simulate", "--rho", "0.5", "--T", "5", "--seed", "6"])
        .env("UNITROOT_CONFIG", &path)
        .output()
        .unwrap();
    assert!(stdout(&flagged).contains("# seed: 6\n"));
}

#[test]
fn null_table_written_to_file() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("table.csv");
    let status = unitroot(&[
        "build-null-table",
        "--T",
        "60",
        "--null-reps",
        "10000",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert!(status.status.success());
    let text = std::fs::read_to_string(&out).unwrap();
    let table = parse_numeric_table(&text, &[]).unwrap();
    assert_eq!(table.header, ["p", "quantile"]);
    assert_eq!(table.rows.len(), 1999);
}

#[test]
fn simulate_round_trips_through_test() {
    let text = stdout(&unitroot(&["simulate", "--rho", "0.5", "--T", "200", "--seed", "9"]));
    let table = parse_numeric_table(&text, &[]).unwrap();
    let x: Vec<String> = table
        .column("x")
        .unwrap()
        .iter()
        .map(|v| v.unwrap().to_string())
        .collect();
    let v = json(&unitroot(&[
        "test",
        "--series",
        &x.join(","),
        "--methods",
        "bic",
        "--format",
        "json",
    ]));
    assert_eq!(v["result"]["t"], 200);
    assert!(v["result"]["methods"][0]["posterior_prob"].as_f64().unwrap() < 0.01);
}
