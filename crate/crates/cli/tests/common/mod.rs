//! Helpers for driving the built binary from integration tests.
#![allow(dead_code)]

use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;

pub fn bin() -> PathBuf {
    PathBuf::from(env!("CARGO_BIN_EXE_msstgarch"))
}

/// Runs the binary inside `dir` so relative paths in configs resolve there.
pub fn run(dir: &Path, args: &[&str]) -> Output {
    Command::new(bin())
        .current_dir(dir)
        .args(args)
        .output()
        .expect("binary runs")
}

pub fn run_ok(dir: &Path, args: &[&str]) -> String {
    let out = run(dir, args);
    assert!(
        out.status.success(),
        "{args:?} failed with {:?}\nstdout:\n{}\nstderr:\n{}",
        out.status.code(),
        String::from_utf8_lossy(&out.stdout),
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout).unwrap()
}

pub fn read_json(path: &Path) -> Value {
    let text = fs::read_to_string(path).unwrap_or_else(|e| panic!("{}: {e}", path.display()));
    let v: Value = serde_json::from_str(&text).unwrap_or_else(|e| panic!("{}: {e}", path.display()));
    assert_eq!(v["schema_version"], 1, "{} lacks schema_version", path.display());
    v
}

/// Parses a CSV with a header; every row has the header's width and every
/// cell other than the first column is numeric.
pub fn read_csv(path: &Path) -> (Vec<String>, Vec<Vec<f64>>) {
    let mut reader = csv::Reader::from_path(path).unwrap_or_else(|e| panic!("{}: {e}", path.display()));
    let header: Vec<String> = reader.headers().unwrap().iter().map(str::to_string).collect();
    let mut rows = Vec::new();
    for record in reader.records() {
        let record = record.unwrap();
        assert_eq!(record.len(), header.len());
        let row: Vec<f64> = record
            .iter()
            .skip(1)
            .map(|c| {
                c.parse()
                    .unwrap_or_else(|_| panic!("{}: non-numeric cell {c:?}", path.display()))
            })
            .collect();
        rows.push(row);
    }
    (header, rows)
}

/// simulate -> fit (two variants) -> stability -> forecast -> backtest ->
/// compare, all with relative paths under `dir`.
pub fn pipeline(dir: &Path, length: usize, split: usize, iters: usize, burn_in: usize) {
    let (length, split, iters, burn_in) = (
        length.to_string(),
        split.to_string(),
        iters.to_string(),
        burn_in.to_string(),
    );
    run_ok(dir, &["simulate", "--seed", "42", "--length", &length, "--out", "sim"]);
    for (model, k, out) in [("msstgarch", "2", "fit_msst"), ("garch", "1", "fit_garch")] {
        run_ok(
            dir,
            &[
                "fit",
                "--data",
                "sim/simulated.csv",
                "--model",
                model,
                "--k",
                k,
                "--iters",
                &iters,
                "--burnin",
                &burn_in,
                "--seed",
                "7",
                "--split",
                &split,
                "--out",
                out,
            ],
        );
    }
    run_ok(
        dir,
        &["stability", "--config", "fit_msst/fitted.toml", "--out", "stability"],
    );
    run_ok(
        dir,
        &["forecast", "--config", "fit_msst/fitted.toml", "--out", "forecast"],
    );
    run_ok(
        dir,
        &["backtest", "--config", "fit_msst/fitted.toml", "--out", "backtest"],
    );
    run_ok(
        dir,
        &[
            "compare",
            "--models",
            "fit_msst/fitted.toml,fit_garch/fitted.toml",
            "--data",
            "sim/simulated.csv",
            "--split",
            &split,
            "--out",
            "compare",
        ],
    );
}

pub const PIPELINE_OUTPUTS: [&str; 14] = [
    "sim/simulated.csv",
    "sim/simulate_config.toml",
    "fit_msst/draws.csv",
    "fit_msst/states.csv",
    "fit_msst/summary.json",
    "fit_msst/fitted.toml",
    "fit_garch/summary.json",
    "stability/stability.json",
    "forecast/forecast.csv",
    "backtest/backtest.json",
    "backtest/backtest.txt",
    "compare/compare.json",
    "compare/compare.txt",
    "compare/series.csv",
];

/// Checks that every pipeline output parses and carries the expected shape.
pub fn check_pipeline_schema(dir: &Path, length: usize, split: usize, retained: usize) {
    let (header, rows) = read_csv(&dir.join("sim/simulated.csv"));
    assert_eq!(header, ["t", "return", "state", "h_1", "h_2"]);
    assert_eq!(rows.len(), length);

    let (header, rows) = read_csv(&dir.join("fit_msst/draws.csv"));
    assert_eq!(header.len(), 13);
    assert_eq!(header.last().unwrap(), "loglik");
    assert_eq!(rows.len(), retained);

    let (_, rows) = read_csv(&dir.join("fit_msst/states.csv"));
    assert_eq!(rows.len(), split);
    for r in &rows {
        assert!((r.iter().sum::<f64>() - 1.0).abs() < 1e-9);
    }

    let summary = read_json(&dir.join("fit_msst/summary.json"));
    assert_eq!(summary["k"], 2);
    assert_eq!(summary["observations"], split);
    assert!(summary["dic"].is_f64());
    assert_eq!(summary["posterior"]["params"].as_array().unwrap().len(), 12);

    let stability = read_json(&dir.join("stability/stability.json"));
    assert!(stability["spectral_radius"].as_f64().unwrap() > 0.0);
    assert!(stability["is_stable"].is_boolean());

    let (header, rows) = read_csv(&dir.join("forecast/forecast.csv"));
    assert_eq!(&header[..4], ["t", "return", "squared_return", "variance"]);
    assert_eq!(header.len(), 10);
    assert_eq!(rows.len(), length - split);

    let backtest = read_json(&dir.join("backtest/backtest.json"));
    assert_eq!(backtest["days"], length - split);
    assert_eq!(backtest["rows"].as_array().unwrap().len(), 6);

    let compare = read_json(&dir.join("compare/compare.json"));
    assert_eq!(compare["models"].as_array().unwrap().len(), 2);
    let cmp = &compare["comparisons"][0];
    assert!(cmp["dm"]["outcome"].is_string());
    for acc in cmp["accuracy"].as_array().unwrap() {
        assert!(acc["mse"].as_f64().unwrap() > 0.0);
    }
    let (header, rows) = read_csv(&dir.join("compare/series.csv"));
    assert_eq!(header.len(), 4);
    assert_eq!(rows.len(), length - split);
}
