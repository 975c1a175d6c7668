use std::fs;
use std::path::{Path, PathBuf};

use lmnpt::cli::run_cli;

fn config(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("../../configs")
        .join(name)
}

fn cli(args: &[&str]) -> i32 {
    run_cli(std::iter::once("lmnpt").chain(args.iter().copied()))
}

fn write_config(dir: &Path, body: &str) -> PathBuf {
    let p = dir.join("config.json");
    fs::write(&p, body).unwrap();
    p
}

#[test]
fn validate_writes_reports_and_is_byte_stable() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("run");
    let cfg = write_config(
        dir.path(),
        r#"{"cov": 0.15, "families": ["gumbel", "gamma"], "trials": 20, "n": 60, "seed": 11}"#,
    );
    let args = [
        "validate",
        "--config",
        cfg.to_str().unwrap(),
        "--out",
        out.to_str().unwrap(),
    ];
    assert_eq!(cli(&args), 0);
    let first = fs::read(out.join("report.json")).unwrap();
    let csv = fs::read_to_string(out.join("report.csv")).unwrap();
    assert_eq!(csv.lines().count(), 1 + 2 * 2 * 3);
    assert!(csv.lines().next().unwrap().contains("vr"));
    let curves: Vec<_> = fs::read_dir(&out)
        .unwrap()
        .filter_map(|e| e.ok())
        .map(|e| e.file_name().to_string_lossy().into_owned())
        .filter(|n| n.starts_with("curves_"))
        .collect();
    assert_eq!(curves.len(), 6, "{curves:?}");
    assert_eq!(cli(&args), 0);
    assert_eq!(first, fs::read(out.join("report.json")).unwrap());
}

#[test]
fn sweep_writes_one_row_per_size() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        r#"{"cov": 0.07, "families": ["normal"], "methods": ["lmnpt"], "outliers": ["low"],
            "trials": 5, "sweep_sizes": [50, 100, 150]}"#,
    );
    let out = dir.path().join("sweep");
    assert_eq!(
        cli(&[
            "sweep",
            "--config",
            cfg.to_str().unwrap(),
            "--out",
            out.to_str().unwrap()
        ]),
        0
    );
    let csv = fs::read_to_string(out.join("sweep.csv")).unwrap();
    assert_eq!(csv.lines().count(), 4);
    assert!(out.join("sweep.json").exists());
}

#[test]
fn empirical_runs_on_a_synthetic_dataset() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        r#"{"empirical": {"synthetic": {"links": 2, "windows_per_link": 6, "records_per_window": 40},
            "min_samples": 30}}"#,
    );
    let out = dir.path().join("emp");
    assert_eq!(
        cli(&[
            "empirical",
            "--config",
            cfg.to_str().unwrap(),
            "--out",
            out.to_str().unwrap()
        ]),
        0
    );
    for f in [
        "report.csv",
        "report.json",
        "rejects.csv",
        "synthetic_lpr.csv",
    ] {
        assert!(out.join(f).exists(), "{f}");
    }
    let json: serde_json::Value =
        serde_json::from_slice(&fs::read(out.join("report.json")).unwrap()).unwrap();
    assert_eq!(json["ingest"]["windows"], 12);
    assert_eq!(json["reports"].as_array().unwrap().len(), 6);
}

#[test]
fn empirical_reports_rejected_rows() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("lpr.csv");
    let mut body = String::from("link_id,timestamp,travel_time_seconds\n");
    for i in 0..40 {
        body.push_str(&format!("L1,2024-03-04 08:{:02}:00,{}\n", i % 15, 150 + i));
    }
    body.push_str("L1,2024-03-04 08:01:00,-3\nL1,not a time,160\n,2024-03-04 08:02:00,170\n");
    fs::write(&csv, body).unwrap();
    let cfg = write_config(
        dir.path(),
        &format!(
            r#"{{"empirical": {{"csv": {:?}, "min_samples": 30}}, "methods": ["lmnpt"], "outliers": ["none"]}}"#,
            csv
        ),
    );
    let out = dir.path().join("emp");
    assert_eq!(
        cli(&[
            "empirical",
            "--config",
            cfg.to_str().unwrap(),
            "--out",
            out.to_str().unwrap()
        ]),
        0
    );
    let rejects = fs::read_to_string(out.join("rejects.csv")).unwrap();
    assert_eq!(rejects.lines().count(), 4, "{rejects}");
    assert!(rejects.contains("non-positive travel time"));
}

#[test]
fn domain_and_selftest_succeed() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("domain.csv");
    assert_eq!(
        cli(&["domain", "--out", out.to_str().unwrap(), "--step", "0.01"]),
        0
    );
    let text = fs::read_to_string(&out).unwrap();
    assert!(text.lines().count() > 40);
    assert!(!text.contains("-0,") && !text.contains("-0.0,"));
    assert_eq!(cli(&["selftest"]), 0);
}

#[test]
fn usage_errors_exit_with_two() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(cli(&["validate"]), 2);
    assert_eq!(cli(&["frobnicate"]), 2);
    assert_eq!(
        cli(&["validate", "--config", "/nonexistent/config.json"]),
        2
    );
    let bad = write_config(dir.path(), r#"{"trials": 10, "colour": "blue"}"#);
    assert_eq!(cli(&["validate", "--config", bad.to_str().unwrap()]), 2);
    let zero = write_config(dir.path(), r#"{"cov": 0.07, "trials": 0}"#);
    assert_eq!(cli(&["validate", "--config", zero.to_str().unwrap()]), 2);
    let no_emp = config("normal_cov007.json");
    assert_eq!(cli(&["empirical", "--config", no_emp.to_str().unwrap()]), 2);
    assert_eq!(cli(&["--help"]), 0);
}

#[test]
fn shipped_configs_parse() {
    for entry in fs::read_dir(config("")).unwrap() {
        let path = entry.unwrap().path();
        let cfg = lmnpt::config::RunConfig::load(&path).unwrap();
        if cfg.empirical.is_none() {
            assert!(!cfg.specs().unwrap().is_empty(), "{path:?}");
        }
    }
}
