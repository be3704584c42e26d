use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn hdbp(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_hdbp"))
        .args(args)
        .current_dir(dir)
        .output()
        .expect("binary runs")
}

fn stdout_json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).unwrap_or_else(|e| {
        panic!(
            "stdout is not JSON ({e}): {}\nstderr: {}",
            String::from_utf8_lossy(&out.stdout),
            String::from_utf8_lossy(&out.stderr)
        )
    })
}

fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

#[test]
fn lambda_default_and_coarse() {
    let dir = tempfile::tempdir().unwrap();
    let out = hdbp(dir.path(), &["lambda"]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let fine = stdout_json(&out);
    assert_eq!(fine["lambda"], "1.1657706116");
    assert!(dir.path().join("hdbp-manifest.json").exists());

    let out = hdbp(dir.path(), &["lambda", "--tolerance", "1e-3"]);
    let coarse = stdout_json(&out);
    assert!(coarse["truncation_order"].as_u64() < fine["truncation_order"].as_u64());
    assert!(coarse["lambda"].as_str().unwrap().starts_with("1.1657"));
}

#[test]
fn lambda_zero_tolerance_is_numeric_failure() {
    let dir = tempfile::tempdir().unwrap();
    let out = hdbp(dir.path(), &["lambda", "--tolerance", "0"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn usage_errors_exit_one() {
    let dir = tempfile::tempdir().unwrap();
    for args in [
        &["--no-such-flag"][..],
        &[],
        &["frobnicate"],
        &["simulate", "--p", "0.1"],
        &["--threads", "0", "minset", "--d", "3"],
        &["simulate", "--sides", "3,2", "--p", "0.1", "--compare-exact"],
    ] {
        let out = hdbp(dir.path(), args);
        assert_eq!(out.status.code(), Some(1), "{args:?}: {}", stderr(&out));
    }
    let out = hdbp(dir.path(), &["--help"]);
    assert_eq!(out.status.code(), Some(0));
}

#[test]
fn oracle_base_claim() {
    let dir = tempfile::tempdir().unwrap();
    let out = hdbp(dir.path(), &["oracle", "--dim", "4", "--size", "3"]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let v = stdout_json(&out);
    assert_eq!(v["counts"]["spanning"], "144");
    assert_eq!(v["counts"]["r_star"], "144");
}

#[test]
fn oracle_guard_exits_two() {
    let dir = tempfile::tempdir().unwrap();
    let out = hdbp(dir.path(), &["oracle", "--dim", "6", "--size", "4", "--guard", "1000"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("guard"), "{}", stderr(&out));
}

#[test]
fn minset_three_by_three() {
    let dir = tempfile::tempdir().unwrap();
    let out = hdbp(dir.path(), &["minset", "--n", "3", "--d", "2"]);
    let text = String::from_utf8_lossy(&out.stdout);
    assert!(text.contains("\"percolates\": true"), "{text}");
    let v = stdout_json(&out);
    assert_eq!(v["cells"].as_array().unwrap().len(), 3);

    let out = hdbp(dir.path(), &["--format", "csv", "minset", "--n", "3", "--d", "2"]);
    assert_eq!(String::from_utf8_lossy(&out.stdout).lines().count(), 4);
}

#[test]
fn simulate_compare_exact_passes() {
    let dir = tempfile::tempdir().unwrap();
    let args = [
        "--seed",
        "5",
        "simulate",
        "--target",
        "sequential-cube",
        "--l",
        "2",
        "--p",
        "0.02",
        "--samples",
        "50000",
        "--compare-exact",
    ];
    let out = hdbp(dir.path(), &args);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let line = stderr(&out);
    assert!(line.starts_with("PASS") && line.contains("z = "), "{line}");
    let v = stdout_json(&out);
    assert_eq!(v["comparison"]["verdict"], "PASS");
    assert_eq!(v["config"]["shape"], serde_json::json!([2, 2, 2, 2]));
}

#[test]
fn full_grid_exact_value_on_square() {
    let dir = tempfile::tempdir().unwrap();
    let out = hdbp(
        dir.path(),
        &[
            "simulate",
            "--d",
            "2",
            "--p",
            "0.5",
            "--samples",
            "20000",
            "--compare-exact",
        ],
    );
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let v = stdout_json(&out);
    // Two diagonal pairs, four triples and the full square span [2]^2.
    assert!((v["comparison"]["exact"].as_f64().unwrap() - 7.0 / 16.0).abs() < 1e-12);
}

#[test]
fn tables_are_deterministic_and_contain_144() {
    let dir = tempfile::tempdir().unwrap();
    for name in ["a.csv", "b.csv"] {
        let out = hdbp(
            dir.path(),
            &["--format", "csv", "--out", name, "tables", "--ell-max", "5"],
        );
        assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
        assert!(dir.path().join(format!("{name}.manifest.json")).exists());
    }
    let a = fs::read(dir.path().join("a.csv")).unwrap();
    assert_eq!(a, fs::read(dir.path().join("b.csv")).unwrap());
    let text = String::from_utf8(a).unwrap();
    assert!(text.lines().any(|l| l == "4,S,exact,144"), "{text}");
}

#[test]
fn published_check_exit_code_tracks_mismatches() {
    let dir = tempfile::tempdir().unwrap();
    let out = hdbp(dir.path(), &["tables", "--ell-max", "14", "--check-published"]);
    let err = stderr(&out);
    assert!(err.contains("published cells:"), "{err}");
    let mismatches = err.lines().filter(|l| l.starts_with("MISMATCH")).count();
    let expected = if mismatches == 0 { 0 } else { 3 };
    assert_eq!(out.status.code(), Some(expected), "{err}");
    // The tables are written either way.
    assert!(stdout_json(&out)["rows"].as_array().unwrap().len() > 10);
}

#[test]
fn run_spec_replay_matches() {
    let dir = tempfile::tempdir().unwrap();
    let args = [
        "--seed",
        "11",
        "simulate",
        "--d",
        "4",
        "--p",
        "0.1",
        "--samples",
        "3000",
    ];
    let first = hdbp(dir.path(), &args);
    assert_eq!(first.status.code(), Some(0), "{}", stderr(&first));

    // From the manifest.
    let replay = hdbp(dir.path(), &["--run-spec", "hdbp-manifest.json"]);
    assert_eq!(replay.stdout, first.stdout);

    // From a dry-run spec.
    let mut dry_args = args.to_vec();
    dry_args.push("--dry-run");
    let dry = hdbp(dir.path(), &dry_args);
    fs::write(dir.path().join("spec.json"), &dry.stdout).unwrap();
    let replay = hdbp(dir.path(), &["--run-spec", "spec.json"]);
    assert_eq!(replay.stdout, first.stdout);

    // Unknown fields are rejected.
    let mut v: Value = serde_json::from_slice(&dry.stdout).unwrap();
    v["command"]["simulate"]["temperature"] = Value::from(3);
    fs::write(dir.path().join("bad.json"), v.to_string()).unwrap();
    let out = hdbp(dir.path(), &["--run-spec", "bad.json"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(stderr(&out).contains("temperature"), "{}", stderr(&out));
}

#[test]
fn seed_changes_estimate() {
    let dir = tempfile::tempdir().unwrap();
    let run = |seed: &str| {
        let out = hdbp(
            dir.path(),
            &[
                "--seed",
                seed,
                "simulate",
                "--d",
                "5",
                "--p",
                "0.1",
                "--samples",
                "2000",
            ],
        );
        stdout_json(&out)["estimate"]["successes"].clone()
    };
    assert_eq!(run("1"), run("1"));
    assert_ne!(run("1"), run("2"));
}

#[test]
fn techlemma_and_predict_run() {
    let dir = tempfile::tempdir().unwrap();
    let out = hdbp(dir.path(), &["techlemma", "--ell", "100"]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    assert_eq!(stdout_json(&out)["holds"], true);

    fs::write(dir.path().join("gh.json"), r#"{"g": [0, 0.1, 0.1], "h": [1, 1.2, 1]}"#).unwrap();
    let out = hdbp(dir.path(), &["techlemma", "--ell", "3", "--input", "gh.json"]);
    assert_eq!(out.status.code(), Some(2), "h(1) above 1 + g(1) is rejected");

    let out = hdbp(dir.path(), &["predict", "--d", "12", "--variant", "sharp"]);
    let v = stdout_json(&out);
    assert_eq!(v["predictions"].as_array().unwrap().len(), 1);
    assert!(v["predictions"][0]["p_c"].as_f64().unwrap() > 0.0);
}

#[test]
fn pc_reports_probes() {
    let dir = tempfile::tempdir().unwrap();
    let out = hdbp(
        dir.path(),
        &[
            "--threads",
            "1",
            "pc",
            "--d",
            "4",
            "--samples-per-probe",
            "1000",
            "--max-probes",
            "8",
        ],
    );
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let v = stdout_json(&out);
    let probes = v["probes"].as_array().unwrap();
    assert!(!probes.is_empty() && probes.len() <= 8);
    let (lo, hi) = (v["bracket"][0].as_f64().unwrap(), v["bracket"][1].as_f64().unwrap());
    assert!(lo < hi);
}
