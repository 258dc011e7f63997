use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn gmq(args: &[&str], out: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_gmq"))
        .args(args)
        .arg("--out")
        .arg(out)
        .output()
        .expect("binary runs")
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn json(path: &Path) -> Value {
    serde_json::from_str(&fs::read_to_string(path).unwrap()).unwrap()
}

fn csv_rows(path: &Path) -> Vec<Vec<String>> {
    fs::read_to_string(path)
        .unwrap()
        .lines()
        .skip(1)
        .map(|l| l.split(',').map(str::to_string).collect())
        .collect()
}

#[test]
fn interp_defaults_write_artifacts() {
    let dir = tempfile::tempdir().unwrap();
    let o = gmq(&["interp"], dir.path());
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let s = json(&dir.path().join("interpolant.json"));
    assert_eq!(s["centers"].as_array().unwrap().len(), 50);
    assert!(s["tail"].is_null());
    let rows = csv_rows(&dir.path().join("errors.csv"));
    assert_eq!(rows.len(), 1);
    assert_eq!(rows[0][2], "ok");
    let residual: f64 = rows[0][4].parse().unwrap();
    let scale: f64 = rows[0][3].parse().unwrap();
    assert!(residual <= 1e-8 * scale);
}

#[test]
fn interp_augmented_has_linear_tail() {
    let dir = tempfile::tempdir().unwrap();
    let o = gmq(
        &["interp", "--augmented", "--beta", "1.5", "--n", "30"],
        dir.path(),
    );
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let s = json(&dir.path().join("interpolant_augmented.json"));
    assert_eq!(s["tail"]["degree"], 1);
    assert_eq!(s["tail"]["coefficients"].as_array().unwrap().len(), 3);
}

#[test]
fn interp_nested_sequence_plots() {
    let dir = tempfile::tempdir().unwrap();
    let o = gmq(
        &["interp", "--k", "2", "--n", "10,20,40", "--seed", "3"],
        dir.path(),
    );
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    assert_eq!(csv_rows(&dir.path().join("errors.csv")).len(), 3);
    let svg = fs::read_to_string(dir.path().join("errors.svg")).unwrap();
    assert!(svg.starts_with("<svg"));
}

#[test]
fn interp_duplicate_points_is_usage_error() {
    let dir = tempfile::tempdir().unwrap();
    let data = dir.path().join("dup.csv");
    fs::write(&data, "x,y,f\n0.1,0.2,1\n0.5,0.5,2\n0.1,0.2,3\n").unwrap();
    let o = gmq(&["interp", "--data", data.to_str().unwrap()], dir.path());
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("coincident points"), "{}", stderr(&o));
}

#[test]
fn interp_singular_system_is_exit_one() {
    let dir = tempfile::tempdir().unwrap();
    // k = 1 with 100 nodes is beyond the conditioning guard
    let o = gmq(&["interp", "--k", "1", "--n", "100"], dir.path());
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("sigma_min="), "{}", stderr(&o));
}

#[test]
fn verify_base_case() {
    let dir = tempfile::tempdir().unwrap();
    let o = gmq(&["verify", "--n", "1", "--trials", "10"], dir.path());
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let rows = csv_rows(&dir.path().join("trials.csv"));
    assert_eq!(rows.len(), 10);
    for r in &rows {
        assert_eq!(r[10].parse::<f64>().unwrap(), 0.0);
        assert_eq!(r[8], "full");
    }
    let s = json(&dir.path().join("summary.json"));
    assert_eq!(s["full"], 10);
    assert_eq!(s["config_echo"]["n"], 1);
}

#[test]
fn verify_default_grid_point() {
    let dir = tempfile::tempdir().unwrap();
    let o = gmq(&["verify"], dir.path());
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let stdout = String::from_utf8_lossy(&o.stdout);
    assert!(stdout.contains("deficient"));
    assert_eq!(json(&dir.path().join("summary.json"))["deficient"], 0);
}

#[test]
fn diagnose_defaults_pass() {
    let dir = tempfile::tempdir().unwrap();
    let o = gmq(&["diagnose"], dir.path());
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let r = json(&dir.path().join("diagnose.json"));
    assert!(r["max_identity_defect"].as_f64().unwrap() <= 1e-9);
    assert_eq!(r["cases"].as_array().unwrap().len(), 9);
    assert_eq!(r["pass"], true);
}

#[test]
fn diagnose_k1_reports_closed_form() {
    let dir = tempfile::tempdir().unwrap();
    let o = gmq(&["diagnose", "--k", "1", "--geometries", "10"], dir.path());
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let r = json(&dir.path().join("diagnose.json"));
    for c in r["cases"].as_array().unwrap() {
        assert!(c["max_closed_form_defect"].as_f64().unwrap() <= 1e-12);
    }
}

#[test]
fn diagnose_refuses_large_n() {
    let dir = tempfile::tempdir().unwrap();
    let o = gmq(&["diagnose", "--n", "12"], dir.path());
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("n <= 9"), "{}", stderr(&o));
}

#[test]
fn sweep_over_n() {
    let dir = tempfile::tempdir().unwrap();
    let o = gmq(
        &["sweep", "--n", "5,10,20,40", "--trials", "50"],
        dir.path(),
    );
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let rows = csv_rows(&dir.path().join("sweep.csv"));
    assert_eq!(rows.len(), 4);
    assert!(rows.iter().all(|r| r[7] == "0"));
    assert!(dir.path().join("sweep.svg").exists());
}

#[test]
fn sweep_over_beta_reports_condition() {
    let dir = tempfile::tempdir().unwrap();
    let o = gmq(
        &["sweep", "--beta", "1.5,2.5,3.5", "--trials", "40"],
        dir.path(),
    );
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let conds: Vec<f64> = csv_rows(&dir.path().join("sweep.csv"))
        .iter()
        .map(|r| r[10].parse().unwrap())
        .collect();
    assert_eq!(conds.len(), 3);
    println!("median cond over beta 1.5, 2.5, 3.5: {conds:?}");
}

#[test]
fn single_point_sweep_matches_verify() {
    let dir = tempfile::tempdir().unwrap();
    let args = ["--seed", "99", "--trials", "30"];
    let v = gmq(&[&["verify"][..], &args].concat(), &dir.path().join("v"));
    let s = gmq(&[&["sweep"][..], &args].concat(), &dir.path().join("s"));
    assert_eq!(v.status.code(), Some(0));
    assert_eq!(s.status.code(), Some(0));
    let summary = json(&dir.path().join("v/summary.json"));
    let row = &csv_rows(&dir.path().join("s/sweep.csv"))[0];
    assert_eq!(row[6], summary["full"].to_string());
    assert_eq!(row[7], summary["deficient"].to_string());
    assert_eq!(row[8], summary["indeterminate"].to_string());
    let mut conds: Vec<f64> = csv_rows(&dir.path().join("v/trials.csv"))
        .iter()
        .map(|r| r[13].parse().unwrap())
        .collect();
    conds.sort_by(f64::total_cmp);
    let median = 0.5 * (conds[14] + conds[15]);
    assert_eq!(row[10].parse::<f64>().unwrap(), median);
}

#[test]
fn empty_sweep_grid_is_usage_error() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.toml");
    fs::write(&cfg, "[sweep]\nn = []\n").unwrap();
    let o = gmq(&["--config", cfg.to_str().unwrap(), "sweep"], dir.path());
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("empty grid"));
}

#[test]
fn misspelled_config_key_aborts() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.toml");
    fs::write(&cfg, "[verify]\ntrails = 5\n").unwrap();
    let o = gmq(&["--config", cfg.to_str().unwrap(), "verify"], dir.path());
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("trails"), "{}", stderr(&o));
    assert!(!dir.path().join("trials.csv").exists());
}

#[test]
fn config_file_and_flag_precedence() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.toml");
    fs::write(&cfg, "seed = 5\n[verify]\nn = 4\ntrials = 7\n").unwrap();
    let o = gmq(
        &["--config", cfg.to_str().unwrap(), "verify", "--n", "3"],
        dir.path(),
    );
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let s = json(&dir.path().join("summary.json"));
    assert_eq!(s["trials"], 7);
    assert_eq!(s["config_echo"]["n"], 3);
    assert_eq!(s["config_echo"]["master_seed"], 5);
}

#[test]
fn integer_beta_needs_opt_out() {
    let dir = tempfile::tempdir().unwrap();
    let o = gmq(&["verify", "--beta", "2", "--trials", "5"], dir.path());
    assert_eq!(o.status.code(), Some(2));
    let o = gmq(
        &[
            "verify",
            "--beta",
            "2",
            "--trials",
            "5",
            "--no-theorem-mode",
        ],
        dir.path(),
    );
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
}
