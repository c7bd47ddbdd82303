use std::fs;
use std::path::{Path, PathBuf};

use clap::Parser;
use tempfile::TempDir;

use super::{exit_code, run, Cli};

const READING: &str = concat!(env!("CARGO_MANIFEST_DIR"), "/../core/data/reading_skills.csv");

fn sltb_with_env(args: &[&str], env_seed: Option<&str>) -> Result<(), (u8, String)> {
    let cli = Cli::try_parse_from(std::iter::once("sltb").chain(args.iter().copied())).expect("arguments parse");
    run(cli, env_seed).map_err(|e| (exit_code(&e), e.to_string()))
}

fn sltb(args: &[&str]) -> Result<(), (u8, String)> {
    sltb_with_env(args, None)
}

fn failure(r: Result<(), (u8, String)>) -> (u8, String) {
    r.expect_err("command should fail")
}

fn write(dir: &Path, name: &str, text: &str) -> PathBuf {
    let p = dir.join(name);
    fs::write(&p, text).unwrap();
    p
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

const INTERACTION_SPEC: &str = r#"{"response": "accuracy1", "terms": ["dyslexia", "iq", "dyslexia:iq"],
  "factors": {"dyslexia": {"reference": "no", "coding": "sum"}}}"#;

fn csv_rows(path: &Path) -> Vec<Vec<String>> {
    fs::read_to_string(path)
        .unwrap()
        .lines()
        .map(|l| l.split(',').map(str::to_owned).collect())
        .collect()
}

/// Every output except the run-dependent timing and manifest files.
fn reproducible_outputs(dir: &Path) -> Vec<(String, Vec<u8>)> {
    let mut files: Vec<(String, Vec<u8>)> = fs::read_dir(dir)
        .unwrap()
        .map(|e| e.unwrap().path())
        .filter(|p| !matches!(p.file_name().unwrap().to_str().unwrap(), "timing.json" | "manifest.json"))
        .map(|p| (p.file_name().unwrap().to_string_lossy().into_owned(), fs::read(&p).unwrap()))
        .collect();
    files.sort();
    files
}

#[test]
fn fit_writes_coefficient_table_and_manifest() {
    let tmp = TempDir::new().unwrap();
    let spec = write(tmp.path(), "spec.json", INTERACTION_SPEC);
    let out = tmp.path().join("fit");
    let o = sltb(&["fit", "--data", READING, "--spec", s(&spec), "--out", s(&out)]);
    o.unwrap();
    let rows = csv_rows(&out.join("coefficients.csv"));
    assert_eq!(rows[0], ["term", "estimate", "std_error", "z", "p"]);
    assert_eq!(rows.len(), 5);
    assert_eq!(rows[1][0], "(Intercept)");
    assert_eq!(csv_rows(&out.join("residuals.csv")).len(), 45);
    let mse: serde_json::Value = serde_json::from_slice(&fs::read(out.join("mse.json")).unwrap()).unwrap();
    assert_eq!(mse["n_ones"], 13);
    let manifest: serde_json::Value = serde_json::from_slice(&fs::read(out.join("manifest.json")).unwrap()).unwrap();
    assert_eq!(manifest["command"], "fit");
    assert_eq!(manifest["inputs"].as_array().unwrap().len(), 2);
    assert_eq!(manifest["inputs"][0]["sha256"].as_str().unwrap().len(), 64);
}

#[test]
fn beta_family_on_boundary_data_is_rejected() {
    let tmp = TempDir::new().unwrap();
    let spec = write(tmp.path(), "spec.json", INTERACTION_SPEC);
    let (code, msg) = failure(sltb(&["fit", "--data", READING, "--spec", s(&spec), "--family", "beta", "--out", s(&tmp.path().join("o"))]));
    assert_eq!(code, 2, "{msg}");
    assert!(msg.contains("13 rows at 0 or 1"), "{msg}");
}

#[test]
fn intercept_only_spec_gives_one_coefficient() {
    let tmp = TempDir::new().unwrap();
    let spec = write(tmp.path(), "spec.json", r#"{"response": "accuracy", "terms": []}"#);
    let out = tmp.path().join("o");
    let o = sltb(&["fit", "--data", READING, "--spec", s(&spec), "--out", s(&out)]);
    o.unwrap();
    assert_eq!(csv_rows(&out.join("coefficients.csv")).len(), 2);
}

#[test]
fn malformed_csv_reports_the_line() {
    let tmp = TempDir::new().unwrap();
    let data = write(tmp.path(), "d.csv", "y,x\n0.2,1\n0.3\n0.4,2\n");
    let spec = write(tmp.path(), "spec.json", r#"{"response": "y", "terms": ["x"]}"#);
    let (code, msg) = failure(sltb(&["fit", "--data", s(&data), "--spec", s(&spec), "--out", s(&tmp.path().join("o"))]));
    assert_eq!(code, 2, "{msg}");
    assert!(msg.contains("line 3"), "{msg}");
}

#[test]
fn unidentified_optimum_is_a_numerical_failure() {
    // Without the interaction every control child sits at the upper bound, so
    // that group's mean runs off to 1.
    let tmp = TempDir::new().unwrap();
    let spec = write(
        tmp.path(),
        "spec.json",
        r#"{"response": "accuracy1", "terms": ["dyslexia", "iq"], "factors": {"dyslexia": "yes"}}"#,
    );
    let (code, msg) = failure(sltb(&["fit", "--data", READING, "--spec", s(&spec), "--out", s(&tmp.path().join("o"))]));
    assert_eq!(code, 3, "{msg}");
}

#[test]
fn simulate_rejects_zero_replications() {
    let tmp = TempDir::new().unwrap();
    let cfg = write(tmp.path(), "c.json", r#"{"reps": 0}"#);
    let (code, msg) = failure(sltb(&["simulate", "--config", s(&cfg), "--out", s(&tmp.path().join("o"))]));
    assert_eq!(code, 2, "{msg}");
}

#[test]
fn unknown_config_fields_are_rejected() {
    let tmp = TempDir::new().unwrap();
    let cfg = write(tmp.path(), "c.json", r#"{"replications": 5}"#);
    let (code, msg) = failure(sltb(&["simulate", "--config", s(&cfg), "--out", s(&tmp.path().join("o"))]));
    assert_eq!(code, 2, "{msg}");
    assert!(msg.contains("replications"), "{msg}");
}

#[test]
fn chain_shorter_than_burnin_is_rejected() {
    let tmp = TempDir::new().unwrap();
    let cfg = write(tmp.path(), "c.json", r#"{"sampler": {"chain": {"iterations": 10, "burnin": 10, "thin": 1}}}"#);
    let (code, msg) = failure(sltb(&["hier-nonlinear", "--config", s(&cfg), "--out", s(&tmp.path().join("o"))]));
    assert_eq!(code, 2, "{msg}");
}

fn density(tmp: &TempDir, name: &str, extra: &[&str]) -> Vec<Vec<String>> {
    let out = tmp.path().join(name);
    let mut args = vec!["density", "--out", s(&out)];
    args.extend_from_slice(extra);
    let o = sltb(&args);
    o.unwrap();
    csv_rows(&out.join("density.csv"))
}

#[test]
fn default_density_matches_beta_inside_and_is_finite_at_the_ends() {
    let tmp = TempDir::new().unwrap();
    let rows = density(&tmp, "d", &["--grid-n", "101"]);
    assert_eq!(rows[0], ["g", "sltb_pdf", "beta_pdf"]);
    assert_eq!(rows.len(), 102);
    for end in [&rows[1], &rows[101]] {
        assert_eq!(end[2], "");
        let v: f64 = end[1].parse().unwrap();
        assert!(v.is_finite() && v > 0.0);
    }
    let gap = rows[2..101]
        .iter()
        .map(|r| (r[1].parse::<f64>().unwrap() - r[2].parse::<f64>().unwrap()).abs())
        .fold(0.0, f64::max);
    assert!(gap < 1e-6, "{gap}");
}

#[test]
fn uniform_density_is_flat() {
    let tmp = TempDir::new().unwrap();
    for r in &density(&tmp, "u", &["--phi", "2", "--grid-n", "41"])[1..] {
        assert!((r[1].parse::<f64>().unwrap() - 1.0).abs() < 1e-12, "{r:?}");
    }
}

#[test]
fn illustration_preset_sets_scale_and_location() {
    let tmp = TempDir::new().unwrap();
    let rows = density(&tmp, "f", &["--preset", "illustration", "--grid-n", "11"]);
    let manifest: serde_json::Value =
        serde_json::from_slice(&fs::read(tmp.path().join("f/manifest.json")).unwrap()).unwrap();
    assert_eq!(manifest["config"]["s"], 1.08);
    assert_eq!(manifest["config"]["l"], 0.04);
    let mid: f64 = rows[6][1].parse().unwrap();
    assert!(mid < rows[6][2].parse::<f64>().unwrap());
}

#[test]
fn density_grid_needs_two_points() {
    let tmp = TempDir::new().unwrap();
    let (code, msg) = failure(sltb(&["density", "--grid-n", "1", "--out", s(&tmp.path().join("o"))]));
    assert_eq!(code, 2, "{msg}");
}

#[test]
fn environment_seed_is_a_fallback() {
    let tmp = TempDir::new().unwrap();
    let cfg = write(tmp.path(), "c.json", r#"{"reps": 3}"#);
    let run = |name: &str, extra: &[&str]| -> serde_json::Value {
        let out = tmp.path().join(name);
        let mut args = vec!["simulate", "--config", s(&cfg), "--out", s(&out)];
        args.extend_from_slice(extra);
        sltb_with_env(&args, Some("77")).unwrap();
        serde_json::from_slice(&fs::read(out.join("manifest.json")).unwrap()).unwrap()
    };
    assert_eq!(run("env", &[])["seed"], 77);
    assert_eq!(run("flag", &["--seed", "5"])["seed"], 5);
}

#[test]
fn replay_reproduces_outputs_and_checks_inputs() {
    let tmp = TempDir::new().unwrap();
    let data = tmp.path().join("reading.csv");
    fs::copy(READING, &data).unwrap();
    let spec = write(tmp.path(), "spec.json", INTERACTION_SPEC);
    let first = tmp.path().join("first");
    sltb(&["fit", "--data", s(&data), "--spec", s(&spec), "--out", s(&first)]).unwrap();
    let again = tmp.path().join("again");
    let o = sltb(&["replay", "--manifest", s(&first.join("manifest.json")), "--out", s(&again)]);
    o.unwrap();
    assert_eq!(reproducible_outputs(&first), reproducible_outputs(&again));

    fs::write(&data, fs::read_to_string(&data).unwrap().replace("0.88386", "0.88387")).unwrap();
    let (code, msg) = failure(sltb(&["replay", "--manifest", s(&first.join("manifest.json")), "--out", s(&tmp.path().join("x"))]));
    assert_eq!(code, 2, "{msg}");
    assert!(msg.contains("changed"), "{msg}");
}

#[test]
fn short_chains_produce_draws_and_reports() {
    let tmp = TempDir::new().unwrap();
    let cfg = write(
        tmp.path(),
        "c.json",
        r#"{"simulation": {"n_subjects": 10}, "sampler": {"chain": {"iterations": 300, "burnin": 100, "thin": 2}}}"#,
    );
    let out = tmp.path().join("n");
    let o = sltb(&["hier-nonlinear", "--config", s(&cfg), "--seed", "3", "--out", s(&out)]);
    o.unwrap();
    let report = csv_rows(&out.join("report.csv"));
    assert_eq!(report.len(), 1 + 4 + 3);
    assert!(report.iter().any(|r| r[0] == "normal" && r[1] == "sigma2"));
    assert_eq!(csv_rows(&out.join("draws_sltb.csv")).len(), 101);
    let sltb_mu = report.iter().find(|r| r[0] == "sltb" && r[1] == "mu_psi").unwrap();
    assert_eq!(sltb_mu[7], "-4.87");
}
