//! End-to-end checks of the binary: flag handling, config files, output
//! schemas, exit codes, and run-to-run determinism.

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn uhlmann(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_uhlmann"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).expect("utf-8 stdout")
}

fn stderr(out: &Output) -> String {
    String::from_utf8(out.stderr.clone()).expect("utf-8 stderr")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("no signal")
}

fn repo_config(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs").join(name)
}

fn parse_profile_csv(text: &str) -> Vec<(f64, f64)> {
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("k,phi_u"));
    lines
        .map(|line| {
            let (k, phi) = line.split_once(',').expect("two columns");
            (k.parse().expect("k parses"), phi.parse().expect("phi parses"))
        })
        .collect()
}

#[test]
fn chern_writes_the_reference_value_as_json() {
    let dir = tempfile::tempdir().unwrap();
    let out_path = dir.path().join("chern.json");
    let out = uhlmann(&[
        "run",
        "--experiment",
        "chern",
        "--grid",
        "50,50",
        "--out",
        out_path.to_str().unwrap(),
    ]);
    assert_eq!(code(&out), 0, "stderr: {}", stderr(&out));

    let envelope: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(&out_path).unwrap()).unwrap();
    assert_eq!(envelope["reports"][0]["name"], "chern_pure");
    assert_eq!(envelope["reports"][0]["value"], -1);
    assert_eq!(envelope["config"]["grid"], serde_json::json!([50, 50]));
    assert!(envelope["version"].is_string());
}

#[test]
fn spectral_violations_exit_with_code_three() {
    let out = uhlmann(&[
        "run", "--experiment", "uhlmann-chern", "--beta", "0", "--grid", "16,16",
    ]);
    assert_eq!(code(&out), 3, "stderr: {}", stderr(&out));
    assert!(stderr(&out).contains("spectral constraint violated"), "{}", stderr(&out));
}

#[test]
fn aliased_windings_exit_with_code_four() {
    let out = uhlmann(&[
        "run",
        "--experiment",
        "uhlmann-wind",
        "--beta",
        "0.9",
        "--axis",
        "x",
        "--grid",
        "12,12",
    ]);
    assert_eq!(code(&out), 4, "stderr: {}", stderr(&out));
    assert!(stderr(&out).contains("under-resolved"), "{}", stderr(&out));
}

#[test]
fn validate_names_every_missing_field() {
    let out = uhlmann(&["validate", "--experiment", "beta-scan"]);
    assert_eq!(code(&out), 2);
    let text = stdout(&out);
    assert!(text.contains("axis:"), "{text}");
    assert!(text.contains("beta-bracket:"), "{text}");
}

#[test]
fn validate_rejects_bad_axis_values_in_files() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bad.toml");
    std::fs::write(&path, "experiment = \"phase-profile\"\nbeta = 1.0\naxis = \"z\"\n")
        .unwrap();
    let out = uhlmann(&["validate", "--config", path.to_str().unwrap()]);
    assert_eq!(code(&out), 2);
    assert!(stdout(&out).contains("unknown variant"), "{}", stdout(&out));
}

#[test]
fn shipped_configs_validate_cleanly() {
    for name in ["phase-profile-x.toml", "beta-scan-y.toml", "uhlmann-chern-inline.toml"] {
        let path = repo_config(name);
        let out = uhlmann(&["validate", "--config", path.to_str().unwrap()]);
        assert_eq!(code(&out), 0, "{name}: {}", stdout(&out));
        assert_eq!(stdout(&out).trim(), "ok", "{name}");
    }
}

#[test]
fn explicit_model_file_matches_the_builtin() {
    let model = repo_config("model-aniso-explicit.toml");
    let from_file = uhlmann(&[
        "run",
        "--experiment",
        "chern",
        "--model",
        model.to_str().unwrap(),
        "--grid",
        "30,30",
        "--format",
        "csv",
    ]);
    let builtin = uhlmann(&[
        "run", "--experiment", "chern", "--model", "builtin", "--grid", "30,30",
        "--format", "csv",
    ]);
    assert_eq!(code(&from_file), 0, "stderr: {}", stderr(&from_file));
    assert_eq!(stdout(&from_file), stdout(&builtin));
    assert!(stdout(&builtin).contains("chern_pure,-1,"), "{}", stdout(&builtin));
}

#[test]
fn profile_csv_follows_the_documented_schema() {
    let out = uhlmann(&[
        "run",
        "--experiment",
        "phase-profile",
        "--beta",
        "1.3",
        "--axis",
        "x",
        "--grid",
        "12,12",
        "--loop-points",
        "48",
        "--format",
        "csv",
    ]);
    assert_eq!(code(&out), 0, "stderr: {}", stderr(&out));
    let rows = parse_profile_csv(&stdout(&out));
    assert_eq!(rows.len(), 12);
    let step = std::f64::consts::TAU / 12.0;
    for (i, (k, phi)) in rows.iter().enumerate() {
        let expected = -std::f64::consts::PI + step * i as f64;
        assert!((k - expected).abs() < 1e-10, "row {i}: k = {k}");
        assert!(phi.abs() <= std::f64::consts::PI + 1e-12, "row {i}: phi = {phi}");
    }
}

#[test]
fn results_are_bit_identical_across_runs_and_thread_counts() {
    let run = |threads: &str| {
        let out = uhlmann(&[
            "run",
            "--experiment",
            "uhlmann-chern",
            "--beta",
            "1.3",
            "--grid",
            "30,30",
            "--format",
            "csv",
            "--threads",
            threads,
        ]);
        assert_eq!(code(&out), 0, "stderr: {}", stderr(&out));
        stdout(&out)
    };
    let first = run("1");
    let second = run("1");
    let parallel = run("3");
    assert_eq!(first, second);
    assert_eq!(first, parallel);
}

#[test]
fn flags_override_config_files() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("run.toml");
    std::fs::write(
        &path,
        "experiment = \"uhlmann-chern\"\nbeta = 5.0\ngrid = [20, 20]\n",
    )
    .unwrap();
    let out = uhlmann(&["run", "--config", path.to_str().unwrap(), "--beta", "1.3"]);
    assert_eq!(code(&out), 0, "stderr: {}", stderr(&out));
    let envelope: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert_eq!(envelope["config"]["beta"], 1.3);
    assert_eq!(envelope["config"]["grid"], serde_json::json!([20, 20]));
    assert_eq!(envelope["reports"][0]["value"], -1);
}

#[test]
fn ignored_fields_warn_but_run() {
    let out = uhlmann(&[
        "run", "--experiment", "chern", "--grid", "20,20", "--beta", "1.0",
    ]);
    assert_eq!(code(&out), 0);
    assert!(stderr(&out).contains("beta is ignored"), "{}", stderr(&out));
    let envelope: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert!(envelope["config"].get("beta").is_none());
    assert_eq!(envelope["warnings"][0], "beta is ignored by chern");
}
