use ftn_tbp_cli::config::ExperimentConfig;
use serde_json::Value;
use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn bin() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_ftn-tbp"));
    c.env("RUST_LOG", "warn");
    c
}

fn run_config(dir: &Path, json: &str, extra: &[&str]) -> Output {
    let cfg = dir.join("config.json");
    fs::write(&cfg, json).unwrap();
    bin().arg("run").arg(&cfg).arg("--out-dir").arg(dir.join("out")).args(extra).output().unwrap()
}

fn manifest(dir: &Path, stem: &str) -> Value {
    serde_json::from_str(&fs::read_to_string(dir.join("out").join(format!("{stem}.manifest.json"))).unwrap()).unwrap()
}

const SMALL_OOB: &str = r#"{"experiment": "fig4-oob", "beta": [0.5], "c": [4.0, 8.0]}"#;

#[test]
fn same_config_and_seed_give_identical_csv() {
    let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    let cfg = r#"{"experiment": "custom", "omega": [40], "rho_db": [10], "tau": [0.7], "beta": [1.0], "c": [8.57]}"#;
    assert!(run_config(a.path(), cfg, &["--workers", "1"]).status.success());
    assert!(run_config(b.path(), cfg, &["--workers", "2"]).status.success());
    let x = fs::read(a.path().join("out/custom.csv")).unwrap();
    let y = fs::read(b.path().join("out/custom.csv")).unwrap();
    assert_eq!(x, y);
    let text = String::from_utf8(x).unwrap();
    assert!(text.starts_with("pulse,omega,rho_db,tau,beta,eps_w,pe,c,n,capacity,na_rate,mc_rate,rcu_rate\n"));
    assert_eq!(text.lines().count(), 2);
}

#[test]
fn seed_flag_changes_monte_carlo_columns_only() {
    let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    let cfg = r#"{"experiment": "custom", "omega": [40], "rho_db": [10], "tau": [0.7], "beta": [1.0], "c": [8.57]}"#;
    assert!(run_config(a.path(), cfg, &["--seed", "1"]).status.success());
    assert!(run_config(b.path(), cfg, &["--seed", "2"]).status.success());
    let row = |d: &Path| fs::read_to_string(d.join("out/custom.csv")).unwrap().lines().nth(1).unwrap().to_string();
    let (x, y) = (row(a.path()), row(b.path()));
    let (x, y): (Vec<&str>, Vec<&str>) = (x.split(',').collect(), y.split(',').collect());
    assert_eq!(x[..12], y[..12]);
    assert_ne!(x[12], y[12]);
    assert_eq!(manifest(b.path(), "custom")["seed"], 2);
}

#[test]
fn zero_tau_is_a_config_error_with_no_output() {
    let d = tempfile::tempdir().unwrap();
    let out = run_config(d.path(), r#"{"experiment": "custom", "tau": [0.0]}"#, &[]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("tau[0]"));
    assert!(!d.path().join("out").exists());
}

#[test]
fn unknown_key_reports_its_line() {
    let d = tempfile::tempdir().unwrap();
    let out = run_config(d.path(), "{\n  \"experiment\": \"fig2\",\n  \"rho\": [10]\n}", &[]);
    assert_eq!(out.status.code(), Some(1));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("line 3") && err.contains("unknown field"), "{err}");
}

#[test]
fn numeric_failure_writes_failed_manifest() {
    let d = tempfile::tempdir().unwrap();
    // a Fourier-series pulse needs T_p above one Nyquist interval
    let out = run_config(d.path(), r#"{"experiment": "table1-opt", "c": [1.0], "omega": [10]}"#, &[]);
    assert_eq!(out.status.code(), Some(2), "{}", String::from_utf8_lossy(&out.stderr));
    let m = manifest(d.path(), "table1-opt");
    assert_eq!(m["status"], "FAILED");
    assert!(m["errors"][0].as_str().unwrap().contains("T_p"));
    assert_eq!(m["points"][0]["status"], "error");
    let csv = fs::read_to_string(d.path().join("out/table1-opt.csv")).unwrap();
    assert_eq!(csv.lines().count(), 1);
    assert!(d.path().join("out/table1-opt.checkpoint.json").exists());
}

#[test]
fn resume_reuses_checkpointed_points() {
    let d = tempfile::tempdir().unwrap();
    let cfg = ExperimentConfig::from_json(SMALL_OOB).unwrap();
    fs::create_dir_all(d.path().join("out")).unwrap();
    let fake = serde_json::json!({
        "fingerprint": cfg.fingerprint(),
        "parts": {"0": {"rows": [["rrc", "0.5", "4", "0.123"]], "diag": null}},
    });
    fs::write(d.path().join("out/fig4-oob.checkpoint.json"), fake.to_string()).unwrap();
    let out = run_config(d.path(), SMALL_OOB, &["--resume"]);
    assert!(out.status.success());
    let csv = fs::read_to_string(d.path().join("out/fig4-oob.csv")).unwrap();
    assert!(csv.contains("rrc,0.5,4,0.123\n"), "{csv}");
    assert_eq!(manifest(d.path(), "fig4-oob")["resumed_points"], 1);
    assert!(!d.path().join("out/fig4-oob.checkpoint.json").exists());

    // without --resume the checkpoint is ignored
    let fresh = tempfile::tempdir().unwrap();
    assert!(run_config(fresh.path(), SMALL_OOB, &[]).status.success());
    assert!(!fs::read_to_string(fresh.path().join("out/fig4-oob.csv")).unwrap().contains("0.123"));
}

#[test]
fn manifest_echoes_config_and_points() {
    let d = tempfile::tempdir().unwrap();
    assert!(run_config(d.path(), SMALL_OOB, &[]).status.success());
    let m = manifest(d.path(), "fig4-oob");
    assert_eq!(m["status"], "OK");
    assert_eq!(m["config"]["c"], serde_json::json!([4.0, 8.0]));
    assert_eq!(m["points"].as_array().unwrap().len(), 6);
    assert!(m["versions"]["ftn-tbp"].is_string());
    assert!(m["wall_time_s"].as_f64().unwrap() >= 0.0);
}

#[test]
fn list_experiments_names_all_eight() {
    let out = bin().arg("list-experiments").output().unwrap();
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    for id in ["fig2", "fig3", "fig4-oob", "fig5-snr", "fig6-pulses", "table1-opt", "fig7-bler", "custom"] {
        assert!(text.lines().any(|l| l.starts_with(id)), "{id}");
    }
}

#[test]
fn selftest_fault_injection_fails_with_code_three() {
    let out = bin().args(["selftest", "--inject-fault"]).output().unwrap();
    assert_eq!(out.status.code(), Some(3));
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.lines().any(|l| l.starts_with("[FAIL] gram-trace")));
    let total: usize = text.lines().last().unwrap().split('/').nth(1).unwrap().split(' ').next().unwrap().parse().unwrap();
    assert!(total >= 10);
}
