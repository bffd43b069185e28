use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;
use splitgauge::ingest::{self, Dataset};
use splitgauge::remix::RemixPlan;

fn bin(dir: &Path) -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_splitgauge"));
    c.current_dir(dir).env_remove("SPLITGAUGE_THREADS");
    c
}

fn run(dir: &Path, args: &[&str]) -> Output {
    bin(dir).args(args).output().unwrap()
}

fn json(path: &Path) -> Value {
    serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap()
}

fn synth_features(dir: &Path, mode: &str) {
    let out = run(
        dir,
        &[
            "synth", "--mode", mode, "--n-train", "8000", "--n-test", "4000", "--seed", "3",
            "--train-out", "a.fm", "--test-out", "b.fm",
        ],
    );
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
}

#[test]
fn audit_on_skewed_synth_reports_mismatch() {
    let dir = tempfile::tempdir().unwrap();
    synth_features(dir.path(), "density_skew");
    let out = run(
        dir.path(),
        &[
            "audit", "--train-features", "a.fm", "--test-features", "b.fm", "--m", "2000",
            "--seeds", "1,2,3,4,5", "--out", "report.json", "--csv", "seeds.csv", "--svg", "fig.svg",
        ],
    );
    assert_eq!(out.status.code(), Some(0));
    let r = json(&dir.path().join("report.json"));
    assert_eq!(r["schema_version"], 1);
    assert_eq!(r["command"], "audit");
    assert_eq!(r["payload"]["kind"], "audit");
    let data = &r["payload"]["data"];
    assert_eq!(data["verdict"], "mismatch");
    assert!(data["cross_mean"].as_f64().unwrap() > data["within_mean"].as_f64().unwrap());
    assert_eq!(data["per_seed"].as_array().unwrap().len(), 5);
    assert_eq!(r["config"]["audit"]["m"], 2000);

    let csv = std::fs::read_to_string(dir.path().join("seeds.csv")).unwrap();
    assert_eq!(csv.lines().count(), 6);
    let svg = std::fs::read_to_string(dir.path().join("fig.svg")).unwrap();
    assert_eq!(svg.matches("<rect").count(), 10);

    let strict = run(
        dir.path(),
        &[
            "audit", "--train-features", "a.fm", "--test-features", "b.fm", "--m", "2000",
            "--fail-on-mismatch", "--out", "r2.json",
        ],
    );
    assert_eq!(strict.status.code(), Some(4));
}

#[test]
fn audit_on_shared_distribution_passes_fail_flag() {
    let dir = tempfile::tempdir().unwrap();
    synth_features(dir.path(), "none");
    let out = run(
        dir.path(),
        &[
            "audit", "--train-features", "a.fm", "--test-features", "b.fm", "--m", "2000",
            "--fail-on-mismatch", "--out", "r.json",
        ],
    );
    assert_eq!(out.status.code(), Some(0));
    assert_ne!(json(&dir.path().join("r.json"))["payload"]["data"]["verdict"], "mismatch");
}

#[test]
fn remix_plan_satisfies_invariants() {
    let dir = tempfile::tempdir().unwrap();
    let mk = |labels: Vec<u32>| {
        let n = labels.len();
        Dataset::new((0..n * 4).map(|i| i as u8).collect(), labels, 2, 2, 1, 3).unwrap()
    };
    let tr = mk(vec![0, 1, 2, 0, 1, 2, 0, 0]);
    let te = mk(vec![2, 2, 1]);
    ingest::write_raw(dir.path().join("tr.sgtd"), &tr).unwrap();
    ingest::write_raw(dir.path().join("te.sgtd"), &te).unwrap();
    let out = run(
        dir.path(),
        &["remix", "--train", "tr.sgtd", "--test", "te.sgtd", "--seed", "7", "--out", "plan.json"],
    );
    assert!(out.status.success());
    let plan = RemixPlan::load(dir.path().join("plan.json")).unwrap();
    plan.check_partition(8, 3).unwrap();
    assert_eq!((plan.new_train.len(), plan.new_test.len()), (8, 3));
    let report: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(report["payload"]["data"]["train_class_counts"], serde_json::json!([4, 2, 2]));
    assert_eq!(report["payload"]["data"]["test_class_counts"], serde_json::json!([0, 1, 2]));
}

#[test]
fn inception_score_of_uniform_csv() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("uniform.csv"), "0.25,0.25,0.25,0.25\n".repeat(12)).unwrap();
    let out = run(dir.path(), &["is", "--probs", "uniform.csv"]);
    assert!(out.status.success());
    let v: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert!((v["payload"]["data"]["score"].as_f64().unwrap() - 1.0).abs() < 1e-12);
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(run(dir.path(), &["audit", "--bogus"]).status.code(), Some(2));
    assert_eq!(
        run(dir.path(), &["audit", "--train-dataset", "x", "--train-features", "y", "--test-features", "z"])
            .status
            .code(),
        Some(2)
    );
    std::fs::write(dir.path().join("bad.csv"), "0.5,0.9\n").unwrap();
    assert_eq!(run(dir.path(), &["is", "--probs", "bad.csv"]).status.code(), Some(3));
    assert_eq!(run(dir.path(), &["is", "--probs", "missing.csv"]).status.code(), Some(3));
    assert_eq!(run(dir.path(), &["--help"]).status.code(), Some(0));
}

#[test]
fn flags_override_config_file() {
    let dir = tempfile::tempdir().unwrap();
    synth_features(dir.path(), "none");
    std::fs::write(dir.path().join("cfg.json"), r#"{"m": 500, "seeds": [4, 5, 6]}"#).unwrap();
    let from_file = run(
        dir.path(),
        &["--config", "cfg.json", "audit", "--train-features", "a.fm", "--test-features", "b.fm"],
    );
    assert!(from_file.status.success(), "{}", String::from_utf8_lossy(&from_file.stderr));
    let v: Value = serde_json::from_slice(&from_file.stdout).unwrap();
    assert_eq!(v["config"]["audit"]["m"], 500);
    assert_eq!(v["config"]["audit"]["seeds"], serde_json::json!([4, 5, 6]));

    let flagged = run(
        dir.path(),
        &["--config", "cfg.json", "audit", "--train-features", "a.fm", "--test-features", "b.fm", "--m", "300"],
    );
    let v: Value = serde_json::from_slice(&flagged.stdout).unwrap();
    assert_eq!(v["config"]["audit"]["m"], 300);
    assert_eq!(v["config"]["audit"]["seeds"], serde_json::json!([4, 5, 6]));

    std::fs::write(dir.path().join("typo.json"), r#"{"mm": 5}"#).unwrap();
    let typo = run(dir.path(), &["--config", "typo.json", "is", "--probs", "x.csv"]);
    assert_eq!(typo.status.code(), Some(3));
}

#[test]
fn default_protocol_settings() {
    let dir = tempfile::tempdir().unwrap();
    synth_features(dir.path(), "none");
    // the default m = 10000 needs 2m train rows, more than the 8000 present
    let out = run(dir.path(), &["audit", "--train-features", "a.fm", "--test-features", "b.fm"]);
    assert_eq!(out.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&out.stderr).contains("need 20000"));
}

#[test]
fn threads_env_is_honoured_and_validated() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("u.csv"), "0.5,0.5\n0.5,0.5\n").unwrap();
    let ok = bin(dir.path()).env("SPLITGAUGE_THREADS", "2").args(["is", "--probs", "u.csv"]).output().unwrap();
    assert!(ok.status.success());
    let bad = bin(dir.path()).env("SPLITGAUGE_THREADS", "lots").args(["is", "--probs", "u.csv"]).output().unwrap();
    assert_eq!(bad.status.code(), Some(2));
}

#[test]
fn synth_fit_and_bpd_round() {
    let dir = tempfile::tempdir().unwrap();
    synth_features(dir.path(), "density_skew");
    let fit = run(
        dir.path(),
        &["fit-density", "--features", "a.fm", "--components", "3", "--out", "m.json", "--report", "fit.json"],
    );
    assert!(fit.status.success(), "{}", String::from_utf8_lossy(&fit.stderr));
    let out = run(dir.path(), &["bpd", "--model", "m.json", "--train-features", "a.fm", "--test-features", "b.fm"]);
    assert!(out.status.success());
    let v: Value = serde_json::from_slice(&out.stdout).unwrap();
    let data = &v["payload"]["data"];
    assert!(data["test"]["bpd"].as_f64().unwrap() < data["train"]["bpd"].as_f64().unwrap());
}

#[test]
fn embed_pixels_and_mat_input() {
    let dir = tempfile::tempdir().unwrap();
    let fixture = Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures/svhn_tiny_z.mat");
    let out = run(
        dir.path(),
        &["embed", "--dataset", fixture.to_str().unwrap(), "--remap-ten", "--dim", "4", "--out", "f.fm"],
    );
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let f = ingest::read_features(dir.path().join("f.fm")).unwrap();
    assert_eq!((f.rows(), f.dim()), (5, 4));

    let v73 = Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures/svhn_tiny_v73.mat");
    let out = run(dir.path(), &["embed", "--dataset", v73.to_str().unwrap(), "--out", "g.fm"]);
    assert_eq!(out.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&out.stderr).contains("HDF5"));
}
