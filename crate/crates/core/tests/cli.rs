use std::path::Path;
use std::process::{Command, Output};

use hipfrac::cli::{FeOutput, FitOutput};
use hipfrac::eval::EvalReport;

const BIN: &str = env!("CARGO_BIN_EXE_hipfrac");

fn run(dir: &Path, args: &[&str]) -> Output {
    Command::new(BIN).current_dir(dir).args(args).output().unwrap()
}

fn spec_path() -> String {
    format!("{}/data/table1_default.json", env!("CARGO_MANIFEST_DIR"))
}

fn synth(dir: &Path, seed: &str, out: &str) {
    let o = run(dir, &["--seed", seed, "synth", "--spec", &spec_path(), "--out", out]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
}

#[test]
fn synth_writes_published_sizes_reproducibly() {
    let dir = tempfile::tempdir().unwrap();
    synth(dir.path(), "7", "a.csv");
    synth(dir.path(), "7", "b.csv");
    let a = std::fs::read_to_string(dir.path().join("a.csv")).unwrap();
    assert_eq!(a.lines().count(), 346);
    assert_eq!(a, std::fs::read_to_string(dir.path().join("b.csv")).unwrap());
}

#[test]
fn fit_reports_dominant_pc1() {
    let dir = tempfile::tempdir().unwrap();
    synth(dir.path(), "7", "cohort.csv");
    let o = run(dir.path(), &["fit", "--cohort", "cohort.csv", "--stratum", "all"]);
    assert!(o.status.success());
    let fit: FitOutput = serde_json::from_slice(&o.stdout).unwrap();
    assert!((0.73..=0.93).contains(&fit.pc1_variance_share), "{}", fit.pc1_variance_share);
    assert!(fit.pc_significance[0].retained);
    assert_eq!(fit.n, 345);
}

#[test]
fn fit_then_compare_frax() {
    let dir = tempfile::tempdir().unwrap();
    synth(dir.path(), "7", "cohort.csv");
    let o = run(dir.path(), &["fit", "--cohort", "cohort.csv", "--out", "fit.json"]);
    assert!(o.status.success());
    assert!(String::from_utf8_lossy(&o.stdout).contains("pc1_variance_share"));
    let back: FitOutput = serde_json::from_str(&std::fs::read_to_string(dir.path().join("fit.json")).unwrap()).unwrap();
    assert_eq!(back.stratum, hipfrac::datamodel::Stratum::All);
    let o = run(
        dir.path(),
        &["compare-frax", "--cohort", "cohort.csv", "--model", "fit.json", "--roc-dir", "roc", "--out", "cmp.json"],
    );
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let v: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(dir.path().join("cmp.json")).unwrap()).unwrap();
    assert!(v["model_auc"].as_f64().unwrap() > v["frax_auc"].as_f64().unwrap());
    let roc = std::fs::read_to_string(dir.path().join("roc/roc_frax.csv")).unwrap();
    assert!(roc.starts_with("fpr,tpr,threshold\n"));
}

#[test]
fn missing_grid_is_a_data_error() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(dir.path(), &["fe", "--grid", "missing.txt"]);
    assert_eq!(o.status.code(), Some(2));
    let err = String::from_utf8_lossy(&o.stderr);
    assert!(err.starts_with("error: grid file not found"), "{err}");
    assert_eq!(err.lines().count(), 1);
}

#[test]
fn phantom_then_fe() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(dir.path(), &["phantom", "--dims", "3,3,6", "--out", "g.txt"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let o = run(dir.path(), &["fe", "--grid", "g.txt", "--out-dir", "fe"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let out: FeOutput =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("fe/fe_parameters.json")).unwrap()).unwrap();
    assert!(out.parameters.validate().is_ok());
    assert_eq!(out.cases.len(), 4);
    for case in ["stance", "posterior", "posterolateral", "lateral"] {
        assert!(dir.path().join(format!("fe/curve_{case}.csv")).exists());
    }
}

#[test]
fn bad_config_and_usage_codes() {
    let dir = tempfile::tempdir().unwrap();
    run(dir.path(), &["phantom", "--dims", "2,2,4", "--out", "g.txt"]);
    std::fs::write(dir.path().join("bad.json"), r#"{"material": {"nu": 0.7}}"#).unwrap();
    let o = run(dir.path(), &["fe", "--grid", "g.txt", "--config", "bad.json"]);
    assert_eq!(o.status.code(), Some(2));
    let o = run(dir.path(), &["evaluate", "--cohort", "c.csv", "--no-such-flag"]);
    assert_eq!(o.status.code(), Some(1));
    let o = run(dir.path(), &["--seed", "-3", "synth", "--out", "x.csv"]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn evaluate_and_report() {
    let dir = tempfile::tempdir().unwrap();
    synth(dir.path(), "3", "cohort.csv");
    let args = [
        "--seed", "5", "--stratum", "male", "evaluate", "--cohort", "cohort.csv", "--feature-sets",
        "ABMD_COV,PC1_ABMD_COV", "--classifiers", "logistic,pls", "--repeats", "3", "--resamples", "10",
        "--roc-dir", "roc", "--out", "rep.json",
    ];
    let o = run(dir.path(), &args);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    assert!(String::from_utf8_lossy(&o.stdout).contains("pca mode: fold-internal"));
    let text = std::fs::read_to_string(dir.path().join("rep.json")).unwrap();
    let report = EvalReport::from_json(&text).unwrap();
    assert_eq!(report.cells.len(), 4);
    assert_eq!(report.to_json().unwrap(), text);
    assert_eq!(std::fs::read_dir(dir.path().join("roc")).unwrap().count(), 4);

    let o = run(dir.path(), &["report", "--report", "rep.json"]);
    assert!(o.status.success());
    let table = String::from_utf8_lossy(&o.stdout);
    let cell = report
        .cell(
            hipfrac::datamodel::Stratum::Male,
            hipfrac::datamodel::FeatureSet::Pc1AbmdCov,
            hipfrac::classifiers::ClassifierKind::Logistic,
        )
        .unwrap();
    assert!(table.contains(&format!("{:.3} ({:.3})", cell.resample.mean, cell.resample.sd)), "{table}");
}

#[test]
fn paper_mode_is_labelled() {
    let dir = tempfile::tempdir().unwrap();
    synth(dir.path(), "3", "cohort.csv");
    let o = run(
        dir.path(),
        &[
            "--paper-mode", "--stratum", "female", "evaluate", "--cohort", "cohort.csv", "--feature-sets",
            "PC1_ABMD_COV", "--classifiers", "lda", "--repeats", "2", "--resamples", "4", "--out", "rep.json",
        ],
    );
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    assert!(String::from_utf8_lossy(&o.stdout).contains("paper mode"));
}
