//! End-to-end checks of the binary: the gen/train/eval/predict round trip,
//! exit codes, and input-file immutability.

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_anfis"))
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn stderr_of(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

fn gen_small(dir: &Path) -> PathBuf {
    let data = dir.join("data.csv");
    let out = run(&[
        "gen",
        "--out",
        data.to_str().unwrap(),
        "--n-r",
        "3",
        "--n-theta",
        "4",
        "--n-z",
        "3",
        "--velocities",
        "0.005,0.01",
    ]);
    assert!(out.status.success(), "{}", stderr_of(&out));
    data
}

#[test]
fn round_trip_gen_train_eval_predict() {
    let dir = tempfile::tempdir().unwrap();
    let data = gen_small(dir.path());
    let model = dir.path().join("model.json");

    let out = run(&[
        "train",
        "--data",
        data.to_str().unwrap(),
        "--model-out",
        model.to_str().unwrap(),
        "--inputs",
        "x,y",
        "--mf-count",
        "2",
        "--epochs",
        "5",
        "--seed",
        "3",
    ]);
    assert!(out.status.success(), "{}", stderr_of(&out));
    assert!(model.exists());

    let out = run(&[
        "eval",
        "--data",
        data.to_str().unwrap(),
        "--model",
        model.to_str().unwrap(),
    ]);
    assert!(out.status.success(), "{}", stderr_of(&out));
    let stdout = String::from_utf8_lossy(&out.stdout).into_owned();
    assert!(stdout.contains("r2_test "), "{stdout}");
    assert!(stdout.contains("r2_combined "), "{stdout}");

    let pred_out = dir.path().join("pred.csv");
    let out = run(&[
        "predict",
        "--model",
        model.to_str().unwrap(),
        "--points",
        data.to_str().unwrap(),
        "--out",
        pred_out.to_str().unwrap(),
    ]);
    assert!(out.status.success(), "{}", stderr_of(&out));

    // Predictions in the file equal forward() on the same rows bit for bit.
    let loaded = anfis::load_model(&model).unwrap();
    let points = anfis::dataset::load_csv(&data).unwrap();
    let preds = anfis::dataset::load_csv(&pred_out).unwrap();
    assert_eq!(preds.n_rows(), points.n_rows());
    let xcol = points.column_index("x").unwrap();
    let ycol = points.column_index("y").unwrap();
    let pcol = preds.column_index("dpdz").unwrap();
    for i in 0..10 {
        let expect = loaded
            .forward(&[points.get(i, xcol), points.get(i, ycol)])
            .unwrap();
        assert_eq!(preds.get(i, pcol).to_bits(), expect.to_bits(), "row {i}");
    }
}

#[test]
fn usage_errors_exit_two() {
    let out = run(&["train", "--model-out", "m.json"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr_of(&out).contains("--data"));

    let out = run(&["frobnicate"]);
    assert_eq!(out.status.code(), Some(2));

    let out = run(&["gen", "--out", "d.csv", "--velocities", "0.1,bogus"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn help_exits_zero() {
    let out = run(&["--help"]);
    assert_eq!(out.status.code(), Some(0));
    for sub in ["gen", "train", "eval", "predict", "sweep"] {
        assert!(String::from_utf8_lossy(&out.stdout).contains(sub));
    }
    let out = run(&["train", "--help"]);
    assert_eq!(out.status.code(), Some(0));
    assert!(String::from_utf8_lossy(&out.stdout).contains("700"));
}

#[test]
fn rule_explosion_exits_one_naming_count() {
    let dir = tempfile::tempdir().unwrap();
    let data = gen_small(dir.path());
    let out = bin()
        .args([
            "train",
            "--data",
            data.to_str().unwrap(),
            "--model-out",
            dir.path().join("m.json").to_str().unwrap(),
            "--inputs",
            "x,y,z,v_as",
            "--mf-count",
            "6",
            "--epochs",
            "1",
        ])
        .env("ANFIS_MAX_RULES", "1000")
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(1));
    assert!(stderr_of(&out).contains("1296"), "{}", stderr_of(&out));
}

#[test]
fn malformed_max_rules_env_exits_two() {
    let dir = tempfile::tempdir().unwrap();
    let data = gen_small(dir.path());
    let out = bin()
        .args([
            "train",
            "--data",
            data.to_str().unwrap(),
            "--model-out",
            dir.path().join("m.json").to_str().unwrap(),
        ])
        .env("ANFIS_MAX_RULES", "lots")
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn missing_data_file_exits_one() {
    let out = run(&[
        "train",
        "--data",
        "/nonexistent/nope.csv",
        "--model-out",
        "m.json",
    ]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn predict_header_only_points() {
    let dir = tempfile::tempdir().unwrap();
    let data = gen_small(dir.path());
    let model = dir.path().join("model.json");
    let out = run(&[
        "train",
        "--data",
        data.to_str().unwrap(),
        "--model-out",
        model.to_str().unwrap(),
        "--inputs",
        "x,y",
        "--mf-count",
        "2",
        "--epochs",
        "2",
    ]);
    assert!(out.status.success(), "{}", stderr_of(&out));

    let points = dir.path().join("points.csv");
    std::fs::write(&points, "x[m],y[m]\n").unwrap();
    let pred = dir.path().join("pred.csv");
    let out = run(&[
        "predict",
        "--model",
        model.to_str().unwrap(),
        "--points",
        points.to_str().unwrap(),
        "--out",
        pred.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr_of(&out));
    let text = std::fs::read_to_string(&pred).unwrap();
    assert_eq!(text.lines().count(), 1, "{text}");
    assert!(text.starts_with("x[m],y[m],dpdz"));
}

#[test]
fn predict_missing_column_exits_one() {
    let dir = tempfile::tempdir().unwrap();
    let data = gen_small(dir.path());
    let model = dir.path().join("model.json");
    run(&[
        "train",
        "--data",
        data.to_str().unwrap(),
        "--model-out",
        model.to_str().unwrap(),
        "--inputs",
        "x,y",
        "--mf-count",
        "2",
        "--epochs",
        "2",
    ]);
    let points = dir.path().join("points.csv");
    std::fs::write(&points, "x[m]\n0.01\n").unwrap();
    let out = run(&[
        "predict",
        "--model",
        model.to_str().unwrap(),
        "--points",
        points.to_str().unwrap(),
        "--out",
        dir.path().join("p.csv").to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(1));
    assert!(stderr_of(&out).contains("'y'"), "{}", stderr_of(&out));
}

#[test]
fn commands_do_not_mutate_inputs() {
    let dir = tempfile::tempdir().unwrap();
    let data = gen_small(dir.path());
    let before = std::fs::read(&data).unwrap();
    let model = dir.path().join("model.json");
    run(&[
        "train",
        "--data",
        data.to_str().unwrap(),
        "--model-out",
        model.to_str().unwrap(),
        "--inputs",
        "x,y",
        "--mf-count",
        "2",
        "--epochs",
        "2",
    ]);
    let model_before = std::fs::read(&model).unwrap();
    run(&[
        "eval",
        "--data",
        data.to_str().unwrap(),
        "--model",
        model.to_str().unwrap(),
    ]);
    assert_eq!(before, std::fs::read(&data).unwrap());
    assert_eq!(model_before, std::fs::read(&model).unwrap());
}

#[test]
fn sweep_writes_report() {
    let dir = tempfile::tempdir().unwrap();
    let data = gen_small(dir.path());
    let report = dir.path().join("report.csv");
    let out = run(&[
        "sweep",
        "--data",
        data.to_str().unwrap(),
        "--out",
        report.to_str().unwrap(),
        "--input-set",
        "x",
        "--input-set",
        "x,y",
        "--mf-counts",
        "2",
        "--families",
        "gauss,tri",
        "--epochs",
        "3",
    ]);
    assert!(out.status.success(), "{}", stderr_of(&out));
    let text = std::fs::read_to_string(&report).unwrap();
    assert_eq!(text.lines().count(), 5); // header + 2 sets x 1 count x 2 families
    assert!(text.starts_with("input_set,mf_count,family,status,rule_count,"));
    assert!(stderr_of(&out).contains("best r2_test"));
}

#[test]
fn config_file_supplies_defaults() {
    let dir = tempfile::tempdir().unwrap();
    let data = gen_small(dir.path());
    let cfgfile = dir.path().join("cfg.json");
    std::fs::write(
        &cfgfile,
        r#"{ "inputs": ["x", "y"], "mf_count": 2, "epochs": 2 }"#,
    )
    .unwrap();
    let model = dir.path().join("model.json");
    let out = run(&[
        "train",
        "--data",
        data.to_str().unwrap(),
        "--model-out",
        model.to_str().unwrap(),
        "--config",
        cfgfile.to_str().unwrap(),
    ]);
    assert!(out.status.success(), "{}", stderr_of(&out));
    let loaded = anfis::load_model(&model).unwrap();
    assert_eq!(loaded.inputs.len(), 2);
    assert_eq!(loaded.provenance.unwrap().epochs, 2);

    // Unknown config keys are rejected as usage errors.
    std::fs::write(&cfgfile, r#"{ "epochz": 2 }"#).unwrap();
    let out = run(&[
        "train",
        "--data",
        data.to_str().unwrap(),
        "--model-out",
        model.to_str().unwrap(),
        "--config",
        cfgfile.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(2));
}
