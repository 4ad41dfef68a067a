use std::path::Path;
use std::process::Command;

use fakepoi_core::MetricsReport;

fn fakepoi(args: &[&str], dir: &Path) -> (i32, String, String) {
    let out = Command::new(env!("CARGO_BIN_EXE_fakepoi"))
        .args(args)
        .current_dir(dir)
        .env_remove(fakepoi_cli::THREADS_ENV)
        .output()
        .unwrap();
    (out.status.code().unwrap(), String::from_utf8(out.stdout).unwrap(), String::from_utf8(out.stderr).unwrap())
}

/// Runs in-process; cheaper than spawning for the slower commands.
fn run(args: &[&str]) -> (i32, String, String) {
    let (mut out, mut err) = (Vec::new(), Vec::new());
    let code = fakepoi_cli::run(std::iter::once("fakepoi").chain(args.iter().copied()), &mut out, &mut err);
    (code, String::from_utf8(out).unwrap(), String::from_utf8(err).unwrap())
}

fn error_json(stderr: &str) -> serde_json::Value {
    serde_json::from_str(stderr.lines().last().unwrap()).unwrap()
}

fn p(dir: &Path, name: &str) -> String {
    dir.join(name).to_str().unwrap().to_string()
}

#[test]
fn generate_default_count_and_labels() {
    let d = tempfile::tempdir().unwrap();
    let (code, _, _) = fakepoi(&["generate", "--out", "fake.csv"], d.path());
    assert_eq!(code, 0);
    let text = std::fs::read_to_string(d.path().join("fake.csv")).unwrap();
    let mut lines = text.lines();
    assert!(lines.next().unwrap().ends_with(",LABEL"));
    let rows: Vec<&str> = lines.collect();
    assert_eq!(rows.len(), 500);
    assert!(rows.iter().all(|r| r.ends_with(",0")));
}

#[test]
fn generate_count_flag_and_determinism() {
    let d = tempfile::tempdir().unwrap();
    let a = p(d.path(), "a.csv");
    let b = p(d.path(), "b.csv");
    let c = p(d.path(), "c.csv");
    assert_eq!(run(&["generate", "--n", "10", "--seed", "4", "--out", &a]).0, 0);
    assert_eq!(run(&["generate", "--n", "10", "--seed", "4", "--out", &b]).0, 0);
    assert_eq!(run(&["generate", "--n", "10", "--seed", "5", "--out", &c]).0, 0);
    let read = |f: &str| std::fs::read(f).unwrap();
    assert_eq!(read(&a).iter().filter(|&&ch| ch == b'\n').count(), 11);
    assert_eq!(read(&a), read(&b));
    assert_ne!(read(&a), read(&c));
}

#[test]
fn train_defaults_write_model_and_ten_epoch_log() {
    let d = tempfile::tempdir().unwrap();
    let model = p(d.path(), "model.json");
    let (code, out, err) = run(&["train", "--seed", "2", "--model-out", &model]);
    assert_eq!(code, 0, "{err}");
    assert!(out.contains("Predicted Fake"));
    let log = std::fs::read_to_string(format!("{model}.runlog.csv")).unwrap();
    assert_eq!(log.lines().next().unwrap(), "epoch,train_loss,val_loss,seconds");
    assert_eq!(log.lines().count(), 11);
    let bundle = fakepoi_core::ModelBundle::load(&model).unwrap();
    assert_eq!(bundle.seed, 2);
    assert_eq!(bundle.train_config.epochs, 10);
    let metrics: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(format!("{model}.metrics.json")).unwrap()).unwrap();
    assert!(metrics["test"]["f1"].as_f64().unwrap() > 0.5);
}

#[test]
fn one_thread_equals_one_node_one_core() {
    let d = tempfile::tempdir().unwrap();
    let (a, b) = (p(d.path(), "a.json"), p(d.path(), "b.json"));
    let common = ["train", "--seed", "5", "--epochs", "2", "--hidden-size", "32"];
    let mut args_a = common.to_vec();
    args_a.extend(["--threads", "1", "--model-out", &a]);
    let mut args_b = common.to_vec();
    args_b.extend(["--nodes", "1", "--cores", "1", "--model-out", &b]);
    assert_eq!(run(&args_a).0, 0);
    assert_eq!(run(&args_b).0, 0);
    assert_eq!(std::fs::read(&a).unwrap(), std::fs::read(&b).unwrap());
}

#[test]
fn corrupt_csv_exits_2_naming_the_row() {
    let d = tempfile::tempdir().unwrap();
    fakepoi(&["generate", "--n", "20", "--out", "fake.csv"], d.path());
    let text = std::fs::read_to_string(d.path().join("fake.csv")).unwrap();
    let mut lines: Vec<&str> = text.lines().collect();
    lines[8] = "F-00007,43.6,-79.7";
    std::fs::write(d.path().join("bad.csv"), lines.join("\n")).unwrap();
    let (code, _, err) = fakepoi(&["train", "--fake", "bad.csv", "--model-out", "m.json"], d.path());
    assert_eq!(code, 2);
    let e = error_json(&err);
    assert_eq!(e["error"], "malformed_row");
    assert_eq!(e["row"], 9);
}

#[test]
fn missing_input_and_bad_config_codes() {
    let d = tempfile::tempdir().unwrap();
    let (code, _, err) = fakepoi(&["train", "--real", "nope.csv", "--model-out", "m.json"], d.path());
    assert_eq!(code, 2);
    assert_eq!(error_json(&err)["error"], "missing_file");

    std::fs::write(d.path().join("cfg.json"), r#"{"train": {"epochz": 3}}"#).unwrap();
    let (code, _, _) = fakepoi(&["train", "--config", "cfg.json", "--model-out", "m.json"], d.path());
    assert_eq!(code, 1);

    let (code, _, err) = fakepoi(&["train", "--epochs", "0", "--model-out", "m.json"], d.path());
    assert_eq!(code, 1);
    assert_eq!(error_json(&err)["error"], "invalid_config");

    let (code, _, _) = fakepoi(&["frobnicate"], d.path());
    assert_eq!(code, 1);
}

#[test]
fn divergence_exits_3() {
    let d = tempfile::tempdir().unwrap();
    std::fs::write(d.path().join("cfg.json"), r#"{"train": {"optimizer": "sgd", "learning_rate": 1e300, "epochs": 2, "hidden_size": 8}}"#).unwrap();
    let (code, _, err) = fakepoi(&["train", "--config", "cfg.json", "--seed", "1", "--model-out", "m.json"], d.path());
    assert_eq!(code, 3, "{err}");
    assert_eq!(error_json(&err)["error"], "diverged");
}

#[test]
fn config_file_with_flag_override() {
    let d = tempfile::tempdir().unwrap();
    std::fs::write(d.path().join("cfg.json"), r#"{"version": 1, "train": {"epochs": 4, "hidden_size": 16}}"#).unwrap();
    let model = p(d.path(), "m.json");
    let cfg = p(d.path(), "cfg.json");
    assert_eq!(run(&["train", "--config", &cfg, "--epochs", "2", "--seed", "1", "--model-out", &model]).0, 0);
    let bundle = fakepoi_core::ModelBundle::load(&model).unwrap();
    assert_eq!((bundle.train_config.epochs, bundle.train_config.hidden_size), (2, 16));
}

#[test]
fn evaluate_train_vs_test_single_row_and_round_trip() {
    let d = tempfile::tempdir().unwrap();
    let model = p(d.path(), "m.json");
    let splits = p(d.path(), "splits");
    let args = ["train", "--seed", "3", "--epochs", "30", "--dropout", "0", "--l1", "0", "--l2", "0", "--model-out", &model, "--splits-dir", &splits];
    assert_eq!(run(&args).0, 0);

    let eval = |data: &str| {
        let json = p(d.path(), "eval.json");
        let (code, out, err) = run(&["evaluate", "--model", &model, "--data", data, "--json-out", &json]);
        assert_eq!(code, 0, "{err}");
        assert!(out.contains("Accuracy"));
        MetricsReport::from_json(&std::fs::read_to_string(json).unwrap()).unwrap()
    };
    let train = eval(&format!("{splits}/train.csv"));
    let test = eval(&format!("{splits}/test.csv"));
    assert!(train.accuracy >= test.accuracy, "train {} < test {}", train.accuracy, test.accuracy);

    let text = std::fs::read_to_string(format!("{splits}/test.csv")).unwrap();
    let one: Vec<&str> = text.lines().take(2).collect();
    let single = p(d.path(), "one.csv");
    std::fs::write(&single, one.join("\n")).unwrap();
    let r = eval(&single);
    assert_eq!(r.confusion.total(), 1);

    let (code, out, _) = run(&["evaluate", "--model", &model, "--data", &single]);
    assert_eq!(code, 0);
    let json = &out[out.find("\n{\n").unwrap() + 1..];
    assert_eq!(MetricsReport::from_json(json).unwrap(), r);
}

#[test]
fn evaluate_rejects_model_version_mismatch() {
    let d = tempfile::tempdir().unwrap();
    let model = p(d.path(), "m.json");
    assert_eq!(run(&["train", "--seed", "1", "--epochs", "1", "--hidden-size", "4", "--model-out", &model]).0, 0);
    let text = std::fs::read_to_string(&model).unwrap().replacen("\"format_version\":1", "\"format_version\":9", 1);
    std::fs::write(&model, text).unwrap();
    let (code, _, err) = run(&["evaluate", "--model", &model, "--data", &p(d.path(), "x.csv")]);
    assert_eq!(code, 2);
    assert_eq!(error_json(&err)["error"], "version_mismatch");
}

#[test]
fn ablate_table6_preset_and_empty_list() {
    let d = tempfile::tempdir().unwrap();
    let out_dir = p(d.path(), "ab");
    let (code, _, err) = run(&["ablate", "--out-dir", &out_dir]);
    assert_eq!(code, 1);
    assert_eq!(error_json(&err)["error"], "usage");

    let quick = ["--seeds", "1", "--epochs", "1", "--hidden-size", "4", "--fake-count", "200"];
    let mut args = vec!["ablate", "--preset", "table6", "--out-dir", &out_dir];
    args.extend(quick);
    let (code, _, err) = run(&args);
    assert_eq!(code, 0, "{err}");
    let csv = std::fs::read_to_string(d.path().join("ab/ablation.csv")).unwrap();
    assert_eq!(csv.lines().next().unwrap(), "variant,mean_rmse,sd_rmse,mean_f1,rmse_1");
    assert_eq!(csv.lines().count(), 16);
    assert!(csv.lines().nth(2).unwrap().starts_with("FDM (LM_ID -)"));
    let json: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(d.path().join("ab/ablation.json")).unwrap()).unwrap();
    assert_eq!(json["rows"].as_array().unwrap().len(), 15);
}

#[test]
fn ablate_named_variant_needs_active_attribute() {
    let d = tempfile::tempdir().unwrap();
    let out_dir = p(d.path(), "ab");
    let (code, _, err) = run(&["ablate", "--variant", "FDM (LM_ID -)", "--seeds", "1", "--out-dir", &out_dir]);
    assert_eq!(code, 1);
    assert_eq!(error_json(&err)["error"], "attribute_not_active");
}

#[test]
fn sweep_rows_match_values() {
    let d = tempfile::tempdir().unwrap();
    let out_dir = p(d.path(), "sw");
    let args = ["sweep", "--axis", "l2", "--values", "1e-5,1e-3,1e-1", "--seeds", "1", "--epochs", "1", "--hidden-size", "4", "--fake-count", "200", "--out-dir", &out_dir];
    let (code, out, err) = run(&args);
    assert_eq!(code, 0, "{err}");
    assert_eq!(out.lines().count(), 4);
    let csv = std::fs::read_to_string(d.path().join("sw/sweep.csv")).unwrap();
    assert_eq!(csv.lines().count(), 4);
}
