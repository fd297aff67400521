use std::path::Path;
use std::process::{Command, Output};

use trs_core::training::parse_metrics_csv;

fn trs(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_trs")).args(args).output().expect("run trs")
}

fn p(path: &Path) -> &str {
    path.to_str().unwrap()
}

#[test]
fn synth_train_eval_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let data = dir.path().join("train.aqaf");
    let test = dir.path().join("test.aqaf");
    let ckpt = dir.path().join("ckpt");
    let preds = dir.path().join("preds.csv");

    let out = trs(&[
        "synth", "--n", "40", "--t", "4", "--d", "6", "--label-frac", "0.25", "--seed", "2", "-o", p(&data),
        "--n-test", "12", "--test-out", p(&test),
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));

    let out = trs(&[
        "train", "--data", p(&data), "--val", p(&test), "-o", p(&ckpt), "--epochs", "5", "--burn-in", "2",
        "--set", "mixer_layers=1", "--set", "channel_hidden=6",
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let rows = parse_metrics_csv(&std::fs::read_to_string(ckpt.join("metrics.csv")).unwrap()).unwrap();
    assert_eq!(rows.len(), 5);
    assert!(rows[..2].iter().all(|r| r.val_spearman.is_none()));
    assert!(rows[2..].iter().all(|r| r.val_spearman.is_some()));

    let out = trs(&["eval", "--checkpoint", p(&ckpt), "--data", p(&test), "--predictions", p(&preds)]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let stdout = String::from_utf8(out.stdout).unwrap();
    let rho: f64 = stdout.trim().strip_prefix("spearman: ").unwrap().parse().unwrap();
    assert!((-1.0..=1.0).contains(&rho));
    assert_eq!(std::fs::read_to_string(&preds).unwrap().lines().count(), 13);
}

#[test]
fn resume_continues_to_the_same_log() {
    let dir = tempfile::tempdir().unwrap();
    let data = dir.path().join("d.aqaf");
    assert!(trs(&["synth", "--n", "24", "--t", "3", "--d", "4", "--label-frac", "0.5", "-o", p(&data)])
        .status
        .success());
    let common = ["--burn-in", "1", "--seed", "3", "--set", "mixer_layers=1"];
    let full = dir.path().join("full");
    let mut args = vec!["train", "--data", p(&data), "-o", p(&full), "--epochs", "4"];
    args.extend(common);
    assert!(trs(&args).status.success());

    let part = dir.path().join("part");
    let mut args = vec!["train", "--data", p(&data), "-o", p(&part), "--epochs", "2"];
    args.extend(common);
    assert!(trs(&args).status.success());
    let out = trs(&["train", "--data", p(&data), "-o", p(&part), "--resume", "--epochs", "4"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));

    assert_eq!(
        std::fs::read(full.join("metrics.csv")).unwrap(),
        std::fs::read(part.join("metrics.csv")).unwrap()
    );
}

#[test]
fn burn_in_not_below_epochs_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let data = dir.path().join("d.aqaf");
    assert!(trs(&["synth", "--n", "10", "--t", "2", "--d", "3", "--label-frac", "0.5", "-o", p(&data)])
        .status
        .success());
    let out = trs(&["train", "--data", p(&data), "-o", p(&dir.path().join("c")), "--epochs", "3", "--burn-in", "3"]);
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).starts_with("error:"));
}

#[test]
fn unknown_flag_is_rejected() {
    let out = trs(&["train", "--frobnicate"]);
    assert!(!out.status.success());
    let out = trs(&["synth", "--n", "3", "--t", "1", "--d", "1", "--label-frac", "1", "-o", "/dev/null", "--set", "x=1"]);
    assert!(!out.status.success());
}

#[test]
fn unknown_config_key_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let data = dir.path().join("d.aqaf");
    assert!(trs(&["synth", "--n", "10", "--t", "2", "--d", "3", "--label-frac", "0.5", "-o", p(&data)])
        .status
        .success());
    let out = trs(&["train", "--data", p(&data), "-o", p(&dir.path().join("c")), "--set", "gamma=3"]);
    assert!(!out.status.success());
}
