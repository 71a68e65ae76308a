//! The `swec` binary end to end.

mod common;

use std::path::Path;
use std::process::{Command, Output};

fn swec(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_swec"))
        .args(args)
        .env_remove("SWEC_THREADS")
        .output()
        .expect("swec runs")
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).unwrap()
}

fn stderr(out: &Output) -> String {
    String::from_utf8(out.stderr.clone()).unwrap()
}

fn write_config(dir: &Path) -> String {
    let path = dir.join("small.json");
    std::fs::write(&path, common::small_config_json()).unwrap();
    path.to_string_lossy().into_owned()
}

#[test]
fn usage_errors_exit_with_two() {
    for args in [&[][..], &["--bogus"], &["frobnicate"], &["train", "--data"]] {
        let out = swec(args);
        assert_eq!(out.status.code(), Some(2), "{args:?}: {}", stderr(&out));
    }
}

#[test]
fn runtime_errors_name_their_category() {
    let out = swec(&["train", "--data", "/nonexistent/swec", "--model", "m.bin"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(stderr(&out).starts_with("error[io]:"), "{}", stderr(&out));

    let out = swec(&["compare", "--repeats", "0"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(
        stderr(&out).starts_with("error[config]:"),
        "{}",
        stderr(&out)
    );

    let out = Command::new(env!("CARGO_BIN_EXE_swec"))
        .args(["gradcheck", "--pairs", "1"])
        .env("SWEC_THREADS", "0")
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(1));
    assert!(stderr(&out).contains("SWEC_THREADS"));
}

#[test]
fn generate_train_eval_round() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(dir.path());
    let data = dir.path().join("data");
    let data = data.to_str().unwrap();
    let model = dir.path().join("cnn.bin");
    let model = model.to_str().unwrap();

    let out = swec(&["generate", "--config", &config, "--out", data]);
    assert!(out.status.success(), "{}", stderr(&out));
    assert_eq!(
        stdout(&out),
        "fs_hz,records,class_1,class_2,class_3,class_4\n5000,46,8,12,20,6\n"
    );

    let train = [
        "train", "--config", &config, "--data", data, "--model", model, "--seed", "4",
    ];
    let out = swec(&train);
    assert!(out.status.success(), "{}", stderr(&out));
    let text = stdout(&out);
    let row: Vec<&str> = text.lines().nth(1).unwrap().split(',').collect();
    assert_eq!(&row[..6], ["cnn", "5000", "632+671+675", "4", "37", "9"]);
    assert_eq!(stdout(&swec(&train)), text);

    let out = swec(&[
        "eval", "--config", &config, "--model", model, "--data", data, "--seed", "4",
    ]);
    assert!(out.status.success(), "{}", stderr(&out));
    let text = stdout(&out);
    let total: u64 = text
        .lines()
        .skip(1)
        .take(4)
        .flat_map(|l| l.split(',').skip(1).map(|v| v.parse::<u64>().unwrap()))
        .sum();
    assert_eq!(total, 9);
    let summary = text.lines().nth(7).unwrap();
    assert!(
        summary.starts_with("cnn,5000,632+671+675,0,4,"),
        "{summary}"
    );
    assert!(summary.ends_with(row[7]), "{summary}");
    assert_eq!(summary.split(',').nth(5), Some(row[6]));

    let out = swec(&["eval", "--model", model, "--data", data, "--fs", "20000"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(stderr(&out).starts_with("error[config]:"));

    let out = swec(&["eval", "--model", model, "--data", data, "--buses", "632"]);
    assert_eq!(out.status.code(), Some(1), "{}", stderr(&out));
}

#[test]
fn experiments_write_reports_that_aggregate() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(dir.path());
    let runs = dir.path().join("runs");
    let run = runs.join("cmp");
    let out = swec(&[
        "compare",
        "--config",
        &config,
        "--repeats",
        "1",
        "--out",
        run.to_str().unwrap(),
    ]);
    assert!(out.status.success(), "{}", stderr(&out));
    let table = stdout(&out);
    assert_eq!(
        std::fs::read_to_string(run.join("reports/compare.csv")).unwrap(),
        table
    );

    let out = swec(&["report", "--in", runs.to_str().unwrap()]);
    assert!(out.status.success(), "{}", stderr(&out));
    let lines: Vec<String> = stdout(&out).lines().map(String::from).collect();
    assert!(lines[0].starts_with("run,experiment,method,"));
    assert_eq!(lines.len(), 1 + 4 * 2);
    assert!(lines[1].starts_with("cmp,compare,autoencoder,5000,"));
    assert!(lines
        .iter()
        .skip(1)
        .all(|l| table.contains(&l["cmp,compare,".len()..])));

    let empty = tempfile::tempdir().unwrap();
    assert_eq!(
        swec(&["report", "--in", empty.path().to_str().unwrap()])
            .status
            .code(),
        Some(1)
    );
}

#[test]
fn gradcheck_reports_every_tensor() {
    let out = swec(&["gradcheck", "--pairs", "1"]);
    assert!(out.status.success(), "{}", stderr(&out));
    let text = stdout(&out);
    assert_eq!(text.lines().count(), 1 + 4 + 1);
    assert!(text.lines().last().unwrap().starts_with("all,"));
}
