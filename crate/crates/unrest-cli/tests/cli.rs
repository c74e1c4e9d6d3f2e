//! End-to-end tests of the `unrest` binary: exit codes, artifact shape,
//! and rerun determinism.

use std::path::Path;
use std::process::{Command, Output};

fn unrest(args: &[&str], dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_unrest"))
        .args(args)
        .current_dir(dir)
        .output()
        .expect("binary runs")
}

fn assert_success(out: &Output) {
    assert!(
        out.status.success(),
        "command failed\nstdout: {}\nstderr: {}",
        String::from_utf8_lossy(&out.stdout),
        String::from_utf8_lossy(&out.stderr)
    );
}

/// Small deterministic world for fast end-to-end runs.
fn gen_config_json(seed: u64) -> String {
    format!(
        r#"{{
  "seed": {seed},
  "regions": 8,
  "days": 4,
  "warmup_days": 1,
  "start_date": "2016-11-10",
  "base_daily_tweets": 400,
  "protest_logit_weights": {{
    "bias": -1.5, "tweet_volume": 1.5, "mentions": 3.0,
    "negativity": -1.5, "vote_pct": -3.0, "lead_flag": 1.5
  }},
  "mention_rate": 0.15,
  "negative_rate": 0.25,
  "violent_rate": 0.1,
  "retweet_rate": 0.3,
  "no_geo_rate": 0.05,
  "spam_rate": 0.03,
  "vote_pcts": null,
  "lead_flags": null,
  "lead_threshold": 100000
}}"#
    )
}

fn simulate_and_featurize(dir: &Path, seed: u64) {
    std::fs::write(dir.join("gen.json"), gen_config_json(seed)).unwrap();
    assert_success(&unrest(
        &["simulate", "--gen-config", "gen.json", "--seed", &seed.to_string(), "--out", "run"],
        dir,
    ));
    assert_success(&unrest(
        &[
            "featurize",
            "--corpus", "run/tweets.jsonl",
            "--protests", "run/protests.csv",
            "--votes", "run/votes.csv",
            "--from", "2016-11-10",
            "--to", "2016-11-13",
            "--config", "unrest.toml",
            "--out", "run",
        ],
        dir,
    ));
}

fn write_region_config(dir: &Path) {
    std::fs::write(dir.join("unrest.toml"), "[run]\nregions = 8\n").unwrap();
}

#[test]
fn pipeline_produces_all_artifacts() {
    let dir = tempfile::tempdir().unwrap();
    write_region_config(dir.path());
    simulate_and_featurize(dir.path(), 21);

    for (args, artifact) in [
        (vec!["evaluate", "--matrix", "run/features.csv"], "run/report.json"),
        (vec!["train", "--matrix", "run/features.csv"], "run/model.json"),
        (vec!["roc", "--matrix", "run/features.csv"], "run/roc.csv"),
        (vec!["ingest", "--corpus", "run/tweets.jsonl"], "run/cleansed.jsonl"),
        (vec!["watch", "--corpus", "run/tweets.jsonl"], "run/signals.csv"),
        (
            vec!["baselines", "--matrix", "run/features.csv", "--baseline-features", "f1"],
            "run/baselines.json",
        ),
    ] {
        let mut full = args.clone();
        full.extend(["--config", "unrest.toml", "--out", "run", "--seed", "21"]);
        let out = unrest(&full, dir.path());
        assert_success(&out);
        assert!(
            dir.path().join(artifact).exists(),
            "{artifact} missing after {args:?}"
        );
    }

    // evaluate prints the day-grid with one column per prediction day
    let out = unrest(
        &["evaluate", "--matrix", "run/features.csv", "--config", "unrest.toml",
          "--out", "run", "--seed", "21"],
        dir.path(),
    );
    let stdout = String::from_utf8_lossy(&out.stdout);
    assert!(stdout.contains("measure,2016-11-11,2016-11-12,2016-11-13"));
    assert!(stdout.contains("tpr,"));
    assert!(stdout.contains("accuracy,"));

    let report: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("run/report.json")).unwrap())
            .unwrap();
    assert_eq!(report["days"].as_array().unwrap().len(), 3);
    assert_eq!(report["classifier"], "logit");
    assert_eq!(report["seed"], 21);

    let roc_text = std::fs::read_to_string(dir.path().join("run/roc.csv")).unwrap();
    assert!(roc_text.starts_with("threshold,fpr,tpr\n"));
    assert!(roc_text.trim_end().lines().last().unwrap().starts_with("# auc="));

    // the single-predictor protocol is just a mask away
    let out = unrest(
        &["evaluate", "--matrix", "run/features.csv", "--features", "f1",
          "--config", "unrest.toml", "--out", "run", "--seed", "21"],
        dir.path(),
    );
    assert_success(&out);
    assert!(String::from_utf8_lossy(&out.stdout).contains("features=f1 "));
}

#[test]
fn transfer_between_two_simulated_events() {
    let dir = tempfile::tempdir().unwrap();
    write_region_config(dir.path());

    for (seed, out) in [(31u64, "a"), (32u64, "b")] {
        std::fs::write(dir.path().join("gen.json"), gen_config_json(seed)).unwrap();
        assert_success(&unrest(
            &["simulate", "--gen-config", "gen.json", "--seed", &seed.to_string(), "--out", out],
            dir.path(),
        ));
        assert_success(&unrest(
            &[
                "featurize",
                "--corpus", &format!("{out}/tweets.jsonl"),
                "--protests", &format!("{out}/protests.csv"),
                "--votes", &format!("{out}/votes.csv"),
                "--from", "2016-11-10",
                "--to", "2016-11-13",
                "--config", "unrest.toml",
                "--out", out,
            ],
            dir.path(),
        ));
    }
    let out = unrest(
        &[
            "transfer",
            "--matrix", "a/features.csv",
            "--test-matrix", "b/features.csv",
            "--config", "unrest.toml",
            "--out", "t",
        ],
        dir.path(),
    );
    assert_success(&out);
    assert!(dir.path().join("t/transfer_report.json").exists());
    assert!(dir.path().join("t/transfer_roc.csv").exists());
}

#[test]
fn select_reports_subset_and_inclusion() {
    let dir = tempfile::tempdir().unwrap();
    write_region_config(dir.path());
    simulate_and_featurize(dir.path(), 23);
    let out = unrest(
        &[
            "select",
            "--matrix", "run/features.csv",
            "--folds", "5",
            "--config", "unrest.toml",
            "--out", "run",
            "--seed", "23",
        ],
        dir.path(),
    );
    assert_success(&out);
    let report: serde_json::Value = serde_json::from_str(
        &std::fs::read_to_string(dir.path().join("run/selection_report.json")).unwrap(),
    )
    .unwrap();
    assert_eq!(report["folds"], 5);
    assert_eq!(report["inclusion_pct"].as_array().unwrap().len(), 7);
}

#[test]
fn reruns_are_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    write_region_config(dir.path());

    let mut artifacts: Vec<Vec<u8>> = Vec::new();
    for run in ["r1", "r2"] {
        std::fs::write(dir.path().join("gen.json"), gen_config_json(77)).unwrap();
        assert_success(&unrest(
            &["simulate", "--gen-config", "gen.json", "--seed", "77", "--out", run],
            dir.path(),
        ));
        assert_success(&unrest(
            &[
                "featurize",
                "--corpus", &format!("{run}/tweets.jsonl"),
                "--protests", &format!("{run}/protests.csv"),
                "--votes", &format!("{run}/votes.csv"),
                "--from", "2016-11-10",
                "--to", "2016-11-13",
                "--config", "unrest.toml",
                "--out", run,
            ],
            dir.path(),
        ));
        assert_success(&unrest(
            &["evaluate", "--matrix", &format!("{run}/features.csv"),
              "--config", "unrest.toml", "--seed", "77", "--out", run],
            dir.path(),
        ));
        assert_success(&unrest(
            &["train", "--matrix", &format!("{run}/features.csv"),
              "--config", "unrest.toml", "--seed", "77", "--out", run],
            dir.path(),
        ));
        for artifact in ["tweets.jsonl", "features.csv", "report.json", "roc.csv", "model.json"] {
            artifacts.push(std::fs::read(dir.path().join(run).join(artifact)).unwrap());
        }
    }
    let (first, second) = artifacts.split_at(5);
    for (a, b) in first.iter().zip(second) {
        assert_eq!(a, b);
    }
}

#[test]
fn unknown_command_exits_one_with_usage() {
    let dir = tempfile::tempdir().unwrap();
    let out = unrest(&["frobnicate"], dir.path());
    assert_eq!(out.status.code(), Some(1));
    let stderr = String::from_utf8_lossy(&out.stderr);
    assert!(stderr.to_lowercase().contains("usage"), "stderr: {stderr}");
}

#[test]
fn help_exits_zero() {
    let dir = tempfile::tempdir().unwrap();
    let out = unrest(&["--help"], dir.path());
    assert_eq!(out.status.code(), Some(0));
    assert!(String::from_utf8_lossy(&out.stdout).contains("simulate"));
}

#[test]
fn missing_input_exits_one_with_stable_code() {
    let dir = tempfile::tempdir().unwrap();
    let out = unrest(&["evaluate", "--matrix", "nope.csv", "--out", "x"], dir.path());
    assert_eq!(out.status.code(), Some(1));
    let stderr = String::from_utf8_lossy(&out.stderr);
    assert!(stderr.contains("error[E-"), "stderr: {stderr}");

    let out = unrest(&["evaluate", "--out", "x"], dir.path());
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("error[E-INVALID]"));
}

#[test]
fn bad_config_file_exits_one() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("bad.toml"), "run = \"not a table\"\n").unwrap();
    let out = unrest(&["ingest", "--config", "bad.toml"], dir.path());
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("error[E-FORMAT]"));
}
