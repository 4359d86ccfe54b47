//! CLI behavior: exit-code taxonomy, flag validation, stdout formats, and
//! replay-driven determinism of the LLM-backed subcommands.

mod common;

use std::path::Path;
use std::process::{Command, Output};

use common::fixture_path;

fn mifc(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_mifc")).args(args).output().expect("mifc runs")
}

fn stdout(output: &Output) -> String {
    String::from_utf8_lossy(&output.stdout).to_string()
}

fn stderr(output: &Output) -> String {
    String::from_utf8_lossy(&output.stderr).to_string()
}

fn fixture(relative: &str) -> String {
    fixture_path(relative).to_string_lossy().to_string()
}

fn config_arg() -> String {
    fixture("config.json")
}

#[test]
fn help_lists_every_subcommand() {
    let output = mifc(&["--help"]);
    assert!(output.status.success());
    let text = stdout(&output);
    for subcommand in [
        "filter", "score", "expand", "genqa", "translate", "judge", "dedup", "leak-check",
        "assemble", "emit-train-config", "report",
    ] {
        assert!(text.contains(subcommand), "help is missing {subcommand}");
    }
}

#[test]
fn missing_required_flag_exits_3_and_names_it() {
    let output = mifc(&["filter"]);
    assert_eq!(output.status.code(), Some(3));
    assert!(stderr(&output).contains("--input"));
}

#[test]
fn unknown_subcommand_exits_3_with_usage() {
    let output = mifc(&["frobnicate"]);
    assert_eq!(output.status.code(), Some(3));
    assert!(stderr(&output).to_lowercase().contains("usage"));
}

#[test]
fn unreadable_config_exits_3() {
    let output = mifc(&["--config", "/nonexistent/cfg.json", "dedup", "--input", "x", "--out", "y"]);
    assert_eq!(output.status.code(), Some(3));
}

#[test]
fn missing_input_file_exits_3() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("out.jsonl");
    let output = mifc(&["dedup", "--input", "/nonexistent/in.jsonl", "--out", out.to_str().unwrap()]);
    assert_eq!(output.status.code(), Some(3));
}

#[test]
fn malformed_input_data_exits_1() {
    let dir = tempfile::tempdir().unwrap();
    let input = dir.path().join("bad.jsonl");
    std::fs::write(&input, "not json at all\n").unwrap();
    let out = dir.path().join("out.jsonl");
    let output = mifc(&["dedup", "--input", input.to_str().unwrap(), "--out", out.to_str().unwrap()]);
    assert_eq!(output.status.code(), Some(1));
    assert!(stderr(&output).contains("line 1"));
}

#[test]
fn score_bleu_prints_json() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a.txt");
    let b = dir.path().join("b.txt");
    std::fs::write(&a, "the cat sat on the mat").unwrap();
    std::fs::write(&b, "the cat sat on the mat").unwrap();
    let output = mifc(&["score", "--metric", "bleu", "--a", a.to_str().unwrap(), "--b", b.to_str().unwrap()]);
    assert!(output.status.success(), "{}", stderr(&output));
    let parsed: serde_json::Value = serde_json::from_str(&stdout(&output)).unwrap();
    assert_eq!(parsed["metric"], "bleu");
    assert_eq!(parsed["mean"], 1.0);
}

#[test]
fn score_ccts_reports_gate_decision() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a.txt");
    let b = dir.path().join("b.txt");
    std::fs::write(&a, "insulin regulates blood glucose levels").unwrap();
    std::fs::write(&b, "insulin regulates blood glucose levels").unwrap();
    let output = mifc(&[
        "--config", &config_arg(), "score", "--metric", "ccts",
        "--a", a.to_str().unwrap(), "--b", b.to_str().unwrap(),
    ]);
    assert!(output.status.success(), "{}", stderr(&output));
    let parsed: serde_json::Value = serde_json::from_str(&stdout(&output)).unwrap();
    assert_eq!(parsed["accepted"], true);
    assert!((parsed["value"].as_f64().unwrap() - 1.0).abs() < 1e-9);
}

#[test]
fn filter_writes_report_with_digests() {
    let dir = tempfile::tempdir().unwrap();
    let kept = dir.path().join("kept.jsonl");
    let rejected = dir.path().join("rejected.jsonl");
    let output = mifc(&[
        "--config", &config_arg(), "filter",
        "--input", &fixture("corpus/raw_en.jsonl"),
        "--keywords", &fixture("corpus/keywords_en.txt"),
        "--kept", kept.to_str().unwrap(),
        "--rejected", rejected.to_str().unwrap(),
    ]);
    assert!(output.status.success(), "{}", stderr(&output));
    let report: serde_json::Value = serde_json::from_str(
        &std::fs::read_to_string(dir.path().join("kept.jsonl.report.json")).unwrap(),
    )
    .unwrap();
    assert_eq!(report["command"], "filter");
    assert_eq!(report["counts"]["kept"], 8);
    assert_eq!(report["counts"]["rejected"], 4);
    assert_eq!(report["inputs"][0]["sha256"].as_str().unwrap().len(), 64);
}

fn count_lines(path: &Path) -> usize {
    std::fs::read_to_string(path).unwrap().lines().count()
}

#[test]
fn expand_under_replay_is_byte_identical_across_runs() {
    let dir = tempfile::tempdir().unwrap();
    let run = |name: &str| {
        let out = dir.path().join(name);
        let output = mifc(&[
            "--config", &config_arg(), "expand",
            "--input", &fixture("corpus/short_zh.jsonl"),
            "--out", out.to_str().unwrap(),
            "--replay", &fixture("replay/golden.jsonl"),
        ]);
        assert!(output.status.success(), "{}", stderr(&output));
        std::fs::read(&out).unwrap()
    };
    let first = run("a.jsonl");
    let second = run("b.jsonl");
    assert_eq!(count_lines(&dir.path().join("a.jsonl")), 20);
    assert_eq!(first, second, "replayed expansion must be byte-identical");
    // Original keyword answers preserved under annotations.
    let text = String::from_utf8(first).unwrap();
    let sample: serde_json::Value = serde_json::from_str(text.lines().next().unwrap()).unwrap();
    assert!(sample["annotations"]["expand.original"].is_string());
}

#[test]
fn judge_command_gates_on_recorded_context() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("accepted.jsonl");
    let rejected = dir.path().join("rejected.jsonl");
    let output = mifc(&[
        "--config", &config_arg(), "judge",
        "--input", &fixture("corpus/judge_in_en.jsonl"),
        "--out", out.to_str().unwrap(),
        "--rejected", rejected.to_str().unwrap(),
        "--replay", &fixture("replay/golden.jsonl"),
    ]);
    assert!(output.status.success(), "{}", stderr(&output));
    assert_eq!(count_lines(&out), 1);
    assert_eq!(count_lines(&rejected), 1);
    let accepted: serde_json::Value =
        serde_json::from_str(std::fs::read_to_string(&out).unwrap().lines().next().unwrap()).unwrap();
    assert_eq!(accepted["id"], "jq01");
    assert_eq!(accepted["annotations"]["judge.accepted"], true);
}

#[test]
fn leak_check_passes_disjoint_and_fails_planted() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("leakage.json");
    let output = mifc(&[
        "leak-check",
        "--ift", &fixture("corpus/raw_en.jsonl"),
        "--mc-train", &fixture("corpus/mc_train_en.jsonl"),
        "--mc-test", &fixture("corpus/mc_test_en.jsonl"),
        "--probes", "100",
        "--seed", "7",
        "--out", out.to_str().unwrap(),
    ]);
    assert!(output.status.success(), "{}", stderr(&output));
    let report: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(&out).unwrap()).unwrap();
    assert_eq!(report["pass"], true);

    // Planted leak: ift probe equals an mc-train sample.
    let leaky_train = dir.path().join("leaky_train.jsonl");
    let raw = std::fs::read_to_string(fixture_path("corpus/raw_en.jsonl")).unwrap();
    let first_sample: serde_json::Value = serde_json::from_str(raw.lines().next().unwrap()).unwrap();
    let planted = serde_json::json!({
        "id": "planted", "lang": "EN", "kind": "raw_text",
        "raw_text": first_sample["raw_text"], "source": "leak",
    });
    std::fs::write(&leaky_train, format!("{planted}\n")).unwrap();
    let out2 = dir.path().join("leakage2.json");
    let output = mifc(&[
        "leak-check",
        "--ift", &fixture("corpus/raw_en.jsonl"),
        "--mc-train", leaky_train.to_str().unwrap(),
        "--probes", "100",
        "--seed", "7",
        "--out", out2.to_str().unwrap(),
    ]);
    assert_eq!(output.status.code(), Some(1), "leakage must exit 1");
    let report: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(&out2).unwrap()).unwrap();
    assert_eq!(report["pass"], false);
    assert_eq!(report["collisions"].as_array().unwrap().len(), 1);
    assert_eq!(report["collisions"][0]["target_id"], "planted");
}

#[test]
fn emit_train_config_writes_stage_files() {
    let dir = tempfile::tempdir().unwrap();
    let output = mifc(&["emit-train-config", "--out", dir.path().to_str().unwrap()]);
    assert!(output.status.success(), "{}", stderr(&output));
    let stage1: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("stage1.json")).unwrap()).unwrap();
    assert_eq!(stage1["rank"], 32);
    assert_eq!(stage1["alpha"], 16);
    assert_eq!(stage1["dropout"], 0.05);
    assert_eq!(stage1["learning_rate"], 5e-5);
    assert_eq!(stage1["merge_adapter_after"], true);
    let stage2: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("stage2.json")).unwrap()).unwrap();
    assert_eq!(stage2["rank"], 16);
    assert_eq!(stage2["alpha"], 8);
    assert_eq!(stage2["learning_rate"], 2e-5);
    assert!(dir.path().join("emit-train-config.report.json").exists());
}

#[test]
fn report_prints_per_language_table() {
    let output = mifc(&["report", "--manifest", &fixture("golden/mmed_ift.manifest.json")]);
    assert!(output.status.success(), "{}", stderr(&output));
    let text = stdout(&output);
    assert!(text.contains("dataset: mmed_ift"));
    assert!(text.contains("EN"), "{text}");
    assert!(text.contains("14"));
    assert!(text.contains("KO"));
    assert!(text.contains("12"));
    assert!(text.contains("leakage: pass"));
}

#[test]
fn json_log_format_emits_json_lines() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("out.jsonl");
    let output = mifc(&[
        "--log-format", "json", "dedup",
        "--input", &fixture("corpus/mc_train_en.jsonl"),
        "--out", out.to_str().unwrap(),
    ]);
    assert!(output.status.success());
    let err = stderr(&output);
    let log_line = err.lines().find(|l| l.contains("dedup")).expect("a dedup log line");
    let parsed: serde_json::Value = serde_json::from_str(log_line).expect("log line is JSON");
    assert_eq!(parsed["level"], "INFO");
}
