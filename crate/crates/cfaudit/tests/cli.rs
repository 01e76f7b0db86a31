//! Smoke tests over the installed binary: subcommands, flag overrides, and
//! the exit-code convention, driven through the real CLI surface.

mod common;

use std::process::Command;

use common::setup_workspace;

fn cfaudit() -> Command {
    Command::new(env!("CARGO_BIN_EXE_cfaudit"))
}

#[test]
fn generate_evaluate_baseline_score_via_cli() {
    let dir = tempfile::tempdir().unwrap();
    setup_workspace(dir.path(), &["judge-null"]);
    let config = dir.path().join("audit.toml");

    let run = |subcommand: &str, extra: &[&str]| {
        let output = cfaudit()
            .arg(subcommand)
            .arg("--config")
            .arg(&config)
            .args(extra)
            .env("RUST_LOG", "warn")
            .output()
            .unwrap();
        assert!(
            output.status.success(),
            "{subcommand} failed: {}\n{}",
            String::from_utf8_lossy(&output.stdout),
            String::from_utf8_lossy(&output.stderr)
        );
        String::from_utf8(output.stdout).unwrap()
    };

    // Restrict to two dimensions via flags to keep the smoke test quick.
    let dims = ["--dimensions", "agent_gender,politeness"];
    let stdout = run("generate", &dims);
    assert!(stdout.contains("generate:"), "{stdout}");
    assert!(dir.path().join("out/variants.jsonl").exists());

    let stdout = run("evaluate", &dims);
    assert!(stdout.contains("evaluate:"), "{stdout}");

    let stdout = run("baseline", &["--k", "2"]);
    assert!(stdout.contains("baseline:"), "{stdout}");

    let stdout = run("score", &dims);
    assert!(stdout.contains("report written"), "{stdout}");
    for file in [
        "manifest.json",
        "cfr.csv",
        "masd_confidence.csv",
        "masd_positive.csv",
        "masd_improvement.csv",
        "robustness.csv",
        "accuracy.csv",
        "rejection_stats.csv",
        "summary.md",
    ] {
        assert!(
            dir.path().join("out/report").join(file).exists(),
            "missing {file}"
        );
    }
}

#[test]
fn missing_store_exits_with_input_error_code() {
    let dir = tempfile::tempdir().unwrap();
    setup_workspace(dir.path(), &["judge-null"]);
    let output = cfaudit()
        .arg("score")
        .arg("--config")
        .arg(dir.path().join("audit.toml"))
        .env("RUST_LOG", "error")
        .output()
        .unwrap();
    assert_eq!(output.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&output.stderr).contains("records.jsonl"));
}

#[test]
fn bad_prompt_mode_flag_is_config_error() {
    let dir = tempfile::tempdir().unwrap();
    setup_workspace(dir.path(), &["judge-null"]);
    let output = cfaudit()
        .arg("generate")
        .arg("--config")
        .arg(dir.path().join("audit.toml"))
        .args(["--prompt-mode", "sideways"])
        .output()
        .unwrap();
    assert_eq!(output.status.code(), Some(1));
}
