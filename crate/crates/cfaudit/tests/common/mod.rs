#![allow(dead_code)]

//! Shared pipeline fixtures for the integration and acceptance suites:
//! a deterministic mock workspace (corpus, questions, gold labels, provider
//! and audit configuration) that runs the four stages fully offline.

use std::path::{Path, PathBuf};

use cfaudit::audit::AuditConfig;
use cfaudit::fixtures;

pub const FIXTURE_TRANSCRIPTS: usize = 20;
pub const FIXTURE_SEED: u64 = 7;

pub const PROVIDERS_TOML: &str = r#"
[[providers]]
name = "pipeline"
kind = "prompt_hash"

[[providers]]
name = "null-judge"
kind = "instance_keyed"

[[providers]]
name = "hash-judge"
kind = "prompt_hash"

[[models]]
model_id = "gen-model"
provider = "pipeline"

[[models]]
model_id = "validator-model"
provider = "pipeline"

[[models]]
model_id = "judge-null"
provider = "null-judge"

[[models]]
model_id = "judge-hash"
provider = "hash-judge"
"#;

pub fn audit_toml(models: &[&str]) -> String {
    let model_list = models
        .iter()
        .map(|m| format!("{m:?}"))
        .collect::<Vec<_>>()
        .join(", ");
    format!(
        r#"
corpus = "corpus.jsonl"
questions = "questions.jsonl"
gold_labels = "gold_labels.csv"
providers = "providers.toml"
out_dir = "out"
models = [{model_list}]
prompt_mode = "standard"
robustness_k = 3
seed = {FIXTURE_SEED}
max_concurrency = 2
identifier_model = "gen-model"
validator_model = "validator-model"
run_id = "golden-fixture"
timestamp = "2026-01-01T00:00:00Z"
"#
    )
}

/// Write the full mock workspace under `dir` and return the loaded config.
pub fn setup_workspace(dir: &Path, models: &[&str]) -> AuditConfig {
    fixtures::write_fixture_workspace(dir, FIXTURE_TRANSCRIPTS, FIXTURE_SEED).unwrap();
    std::fs::write(dir.join("providers.toml"), PROVIDERS_TOML).unwrap();
    let config_path = dir.join("audit.toml");
    std::fs::write(&config_path, audit_toml(models)).unwrap();
    AuditConfig::load(&config_path).unwrap()
}

/// Recursively collect relative file paths under a directory, sorted.
pub fn file_listing(root: &Path) -> Vec<PathBuf> {
    fn walk(dir: &Path, root: &Path, out: &mut Vec<PathBuf>) {
        for entry in std::fs::read_dir(dir).unwrap() {
            let path = entry.unwrap().path();
            if path.is_dir() {
                walk(&path, root, out);
            } else {
                out.push(path.strip_prefix(root).unwrap().to_path_buf());
            }
        }
    }
    let mut out = Vec::new();
    walk(root, root, &mut out);
    out.sort();
    out
}
