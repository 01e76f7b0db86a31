//! The four pipeline stages end to end against a synthetic workspace:
//! generate -> evaluate (standard + fairness) -> baseline -> score.
//! Everything runs on deterministic mock providers; the same flow drives
//! real endpoints once the providers file declares `kind = "http"` models.
//!
//! ```bash
//! cargo run -p cfaudit --example full_audit
//! ```

use cfaudit::audit::{cmd_baseline, cmd_evaluate, cmd_generate, cmd_score, AuditConfig};
use cfaudit::fixtures;
use cfaudit::gateway::PromptMode;

const PROVIDERS: &str = r#"
[[providers]]
name = "pipeline"
kind = "prompt_hash"

[[providers]]
name = "judges"
kind = "instance_keyed"

[[models]]
model_id = "gen-model"
provider = "pipeline"

[[models]]
model_id = "validator-model"
provider = "pipeline"

[[models]]
model_id = "judge-a"
provider = "judges"

[[models]]
model_id = "judge-b"
provider = "pipeline"
"#;

const AUDIT: &str = r#"
corpus = "corpus.jsonl"
questions = "questions.jsonl"
gold_labels = "gold_labels.csv"
providers = "providers.toml"
out_dir = "out"
models = ["judge-a", "judge-b"]
prompt_mode = "standard"
robustness_k = 3
seed = 7
max_concurrency = 4
identifier_model = "gen-model"
validator_model = "validator-model"
run_id = "example-audit"
"#;

fn main() -> anyhow::Result<()> {
    let dir = tempfile::tempdir()?;
    fixtures::write_fixture_workspace(dir.path(), 8, 7)?;
    std::fs::write(dir.path().join("providers.toml"), PROVIDERS)?;
    let config_path = dir.path().join("audit.toml");
    std::fs::write(&config_path, AUDIT)?;
    let config = AuditConfig::load(&config_path)?;

    let generated = cmd_generate(&config)?;
    println!(
        "generate: {} variants across {} dimensions",
        generated.total_variants,
        generated.stats.per_dimension.len()
    );

    let evaluated = cmd_evaluate(&config)?;
    println!("evaluate (standard): {} records", evaluated.total_records);

    let mut fairness = config.clone();
    fairness.prompt_mode = PromptMode::Fairness;
    let evaluated = cmd_evaluate(&fairness)?;
    println!("evaluate (fairness): {} records total", evaluated.total_records);

    let baseline = cmd_baseline(&config)?;
    println!("baseline: {} repeat records (k = {})", baseline.total_records, config.robustness_k);

    let score = cmd_score(&config)?;
    println!("\nreport written to {}:", score.report_dir.display());
    for entry in std::fs::read_dir(&score.report_dir)? {
        println!("  {}", entry?.file_name().to_string_lossy());
    }

    println!("\ncfr.csv:");
    print!("{}", std::fs::read_to_string(score.report_dir.join("cfr.csv"))?);
    println!("\nprompting_delta.csv:");
    print!(
        "{}",
        std::fs::read_to_string(score.report_dir.join("prompting_delta.csv"))?
    );
    Ok(())
}
