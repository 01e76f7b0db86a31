//! Thin CLI over the audit pipeline: generate, evaluate, baseline, score.
//! Exit codes: 0 success, 1 configuration/input error, 2 provider
//! exhaustion, 3 internal invariant violation.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use cfaudit::audit::{cmd_baseline, cmd_evaluate, cmd_generate, cmd_score, AuditConfig, ConfigOverrides};
use cfaudit::gateway::PromptMode;

#[derive(Parser)]
#[command(
    name = "cfaudit",
    about = "Counterfactual fairness audits for LLM-based contact-center Auto-QA evaluators",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct CommonArgs {
    /// Audit configuration file (TOML).
    #[arg(long, value_name = "FILE")]
    config: PathBuf,
    /// Override the corpus path.
    #[arg(long, value_name = "FILE")]
    corpus: Option<PathBuf>,
    /// Comma-separated dimension-strategy names (default: all 15).
    #[arg(long, value_delimiter = ',')]
    dimensions: Option<Vec<String>>,
    /// Comma-separated evaluated model ids.
    #[arg(long, value_delimiter = ',')]
    models: Option<Vec<String>>,
    /// Prompt mode: standard or fairness.
    #[arg(long, value_name = "MODE")]
    prompt_mode: Option<String>,
    /// Robustness repeats per instance (k >= 2).
    #[arg(long, value_name = "K")]
    k: Option<u32>,
    /// Output directory for stores, cache and reports.
    #[arg(long, value_name = "DIR")]
    out: Option<PathBuf>,
    /// Base seed for deterministic sampling.
    #[arg(long)]
    seed: Option<u64>,
    /// Bound on in-flight work items and per-provider requests.
    #[arg(long, value_name = "N")]
    max_concurrency: Option<usize>,
}

impl CommonArgs {
    fn load(&self) -> Result<AuditConfig, cfaudit::audit::AuditError> {
        let mut config = AuditConfig::load(&self.config)?;
        let prompt_mode = match &self.prompt_mode {
            None => None,
            Some(raw) => Some(PromptMode::parse(raw).ok_or_else(|| {
                cfaudit::audit::AuditError::Config(format!(
                    "unknown prompt mode {raw:?} (expected standard or fairness)"
                ))
            })?),
        };
        let overrides = ConfigOverrides {
            corpus: self.corpus.clone(),
            dimensions: self.dimensions.clone(),
            models: self.models.clone(),
            prompt_mode,
            robustness_k: self.k,
            out_dir: self.out.clone(),
            seed: self.seed,
            max_concurrency: self.max_concurrency,
        };
        overrides.apply(&mut config);
        Ok(config)
    }
}

#[derive(Subcommand)]
enum Command {
    /// Generate counterfactual variants and rejection statistics.
    Generate(CommonArgs),
    /// Evaluate accepted variants: Auto-QA plus coaching records.
    Evaluate(CommonArgs),
    /// Repeat-evaluate original transcripts for the robustness baseline.
    Baseline(CommonArgs),
    /// Compute CFR/MASD/robustness/accuracy and export the report.
    Score(CommonArgs),
}

fn run() -> Result<(), cfaudit::audit::AuditError> {
    let cli = Cli::parse();
    match cli.command {
        Command::Generate(args) => {
            let config = args.load()?;
            let outcome = cmd_generate(&config)?;
            println!(
                "generate: {} new variants ({} total) -> {}",
                outcome.new_variants,
                outcome.total_variants,
                outcome.store_path.display()
            );
            for (dim, counts) in &outcome.stats.per_dimension {
                println!(
                    "  {dim}: generated {} rejected {} accepted {} skipped {}",
                    counts.generated, counts.llm_rejected, counts.accepted, counts.skipped
                );
            }
        }
        Command::Evaluate(args) => {
            let config = args.load()?;
            let outcome = cmd_evaluate(&config)?;
            println!(
                "evaluate: {} new records ({} total), {} parse failures -> {}",
                outcome.new_records,
                outcome.total_records,
                outcome.parse_failures,
                outcome.store_path.display()
            );
        }
        Command::Baseline(args) => {
            let config = args.load()?;
            let outcome = cmd_baseline(&config)?;
            println!(
                "baseline: {} new repeat records ({} total) -> {}",
                outcome.new_records,
                outcome.total_records,
                outcome.store_path.display()
            );
        }
        Command::Score(args) => {
            let config = args.load()?;
            let outcome = cmd_score(&config)?;
            println!("score: report written to {}", outcome.report_dir.display());
            if outcome.has_undefined {
                eprintln!("warning: some scores are undefined (rendered as em dashes)");
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    // Die quietly on a closed pipe (e.g. `cfaudit ... | head`) like any
    // other batch tool instead of panicking mid-println.
    #[cfg(unix)]
    unsafe {
        libc::signal(libc::SIGPIPE, libc::SIG_DFL);
    }
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    match run() {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::from(err.exit_code() as u8)
        }
    }
}
