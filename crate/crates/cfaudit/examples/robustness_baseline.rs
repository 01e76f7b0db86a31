//! The robustness baseline: repeat-evaluate unmodified transcripts and
//! measure the noise floor that fairness metrics must exceed. A
//! deterministic judge scores 0.00; a stochastic judge does not.
//!
//! ```bash
//! cargo run -p cfaudit --example robustness_baseline
//! ```

use std::sync::Arc;

use cfaudit::fixtures;
use cfaudit::gateway::mock::{JudgmentPolicy, MockEvaluator};
use cfaudit::gateway::{Gateway, ModelSpec, PromptMode};
use cfaudit::metrics::{robustness, RepeatRecord};

fn collect_repeats(
    gateway: &Gateway,
    model: &ModelSpec,
    k: u32,
) -> anyhow::Result<Vec<RepeatRecord>> {
    let corpus = fixtures::sample_corpus(5, 7);
    let questions = fixtures::sample_questions();
    let mut records = Vec::new();
    for transcript in &corpus {
        for question in questions.iter().take(2) {
            let results = gateway.repeat_evaluate(transcript, question, model, PromptMode::Standard, k)?;
            for (idx, qa) in results.iter().enumerate() {
                records.push(RepeatRecord {
                    source_id: transcript.id.clone(),
                    question_id: question.question_id.clone(),
                    model_id: model.model_id.clone(),
                    prompt_mode: PromptMode::Standard,
                    repeat_index: idx as u32,
                    judgment: qa.judgment,
                    confidence: qa.confidence,
                    positive_score: None,
                    improvement_score: None,
                });
            }
        }
    }
    Ok(records)
}

fn main() -> anyhow::Result<()> {
    let k = 3;

    // Deterministic judge: identical prompt, identical answer, every time.
    let gateway = Gateway::builder()
        .provider("det", Arc::new(MockEvaluator::by_prompt()))
        .build()?;
    let model = ModelSpec::new("deterministic-judge", "det");
    let records = collect_repeats(&gateway, &model, k)?;
    let refs: Vec<&RepeatRecord> = records.iter().collect();
    let baseline = robustness(&refs, &model.model_id);
    println!(
        "deterministic judge: flip rate {:?}%, confidence masd {:?} over {} instances",
        baseline.flip_rate_percent, baseline.masd_confidence, baseline.instances
    );

    // Stochastic judge: seeded 10% flips and ±8 score jitter.
    let gateway = Gateway::builder()
        .provider(
            "noisy",
            Arc::new(MockEvaluator::new(JudgmentPolicy::stochastic(0.10, 8.0, 99))),
        )
        .build()?;
    let model = ModelSpec::new("noisy-judge", "noisy");
    let records = collect_repeats(&gateway, &model, k)?;
    let refs: Vec<&RepeatRecord> = records.iter().collect();
    let baseline = robustness(&refs, &model.model_id);
    println!(
        "stochastic judge:    flip rate {:.2}%, confidence masd {:.2} over {} instances",
        baseline.flip_rate_percent.unwrap_or_default(),
        baseline.masd_confidence.unwrap_or_default(),
        baseline.instances
    );
    println!("\nany fairness disparity below its model's baseline is indistinguishable from noise");
    Ok(())
}
