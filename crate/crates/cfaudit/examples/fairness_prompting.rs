//! Fairness-prompting analysis: evaluate the same variants under the
//! standard and bias-aware system prompts and compute per-model metric
//! deltas (negative = the fairness prompt reduced disparity).
//!
//! ```bash
//! cargo run -p cfaudit --example fairness_prompting
//! ```

use std::sync::Arc;

use cfaudit::counterfactual::{generate_dimension_variants, GenerationConfig, GenerationModels};
use cfaudit::fixtures;
use cfaudit::gateway::mock::MockEvaluator;
use cfaudit::gateway::{Gateway, ModelSpec, PromptMode};
use cfaudit::metrics::{dimension_score, prompting_delta, EvaluationRecord};
use cfaudit::taxonomy::{dimension, pairs, AttributePools, DimensionName};

fn main() -> anyhow::Result<()> {
    let gateway = Gateway::builder()
        .provider("mock", Arc::new(MockEvaluator::by_prompt()))
        .build()?;
    let models = GenerationModels {
        identifier: ModelSpec::new("identifier-model", "mock"),
        generator: ModelSpec::new("generator-model", "mock"),
        validator: ModelSpec::new("validator-model", "mock"),
    };
    let judge = ModelSpec::new("judge", "mock");
    let pools = AttributePools::builtin();
    let questions = fixtures::sample_questions();
    let dim = dimension(DimensionName::AgentProfile);
    let pair_set = pairs(&dim);

    let mut scores = Vec::new();
    for mode in [PromptMode::Standard, PromptMode::Fairness] {
        let mut records = Vec::new();
        for i in 0..6 {
            let transcript = fixtures::sample_transcript(i, 7);
            let outcome = generate_dimension_variants(
                &transcript,
                &dim,
                &gateway,
                &models,
                &pools,
                &GenerationConfig::default(),
            )?;
            for variant in &outcome.variants {
                for question in questions.iter().take(2) {
                    let qa = gateway.evaluate_qa(&variant.transcript, question, &judge, mode)?;
                    records.push(EvaluationRecord {
                        source_id: variant.source_id.clone(),
                        dimension: variant.dimension,
                        condition: variant.condition.clone(),
                        question_id: question.question_id.clone(),
                        model_id: judge.model_id.clone(),
                        prompt_mode: mode,
                        judgment: qa.judgment,
                        confidence: qa.confidence,
                        positive_score: None,
                        improvement_score: None,
                    });
                }
            }
        }
        let refs: Vec<&EvaluationRecord> = records.iter().collect();
        let score = dimension_score(&refs, dim.name, &judge.model_id, mode, &pair_set);
        println!(
            "{:9} prompt: CFR {:.2}% (confidence MASD {:.2})",
            mode.as_str(),
            score.cfr_percent.unwrap_or_default(),
            score.masd_confidence.unwrap_or_default()
        );
        scores.push(score);
    }

    let deltas = prompting_delta(&scores[..1], &scores[1..])?;
    let delta = &deltas[0];
    println!(
        "\nfairness - standard for {}: ΔCFR {:+.2}, ΔConf MASD {:+.2}",
        delta.model_id,
        delta.delta_cfr.unwrap_or_default(),
        delta.delta_masd_confidence.unwrap_or_default()
    );
    println!("negative deltas mean the bias-aware prompt reduced disparity");
    Ok(())
}
