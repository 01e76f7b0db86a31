//! Counterfactual generation with the semantic gate: annotate a transcript,
//! produce variants for a few dimensions, and print the review diffs and
//! rejection accounting. Uses the deterministic mock providers, so it runs
//! fully offline.
//!
//! ```bash
//! cargo run -p cfaudit --example generate_variants
//! ```

use std::sync::Arc;

use cfaudit::counterfactual::{
    annotate_turns, generate_dimension_variants, render_review_diff, GenerationConfig,
    GenerationModels,
};
use cfaudit::fixtures;
use cfaudit::gateway::mock::MockEvaluator;
use cfaudit::gateway::{Gateway, ModelSpec};
use cfaudit::taxonomy::{dimension, AttributePools, DimensionName};

fn main() -> anyhow::Result<()> {
    let gateway = Gateway::builder()
        .provider("mock", Arc::new(MockEvaluator::by_prompt()))
        .build()?;
    let models = GenerationModels {
        identifier: ModelSpec::new("identifier-model", "mock"),
        generator: ModelSpec::new("generator-model", "mock"),
        validator: ModelSpec::new("validator-model", "mock"),
    };
    let pools = AttributePools::builtin();
    let transcript = fixtures::sample_transcript(0, 7);

    let annotation = annotate_turns(&transcript, &gateway, &models.identifier)?;
    println!(
        "annotation: agent {:?}; name turns {:?}, gender turns {:?}, politeness turns {:?}",
        annotation.agent_name,
        annotation.name_turns,
        annotation.gender_turns,
        annotation.politeness_turns
    );

    for name in [
        DimensionName::AgentGender,
        DimensionName::AgentReligionCues,
        DimensionName::PastPerformance,
    ] {
        let dim = dimension(name);
        let outcome = generate_dimension_variants(
            &transcript,
            &dim,
            &gateway,
            &models,
            &pools,
            &GenerationConfig::default(),
        )?;
        println!("\n=== {} ({} variants) ===", dim.name.display_label(), outcome.variants.len());
        for variant in &outcome.variants {
            println!(
                "--- condition {:?} (validation {:?}, attempts {}) ---",
                variant.condition, variant.validation, variant.attempts
            );
            print!("{}", render_review_diff(variant));
        }
        let counts = outcome.stats.per_dimension[dim.name.as_str()];
        println!(
            "stats: generated {} rejected {} accepted {} skipped {}",
            counts.generated, counts.llm_rejected, counts.accepted, counts.skipped
        );
    }
    Ok(())
}
