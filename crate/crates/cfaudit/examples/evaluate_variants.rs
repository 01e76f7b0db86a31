//! Auto-QA and coaching through the gateway: sentinel-format judgment
//! parsing, structured coaching scores, and the response cache at work.
//!
//! ```bash
//! cargo run -p cfaudit --example evaluate_variants
//! ```

use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Arc;

use cfaudit::fixtures;
use cfaudit::gateway::mock::{fnv1a, mix};
use cfaudit::gateway::provider::FnProvider;
use cfaudit::gateway::{CoachingKind, Gateway, GenerationParams, ModelSpec, PromptMode};

fn main() -> anyhow::Result<()> {
    let cache_dir = tempfile::tempdir()?;
    let calls = Arc::new(AtomicUsize::new(0));
    let call_counter = Arc::clone(&calls);

    // A counting deterministic judge, to make cache hits visible.
    let judge = FnProvider(move |prompt: &str, _: &GenerationParams| {
        call_counter.fetch_add(1, Ordering::SeqCst);
        let hash = mix(fnv1a(prompt));
        if prompt.contains("Hence, the final answer is:") {
            let answer = if hash.is_multiple_of(2) { "Yes" } else { "No" };
            Ok(format!(
                "Evidences:\n- observed behavior\n\nSynthesis:\nbrief rationale.\n\nConfidence: {}\n\nHence, the final answer is: {answer}",
                55 + (hash >> 8) % 46
            ))
        } else {
            Ok(format!(
                "{{\"analysis\": \"- Strength 1: clear, steady pacing\", \"score\": {}}}",
                20 + (hash >> 16) % 81
            ))
        }
    });

    let gateway = Gateway::builder()
        .provider("mock", Arc::new(judge))
        .cache_dir(cache_dir.path())
        .build()?;
    let model = ModelSpec::new("demo-judge", "mock");
    let transcript = fixtures::sample_transcript(1, 7);
    let questions = fixtures::sample_questions();

    for question in questions.iter().take(3) {
        let qa = gateway.evaluate_qa(&transcript, question, &model, PromptMode::Standard)?;
        println!(
            "{:12} -> {} (confidence {})",
            question.question_id, qa.judgment, qa.confidence
        );
    }
    let positives = gateway.coach(&transcript, &model, CoachingKind::Positives, PromptMode::Standard)?;
    let improvements =
        gateway.coach(&transcript, &model, CoachingKind::Improvements, PromptMode::Standard)?;
    println!("positives score {}, improvements score {}", positives.score, improvements.score);
    let after_first_pass = calls.load(Ordering::SeqCst);

    // Asking everything again is served entirely from the cache.
    for question in questions.iter().take(3) {
        gateway.evaluate_qa(&transcript, question, &model, PromptMode::Standard)?;
    }
    gateway.coach(&transcript, &model, CoachingKind::Positives, PromptMode::Standard)?;
    println!(
        "provider calls: {after_first_pass} on the first pass, {} after the cached rerun",
        calls.load(Ordering::SeqCst)
    );

    // The fairness prompt mode is a distinct cache key even for the same body.
    let fairness = gateway.evaluate_qa(&transcript, &questions[0], &model, PromptMode::Fairness)?;
    println!(
        "fairness-mode judgment for {}: {} (new provider call: {})",
        questions[0].question_id,
        fairness.judgment,
        calls.load(Ordering::SeqCst) > after_first_pass
    );
    Ok(())
}
