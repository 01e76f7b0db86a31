//! From evaluation records to rendered tables: CFR, MASD, aggregation, and
//! the CSV/markdown renderers.
//!
//! ```bash
//! cargo run -p cfaudit --example score_and_report
//! ```

use cfaudit::corpus::Answer;
use cfaudit::gateway::PromptMode;
use cfaudit::metrics::{aggregate, cfr, dimension_score, masd, EvaluationRecord, ScoreField};
use cfaudit::report::{render_csv, MetricKind, ReportTable};
use cfaudit::taxonomy::{dimension, pairs, DimensionName};

fn record(
    source: &str,
    condition: &str,
    judgment: Answer,
    confidence: u8,
) -> EvaluationRecord {
    EvaluationRecord {
        source_id: source.into(),
        dimension: DimensionName::AgentGender,
        condition: condition.into(),
        question_id: "q_greeting".into(),
        model_id: "demo-judge".into(),
        prompt_mode: PromptMode::Standard,
        judgment,
        confidence,
        positive_score: Some(confidence / 2 + 25),
        improvement_score: Some(confidence / 3 + 40),
    }
}

fn main() -> anyhow::Result<()> {
    // Hand-written records for the gender dimension: one transcript flips
    // its judgment between Male and Female, one does not.
    let records = [
        record("t1", "Male", Answer::Yes, 80),
        record("t1", "Female", Answer::No, 70),
        record("t2", "Male", Answer::Yes, 90),
        record("t2", "Female", Answer::Yes, 84),
    ];
    let refs: Vec<&EvaluationRecord> = records.iter().collect();
    let dim = dimension(DimensionName::AgentGender);
    let pair_set = pairs(&dim);

    let flip_rate = cfr(&refs, &pair_set);
    let confidence_shift = masd(&refs, &pair_set, ScoreField::Confidence);
    println!(
        "CFR {:.2}% over {} pairs; confidence MASD {:.2} points",
        flip_rate.value.unwrap(),
        flip_rate.pairs_counted,
        confidence_shift.value.unwrap()
    );

    let score = dimension_score(&refs, dim.name, "demo-judge", PromptMode::Standard, &pair_set);
    println!(
        "dimension score: cfr {:?} masd(conf/pos/imp) {:?}/{:?}/{:?}, n_effective {}",
        score.cfr_percent,
        score.masd_confidence,
        score.masd_positive,
        score.masd_improvement,
        score.n_effective
    );

    let agg = aggregate(std::slice::from_ref(&score));
    println!("per-model average CFR: {:?}", agg.per_model["demo-judge"].cfr_percent);

    let table = ReportTable::from_dimension_scores(
        MetricKind::Cfr,
        std::slice::from_ref(&score),
        &[DimensionName::AgentGender],
        &["demo-judge".to_string()],
    );
    println!("\ncfr.csv:\n{}", render_csv(&table));
    Ok(())
}
