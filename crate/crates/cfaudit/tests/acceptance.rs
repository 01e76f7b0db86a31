//! Acceptance suite: one test per release criterion, each printing a
//! PASS line (run with `--nocapture` to see them). Criteria 3, 4 and 8
//! share a single seeded mock pipeline run.
//!
//! Regenerate the golden report directory after intentional changes with:
//! `CFAUDIT_UPDATE_GOLDEN=1 cargo test -p cfaudit --test acceptance`.

mod common;

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::sync::OnceLock;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use cfaudit::audit::{cmd_baseline, cmd_evaluate, cmd_generate, cmd_score, AuditConfig};
use cfaudit::corpus::{load_corpus, Answer};
use cfaudit::counterfactual::{
    generate_dimension_variants, load_variant_store, GenerationConfig, GenerationModels,
    RejectionStats, ValidationStatus,
};
use cfaudit::gateway::mock::{JudgmentPolicy, MockEvaluator};
use cfaudit::gateway::parse::{
    parse_coaching_reply, parse_qa_reply, parse_verdict, ParseErrorKind, Verdict,
};
use cfaudit::gateway::provider::{Provider, ScriptedProvider};
use cfaudit::gateway::{GenerationParams, Gateway, ModelSpec, PromptMode};
use cfaudit::metrics::{cfr, masd, EvaluationRecord, ScoreField};
use cfaudit::report::ScoreDocument;
use cfaudit::taxonomy::{dimension, dimensions, pairs, AttributePools, ConditionPair, DimensionName};

use common::{file_listing, setup_workspace};

// ---------------------------------------------------------------------
// Shared seeded mock pipeline run (used by criteria 3, 4 and 8).
// ---------------------------------------------------------------------

struct SharedRun {
    _dir: tempfile::TempDir,
    config: AuditConfig,
    score: ScoreDocument,
    elapsed: Duration,
}

fn shared_run() -> &'static SharedRun {
    static RUN: OnceLock<SharedRun> = OnceLock::new();
    RUN.get_or_init(|| {
        let dir = tempfile::tempdir().unwrap();
        let config = setup_workspace(dir.path(), &["judge-null", "judge-hash"]);
        let start = Instant::now();
        cmd_generate(&config).unwrap();
        cmd_evaluate(&config).unwrap();
        let mut fairness = config.clone();
        fairness.prompt_mode = PromptMode::Fairness;
        cmd_evaluate(&fairness).unwrap();
        cmd_baseline(&config).unwrap();
        let outcome = cmd_score(&config).unwrap();
        let elapsed = start.elapsed();
        SharedRun {
            _dir: dir,
            config,
            score: outcome.document,
            elapsed,
        }
    })
}

// ---------------------------------------------------------------------
// Criterion 1: metric oracle equivalence.
// ---------------------------------------------------------------------

/// Independent brute-force oracle over a dense instance table:
/// instance -> condition -> optional (judgment, confidence, pos, imp).
type OracleCell = Option<(Answer, f64, Option<f64>, Option<f64>)>;

fn oracle_cfr(table: &[Vec<OracleCell>]) -> Option<f64> {
    let mut flips = 0usize;
    let mut counted = 0usize;
    for row in table {
        for c1 in 0..row.len() {
            for c2 in (c1 + 1)..row.len() {
                if let (Some(a), Some(b)) = (&row[c1], &row[c2]) {
                    counted += 1;
                    if a.0 != b.0 {
                        flips += 1;
                    }
                }
            }
        }
    }
    (counted > 0).then(|| 100.0 * flips as f64 / counted as f64)
}

fn oracle_masd(table: &[Vec<OracleCell>], select: impl Fn(&(Answer, f64, Option<f64>, Option<f64>)) -> Option<f64>) -> Option<f64> {
    let mut total = 0.0;
    let mut counted = 0usize;
    for row in table {
        for c1 in 0..row.len() {
            for c2 in (c1 + 1)..row.len() {
                if let (Some(a), Some(b)) = (&row[c1], &row[c2]) {
                    if let (Some(sa), Some(sb)) = (select(a), select(b)) {
                        counted += 1;
                        total += (sa - sb).abs();
                    }
                }
            }
        }
    }
    (counted > 0).then(|| total / counted as f64)
}

fn close(a: Option<f64>, b: Option<f64>) -> bool {
    match (a, b) {
        (None, None) => true,
        (Some(a), Some(b)) => (a - b).abs() < 1e-9,
        _ => false,
    }
}

#[test]
fn criterion_1_metric_oracle_equivalence() {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(101);
    for case in 0..200 {
        let n_conditions = rng.gen_range(2..=4usize);
        let n_transcripts = rng.gen_range(1..=20usize);
        let n_questions = rng.gen_range(1..=3usize);
        let condition_labels: Vec<String> = (0..n_conditions).map(|c| format!("c{c}")).collect();

        let mut table: Vec<Vec<OracleCell>> = Vec::new();
        let mut records: Vec<EvaluationRecord> = Vec::new();
        for t in 0..n_transcripts {
            for q in 0..n_questions {
                let mut row: Vec<OracleCell> = Vec::new();
                for label in condition_labels.iter().take(n_conditions) {
                    if rng.gen_bool(0.2) {
                        row.push(None); // availability gap
                        continue;
                    }
                    let judgment = if rng.gen_bool(0.5) { Answer::Yes } else { Answer::No };
                    let confidence: u8 = rng.gen_range(0..=100);
                    let positive: Option<u8> = rng.gen_bool(0.8).then(|| rng.gen_range(0..=100));
                    let improvement: Option<u8> = rng.gen_bool(0.8).then(|| rng.gen_range(0..=100));
                    row.push(Some((
                        judgment,
                        f64::from(confidence),
                        positive.map(f64::from),
                        improvement.map(f64::from),
                    )));
                    records.push(EvaluationRecord {
                        source_id: format!("t{t}"),
                        dimension: DimensionName::AgentGender,
                        condition: label.clone(),
                        question_id: format!("q{q}"),
                        model_id: "m".into(),
                        prompt_mode: PromptMode::Standard,
                        judgment,
                        confidence,
                        positive_score: positive,
                        improvement_score: improvement,
                    });
                }
                table.push(row);
            }
        }

        let pair_set: Vec<ConditionPair> = {
            let mut out = Vec::new();
            for i in 0..n_conditions {
                for j in (i + 1)..n_conditions {
                    out.push(ConditionPair::new(&condition_labels[i], &condition_labels[j]));
                }
            }
            out
        };
        let refs: Vec<&EvaluationRecord> = records.iter().collect();

        assert!(
            close(cfr(&refs, &pair_set).value, oracle_cfr(&table)),
            "case {case}: cfr mismatch"
        );
        assert!(
            close(
                masd(&refs, &pair_set, ScoreField::Confidence).value,
                oracle_masd(&table, |cell| Some(cell.1))
            ),
            "case {case}: masd confidence mismatch"
        );
        assert!(
            close(
                masd(&refs, &pair_set, ScoreField::Positive).value,
                oracle_masd(&table, |cell| cell.2)
            ),
            "case {case}: masd positive mismatch"
        );
        assert!(
            close(
                masd(&refs, &pair_set, ScoreField::Improvement).value,
                oracle_masd(&table, |cell| cell.3)
            ),
            "case {case}: masd improvement mismatch"
        );
    }
    let elapsed = start.elapsed();
    assert!(elapsed < Duration::from_secs(10), "took {elapsed:?}");
    println!(
        "[PASS] criterion 1: cfr/masd match the brute-force oracle to 1e-9 on 200 randomized instances ({elapsed:?})"
    );
}

// ---------------------------------------------------------------------
// Criterion 2: CFR convergence under a stochastic mock.
// ---------------------------------------------------------------------

#[test]
fn criterion_2_cfr_convergence() {
    let start = Instant::now();
    let params = GenerationParams::default();
    for p in [0.05f64, 0.10, 0.20] {
        let mock = MockEvaluator::new(JudgmentPolicy::stochastic(p, 0.0, 204));
        let mut records = Vec::new();
        for i in 0..500 {
            for condition in ["a", "b"] {
                // Distinct prompts per call; judgments flip independently.
                let prompt = format!(
                    "Question: q\nHence, the final answer is: pending\ninstance {i} condition {condition}"
                );
                let raw = mock.complete(&prompt, "m", &params).unwrap();
                let parsed = parse_qa_reply(&raw).unwrap();
                records.push(EvaluationRecord {
                    source_id: format!("t{i}"),
                    dimension: DimensionName::AgentGender,
                    condition: condition.into(),
                    question_id: "q".into(),
                    model_id: "m".into(),
                    prompt_mode: PromptMode::Standard,
                    judgment: parsed.judgment,
                    confidence: parsed.confidence,
                    positive_score: None,
                    improvement_score: None,
                });
            }
        }
        let refs: Vec<&EvaluationRecord> = records.iter().collect();
        let measured = cfr(&refs, &[ConditionPair::new("a", "b")]).value.unwrap();
        // Each judgment independently flips from the shared base with
        // probability p, so a pair disagrees with probability 2p(1-p).
        let expected = 100.0 * 2.0 * p * (1.0 - p);
        assert!(
            (measured - expected).abs() <= 2.0,
            "p={p}: measured {measured:.2}, expected {expected:.2}"
        );
    }
    let elapsed = start.elapsed();
    assert!(elapsed < Duration::from_secs(30), "took {elapsed:?}");
    println!(
        "[PASS] criterion 2: measured CFR within ±2.0 of 100·2p(1−p) for p ∈ {{0.05, 0.10, 0.20}} at 500 instances ({elapsed:?})"
    );
}

// ---------------------------------------------------------------------
// Criterion 3: zero-bias null test.
// ---------------------------------------------------------------------

#[test]
fn criterion_3_zero_bias_null_test() {
    let run = shared_run();
    let null_scores: Vec<_> = run
        .score
        .dimension_scores
        .iter()
        .filter(|s| s.model_id == "judge-null" && s.prompt_mode == PromptMode::Standard)
        .collect();
    assert_eq!(null_scores.len(), 15, "one score per dimension-strategy");
    for score in &null_scores {
        assert!(score.pairs_counted > 0, "{} had no pairs", score.dimension);
        assert_eq!(score.cfr_percent, Some(0.0), "{} CFR", score.dimension);
        assert_eq!(score.masd_confidence, Some(0.0), "{} conf", score.dimension);
        assert_eq!(score.masd_positive, Some(0.0), "{} pos", score.dimension);
        assert_eq!(score.masd_improvement, Some(0.0), "{} imp", score.dimension);
    }
    println!(
        "[PASS] criterion 3: condition-invariant evaluator scores CFR = 0.00 and MASD = 0.00 exactly across all 15 dimension-strategies"
    );
}

// ---------------------------------------------------------------------
// Criterion 4: robustness separation (biased but deterministic).
// ---------------------------------------------------------------------

#[test]
fn criterion_4_robustness_separation() {
    let run = shared_run();
    let baseline = run
        .score
        .robustness
        .iter()
        .find(|b| b.model_id == "judge-hash")
        .expect("baseline for judge-hash");
    assert_eq!(baseline.flip_rate_percent, Some(0.0));
    assert_eq!(baseline.masd_confidence, Some(0.0));

    let hash_scores: Vec<_> = run
        .score
        .dimension_scores
        .iter()
        .filter(|s| s.model_id == "judge-hash" && s.prompt_mode == PromptMode::Standard)
        .collect();
    let mean_cfr: f64 = hash_scores
        .iter()
        .filter_map(|s| s.cfr_percent)
        .sum::<f64>()
        / hash_scores.len() as f64;
    assert!(
        mean_cfr > 0.0,
        "condition-sensitive evaluator must show nonzero CFR, got {mean_cfr}"
    );
    println!(
        "[PASS] criterion 4: deterministic-but-biased evaluator has robustness 0.00 with CFR {mean_cfr:.2} (high unfairness, high consistency)"
    );
}

// ---------------------------------------------------------------------
// Criterion 5: generation invariants over the fixture corpus.
// ---------------------------------------------------------------------

#[test]
fn criterion_5_generation_invariants() {
    let run = shared_run();
    let corpus = load_corpus(&run.config.corpus).unwrap();
    assert!(corpus.len() >= 20);
    let by_id: BTreeMap<&str, _> = corpus.iter().map(|t| (t.id.as_str(), t)).collect();
    let variants = load_variant_store(&run.config.variant_store_path()).unwrap();
    assert!(!variants.is_empty());

    let mut metadata_checked = 0usize;
    let mut transform_checked = 0usize;
    for variant in &variants {
        assert!(variant.attempts <= 3, "retry bound violated");
        let source = by_id[variant.source_id.as_str()];
        let dim = dimension(variant.dimension);
        match dim.operation {
            cfaudit::taxonomy::GenerationOperation::MetadataAppending => {
                assert_eq!(
                    variant.transcript.turns, source.turns,
                    "metadata variant altered turns for {:?}",
                    variant.key()
                );
                assert!(variant.provenance.header.is_some());
                metadata_checked += 1;
            }
            cfaudit::taxonomy::GenerationOperation::TurnTransformation => {
                let edited: Vec<u32> =
                    variant.provenance.edits.iter().map(|e| e.index).collect();
                assert_eq!(variant.transcript.turns.len(), source.turns.len());
                for (source_turn, variant_turn) in
                    source.turns.iter().zip(&variant.transcript.turns)
                {
                    if edited.contains(&source_turn.index) {
                        continue;
                    }
                    assert_eq!(
                        source_turn.text, variant_turn.text,
                        "non-provenance turn {} differs for {:?}",
                        source_turn.index,
                        variant.key()
                    );
                }
                transform_checked += 1;
            }
            cfaudit::taxonomy::GenerationOperation::ContextInjection => {
                variant.transcript.validate().unwrap();
            }
        }
        if variant.validation == ValidationStatus::Accepted {
            assert_ne!(dim.operation, cfaudit::taxonomy::GenerationOperation::MetadataAppending);
        }
    }
    assert!(metadata_checked > 0 && transform_checked > 0);
    println!(
        "[PASS] criterion 5: {metadata_checked} metadata variants turn-byte-identical, {transform_checked} transformations differ only at provenance indices, attempts ≤ 3"
    );
}

// ---------------------------------------------------------------------
// Criterion 6: parser fixtures.
// ---------------------------------------------------------------------

#[test]
fn criterion_6_parser_fixtures() {
    let qa = |conf: &str, answer: &str| {
        format!(
            "To answer the given question, let's think step by step:\n\nEvidences:\n- e1\n\nSynthesis:\nbecause of e1.\n\nConfidence: {conf}\n\nHence, the final answer is: {answer}"
        )
    };
    // Well-formed Auto-QA replies: (raw, judgment, confidence).
    let qa_ok: Vec<(String, Answer, u8)> = vec![
        (qa("85", "Yes"), Answer::Yes, 85),
        (qa("60", "No"), Answer::No, 60),
        (qa("40", "No."), Answer::No, 40),
        (qa("99", "YES"), Answer::Yes, 99),
        (qa("12", "yes,"), Answer::Yes, 12),
        (qa("0", "No"), Answer::No, 0),
        (qa("100", "Yes"), Answer::Yes, 100),
        (qa("73", "Yes — the greeting is present"), Answer::Yes, 73),
        (
            "Synthesis:\nshort.\nConfidence:55\nHence, The Final Answer Is: no".to_string(),
            Answer::No,
            55,
        ),
        (
            format!("{} trailing chatter afterwards.", qa("64", "No")),
            Answer::No,
            64,
        ),
        (qa("7", "\"Yes\""), Answer::Yes, 7),
        (
            "Evidences:\n- a\n- b\n\nSynthesis:\nmixed evidence overall.\n\nConfidence: 50\n\nhence, the final answer is: yes".to_string(),
            Answer::Yes,
            50,
        ),
    ];
    // Well-formed coaching replies: (raw, score).
    let coaching_ok: Vec<(String, u8)> = vec![
        (r#"{"analysis": "- Maintained calm", "score": 88}"#.to_string(), 88),
        ("```json\n{\"analysis\": \"- clear steps\", \"score\": 70}\n```".to_string(), 70),
        ("```\n{\"analysis\": \"- ok\", \"score\": 55}\n```".to_string(), 55),
        (r#"{"analysis": "- none observed", "score": 0}"#.to_string(), 0),
        (r#"{"analysis": "- exemplary", "score": 100}"#.to_string(), 100),
        ("  {\n  \"analysis\": \"- spaced\",\n  \"score\": 42\n}  ".to_string(), 42),
        (
            "{\"analysis\": \"- Area 1: pacing\\n- Area 2: clarity\", \"score\": 64}".to_string(),
            64,
        ),
        (r#"{"analysis": "- tono calmado y claro", "score": 77}"#.to_string(), 77),
        ("Here is my evaluation: {\"analysis\": \"- prefixed prose\", \"score\": 31}".to_string(), 31),
        (r#"{"score": 59, "analysis": "- reversed key order"}"#.to_string(), 59),
    ];
    // Malformed replies and the exact typed error expected.
    let qa_bad: Vec<(String, ParseErrorKind)> = vec![
        (
            "Confidence: 85\nThe final answer would be yes".to_string(),
            ParseErrorKind::MissingSentinel,
        ),
        (
            "Confidence: 85\nHence, the final answer is: maybe so".to_string(),
            ParseErrorKind::MissingJudgment,
        ),
        (
            "Synthesis: x\nHence, the final answer is: Yes".to_string(),
            ParseErrorKind::MissingConfidence,
        ),
        (
            "Confidence: 104\nHence, the final answer is: Yes".to_string(),
            ParseErrorKind::ConfidenceOutOfRange(104),
        ),
    ];
    let coaching_bad: Vec<(String, ParseErrorKind)> = vec![
        (
            r#"{"analysis": "- fine", "score": 104}"#.to_string(),
            ParseErrorKind::ScoreOutOfRange(104),
        ),
        (
            r#"{"score": 50}"#.to_string(),
            ParseErrorKind::MissingField("analysis"),
        ),
        (
            r#"{"analysis": "- fine"}"#.to_string(),
            ParseErrorKind::MissingField("score"),
        ),
        ("score: 88, analysis: none".to_string(), ParseErrorKind::MalformedJson(String::new())),
    ];
    let verdict_ok = [("EQUIVALENT.", Verdict::Equivalent), ("different", Verdict::NotEquivalent)];

    let total = qa_ok.len() + coaching_ok.len() + qa_bad.len() + coaching_bad.len() + verdict_ok.len();
    assert!(total >= 30, "need 30+ fixtures, have {total}");
    assert!(qa_bad.len() + coaching_bad.len() >= 8);

    for (raw, judgment, confidence) in &qa_ok {
        let parsed = parse_qa_reply(raw).unwrap_or_else(|e| panic!("fixture {raw:?}: {e}"));
        assert_eq!(parsed.judgment, *judgment, "{raw:?}");
        assert_eq!(parsed.confidence, *confidence, "{raw:?}");
    }
    for (raw, score) in &coaching_ok {
        let parsed = parse_coaching_reply(raw).unwrap_or_else(|e| panic!("fixture {raw:?}: {e}"));
        assert_eq!(parsed.score, *score, "{raw:?}");
    }
    for (raw, expected) in &qa_bad {
        let err = parse_qa_reply(raw).unwrap_err();
        assert_eq!(
            std::mem::discriminant(&err.kind),
            std::mem::discriminant(expected),
            "{raw:?} -> {:?}",
            err.kind
        );
        assert_eq!(err.raw, *raw, "raw text must ride along");
    }
    for (raw, expected) in &coaching_bad {
        let err = parse_coaching_reply(raw).unwrap_err();
        assert_eq!(
            std::mem::discriminant(&err.kind),
            std::mem::discriminant(expected),
            "{raw:?} -> {:?}",
            err.kind
        );
    }
    for (raw, expected) in &verdict_ok {
        assert_eq!(parse_verdict(raw).unwrap(), *expected);
    }
    println!("[PASS] criterion 6: {total} reply fixtures parse to the exact expected result or typed error");
}

// ---------------------------------------------------------------------
// Criterion 7: pair-count law for the shipped taxonomy.
// ---------------------------------------------------------------------

#[test]
fn criterion_7_pair_count_law() {
    let expected: BTreeMap<DimensionName, usize> = [
        (DimensionName::AgentGender, 1),
        (DimensionName::AgentEthnicityName, 15),
        (DimensionName::AgentEthnicityCues, 15),
        (DimensionName::AgentReligionName, 10),
        (DimensionName::AgentReligionCues, 10),
        (DimensionName::AgentDisability, 1),
        (DimensionName::PastPerformance, 10),
        (DimensionName::AgentProfile, 6),
        (DimensionName::CustomerProfile, 6),
        (DimensionName::ContextualMetadata, 3),
        (DimensionName::CoachingNotesPriming, 10),
        (DimensionName::CommunicativeStyle, 3),
        (DimensionName::Politeness, 3),
        (DimensionName::Formality, 3),
        (DimensionName::EmotionalLabor, 3),
    ]
    .into_iter()
    .collect();
    let registry = dimensions();
    assert_eq!(registry.len(), expected.len());
    for dim in &registry {
        let n = dim.conditions.len();
        let got = pairs(dim).len();
        assert_eq!(got, expected[&dim.name], "dimension {}", dim.name);
        assert_eq!(got, n * (n - 1) / 2, "C(n,2) law for {}", dim.name);
    }
    println!("[PASS] criterion 7: pairs(d) sizes match the attribute sets and C(|C_d|,2) for all 15 dimension-strategies");
}

// ---------------------------------------------------------------------
// Criterion 8: golden end-to-end report directory.
// ---------------------------------------------------------------------

fn golden_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/golden/report")
}

#[test]
fn criterion_8_golden_end_to_end() {
    let run = shared_run();
    assert!(
        run.elapsed < Duration::from_secs(60),
        "pipeline took {:?}",
        run.elapsed
    );
    let produced_dir = run.config.report_dir();
    let golden = golden_dir();

    if std::env::var("CFAUDIT_UPDATE_GOLDEN").is_ok() {
        if golden.exists() {
            std::fs::remove_dir_all(&golden).unwrap();
        }
        std::fs::create_dir_all(&golden).unwrap();
        for rel in file_listing(&produced_dir) {
            let target = golden.join(&rel);
            std::fs::create_dir_all(target.parent().unwrap()).unwrap();
            std::fs::copy(produced_dir.join(&rel), target).unwrap();
        }
        println!("[PASS] criterion 8: golden directory refreshed at {}", golden.display());
        return;
    }

    assert!(
        golden.exists(),
        "golden directory missing; run with CFAUDIT_UPDATE_GOLDEN=1 once"
    );
    let produced = file_listing(&produced_dir);
    let expected = file_listing(&golden);
    assert_eq!(produced, expected, "report file sets differ");
    // The Table-1-shaped CSV and the delta CSV must be among them.
    assert!(produced.iter().any(|p| p.ends_with("cfr.csv")));
    assert!(produced.iter().any(|p| p.ends_with("prompting_delta.csv")));
    for rel in &expected {
        let got = std::fs::read(produced_dir.join(rel)).unwrap();
        let want = std::fs::read(golden.join(rel)).unwrap();
        assert_eq!(got, want, "byte mismatch in {}", rel.display());
    }
    println!(
        "[PASS] criterion 8: report directory byte-identical to committed goldens ({} files, pipeline {:?})",
        expected.len(),
        run.elapsed
    );
}

// ---------------------------------------------------------------------
// Criterion 9: rejection accounting with scripted validators.
// ---------------------------------------------------------------------

fn scripted_generation(dim_name: DimensionName, verdicts: Vec<&str>) -> RejectionStats {
    let gateway = Gateway::builder()
        .provider("gen", std::sync::Arc::new(MockEvaluator::by_prompt()))
        .provider("val", std::sync::Arc::new(ScriptedProvider::new(verdicts)))
        .build()
        .unwrap();
    let models = GenerationModels {
        identifier: ModelSpec::new("identifier", "gen"),
        generator: ModelSpec::new("generator", "gen"),
        validator: ModelSpec::new("validator", "val"),
    };
    let transcript = cfaudit::fixtures::sample_transcript(0, 7);
    let outcome = generate_dimension_variants(
        &transcript,
        &dimension(dim_name),
        &gateway,
        &models,
        &AttributePools::builtin(),
        &GenerationConfig::default(),
    )
    .unwrap();
    outcome.stats
}

#[test]
fn criterion_9_rejection_accounting() {
    // Gender (2 conditions), first condition rejected once then accepted:
    // generated 3, rejected 1 -> rate 1/3.
    let stats = scripted_generation(
        DimensionName::AgentGender,
        vec!["DIFFERENT", "EQUIVALENT", "EQUIVALENT"],
    );
    let counts = stats.per_dimension["agent_gender"];
    assert_eq!(
        (counts.generated, counts.llm_rejected, counts.accepted),
        (3, 1, 2)
    );
    assert!((counts.rejection_rate_percent().unwrap() - 100.0 / 3.0).abs() < 1e-9);

    // Both conditions exhausted: generated 6, rejected 6 -> rate 100%.
    let stats = scripted_generation(DimensionName::AgentGender, vec!["DIFFERENT"; 6]);
    let counts = stats.per_dimension["agent_gender"];
    assert_eq!(
        (counts.generated, counts.llm_rejected, counts.accepted),
        (6, 6, 0)
    );
    assert_eq!(counts.rejection_rate_percent(), Some(100.0));

    // Religion name swaps all accepted first try: rate 0%.
    let stats = scripted_generation(DimensionName::AgentReligionName, vec!["EQUIVALENT"; 5]);
    let counts = stats.per_dimension["agent_religion_name"];
    assert_eq!(
        (counts.generated, counts.llm_rejected, counts.accepted),
        (5, 0, 5)
    );
    assert_eq!(counts.rejection_rate_percent(), Some(0.0));

    // Mixed pattern over religion (5 conditions): c1 accepted, c2 rejected
    // twice then accepted, c3 exhausted (3 rejections), c4 accepted,
    // c5 rejected once then accepted.
    // generated = 1 + 3 + 3 + 1 + 2 = 10, rejected = 0+2+3+0+1 = 6.
    let stats = scripted_generation(
        DimensionName::AgentReligionName,
        vec![
            "EQUIVALENT", "DIFFERENT", "DIFFERENT", "EQUIVALENT", "DIFFERENT", "DIFFERENT",
            "DIFFERENT", "EQUIVALENT", "DIFFERENT", "EQUIVALENT",
        ],
    );
    let counts = stats.per_dimension["agent_religion_name"];
    assert_eq!(
        (counts.generated, counts.llm_rejected, counts.accepted),
        (10, 6, 4)
    );
    assert!((counts.rejection_rate_percent().unwrap() - 60.0).abs() < 1e-9);
    assert_eq!(counts.generated, counts.llm_rejected + counts.accepted);

    println!("[PASS] criterion 9: scripted validator sequences reproduce hand-computed rejected/generated rates");
}
