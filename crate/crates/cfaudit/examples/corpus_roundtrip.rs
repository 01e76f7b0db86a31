//! Transcript formats and validation: write a small corpus, read it back,
//! and see how malformed records are rejected.
//!
//! ```bash
//! cargo run -p cfaudit --example corpus_roundtrip
//! ```

use cfaudit::corpus::{load_corpus, save_corpus, load_gold_labels};
use cfaudit::fixtures;

fn main() -> anyhow::Result<()> {
    let dir = tempfile::tempdir()?;

    // Three synthetic transcripts; every fixture passes full validation.
    let corpus = fixtures::sample_corpus(3, 42);
    let path = dir.path().join("corpus.jsonl");
    save_corpus(&corpus, &path)?;
    let loaded = load_corpus(&path)?;
    assert_eq!(loaded, corpus);
    println!("round-tripped {} transcripts through {}", loaded.len(), path.display());
    for transcript in &loaded {
        println!(
            "  {} [{}]: {} turns, first: {:?}",
            transcript.id,
            transcript.domain_tag.as_deref().unwrap_or("-"),
            transcript.turns.len(),
            transcript.turns[0].text
        );
    }

    // A record with a gap in its turn numbering is rejected at load time.
    let bad = dir.path().join("bad.jsonl");
    std::fs::write(
        &bad,
        r#"{"id":"broken","turns":[{"index":1,"speaker":"agent","text":"hi"},{"index":3,"speaker":"customer","text":"hello"}]}"#,
    )?;
    match load_corpus(&bad) {
        Err(err) => println!("\nmalformed corpus rejected as expected:\n  {err}"),
        Ok(_) => anyhow::bail!("expected the malformed record to be rejected"),
    }

    // Gold labels are case-folded on ingest.
    let gold = dir.path().join("gold.csv");
    std::fs::write(&gold, "transcript_id,question_id,answer\nt0001,q_greeting,YES\n")?;
    let labels = load_gold_labels(&gold)?;
    let label = &labels[&("t0001".to_string(), "q_greeting".to_string())];
    println!("\ngold label parsed: {} {} -> {}", label.transcript_id, label.question_id, label.answer);
    Ok(())
}
