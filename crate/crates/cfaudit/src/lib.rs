//! Counterfactual fairness auditing for LLM-based contact-center Auto-QA.
//!
//! The toolkit generates attribute-perturbed variants of agent-customer
//! transcripts, evaluates them through pluggable model providers, and
//! quantifies disparities with the Counterfactual Flip Rate (CFR) and the
//! Mean Absolute Score Difference (MASD), separated from stochastic noise
//! by a robustness baseline.
//!
//! Start with the runnable examples, one per capability:
//!
//! ```text
//! cargo run --example corpus_roundtrip      # transcript formats and validation
//! cargo run --example taxonomy_tour        # dimensions, condition pairs, pools
//! cargo run --example generate_variants    # counterfactual generation + semantic gate
//! cargo run --example evaluate_variants    # Auto-QA + coaching through the gateway
//! cargo run --example robustness_baseline  # repeat evaluation, noise floor
//! cargo run --example score_and_report     # CFR/MASD/accuracy + report rendering
//! cargo run --example fairness_prompting   # standard vs fairness prompt deltas
//! cargo run --example full_audit           # the four pipeline stages end to end
//! ```
//!
//! The same stages are reachable from the thin `cfaudit` binary:
//! `cfaudit generate | evaluate | baseline | score`.

pub mod audit;
pub mod corpus;
pub mod counterfactual;
pub mod fixtures;
pub mod gateway;
pub mod metrics;
pub mod report;
pub mod taxonomy;

pub use corpus::{Answer, GoldLabel, MetadataHeader, QaQuestion, Speaker, Transcript, Turn};
pub use gateway::{
    CoachingKind, CoachingResult, Gateway, GenerationParams, ModelSpec, PromptMode, QaResult,
};
pub use taxonomy::{AttributePools, Condition, ConditionPair, DimensionName, FairnessDimension};
