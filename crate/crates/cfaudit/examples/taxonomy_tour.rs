//! The fairness-dimension registry: 15 dimension-strategies, their
//! condition sets, pair counts, and deterministic pool sampling.
//!
//! ```bash
//! cargo run -p cfaudit --example taxonomy_tour
//! ```

use cfaudit::taxonomy::{dimensions, pairs, resolve_payload, AttributePools, Category};

fn main() -> anyhow::Result<()> {
    let registry = dimensions();
    let pools = AttributePools::builtin();
    pools.validate(&registry)?;

    for category in [Category::Identity, Category::Contextual, Category::Behavioral] {
        println!("{category:?}:");
        for dim in registry.iter().filter(|d| d.category == category) {
            let labels: Vec<&str> = dim.conditions.iter().map(|c| c.label.as_str()).collect();
            println!(
                "  {:28} {:20} {} conditions -> {} pairs  {{{}}}",
                dim.name.display_label(),
                format!("{:?}", dim.operation),
                dim.conditions.len(),
                pairs(dim).len(),
                labels.join(", ")
            );
        }
    }

    // Pool resolution is a pure function of (condition, pools, seed).
    let gender = registry.iter().find(|d| d.name.as_str() == "agent_gender").unwrap();
    let female = gender.condition("Female").unwrap();
    println!("\nseeded sampling from the Female name pool:");
    for seed in 0..4 {
        println!("  seed {seed} -> {:?}", resolve_payload(female, &pools, seed)?);
    }
    Ok(())
}
