//! Induce a grammar on a synthetic 10 000-word gold corpus and evaluate it
//! on 2 000 held-out words.
//!
//! cargo run --release --example synthetic_experiment -- [seed]

use std::time::Instant;

use cg_induce::engine::{disambiguate, EngineConfig};
use cg_induce::eval::evaluate;
use cg_induce::induce::{induce, InduceConfig};
use cg_induce::synth::{train_test_split, SynthConfig};

fn main() -> anyhow::Result<()> {
    let seed = std::env::args()
        .nth(1)
        .map(|s| s.parse())
        .transpose()?
        .unwrap_or(2024);
    let start = Instant::now();
    let (train, test) = train_test_split(seed, SynthConfig::default(), 10_000, 2_000);
    let induction = induce(&train, &InduceConfig::default())?;
    let g = &induction.grammar;
    println!("rules by kind:");
    for (kind, n) in g.count_by_kind() {
        println!(
            "  {:<10}{n:>5}  (of {} candidates)",
            kind.name(),
            induction.candidates[&kind]
        );
    }

    let output = disambiguate(&test.without_gold(), g, &EngineConfig::default());
    let metrics = evaluate(&test, &output)?;
    let baseline = test.gold_count() as f64 / test.reading_count() as f64;
    println!("\nheld-out evaluation:\n{metrics}");
    println!("baseline precision {:.2} %", 100.0 * baseline);
    println!("elapsed {:.2?}", start.elapsed());
    Ok(())
}
