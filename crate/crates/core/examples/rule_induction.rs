//! Induce a grammar from a synthetic gold corpus and show the most reliable
//! rule of each kind.
//!
//! cargo run --example rule_induction -- [words]

use cg_induce::grammar::RuleKind;
use cg_induce::induce::{induce, InduceConfig};
use cg_induce::synth::{Generator, SynthConfig};

fn main() -> anyhow::Result<()> {
    let words = std::env::args()
        .nth(1)
        .map(|s| s.parse())
        .transpose()?
        .unwrap_or(10_000);
    let corpus = Generator::new(11, SynthConfig::default()).gold_corpus(words);
    let cfg = InduceConfig::default();
    println!("thresholds: {:.5?}", cfg.level_thresholds);
    let induction = induce(&corpus, &cfg)?;
    let g = &induction.grammar;
    println!("{} rules over {} levels", g.rule_count(), g.level_count());
    for kind in RuleKind::ALL {
        let best = g
            .rules()
            .filter(|(_, r)| r.kind() == kind)
            .min_by(|a, b| a.1.ordering(b.1));
        match best {
            Some((level, rule)) => println!(
                "{:<9} level {level:>2}  {rule}  score={:.5}",
                kind.name(),
                rule.score
            ),
            None => println!("{:<9} none", kind.name()),
        }
    }
    Ok(())
}
