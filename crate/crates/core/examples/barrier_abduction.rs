//! Abduce the smallest barrier set separating determiners from later verbs.

use std::collections::BTreeSet;

use cg_induce::abduce::{brute_force_hitting_set, minimal_hitting_set, CandidateSets};
use cg_induce::corpus::{parse_corpus, Feature};
use cg_induce::induce::collect_barrier_candidates;
use cg_induce::stats::Direction;

fn set(tags: &[&str]) -> BTreeSet<Feature> {
    tags.iter().map(|t| Feature::new(*t).unwrap()).collect()
}

fn show(set: &BTreeSet<Feature>) -> String {
    let tags: Vec<_> = set.iter().map(|f| f.as_str()).collect();
    format!("({})", tags.join(" "))
}

fn main() -> anyhow::Result<()> {
    let direct = CandidateSets::new(vec![
        set(&["ADJ", "N", "PCP2"]),
        set(&["NUM"]),
        set(&["N", "ADV"]),
    ])?;
    let found = minimal_hitting_set(&direct)?;
    let sets: Vec<_> = direct.sets().iter().map(show).collect();
    println!("candidate sets: {}", sets.join(" "));
    println!("barrier: {} (cost {})", show(&found.barrier), found.cost);
    println!("brute force: {}", show(&brute_force_hitting_set(&direct)?));

    // the same sets, collected from gold text
    let mut text = String::new();
    for sentence in [
        &["DET", "ADJ", "N PCP2", "V"][..],
        &["DET", "NUM", "V"],
        &["DET", "N", "ADV", "V"],
    ] {
        for (i, tags) in sentence.iter().enumerate() {
            text.push_str(&format!("\"<w{i}>\"\n\t\"w\" {tags} @CORRECT\n"));
        }
        text.push('\n');
    }
    let corpus = parse_corpus(&text, true)?;
    let collected = collect_barrier_candidates(
        &corpus,
        &Feature::new("V")?,
        &Feature::new("DET")?,
        Direction::Left,
    );
    let sets: Vec<_> = collected.sets().iter().map(show).collect();
    println!("\nfrom text: {}", sets.join(" "));
    println!(
        "REMOVE (V) (*-1C (DET) BARRIER {})",
        show(&minimal_hitting_set(&collected)?.barrier)
    );
    Ok(())
}
