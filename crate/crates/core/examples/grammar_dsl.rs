//! Read, inspect and rewrite a stratified grammar.

use cg_induce::corpus::feature_implications;
use cg_induce::corpus::parse_corpus;
use cg_induce::grammar::{parse_grammar, serialize_grammar};

const GRAMMAR: &str = "\
LIST DETPREP = DET PREP ;
REMOVE (V) (-1C DETPREP) ; # score=0.004
REMOVE (VFIN) (-1C (DET)) ; # score=0.006
SECTION
REMOVE (V) (*-1C (DET) BARRIER (N NUM)) ; # score=0.03
REMOVE (V) (0 (\"<table>\")) ; # score=0.05
REMOVE (SUBJUNCTIVE) ; # score=0.11
";

fn main() -> anyhow::Result<()> {
    let g = parse_grammar(GRAMMAR)?;
    for (level, rule) in g.rules() {
        println!("level {level}  {:<9} {rule}", rule.kind().name());
    }

    let imp = feature_implications(&parse_corpus(
        "\"<x>\"\n\t\"x\" V VFIN PRES @CORRECT\n\t\"x\" V INF\n",
        true,
    )?);
    let rules: Vec<_> = g.rules().map(|(_, r)| r).collect();
    println!(
        "\n`{}` subsumes `{}`: {}",
        rules[0],
        rules[1],
        rules[0].subsumes(rules[1], &imp)
    );

    let text = serialize_grammar(&g);
    assert_eq!(parse_grammar(&text)?, g);
    println!("\n{text}");
    Ok(())
}
