//! Apply a two-level grammar with tracing, and show that a lone reading
//! always survives.

use cg_induce::corpus::{parse_corpus, serialize_corpus};
use cg_induce::engine::{disambiguate, disambiguate_traced, EngineConfig};
use cg_induce::grammar::parse_grammar;

const TEXT: &str = "\"<the>\"
\t\"the\" DET
\"<campaign>\"
\t\"campaign\" V INF
\t\"campaign\" V PRES VFIN
\t\"campaign\" N NOM SG
\"<started>\"
\t\"start\" V PAST VFIN
\t\"start\" PCP2

\"<the>\"
\t\"the\" DET
\"<run>\"
\t\"run\" V INF
";

const GRAMMAR: &str = "\
REMOVE (V) (-1C (DET)) ; # score=0.01
SECTION
REMOVE (PCP2) (*-1C (DET) BARRIER (V PCP2)) ; # score=0.1
";

fn main() -> anyhow::Result<()> {
    let corpus = parse_corpus(TEXT, false)?;
    let grammar = parse_grammar(GRAMMAR)?;

    for max_level in [1, 2] {
        let cfg = EngineConfig {
            max_level: Some(max_level),
            ..Default::default()
        };
        let out = disambiguate(&corpus, &grammar, &cfg);
        println!(
            "levels 1..={max_level}: {} readings left",
            out.reading_count()
        );
    }

    let cfg = EngineConfig {
        trace: true,
        ..Default::default()
    };
    let (out, trace) = disambiguate_traced(&corpus, &grammar, &cfg);
    println!("\nsentence\tcohort\tlevel\tremoved\trule");
    for event in &trace {
        println!("{event}");
    }
    println!("\n{}", serialize_corpus(&out, false));
    Ok(())
}
