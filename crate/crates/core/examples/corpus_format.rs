//! Parse a gold-marked cohort, print its readings and the feature
//! implications it supports, then write it back out.

use cg_induce::corpus::{feature_implications, parse_corpus, serialize_corpus};

const TEXT: &str = "\"<the>\"
\t\"the\" DET @CORRECT
\"<campaign>\"
\t\"campaign\" <SV> <P/for> V SUBJUNCTIVE VFIN
\t\"campaign\" <SV> <P/for> V IMP VFIN
\t\"campaign\" <SV> <P/for> V INF
\t\"campaign\" <SV> <P/for> V PRES -SG3 VFIN
\t\"campaign\" N NOM SG @CORRECT
";

fn main() -> anyhow::Result<()> {
    let corpus = parse_corpus(TEXT, true)?;
    println!(
        "{} words, {} readings, {} correct",
        corpus.word_count(),
        corpus.reading_count(),
        corpus.gold_count()
    );
    for cohort in corpus.cohorts() {
        println!("{}", cohort.form());
        for r in cohort.readings() {
            let tags: Vec<_> = r.features().iter().map(|f| f.as_str()).collect();
            println!(
                "  {} {}{}",
                r.base(),
                tags.join(" "),
                if r.is_gold() { "  <- correct" } else { "" }
            );
        }
    }

    println!("\nimplications (a => b):");
    for (a, b) in feature_implications(&corpus)
        .pairs()
        .filter(|(a, b)| a != b)
    {
        println!("  {a} => {b}");
    }

    println!(
        "\nwithout gold markers:\n{}",
        serialize_corpus(&corpus.without_gold(), false)
    );
    Ok(())
}
