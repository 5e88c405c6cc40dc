//! Recall, precision and ambiguity with confidence half-widths, from raw
//! tallies and from a pair of corpora.

use cg_induce::corpus::parse_corpus;
use cg_induce::eval::{evaluate, Metrics};

fn main() -> anyhow::Result<()> {
    // 9795 words, one correct reading each, 17683 readings before rules ran
    let m = Metrics::from_counts(9795, 9795, 17683, 6664, 175);
    println!("{m}\n");

    let gold = parse_corpus(
        "\"<the>\"\n\t\"the\" DET @CORRECT\n\t\"the\" ADV\n\"<run>\"\n\t\"run\" N @CORRECT\n\t\"run\" V INF\n",
        true,
    )?;
    let output = parse_corpus(
        "\"<the>\"\n\t\"the\" DET\n\"<run>\"\n\t\"run\" N\n\t\"run\" V INF\n",
        false,
    )?;
    let m = evaluate(&gold, &output)?;
    print!("{}", m.key_values());
    println!("{}", m.to_json());
    Ok(())
}
