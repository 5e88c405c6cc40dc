//! Upper confidence bounds on observed proportions, and the scores built
//! from them.

use cg_induce::corpus::{parse_corpus, Feature};
use cg_induce::stats::{
    collect_stats, feature_rarity_score, local_score, upper_bound, Direction, StatConfig,
};

fn main() -> anyhow::Result<()> {
    let cfg = StatConfig::default();
    println!("{:>10} {:>8} {:>10}", "successes", "trials", "bound");
    for (s, n) in [
        (0, 10),
        (0, 100),
        (0, 1000),
        (5, 100),
        (50, 100),
        (99, 100),
        (100, 100),
    ] {
        println!("{s:>10} {n:>8} {:>10.6}", upper_bound(s, n, &cfg)?);
    }

    // 300 determiners, every one followed by a noun; verbs occur elsewhere
    let mut text = String::new();
    for _ in 0..300 {
        text.push_str(
            "\"<the>\"\n\t\"the\" DET @CORRECT\n\"<dog>\"\n\t\"dog\" N @CORRECT\n\t\"dog\" V\n",
        );
        text.push_str("\"<barks>\"\n\t\"bark\" V @CORRECT\n\t\"bark\" N\n\n");
    }
    let corpus = parse_corpus(&text, true)?;
    let table = collect_stats(&corpus)?;
    let (v, det) = (Feature::new("V")?, Feature::new("DET")?);
    let score = local_score(&v, &det, Direction::Left, &table, &cfg)?;
    println!(
        "\nREMOVE (V) (-1C (DET)) scores {:.6}",
        score.unwrap_or(f64::NAN)
    );
    let score = local_score(&v, &Feature::new("N")?, Direction::Left, &table, &cfg)?;
    println!(
        "REMOVE (V) (-1C (N))   scores {:.6}",
        score.unwrap_or(f64::NAN)
    );
    println!(
        "REMOVE (DET)           scores {:.6}",
        feature_rarity_score(&det, &table, &cfg)?.unwrap_or(f64::NAN)
    );
    Ok(())
}
