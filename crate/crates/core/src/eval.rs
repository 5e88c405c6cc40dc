//! Recall, precision and remaining ambiguity of a disambiguated corpus.

use std::fmt::{self, Write as _};

use serde::Serialize;
use thiserror::Error;

use crate::corpus::Corpus;

/// Normal quantile for the 95 % confidence half-widths.
pub const Z_95: f64 = 1.96;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum EvalError {
    #[error("word {word}: reference has {expected}, output has {found}")]
    FormMismatch {
        word: usize,
        expected: String,
        found: String,
    },
    #[error(
        "reference has {reference} words, output has {output}; first unmatched word is {word}"
    )]
    LengthMismatch {
        word: usize,
        reference: usize,
        output: usize,
    },
    #[error("word {word}: output reading `{reading}` is not in the reference cohort")]
    ForeignReading { word: usize, reading: String },
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Metrics {
    pub words: u64,
    pub gold_total: u64,
    pub retained: u64,
    pub retained_gold: u64,
    pub removed: u64,
    pub removed_gold: u64,
    pub recall: f64,
    pub precision: f64,
    pub readings_per_word: f64,
    pub recall_ci: f64,
    pub precision_ci: f64,
}

fn ratio(num: u64, den: u64) -> f64 {
    if den == 0 {
        0.0
    } else {
        num as f64 / den as f64
    }
}

fn half_width(p: f64, n: u64) -> f64 {
    if n == 0 {
        0.0
    } else {
        Z_95 * (p * (1.0 - p) / n as f64).sqrt()
    }
}

impl Metrics {
    /// Derives every ratio from raw tallies. Both half-widths use the word
    /// count as sample size.
    pub fn from_counts(
        words: u64,
        gold_total: u64,
        initial: u64,
        removed: u64,
        removed_gold: u64,
    ) -> Self {
        let retained = initial - removed;
        let retained_gold = gold_total - removed_gold;
        let recall = ratio(retained_gold, gold_total);
        let precision = ratio(retained_gold, retained);
        Metrics {
            words,
            gold_total,
            retained,
            retained_gold,
            removed,
            removed_gold,
            recall,
            precision,
            readings_per_word: ratio(retained, words),
            recall_ci: half_width(recall, words),
            precision_ci: half_width(precision, words),
        }
    }

    pub fn initial(&self) -> u64 {
        self.retained + self.removed
    }

    /// `key=value` lines, one per field.
    pub fn key_values(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "words={}", self.words);
        let _ = writeln!(out, "gold_total={}", self.gold_total);
        let _ = writeln!(out, "retained={}", self.retained);
        let _ = writeln!(out, "retained_gold={}", self.retained_gold);
        let _ = writeln!(out, "removed={}", self.removed);
        let _ = writeln!(out, "removed_gold={}", self.removed_gold);
        let _ = writeln!(out, "recall={}", self.recall);
        let _ = writeln!(out, "precision={}", self.precision);
        let _ = writeln!(out, "readings_per_word={}", self.readings_per_word);
        let _ = writeln!(out, "recall_ci={}", self.recall_ci);
        let _ = writeln!(out, "precision_ci={}", self.precision_ci);
        out
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("metrics serialize")
    }
}

impl fmt::Display for Metrics {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "words              {}", self.words)?;
        writeln!(
            f,
            "readings           {} ({} correct)",
            self.initial(),
            self.gold_total
        )?;
        writeln!(
            f,
            "removed            {} ({} correct)",
            self.removed, self.removed_gold
        )?;
        writeln!(
            f,
            "recall             {:.2} % ± {:.2}",
            100.0 * self.recall,
            100.0 * self.recall_ci
        )?;
        writeln!(
            f,
            "precision          {:.2} % ± {:.2}",
            100.0 * self.precision,
            100.0 * self.precision_ci
        )?;
        write!(f, "readings per word  {:.4}", self.readings_per_word)
    }
}

/// Compares `output` with the gold-marked `reference` it was produced from.
/// Cohorts are aligned in order across sentence breaks; readings match on
/// base form and features.
pub fn evaluate(reference: &Corpus, output: &Corpus) -> Result<Metrics, EvalError> {
    let words = reference.word_count();
    if words != output.word_count() {
        let word = reference
            .cohorts()
            .zip(output.cohorts())
            .position(|(a, b)| !a.form().matches(b.form()))
            .unwrap_or(words.min(output.word_count()))
            + 1;
        return Err(EvalError::LengthMismatch {
            word,
            reference: words,
            output: output.word_count(),
        });
    }
    let (mut gold_total, mut initial, mut retained, mut retained_gold) = (0u64, 0u64, 0u64, 0u64);
    for (idx, (refc, outc)) in reference.cohorts().zip(output.cohorts()).enumerate() {
        if refc.form() != outc.form() {
            return Err(EvalError::FormMismatch {
                word: idx + 1,
                expected: refc.form().to_string(),
                found: outc.form().to_string(),
            });
        }
        initial += refc.readings().len() as u64;
        gold_total += refc.readings().iter().filter(|r| r.is_gold()).count() as u64;
        for r in outc.readings() {
            let source = refc
                .readings()
                .iter()
                .find(|g| g.same_analysis(r))
                .ok_or_else(|| EvalError::ForeignReading {
                    word: idx + 1,
                    reading: format!(
                        "{} {}",
                        r.base(),
                        r.features()
                            .iter()
                            .map(|f| f.as_str())
                            .collect::<Vec<_>>()
                            .join(" ")
                    ),
                })?;
            retained += 1;
            if source.is_gold() {
                retained_gold += 1;
            }
        }
    }
    Ok(Metrics::from_counts(
        words as u64,
        gold_total,
        initial,
        initial - retained,
        gold_total - retained_gold,
    ))
}
