//! Count tables over a gold corpus and the confidence-bounded scores that
//! drive rule induction.

use std::collections::BTreeMap;
use std::fmt::{self, Write as _};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::corpus::{Corpus, Feature, WordForm};

/// Side of the current word a neighbour sits on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Direction {
    Left,
    Right,
}

impl Direction {
    pub const BOTH: [Direction; 2] = [Direction::Left, Direction::Right];

    pub fn offset(self) -> isize {
        match self {
            Direction::Left => -1,
            Direction::Right => 1,
        }
    }

    pub fn opposite(self) -> Direction {
        match self {
            Direction::Left => Direction::Right,
            Direction::Right => Direction::Left,
        }
    }
}

impl fmt::Display for Direction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Direction::Left => "-1",
            Direction::Right => "+1",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum StatsError {
    #[error("sentence {sentence}, cohort {cohort}: no gold reading")]
    NotGold { sentence: usize, cohort: usize },
    #[error("upper bound needs at least one trial")]
    NoTrials,
    #[error("{successes} successes exceed {trials} trials")]
    TooManySuccesses { successes: u64, trials: u64 },
    #[error("count table is empty")]
    EmptyTable,
    #[error("no word/feature pair reaches the count floor")]
    NoQualifyingPair,
    #[error("no feature reaches the count floor")]
    NoQualifyingFeature,
    #[error("invalid statistics configuration: {0}")]
    Config(String),
}

/// Count floors and confidence parameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct StatConfig {
    pub min_context_count: u64,
    pub min_feature_count: u64,
    pub min_word_count: u64,
    pub z: f64,
    pub zero_tail: f64,
}

impl Default for StatConfig {
    fn default() -> Self {
        StatConfig {
            min_context_count: 100,
            min_feature_count: 100,
            min_word_count: 100,
            z: 1.96,
            zero_tail: 0.025,
        }
    }
}

impl StatConfig {
    pub fn validate(&self) -> Result<(), StatsError> {
        if self.min_context_count == 0 || self.min_feature_count == 0 || self.min_word_count == 0 {
            return Err(StatsError::Config("count floors must be at least 1".into()));
        }
        if !(self.zero_tail > 0.0 && self.zero_tail < 1.0) {
            return Err(StatsError::Config("zero_tail must lie in (0, 1)".into()));
        }
        if !(self.z > 0.0 && self.z.is_finite()) {
            return Err(StatsError::Config("z must be positive".into()));
        }
        Ok(())
    }
}

/// Unigram, bigram and word/feature counts collected from a gold corpus.
///
/// Word forms are keyed by their lowercased form.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct CountTable {
    total_words: u64,
    uni_gold: BTreeMap<Feature, u64>,
    uni_proposed: BTreeMap<Feature, u64>,
    // (direction, context, feature)
    bi: BTreeMap<(Direction, Feature, Feature), u64>,
    ctx: BTreeMap<(Direction, Feature), u64>,
    lex_gold: BTreeMap<(String, Feature), u64>,
    lex_proposed: BTreeMap<(String, Feature), u64>,
    word_count: BTreeMap<String, u64>,
}

fn bump<K: Ord>(map: &mut BTreeMap<K, u64>, key: K) {
    *map.entry(key).or_insert(0) += 1;
}

impl CountTable {
    pub fn total_words(&self) -> u64 {
        self.total_words
    }

    pub fn uni_gold(&self, f: &Feature) -> u64 {
        self.uni_gold.get(f).copied().unwrap_or(0)
    }

    pub fn uni_proposed(&self, f: &Feature) -> u64 {
        self.uni_proposed.get(f).copied().unwrap_or(0)
    }

    /// Cohorts with gold `feature` whose `dir` neighbour has gold `context`.
    pub fn bi(&self, context: &Feature, feature: &Feature, dir: Direction) -> u64 {
        self.bi
            .get(&(dir, context.clone(), feature.clone()))
            .copied()
            .unwrap_or(0)
    }

    /// Cohorts whose `dir` neighbour has gold `context`.
    pub fn ctx(&self, context: &Feature, dir: Direction) -> u64 {
        self.ctx.get(&(dir, context.clone())).copied().unwrap_or(0)
    }

    pub fn lex_gold(&self, word: &WordForm, f: &Feature) -> u64 {
        self.lex_gold
            .get(&(word.key(), f.clone()))
            .copied()
            .unwrap_or(0)
    }

    pub fn lex_proposed(&self, word: &WordForm, f: &Feature) -> u64 {
        self.lex_proposed
            .get(&(word.key(), f.clone()))
            .copied()
            .unwrap_or(0)
    }

    pub fn word_count(&self, word: &WordForm) -> u64 {
        self.word_count.get(&word.key()).copied().unwrap_or(0)
    }

    /// Features seen in at least one gold reading.
    pub fn gold_features(&self) -> impl Iterator<Item = &Feature> {
        self.uni_gold.keys()
    }

    /// Features seen in any reading.
    pub fn proposed_features(&self) -> impl Iterator<Item = &Feature> {
        self.uni_proposed.keys()
    }

    pub fn contexts(&self, dir: Direction) -> impl Iterator<Item = &Feature> {
        self.ctx
            .keys()
            .filter(move |(d, _)| *d == dir)
            .map(|(_, c)| c)
    }

    /// Every (word form, feature) pair ever proposed, word forms lowercased.
    pub fn word_feature_pairs(&self) -> impl Iterator<Item = (WordForm, &Feature)> {
        self.lex_proposed.keys().map(|(w, f)| {
            (
                WordForm::new(w.clone()).expect("keys come from valid word forms"),
                f,
            )
        })
    }

    /// Unweighted mean of lex_gold/lex_proposed over the pairs that reach the
    /// word-count floor.
    pub fn mean_lexical_ratio(&self, cfg: &StatConfig) -> Option<f64> {
        mean(
            self.lex_proposed
                .iter()
                .filter(|(_, &proposed)| proposed >= cfg.min_word_count)
                .map(|(key, &proposed)| {
                    self.lex_gold.get(key).copied().unwrap_or(0) as f64 / proposed as f64
                }),
        )
    }

    /// Unweighted mean of uni_gold/uni_proposed over the features that reach
    /// the feature-count floor.
    pub fn mean_feature_ratio(&self, cfg: &StatConfig) -> Option<f64> {
        mean(
            self.uni_proposed
                .iter()
                .filter(|(_, &proposed)| proposed >= cfg.min_feature_count)
                .map(|(f, &proposed)| self.uni_gold(f) as f64 / proposed as f64),
        )
    }
}

fn mean(values: impl Iterator<Item = f64>) -> Option<f64> {
    let (sum, n) = values.fold((0.0, 0usize), |(s, n), v| (s + v, n + 1));
    (n > 0).then(|| sum / n as f64)
}

/// Counts every statistic in one pass. Neighbour counts stop at sentence
/// boundaries; several gold readings in one cohort contribute the union of
/// their features once.
pub fn collect_stats(corpus: &Corpus) -> Result<CountTable, StatsError> {
    let mut t = CountTable::default();
    for (si, sentence) in corpus.sentences.iter().enumerate() {
        let cohorts = sentence.cohorts();
        let gold: Vec<_> = cohorts.iter().map(|c| c.gold_features()).collect();
        for (ci, cohort) in cohorts.iter().enumerate() {
            if gold[ci].is_empty() {
                return Err(StatsError::NotGold {
                    sentence: si,
                    cohort: ci,
                });
            }
            t.total_words += 1;
            let key = cohort.form().key();
            bump(&mut t.word_count, key.clone());
            for &f in &gold[ci] {
                bump(&mut t.uni_gold, f.clone());
                bump(&mut t.lex_gold, (key.clone(), f.clone()));
            }
            for f in cohort.proposed_features() {
                bump(&mut t.uni_proposed, f.clone());
                bump(&mut t.lex_proposed, (key.clone(), f.clone()));
            }
            for dir in Direction::BOTH {
                let Some(ni) = ci
                    .checked_add_signed(dir.offset())
                    .filter(|&n| n < cohorts.len())
                else {
                    continue;
                };
                for &c in &gold[ni] {
                    bump(&mut t.ctx, (dir, c.clone()));
                    for &f in &gold[ci] {
                        bump(&mut t.bi, (dir, c.clone(), f.clone()));
                    }
                }
            }
        }
    }
    Ok(t)
}

/// Upper confidence limit of a binomial proportion.
///
/// With no successes this is the exact one-sided limit
/// `1 - zero_tail^(1/trials)`; otherwise the normal approximation
/// `f + z * sqrt(f(1-f)/trials)`, clamped to 1 and never below the
/// zero-success limit, so that the bound is monotone in `successes`.
pub fn upper_bound(successes: u64, trials: u64, cfg: &StatConfig) -> Result<f64, StatsError> {
    if trials == 0 {
        return Err(StatsError::NoTrials);
    }
    if successes > trials {
        return Err(StatsError::TooManySuccesses { successes, trials });
    }
    let n = trials as f64;
    // 1 - exp(ln(tail)/n), written to keep precision for large n
    let none = -(cfg.zero_tail.ln() / n).exp_m1();
    if successes == 0 {
        return Ok(none);
    }
    let f = successes as f64 / n;
    Ok((f + cfg.z * (f * (1.0 - f) / n).sqrt()).clamp(none, 1.0))
}

/// Score of `REMOVE (feature) (dir C (context))`: the bounded probability of
/// `feature` next to `context` over its unconditional gold frequency.
/// `None` when either count is below its floor.
pub fn local_score(
    feature: &Feature,
    context: &Feature,
    dir: Direction,
    t: &CountTable,
    cfg: &StatConfig,
) -> Result<Option<f64>, StatsError> {
    if t.total_words == 0 {
        return Err(StatsError::EmptyTable);
    }
    let uni = t.uni_gold(feature);
    let ctx = t.ctx(context, dir);
    if uni < cfg.min_feature_count || ctx < cfg.min_context_count {
        return Ok(None);
    }
    let bound = upper_bound(t.bi(context, feature, dir), ctx, cfg)?;
    Ok(Some(bound / (uni as f64 / t.total_words as f64)))
}

pub(crate) fn lexical_score_with_mean(
    feature: &Feature,
    word: &WordForm,
    t: &CountTable,
    cfg: &StatConfig,
    mean: f64,
) -> Result<Option<f64>, StatsError> {
    let proposed = t.lex_proposed(word, feature);
    if proposed < cfg.min_word_count {
        return Ok(None);
    }
    let bound = upper_bound(t.lex_gold(word, feature), proposed, cfg)?;
    Ok(Some(bound / mean))
}

/// Score of `REMOVE (feature) (0 ("<word>"))`: how often `feature` is correct
/// when proposed for `word`, relative to the average over all pairs.
pub fn lexical_score(
    feature: &Feature,
    word: &WordForm,
    t: &CountTable,
    cfg: &StatConfig,
) -> Result<Option<f64>, StatsError> {
    let mean = t
        .mean_lexical_ratio(cfg)
        .ok_or(StatsError::NoQualifyingPair)?;
    lexical_score_with_mean(feature, word, t, cfg, mean)
}

pub(crate) fn rarity_score_with_mean(
    feature: &Feature,
    t: &CountTable,
    cfg: &StatConfig,
    mean: f64,
) -> Result<Option<f64>, StatsError> {
    let proposed = t.uni_proposed(feature);
    if proposed < cfg.min_feature_count {
        return Ok(None);
    }
    let bound = upper_bound(t.uni_gold(feature), proposed, cfg)?;
    Ok(Some(bound / mean))
}

/// Score of the unconditional `REMOVE (feature)`.
pub fn feature_rarity_score(
    feature: &Feature,
    t: &CountTable,
    cfg: &StatConfig,
) -> Result<Option<f64>, StatsError> {
    let mean = t
        .mean_feature_ratio(cfg)
        .ok_or(StatsError::NoQualifyingFeature)?;
    rarity_score_with_mean(feature, t, cfg, mean)
}

/// Sorted, tab-separated dump of every count, one `## section` per table.
pub fn dump_counts(t: &CountTable) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "## total_words\n{}", t.total_words);
    let _ = writeln!(out, "## uni_gold");
    for (f, n) in &t.uni_gold {
        let _ = writeln!(out, "{f}\t{n}");
    }
    let _ = writeln!(out, "## uni_proposed");
    for (f, n) in &t.uni_proposed {
        let _ = writeln!(out, "{f}\t{n}");
    }
    for dir in Direction::BOTH {
        let _ = writeln!(out, "## ctx {dir}");
        for ((_, c), n) in t.ctx.iter().filter(|((d, _), _)| *d == dir) {
            let _ = writeln!(out, "{c}\t{n}");
        }
        let _ = writeln!(out, "## bi {dir}");
        for ((_, c, f), n) in t.bi.iter().filter(|((d, _, _), _)| *d == dir) {
            let _ = writeln!(out, "{c}\t{f}\t{n}");
        }
    }
    let _ = writeln!(out, "## word_count");
    for (w, n) in &t.word_count {
        let _ = writeln!(out, "{w}\t{n}");
    }
    let _ = writeln!(out, "## lex_gold");
    for ((w, f), n) in &t.lex_gold {
        let _ = writeln!(out, "{w}\t{f}\t{n}");
    }
    let _ = writeln!(out, "## lex_proposed");
    for ((w, f), n) in &t.lex_proposed {
        let _ = writeln!(out, "{w}\t{f}\t{n}");
    }
    out
}
