//! Rule induction: candidate generation for the five rule families, barrier
//! abduction, subsumption filtering and stratification into levels.

use std::collections::{BTreeMap, BTreeSet};

use serde::Deserialize;
use thiserror::Error;

use crate::abduce::{CandidateSets, HittingSetSolver, DEFAULT_MAX_HITTING_SET};
use crate::corpus::{feature_implications, Corpus, Feature, ImplicationTable};
use crate::grammar::{
    ContextCondition, ContextTest, FeatureSet, Grammar, Position, Rule, RuleKind,
};
use crate::stats::{
    collect_stats, lexical_score_with_mean, local_score, rarity_score_with_mean, CountTable,
    Direction, StatConfig, StatsError,
};

#[derive(Debug, Error)]
pub enum InduceError {
    #[error(transparent)]
    Stats(#[from] StatsError),
    #[error("invalid induction configuration: {0}")]
    Config(String),
}

/// Geometric ladder of `steps` thresholds from `low` to `high` inclusive.
pub fn geometric_thresholds(low: f64, high: f64, steps: usize) -> Vec<f64> {
    match steps {
        0 => Vec::new(),
        1 => vec![high],
        _ => (0..steps)
            .map(|k| {
                if k + 1 == steps {
                    high
                } else {
                    low * (high / low).powf(k as f64 / (steps - 1) as f64)
                }
            })
            .collect(),
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct InduceConfig {
    /// Upper score bound of each level, strictly ascending. The last entry is
    /// the global threshold: nothing scoring at or above it is induced.
    pub level_thresholds: Vec<f64>,
    pub stat: StatConfig,
    pub barrier_min_occurrences: usize,
    pub max_hitting_set: usize,
}

impl Default for InduceConfig {
    fn default() -> Self {
        InduceConfig {
            level_thresholds: geometric_thresholds(0.0025, 0.25, 10),
            stat: StatConfig::default(),
            barrier_min_occurrences: 1,
            max_hitting_set: DEFAULT_MAX_HITTING_SET,
        }
    }
}

/// Flat key/value layout of the configuration file.
#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct ConfigFile {
    thresholds: Option<Vec<f64>>,
    min_context_count: Option<u64>,
    min_feature_count: Option<u64>,
    min_word_count: Option<u64>,
    z: Option<f64>,
    zero_tail: Option<f64>,
    barrier_min_occurrences: Option<usize>,
    max_hitting_set: Option<usize>,
}

impl InduceConfig {
    pub fn top_threshold(&self) -> f64 {
        self.level_thresholds.last().copied().unwrap_or(0.0)
    }

    pub fn validate(&self) -> Result<(), InduceError> {
        if self.level_thresholds.is_empty() {
            return Err(InduceError::Config(
                "at least one threshold is required".into(),
            ));
        }
        if self.level_thresholds[0] <= 0.0 || !self.top_threshold().is_finite() {
            return Err(InduceError::Config(
                "thresholds must be positive and finite".into(),
            ));
        }
        if self.level_thresholds.windows(2).any(|w| w[0] >= w[1]) {
            return Err(InduceError::Config(
                "thresholds must be strictly ascending".into(),
            ));
        }
        if self.max_hitting_set == 0 {
            return Err(InduceError::Config(
                "max_hitting_set must be at least 1".into(),
            ));
        }
        self.stat.validate()?;
        Ok(())
    }

    /// Reads the flat `key = value` configuration format on top of the
    /// defaults. Unknown keys are rejected.
    pub fn from_toml_str(text: &str) -> Result<Self, InduceError> {
        let file: ConfigFile =
            toml::from_str(text).map_err(|e| InduceError::Config(e.message().to_string()))?;
        let mut cfg = InduceConfig::default();
        if let Some(t) = file.thresholds {
            cfg.level_thresholds = t;
        }
        let stat = &mut cfg.stat;
        stat.min_context_count = file.min_context_count.unwrap_or(stat.min_context_count);
        stat.min_feature_count = file.min_feature_count.unwrap_or(stat.min_feature_count);
        stat.min_word_count = file.min_word_count.unwrap_or(stat.min_word_count);
        stat.z = file.z.unwrap_or(stat.z);
        stat.zero_tail = file.zero_tail.unwrap_or(stat.zero_tail);
        cfg.barrier_min_occurrences = file
            .barrier_min_occurrences
            .unwrap_or(cfg.barrier_min_occurrences);
        cfg.max_hitting_set = file.max_hitting_set.unwrap_or(cfg.max_hitting_set);
        cfg.validate()?;
        Ok(cfg)
    }
}

/// `REMOVE (F) (dirC (C))` for every feature/context pair scoring below the
/// top threshold, in both directions.
pub fn induce_local(t: &CountTable, cfg: &InduceConfig) -> Result<Vec<Rule>, StatsError> {
    let top = cfg.top_threshold();
    let mut rules = Vec::new();
    if t.total_words() == 0 {
        return Ok(rules);
    }
    for dir in Direction::BOTH {
        for context in t.contexts(dir) {
            for feature in t.gold_features() {
                if let Some(score) = local_score(feature, context, dir, t, &cfg.stat)? {
                    if score < top {
                        rules.push(Rule::new(
                            feature.clone(),
                            vec![ContextCondition::neighbour(dir, context.clone())],
                            score,
                        ));
                    }
                }
            }
        }
    }
    Ok(rules)
}

fn is_basic_local(rule: &Rule) -> bool {
    rule.kind() == RuleKind::Local
        && rule.conditions.len() == 1
        && matches!(rule.conditions[0].position, Position::Neighbour(_))
}

/// Adds one combined rule per (target, position, careful) group of two or
/// more local rules. The union rule takes the highest member score; the
/// members are kept.
pub fn combine_local(rules: &[Rule]) -> Vec<Rule> {
    type Group = (BTreeSet<Feature>, f64, usize);
    let mut groups: BTreeMap<(Feature, Position, bool), Group> = BTreeMap::new();
    for rule in rules.iter().filter(|r| is_basic_local(r)) {
        let cond = &rule.conditions[0];
        let entry = groups
            .entry((rule.target.clone(), cond.position, cond.careful))
            .or_insert_with(|| (BTreeSet::new(), 0.0, 0));
        entry.0.extend(
            cond.features()
                .expect("local rules test features")
                .members()
                .iter()
                .cloned(),
        );
        entry.1 = entry.1.max(rule.score);
        entry.2 += 1;
    }
    let mut out = rules.to_vec();
    for ((target, position, careful), (members, score, n)) in groups {
        if n < 2 || members.len() < 2 {
            continue;
        }
        let set = FeatureSet::inline(members).expect("non-empty");
        let cond = ContextCondition::new(position, careful, ContextTest::Features(set), None)
            .expect("fixed position without barrier");
        out.push(Rule::new(target, vec![cond], score));
    }
    out
}

/// Gold feature sets of every cohort, per sentence.
struct GoldView<'c> {
    sentences: Vec<Vec<BTreeSet<&'c Feature>>>,
}

impl<'c> GoldView<'c> {
    fn new(corpus: &'c Corpus) -> Self {
        GoldView {
            sentences: corpus
                .sentences
                .iter()
                .map(|s| s.cohorts().iter().map(|c| c.gold_features()).collect())
                .collect(),
        }
    }

    fn frequencies(&self) -> BTreeMap<Feature, u64> {
        let mut freq = BTreeMap::new();
        for f in self.sentences.iter().flatten().flatten() {
            *freq.entry((*f).clone()).or_insert(0) += 1;
        }
        freq
    }

    /// Candidate sets between each `context` cohort and the nearest `feature`
    /// cohort on the rule's side, plus the number of adjacent pairs.
    fn barrier_evidence(
        &self,
        feature: &Feature,
        context: &Feature,
        dir: Direction,
    ) -> (CandidateSets, usize) {
        let step = dir.opposite().offset();
        let mut sets = CandidateSets::default();
        let mut adjacent = 0;
        for cohorts in &self.sentences {
            for (j, gold) in cohorts.iter().enumerate() {
                if !gold.contains(context) {
                    continue;
                }
                let mut between = BTreeSet::new();
                let mut k = j;
                while let Some(next) = k.checked_add_signed(step).filter(|&n| n < cohorts.len()) {
                    k = next;
                    if cohorts[k].contains(feature) {
                        if between.is_empty() {
                            adjacent += 1;
                        } else {
                            sets.push(std::mem::take(&mut between)).expect("non-empty");
                        }
                        break;
                    }
                    between.extend(cohorts[k].iter().map(|f| (*f).clone()));
                }
            }
        }
        (sets, adjacent)
    }
}

/// Candidate barrier sets for the local rule `REMOVE (feature) (dirC
/// (context))`: for each gold `context` occurrence, the gold features of the
/// words up to the nearest gold `feature` on the rule's side. Adjacent pairs
/// contribute nothing.
pub fn collect_barrier_candidates(
    corpus: &Corpus,
    feature: &Feature,
    context: &Feature,
    dir: Direction,
) -> CandidateSets {
    GoldView::new(corpus)
        .barrier_evidence(feature, context, dir)
        .0
}

/// Extends basic local rules to unbounded scans limited by an abduced
/// barrier set. Rules without long-distance evidence, with adjacent
/// counter-examples in the corpus, or whose barrier would exceed the cap
/// yield nothing.
pub fn induce_barriers(corpus: &Corpus, locals: &[Rule], cfg: &InduceConfig) -> Vec<Rule> {
    let view = GoldView::new(corpus);
    let freq = view.frequencies();
    let solver = HittingSetSolver::new()
        .with_frequencies(&freq)
        .with_cap(cfg.max_hitting_set);
    let mut out = Vec::new();
    for rule in locals.iter().filter(|r| is_basic_local(r)) {
        let cond = &rule.conditions[0];
        let Position::Neighbour(dir) = cond.position else {
            continue;
        };
        let context = cond
            .features()
            .and_then(|s| s.members().iter().next())
            .expect("local rules test one feature");
        let (sets, adjacent) = view.barrier_evidence(&rule.target, context, dir);
        if adjacent > 0 || sets.is_empty() || sets.len() < cfg.barrier_min_occurrences {
            continue;
        }
        let Ok(abduction) = solver.solve(&sets) else {
            continue;
        };
        let barrier = FeatureSet::inline(abduction.barrier).expect("non-empty candidate sets");
        let scan = ContextCondition::new(
            Position::Scan(dir),
            cond.careful,
            ContextTest::Features(FeatureSet::single(context.clone())),
            Some(barrier),
        )
        .expect("scan positions take barriers");
        out.push(Rule::new(rule.target.clone(), vec![scan], rule.score));
    }
    out
}

/// `REMOVE (F) (0 ("<W>"))` for word/feature pairs scoring below the top
/// threshold.
pub fn induce_lexical(t: &CountTable, cfg: &InduceConfig) -> Result<Vec<Rule>, StatsError> {
    let Some(mean) = t.mean_lexical_ratio(&cfg.stat) else {
        return Ok(Vec::new());
    };
    let top = cfg.top_threshold();
    let mut rules = Vec::new();
    for (word, feature) in t.word_feature_pairs() {
        if let Some(score) = lexical_score_with_mean(feature, &word, t, &cfg.stat, mean)? {
            if score < top {
                rules.push(Rule::new(
                    feature.clone(),
                    vec![ContextCondition::word(word)],
                    score,
                ));
            }
        }
    }
    Ok(rules)
}

/// Unconditional `REMOVE (F)` for features scoring below the top threshold.
pub fn induce_rare(t: &CountTable, cfg: &InduceConfig) -> Result<Vec<Rule>, StatsError> {
    let Some(mean) = t.mean_feature_ratio(&cfg.stat) else {
        return Ok(Vec::new());
    };
    let top = cfg.top_threshold();
    let mut rules = Vec::new();
    for feature in t.proposed_features() {
        if let Some(score) = rarity_score_with_mean(feature, t, &cfg.stat, mean)? {
            if score < top {
                rules.push(Rule::rare(feature.clone(), score));
            }
        }
    }
    Ok(rules)
}

fn sorted(rules: &[Rule]) -> Vec<Rule> {
    let mut keyed: Vec<(String, String, &Rule)> = rules
        .iter()
        .map(|r| (r.canonical_text(), r.to_string(), r))
        .collect();
    keyed.sort_by(|a, b| {
        a.2.score
            .total_cmp(&b.2.score)
            .then_with(|| a.0.cmp(&b.0))
            .then_with(|| a.1.cmp(&b.1))
    });
    keyed.into_iter().map(|(_, _, r)| r.clone()).collect()
}

/// Drops every rule subsumed by an already kept rule of lower or equal
/// score, visiting rules in (score, text) order.
pub fn filter_subsumed(rules: &[Rule], imp: &ImplicationTable) -> Vec<Rule> {
    let mut kept: Vec<Rule> = Vec::new();
    for rule in sorted(rules) {
        if !kept.iter().any(|a| a.subsumes(&rule, imp)) {
            kept.push(rule);
        }
    }
    kept
}

/// Buckets rules into levels by score and removes, level by level, rules
/// made redundant by anything active at that level.
///
/// Level `k` holds scores in `(T[k-1], T[k]]`. Within a level scores no
/// longer matter since all its rules run together: a rule goes if a lower
/// level or another rule of its own level subsumes it.
pub fn stratify(rules: &[Rule], imp: &ImplicationTable, cfg: &InduceConfig) -> Grammar {
    let thresholds = &cfg.level_thresholds;
    let mut buckets: Vec<Vec<Rule>> = vec![Vec::new(); thresholds.len().max(1)];
    for rule in sorted(rules) {
        if let Some(level) = thresholds.iter().position(|&t| rule.score <= t) {
            buckets[level].push(rule);
        }
    }
    let mut levels: Vec<Vec<Rule>> = Vec::with_capacity(buckets.len());
    for bucket in buckets {
        let kept: Vec<Rule> = bucket
            .iter()
            .enumerate()
            .filter(|&(i, b)| {
                let below = levels.iter().flatten().any(|a| a.subsumes(b, imp));
                let beside = bucket
                    .iter()
                    .enumerate()
                    .any(|(j, a)| j != i && a.subsumes(b, imp) && (j < i || !b.subsumes(a, imp)));
                !below && !beside
            })
            .map(|(_, r)| r.clone())
            .collect();
        levels.push(kept);
    }
    Grammar::from_levels(levels)
}

/// Induced grammar plus candidate counts before redundancy elimination.
#[derive(Debug, Clone)]
pub struct Induction {
    pub grammar: Grammar,
    pub candidates: BTreeMap<RuleKind, usize>,
}

/// Runs statistics, candidate generation for every family, the maintenance
/// filter and stratification.
pub fn induce(corpus: &Corpus, cfg: &InduceConfig) -> Result<Induction, InduceError> {
    cfg.validate()?;
    let table = collect_stats(corpus)?;
    let imp = feature_implications(corpus);
    let locals = induce_local(&table, cfg)?;
    let barriers = induce_barriers(corpus, &locals, cfg);
    let mut all = combine_local(&locals);
    all.extend(barriers);
    all.extend(induce_lexical(&table, cfg)?);
    all.extend(induce_rare(&table, cfg)?);

    let mut candidates: BTreeMap<RuleKind, usize> = RuleKind::ALL.iter().map(|k| (*k, 0)).collect();
    for r in &all {
        *candidates.entry(r.kind()).or_default() += 1;
    }
    let maintained = filter_subsumed(&all, &imp);
    Ok(Induction {
        grammar: stratify(&maintained, &imp, cfg),
        candidates,
    })
}
