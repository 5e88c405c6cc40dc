//! Stratified application of a grammar to ambiguous text.
//!
//! Level 1 runs to a fixpoint, then levels 1–2 together, and so on. Within
//! a pass cohorts are visited left to right and rules in (level, score,
//! text) order; conditions always see the current state of the sentence.
//! A rule never removes the last reading of a cohort.

use std::fmt;

use crate::corpus::{Cohort, Corpus, Sentence};
use crate::grammar::{ContextCondition, ContextTest, FeatureSet, Grammar, Position, Rule};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EngineConfig {
    /// Highest level to apply; `None` applies all of them.
    pub max_level: Option<usize>,
    pub trace: bool,
    /// Sentences are split across this many worker threads.
    pub threads: usize,
}

impl Default for EngineConfig {
    fn default() -> Self {
        EngineConfig {
            max_level: None,
            trace: false,
            threads: 1,
        }
    }
}

/// One rule application that removed readings. Indices are 1-based.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TraceEvent {
    pub sentence: usize,
    pub cohort: usize,
    pub level: usize,
    pub removed: usize,
    pub rule: String,
}

impl fmt::Display for TraceEvent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{}\t{}\t{}\t{}\t{}",
            self.sentence, self.cohort, self.level, self.removed, self.rule
        )
    }
}

fn set_matches(cohort: &Cohort, set: &FeatureSet, careful: bool) -> bool {
    let hit = |r: &crate::corpus::Reading| r.has_any(set.members());
    if careful {
        cohort.readings().iter().all(hit)
    } else {
        cohort.readings().iter().any(hit)
    }
}

fn test_matches(s: &Sentence, i: usize, j: usize, cond: &ContextCondition) -> bool {
    match &cond.test {
        ContextTest::Features(set) => set_matches(&s.cohorts()[j], set, cond.careful),
        ContextTest::Word(w) => s.cohorts()[i].form().matches(w),
    }
}

/// Evaluates one context condition for cohort `i` of `s`.
pub fn condition_holds(s: &Sentence, i: usize, cond: &ContextCondition) -> bool {
    let n = s.len();
    match cond.position {
        Position::Here => test_matches(s, i, i, cond),
        Position::Neighbour(dir) => match i.checked_add_signed(dir.offset()) {
            Some(j) if j < n => test_matches(s, i, j, cond),
            _ => false,
        },
        Position::Scan(dir) => {
            let mut j = i;
            loop {
                j = match j.checked_add_signed(dir.offset()) {
                    Some(j) if j < n => j,
                    _ => return false,
                };
                if test_matches(s, i, j, cond) {
                    return true;
                }
                if let Some(b) = &cond.barrier {
                    if s.cohorts()[j]
                        .readings()
                        .iter()
                        .any(|r| r.has_any(b.members()))
                    {
                        return false;
                    }
                }
            }
        }
    }
}

fn rule_applies(s: &Sentence, i: usize, rule: &Rule) -> bool {
    rule.conditions.iter().all(|c| condition_holds(s, i, c))
}

fn run_sentence(
    sentence: &mut Sentence,
    index: usize,
    rules: &[(usize, &Rule)],
    level_ends: &[usize],
    trace: bool,
) -> Vec<TraceEvent> {
    let mut events = Vec::new();
    for &end in level_ends {
        let active = &rules[..end];
        loop {
            let mut changed = false;
            for i in 0..sentence.len() {
                for &(level, rule) in active {
                    if !rule_applies(sentence, i, rule) {
                        continue;
                    }
                    let removed = sentence.cohorts_mut()[i].remove_where(|r| r.has(&rule.target));
                    if removed > 0 {
                        changed = true;
                        if trace {
                            events.push(TraceEvent {
                                sentence: index + 1,
                                cohort: i + 1,
                                level,
                                removed,
                                rule: rule.to_string(),
                            });
                        }
                    }
                }
            }
            if !changed {
                break;
            }
        }
    }
    events
}

/// Disambiguates `corpus`, returning the result and, when tracing is on,
/// one event per rule application that removed something.
pub fn disambiguate_traced(
    corpus: &Corpus,
    grammar: &Grammar,
    cfg: &EngineConfig,
) -> (Corpus, Vec<TraceEvent>) {
    let top = cfg
        .max_level
        .unwrap_or(usize::MAX)
        .min(grammar.level_count());
    let rules: Vec<(usize, &Rule)> = grammar.rules().filter(|(l, _)| *l <= top).collect();
    let level_ends: Vec<usize> = (1..=top)
        .map(|l| rules.iter().take_while(|(rl, _)| *rl <= l).count())
        .collect();

    let mut out = corpus.clone();
    let threads = cfg.threads.max(1);
    let chunk = out.sentences.len().div_ceil(threads).max(1);
    let events: Vec<Vec<TraceEvent>> = if threads == 1 {
        out.sentences
            .iter_mut()
            .enumerate()
            .map(|(i, s)| run_sentence(s, i, &rules, &level_ends, cfg.trace))
            .collect()
    } else {
        std::thread::scope(|scope| {
            let handles: Vec<_> = out
                .sentences
                .chunks_mut(chunk)
                .enumerate()
                .map(|(c, sentences)| {
                    let rules = &rules;
                    let level_ends = &level_ends;
                    scope.spawn(move || {
                        sentences
                            .iter_mut()
                            .enumerate()
                            .map(|(k, s)| {
                                run_sentence(s, c * chunk + k, rules, level_ends, cfg.trace)
                            })
                            .collect::<Vec<_>>()
                    })
                })
                .collect();
            handles
                .into_iter()
                .flat_map(|h| h.join().expect("engine worker panicked"))
                .collect()
        })
    };
    (out, events.into_iter().flatten().collect())
}

pub fn disambiguate(corpus: &Corpus, grammar: &Grammar, cfg: &EngineConfig) -> Corpus {
    disambiguate_traced(corpus, grammar, cfg).0
}
