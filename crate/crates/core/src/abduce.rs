//! Barrier sets by weighted abduction.
//!
//! Each observed stretch between two features that a local rule keeps apart
//! yields a candidate set: the features of the intervening words. A barrier
//! must contain at least one feature of every candidate set. Assuming a
//! feature costs one unit, reusing it is free, so the cheapest proof is a
//! minimum-cardinality hitting set. It is searched by iterative deepening
//! on the cost bound.

use std::cmp::Ordering;
use std::collections::{BTreeMap, BTreeSet};

use thiserror::Error;

use crate::corpus::Feature;

pub const DEFAULT_MAX_HITTING_SET: usize = 12;

/// Largest feature universe the exhaustive oracle accepts.
pub const BRUTE_FORCE_LIMIT: usize = 20;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum AbductionError {
    #[error("candidate barrier set is empty")]
    EmptyCandidate,
    #[error("no barrier of at most {cap} features exists")]
    CapExceeded { cap: usize },
    #[error("feature universe of {0} exceeds the exhaustive-search limit")]
    UniverseTooLarge(usize),
}

/// Multiset of non-empty candidate barrier sets.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct CandidateSets {
    sets: Vec<BTreeSet<Feature>>,
}

impl CandidateSets {
    pub fn new(sets: Vec<BTreeSet<Feature>>) -> Result<Self, AbductionError> {
        if sets.iter().any(BTreeSet::is_empty) {
            return Err(AbductionError::EmptyCandidate);
        }
        Ok(CandidateSets { sets })
    }

    pub fn push(&mut self, set: BTreeSet<Feature>) -> Result<(), AbductionError> {
        if set.is_empty() {
            return Err(AbductionError::EmptyCandidate);
        }
        self.sets.push(set);
        Ok(())
    }

    pub fn sets(&self) -> &[BTreeSet<Feature>] {
        &self.sets
    }

    pub fn len(&self) -> usize {
        self.sets.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sets.is_empty()
    }

    pub fn universe(&self) -> BTreeSet<&Feature> {
        self.sets.iter().flatten().collect()
    }

    /// Features shared by every candidate set; empty for an empty list.
    pub fn intersection(&self) -> BTreeSet<Feature> {
        let mut iter = self.sets.iter();
        let Some(first) = iter.next() else {
            return BTreeSet::new();
        };
        iter.fold(first.clone(), |acc, s| {
            acc.intersection(s).cloned().collect()
        })
    }

    pub fn is_hit_by(&self, barrier: &BTreeSet<Feature>) -> bool {
        self.sets.iter().all(|s| !s.is_disjoint(barrier))
    }
}

/// Outcome of the abduction: the barrier to use and the number of unit-cost
/// assumptions needed to explain every candidate set.
///
/// `cost` equals `barrier.len()` except when the candidate sets share
/// features: then any one shared feature explains everything (cost 1) but
/// the whole intersection is used as the barrier.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Abduction {
    pub barrier: BTreeSet<Feature>,
    pub cost: usize,
}

/// Iterative-deepening minimum hitting set search with frequency-based tie
/// breaking and a size cap.
#[derive(Debug, Clone)]
pub struct HittingSetSolver<'a> {
    frequencies: Option<&'a BTreeMap<Feature, u64>>,
    cap: usize,
}

impl Default for HittingSetSolver<'_> {
    fn default() -> Self {
        HittingSetSolver {
            frequencies: None,
            cap: DEFAULT_MAX_HITTING_SET,
        }
    }
}

struct Search<'s> {
    sets: &'s [Vec<usize>],
    chosen: Vec<bool>,
    excluded: Vec<bool>,
    picked: Vec<usize>,
    solutions: Vec<Vec<usize>>,
}

impl Search<'_> {
    fn is_hit(&self, set: &[usize]) -> bool {
        set.iter().any(|&e| self.chosen[e])
    }

    /// Greedy packing of pairwise-disjoint unhit sets.
    fn disjoint_lower_bound(&self, unhit: &[&Vec<usize>]) -> usize {
        let mut used = vec![false; self.chosen.len()];
        let mut bound = 0;
        for set in unhit {
            if set.iter().all(|&e| !used[e]) {
                bound += 1;
                for &e in set.iter() {
                    used[e] = true;
                }
            }
        }
        bound
    }

    fn run(&mut self, budget: usize) {
        let unhit: Vec<&Vec<usize>> = self.sets.iter().filter(|s| !self.is_hit(s)).collect();
        if unhit.is_empty() {
            self.solutions.push(self.picked.clone());
            return;
        }
        if budget == 0 || self.disjoint_lower_bound(&unhit) > budget {
            return;
        }
        let branch = unhit
            .iter()
            .min_by_key(|s| s.iter().filter(|&&e| !self.excluded[e]).count())
            .map(|s| (*s).clone())
            .expect("unhit is non-empty");
        let mut newly_excluded = Vec::new();
        for e in branch {
            if self.excluded[e] {
                continue;
            }
            self.chosen[e] = true;
            self.picked.push(e);
            self.run(budget - 1);
            self.picked.pop();
            self.chosen[e] = false;
            // later siblings never pick e again; each set is found once
            self.excluded[e] = true;
            newly_excluded.push(e);
        }
        for e in newly_excluded {
            self.excluded[e] = false;
        }
    }
}

impl<'a> HittingSetSolver<'a> {
    pub fn new() -> Self {
        Self::default()
    }

    /// Corpus frequencies used to order the search and break ties: among
    /// equal-cost barriers the one with the highest total frequency wins.
    pub fn with_frequencies(mut self, frequencies: &'a BTreeMap<Feature, u64>) -> Self {
        self.frequencies = Some(frequencies);
        self
    }

    pub fn with_cap(mut self, cap: usize) -> Self {
        self.cap = cap;
        self
    }

    fn frequency(&self, f: &Feature) -> u64 {
        self.frequencies
            .and_then(|m| m.get(f).copied())
            .unwrap_or(0)
    }

    fn prefer(&self, a: &BTreeSet<&Feature>, b: &BTreeSet<&Feature>) -> Ordering {
        let weight = |s: &BTreeSet<&Feature>| s.iter().map(|f| self.frequency(f)).sum::<u64>();
        weight(b)
            .cmp(&weight(a))
            .then_with(|| a.iter().cmp(b.iter()))
    }

    pub fn solve(&self, cs: &CandidateSets) -> Result<Abduction, AbductionError> {
        if cs.is_empty() {
            return Ok(Abduction {
                barrier: BTreeSet::new(),
                cost: 0,
            });
        }
        let shared = cs.intersection();
        if !shared.is_empty() {
            return Ok(Abduction {
                barrier: shared,
                cost: 1,
            });
        }

        // every singleton must be in any barrier
        let seed: BTreeSet<&Feature> = cs
            .sets()
            .iter()
            .filter(|s| s.len() == 1)
            .flatten()
            .collect();
        if seed.len() > self.cap {
            return Err(AbductionError::CapExceeded { cap: self.cap });
        }

        let mut universe: Vec<&Feature> = cs
            .universe()
            .into_iter()
            .filter(|f| !seed.contains(f))
            .collect();
        universe.sort_by(|a, b| {
            self.frequency(b)
                .cmp(&self.frequency(a))
                .then_with(|| a.cmp(b))
        });
        let index: BTreeMap<&Feature, usize> =
            universe.iter().enumerate().map(|(i, f)| (*f, i)).collect();

        let mut remaining: Vec<Vec<usize>> = cs
            .sets()
            .iter()
            .filter(|s| s.iter().all(|f| !seed.contains(f)))
            .map(|s| {
                let mut v: Vec<usize> = s.iter().map(|f| index[f]).collect();
                v.sort_unstable();
                v
            })
            .collect();
        remaining.sort();
        remaining.dedup();
        // a superset is hit whenever its subset is
        let reduced: Vec<Vec<usize>> = remaining
            .iter()
            .filter(|s| {
                !remaining
                    .iter()
                    .any(|t| t.len() < s.len() && t.iter().all(|e| s.binary_search(e).is_ok()))
            })
            .cloned()
            .collect();

        let mut search = Search {
            sets: &reduced,
            chosen: vec![false; universe.len()],
            excluded: vec![false; universe.len()],
            picked: Vec::new(),
            solutions: Vec::new(),
        };
        for budget in 0..=(self.cap - seed.len()) {
            search.run(budget);
            if search.solutions.is_empty() {
                continue;
            }
            let best = search
                .solutions
                .iter()
                .map(|sol| {
                    sol.iter()
                        .map(|&i| universe[i])
                        .chain(seed.iter().copied())
                        .collect::<BTreeSet<&Feature>>()
                })
                .min_by(|a, b| self.prefer(a, b))
                .expect("solutions is non-empty");
            let barrier: BTreeSet<Feature> = best.into_iter().cloned().collect();
            return Ok(Abduction {
                cost: barrier.len(),
                barrier,
            });
        }
        Err(AbductionError::CapExceeded { cap: self.cap })
    }
}

/// Minimum-cost barrier with default settings: no frequency information and
/// a cap of [`DEFAULT_MAX_HITTING_SET`] features.
pub fn minimal_hitting_set(cs: &CandidateSets) -> Result<Abduction, AbductionError> {
    HittingSetSolver::new().solve(cs)
}

/// Exhaustive minimum hitting set over the candidate universe, trying subsets
/// by size and then in lexicographic order. Used as a test oracle.
pub fn brute_force_hitting_set(cs: &CandidateSets) -> Result<BTreeSet<Feature>, AbductionError> {
    let universe: Vec<&Feature> = cs.universe().into_iter().collect();
    if universe.len() > BRUTE_FORCE_LIMIT {
        return Err(AbductionError::UniverseTooLarge(universe.len()));
    }
    let masks: Vec<u32> = cs
        .sets()
        .iter()
        .map(|s| {
            universe
                .iter()
                .enumerate()
                .filter(|(_, f)| s.contains(**f))
                .fold(0u32, |m, (i, _)| m | (1 << i))
        })
        .collect();

    fn first_hitting(
        start: usize,
        left: usize,
        n: usize,
        picked: &mut Vec<usize>,
        masks: &[u32],
    ) -> bool {
        if left == 0 {
            let m = picked.iter().fold(0u32, |m, &i| m | (1 << i));
            return masks.iter().all(|s| s & m != 0);
        }
        for i in start..n {
            if n - i < left {
                break;
            }
            picked.push(i);
            if first_hitting(i + 1, left - 1, n, picked, masks) {
                return true;
            }
            picked.pop();
        }
        false
    }

    for size in 0..=universe.len() {
        let mut picked = Vec::with_capacity(size);
        if first_hitting(0, size, universe.len(), &mut picked, &masks) {
            return Ok(picked.into_iter().map(|i| universe[i].clone()).collect());
        }
    }
    unreachable!("the full universe hits every non-empty set")
}
