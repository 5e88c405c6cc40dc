#![allow(dead_code)]

use std::collections::BTreeSet;

use num_bigint::BigUint;
use proptest::prelude::*;

use cg_induce::corpus::{BaseForm, Cohort, Corpus, Feature, Reading, Sentence, WordForm};
use cg_induce::grammar::{ContextCondition, ContextTest, FeatureSet, Grammar, Position, Rule};
use cg_induce::stats::Direction;

pub const TAGS: [&str; 6] = ["A", "B", "C", "D", "VFIN", "<x>"];
pub const FORMS: [&str; 4] = ["dog", "Dog", "it's", "3.5"];

pub fn feature() -> impl Strategy<Value = Feature> {
    prop::sample::select(&TAGS[..]).prop_map(|t| Feature::new(t).unwrap())
}

pub fn feature_set() -> impl Strategy<Value = BTreeSet<Feature>> {
    prop::collection::btree_set(feature(), 1..=3)
}

pub fn reading() -> impl Strategy<Value = Reading> {
    (
        prop::sample::select(&["dog", "it", "x-y"][..]),
        prop::collection::btree_set(feature(), 1..=3),
        any::<bool>(),
    )
        .prop_map(|(base, feats, gold)| {
            Reading::new(
                BaseForm::new(base).unwrap(),
                feats.into_iter().collect(),
                gold,
            )
            .unwrap()
        })
}

pub fn cohort() -> impl Strategy<Value = Cohort> {
    (
        prop::sample::select(&FORMS[..]),
        prop::collection::vec(reading(), 1..=4),
    )
        .prop_map(|(form, readings)| Cohort::new(WordForm::new(form).unwrap(), readings).unwrap())
}

pub fn corpus() -> impl Strategy<Value = Corpus> {
    prop::collection::vec(
        prop::collection::vec(cohort(), 1..=6).prop_map(|c| Sentence::new(c).unwrap()),
        0..=4,
    )
    .prop_map(Corpus::new)
}

fn direction() -> impl Strategy<Value = Direction> {
    prop::sample::select(&Direction::BOTH[..])
}

/// Named sets take a name derived from their members so that equal names
/// always mean equal members.
fn context_set() -> impl Strategy<Value = FeatureSet> {
    (feature_set(), any::<bool>()).prop_map(|(members, named)| {
        if named && members.len() > 1 {
            let name: String = members
                .iter()
                .map(|f| f.as_str().replace(['<', '>'], "_"))
                .collect::<Vec<_>>()
                .join("_");
            FeatureSet::named(format!("L_{name}"), members).unwrap()
        } else {
            FeatureSet::inline(members).unwrap()
        }
    })
}

pub fn condition() -> impl Strategy<Value = ContextCondition> {
    prop_oneof![
        prop::sample::select(&FORMS[..])
            .prop_map(|w| ContextCondition::word(WordForm::new(w.to_lowercase()).unwrap())),
        (direction(), any::<bool>(), context_set()).prop_map(|(d, careful, set)| {
            ContextCondition::new(
                Position::Neighbour(d),
                careful,
                ContextTest::Features(set),
                None,
            )
            .unwrap()
        }),
        (any::<bool>(), context_set()).prop_map(|(careful, set)| {
            ContextCondition::new(Position::Here, careful, ContextTest::Features(set), None)
                .unwrap()
        }),
        (
            direction(),
            any::<bool>(),
            context_set(),
            prop::option::of(feature_set())
        )
            .prop_map(|(d, careful, set, barrier)| {
                ContextCondition::new(
                    Position::Scan(d),
                    careful,
                    ContextTest::Features(set),
                    barrier.map(|b| FeatureSet::inline(b).unwrap()),
                )
                .unwrap()
            }),
    ]
}

pub fn rule() -> impl Strategy<Value = Rule> {
    (
        feature(),
        prop::collection::vec(condition(), 0..=2),
        prop_oneof![Just(0.0), 0.0f64..1.0, Just(0.25), Just(1e-7)],
    )
        .prop_map(|(target, conds, score)| Rule::new(target, conds, score))
}

pub fn grammar() -> impl Strategy<Value = Grammar> {
    prop::collection::vec(prop::collection::vec(rule(), 0..=4), 1..=3)
        .prop_map(Grammar::from_levels)
}

/// `1 - tail^(1/n)` for `tail = num/den`, by bisection on exact integers:
/// finds the largest `p` with `den * (2^k - p)^n >= num * 2^(k n)`.
pub fn zero_success_bound_oracle(n: u32, num: u64, den: u64) -> f64 {
    const K: u32 = 52;
    let one = BigUint::from(1u8) << K;
    let rhs = BigUint::from(num) * (BigUint::from(1u8) << (K * n));
    let holds = |p: u64| BigUint::from(den) * (&one - BigUint::from(p)).pow(n) >= rhs;
    let (mut lo, mut hi) = (0u64, 1u64 << K);
    while hi - lo > 1 {
        let mid = lo + (hi - lo) / 2;
        if holds(mid) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    lo as f64 / (1u64 << K) as f64
}

/// `s/n + (z_num/z_den) * sqrt(s (n - s) / n^3)`, clamped to 1, with the
/// square root taken on scaled integers.
pub fn normal_bound_oracle(s: u64, n: u64, z_num: u64, z_den: u64) -> f64 {
    const K: u32 = 60;
    let scaled = ((BigUint::from(s) * BigUint::from(n - s)) << (2 * K)) / BigUint::from(n).pow(3);
    let root = scaled.sqrt() * BigUint::from(z_num) / BigUint::from(z_den);
    let frac = (BigUint::from(s) << K) / BigUint::from(n);
    let total = frac + root;
    let v = u128::try_from(&total).unwrap() as f64 / (1u128 << K) as f64;
    v.min(1.0)
}

/// Smallest cardinality of a set hitting every member of `sets`, by
/// enumerating subsets of the universe as bit masks.
pub fn min_hitting_cardinality(sets: &[BTreeSet<Feature>]) -> usize {
    let universe: Vec<&Feature> = sets
        .iter()
        .flatten()
        .collect::<BTreeSet<_>>()
        .into_iter()
        .collect();
    let masks: Vec<u32> = sets
        .iter()
        .map(|s| {
            universe
                .iter()
                .enumerate()
                .filter(|(_, f)| s.contains(**f))
                .fold(0u32, |m, (i, _)| m | (1 << i))
        })
        .collect();
    (0u32..(1 << universe.len()))
        .filter(|h| masks.iter().all(|m| m & h != 0))
        .map(u32::count_ones)
        .min()
        .unwrap_or(0) as usize
}
