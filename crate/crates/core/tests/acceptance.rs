//! One PASS/FAIL line per acceptance criterion. Exits nonzero on any failure.

mod common;

use std::collections::BTreeSet;
use std::process::ExitCode;
use std::time::{Duration, Instant};

use cg_induce::abduce::{brute_force_hitting_set, minimal_hitting_set, CandidateSets};
use cg_induce::corpus::{parse_corpus, serialize_corpus, Corpus, Feature};
use cg_induce::engine::{disambiguate, EngineConfig};
use cg_induce::eval::{evaluate, Metrics};
use cg_induce::grammar::{parse_grammar, serialize_grammar, Grammar, RuleKind};
use cg_induce::induce::{induce, InduceConfig};
use cg_induce::stats::{upper_bound, StatConfig};
use cg_induce::synth::{forbidden_bigrams, train_test_split, SynthConfig, EXCLUSIONS};
use proptest::test_runner::{Config, TestCaseError, TestRunner};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const PP_TOLERANCE: f64 = 0.05;
const READINGS_TOLERANCE: f64 = 0.005;
const BOUND_TOLERANCE: f64 = 1e-6;
const GRID_POINTS: usize = 10_000;
const ABDUCTION_BUDGET: Duration = Duration::from_millis(1);
const ORACLE_INSTANCES: usize = 200;
const ORACLE_BUDGET: Duration = Duration::from_secs(5);
const ENGINE_CASES: u32 = 1000;
const ROUNDTRIP_CASES: u32 = 100;
const TRAIN_WORDS: usize = 10_000;
const TEST_WORDS: usize = 2_000;
const SPURIOUS_PER_WORD: f64 = 0.8;
const MIN_RECALL: f64 = 0.99;
const EXPERIMENT_BUDGET: Duration = Duration::from_secs(60);
const EXPERIMENT_SEED: u64 = 2024;

struct Report {
    failures: usize,
}

impl Report {
    fn check(&mut self, id: u32, name: &str, pass: bool, detail: String) {
        if !pass {
            self.failures += 1;
        }
        println!(
            "{} criterion {id}: {name} ({detail})",
            if pass { "PASS" } else { "FAIL" }
        );
    }
}

fn feats(tags: &[&str]) -> BTreeSet<Feature> {
    tags.iter().map(|t| Feature::new(*t).unwrap()).collect()
}

fn metric_arithmetic(r: &mut Report) {
    let m = Metrics::from_counts(9795, 9795, 17683, 6664, 175);
    let checks = [
        (100.0 * m.recall, 98.2, PP_TOLERANCE),
        (100.0 * m.precision, 87.3, PP_TOLERANCE),
        (m.readings_per_word, 1.12, READINGS_TOLERANCE),
        (100.0 * m.recall_ci, 0.3, PP_TOLERANCE),
        (100.0 * m.precision_ci, 0.7, PP_TOLERANCE),
    ];
    let pass = checks
        .iter()
        .all(|(got, want, tol)| (got - want).abs() <= *tol);
    r.check(
        1,
        "metric arithmetic",
        pass,
        format!(
            "recall {:.3} %, precision {:.3} %, readings/word {:.4}, half-widths {:.3} / {:.3}",
            checks[0].0, checks[1].0, checks[2].0, checks[3].0, checks[4].0
        ),
    );
}

fn barrier_example(r: &mut Report) {
    let cs = CandidateSets::new(vec![
        feats(&["ADJ", "N", "PCP2"]),
        feats(&["NUM"]),
        feats(&["N", "ADV"]),
    ])
    .unwrap();
    let start = Instant::now();
    let found = minimal_hitting_set(&cs).unwrap();
    let elapsed = start.elapsed();
    let pass =
        found.barrier == feats(&["N", "NUM"]) && found.cost == 2 && elapsed < ABDUCTION_BUDGET;
    let names: Vec<_> = found.barrier.iter().map(|f| f.as_str()).collect();
    r.check(
        2,
        "barrier abduction example",
        pass,
        format!(
            "barrier ({}), cost {}, {elapsed:?}",
            names.join(" "),
            found.cost
        ),
    );
}

fn bound_numerics(r: &mut Report) {
    let cfg = StatConfig::default();
    let zero = upper_bound(0, 100, &cfg).unwrap();
    let half = upper_bound(50, 100, &cfg).unwrap();
    let zero_oracle = common::zero_success_bound_oracle(100, 1, 40);
    let half_oracle = common::normal_bound_oracle(50, 100, 196, 100);
    let mut pass = (zero - zero_oracle).abs() < BOUND_TOLERANCE
        && (zero - 0.0362167).abs() < BOUND_TOLERANCE
        && (half - half_oracle).abs() < BOUND_TOLERANCE
        && (half - 0.598).abs() < BOUND_TOLERANCE;
    let mut points = 0;
    let mut n = 1u64;
    while points < GRID_POINTS {
        let mut last = f64::NEG_INFINITY;
        for s in 0..=n {
            let b = upper_bound(s, n, &cfg).unwrap();
            pass &= (0.0..=1.0).contains(&b) && b >= last;
            last = b;
            points += 1;
        }
        n += 1;
    }
    r.check(
        3,
        "upper-bound numerics",
        pass,
        format!("ub(0,100) = {zero:.7}, ub(50,100) = {half:.7}, {points} grid points"),
    );
}

fn hitting_set_oracle(r: &mut Report) {
    let mut rng = ChaCha8Rng::seed_from_u64(17);
    let start = Instant::now();
    let mut agree = 0;
    for _ in 0..ORACLE_INSTANCES {
        let universe = rng.gen_range(1..=10);
        let sets = (0..rng.gen_range(1..=8))
            .map(|_| {
                let size = rng.gen_range(1..=universe.min(4));
                (0..size)
                    .map(|_| Feature::new(format!("F{}", rng.gen_range(0..universe))).unwrap())
                    .collect()
            })
            .collect();
        let cs = CandidateSets::new(sets).unwrap();
        let found = minimal_hitting_set(&cs).unwrap();
        let brute = brute_force_hitting_set(&cs).unwrap();
        if found.cost == brute.len() && cs.is_hit_by(&found.barrier) && cs.is_hit_by(&brute) {
            agree += 1;
        }
    }
    let elapsed = start.elapsed();
    r.check(
        4,
        "hitting-set oracle equivalence",
        agree == ORACLE_INSTANCES && elapsed < ORACLE_BUDGET,
        format!("{agree}/{ORACLE_INSTANCES} agree, {elapsed:?}"),
    );
}

fn engine_invariants(r: &mut Report) {
    let mut runner = TestRunner::new(Config {
        cases: ENGINE_CASES,
        failure_persistence: None,
        ..Config::default()
    });
    let result = runner.run(&(common::corpus(), common::grammar()), |(c, g)| {
        let all = EngineConfig::default();
        let out = disambiguate(&c, &g, &all);
        let check = |ok: bool, what: &str| {
            if ok {
                Ok(())
            } else {
                Err(TestCaseError::fail(what.to_string()))
            }
        };
        check(
            out.cohorts().all(|k| !k.readings().is_empty()),
            "empty cohort",
        )?;
        check(
            out.cohorts()
                .zip(c.cohorts())
                .all(|(o, i)| o.readings().iter().all(|x| i.readings().contains(x))),
            "output not within input",
        )?;
        check(disambiguate(&out, &g, &all) == out, "not idempotent")?;
        let mut prev = reading_counts(&c);
        for k in 1..=g.level_count() {
            let now = reading_counts(&disambiguate(
                &c,
                &g,
                &EngineConfig {
                    max_level: Some(k),
                    ..all.clone()
                },
            ));
            check(
                now.iter().zip(&prev).all(|(a, b)| a <= b),
                "level escalation added readings",
            )?;
            prev = now;
        }
        Ok(())
    });
    let text = "\"<the>\"\n\t\"the\" DET\n\"<run>\"\n\t\"run\" V INF\n";
    let c = parse_corpus(text, false).unwrap();
    let out = disambiguate(
        &c,
        &parse_grammar("REMOVE (V) (-1C (DET)) ;").unwrap(),
        &EngineConfig::default(),
    );
    let last_reading = serialize_corpus(&out, false) == text;
    r.check(
        5,
        "engine invariant suite",
        result.is_ok() && last_reading,
        match &result {
            Ok(()) => {
                format!("{ENGINE_CASES} random cases, last-reading case unchanged: {last_reading}")
            }
            Err(e) => format!("{e}"),
        },
    );
}

fn reading_counts(c: &Corpus) -> Vec<usize> {
    c.cohorts().map(|k| k.readings().len()).collect()
}

fn roundtrips(r: &mut Report) {
    let config = Config {
        cases: ROUNDTRIP_CASES,
        failure_persistence: None,
        ..Config::default()
    };
    let corpora = TestRunner::new(config.clone()).run(&common::corpus(), |c| {
        let back = parse_corpus(&serialize_corpus(&c, true), false)
            .map_err(|e| TestCaseError::fail(e.to_string()))?;
        proptest::prop_assert_eq!(back, c);
        Ok(())
    });
    let grammars = TestRunner::new(config).run(&common::grammar(), |g| {
        let back: Grammar = parse_grammar(&serialize_grammar(&g))
            .map_err(|e| TestCaseError::fail(e.to_string()))?;
        proptest::prop_assert_eq!(back, g);
        Ok(())
    });
    r.check(
        6,
        "corpus and grammar round-trips",
        corpora.is_ok() && grammars.is_ok(),
        format!(
            "{ROUNDTRIP_CASES} cases each: corpus {:?}, grammar {:?}",
            corpora.is_ok(),
            grammars.is_ok()
        ),
    );
}

fn experiment(r: &mut Report) -> (Corpus, Grammar) {
    let start = Instant::now();
    let synth = SynthConfig {
        spurious_per_word: SPURIOUS_PER_WORD,
        ..Default::default()
    };
    let (train, test) = train_test_split(EXPERIMENT_SEED, synth, TRAIN_WORDS, TEST_WORDS);
    let grammar = induce(&train, &InduceConfig::default()).unwrap().grammar;
    let out = disambiguate(&test.without_gold(), &grammar, &EngineConfig::default());
    let m = evaluate(&test, &out).unwrap();
    let elapsed = start.elapsed();

    let baseline = test.gold_count() as f64 / test.reading_count() as f64;
    let spurious = (train.reading_count() - train.gold_count()) as f64 / train.word_count() as f64;
    let kinds = grammar.count_by_kind();
    let pass = train.word_count() == TRAIN_WORDS
        && test.word_count() == TEST_WORDS
        && forbidden_bigrams().len() >= 5
        && EXCLUSIONS.len() >= 2
        && (spurious - SPURIOUS_PER_WORD).abs() < 1e-9
        && m.recall >= MIN_RECALL
        && m.precision > baseline
        && RuleKind::ALL.iter().all(|k| kinds[k] >= 1)
        && elapsed < EXPERIMENT_BUDGET;
    let counts: Vec<String> = kinds
        .iter()
        .map(|(k, n)| format!("{} {n}", k.name()))
        .collect();
    r.check(
        7,
        "end-to-end synthetic experiment",
        pass,
        format!(
            "recall {:.2} %, precision {:.2} % vs baseline {:.2} %, rules: {}, {elapsed:.2?}",
            100.0 * m.recall,
            100.0 * m.precision,
            100.0 * baseline,
            counts.join(", ")
        ),
    );
    (train, grammar)
}

fn training_safety(r: &mut Report, train: &Corpus, grammar: &Grammar) {
    let barriers: Vec<_> = grammar
        .rules()
        .filter(|(_, r)| r.kind() == RuleKind::Barrier)
        .map(|(_, r)| r.clone())
        .collect();
    let removed_by = |g: &Grammar| {
        train.gold_count() - disambiguate(train, g, &EngineConfig::default()).gold_count()
    };
    let together = removed_by(&Grammar::from_levels(vec![barriers.clone()]));
    let single: usize = barriers
        .iter()
        .map(|b| removed_by(&Grammar::from_levels(vec![vec![b.clone()]])))
        .sum();
    r.check(
        8,
        "barrier rules keep all training gold",
        !barriers.is_empty() && together == 0 && single == 0,
        format!(
            "{} barrier rules, gold removed together {together}, one at a time {single}",
            barriers.len()
        ),
    );
}

fn main() -> ExitCode {
    let mut r = Report { failures: 0 };
    metric_arithmetic(&mut r);
    barrier_example(&mut r);
    bound_numerics(&mut r);
    hitting_set_oracle(&mut r);
    engine_invariants(&mut r);
    roundtrips(&mut r);
    let (train, grammar) = experiment(&mut r);
    training_safety(&mut r, &train, &grammar);
    if r.failures == 0 {
        println!("all acceptance criteria met");
        ExitCode::SUCCESS
    } else {
        println!("{} acceptance criteria failed", r.failures);
        ExitCode::FAILURE
    }
}
