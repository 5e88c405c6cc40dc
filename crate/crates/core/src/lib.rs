//! Unsupervised induction of Constraint Grammar REMOVE rules from a
//! hand-disambiguated corpus, and a stratified engine to apply them.
//!
//! The pipeline is [`stats::collect_stats`] → [`induce::induce`] →
//! [`engine::disambiguate`] → [`eval::evaluate`]:
//!
//! ```
//! use cg_induce::{engine, eval, induce, synth};
//!
//! let (train, test) = synth::train_test_split(1, Default::default(), 3_000, 500);
//! let cfg = induce::InduceConfig {
//!     stat: cg_induce::stats::StatConfig {
//!         min_context_count: 30,
//!         min_feature_count: 30,
//!         min_word_count: 30,
//!         ..Default::default()
//!     },
//!     ..Default::default()
//! };
//! let grammar = induce::induce(&train, &cfg).unwrap().grammar;
//! let out = engine::disambiguate(&test.without_gold(), &grammar, &Default::default());
//! let m = eval::evaluate(&test, &out).unwrap();
//! assert!(m.precision > test.gold_count() as f64 / test.reading_count() as f64);
//! ```
//!
//! Text formats live with their modules: corpora in [`corpus`], grammars in
//! [`grammar`], count dumps in [`stats`], traces in [`engine`].

pub mod abduce;
pub mod cli;
pub mod corpus;
pub mod engine;
pub mod eval;
pub mod grammar;
pub mod induce;
pub mod stats;
pub mod synth;
