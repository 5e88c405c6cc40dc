//! The `cgind` command line: induce, disambiguate, evaluate, stats and
//! generate. Flags override values read from `--config`.

use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Parser, Subcommand, ValueEnum};

use crate::corpus::{parse_corpus, serialize_corpus, Corpus};
use crate::engine::{disambiguate_traced, EngineConfig};
use crate::eval::evaluate;
use crate::grammar::{parse_grammar, serialize_grammar};
use crate::induce::{induce, InduceConfig};
use crate::stats::{collect_stats, dump_counts};
use crate::synth::{Generator, SynthConfig};

#[derive(Debug, Parser)]
#[command(
    name = "cgind",
    version,
    about = "Induce and apply Constraint Grammar REMOVE rules"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ReportFormat {
    Text,
    Json,
    /// One `key=value` line per metric.
    Kv,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Induce a stratified grammar from a gold-marked corpus.
    Induce {
        gold: PathBuf,
        #[arg(short, long)]
        output: PathBuf,
        /// Flat `key = value` configuration file.
        #[arg(long)]
        config: Option<PathBuf>,
        /// Sets all three minimum-count floors.
        #[arg(long)]
        min_count: Option<u64>,
        /// Comma-separated, strictly ascending level thresholds.
        #[arg(long, value_delimiter = ',')]
        thresholds: Option<Vec<f64>>,
    },
    /// Apply a grammar to an ambiguous corpus.
    Disambiguate {
        corpus: PathBuf,
        #[arg(short, long)]
        grammar: PathBuf,
        #[arg(long)]
        max_level: Option<usize>,
        /// Writes one line per rule application to stderr.
        #[arg(long)]
        trace: bool,
        #[arg(short, long)]
        output: Option<PathBuf>,
        #[arg(long, default_value_t = 1)]
        threads: usize,
    },
    /// Compare a disambiguated corpus with its gold reference.
    Evaluate {
        gold: PathBuf,
        output: PathBuf,
        #[arg(long, value_enum, default_value_t = ReportFormat::Text)]
        report: ReportFormat,
    },
    /// Dump the count tables of a gold-marked corpus.
    Stats {
        gold: PathBuf,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Write a synthetic gold-marked ambiguous corpus.
    Generate {
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 10_000)]
        words: usize,
        #[arg(long, default_value_t = 0.8)]
        spurious: f64,
        /// Leave out the lexicon's never-correct readings.
        #[arg(long)]
        no_never_gold: bool,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
}

fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path).with_context(|| format!("cannot read {}", path.display()))
}

fn read_corpus(path: &Path, expect_gold: bool) -> Result<Corpus> {
    parse_corpus(&read(path)?, expect_gold).with_context(|| format!("{}", path.display()))
}

fn emit(path: Option<&Path>, text: &str) -> Result<()> {
    match path {
        Some(p) => fs::write(p, text).with_context(|| format!("cannot write {}", p.display())),
        None => std::io::stdout()
            .write_all(text.as_bytes())
            .context("cannot write to stdout"),
    }
}

/// Builds the induction configuration: defaults, then the file, then flags.
pub fn induce_config(
    file: Option<&Path>,
    min_count: Option<u64>,
    thresholds: Option<Vec<f64>>,
) -> Result<InduceConfig> {
    let mut cfg = match file {
        Some(p) => {
            InduceConfig::from_toml_str(&read(p)?).with_context(|| format!("{}", p.display()))?
        }
        None => InduceConfig::default(),
    };
    if let Some(n) = min_count {
        cfg.stat.min_context_count = n;
        cfg.stat.min_feature_count = n;
        cfg.stat.min_word_count = n;
    }
    if let Some(t) = thresholds {
        cfg.level_thresholds = t;
    }
    cfg.validate()?;
    Ok(cfg)
}

pub fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Induce {
            gold,
            output,
            config,
            min_count,
            thresholds,
        } => {
            let cfg = induce_config(config.as_deref(), min_count, thresholds)?;
            let corpus = read_corpus(&gold, true)?;
            let induction = induce(&corpus, &cfg)?;
            let g = &induction.grammar;
            emit(Some(&output), &serialize_grammar(g))?;
            let mut report = format!("{} rules in {} levels\n", g.rule_count(), g.level_count());
            for (kind, n) in g.count_by_kind() {
                report.push_str(&format!("{}\t{n}\n", kind.name()));
            }
            emit(None, &report)
        }
        Command::Disambiguate {
            corpus,
            grammar,
            max_level,
            trace,
            output,
            threads,
        } => {
            let input = read_corpus(&corpus, false)?;
            let g = parse_grammar(&read(&grammar)?)
                .with_context(|| format!("{}", grammar.display()))?;
            let cfg = EngineConfig {
                max_level,
                trace,
                threads: threads.max(1),
            };
            let (out, events) = disambiguate_traced(&input, &g, &cfg);
            if trace {
                let mut err = std::io::stderr().lock();
                for e in &events {
                    writeln!(err, "{e}")?;
                }
            }
            emit(output.as_deref(), &serialize_corpus(&out, true))
        }
        Command::Evaluate {
            gold,
            output,
            report,
        } => {
            let reference = read_corpus(&gold, true)?;
            let out = read_corpus(&output, false)?;
            let m = evaluate(&reference, &out)?;
            let text = match report {
                ReportFormat::Text => format!("{m}\n"),
                ReportFormat::Json => m.to_json() + "\n",
                ReportFormat::Kv => m.key_values(),
            };
            emit(None, &text)
        }
        Command::Stats { gold, output } => {
            let corpus = read_corpus(&gold, true)?;
            emit(output.as_deref(), &dump_counts(&collect_stats(&corpus)?))
        }
        Command::Generate {
            seed,
            words,
            spurious,
            no_never_gold,
            output,
        } => {
            anyhow::ensure!(
                spurious >= 0.0 && spurious.is_finite(),
                "--spurious must be non-negative"
            );
            let cfg = SynthConfig {
                spurious_per_word: spurious,
                never_gold_readings: !no_never_gold,
                ..Default::default()
            };
            let corpus = Generator::new(seed, cfg).gold_corpus(words);
            emit(output.as_deref(), &serialize_corpus(&corpus, true))
        }
    }
}

/// Parses `args` (program name first), runs, and reports errors on stderr.
pub fn main_with<I, T>(args: I) -> ExitCode
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(2)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
