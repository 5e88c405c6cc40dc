//! Seeded generator of gold-annotated ambiguous corpora.
//!
//! Gold class sequences come from a word-class bigram model with forbidden
//! transitions and long-distance exclusions. Words are drawn from a small
//! English-like lexicon whose homographs supply natural ambiguity; an
//! injector then adds random spurious readings up to a target rate.

use std::collections::BTreeMap;
use std::fmt;

use rand::distributions::{Distribution, WeightedIndex};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::corpus::{BaseForm, Cohort, Corpus, Feature, Reading, Sentence, WordForm};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Class {
    Det,
    Adj,
    Noun,
    Num,
    Pron,
    Verb,
    Prep,
    Adv,
    Conj,
}

impl Class {
    pub const ALL: [Class; 9] = [
        Class::Det,
        Class::Adj,
        Class::Noun,
        Class::Num,
        Class::Pron,
        Class::Verb,
        Class::Prep,
        Class::Adv,
        Class::Conj,
    ];

    /// Leading feature of every reading of this class.
    pub fn tag(self) -> &'static str {
        match self {
            Class::Det => "DET",
            Class::Adj => "ADJ",
            Class::Noun => "N",
            Class::Num => "NUM",
            Class::Pron => "PRON",
            Class::Verb => "V",
            Class::Prep => "PREP",
            Class::Adv => "ADV",
            Class::Conj => "CC",
        }
    }

    pub fn of_reading(r: &Reading) -> Option<Class> {
        let first = r.features().first()?.as_str();
        Class::ALL.into_iter().find(|c| c.tag() == first)
    }

    fn index(self) -> usize {
        self as usize
    }
}

impl fmt::Display for Class {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.tag())
    }
}

const END: usize = Class::ALL.len();

use Class::*;

/// Unnormalised transition weights; the last column is end of sentence.
const START_WEIGHTS: [f64; 10] = [4.0, 0.5, 2.0, 0.5, 3.0, 0.0, 1.5, 1.0, 0.0, 0.0];
const TRANSITIONS: [[f64; 10]; 9] = [
    //  Det  Adj  Noun Num  Pron Verb Prep Adv  Conj END
    [0.0, 3.0, 6.0, 1.0, 0.0, 0.0, 0.0, 0.7, 0.0, 0.0], // Det
    [0.0, 1.0, 6.0, 0.0, 0.0, 0.0, 1.0, 0.0, 1.0, 1.0], // Adj
    [0.0, 0.0, 0.0, 0.0, 0.0, 5.0, 2.0, 0.5, 1.0, 2.5], // Noun
    [0.0, 0.5, 4.0, 0.0, 0.0, 1.0, 0.5, 0.0, 0.0, 1.0], // Num
    [0.0, 0.0, 0.0, 0.0, 0.0, 6.0, 0.5, 1.0, 0.0, 0.5], // Pron
    [4.0, 1.0, 1.5, 0.5, 1.5, 0.0, 2.0, 1.5, 0.5, 2.0], // Verb
    [4.0, 0.5, 2.0, 1.0, 1.5, 0.0, 0.0, 0.3, 0.0, 0.0], // Prep
    [0.5, 2.0, 0.0, 0.0, 0.0, 3.0, 0.5, 0.3, 0.0, 1.0], // Adv
    [3.0, 1.0, 1.0, 0.5, 2.0, 1.0, 0.0, 0.0, 0.0, 0.0], // Conj
];

/// Class pairs that never occur adjacently in generated gold text.
pub fn forbidden_bigrams() -> Vec<(Class, Class)> {
    let mut out = Vec::new();
    for a in Class::ALL {
        for b in Class::ALL {
            if TRANSITIONS[a.index()][b.index()] == 0.0 {
                out.push((a, b));
            }
        }
    }
    out
}

/// After `trigger`, no `blocked` class occurs until one of `release`; the
/// sentence cannot end in between.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Exclusion {
    pub trigger: Class,
    pub blocked: Class,
    pub release: &'static [Class],
}

const HEADS: &[Class] = &[Noun, Num, Pron];

pub const EXCLUSIONS: [Exclusion; 2] = [
    Exclusion {
        trigger: Det,
        blocked: Verb,
        release: HEADS,
    },
    Exclusion {
        trigger: Prep,
        blocked: Verb,
        release: HEADS,
    },
];

const LEXICON: &[(Class, &str, &[&str])] = &[
    (Det, "the", &["DET"]),
    (Det, "a", &["DET"]),
    (Det, "this", &["DET"]),
    (Det, "that", &["DET"]),
    (Det, "every", &["DET"]),
    (Adj, "big", &["ADJ"]),
    (Adj, "small", &["ADJ"]),
    (Adj, "old", &["ADJ"]),
    (Adj, "red", &["ADJ"]),
    (Adj, "fast", &["ADJ"]),
    (Adj, "round", &["ADJ"]),
    (Adj, "open", &["ADJ"]),
    (Noun, "table", &["N", "SG"]),
    (Noun, "house", &["N", "SG"]),
    (Noun, "man", &["N", "SG"]),
    (Noun, "dog", &["N", "SG"]),
    (Noun, "city", &["N", "SG"]),
    (Noun, "run", &["N", "SG"]),
    (Noun, "walk", &["N", "SG"]),
    (Noun, "one", &["N", "SG"]),
    (Noun, "houses", &["N", "PL"]),
    (Noun, "dogs", &["N", "PL"]),
    (Noun, "books", &["N", "PL"]),
    (Noun, "runs", &["N", "PL"]),
    (Noun, "walks", &["N", "PL"]),
    (Num, "two", &["NUM"]),
    (Num, "three", &["NUM"]),
    (Num, "ten", &["NUM"]),
    (Num, "one", &["NUM"]),
    (Pron, "he", &["PRON"]),
    (Pron, "she", &["PRON"]),
    (Pron, "they", &["PRON"]),
    (Pron, "it", &["PRON"]),
    (Pron, "that", &["PRON"]),
    (Pron, "one", &["PRON"]),
    (Verb, "runs", &["V", "VFIN", "PRES"]),
    (Verb, "walks", &["V", "VFIN", "PRES"]),
    (Verb, "sees", &["V", "VFIN", "PRES"]),
    (Verb, "takes", &["V", "VFIN", "PRES"]),
    (Verb, "run", &["V", "VFIN", "PRES"]),
    (Verb, "walk", &["V", "VFIN", "PRES"]),
    (Verb, "open", &["V", "VFIN", "PRES"]),
    (Verb, "ran", &["V", "VFIN", "PAST"]),
    (Verb, "saw", &["V", "VFIN", "PAST"]),
    (Verb, "took", &["V", "VFIN", "PAST"]),
    (Verb, "opened", &["V", "VFIN", "PAST"]),
    (Prep, "in", &["PREP"]),
    (Prep, "on", &["PREP"]),
    (Prep, "with", &["PREP"]),
    (Prep, "from", &["PREP"]),
    (Prep, "round", &["PREP"]),
    (Prep, "over", &["PREP"]),
    (Adv, "often", &["ADV"]),
    (Adv, "very", &["ADV"]),
    (Adv, "now", &["ADV"]),
    (Adv, "fast", &["ADV"]),
    (Adv, "round", &["ADV"]),
    (Adv, "over", &["ADV"]),
    (Conj, "and", &["CC"]),
    (Conj, "but", &["CC"]),
    (Conj, "or", &["CC"]),
];

/// Readings listed in the lexicon but never correct in generated text.
const NEVER_GOLD: &[(&str, &[&str])] = &[
    ("table", &["V", "VFIN", "PRES"]),
    ("house", &["V", "VFIN", "PRES"]),
];
const NEVER_GOLD_VERB_READING: &[&str] = &["V", "SUBJUNCTIVE"];

/// Readings the injector draws from.
const NOISE: &[&[&str]] = &[
    &["DET"],
    &["ADJ"],
    &["N", "SG"],
    &["N", "PL"],
    &["NUM"],
    &["PRON"],
    &["V", "VFIN", "PRES"],
    &["V", "VFIN", "PAST"],
    &["PREP"],
    &["ADV"],
    &["CC"],
];

#[derive(Debug, Clone, PartialEq)]
pub struct SynthConfig {
    /// Average number of non-gold readings per word after injection. Never
    /// lowered below the lexicon's own ambiguity.
    pub spurious_per_word: f64,
    /// Sentences end at the first opportunity after this many words.
    pub max_sentence_len: usize,
    /// Adds the lexicon's never-correct readings, which give rise to
    /// lexical and rare-feature rules.
    pub never_gold_readings: bool,
}

impl Default for SynthConfig {
    fn default() -> Self {
        SynthConfig {
            spurious_per_word: 0.8,
            max_sentence_len: 25,
            never_gold_readings: true,
        }
    }
}

fn features(tags: &[&str]) -> Vec<Feature> {
    tags.iter()
        .map(|t| Feature::new(*t).expect("lexicon tags are valid features"))
        .collect()
}

pub struct Generator {
    rng: ChaCha8Rng,
    cfg: SynthConfig,
    words_by_class: BTreeMap<Class, Vec<(&'static str, &'static [&'static str])>>,
    analyses: BTreeMap<&'static str, Vec<Vec<&'static str>>>,
}

impl Generator {
    pub fn new(seed: u64, cfg: SynthConfig) -> Self {
        let mut words_by_class: BTreeMap<Class, Vec<_>> = BTreeMap::new();
        let mut analyses: BTreeMap<&str, Vec<Vec<&str>>> = BTreeMap::new();
        for &(class, form, tags) in LEXICON {
            words_by_class.entry(class).or_default().push((form, tags));
            analyses.entry(form).or_default().push(tags.to_vec());
        }
        if cfg.never_gold_readings {
            for &(form, tags) in NEVER_GOLD {
                analyses.entry(form).or_default().push(tags.to_vec());
            }
            for &(form, _) in &words_by_class[&Verb] {
                analyses
                    .entry(form)
                    .or_default()
                    .push(NEVER_GOLD_VERB_READING.to_vec());
            }
        }
        Generator {
            rng: ChaCha8Rng::seed_from_u64(seed),
            cfg,
            words_by_class,
            analyses,
        }
    }

    /// One gold class sequence obeying the bigram model and exclusions.
    pub fn class_sequence(&mut self) -> Vec<Class> {
        let mut seq: Vec<Class> = Vec::new();
        let mut active: Vec<Exclusion> = Vec::new();
        loop {
            let row = match seq.last() {
                None => &START_WEIGHTS,
                Some(c) => &TRANSITIONS[c.index()],
            };
            let mut weights = *row;
            for ex in &active {
                weights[ex.blocked.index()] = 0.0;
            }
            if !active.is_empty() || seq.is_empty() {
                weights[END] = 0.0;
            } else if seq.len() >= self.cfg.max_sentence_len && weights[END] > 0.0 {
                break;
            }
            let pick = WeightedIndex::new(weights)
                .expect("every state keeps a positive transition")
                .sample(&mut self.rng);
            if pick == END {
                break;
            }
            let class = Class::ALL[pick];
            active.retain(|ex| !ex.release.contains(&class));
            for ex in EXCLUSIONS {
                if ex.trigger == class && !active.contains(&ex) {
                    active.push(ex);
                }
            }
            seq.push(class);
        }
        seq
    }

    fn cohort(&mut self, class: Class, initial: bool) -> Cohort {
        let words = &self.words_by_class[&class];
        let (form, gold_tags) = words[self.rng.gen_range(0..words.len())];
        let base = BaseForm::new(form).expect("lexicon forms are valid");
        let surface = if initial {
            let mut chars = form.chars();
            chars
                .next()
                .map(|c| c.to_uppercase().chain(chars).collect())
                .unwrap_or_default()
        } else {
            form.to_string()
        };
        let readings = self.analyses[form]
            .iter()
            .map(|tags| {
                Reading::new(base.clone(), features(tags), tags.as_slice() == gold_tags)
                    .expect("lexicon analyses are valid")
            })
            .collect();
        Cohort::new(WordForm::new(surface).expect("valid form"), readings).expect("non-empty")
    }

    /// Adds random noise readings until the corpus averages the configured
    /// number of spurious readings per word.
    fn inject(&mut self, sentences: &mut [Vec<Cohort>]) {
        let words: usize = sentences.iter().map(Vec::len).sum();
        let readings: usize = sentences.iter().flatten().map(|c| c.readings().len()).sum();
        let target = (self.cfg.spurious_per_word * words as f64).round() as usize;
        let mut missing = (target + words).saturating_sub(readings);
        let positions: Vec<(usize, usize)> = sentences
            .iter()
            .enumerate()
            .flat_map(|(s, c)| (0..c.len()).map(move |i| (s, i)))
            .collect();
        while missing > 0 && !positions.is_empty() {
            let (s, i) = positions[self.rng.gen_range(0..positions.len())];
            let tags = features(NOISE[self.rng.gen_range(0..NOISE.len())]);
            let cohort = &sentences[s][i];
            if cohort
                .readings()
                .iter()
                .any(|r| r.features() == tags.as_slice())
            {
                continue;
            }
            let base = cohort.readings()[0].base().clone();
            let mut readings = cohort.readings().to_vec();
            readings.push(Reading::new(base, tags, false).expect("noise readings are valid"));
            sentences[s][i] = Cohort::new(cohort.form().clone(), readings).expect("non-empty");
            missing -= 1;
        }
    }

    /// A gold-marked ambiguous corpus of exactly `words` words. The last
    /// sentence is cut short if needed.
    pub fn gold_corpus(&mut self, words: usize) -> Corpus {
        let mut sentences: Vec<Vec<Cohort>> = Vec::new();
        let mut total = 0;
        while total < words {
            let mut classes = self.class_sequence();
            classes.truncate(words - total);
            total += classes.len();
            let cohorts = classes
                .iter()
                .enumerate()
                .map(|(i, &c)| self.cohort(c, i == 0))
                .collect();
            sentences.push(cohorts);
        }
        self.inject(&mut sentences);
        Corpus::new(
            sentences
                .into_iter()
                .map(|c| Sentence::new(c).expect("non-empty sentence"))
                .collect(),
        )
    }
}

/// Gold training and held-out corpora drawn from one seeded stream.
pub fn train_test_split(
    seed: u64,
    cfg: SynthConfig,
    train: usize,
    test: usize,
) -> (Corpus, Corpus) {
    let mut g = Generator::new(seed, cfg);
    let a = g.gold_corpus(train);
    let b = g.gold_corpus(test);
    (a, b)
}
