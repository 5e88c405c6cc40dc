//! Morphologically analysed corpora: tags, readings, cohorts and sentences,
//! plus the line-oriented text format used to store them.
//!
//! ```text
//! "<campaign>"
//! 	"campaign" <SV> <P/for> V INF
//! 	"campaign" N NOM SG @CORRECT
//! ```
//!
//! A word-form line starts at column 0, each reading sits on its own line
//! behind a single tab, a blank line closes the sentence and `#` at column 0
//! starts a comment line. The trailing `@CORRECT` token marks a gold reading.

#![allow(clippy::tabs_in_doc_comments)]

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use thiserror::Error;

/// Token appended to a reading line to mark it as the correct analysis.
pub const GOLD_MARKER: &str = "@CORRECT";

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum TagError {
    #[error("empty tag")]
    Empty,
    #[error("tag `{0}` contains whitespace")]
    Whitespace(String),
    #[error("malformed tag quoting in `{0}`")]
    Quoting(String),
    #[error("`{0}` is not a valid feature tag")]
    InvalidFeature(String),
}

/// An atomic morphological feature such as `V`, `DET` or `<SV>`.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Feature(String);

impl Feature {
    /// Features may not contain whitespace, quotes, parentheses or `;`, may
    /// not start with `#`, and may not be the gold marker.
    pub fn new(text: impl Into<String>) -> Result<Self, TagError> {
        let text = text.into();
        if text.is_empty() {
            return Err(TagError::Empty);
        }
        if text.chars().any(char::is_whitespace) {
            return Err(TagError::Whitespace(text));
        }
        if text.contains('"') {
            return Err(TagError::Quoting(text));
        }
        if text.contains(['(', ')', ';']) || text.starts_with('#') || text == GOLD_MARKER {
            return Err(TagError::InvalidFeature(text));
        }
        Ok(Feature(text))
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for Feature {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

/// The surface form of a token, stored without its `"<` `>"` quoting.
///
/// Equality is verbatim; [`WordForm::matches`] and [`WordForm::key`] give the
/// case-insensitive comparison used by rules and statistics.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct WordForm(String);

impl WordForm {
    pub fn new(text: impl Into<String>) -> Result<Self, TagError> {
        let text = text.into();
        if text.is_empty() {
            return Err(TagError::Empty);
        }
        if text.chars().any(char::is_whitespace) {
            return Err(TagError::Whitespace(text));
        }
        if text.contains('"') {
            return Err(TagError::Quoting(text));
        }
        Ok(WordForm(text))
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }

    /// ASCII-lowercased form, locale independent.
    pub fn key(&self) -> String {
        self.0.to_ascii_lowercase()
    }

    pub fn matches(&self, other: &WordForm) -> bool {
        self.0.eq_ignore_ascii_case(&other.0)
    }
}

impl fmt::Display for WordForm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "\"<{}>\"", self.0)
    }
}

/// A lemma, stored without its surrounding quotes.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct BaseForm(String);

impl BaseForm {
    pub fn new(text: impl Into<String>) -> Result<Self, TagError> {
        let text = text.into();
        if text.is_empty() {
            return Err(TagError::Empty);
        }
        if text.chars().any(char::is_whitespace) {
            return Err(TagError::Whitespace(text));
        }
        if text.contains('"') || (text.starts_with('<') && text.ends_with('>')) {
            return Err(TagError::Quoting(text));
        }
        Ok(BaseForm(text))
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for BaseForm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "\"{}\"", self.0)
    }
}

/// Any tag as it appears in a corpus line, classified by its quoting.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Tag {
    WordForm(WordForm),
    BaseForm(BaseForm),
    Feature(Feature),
}

impl Tag {
    pub fn parse(text: &str) -> Result<Tag, TagError> {
        if text.is_empty() {
            return Err(TagError::Empty);
        }
        if let Some(rest) = text.strip_prefix('"') {
            let inner = rest
                .strip_suffix('"')
                .ok_or_else(|| TagError::Quoting(text.to_string()))?;
            if let Some(form) = inner.strip_prefix('<').and_then(|s| s.strip_suffix('>')) {
                return WordForm::new(form).map(Tag::WordForm);
            }
            return BaseForm::new(inner).map(Tag::BaseForm);
        }
        Feature::new(text).map(Tag::Feature)
    }
}

impl fmt::Display for Tag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Tag::WordForm(w) => w.fmt(f),
            Tag::BaseForm(b) => b.fmt(f),
            Tag::Feature(x) => x.fmt(f),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ReadingError {
    #[error("reading has no features")]
    NoFeatures,
    #[error("feature `{0}` occurs twice in one reading")]
    DuplicateFeature(Feature),
    #[error("cohort has no readings")]
    NoReadings,
    #[error("sentence has no cohorts")]
    EmptySentence,
}

/// One candidate analysis: a base form plus its feature tags in order.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Reading {
    base: BaseForm,
    features: Vec<Feature>,
    gold: bool,
}

impl Reading {
    pub fn new(base: BaseForm, features: Vec<Feature>, gold: bool) -> Result<Self, ReadingError> {
        if features.is_empty() {
            return Err(ReadingError::NoFeatures);
        }
        let mut seen = BTreeSet::new();
        for f in &features {
            if !seen.insert(f) {
                return Err(ReadingError::DuplicateFeature(f.clone()));
            }
        }
        Ok(Reading {
            base,
            features,
            gold,
        })
    }

    pub fn base(&self) -> &BaseForm {
        &self.base
    }

    pub fn features(&self) -> &[Feature] {
        &self.features
    }

    pub fn is_gold(&self) -> bool {
        self.gold
    }

    pub fn set_gold(&mut self, gold: bool) {
        self.gold = gold;
    }

    pub fn has(&self, feature: &Feature) -> bool {
        self.features.iter().any(|f| f == feature)
    }

    pub fn has_any(&self, set: &BTreeSet<Feature>) -> bool {
        self.features.iter().any(|f| set.contains(f))
    }

    /// Same analysis regardless of gold marking.
    pub fn same_analysis(&self, other: &Reading) -> bool {
        self.base == other.base && self.features == other.features
    }
}

/// A token with all of its remaining readings. Never empty.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Cohort {
    form: WordForm,
    readings: Vec<Reading>,
}

impl Cohort {
    pub fn new(form: WordForm, readings: Vec<Reading>) -> Result<Self, ReadingError> {
        if readings.is_empty() {
            return Err(ReadingError::NoReadings);
        }
        Ok(Cohort { form, readings })
    }

    pub fn form(&self) -> &WordForm {
        &self.form
    }

    pub fn readings(&self) -> &[Reading] {
        &self.readings
    }

    pub fn has_gold(&self) -> bool {
        self.readings.iter().any(Reading::is_gold)
    }

    /// Union of the features of every gold reading.
    pub fn gold_features(&self) -> BTreeSet<&Feature> {
        self.readings
            .iter()
            .filter(|r| r.gold)
            .flat_map(|r| r.features.iter())
            .collect()
    }

    /// Union of the features of every reading.
    pub fn proposed_features(&self) -> BTreeSet<&Feature> {
        self.readings
            .iter()
            .flat_map(|r| r.features.iter())
            .collect()
    }

    /// Drops the readings selected by `remove`, unless that would leave the
    /// cohort empty. Returns the number of readings removed.
    pub(crate) fn remove_where(&mut self, mut remove: impl FnMut(&Reading) -> bool) -> usize {
        let doomed = self.readings.iter().filter(|r| remove(r)).count();
        if doomed == 0 || doomed == self.readings.len() {
            return 0;
        }
        self.readings.retain(|r| !remove(r));
        doomed
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Sentence {
    cohorts: Vec<Cohort>,
}

impl Sentence {
    pub fn new(cohorts: Vec<Cohort>) -> Result<Self, ReadingError> {
        if cohorts.is_empty() {
            return Err(ReadingError::EmptySentence);
        }
        Ok(Sentence { cohorts })
    }

    pub fn cohorts(&self) -> &[Cohort] {
        &self.cohorts
    }

    pub fn len(&self) -> usize {
        self.cohorts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cohorts.is_empty()
    }

    pub(crate) fn cohorts_mut(&mut self) -> &mut [Cohort] {
        &mut self.cohorts
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Hash)]
pub struct Corpus {
    pub sentences: Vec<Sentence>,
}

impl Corpus {
    pub fn new(sentences: Vec<Sentence>) -> Self {
        Corpus { sentences }
    }

    pub fn is_empty(&self) -> bool {
        self.sentences.is_empty()
    }

    pub fn word_count(&self) -> usize {
        self.sentences.iter().map(Sentence::len).sum()
    }

    pub fn reading_count(&self) -> usize {
        self.cohorts().map(|c| c.readings.len()).sum()
    }

    pub fn gold_count(&self) -> usize {
        self.cohorts()
            .map(|c| c.readings.iter().filter(|r| r.gold).count())
            .sum()
    }

    pub fn cohorts(&self) -> impl Iterator<Item = &Cohort> {
        self.sentences.iter().flat_map(|s| s.cohorts.iter())
    }

    pub fn is_gold(&self) -> bool {
        self.cohorts().all(Cohort::has_gold)
    }

    /// Copy with gold markers cleared, as seen by a disambiguator.
    pub fn without_gold(&self) -> Corpus {
        let mut out = self.clone();
        for s in &mut out.sentences {
            for c in &mut s.cohorts {
                for r in &mut c.readings {
                    r.gold = false;
                }
            }
        }
        out
    }

    /// Copy keeping only gold readings; cohorts without a gold reading are
    /// left untouched.
    pub fn gold_only(&self) -> Corpus {
        let mut out = self.clone();
        for s in &mut out.sentences {
            for c in &mut s.cohorts {
                if c.has_gold() {
                    c.readings.retain(|r| r.gold);
                }
            }
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CorpusErrorKind {
    #[error("reading line before any word-form line")]
    OrphanReading,
    #[error("cohort {0} has no readings")]
    EmptyCohort(String),
    #[error("cohort {0} has no gold reading")]
    MissingGold(String),
    #[error("expected a base form, found `{0}`")]
    ExpectedBaseForm(String),
    #[error("expected a word-form line, found `{0}`")]
    ExpectedWordForm(String),
    #[error("gold marker must be the last token")]
    MisplacedMarker,
    #[error(transparent)]
    Tag(#[from] TagError),
    #[error(transparent)]
    Reading(#[from] ReadingError),
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("line {line}: {kind}")]
pub struct CorpusError {
    pub line: usize,
    pub kind: CorpusErrorKind,
}

fn err(line: usize, kind: impl Into<CorpusErrorKind>) -> CorpusError {
    CorpusError {
        line,
        kind: kind.into(),
    }
}

struct PendingCohort {
    line: usize,
    form: WordForm,
    readings: Vec<Reading>,
}

#[derive(Default)]
struct CorpusBuilder {
    expect_gold: bool,
    sentences: Vec<Sentence>,
    cohorts: Vec<Cohort>,
    pending: Option<PendingCohort>,
}

impl CorpusBuilder {
    fn close_cohort(&mut self) -> Result<(), CorpusError> {
        if let Some(p) = self.pending.take() {
            if p.readings.is_empty() {
                return Err(err(
                    p.line,
                    CorpusErrorKind::EmptyCohort(p.form.to_string()),
                ));
            }
            if self.expect_gold && !p.readings.iter().any(Reading::is_gold) {
                return Err(err(
                    p.line,
                    CorpusErrorKind::MissingGold(p.form.to_string()),
                ));
            }
            let line = p.line;
            let cohort = Cohort::new(p.form, p.readings).map_err(|e| err(line, e))?;
            self.cohorts.push(cohort);
        }
        Ok(())
    }

    fn close_sentence(&mut self) -> Result<(), CorpusError> {
        self.close_cohort()?;
        if !self.cohorts.is_empty() {
            let cohorts = std::mem::take(&mut self.cohorts);
            self.sentences.push(Sentence { cohorts });
        }
        Ok(())
    }
}

fn parse_reading(body: &str, line: usize) -> Result<Reading, CorpusError> {
    let mut tokens: Vec<&str> = body.split_whitespace().collect();
    let gold = tokens.last() == Some(&GOLD_MARKER);
    if gold {
        tokens.pop();
    }
    if tokens.contains(&GOLD_MARKER) {
        return Err(err(line, CorpusErrorKind::MisplacedMarker));
    }
    let (first, rest) = tokens
        .split_first()
        .ok_or_else(|| err(line, ReadingError::NoFeatures))?;
    let base = match Tag::parse(first).map_err(|e| err(line, e))? {
        Tag::BaseForm(b) => b,
        _ => {
            return Err(err(
                line,
                CorpusErrorKind::ExpectedBaseForm(first.to_string()),
            ))
        }
    };
    let features = rest
        .iter()
        .map(|t| match Tag::parse(t) {
            Ok(Tag::Feature(f)) => Ok(f),
            Ok(_) => Err(err(line, TagError::InvalidFeature(t.to_string()))),
            Err(e) => Err(err(line, e)),
        })
        .collect::<Result<Vec<_>, _>>()?;
    Reading::new(base, features, gold).map_err(|e| err(line, e))
}

/// Parses the corpus text format. With `expect_gold`, every cohort must carry
/// at least one `@CORRECT` reading; gold markers are recorded either way.
pub fn parse_corpus(text: &str, expect_gold: bool) -> Result<Corpus, CorpusError> {
    let mut b = CorpusBuilder {
        expect_gold,
        ..Default::default()
    };
    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        if raw.starts_with('#') {
            continue;
        }
        if raw.trim().is_empty() {
            b.close_sentence()?;
            continue;
        }
        if raw.starts_with(char::is_whitespace) {
            let reading = parse_reading(raw, line)?;
            match b.pending.as_mut() {
                Some(p) => p.readings.push(reading),
                None => return Err(err(line, CorpusErrorKind::OrphanReading)),
            }
            continue;
        }
        let form = match Tag::parse(raw.trim_end()).map_err(|e| err(line, e))? {
            Tag::WordForm(w) => w,
            _ => {
                return Err(err(
                    line,
                    CorpusErrorKind::ExpectedWordForm(raw.to_string()),
                ))
            }
        };
        b.close_cohort()?;
        b.pending = Some(PendingCohort {
            line,
            form,
            readings: Vec::new(),
        });
    }
    b.close_sentence()?;
    Ok(Corpus::new(b.sentences))
}

/// Canonical text form; `emit_gold` controls whether `@CORRECT` is written.
pub fn serialize_corpus(corpus: &Corpus, emit_gold: bool) -> String {
    let mut out = String::new();
    for (i, sentence) in corpus.sentences.iter().enumerate() {
        if i > 0 {
            out.push('\n');
        }
        for cohort in &sentence.cohorts {
            out.push_str(&cohort.form.to_string());
            out.push('\n');
            for r in &cohort.readings {
                out.push('\t');
                out.push_str(&r.base.to_string());
                for f in &r.features {
                    out.push(' ');
                    out.push_str(f.as_str());
                }
                if emit_gold && r.gold {
                    out.push(' ');
                    out.push_str(GOLD_MARKER);
                }
                out.push('\n');
            }
        }
    }
    out
}

/// Which features always co-occur with which others inside one reading.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ImplicationTable {
    consequents: BTreeMap<Feature, BTreeSet<Feature>>,
}

impl ImplicationTable {
    /// `true` when every observed reading with `antecedent` also has
    /// `consequent`. Any feature implies itself.
    pub fn implies(&self, antecedent: &Feature, consequent: &Feature) -> bool {
        antecedent == consequent
            || self
                .consequents
                .get(antecedent)
                .is_some_and(|c| c.contains(consequent))
    }

    pub fn pairs(&self) -> impl Iterator<Item = (&Feature, &Feature)> {
        self.consequents
            .iter()
            .flat_map(|(a, cs)| cs.iter().map(move |c| (a, c)))
    }

    pub fn features(&self) -> impl Iterator<Item = &Feature> {
        self.consequents.keys()
    }

    pub fn len(&self) -> usize {
        self.consequents.values().map(BTreeSet::len).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.consequents.is_empty()
    }
}

/// Builds the implication table over every reading of `corpus`, gold or not.
pub fn feature_implications(corpus: &Corpus) -> ImplicationTable {
    let mut consequents: BTreeMap<Feature, BTreeSet<Feature>> = BTreeMap::new();
    for reading in corpus.cohorts().flat_map(|c| c.readings.iter()) {
        for f in &reading.features {
            match consequents.get_mut(f) {
                Some(cs) => cs.retain(|c| reading.has(c)),
                None => {
                    consequents.insert(f.clone(), reading.features.iter().cloned().collect());
                }
            }
        }
    }
    ImplicationTable { consequents }
}

#[cfg(test)]
mod tests {
    use super::*;

    pub(crate) const CAMPAIGN: &str = "\"<campaign>\"
\t\"campaign\" <SV> <P/for> V SUBJUNCTIVE VFIN
\t\"campaign\" <SV> <P/for> V IMP VFIN
\t\"campaign\" <SV> <P/for> V INF
\t\"campaign\" <SV> <P/for> V PRES -SG3 VFIN
\t\"campaign\" N NOM SG @CORRECT
";

    fn feat(s: &str) -> Feature {
        Feature::new(s).unwrap()
    }

    #[test]
    fn parses_campaign_cohort() {
        let c = parse_corpus(CAMPAIGN, true).unwrap();
        assert_eq!(c.sentences.len(), 1);
        let cohort = &c.sentences[0].cohorts()[0];
        assert_eq!(cohort.form().as_str(), "campaign");
        assert_eq!(cohort.readings().len(), 5);
        let gold: Vec<_> = cohort.readings().iter().filter(|r| r.is_gold()).collect();
        assert_eq!(gold.len(), 1);
        assert_eq!(gold[0].features(), &[feat("N"), feat("NOM"), feat("SG")]);
        assert_eq!(cohort.readings()[0].features()[0].as_str(), "<SV>");
    }

    #[test]
    fn campaign_round_trips_bytes() {
        let c = parse_corpus(CAMPAIGN, true).unwrap();
        assert_eq!(serialize_corpus(&c, true), CAMPAIGN);
    }

    #[test]
    fn empty_stream() {
        let c = parse_corpus("", true).unwrap();
        assert!(c.is_empty());
        assert_eq!(serialize_corpus(&c, true), "");
    }

    #[test]
    fn orphan_reading_reports_line_one() {
        let e = parse_corpus("\t\"the\" DET\n", false).unwrap_err();
        assert_eq!(e.line, 1);
        assert_eq!(e.kind, CorpusErrorKind::OrphanReading);
    }

    #[test]
    fn empty_cohort_is_rejected() {
        let e = parse_corpus("\"<a>\"\n\"<b>\"\n\t\"b\" N\n", false).unwrap_err();
        assert_eq!(e.line, 1);
        assert!(matches!(e.kind, CorpusErrorKind::EmptyCohort(_)));
    }

    #[test]
    fn missing_gold_is_rejected_only_when_expected() {
        let text = "\"<a>\"\n\t\"a\" DET\n";
        assert!(parse_corpus(text, false).is_ok());
        let e = parse_corpus(text, true).unwrap_err();
        assert!(matches!(e.kind, CorpusErrorKind::MissingGold(_)));
    }

    #[test]
    fn malformed_quoting() {
        let e = parse_corpus("\"<a>\"\n\t\"a DET\n", false).unwrap_err();
        assert_eq!(e.line, 2);
        assert!(matches!(e.kind, CorpusErrorKind::Tag(TagError::Quoting(_))));
        let e = parse_corpus("\"<a>\"\n\tbase DET\n", false).unwrap_err();
        assert!(matches!(e.kind, CorpusErrorKind::ExpectedBaseForm(_)));
        let e = parse_corpus("\"<a>\"\n\t\"a\" @CORRECT DET\n", false).unwrap_err();
        assert_eq!(e.kind, CorpusErrorKind::MisplacedMarker);
    }

    #[test]
    fn blank_lines_split_sentences_and_comments_are_skipped() {
        let text = "# header\n\"<a>\"\n\t\"a\" DET\n\n\n\"<b>\"\n\t\"b\" N\n";
        let c = parse_corpus(text, false).unwrap();
        assert_eq!(c.sentences.len(), 2);
        let out = serialize_corpus(&c, false);
        assert_eq!(out, "\"<a>\"\n\t\"a\" DET\n\n\"<b>\"\n\t\"b\" N\n");
        assert_eq!(out.matches("\n\n").count(), 1);
    }

    #[test]
    fn tag_classification() {
        assert!(matches!(Tag::parse("\"<campaign>\""), Ok(Tag::WordForm(_))));
        assert!(matches!(Tag::parse("\"campaign\""), Ok(Tag::BaseForm(_))));
        assert!(matches!(Tag::parse("<SV>"), Ok(Tag::Feature(_))));
        assert!(Tag::parse("\"<x>").is_err());
        assert!(Tag::parse("a\"b").is_err());
        assert!(Feature::new("A B").is_err());
        assert!(Feature::new(GOLD_MARKER).is_err());
    }

    #[test]
    fn word_forms_compare_case_insensitively() {
        let a = WordForm::new("Table").unwrap();
        let b = WordForm::new("table").unwrap();
        assert_ne!(a, b);
        assert!(a.matches(&b));
        assert_eq!(a.key(), "table");
    }

    #[test]
    fn campaign_implications() {
        let c = parse_corpus(CAMPAIGN, true).unwrap();
        let imp = feature_implications(&c);
        assert!(imp.implies(&feat("VFIN"), &feat("V")));
        assert!(!imp.implies(&feat("V"), &feat("VFIN")));
        assert!(imp.implies(&feat("SUBJUNCTIVE"), &feat("VFIN")));
        assert!(imp.implies(&feat("N"), &feat("SG")));
        assert!(imp.implies(&feat("INF"), &feat("INF")));
    }

    #[test]
    fn single_feature_corpus_is_reflexive_only() {
        let c = parse_corpus("\"<a>\"\n\t\"a\" X\n\t\"b\" X @CORRECT\n", true).unwrap();
        let imp = feature_implications(&c);
        let pairs: Vec<_> = imp.pairs().collect();
        assert_eq!(pairs, vec![(&feat("X"), &feat("X"))]);
    }

    #[test]
    fn removal_never_empties_a_cohort() {
        let c = parse_corpus(CAMPAIGN, true).unwrap();
        let mut cohort = c.sentences[0].cohorts()[0].clone();
        assert_eq!(cohort.remove_where(|_| true), 0);
        assert_eq!(cohort.readings().len(), 5);
        assert_eq!(cohort.remove_where(|r| r.has(&feat("V"))), 4);
        assert_eq!(cohort.readings().len(), 1);
    }
}
