//! Rules, stratified grammars and their textual form.
//!
//! The rule language is a small subset of Constraint Grammar:
//!
//! ```text
//! file      := { line }
//! line      := list | "SECTION" | remove | comment | blank
//! list      := "LIST" NAME "=" FEATURE { FEATURE } ";"
//! remove    := "REMOVE" "(" FEATURE ")" { condition } ";" [ "# score=" REAL ]
//! condition := "(" POSITION [ "C" ] set [ "BARRIER" set ] ")"
//! set       := "(" FEATURE { FEATURE } ")" | "(" WORDFORM ")" | NAME
//! POSITION  := "-1" | "0" | "1" | "*-1" | "*1"
//! ```
//!
//! `SECTION` separates grammar levels; rules before the first `SECTION`
//! form level 1. Scores ride in a trailing `# score=` comment so that other
//! tools can read the rules while ignoring them.

use std::cmp::Ordering;
use std::collections::{BTreeMap, BTreeSet};
use std::fmt::{self, Write as _};

use thiserror::Error;

use crate::corpus::{Feature, Tag, TagError, WordForm};
use crate::stats::Direction;

/// Where a context condition looks, relative to the current word.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Position {
    /// The current word (`0`).
    Here,
    /// The adjacent word (`-1` or `1`).
    Neighbour(Direction),
    /// Any word in the given direction (`*-1` or `*1`).
    Scan(Direction),
}

impl Position {
    pub fn is_scan(self) -> bool {
        matches!(self, Position::Scan(_))
    }
}

impl fmt::Display for Position {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let dir = |d: &Direction| match d {
            Direction::Left => "-1",
            Direction::Right => "1",
        };
        match self {
            Position::Here => f.write_str("0"),
            Position::Neighbour(d) => f.write_str(dir(d)),
            Position::Scan(d) => write!(f, "*{}", dir(d)),
        }
    }
}

/// A non-empty feature set, inline or referring to a `LIST` by name.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct FeatureSet {
    name: Option<String>,
    members: BTreeSet<Feature>,
}

impl FeatureSet {
    pub fn inline(members: BTreeSet<Feature>) -> Option<Self> {
        (!members.is_empty()).then_some(FeatureSet {
            name: None,
            members,
        })
    }

    pub fn single(feature: Feature) -> Self {
        FeatureSet {
            name: None,
            members: BTreeSet::from([feature]),
        }
    }

    pub fn named(name: impl Into<String>, members: BTreeSet<Feature>) -> Option<Self> {
        (!members.is_empty()).then_some(FeatureSet {
            name: Some(name.into()),
            members,
        })
    }

    pub fn name(&self) -> Option<&str> {
        self.name.as_deref()
    }

    pub fn members(&self) -> &BTreeSet<Feature> {
        &self.members
    }

    pub fn contains(&self, f: &Feature) -> bool {
        self.members.contains(f)
    }

    fn write_inline(&self, out: &mut String) {
        out.push('(');
        for (i, m) in self.members.iter().enumerate() {
            if i > 0 {
                out.push(' ');
            }
            out.push_str(m.as_str());
        }
        out.push(')');
    }

    fn write(&self, out: &mut String) {
        match &self.name {
            Some(n) => out.push_str(n),
            None => self.write_inline(out),
        }
    }
}

/// What a context condition tests at its position.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum ContextTest {
    Features(FeatureSet),
    Word(WordForm),
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct ContextCondition {
    pub position: Position,
    pub careful: bool,
    pub test: ContextTest,
    pub barrier: Option<FeatureSet>,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ConditionError {
    #[error("BARRIER needs a starred position")]
    BarrierOnFixed,
    #[error("word-form tests are only allowed at position 0 without C")]
    WordFormPosition,
}

impl ContextCondition {
    pub fn new(
        position: Position,
        careful: bool,
        test: ContextTest,
        barrier: Option<FeatureSet>,
    ) -> Result<Self, ConditionError> {
        if barrier.is_some() && !position.is_scan() {
            return Err(ConditionError::BarrierOnFixed);
        }
        if matches!(test, ContextTest::Word(_)) && (position != Position::Here || careful) {
            return Err(ConditionError::WordFormPosition);
        }
        Ok(ContextCondition {
            position,
            careful,
            test,
            barrier,
        })
    }

    /// `(dirC (feature))`
    pub fn neighbour(dir: Direction, feature: Feature) -> Self {
        ContextCondition {
            position: Position::Neighbour(dir),
            careful: true,
            test: ContextTest::Features(FeatureSet::single(feature)),
            barrier: None,
        }
    }

    /// `(0 ("<word>"))`
    pub fn word(word: WordForm) -> Self {
        ContextCondition {
            position: Position::Here,
            careful: false,
            test: ContextTest::Word(word),
            barrier: None,
        }
    }

    pub fn features(&self) -> Option<&FeatureSet> {
        match &self.test {
            ContextTest::Features(s) => Some(s),
            ContextTest::Word(_) => None,
        }
    }

    /// Every context satisfying `self` also satisfies `other`.
    pub fn implies(&self, other: &ContextCondition) -> bool {
        if self.position != other.position || self.careful != other.careful {
            return false;
        }
        let tests = match (&self.test, &other.test) {
            (ContextTest::Features(a), ContextTest::Features(b)) => a.members.is_subset(&b.members),
            (ContextTest::Word(a), ContextTest::Word(b)) => a.matches(b),
            _ => false,
        };
        // a smaller barrier blocks less
        let barriers = match (&self.barrier, &other.barrier) {
            (_, None) => true,
            (None, Some(_)) => false,
            (Some(a), Some(b)) => b.members.is_subset(&a.members),
        };
        tests && barriers
    }

    fn write(&self, out: &mut String, inline: bool) {
        let _ = write!(out, "({}", self.position);
        if self.careful {
            out.push('C');
        }
        out.push(' ');
        match &self.test {
            ContextTest::Features(s) if inline => s.write_inline(out),
            ContextTest::Features(s) => s.write(out),
            ContextTest::Word(w) => {
                let _ = write!(out, "({w})");
            }
        }
        if let Some(b) = &self.barrier {
            out.push_str(" BARRIER ");
            if inline {
                b.write_inline(out);
            } else {
                b.write(out);
            }
        }
        out.push(')');
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum RuleKind {
    Local,
    Combined,
    Barrier,
    Lexical,
    Rare,
}

impl RuleKind {
    pub const ALL: [RuleKind; 5] = [
        RuleKind::Local,
        RuleKind::Combined,
        RuleKind::Barrier,
        RuleKind::Lexical,
        RuleKind::Rare,
    ];

    pub fn name(self) -> &'static str {
        match self {
            RuleKind::Local => "local",
            RuleKind::Combined => "combined",
            RuleKind::Barrier => "barrier",
            RuleKind::Lexical => "lexical",
            RuleKind::Rare => "rare",
        }
    }
}

/// `REMOVE (target) condition*` with its induction score.
#[derive(Debug, Clone, PartialEq)]
pub struct Rule {
    pub target: Feature,
    pub conditions: Vec<ContextCondition>,
    pub score: f64,
}

impl Rule {
    pub fn new(target: Feature, conditions: Vec<ContextCondition>, score: f64) -> Self {
        Rule {
            target,
            conditions,
            score,
        }
    }

    /// `REMOVE (target)` with no context.
    pub fn rare(target: Feature, score: f64) -> Self {
        Rule::new(target, Vec::new(), score)
    }

    /// The rule family, read off the rule's shape.
    pub fn kind(&self) -> RuleKind {
        if self.conditions.is_empty() {
            RuleKind::Rare
        } else if self
            .conditions
            .iter()
            .any(|c| matches!(c.test, ContextTest::Word(_)))
        {
            RuleKind::Lexical
        } else if self.conditions.iter().any(|c| c.barrier.is_some()) {
            RuleKind::Barrier
        } else if self
            .conditions
            .iter()
            .filter_map(ContextCondition::features)
            .any(|s| s.name.is_some() || s.members.len() > 1)
        {
            RuleKind::Combined
        } else {
            RuleKind::Local
        }
    }

    fn write(&self, out: &mut String, inline: bool) {
        let _ = write!(out, "REMOVE ({})", self.target);
        for c in &self.conditions {
            out.push(' ');
            c.write(out, inline);
        }
    }

    /// Rule text with every set written inline; independent of set names.
    pub fn canonical_text(&self) -> String {
        let mut s = String::new();
        self.write(&mut s, true);
        s
    }

    /// `true` when every reading this rule removes in any context is also
    /// removed by `self` in that context, given the implications.
    pub fn subsumes(&self, other: &Rule, imp: &crate::corpus::ImplicationTable) -> bool {
        imp.implies(&other.target, &self.target)
            && self
                .conditions
                .iter()
                .all(|mine| other.conditions.iter().any(|theirs| theirs.implies(mine)))
    }

    /// Orders rules by score, then canonical text, then named text.
    pub fn ordering(&self, other: &Rule) -> Ordering {
        self.score
            .total_cmp(&other.score)
            .then_with(|| self.canonical_text().cmp(&other.canonical_text()))
            .then_with(|| self.to_string().cmp(&other.to_string()))
    }
}

impl fmt::Display for Rule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut s = String::new();
        self.write(&mut s, false);
        f.write_str(&s)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NamedSet {
    pub name: String,
    pub members: BTreeSet<Feature>,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum GrammarErrorKind {
    #[error("undeclared set `{0}`")]
    UndeclaredSet(String),
    #[error("set `{0}` is declared twice")]
    DuplicateList(String),
    #[error("set `{0}` has no members")]
    EmptySet(String),
    #[error("set `{0}` is used with members that differ from its declaration")]
    SetMismatch(String),
    #[error("malformed position `{0}`")]
    MalformedPosition(String),
    #[error(transparent)]
    Condition(#[from] ConditionError),
    #[error("unexpected {found}, expected {expected}")]
    Unexpected {
        found: String,
        expected: &'static str,
    },
    #[error("unterminated quote")]
    UnterminatedQuote,
    #[error("invalid score `{0}`")]
    BadScore(String),
    #[error(transparent)]
    Tag(#[from] TagError),
    #[error("a grammar needs at least one level")]
    NoLevels,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("line {line}: {kind}")]
pub struct GrammarError {
    pub line: usize,
    pub kind: GrammarErrorKind,
}

fn gerr(line: usize, kind: impl Into<GrammarErrorKind>) -> GrammarError {
    GrammarError {
        line,
        kind: kind.into(),
    }
}

/// Named sets plus rules partitioned into levels; level 1 is the most
/// reliable and runs first.
#[derive(Debug, Clone, PartialEq)]
pub struct Grammar {
    sets: Vec<NamedSet>,
    levels: Vec<Vec<Rule>>,
}

fn referenced_sets(rule: &Rule) -> impl Iterator<Item = &FeatureSet> {
    rule.conditions.iter().flat_map(|c| {
        c.features()
            .into_iter()
            .chain(c.barrier.as_ref())
            .filter(|s| s.name.is_some())
    })
}

impl Grammar {
    /// Validates set references and sorts every level into application order.
    pub fn new(sets: Vec<NamedSet>, mut levels: Vec<Vec<Rule>>) -> Result<Self, GrammarErrorKind> {
        if levels.is_empty() {
            return Err(GrammarErrorKind::NoLevels);
        }
        let mut declared = BTreeMap::new();
        for s in &sets {
            if s.members.is_empty() {
                return Err(GrammarErrorKind::EmptySet(s.name.clone()));
            }
            if declared.insert(s.name.as_str(), &s.members).is_some() {
                return Err(GrammarErrorKind::DuplicateList(s.name.clone()));
            }
        }
        for rule in levels.iter().flatten() {
            for set in referenced_sets(rule) {
                let name = set.name.as_deref().expect("filtered to named sets");
                match declared.get(name) {
                    None => return Err(GrammarErrorKind::UndeclaredSet(name.to_string())),
                    Some(m) if **m != set.members => {
                        return Err(GrammarErrorKind::SetMismatch(name.to_string()))
                    }
                    Some(_) => {}
                }
            }
        }
        for level in &mut levels {
            level.sort_by(Rule::ordering);
        }
        Ok(Grammar { sets, levels })
    }

    /// Builds a grammar from induced levels, naming every unnamed
    /// multi-feature context set `SET1`, `SET2`, … in first-use order.
    pub fn from_levels(mut levels: Vec<Vec<Rule>>) -> Self {
        if levels.is_empty() {
            levels.push(Vec::new());
        }
        for level in &mut levels {
            level.sort_by(Rule::ordering);
        }
        let mut taken: BTreeSet<String> = levels
            .iter()
            .flatten()
            .flat_map(referenced_sets)
            .filter_map(|s| s.name.clone())
            .collect();
        let mut sets: Vec<NamedSet> = Vec::new();
        let declare = |sets: &mut Vec<NamedSet>, set: &FeatureSet| {
            if let Some(name) = &set.name {
                if !sets.iter().any(|s| &s.name == name) {
                    sets.push(NamedSet {
                        name: name.clone(),
                        members: set.members.clone(),
                    });
                }
            }
        };
        let mut next = 1;
        for rule in levels.iter_mut().flatten() {
            for cond in &mut rule.conditions {
                if let ContextTest::Features(set) = &mut cond.test {
                    if set.name.is_none() && set.members.len() > 1 && cond.barrier.is_none() {
                        set.name = Some(loop {
                            let candidate = format!("SET{next}");
                            next += 1;
                            if taken.insert(candidate.clone()) {
                                break candidate;
                            }
                        });
                    }
                    declare(&mut sets, set);
                }
                if let Some(b) = &cond.barrier {
                    declare(&mut sets, b);
                }
            }
        }
        Grammar::new(sets, levels).expect("generated names are unique and declared")
    }

    pub fn sets(&self) -> &[NamedSet] {
        &self.sets
    }

    pub fn levels(&self) -> &[Vec<Rule>] {
        &self.levels
    }

    pub fn level_count(&self) -> usize {
        self.levels.len()
    }

    pub fn rule_count(&self) -> usize {
        self.levels.iter().map(Vec::len).sum()
    }

    /// Every rule with its 1-based level.
    pub fn rules(&self) -> impl Iterator<Item = (usize, &Rule)> {
        self.levels
            .iter()
            .enumerate()
            .flat_map(|(i, l)| l.iter().map(move |r| (i + 1, r)))
    }

    pub fn count_by_kind(&self) -> BTreeMap<RuleKind, usize> {
        let mut counts: BTreeMap<RuleKind, usize> = RuleKind::ALL.iter().map(|k| (*k, 0)).collect();
        for (_, r) in self.rules() {
            *counts.entry(r.kind()).or_default() += 1;
        }
        counts
    }
}

/// Canonical text: `LIST` declarations, then the levels separated by
/// `SECTION` lines, one rule per line with its score comment.
pub fn serialize_grammar(g: &Grammar) -> String {
    let mut out = String::new();
    for set in &g.sets {
        let _ = write!(out, "LIST {} =", set.name);
        for m in &set.members {
            let _ = write!(out, " {m}");
        }
        out.push_str(" ;\n");
    }
    for (i, level) in g.levels.iter().enumerate() {
        if i > 0 {
            out.push_str("SECTION\n");
        }
        for rule in level {
            let _ = writeln!(out, "{rule} ; # score={}", rule.score);
        }
    }
    out
}

#[derive(Debug, Clone, PartialEq)]
enum Token {
    Open,
    Close,
    Semi,
    Equals,
    Quoted(String),
    Word(String),
    Comment(String),
}

impl Token {
    fn describe(&self) -> String {
        match self {
            Token::Open => "`(`".into(),
            Token::Close => "`)`".into(),
            Token::Semi => "`;`".into(),
            Token::Equals => "`=`".into(),
            Token::Quoted(q) => format!("`{q}`"),
            Token::Word(w) => format!("`{w}`"),
            Token::Comment(_) => "comment".into(),
        }
    }
}

fn lex(text: &str) -> Result<Vec<(usize, Token)>, GrammarError> {
    let mut tokens = Vec::new();
    for (idx, line) in text.lines().enumerate() {
        let lineno = idx + 1;
        let mut chars = line.char_indices().peekable();
        while let Some(&(start, ch)) = chars.peek() {
            match ch {
                c if c.is_whitespace() => {
                    chars.next();
                }
                '#' => {
                    tokens.push((lineno, Token::Comment(line[start + 1..].trim().to_string())));
                    break;
                }
                '(' | ')' | ';' | '=' => {
                    chars.next();
                    tokens.push((
                        lineno,
                        match ch {
                            '(' => Token::Open,
                            ')' => Token::Close,
                            ';' => Token::Semi,
                            _ => Token::Equals,
                        },
                    ));
                }
                '"' => {
                    chars.next();
                    let mut end = None;
                    for (i, c) in chars.by_ref() {
                        if c == '"' {
                            end = Some(i);
                            break;
                        }
                    }
                    let end =
                        end.ok_or_else(|| gerr(lineno, GrammarErrorKind::UnterminatedQuote))?;
                    tokens.push((lineno, Token::Quoted(line[start..=end].to_string())));
                }
                _ => {
                    let mut end = line.len();
                    while let Some(&(i, c)) = chars.peek() {
                        if c.is_whitespace() || matches!(c, '(' | ')' | ';' | '"') {
                            end = i;
                            break;
                        }
                        chars.next();
                    }
                    tokens.push((lineno, Token::Word(line[start..end].to_string())));
                }
            }
        }
    }
    Ok(tokens)
}

enum RawSet {
    Inline(BTreeSet<Feature>),
    Word(WordForm),
    Name(String),
}

struct Parser {
    tokens: Vec<(usize, Token)>,
    pos: usize,
    last_line: usize,
}

impl Parser {
    fn peek(&self) -> Option<&Token> {
        self.tokens[self.pos..]
            .iter()
            .map(|(_, t)| t)
            .find(|t| !matches!(t, Token::Comment(_)))
    }

    fn next(&mut self) -> Result<(usize, Token), GrammarError> {
        while let Some((line, tok)) = self.tokens.get(self.pos).cloned() {
            self.pos += 1;
            self.last_line = line;
            if !matches!(tok, Token::Comment(_)) {
                return Ok((line, tok));
            }
        }
        Err(gerr(
            self.last_line,
            GrammarErrorKind::Unexpected {
                found: "end of input".into(),
                expected: "more input",
            },
        ))
    }

    fn expect(&mut self, want: Token, expected: &'static str) -> Result<usize, GrammarError> {
        let (line, tok) = self.next()?;
        if tok != want {
            return Err(gerr(
                line,
                GrammarErrorKind::Unexpected {
                    found: tok.describe(),
                    expected,
                },
            ));
        }
        Ok(line)
    }

    fn feature(&mut self) -> Result<Feature, GrammarError> {
        match self.next()? {
            (line, Token::Word(w)) => Feature::new(w).map_err(|e| gerr(line, e)),
            (line, tok) => Err(gerr(
                line,
                GrammarErrorKind::Unexpected {
                    found: tok.describe(),
                    expected: "a feature",
                },
            )),
        }
    }

    /// Score comment directly after the `;` on the same line.
    fn trailing_score(&mut self, semi_line: usize) -> Result<Option<f64>, GrammarError> {
        if let Some((line, Token::Comment(text))) = self.tokens.get(self.pos) {
            if *line == semi_line {
                if let Some(raw) = text.strip_prefix("score=") {
                    let raw = raw.trim();
                    let score = raw
                        .parse::<f64>()
                        .ok()
                        .filter(|s| s.is_finite() && *s >= 0.0)
                        .ok_or_else(|| gerr(semi_line, GrammarErrorKind::BadScore(raw.into())))?;
                    self.pos += 1;
                    return Ok(Some(score));
                }
            }
        }
        Ok(None)
    }

    fn set(&mut self) -> Result<RawSet, GrammarError> {
        match self.next()? {
            (_, Token::Word(name)) => Ok(RawSet::Name(name)),
            (line, Token::Open) => {
                if let Some(Token::Quoted(_)) = self.peek() {
                    let (qline, tok) = self.next()?;
                    let Token::Quoted(q) = tok else {
                        unreachable!()
                    };
                    self.expect(Token::Close, "`)`")?;
                    return match Tag::parse(&q).map_err(|e| gerr(qline, e))? {
                        Tag::WordForm(w) => Ok(RawSet::Word(w)),
                        _ => Err(gerr(
                            qline,
                            GrammarErrorKind::Unexpected {
                                found: format!("`{q}`"),
                                expected: "a word form",
                            },
                        )),
                    };
                }
                let mut members = BTreeSet::new();
                while self.peek() != Some(&Token::Close) {
                    members.insert(self.feature()?);
                }
                self.expect(Token::Close, "`)`")?;
                if members.is_empty() {
                    return Err(gerr(line, GrammarErrorKind::EmptySet("()".into())));
                }
                Ok(RawSet::Inline(members))
            }
            (line, tok) => Err(gerr(
                line,
                GrammarErrorKind::Unexpected {
                    found: tok.describe(),
                    expected: "a set",
                },
            )),
        }
    }
}

fn parse_position(text: &str) -> Option<(Position, bool)> {
    let (body, careful) = match text.strip_suffix('C') {
        Some(b) => (b, true),
        None => (text, false),
    };
    let (body, scan) = match body.strip_prefix('*') {
        Some(b) => (b, true),
        None => (body, false),
    };
    let dir = match body {
        "-1" => Some(Direction::Left),
        "1" | "+1" => Some(Direction::Right),
        "0" => None,
        _ => return None,
    };
    let pos = match (dir, scan) {
        (None, false) => Position::Here,
        (None, true) => return None,
        (Some(d), false) => Position::Neighbour(d),
        (Some(d), true) => Position::Scan(d),
    };
    Some((pos, careful))
}

/// Parses the rule language, resolving `LIST` names wherever they are used.
pub fn parse_grammar(text: &str) -> Result<Grammar, GrammarError> {
    let mut p = Parser {
        tokens: lex(text)?,
        pos: 0,
        last_line: 1,
    };
    let mut lists: Vec<(usize, NamedSet)> = Vec::new();
    type PendingCondition = (usize, Position, bool, RawSet, Option<RawSet>);
    let mut raw_levels: Vec<Vec<(Feature, Vec<PendingCondition>, f64)>> = vec![Vec::new()];

    while p.peek().is_some() {
        let (line, tok) = p.next()?;
        match tok {
            Token::Word(w) if w == "SECTION" => raw_levels.push(Vec::new()),
            Token::Word(w) if w == "LIST" => {
                let name = match p.next()? {
                    (_, Token::Word(n)) => n,
                    (l, t) => {
                        return Err(gerr(
                            l,
                            GrammarErrorKind::Unexpected {
                                found: t.describe(),
                                expected: "a set name",
                            },
                        ))
                    }
                };
                p.expect(Token::Equals, "`=`")?;
                let mut members = BTreeSet::new();
                while p.peek() != Some(&Token::Semi) {
                    members.insert(p.feature()?);
                }
                p.expect(Token::Semi, "`;`")?;
                if members.is_empty() {
                    return Err(gerr(line, GrammarErrorKind::EmptySet(name)));
                }
                if lists.iter().any(|(_, s)| s.name == name) {
                    return Err(gerr(line, GrammarErrorKind::DuplicateList(name)));
                }
                lists.push((line, NamedSet { name, members }));
            }
            Token::Word(w) if w == "REMOVE" => {
                p.expect(Token::Open, "`(`")?;
                let target = p.feature()?;
                p.expect(Token::Close, "`)`")?;
                let mut conditions = Vec::new();
                while p.peek() == Some(&Token::Open) {
                    let (cline, _) = p.next()?;
                    let (position, careful) = match p.next()? {
                        (l, Token::Word(w)) => parse_position(&w)
                            .ok_or_else(|| gerr(l, GrammarErrorKind::MalformedPosition(w)))?,
                        (l, t) => {
                            return Err(gerr(l, GrammarErrorKind::MalformedPosition(t.describe())))
                        }
                    };
                    let set = p.set()?;
                    let barrier = if matches!(p.peek(), Some(Token::Word(w)) if w == "BARRIER") {
                        let (bline, _) = p.next()?;
                        if !position.is_scan() {
                            return Err(gerr(bline, ConditionError::BarrierOnFixed));
                        }
                        Some(p.set()?)
                    } else {
                        None
                    };
                    p.expect(Token::Close, "`)`")?;
                    conditions.push((cline, position, careful, set, barrier));
                }
                let semi = p.expect(Token::Semi, "`;`")?;
                let score = p.trailing_score(semi)?.unwrap_or(0.0);
                raw_levels
                    .last_mut()
                    .expect("at least one level")
                    .push((target, conditions, score));
            }
            other => {
                return Err(gerr(
                    line,
                    GrammarErrorKind::Unexpected {
                        found: other.describe(),
                        expected: "LIST, SECTION or REMOVE",
                    },
                ))
            }
        }
    }

    let declared: BTreeMap<&str, &BTreeSet<Feature>> = lists
        .iter()
        .map(|(_, s)| (s.name.as_str(), &s.members))
        .collect();
    let resolve = |raw: RawSet, line: usize| -> Result<ContextTest, GrammarError> {
        Ok(match raw {
            RawSet::Inline(m) => ContextTest::Features(FeatureSet::inline(m).expect("non-empty")),
            RawSet::Word(w) => ContextTest::Word(w),
            RawSet::Name(n) => {
                let members = declared
                    .get(n.as_str())
                    .ok_or_else(|| gerr(line, GrammarErrorKind::UndeclaredSet(n.clone())))?;
                ContextTest::Features(FeatureSet::named(n, (*members).clone()).expect("non-empty"))
            }
        })
    };

    let mut levels = Vec::with_capacity(raw_levels.len());
    for raw_level in raw_levels {
        let mut rules = Vec::with_capacity(raw_level.len());
        for (target, raw_conditions, score) in raw_level {
            let mut conditions = Vec::with_capacity(raw_conditions.len());
            for (line, position, careful, set, barrier) in raw_conditions {
                let test = resolve(set, line)?;
                let barrier = match barrier.map(|b| resolve(b, line)).transpose()? {
                    None => None,
                    Some(ContextTest::Features(s)) => Some(s),
                    Some(ContextTest::Word(w)) => {
                        return Err(gerr(
                            line,
                            GrammarErrorKind::Unexpected {
                                found: w.to_string(),
                                expected: "a barrier feature set",
                            },
                        ))
                    }
                };
                conditions.push(
                    ContextCondition::new(position, careful, test, barrier)
                        .map_err(|e| gerr(line, e))?,
                );
            }
            rules.push(Rule::new(target, conditions, score));
        }
        levels.push(rules);
    }
    Grammar::new(lists.into_iter().map(|(_, s)| s).collect(), levels)
        .map_err(|kind| GrammarError { line: 0, kind })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn feat(s: &str) -> Feature {
        Feature::new(s).unwrap()
    }

    fn feats(items: &[&str]) -> BTreeSet<Feature> {
        items.iter().map(|s| feat(s)).collect()
    }

    #[test]
    fn parses_local_rule() {
        let g = parse_grammar("REMOVE (V) (-1C (DET)) ;").unwrap();
        let rule = &g.levels()[0][0];
        assert_eq!(rule.kind(), RuleKind::Local);
        assert_eq!(rule.target, feat("V"));
        let c = &rule.conditions[0];
        assert_eq!(c.position, Position::Neighbour(Direction::Left));
        assert!(c.careful);
        assert_eq!(c.features().unwrap().members(), &feats(&["DET"]));
        assert_eq!(rule.score, 0.0);
    }

    #[test]
    fn parses_barrier_rule_with_named_set() {
        let g = parse_grammar(
            "LIST NPHEAD = N PRON NUM ;\nREMOVE (V) (*-1C (DET) BARRIER NPHEAD) ; # score=0.5\n",
        )
        .unwrap();
        let rule = &g.levels()[0][0];
        assert_eq!(rule.kind(), RuleKind::Barrier);
        let b = rule.conditions[0].barrier.as_ref().unwrap();
        assert_eq!(b.members(), &feats(&["N", "PRON", "NUM"]));
        assert_eq!(b.name(), Some("NPHEAD"));
        assert_eq!(rule.score, 0.5);
    }

    #[test]
    fn parses_rare_and_lexical_rules() {
        let g = parse_grammar("REMOVE (SUBJUNCTIVE) ;\nREMOVE (V) (0 (\"<table>\")) ;").unwrap();
        let kinds: Vec<_> = g.levels()[0].iter().map(Rule::kind).collect();
        assert!(kinds.contains(&RuleKind::Rare));
        assert!(kinds.contains(&RuleKind::Lexical));
        let lex = g.levels()[0]
            .iter()
            .find(|r| r.kind() == RuleKind::Lexical)
            .unwrap();
        assert_eq!(lex.to_string(), "REMOVE (V) (0 (\"<table>\"))");
    }

    #[test]
    fn rejects_bad_input() {
        let e = parse_grammar("REMOVE (V) (-1C SET9) ;").unwrap_err();
        assert_eq!(e.kind, GrammarErrorKind::UndeclaredSet("SET9".into()));
        let e = parse_grammar("\nREMOVE (V) (-2C (DET)) ;").unwrap_err();
        assert_eq!(e.line, 2);
        assert!(matches!(e.kind, GrammarErrorKind::MalformedPosition(_)));
        let e = parse_grammar("REMOVE (V) (-1C (DET) BARRIER (N)) ;").unwrap_err();
        assert_eq!(
            e.kind,
            GrammarErrorKind::Condition(ConditionError::BarrierOnFixed)
        );
        let e = parse_grammar("LIST A = X ;\nLIST A = Y ;").unwrap_err();
        assert_eq!(e.kind, GrammarErrorKind::DuplicateList("A".into()));
        let e = parse_grammar("REMOVE (V) (-1 (\"<x>\")) ;").unwrap_err();
        assert_eq!(
            e.kind,
            GrammarErrorKind::Condition(ConditionError::WordFormPosition)
        );
        assert!(parse_grammar("REMOVE (V) (*0 (N)) ;").is_err());
        assert!(parse_grammar("REMOVE (V) ; # score=abc").is_err());
        assert!(parse_grammar("REMOVE (V)").is_err());
    }

    #[test]
    fn sections_separate_levels() {
        let g = parse_grammar("REMOVE (A) ;\nSECTION\nREMOVE (B) ;\n").unwrap();
        assert_eq!(g.level_count(), 2);
        let text = serialize_grammar(&g);
        assert_eq!(text.matches("SECTION").count(), 1);
        assert_eq!(parse_grammar(&text).unwrap(), g);
        assert_eq!(parse_grammar("").unwrap().level_count(), 1);
    }

    #[test]
    fn combined_sets_get_generated_names() {
        let rule = Rule::new(
            feat("V"),
            vec![ContextCondition {
                position: Position::Neighbour(Direction::Left),
                careful: true,
                test: ContextTest::Features(FeatureSet::inline(feats(&["DET", "PREP"])).unwrap()),
                barrier: None,
            }],
            0.05,
        );
        let g = Grammar::from_levels(vec![vec![rule]]);
        let text = serialize_grammar(&g);
        assert_eq!(
            text,
            "LIST SET1 = DET PREP ;\nREMOVE (V) (-1C SET1) ; # score=0.05\n"
        );
        assert_eq!(g.levels()[0][0].kind(), RuleKind::Combined);
        assert_eq!(parse_grammar(&text).unwrap(), g);
    }

    #[test]
    fn generated_names_skip_declared_ones() {
        let g = parse_grammar("LIST SET1 = A B ;\nREMOVE (V) (*-1C (C) BARRIER SET1) ;").unwrap();
        let mut levels = g.levels().to_vec();
        levels[0].push(Rule::new(
            feat("N"),
            vec![ContextCondition::new(
                Position::Neighbour(Direction::Right),
                true,
                ContextTest::Features(FeatureSet::inline(feats(&["X", "Y"])).unwrap()),
                None,
            )
            .unwrap()],
            0.1,
        ));
        let g2 = Grammar::from_levels(levels);
        assert!(serialize_grammar(&g2).contains("LIST SET2 = X Y ;"));
    }

    #[test]
    fn levels_sort_by_score_then_text() {
        let g = parse_grammar(
            "REMOVE (B) ; # score=0.2\nREMOVE (C) ; # score=0.1\nREMOVE (A) ; # score=0.2\n",
        )
        .unwrap();
        let order: Vec<_> = g.levels()[0]
            .iter()
            .map(|r| r.target.as_str().to_string())
            .collect();
        assert_eq!(order, ["C", "A", "B"]);
    }

    #[test]
    fn condition_implication() {
        let narrow = ContextCondition::neighbour(Direction::Left, feat("DET"));
        let wide = ContextCondition::new(
            Position::Neighbour(Direction::Left),
            true,
            ContextTest::Features(FeatureSet::inline(feats(&["DET", "PREP"])).unwrap()),
            None,
        )
        .unwrap();
        assert!(narrow.implies(&wide));
        assert!(!wide.implies(&narrow));
        let loose = ContextCondition::new(
            Position::Neighbour(Direction::Left),
            false,
            ContextTest::Features(FeatureSet::single(feat("DET"))),
            None,
        )
        .unwrap();
        assert!(!narrow.implies(&loose));
    }
}
