//! The intent language: a small context-free grammar over grammar-shaped
//! English sentences, parsed by a deterministic recursive-descent parser with
//! two-word lookahead.
//!
//! The parser reports only the leftmost error, typed by [`GrammarErrorKind`],
//! so the clarification loop can ask one question per retry.

mod lexer;
mod render;

use alloc::borrow::ToOwned;
use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

use serde::{Deserialize, Serialize};

use crate::intent::{Availability, ConstraintSet, Role, SiteSpec, StructuredIntent};
use lexer::{tokenize, Token, TokenKind};

pub use render::render_canonical;

pub(crate) const INTRO: &[&str] = &["We", "need", "a"];
pub(crate) const NETWORK: &[&str] = &["optical", "network", "connecting"];
pub(crate) const REDUNDANCY_PRE: &[&str] = &["support", "continuous", "operation", "with", "at", "least"];
pub(crate) const REDUNDANCY_POST: &[&str] = &[
    "geographically",
    "disjoint",
    "fiber",
    "paths",
    "between",
    "each",
    "pair",
    "of",
    "sites",
];
pub(crate) const LATENCY_PRE: &[&str] = &["Maximum", "acceptable", "latency", "per", "path", "is"];
pub(crate) const LATENCY_POST: &[&str] = &["milliseconds"];
pub(crate) const BUDGET_PRE: &[&str] = &["Our", "total", "budget", "for", "components", "is"];
pub(crate) const COMPLIANCE_PRE: &[&str] = &["compliant", "with"];

/// Words an LLM tends to leave in numeric slots instead of a number.
pub const VAGUE_WORDS: &[&str] = &[
    "fair",
    "reasonable",
    "several",
    "some",
    "many",
    "few",
    "adequate",
    "sufficient",
    "low",
    "high",
    "cheap",
    "affordable",
];

const GRAMMAR: &str = r#"intent → "We need a" [availability] "optical network connecting" sites [constraints] ["."]
availability → "high-availability" | "standard" | "best-effort"
sites → site ("," site)* "and" site
site → SITE_NAME [location] [role]
location → "in" CITY_NAME
role → "(" ("hub" | "core" | "edge") ")"
constraints → constraint+
constraint → redundancy | latency | budget | compliance
redundancy → "support continuous operation with at least" INT "geographically disjoint fiber paths between each pair of sites"
latency → "Maximum acceptable latency per path is" INT "milliseconds"
budget → "Our total budget for components is" VALID_DOLLAR
compliance → "compliant with" STANDARD_ID ("," STANDARD_ID)*
VALID_DOLLAR → "$" INT
INT → [0-9]+ (a positive whole number, no separators or units)
SITE_NAME → [A-Z][A-Z0-9_]{0,31}
CITY_NAME → '"' text '"' | TitleCaseWord+
STANDARD_ID → an allowlisted standard identifier, written as one token (for example ITU-T-G.652)

Each constraint kind appears at most once. Phrases in quotes are matched
case-insensitively; SITE_NAME and STANDARD_ID are case-sensitive.
"#;

/// The canonical grammar the parser implements, for embedding in prompts.
pub fn grammar_text() -> &'static str {
    GRAMMAR
}

/// A grammar-shaped candidate sentence (usually the LLM's rephrasing, not the
/// user's raw text).
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct IntentSentence(String);

impl IntentSentence {
    /// Returns `None` for blank input.
    pub fn new(text: impl Into<String>) -> Option<Self> {
        let text = text.into();
        if text.trim().is_empty() {
            None
        } else {
            Some(IntentSentence(text))
        }
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }

    pub fn into_inner(self) -> String {
        self.0
    }
}

impl fmt::Display for IntentSentence {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum GrammarErrorKind {
    MissingSites,
    VagueValue,
    InvalidRole,
    InvalidCompliance,
    SyntaxMalformation,
}

impl GrammarErrorKind {
    pub const ALL: [GrammarErrorKind; 5] = [
        GrammarErrorKind::MissingSites,
        GrammarErrorKind::VagueValue,
        GrammarErrorKind::InvalidRole,
        GrammarErrorKind::InvalidCompliance,
        GrammarErrorKind::SyntaxMalformation,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            GrammarErrorKind::MissingSites => "MissingSites",
            GrammarErrorKind::VagueValue => "VagueValue",
            GrammarErrorKind::InvalidRole => "InvalidRole",
            GrammarErrorKind::InvalidCompliance => "InvalidCompliance",
            GrammarErrorKind::SyntaxMalformation => "SyntaxMalformation",
        }
    }

    pub fn from_name(name: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|k| k.as_str() == name)
    }
}

impl fmt::Display for GrammarErrorKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct GrammarError {
    pub kind: GrammarErrorKind,
    /// Character offset of the offending token (end of text when the error is
    /// an unexpected end of input).
    pub position: usize,
    pub offending_token: String,
    pub message: String,
}

impl fmt::Display for GrammarError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} at {}: {}", self.kind, self.position, self.message)
    }
}

pub type ParseOutcome = Result<StructuredIntent, GrammarError>;

/// `[A-Z][A-Z0-9_]{0,31}`
pub fn is_site_name(s: &str) -> bool {
    let bytes = s.as_bytes();
    !bytes.is_empty()
        && bytes.len() <= 32
        && bytes[0].is_ascii_uppercase()
        && bytes[1..]
            .iter()
            .all(|b| b.is_ascii_uppercase() || b.is_ascii_digit() || *b == b'_')
}

/// An uppercase letter, then a lowercase letter, then letters, `'`, `.` or `-`.
pub(crate) fn is_title_word(s: &str) -> bool {
    let mut chars = s.chars();
    matches!(chars.next(), Some(c) if c.is_uppercase())
        && matches!(chars.next(), Some(c) if c.is_lowercase())
        && chars.all(|c| c.is_alphabetic() || matches!(c, '\'' | '.' | '-'))
}

/// Parses with the given compliance allowlist.
pub fn parse_intent(sentence: &IntentSentence, standards: &[String]) -> ParseOutcome {
    IntentParser::new(standards.to_vec()).parse(sentence.as_str())
}

/// Grammar parser bound to a compliance allowlist.
#[derive(Debug, Clone, Default)]
pub struct IntentParser {
    standards: Vec<String>,
}

impl IntentParser {
    pub fn new(standards: Vec<String>) -> Self {
        IntentParser { standards }
    }

    pub fn standards(&self) -> &[String] {
        &self.standards
    }

    pub fn parse(&self, text: &str) -> ParseOutcome {
        let tokens = match tokenize(text) {
            Ok(t) => t,
            Err(e) => {
                return Err(GrammarError {
                    kind: GrammarErrorKind::SyntaxMalformation,
                    position: e.position,
                    offending_token: "\"".to_owned(),
                    message: e.message.to_owned(),
                })
            }
        };
        let text_len = text.chars().count();
        let source: Vec<char> = text.chars().collect();
        let cursor = Cursor {
            tokens: &tokens,
            pos: 0,
            text_len,
            source: &source,
        };
        if let Some(err) = cursor.absent_sites_clause() {
            return Err(err);
        }
        Parser {
            cur: cursor,
            standards: &self.standards,
        }
        .intent()
    }
}

struct Cursor<'a> {
    tokens: &'a [Token],
    pos: usize,
    text_len: usize,
    source: &'a [char],
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum Clause {
    Redundancy,
    Latency,
    Budget,
    Compliance,
}

impl Clause {
    fn name(self) -> &'static str {
        match self {
            Clause::Redundancy => "redundancy",
            Clause::Latency => "latency",
            Clause::Budget => "budget",
            Clause::Compliance => "compliance",
        }
    }

    fn prefix(self) -> &'static [&'static str] {
        match self {
            Clause::Redundancy => REDUNDANCY_PRE,
            Clause::Latency => LATENCY_PRE,
            Clause::Budget => BUDGET_PRE,
            Clause::Compliance => COMPLIANCE_PRE,
        }
    }
}

impl<'a> Cursor<'a> {
    fn peek(&self) -> Option<&'a Token> {
        self.tokens.get(self.pos)
    }

    fn position(&self) -> usize {
        self.peek().map_or(self.text_len, |t| t.start)
    }

    fn text_of(&self, tok: &Token) -> String {
        self.source[tok.start..tok.end].iter().collect()
    }

    fn offending(&self) -> String {
        self.peek().map(|t| self.text_of(t)).unwrap_or_default()
    }

    fn error(&self, kind: GrammarErrorKind, message: String) -> GrammarError {
        GrammarError {
            kind,
            position: self.position(),
            offending_token: self.offending(),
            message,
        }
    }

    /// Two-word lookahead for the start of a constraint clause.
    fn clause_at(&self, idx: usize) -> Option<Clause> {
        let first = self.tokens.get(idx)?;
        let second = self.tokens.get(idx + 1)?;
        [
            Clause::Redundancy,
            Clause::Latency,
            Clause::Budget,
            Clause::Compliance,
        ]
        .into_iter()
        .find(|c| first.is_word(c.prefix()[0]) && second.is_word(c.prefix()[1]))
    }

    fn at_clause(&self) -> Option<Clause> {
        self.clause_at(self.pos)
    }

    fn at_end_of_sites(&self) -> bool {
        self.peek().is_none() || self.at_clause().is_some()
    }

    /// The sites clause is "entirely absent" when no SITE_NAME-shaped word
    /// appears between `connecting` and the first constraint clause. This
    /// takes precedence over any other error.
    fn absent_sites_clause(&self) -> Option<GrammarError> {
        let connecting = self.tokens.iter().position(|t| t.is_word("connecting"))?;
        let start = connecting + 1;
        let mut idx = start;
        while idx < self.tokens.len() && self.clause_at(idx).is_none() {
            if self.tokens[idx].word().is_some_and(is_site_name) {
                return None;
            }
            idx += 1;
        }
        let probe = Cursor {
            tokens: self.tokens,
            pos: start,
            text_len: self.text_len,
            source: self.source,
        };
        Some(probe.error(
            GrammarErrorKind::MissingSites,
            "no sites to connect: the sites clause is missing".to_owned(),
        ))
    }
}

struct Parser<'a> {
    cur: Cursor<'a>,
    standards: &'a [String],
}

impl Parser<'_> {
    fn syntax(&self, message: String) -> GrammarError {
        self.cur.error(GrammarErrorKind::SyntaxMalformation, message)
    }

    fn expect_phrase(&mut self, phrase: &[&str]) -> Result<(), GrammarError> {
        for word in phrase {
            match self.cur.peek() {
                Some(tok) if tok.is_word(word) => self.cur.pos += 1,
                _ => {
                    return Err(self.syntax(format!(
                        "expected \"{}\" (phrase \"{}\")",
                        word,
                        phrase.join(" ")
                    )))
                }
            }
        }
        Ok(())
    }

    fn intent(mut self) -> ParseOutcome {
        self.expect_phrase(INTRO)?;
        let availability = match self.cur.peek().and_then(|t| t.word()) {
            Some(w) => {
                let a = Availability::from_keyword(w);
                if a.is_some() {
                    self.cur.pos += 1;
                }
                a
            }
            None => None,
        };
        if availability.is_none() && !self.cur.peek().is_some_and(|t| t.is_word(NETWORK[0])) {
            return Err(self.syntax(
                "expected an availability class (high-availability, standard, best-effort) or \"optical network connecting\"".to_owned(),
            ));
        }
        self.expect_phrase(NETWORK)?;
        let sites = self.sites()?;
        let constraints = self.constraints()?;
        Ok(StructuredIntent {
            availability,
            sites,
            constraints,
        })
    }

    fn missing_sites(&self, clause_start: usize, found: usize) -> GrammarError {
        GrammarError {
            kind: GrammarErrorKind::MissingSites,
            position: clause_start,
            offending_token: self.cur.offending(),
            message: format!("at least two sites are required, found {found}"),
        }
    }

    fn sites(&mut self) -> Result<Vec<SiteSpec>, GrammarError> {
        let clause_start = self.cur.position();
        let mut sites: Vec<SiteSpec> = Vec::new();
        self.site(&mut sites)?;
        loop {
            match self.cur.peek().map(|t| &t.kind) {
                Some(TokenKind::Comma) => {
                    self.cur.pos += 1;
                    if self.cur.at_end_of_sites() && sites.len() < 2 {
                        return Err(self.missing_sites(clause_start, sites.len()));
                    }
                    self.site(&mut sites)?;
                }
                Some(TokenKind::Word(w)) if w.eq_ignore_ascii_case("and") => {
                    self.cur.pos += 1;
                    if self.cur.at_end_of_sites() && sites.len() < 2 {
                        return Err(self.missing_sites(clause_start, sites.len()));
                    }
                    self.site(&mut sites)?;
                    return Ok(sites);
                }
                _ => {
                    if sites.len() < 2 && self.cur.at_end_of_sites() {
                        return Err(self.missing_sites(clause_start, sites.len()));
                    }
                    return Err(self.syntax(
                        "expected \",\" or \"and\" between sites; the last site is introduced by \"and\"".to_owned(),
                    ));
                }
            }
        }
    }

    fn site(&mut self, sites: &mut Vec<SiteSpec>) -> Result<(), GrammarError> {
        let name = match self.cur.peek().and_then(|t| t.word()) {
            Some(w) if is_site_name(w) => w.to_owned(),
            _ => {
                return Err(self.syntax(
                    "expected a SITE_NAME (uppercase letters, digits and underscores, e.g. SITE1)"
                        .to_owned(),
                ))
            }
        };
        if sites.iter().any(|s| s.name == name) {
            return Err(self.syntax(format!("site {name} is listed twice")));
        }
        self.cur.pos += 1;
        let mut site = SiteSpec::new(name);
        if self.cur.peek().is_some_and(|t| t.is_word("in")) {
            self.cur.pos += 1;
            site.location = Some(self.city()?);
        }
        if matches!(self.cur.peek().map(|t| &t.kind), Some(TokenKind::LParen)) {
            site.role = Some(self.role()?);
        }
        sites.push(site);
        Ok(())
    }

    fn city(&mut self) -> Result<String, GrammarError> {
        if let Some(Token {
            kind: TokenKind::Quoted(q),
            ..
        }) = self.cur.peek()
        {
            if q.trim().is_empty() {
                return Err(self.syntax("city name is empty".to_owned()));
            }
            self.cur.pos += 1;
            return Ok(q.clone());
        }
        let mut words: Vec<&str> = Vec::new();
        while let Some(w) = self.cur.peek().and_then(|t| t.word()) {
            if !is_title_word(w) || w.eq_ignore_ascii_case("and") || self.cur.at_clause().is_some()
            {
                break;
            }
            words.push(w);
            self.cur.pos += 1;
        }
        if words.is_empty() {
            return Err(self.syntax(
                "expected a city name after \"in\" (quoted, or capitalized words)".to_owned(),
            ));
        }
        Ok(words.join(" "))
    }

    fn role(&mut self) -> Result<Role, GrammarError> {
        let open = self.cur.peek().expect("caller saw '('");
        let content_start = self.cur.pos + 1;
        let close = self.cur.tokens[content_start..]
            .iter()
            .position(|t| t.kind == TokenKind::RParen)
            .map(|i| content_start + i);
        let Some(close) = close else {
            return Err(self.syntax("unclosed \"(\" in site role".to_owned()));
        };
        if close == content_start {
            self.cur.pos = content_start;
            return Err(self.syntax("empty role; expected hub, core or edge".to_owned()));
        }
        let first = &self.cur.tokens[content_start];
        let last = &self.cur.tokens[close - 1];
        let content: String = self.cur.source[first.start..last.end].iter().collect();
        let role = if close == content_start + 1 {
            first.word().and_then(Role::from_keyword)
        } else {
            None
        };
        match role {
            Some(r) => {
                self.cur.pos = close + 1;
                Ok(r)
            }
            None => Err(GrammarError {
                kind: GrammarErrorKind::InvalidRole,
                position: first.start,
                offending_token: content.clone(),
                message: format!(
                    "\"{content}\" is not a site role; use hub, core or edge (after \"{}\")",
                    self.cur.text_of(open)
                ),
            }),
        }
    }

    fn constraints(&mut self) -> Result<ConstraintSet, GrammarError> {
        let mut set = ConstraintSet::default();
        while self.cur.peek().is_some() {
            let Some(clause) = self.cur.at_clause() else {
                return Err(self.syntax(
                    "expected a constraint clause (redundancy, latency, budget or compliance)"
                        .to_owned(),
                ));
            };
            let seen = match clause {
                Clause::Redundancy => set.disjoint_paths.is_some(),
                Clause::Latency => set.latency_ms.is_some(),
                Clause::Budget => set.budget_usd.is_some(),
                Clause::Compliance => set.compliance.is_some(),
            };
            if seen {
                return Err(self.syntax(format!("duplicate {} clause", clause.name())));
            }
            self.expect_phrase(clause.prefix())?;
            match clause {
                Clause::Redundancy => {
                    set.disjoint_paths = Some(self.int_slot("disjoint path count")?);
                    self.expect_phrase(REDUNDANCY_POST)?;
                }
                Clause::Latency => {
                    set.latency_ms = Some(self.int_slot("latency")?);
                    self.expect_phrase(LATENCY_POST)?;
                }
                Clause::Budget => set.budget_usd = Some(self.dollar_slot()?),
                Clause::Compliance => set.compliance = Some(self.standards_list()?),
            }
        }
        Ok(set)
    }

    fn vague(&self, what: &str) -> GrammarError {
        let token = self.cur.offending();
        let message = if token.is_empty() {
            format!("missing {what} value; a number is required")
        } else if VAGUE_WORDS.iter().any(|v| v.eq_ignore_ascii_case(&token)) {
            format!("\"{token}\" is a vague {what}; a number is required")
        } else {
            format!("\"{token}\" is not a number; the {what} must be a number")
        };
        self.cur.error(GrammarErrorKind::VagueValue, message)
    }

    fn int_slot(&mut self, what: &str) -> Result<u64, GrammarError> {
        let Some(tok) = self.cur.peek() else {
            return Err(self.vague(what));
        };
        match &tok.kind {
            TokenKind::Word(w) => {
                let value = self.number(w, what)?;
                self.cur.pos += 1;
                Ok(value)
            }
            TokenKind::Quoted(_) => Err(self.vague(what)),
            _ => Err(self.syntax(format!("expected the {what} as INT"))),
        }
    }

    /// Numeric-shaped tokens are syntax problems; anything else in a number
    /// slot is a vague value.
    fn number(&self, word: &str, what: &str) -> Result<u64, GrammarError> {
        if word.bytes().all(|b| b.is_ascii_digit()) {
            return match word.parse::<u64>() {
                Ok(0) => Err(self.syntax(format!("the {what} must be a positive INT"))),
                Ok(v) => Ok(v),
                Err(_) => Err(self.syntax(format!("the {what} is too large"))),
            };
        }
        if looks_numeric(word) {
            return Err(self.syntax(format!(
                "malformed {what} \"{word}\"; INT is digits only, without units or separators"
            )));
        }
        Err(self.vague(what))
    }

    fn dollar_slot(&mut self) -> Result<u64, GrammarError> {
        let Some(tok) = self.cur.peek() else {
            return Err(self.vague("budget"));
        };
        let word = match &tok.kind {
            TokenKind::Word(w) => w.as_str(),
            TokenKind::Quoted(_) => return Err(self.vague("budget")),
            _ => return Err(self.syntax("expected the budget as VALID_DOLLAR (\"$\" INT)".to_owned())),
        };
        if word == "$" {
            self.cur.pos += 1;
            return self.int_slot("budget");
        }
        if let Some(rest) = word.strip_prefix('$') {
            if rest.bytes().all(|b| b.is_ascii_digit()) || looks_numeric(rest) {
                let v = self.number(rest, "budget")?;
                self.cur.pos += 1;
                return Ok(v);
            }
            return Err(self.vague("budget"));
        }
        if looks_numeric(word) {
            return Err(self.syntax(format!(
                "budget \"{word}\" must be a VALID_DOLLAR terminal: \"$\" followed by INT, e.g. ${}",
                word.trim_matches(|c: char| !c.is_ascii_digit())
            )));
        }
        Err(self.vague("budget"))
    }

    fn standards_list(&mut self) -> Result<Vec<String>, GrammarError> {
        let mut out = Vec::new();
        loop {
            let tok = self.cur.peek();
            let word = match tok.map(|t| &t.kind) {
                None => None,
                Some(_) if self.cur.at_clause().is_some() => None,
                Some(TokenKind::Word(w)) => Some(w.clone()),
                Some(TokenKind::Quoted(q)) => Some(q.clone()),
                Some(_) => {
                    return Err(self.syntax("expected a STANDARD_ID after \"compliant with\"".to_owned()))
                }
            };
            let Some(word) = word else {
                return Err(self.cur.error(
                    GrammarErrorKind::InvalidCompliance,
                    "no standard named after \"compliant with\"".to_owned(),
                ));
            };
            if !self.standards.contains(&word) {
                return Err(self.cur.error(
                    GrammarErrorKind::InvalidCompliance,
                    format!("\"{word}\" is not a recognized standard"),
                ));
            }
            out.push(word);
            self.cur.pos += 1;
            if matches!(self.cur.peek().map(|t| &t.kind), Some(TokenKind::Comma)) {
                self.cur.pos += 1;
                if self.cur.peek().is_none() {
                    return Err(self.syntax("dangling \",\" after standards list".to_owned()));
                }
            } else {
                return Ok(out);
            }
        }
    }
}

fn looks_numeric(word: &str) -> bool {
    let mut chars = word.chars();
    match chars.next() {
        Some(c) if c.is_ascii_digit() => true,
        Some('+' | '-' | '.' | '$') => chars.next().is_some_and(|c| c.is_ascii_digit()),
        _ => false,
    }
}
