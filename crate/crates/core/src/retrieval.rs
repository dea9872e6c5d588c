//! Guidance retrieval over a small optical-standards corpus.
//!
//! Documents are scored with BM25 (k1 = 1.2, b = 0.75) against a query built
//! from the intent's availability class, roles and constraint kinds. Site
//! names never enter the query. Documents whose applicability predicate does
//! not hold for the intent are filtered out before ranking.

use alloc::borrow::ToOwned;
use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

use hashbrown::HashMap;
use serde::{Deserialize, Serialize};

use crate::intent::{Availability, Role, StructuredIntent};

pub const K1: f64 = 1.2;
pub const B: f64 = 0.75;
pub const DEFAULT_TOP_K: usize = 5;

/// One clause of a document's applicability predicate. All clauses of a
/// document must hold.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Applicability {
    Always,
    /// Holds when the intent's availability is one of these.
    Availability(Vec<Availability>),
    /// Holds when the named constraint is present.
    Has(ConstraintKind),
    /// Holds when some site has one of these roles.
    Role(Vec<Role>),
    MinSites(usize),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ConstraintKind {
    Latency,
    Budget,
    DisjointPaths,
    Compliance,
    Locations,
}

impl ConstraintKind {
    fn from_name(s: &str) -> Option<Self> {
        Some(match s {
            "latency" | "latency_ms" => ConstraintKind::Latency,
            "budget" | "budget_usd" => ConstraintKind::Budget,
            "disjoint_paths" | "redundancy" => ConstraintKind::DisjointPaths,
            "compliance" => ConstraintKind::Compliance,
            "locations" => ConstraintKind::Locations,
            _ => return None,
        })
    }
}

impl Applicability {
    /// Parses one clause: `always`, `availability=a|b`, `has=latency`,
    /// `role=hub|core`, `sites>=N`.
    pub fn parse(clause: &str) -> Result<Applicability, CorpusError> {
        let clause = clause.trim();
        let bad = || CorpusError::BadApplicability(clause.to_owned());
        if clause == "always" {
            return Ok(Applicability::Always);
        }
        if let Some(n) = clause.strip_prefix("sites>=") {
            return n.trim().parse().map(Applicability::MinSites).map_err(|_| bad());
        }
        let (key, value) = clause.split_once('=').ok_or_else(bad)?;
        let values = value.split('|').map(str::trim);
        match key.trim() {
            "availability" => values
                .map(|v| Availability::from_keyword(v).ok_or_else(bad))
                .collect::<Result<_, _>>()
                .map(Applicability::Availability),
            "role" => values
                .map(|v| Role::from_keyword(v).ok_or_else(bad))
                .collect::<Result<_, _>>()
                .map(Applicability::Role),
            "has" => ConstraintKind::from_name(value.trim())
                .map(Applicability::Has)
                .ok_or_else(bad),
            _ => Err(bad()),
        }
    }

    pub fn holds(&self, intent: &StructuredIntent) -> bool {
        let c = &intent.constraints;
        match self {
            Applicability::Always => true,
            Applicability::Availability(list) => {
                intent.availability.is_some_and(|a| list.contains(&a))
            }
            Applicability::Has(kind) => match kind {
                ConstraintKind::Latency => c.latency_ms.is_some(),
                ConstraintKind::Budget => c.budget_usd.is_some(),
                ConstraintKind::DisjointPaths => c.disjoint_paths.is_some(),
                ConstraintKind::Compliance => c.compliance.is_some(),
                ConstraintKind::Locations => intent.sites.iter().any(|s| s.location.is_some()),
            },
            Applicability::Role(roles) => intent
                .sites
                .iter()
                .any(|s| s.role.is_some_and(|r| roles.contains(&r))),
            Applicability::MinSites(n) => intent.sites.len() >= *n,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GuidanceDocument {
    pub id: String,
    pub standard: String,
    pub topic_tags: Vec<String>,
    pub text: String,
    /// Comma-separated applicability clauses, as written in the file header.
    pub applicability: String,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum CorpusError {
    Empty,
    DuplicateId(String),
    NoTags(String),
    EmptyText(String),
    MissingHeader(&'static str),
    BadHeader(String),
    BadApplicability(String),
}

impl fmt::Display for CorpusError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CorpusError::Empty => f.write_str("guidance corpus is empty"),
            CorpusError::DuplicateId(id) => write!(f, "duplicate document id {id}"),
            CorpusError::NoTags(id) => write!(f, "document {id} has no topic tags"),
            CorpusError::EmptyText(id) => write!(f, "document {id} has no text"),
            CorpusError::MissingHeader(field) => write!(f, "missing header field {field}"),
            CorpusError::BadHeader(line) => write!(f, "malformed header: {line}"),
            CorpusError::BadApplicability(c) => write!(f, "bad applicability clause {c:?}"),
        }
    }
}

/// Parses a document file: a `---` delimited `key: value` header followed by
/// the guidance text.
pub fn parse_document(source: &str) -> Result<GuidanceDocument, CorpusError> {
    let source = source.trim_start_matches('\u{feff}');
    let rest = source
        .trim_start()
        .strip_prefix("---")
        .ok_or(CorpusError::MissingHeader("---"))?;
    let (header, body) = rest
        .split_once("\n---")
        .ok_or(CorpusError::MissingHeader("closing ---"))?;
    let mut fields: HashMap<&str, &str> = HashMap::new();
    for line in header.lines().map(str::trim).filter(|l| !l.is_empty()) {
        let (k, v) = line
            .split_once(':')
            .ok_or_else(|| CorpusError::BadHeader(line.to_owned()))?;
        fields.insert(k.trim(), v.trim());
    }
    let get = |k: &'static str| fields.get(k).copied().ok_or(CorpusError::MissingHeader(k));
    let doc = GuidanceDocument {
        id: get("id")?.to_owned(),
        standard: get("standard")?.to_owned(),
        topic_tags: get("topic_tags")?
            .split(',')
            .map(|t| t.trim().to_lowercase())
            .filter(|t| !t.is_empty())
            .collect(),
        text: body.trim_start_matches('-').trim().to_owned(),
        applicability: get("applicability").unwrap_or("always").to_owned(),
    };
    Ok(doc)
}

/// Lowercase, whitespace split, surrounding punctuation trimmed. `1+1`,
/// `high-availability` and `itu-t-g.652` stay single tokens.
pub fn tokenize(text: &str) -> Vec<String> {
    text.split_whitespace()
        .map(|w| {
            w.trim_matches(|c: char| !(c.is_alphanumeric() || c == '+'))
                .to_lowercase()
        })
        .filter(|w| !w.is_empty())
        .collect()
}

/// Query terms for an intent, in synthesis order.
pub fn synthesize_query(intent: &StructuredIntent) -> Vec<String> {
    let mut q: Vec<String> = Vec::new();
    if let Some(a) = intent.availability {
        q.push(a.as_str().to_owned());
    }
    for role in intent.roles() {
        q.push(role.as_str().to_owned());
    }
    let c = &intent.constraints;
    if c.latency_ms.is_some() {
        q.push("latency".to_owned());
    }
    if c.budget_usd.is_some() {
        q.push("budget".to_owned());
    }
    if c.disjoint_paths.is_some() {
        q.push("protection".to_owned());
        q.push("redundancy".to_owned());
    }
    for id in c.compliance.iter().flatten() {
        q.extend(tokenize(id));
    }
    q
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Guidance {
    pub doc_id: String,
    pub text: String,
    pub score: f64,
}

/// A structured intent plus retrieved guidance. The base intent is never
/// modified by enrichment.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnrichedIntent {
    #[serde(flatten)]
    pub base: StructuredIntent,
    pub guidance: Vec<Guidance>,
    pub standards_cited: Vec<String>,
}

impl EnrichedIntent {
    /// An intent with no guidance attached.
    pub fn bare(base: StructuredIntent) -> Self {
        EnrichedIntent {
            base,
            guidance: Vec::new(),
            standards_cited: Vec::new(),
        }
    }

    pub fn mentions(&self, needle: &str) -> bool {
        let needle = needle.to_lowercase();
        self.guidance
            .iter()
            .any(|g| g.text.to_lowercase().contains(&needle))
    }
}

struct Indexed {
    doc: GuidanceDocument,
    filter: Vec<Applicability>,
    tf: HashMap<String, u32>,
    len: usize,
}

/// Immutable, indexed guidance corpus.
pub struct Corpus {
    docs: Vec<Indexed>,
    df: HashMap<String, usize>,
    avg_len: f64,
}

impl fmt::Debug for Corpus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Corpus")
            .field("documents", &self.docs.len())
            .finish()
    }
}

impl Corpus {
    pub fn new(documents: Vec<GuidanceDocument>) -> Result<Corpus, CorpusError> {
        if documents.is_empty() {
            return Err(CorpusError::Empty);
        }
        let mut docs: Vec<Indexed> = Vec::with_capacity(documents.len());
        let mut df: HashMap<String, usize> = HashMap::new();
        for doc in documents {
            if docs.iter().any(|d| d.doc.id == doc.id) {
                return Err(CorpusError::DuplicateId(doc.id));
            }
            if doc.topic_tags.is_empty() {
                return Err(CorpusError::NoTags(doc.id));
            }
            if doc.text.trim().is_empty() {
                return Err(CorpusError::EmptyText(doc.id));
            }
            let filter = doc
                .applicability
                .split(',')
                .filter(|c| !c.trim().is_empty())
                .map(Applicability::parse)
                .collect::<Result<Vec<_>, _>>()?;
            let mut terms = tokenize(&doc.text);
            terms.extend(doc.topic_tags.iter().flat_map(|t| tokenize(t)));
            let mut tf: HashMap<String, u32> = HashMap::new();
            for t in &terms {
                *tf.entry(t.clone()).or_default() += 1;
            }
            for t in tf.keys() {
                *df.entry(t.clone()).or_default() += 1;
            }
            docs.push(Indexed {
                doc,
                filter,
                len: terms.len(),
                tf,
            });
        }
        let avg_len = docs.iter().map(|d| d.len as f64).sum::<f64>() / docs.len() as f64;
        Ok(Corpus { docs, df, avg_len })
    }

    pub fn len(&self) -> usize {
        self.docs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.docs.is_empty()
    }

    pub fn documents(&self) -> impl Iterator<Item = &GuidanceDocument> {
        self.docs.iter().map(|d| &d.doc)
    }

    /// Distinct standard identifiers, sorted. This is the compliance
    /// allowlist the grammar checks against.
    pub fn allowlist_standards(&self) -> Vec<String> {
        let mut out: Vec<String> = self.docs.iter().map(|d| d.doc.standard.clone()).collect();
        out.sort();
        out.dedup();
        out
    }

    fn idf(&self, term: &str) -> f64 {
        let n = self.docs.len() as f64;
        let df = self.df.get(term).copied().unwrap_or(0) as f64;
        libm::log(1.0 + (n - df + 0.5) / (df + 0.5))
    }

    /// Raw BM25 score of document `index` for the query terms. Repeated
    /// query terms count once.
    pub fn score(&self, query: &[String], index: usize) -> f64 {
        let d = &self.docs[index];
        let mut seen: Vec<&str> = Vec::new();
        let mut total = 0.0;
        for term in query {
            if seen.contains(&term.as_str()) {
                continue;
            }
            seen.push(term);
            let Some(&tf) = d.tf.get(term.as_str()) else {
                continue;
            };
            let tf = tf as f64;
            let norm = K1 * (1.0 - B + B * d.len as f64 / self.avg_len);
            total += self.idf(term) * tf * (K1 + 1.0) / (tf + norm);
        }
        total
    }

    pub fn applicable(&self, index: usize, intent: &StructuredIntent) -> bool {
        self.docs[index].filter.iter().all(|a| a.holds(intent))
    }

    /// Ranked (index, raw score) pairs of applicable documents with a
    /// positive score, best first, ties broken by document id.
    pub fn rank(&self, intent: &StructuredIntent) -> Vec<(usize, f64)> {
        let query = synthesize_query(intent);
        let mut scored: Vec<(usize, f64)> = (0..self.docs.len())
            .filter(|&i| self.applicable(i, intent))
            .map(|i| (i, self.score(&query, i)))
            .filter(|&(_, s)| s > 0.0)
            .collect();
        scored.sort_by(|a, b| {
            b.1.total_cmp(&a.1)
                .then_with(|| self.docs[a.0].doc.id.cmp(&self.docs[b.0].doc.id))
        });
        scored
    }

    /// Enriches an intent with the `top_k` best guidance clauses. Scores are
    /// divided by the best score, so the first entry is always 1.0.
    pub fn retrieve(&self, intent: &StructuredIntent, top_k: usize) -> EnrichedIntent {
        let mut ranked = self.rank(intent);
        ranked.truncate(top_k.max(1));
        let max = ranked.first().map_or(1.0, |r| r.1);
        let guidance: Vec<Guidance> = ranked
            .iter()
            .map(|&(i, s)| Guidance {
                doc_id: self.docs[i].doc.id.clone(),
                text: self.docs[i].doc.text.clone(),
                score: s / max,
            })
            .collect();
        let mut standards_cited: Vec<String> = ranked
            .iter()
            .map(|&(i, _)| self.docs[i].doc.standard.clone())
            .chain(intent.constraints.compliance.iter().flatten().cloned())
            .collect();
        standards_cited.sort();
        standards_cited.dedup();
        EnrichedIntent {
            base: intent.clone(),
            guidance,
            standards_cited,
        }
    }
}

impl fmt::Display for Guidance {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{}] {} ({:.3})", self.doc_id, self.text, self.score)
    }
}
