//! Error routing: which grammar errors the LLM may fix on its own and which
//! need the user, plus the hint text for either path and the evaluation
//! metrics over a labelled corpus.

use alloc::borrow::ToOwned;
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::fmt;

use serde::{Deserialize, Serialize};

use crate::grammar::{GrammarError, GrammarErrorKind};

/// Maximum automatic re-prompts for an LLM-fixable error before escalating.
pub const MAX_RETRIES: u32 = 3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Route {
    LlmFixable,
    UserRequired,
}

impl Route {
    pub fn of(kind: GrammarErrorKind) -> Route {
        match kind {
            GrammarErrorKind::SyntaxMalformation => Route::LlmFixable,
            GrammarErrorKind::MissingSites
            | GrammarErrorKind::VagueValue
            | GrammarErrorKind::InvalidRole
            | GrammarErrorKind::InvalidCompliance => Route::UserRequired,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TriageDecision {
    pub route: Route,
    pub hint: String,
    pub source_error: GrammarError,
}

/// Hint templates, one per error kind plus the escalation apology.
///
/// Slots: `{token}`, `{position}`, `{message}`, `{roles}`, `{standards}`,
/// `{attempts}`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct HintTemplates {
    pub missing_sites: String,
    pub vague_value: String,
    pub invalid_role: String,
    pub invalid_compliance: String,
    pub syntax_malformation: String,
    pub escalation: String,
}

impl Default for HintTemplates {
    fn default() -> Self {
        HintTemplates {
            missing_sites: "Please specify which sites/facilities you want to connect.".to_owned(),
            vague_value: "\"{token}\" is not a precise value. Please give an exact number instead of \"{token}\" ({message}).".to_owned(),
            invalid_role: "\"{token}\" is not a valid site role. Please choose one of: {roles}.".to_owned(),
            invalid_compliance: "\"{token}\" is not a supported standard. Please choose from: {standards}.".to_owned(),
            syntax_malformation: "The sentence breaks the grammar at \"{token}\" (character {position}): {message}. Rewrite it so it matches the grammar exactly, changing nothing else.".to_owned(),
            escalation: "Sorry, the request could not be rephrased into the intent grammar after {attempts} attempts (last problem: {message}). Please restate it, naming the sites to connect and giving exact numbers for any constraints.".to_owned(),
        }
    }
}

impl HintTemplates {
    pub fn for_kind(&self, kind: GrammarErrorKind) -> &str {
        match kind {
            GrammarErrorKind::MissingSites => &self.missing_sites,
            GrammarErrorKind::VagueValue => &self.vague_value,
            GrammarErrorKind::InvalidRole => &self.invalid_role,
            GrammarErrorKind::InvalidCompliance => &self.invalid_compliance,
            GrammarErrorKind::SyntaxMalformation => &self.syntax_malformation,
        }
    }
}

/// Triage bound to hint templates and the compliance allowlist.
#[derive(Debug, Clone, Default)]
pub struct Triage {
    templates: HintTemplates,
    standards: Vec<String>,
}

impl Triage {
    pub fn new(templates: HintTemplates, standards: Vec<String>) -> Self {
        Triage {
            templates,
            standards,
        }
    }

    pub fn templates(&self) -> &HintTemplates {
        &self.templates
    }

    pub fn triage(&self, error: &GrammarError) -> TriageDecision {
        let hint = self.fill(self.templates.for_kind(error.kind), error, 0);
        TriageDecision {
            route: Route::of(error.kind),
            hint,
            source_error: error.clone(),
        }
    }

    /// An LLM-fixable error that survived every retry goes to the user.
    pub fn escalate(&self, error: &GrammarError, attempts: u32) -> TriageDecision {
        TriageDecision {
            route: Route::UserRequired,
            hint: self.fill(&self.templates.escalation, error, attempts),
            source_error: error.clone(),
        }
    }

    fn fill(&self, template: &str, error: &GrammarError, attempts: u32) -> String {
        let token = if error.offending_token.is_empty() {
            "(end of sentence)"
        } else {
            error.offending_token.as_str()
        };
        let roles = "hub, core, edge";
        template
            .replace("{token}", token)
            .replace("{position}", &error.position.to_string())
            .replace("{message}", &error.message)
            .replace("{roles}", roles)
            .replace("{standards}", &self.standards.join(", "))
            .replace("{attempts}", &attempts.to_string())
    }
}

/// Expected label for one evaluation case.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Tier {
    Basic,
    Intermediate,
    Complex,
}

impl Tier {
    pub const ALL: [Tier; 3] = [Tier::Basic, Tier::Intermediate, Tier::Complex];

    pub fn as_str(self) -> &'static str {
        match self {
            Tier::Basic => "basic",
            Tier::Intermediate => "intermediate",
            Tier::Complex => "complex",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(tag = "type", content = "value", rename_all = "snake_case")]
pub enum Expected {
    Valid(Tier),
    Error(GrammarErrorKind),
}

/// One evaluated case: what was expected, what the parser reported
/// (`None` for a successful parse) and how long stage 1 took.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CaseResult {
    pub expected: Expected,
    pub observed: Option<GrammarErrorKind>,
    pub elapsed_ms: f64,
}

/// `numerator / denominator` with a percentage rounded to one decimal.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Rate {
    pub numerator: usize,
    pub denominator: usize,
}

impl Rate {
    pub fn new(numerator: usize, denominator: usize) -> Self {
        Rate {
            numerator,
            denominator,
        }
    }

    /// Tenths of a percent, rounded half up. An empty denominator counts as
    /// 100%: nothing was missed.
    pub fn permille(&self) -> u64 {
        if self.denominator == 0 {
            return 1000;
        }
        let (n, d) = (self.numerator as u64, self.denominator as u64);
        (n * 2000 + d) / (2 * d)
    }

    pub fn percent(&self) -> f64 {
        self.permille() as f64 / 10.0
    }
}

impl fmt::Display for Rate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let p = self.permille();
        write!(f, "{}.{}%", p / 10, p % 10)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KindRow {
    pub kind: GrammarErrorKind,
    pub tests: usize,
    pub detected: usize,
    pub correct: usize,
    /// correct / tests
    pub accuracy: Rate,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TierRow {
    pub tier: Tier,
    pub passed: Rate,
}

/// Tables 1 and 2 of the evaluation: overall rates, then per error kind.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricsReport {
    pub pass_through: Rate,
    pub detection: Rate,
    pub classification: Rate,
    pub mean_processing_ms: f64,
    pub per_tier: Vec<TierRow>,
    pub per_kind: Vec<KindRow>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct EmptyResults;

impl fmt::Display for EmptyResults {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("no evaluation results to aggregate")
    }
}

pub fn classification_metrics(results: &[CaseResult]) -> Result<MetricsReport, EmptyResults> {
    if results.is_empty() {
        return Err(EmptyResults);
    }
    let mut valid = (0, 0);
    let mut invalid = (0, 0);
    let mut correct = 0;
    let mut per_tier: Vec<TierRow> = Vec::new();
    let mut per_kind: Vec<KindRow> = Vec::new();
    for r in results {
        match r.expected {
            Expected::Valid(tier) => {
                let ok = r.observed.is_none();
                valid.1 += 1;
                valid.0 += ok as usize;
                let row = match per_tier.iter_mut().find(|t| t.tier == tier) {
                    Some(row) => row,
                    None => {
                        per_tier.push(TierRow {
                            tier,
                            passed: Rate::new(0, 0),
                        });
                        per_tier.last_mut().unwrap()
                    }
                };
                row.passed.denominator += 1;
                row.passed.numerator += ok as usize;
            }
            Expected::Error(kind) => {
                let detected = r.observed.is_some();
                let right = r.observed == Some(kind);
                invalid.1 += 1;
                invalid.0 += detected as usize;
                correct += right as usize;
                let row = match per_kind.iter_mut().find(|k| k.kind == kind) {
                    Some(row) => row,
                    None => {
                        per_kind.push(KindRow {
                            kind,
                            tests: 0,
                            detected: 0,
                            correct: 0,
                            accuracy: Rate::new(0, 0),
                        });
                        per_kind.last_mut().unwrap()
                    }
                };
                row.tests += 1;
                row.detected += detected as usize;
                row.correct += right as usize;
                row.accuracy = Rate::new(row.correct, row.tests);
            }
        }
    }
    per_tier.sort_by_key(|t| t.tier as u8);
    per_kind.sort_by_key(|k| k.kind);
    let mean = results.iter().map(|r| r.elapsed_ms).sum::<f64>() / results.len() as f64;
    Ok(MetricsReport {
        pass_through: Rate::new(valid.0, valid.1),
        detection: Rate::new(invalid.0, invalid.1),
        classification: Rate::new(correct, invalid.0),
        mean_processing_ms: mean,
        per_tier,
        per_kind,
    })
}

impl MetricsReport {
    /// Plain-text rendering of both tables, columns aligned.
    pub fn to_table(&self) -> String {
        let mut out = String::new();
        let rows: [(&str, String); 4] = [
            ("Valid Intent Pass-Through Rate", self.pass_through.to_string()),
            ("Error Detection Rate", self.detection.to_string()),
            ("Error Classification Accuracy", self.classification.to_string()),
            (
                "Average Processing Time",
                format!("{:.1}ms", self.mean_processing_ms),
            ),
        ];
        out.push_str(&format!("{:<32} {:>10}\n", "Metric", "Result"));
        for (name, value) in rows {
            out.push_str(&format!("{name:<32} {value:>10}\n"));
        }
        for t in &self.per_tier {
            out.push_str(&format!(
                "  {:<30} {:>10}\n",
                format!("{} ({}/{})", t.tier.as_str(), t.passed.numerator, t.passed.denominator),
                t.passed.to_string()
            ));
        }
        out.push('\n');
        out.push_str(&format!(
            "{:<20} {:>6} {:>9} {:>8} {:>8}\n",
            "Error Type", "Tests", "Detected", "Correct", "Acc.%"
        ));
        for k in &self.per_kind {
            out.push_str(&format!(
                "{:<20} {:>6} {:>9} {:>8} {:>8}\n",
                k.kind.as_str(),
                k.tests,
                k.detected,
                k.correct,
                k.accuracy.to_string()
            ));
        }
        out
    }
}
