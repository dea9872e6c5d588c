//! Stage-1 evaluation over a labelled corpus.

use std::collections::BTreeSet;
use std::path::Path;
use std::time::Instant;

use lightpath_core::triage::{classification_metrics, CaseResult, Expected, MetricsReport, Triage};
use lightpath_core::{GrammarErrorKind, IntentParser};
use serde::{Deserialize, Serialize};

use crate::gateway::{GatewayError, Rephraser};
use crate::pipeline::{run_stage_one, Stage1Failure};

pub const BUNDLED_EVAL_CORPUS: &str = include_str!("../data/eval/corpus.json");
pub const BUNDLED_EVAL_RULES: &str = include_str!("../data/eval/mock_rules.toml");

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EvalCase {
    pub id: String,
    /// Free-form request as a user would type it.
    pub user_text: String,
    /// The grammar sentence a faithful rephrasing produces.
    pub canonical: String,
    pub expected: Expected,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EvalCorpus {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    pub cases: Vec<EvalCase>,
}

#[derive(Debug, thiserror::Error)]
pub enum EvalError {
    #[error("corpus: {0}")]
    Shape(String),
    #[error("cannot read corpus {path}: {message}")]
    Read { path: String, message: String },
    #[error("case {case}: {source}")]
    Gateway { case: String, source: GatewayError },
}

impl EvalCorpus {
    pub fn from_json(text: &str) -> Result<EvalCorpus, EvalError> {
        let corpus: EvalCorpus = serde_json::from_str(text).map_err(|e| EvalError::Shape(e.to_string()))?;
        corpus.check()?;
        Ok(corpus)
    }

    pub fn load(path: &Path) -> Result<EvalCorpus, EvalError> {
        let text = std::fs::read_to_string(path).map_err(|e| EvalError::Read {
            path: path.display().to_string(),
            message: e.to_string(),
        })?;
        EvalCorpus::from_json(&text)
    }

    pub fn bundled() -> EvalCorpus {
        EvalCorpus::from_json(BUNDLED_EVAL_CORPUS).expect("bundled corpus is well formed")
    }

    /// Non-empty, unique ids, no blank texts.
    pub fn check(&self) -> Result<(), EvalError> {
        if self.cases.is_empty() {
            return Err(EvalError::Shape("no cases".into()));
        }
        let mut ids = BTreeSet::new();
        for c in &self.cases {
            if c.id.trim().is_empty() {
                return Err(EvalError::Shape("a case has an empty id".into()));
            }
            if !ids.insert(c.id.as_str()) {
                return Err(EvalError::Shape(format!("duplicate case id {}", c.id)));
            }
            if c.user_text.trim().is_empty() || c.canonical.trim().is_empty() {
                return Err(EvalError::Shape(format!("case {} has blank text", c.id)));
            }
        }
        Ok(())
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("corpus serializes");
        s.push('\n');
        s
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EvalMode {
    /// Parse the canonical sentence directly; no gateway, no retries.
    Bypass,
    /// Send the free-form text through the gateway and the retry loop.
    Gateway,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CaseOutcome {
    pub id: String,
    pub expected: Expected,
    pub observed: Option<GrammarErrorKind>,
    /// Sentence the parser finally saw.
    pub sentence: Option<String>,
    pub gateway_calls: u32,
    pub elapsed_ms: f64,
    pub passed: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub mode: EvalMode,
    pub cases: Vec<CaseOutcome>,
    pub metrics: MetricsReport,
}

impl EvalReport {
    pub fn failures(&self) -> impl Iterator<Item = &CaseOutcome> {
        self.cases.iter().filter(|c| !c.passed)
    }
}

/// Runs every case. A gateway error aborts the run: a partial report would
/// misstate the rates.
pub fn run_eval(
    corpus: &EvalCorpus,
    mode: EvalMode,
    parser: &IntentParser,
    triage: &Triage,
    gateway: Option<&dyn Rephraser>,
) -> Result<EvalReport, EvalError> {
    corpus.check()?;
    let gateway = match (mode, gateway) {
        (EvalMode::Gateway, None) => return Err(EvalError::Shape("gateway mode needs a gateway".into())),
        (_, g) => g,
    };
    let mut cases = Vec::with_capacity(corpus.cases.len());
    let mut results = Vec::with_capacity(corpus.cases.len());
    for case in &corpus.cases {
        let t = Instant::now();
        let (observed, sentence, calls) = match (mode, gateway) {
            (EvalMode::Gateway, Some(g)) => {
                let out = run_stage_one(g, parser, triage, &case.user_text);
                let observed = match out.result {
                    Ok(_) => None,
                    Err(Stage1Failure::Clarify(d)) => Some(d.source_error.kind),
                    Err(Stage1Failure::Gateway(source)) => {
                        return Err(EvalError::Gateway {
                            case: case.id.clone(),
                            source,
                        })
                    }
                };
                (observed, out.sentence, out.calls)
            }
            _ => {
                let observed = parser.parse(&case.canonical).err().map(|e| e.kind);
                (observed, Some(case.canonical.clone()), 0)
            }
        };
        let elapsed_ms = t.elapsed().as_secs_f64() * 1000.0;
        let passed = match case.expected {
            Expected::Valid(_) => observed.is_none(),
            Expected::Error(kind) => observed == Some(kind),
        };
        results.push(CaseResult {
            expected: case.expected,
            observed,
            elapsed_ms,
        });
        cases.push(CaseOutcome {
            id: case.id.clone(),
            expected: case.expected,
            observed,
            sentence,
            gateway_calls: calls,
            elapsed_ms,
            passed,
        });
    }
    let metrics = classification_metrics(&results).map_err(|e| EvalError::Shape(e.to_string()))?;
    Ok(EvalReport { mode, cases, metrics })
}
