//! Pipeline sessions as an append-only event log. Every event names the
//! state it leads to; the session is the fold of its events, so a log read
//! back from disk rebuilds the same session.

use chrono::{DateTime, Utc};
use lightpath_core::design::{DegradedDesign, NetworkDesign};
use lightpath_core::feasibility::FeasibilityVerdict;
use lightpath_core::retrieval::EnrichedIntent;
use lightpath_core::triage::{Route, TriageDecision};
use lightpath_core::validate::ValidationReport;
use lightpath_core::{DeploymentPlan, StructuredIntent};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use uuid::Uuid;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum State {
    AwaitingIntent,
    Rephrasing,
    Parsed,
    AwaitingClarification,
    Enriched,
    Planning,
    PlanReady,
    Translating,
    DesignReady,
    Degraded,
    Failed,
}

impl State {
    pub const ALL: [State; 11] = [
        State::AwaitingIntent,
        State::Rephrasing,
        State::Parsed,
        State::AwaitingClarification,
        State::Enriched,
        State::Planning,
        State::PlanReady,
        State::Translating,
        State::DesignReady,
        State::Degraded,
        State::Failed,
    ];

    /// The transition relation. Any non-terminal state may fail.
    pub fn can_transition(self, to: State) -> bool {
        use State::*;
        if to == Failed {
            return !self.is_terminal();
        }
        matches!(
            (self, to),
            (AwaitingIntent, Rephrasing)
                | (Rephrasing, Rephrasing | Parsed | AwaitingClarification)
                | (AwaitingClarification, Rephrasing)
                | (Parsed, Enriched)
                | (Enriched, Planning)
                | (Planning, PlanReady | Degraded)
                | (PlanReady, Translating)
                | (Translating, DesignReady)
        )
    }

    pub fn is_terminal(self) -> bool {
        matches!(self, State::DesignReady | State::Degraded | State::Failed)
    }

    /// Waiting on the user rather than on the pipeline.
    pub fn is_resting(self) -> bool {
        self.is_terminal() || self == State::AwaitingClarification
    }
}

/// Pipeline stage an event belongs to, for timing reports.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Stage {
    Intake,
    Rephrase,
    Parse,
    Clarification,
    Enrichment,
    Feasibility,
    Planning,
    Translation,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum Payload {
    Created {
        text: String,
    },
    Rephrased {
        attempt: u32,
        sentence: String,
    },
    ParseFailed {
        attempt: u32,
        decision: TriageDecision,
    },
    Parsed {
        intent: StructuredIntent,
    },
    Clarified {
        text: String,
    },
    Enriched {
        intent: EnrichedIntent,
    },
    FeasibilityChecked {
        verdict: FeasibilityVerdict,
    },
    Planned {
        problem: String,
        plan: DeploymentPlan,
        validation: ValidationReport,
    },
    TranslationStarted,
    Translated {
        design: NetworkDesign,
    },
    Degraded {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        problem: Option<String>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        plan: Option<DeploymentPlan>,
        design: Box<DegradedDesign>,
    },
    Failed {
        stage: Stage,
        cause: String,
        transport: bool,
    },
}

impl Payload {
    pub fn stage(&self) -> Stage {
        match self {
            Payload::Created { .. } => Stage::Intake,
            Payload::Rephrased { .. } => Stage::Rephrase,
            Payload::ParseFailed { .. } | Payload::Parsed { .. } => Stage::Parse,
            Payload::Clarified { .. } => Stage::Clarification,
            Payload::Enriched { .. } => Stage::Enrichment,
            Payload::FeasibilityChecked { .. } => Stage::Feasibility,
            Payload::Planned { .. } => Stage::Planning,
            Payload::TranslationStarted | Payload::Translated { .. } => Stage::Translation,
            // degradation is the planning stage's outcome, timed with it
            Payload::Degraded { .. } => Stage::Planning,
            Payload::Failed { stage, .. } => *stage,
        }
    }

    /// The state this event leads to.
    pub fn target(&self) -> State {
        match self {
            Payload::Created { .. } => State::AwaitingIntent,
            Payload::Rephrased { .. } | Payload::Clarified { .. } => State::Rephrasing,
            Payload::ParseFailed { decision, .. } => match decision.route {
                Route::LlmFixable => State::Rephrasing,
                Route::UserRequired => State::AwaitingClarification,
            },
            Payload::Parsed { .. } => State::Parsed,
            Payload::Enriched { .. } => State::Enriched,
            Payload::FeasibilityChecked { .. } => State::Planning,
            Payload::Planned { .. } => State::PlanReady,
            Payload::TranslationStarted => State::Translating,
            Payload::Translated { .. } => State::DesignReady,
            Payload::Degraded { .. } => State::Degraded,
            Payload::Failed { .. } => State::Failed,
        }
    }

    pub fn digest(&self) -> String {
        let bytes = serde_json::to_vec(self).expect("payloads serialize");
        hex::encode(Sha256::digest(&bytes))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Event {
    pub seq: u64,
    pub at: DateTime<Utc>,
    pub stage: Stage,
    pub state: State,
    pub duration_ms: f64,
    /// SHA-256 of the JSON payload.
    pub digest: String,
    pub payload: Payload,
}

/// Event metadata without the payload, as shown in session history.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HistoryEntry {
    pub seq: u64,
    pub stage: Stage,
    pub state: State,
    pub at: DateTime<Utc>,
    pub duration_ms: f64,
    pub digest: String,
}

impl From<&Event> for HistoryEntry {
    fn from(e: &Event) -> Self {
        HistoryEntry {
            seq: e.seq,
            stage: e.stage,
            state: e.state,
            at: e.at,
            duration_ms: e.duration_ms,
            digest: e.digest.clone(),
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Artifacts {
    pub sentence: Option<String>,
    pub intent: Option<StructuredIntent>,
    pub enriched: Option<EnrichedIntent>,
    pub feasibility: Option<FeasibilityVerdict>,
    /// Problem file (PDDL) given to the planner.
    pub problem: Option<String>,
    pub plan: Option<DeploymentPlan>,
    pub validation: Option<ValidationReport>,
    pub design: Option<NetworkDesign>,
    pub degraded: Option<DegradedDesign>,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum SessionError {
    #[error("transition {from:?} -> {to:?} is not allowed")]
    Transition { from: State, to: State },
    #[error("event log is empty")]
    EmptyLog,
    #[error("event {seq}: {message}")]
    Corrupt { seq: u64, message: String },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Session {
    pub id: Uuid,
    pub state: State,
    pub created_at: DateTime<Utc>,
    /// The original request.
    pub text: String,
    /// User answers to clarification questions, oldest first.
    pub clarifications: Vec<String>,
    /// LLM-fixable re-prompts issued so far, across all rounds.
    pub retry_count: u32,
    /// The outstanding clarification, when awaiting one.
    pub pending: Option<TriageDecision>,
    pub artifacts: Artifacts,
    pub history: Vec<Event>,
}

impl Session {
    pub fn new(id: Uuid, text: impl Into<String>) -> Session {
        let text = text.into();
        let created = Event {
            seq: 0,
            at: Utc::now(),
            stage: Stage::Intake,
            state: State::AwaitingIntent,
            duration_ms: 0.0,
            digest: String::new(),
            payload: Payload::Created { text: text.clone() },
        };
        let mut s = Session {
            id,
            state: State::AwaitingIntent,
            created_at: created.at,
            text,
            clarifications: Vec::new(),
            retry_count: 0,
            pending: None,
            artifacts: Artifacts::default(),
            history: Vec::new(),
        };
        let mut created = created;
        created.digest = created.payload.digest();
        s.history.push(created);
        s
    }

    /// Text sent to the gateway: the request plus every clarification.
    pub fn effective_text(&self) -> String {
        let mut out = self.text.clone();
        for c in &self.clarifications {
            out.push('\n');
            out.push_str(c);
        }
        out
    }

    /// Appends an event, refusing transitions outside the machine.
    pub fn record(&mut self, payload: Payload, duration_ms: f64) -> Result<&Event, SessionError> {
        let to = payload.target();
        if !self.state.can_transition(to) {
            return Err(SessionError::Transition {
                from: self.state,
                to,
            });
        }
        let event = Event {
            seq: self.history.len() as u64,
            at: Utc::now(),
            stage: payload.stage(),
            state: to,
            duration_ms,
            digest: payload.digest(),
            payload,
        };
        self.apply(&event);
        self.history.push(event);
        Ok(self.history.last().expect("just pushed"))
    }

    fn apply(&mut self, event: &Event) {
        self.state = event.state;
        let a = &mut self.artifacts;
        match &event.payload {
            Payload::Created { text } => self.text = text.clone(),
            Payload::Rephrased { sentence, .. } => {
                a.sentence = Some(sentence.clone());
                self.pending = None;
            }
            Payload::ParseFailed { decision, .. } => {
                match decision.route {
                    Route::LlmFixable => self.retry_count += 1,
                    Route::UserRequired => self.pending = Some(decision.clone()),
                }
            }
            Payload::Parsed { intent } => a.intent = Some(intent.clone()),
            Payload::Clarified { text } => {
                self.clarifications.push(text.clone());
                self.pending = None;
            }
            Payload::Enriched { intent } => a.enriched = Some(intent.clone()),
            Payload::FeasibilityChecked { verdict } => a.feasibility = Some(verdict.clone()),
            Payload::Planned {
                problem,
                plan,
                validation,
            } => {
                a.problem = Some(problem.clone());
                a.plan = Some(plan.clone());
                a.validation = Some(validation.clone());
            }
            Payload::TranslationStarted => {}
            Payload::Translated { design } => a.design = Some(design.clone()),
            Payload::Degraded {
                problem,
                plan,
                design,
            } => {
                if problem.is_some() {
                    a.problem = problem.clone();
                }
                if plan.is_some() {
                    a.plan = plan.clone();
                }
                a.degraded = Some((**design).clone());
            }
            Payload::Failed { .. } => {}
        }
    }

    /// Rebuilds a session from its log, checking order, digests and
    /// transitions.
    pub fn replay(id: Uuid, events: Vec<Event>) -> Result<Session, SessionError> {
        let mut iter = events.into_iter();
        let first = iter.next().ok_or(SessionError::EmptyLog)?;
        let corrupt = |seq, message: &str| SessionError::Corrupt {
            seq,
            message: message.to_owned(),
        };
        let Payload::Created { text } = &first.payload else {
            return Err(corrupt(first.seq, "log does not start with a creation event"));
        };
        if first.seq != 0 || first.state != State::AwaitingIntent {
            return Err(corrupt(first.seq, "bad creation event"));
        }
        if first.digest != first.payload.digest() {
            return Err(corrupt(0, "digest mismatch"));
        }
        let mut s = Session {
            id,
            state: State::AwaitingIntent,
            created_at: first.at,
            text: text.clone(),
            clarifications: Vec::new(),
            retry_count: 0,
            pending: None,
            artifacts: Artifacts::default(),
            history: vec![first],
        };
        for e in iter {
            if e.seq != s.history.len() as u64 {
                return Err(corrupt(e.seq, "out of sequence"));
            }
            if e.digest != e.payload.digest() {
                return Err(corrupt(e.seq, "digest mismatch"));
            }
            if e.state != e.payload.target() {
                return Err(corrupt(e.seq, "state does not match payload"));
            }
            if !s.state.can_transition(e.state) {
                return Err(SessionError::Transition {
                    from: s.state,
                    to: e.state,
                });
            }
            s.apply(&e);
            s.history.push(e);
        }
        Ok(s)
    }

    pub fn history_entries(&self) -> Vec<HistoryEntry> {
        self.history.iter().map(HistoryEntry::from).collect()
    }

    /// States visited, in order, with consecutive repeats collapsed.
    pub fn state_trail(&self) -> Vec<State> {
        let mut out: Vec<State> = Vec::new();
        for e in &self.history {
            if out.last() != Some(&e.state) {
                out.push(e.state);
            }
        }
        out
    }

    /// Total recorded time per stage.
    pub fn stage_timings(&self) -> Vec<(Stage, f64)> {
        let mut out: Vec<(Stage, f64)> = Vec::new();
        for e in &self.history {
            match out.iter_mut().find(|(s, _)| *s == e.stage) {
                Some((_, ms)) => *ms += e.duration_ms,
                None => out.push((e.stage, e.duration_ms)),
            }
        }
        out
    }
}
