//! The three pipeline stages driven over a [`Session`].

use std::sync::Arc;
use std::time::Instant;

use lightpath_core::design::{degrade, translate, DegradationCause};
use lightpath_core::feasibility::check_latency;
use lightpath_core::generate::{generate_problem, GenerateOptions, ProtectionMode};
use lightpath_core::planner::{Planner, PlannerConfig};
use lightpath_core::triage::{Route, Triage, MAX_RETRIES};
use lightpath_core::validate::{certify, validate};
use lightpath_core::{IntentParser, StructuredIntent};

use crate::config::Config;
use crate::data::Resources;
use crate::gateway::{GatewayError, RephraseRequest, Rephraser};
use crate::session::{Payload, Session, SessionError, Stage, State};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum EngineError {
    #[error("session is {0:?}; this request is not allowed now")]
    WrongState(State),
    #[error(transparent)]
    Session(#[from] SessionError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct EngineSettings {
    pub auto_advance: bool,
    pub top_k: usize,
    pub protection: ProtectionMode,
    pub planner: PlannerConfig,
}

impl Default for EngineSettings {
    fn default() -> Self {
        let c = Config::default();
        EngineSettings::from(&c)
    }
}

impl From<&Config> for EngineSettings {
    fn from(c: &Config) -> Self {
        EngineSettings {
            auto_advance: c.pipeline.auto_advance,
            top_k: c.pipeline.top_k,
            protection: c.planner.protection,
            planner: c.planner.planner_config(),
        }
    }
}

/// Runs pipeline stages. Holds no per-session state, so one engine serves
/// any number of sessions concurrently.
pub struct Engine {
    resources: Arc<Resources>,
    gateway: Arc<dyn Rephraser>,
    settings: EngineSettings,
    parser: IntentParser,
    triage: Triage,
}

fn elapsed_ms(start: Instant) -> f64 {
    start.elapsed().as_secs_f64() * 1000.0
}

/// Outcome of stage 1 on its own, without a session.
#[derive(Debug, Clone, PartialEq)]
pub struct Stage1 {
    pub sentence: Option<String>,
    pub result: Result<StructuredIntent, Stage1Failure>,
    /// Gateway calls made (1 + retries).
    pub calls: u32,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Stage1Failure {
    /// Needs the user; carries the triage decision.
    Clarify(lightpath_core::triage::TriageDecision),
    Gateway(GatewayError),
}

impl Engine {
    pub fn new(resources: Arc<Resources>, gateway: Arc<dyn Rephraser>, settings: EngineSettings) -> Engine {
        let parser = resources.parser();
        let triage = resources.triage();
        Engine {
            resources,
            gateway,
            settings,
            parser,
            triage,
        }
    }

    pub fn resources(&self) -> &Resources {
        &self.resources
    }

    pub fn settings(&self) -> &EngineSettings {
        &self.settings
    }

    pub fn gateway(&self) -> &dyn Rephraser {
        &*self.gateway
    }

    /// Starts a fresh session on its request text.
    pub fn submit(&self, s: &mut Session) -> Result<(), EngineError> {
        if s.state != State::AwaitingIntent {
            return Err(EngineError::WrongState(s.state));
        }
        self.drive(s)
    }

    /// Adds the user's answer and reruns stage 1 with it.
    pub fn clarify(&self, s: &mut Session, text: &str) -> Result<(), EngineError> {
        if s.state != State::AwaitingClarification {
            return Err(EngineError::WrongState(s.state));
        }
        s.record(Payload::Clarified { text: text.to_owned() }, 0.0)?;
        self.drive(s)
    }

    /// Runs the next stage (or, with auto-advance, every remaining stage).
    pub fn advance(&self, s: &mut Session) -> Result<(), EngineError> {
        if s.state.is_resting() {
            return Err(EngineError::WrongState(s.state));
        }
        if self.settings.auto_advance {
            self.drive(s)
        } else {
            self.step(s)
        }
    }

    fn drive(&self, s: &mut Session) -> Result<(), EngineError> {
        self.step(s)?;
        if self.settings.auto_advance {
            while !s.state.is_resting() {
                self.step(s)?;
            }
        }
        Ok(())
    }

    /// Exactly one stage.
    fn step(&self, s: &mut Session) -> Result<(), EngineError> {
        match s.state {
            State::AwaitingIntent | State::Rephrasing => self.stage_one(s),
            State::Parsed => self.enrich(s),
            State::Enriched => self.feasibility(s),
            State::Planning => self.plan(s),
            State::PlanReady | State::Translating => self.translate(s),
            other => Err(EngineError::WrongState(other)),
        }
    }

    fn fail(&self, s: &mut Session, stage: Stage, cause: String, transport: bool) -> Result<(), EngineError> {
        s.record(
            Payload::Failed {
                stage,
                cause,
                transport,
            },
            0.0,
        )?;
        Ok(())
    }

    /// Rephrase, parse, triage; re-prompt LLM-fixable errors up to
    /// [`MAX_RETRIES`] times.
    fn stage_one(&self, s: &mut Session) -> Result<(), EngineError> {
        let mut request = RephraseRequest::new(s.effective_text());
        loop {
            let t = Instant::now();
            let sentence = match self.gateway.rephrase(&request) {
                Ok(sentence) => sentence,
                Err(e) => {
                    let transport = e.is_transport();
                    return self.fail(s, Stage::Rephrase, e.to_string(), transport);
                }
            };
            s.record(
                Payload::Rephrased {
                    attempt: request.attempt,
                    sentence: sentence.as_str().to_owned(),
                },
                elapsed_ms(t),
            )?;
            let t = Instant::now();
            match self.parser.parse(sentence.as_str()) {
                Ok(intent) => {
                    s.record(Payload::Parsed { intent }, elapsed_ms(t))?;
                    return Ok(());
                }
                Err(error) => {
                    let mut decision = self.triage.triage(&error);
                    let retry = decision.route == Route::LlmFixable && request.attempt < MAX_RETRIES;
                    if decision.route == Route::LlmFixable && !retry {
                        decision = self.triage.escalate(&error, request.attempt + 1);
                    }
                    let hint = decision.hint.clone();
                    s.record(
                        Payload::ParseFailed {
                            attempt: request.attempt,
                            decision,
                        },
                        elapsed_ms(t),
                    )?;
                    if !retry {
                        return Ok(());
                    }
                    request = request.retry(hint);
                }
            }
        }
    }

    fn enrich(&self, s: &mut Session) -> Result<(), EngineError> {
        let t = Instant::now();
        let intent = s.artifacts.intent.clone().expect("parsed session has an intent");
        let enriched = self.resources.corpus.retrieve(&intent, self.settings.top_k);
        s.record(Payload::Enriched { intent: enriched }, elapsed_ms(t))?;
        Ok(())
    }

    fn feasibility(&self, s: &mut Session) -> Result<(), EngineError> {
        let t = Instant::now();
        let intent = s.artifacts.intent.as_ref().expect("enriched session has an intent");
        let verdict = check_latency(intent, &self.resources.registry);
        s.record(Payload::FeasibilityChecked { verdict }, elapsed_ms(t))?;
        Ok(())
    }

    fn plan(&self, s: &mut Session) -> Result<(), EngineError> {
        let t = Instant::now();
        let enriched = s.artifacts.enriched.clone().expect("planning session is enriched");
        let verdict = s.artifacts.feasibility.clone().expect("feasibility ran");
        let res = &self.resources;
        let options = GenerateOptions {
            protection: self.settings.protection,
            latency_ok: verdict.feasible,
        };
        let problem = generate_problem(&enriched, options);
        let problem_text = problem.to_pddl();
        let plan = match Planner::new(self.settings.planner).solve(&res.domain, &problem) {
            Ok(plan) => plan,
            Err(e) => return self.fail(s, Stage::Planning, e.to_string(), false),
        };
        if !verdict.feasible || !plan.feasible {
            let cause = if verdict.feasible {
                DegradationCause::Planning(
                    plan.infeasibility_reason.clone().expect("infeasible plans carry a reason"),
                )
            } else {
                DegradationCause::Physics(verdict)
            };
            let design = degrade(&enriched, cause, &res.tables, &res.registry);
            s.record(
                Payload::Degraded {
                    problem: Some(problem_text),
                    plan: Some(plan),
                    design: Box::new(design),
                },
                elapsed_ms(t),
            )?;
            return Ok(());
        }
        let validation = validate(&res.domain, &problem, &plan);
        if !validation.valid {
            let why = validation
                .failure
                .map(|f| format!("{f:?}"))
                .unwrap_or_else(|| "unknown".into());
            return self.fail(s, Stage::Planning, format!("planner output failed validation: {why}"), false);
        }
        s.record(
            Payload::Planned {
                problem: problem_text,
                plan,
                validation,
            },
            elapsed_ms(t),
        )?;
        Ok(())
    }

    fn translate(&self, s: &mut Session) -> Result<(), EngineError> {
        if s.state == State::PlanReady {
            s.record(Payload::TranslationStarted, 0.0)?;
        }
        let t = Instant::now();
        let res = &self.resources;
        let enriched = s.artifacts.enriched.clone().expect("translating session is enriched");
        let verdict = s.artifacts.feasibility.clone().expect("feasibility ran");
        let plan = s.artifacts.plan.clone().expect("plan ready");
        // the plan is re-checked against a regenerated problem: an event log
        // edited by hand cannot smuggle an unverified plan into a design
        let problem = generate_problem(
            &enriched,
            GenerateOptions {
                protection: self.settings.protection,
                latency_ok: verdict.feasible,
            },
        );
        let validated = match certify(&res.domain, &problem, plan) {
            Ok(v) => v,
            Err(_) => {
                return self.fail(s, Stage::Translation, "stored plan no longer validates".into(), false)
            }
        };
        match translate(&validated, &enriched, &res.tables, &res.registry) {
            Ok(design) => {
                s.record(Payload::Translated { design }, elapsed_ms(t))?;
                Ok(())
            }
            Err(e) => self.fail(s, Stage::Translation, e.to_string(), false),
        }
    }

    /// Stage 1 alone, for `parse` and the evaluation harness.
    pub fn stage_one_only(&self, text: &str) -> Stage1 {
        run_stage_one(&*self.gateway, &self.parser, &self.triage, text)
    }
}

/// Rephrase-parse-triage loop without a session.
pub fn run_stage_one(gateway: &dyn Rephraser, parser: &IntentParser, triage: &Triage, text: &str) -> Stage1 {
    let mut request = RephraseRequest::new(text);
    let mut calls = 0;
    loop {
        calls += 1;
        let sentence = match gateway.rephrase(&request) {
            Ok(s) => s,
            Err(e) => {
                return Stage1 {
                    sentence: None,
                    result: Err(Stage1Failure::Gateway(e)),
                    calls,
                }
            }
        };
        match parser.parse(sentence.as_str()) {
            Ok(intent) => {
                return Stage1 {
                    sentence: Some(sentence.into_inner()),
                    result: Ok(intent),
                    calls,
                }
            }
            Err(error) => {
                let decision = triage.triage(&error);
                if decision.route == Route::LlmFixable && request.attempt < MAX_RETRIES {
                    request = request.retry(decision.hint);
                    continue;
                }
                let decision = if decision.route == Route::LlmFixable {
                    triage.escalate(&error, request.attempt + 1)
                } else {
                    decision
                };
                return Stage1 {
                    sentence: Some(sentence.into_inner()),
                    result: Err(Stage1Failure::Clarify(decision)),
                    calls,
                };
            }
        }
    }
}
