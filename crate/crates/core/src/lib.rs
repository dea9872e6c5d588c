//! Core algorithms for turning optical network intents into verified designs.
//!
//! The crate is `no_std` (with `alloc`) so the pipeline logic can be embedded
//! anywhere; file formats, networking and the CLI live in the `lightpath`
//! companion crate.
//!
//! Pipeline order:
//!
//! 1. [`grammar`] parses grammar-shaped intent sentences into a
//!    [`StructuredIntent`] or a typed [`GrammarError`], and [`triage`] routes
//!    errors to the LLM retry loop or to the user.
//! 2. [`retrieval`] enriches the intent with optical-standards guidance,
//!    [`feasibility`] checks latency physics, [`generate`] builds a planning
//!    problem and [`planner`] solves it against the shipped [`pddl`] domain.
//!    [`validate`] re-checks the plan independently.
//! 3. [`design`] translates a validated plan into a costed network design, or
//!    degrades to an unverified heuristic topology when planning fails.

#![cfg_attr(not(feature = "std"), no_std)]

extern crate alloc;

pub mod design;
pub mod feasibility;
pub mod generate;
pub mod grammar;
pub mod intent;
pub mod money;
pub mod pddl;
pub mod plan;
pub mod planner;
pub mod retrieval;
pub mod triage;
pub mod validate;

pub use grammar::{parse_intent, GrammarError, GrammarErrorKind, IntentParser, IntentSentence};
pub use intent::{Availability, ConstraintSet, Role, SiteSpec, StructuredIntent};
pub use plan::DeploymentPlan;
