//! Independent plan validation. Plans are replayed over literal atoms taken
//! straight from the domain and problem, sharing no code with the grounder or
//! the search.

use alloc::collections::BTreeSet;
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::fmt;

use serde::{Deserialize, Serialize};

use crate::pddl::{Atom, Domain, Problem};
use crate::plan::DeploymentPlan;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind")]
pub enum ValidationFailure {
    PlanMarkedInfeasible,
    UnknownAction { step: usize, action: String },
    BadArguments { step: usize, message: String },
    MissingPrecondition { step: usize, literal: String },
    BudgetExceeded { step: usize, cumulative: u64, budget_limit: u64 },
    CostMismatch { step: usize, claimed: u64, actual: u64 },
    TotalMismatch { claimed: u64, actual: u64 },
    GoalsUnmet { literals: Vec<String> },
}

impl fmt::Display for ValidationFailure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ValidationFailure::PlanMarkedInfeasible => f.write_str("the plan is marked infeasible"),
            ValidationFailure::UnknownAction { step, action } => {
                write!(f, "step {step}: unknown action {action}")
            }
            ValidationFailure::BadArguments { step, message } => write!(f, "step {step}: {message}"),
            ValidationFailure::MissingPrecondition { step, literal } => {
                write!(f, "step {step}: precondition {literal} does not hold")
            }
            ValidationFailure::BudgetExceeded {
                step,
                cumulative,
                budget_limit,
            } => write!(f, "step {step}: cost {cumulative} exceeds budget {budget_limit}"),
            ValidationFailure::CostMismatch {
                step,
                claimed,
                actual,
            } => write!(f, "step {step}: claimed cumulative cost {claimed}, actual {actual}"),
            ValidationFailure::TotalMismatch { claimed, actual } => {
                write!(f, "claimed total cost {claimed}, actual {actual}")
            }
            ValidationFailure::GoalsUnmet { literals } => {
                write!(f, "goals not reached: {}", literals.join(", "))
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ValidationReport {
    pub valid: bool,
    /// Steps replayed before the first failure (all of them when valid).
    pub steps_checked: usize,
    pub total_cost: u64,
    pub failure: Option<ValidationFailure>,
}

impl ValidationReport {
    fn fail(steps_checked: usize, total_cost: u64, failure: ValidationFailure) -> Self {
        ValidationReport {
            valid: false,
            steps_checked,
            total_cost,
            failure: Some(failure),
        }
    }
}

fn substitute(atom: &Atom, params: &[crate::pddl::Typed], args: &[String]) -> Atom {
    Atom {
        predicate: atom.predicate.clone(),
        args: atom
            .args
            .iter()
            .map(|a| match params.iter().position(|p| &p.name == a) {
                Some(i) => args[i].clone(),
                None => a.clone(),
            })
            .collect(),
    }
}

/// Replays `plan` from the initial state of `problem`.
pub fn validate(domain: &Domain, problem: &Problem, plan: &DeploymentPlan) -> ValidationReport {
    if !plan.feasible {
        return ValidationReport::fail(0, 0, ValidationFailure::PlanMarkedInfeasible);
    }
    let mut state: BTreeSet<Atom> = problem.init.iter().cloned().collect();
    let mut spent = 0u64;
    for (i, step) in plan.steps.iter().enumerate() {
        let n = i + 1;
        let Some(schema) = domain.actions.iter().find(|a| a.name == step.action) else {
            return ValidationReport::fail(
                i,
                spent,
                ValidationFailure::UnknownAction {
                    step: n,
                    action: step.action.clone(),
                },
            );
        };
        if schema.parameters.len() != step.args.len() {
            return ValidationReport::fail(
                i,
                spent,
                ValidationFailure::BadArguments {
                    step: n,
                    message: format!(
                        "{} takes {} arguments, got {}",
                        schema.name,
                        schema.parameters.len(),
                        step.args.len()
                    ),
                },
            );
        }
        for (p, a) in schema.parameters.iter().zip(&step.args) {
            let ok = problem
                .object_type(a)
                .is_some_and(|ty| domain.is_subtype(ty, &p.ty));
            if !ok {
                return ValidationReport::fail(
                    i,
                    spent,
                    ValidationFailure::BadArguments {
                        step: n,
                        message: format!("{a} is not an object of type {}", p.ty),
                    },
                );
            }
        }
        for pre in &schema.preconditions {
            let lit = substitute(pre, &schema.parameters, &step.args);
            if !state.contains(&lit) {
                return ValidationReport::fail(
                    i,
                    spent,
                    ValidationFailure::MissingPrecondition {
                        step: n,
                        literal: lit.to_string(),
                    },
                );
            }
        }
        if let Some(c) = schema.guard {
            let after = spent.saturating_add(c);
            if after > problem.budget_limit {
                return ValidationReport::fail(
                    i,
                    spent,
                    ValidationFailure::BudgetExceeded {
                        step: n,
                        cumulative: after,
                        budget_limit: problem.budget_limit,
                    },
                );
            }
        }
        for d in &schema.delete {
            state.remove(&substitute(d, &schema.parameters, &step.args));
        }
        for a in &schema.add {
            state.insert(substitute(a, &schema.parameters, &step.args));
        }
        spent = spent.saturating_add(schema.cost);
        if step.cumulative_cost != spent {
            return ValidationReport::fail(
                n,
                spent,
                ValidationFailure::CostMismatch {
                    step: n,
                    claimed: step.cumulative_cost,
                    actual: spent,
                },
            );
        }
    }
    let steps = plan.steps.len();
    if plan.total_cost != spent {
        return ValidationReport::fail(
            steps,
            spent,
            ValidationFailure::TotalMismatch {
                claimed: plan.total_cost,
                actual: spent,
            },
        );
    }
    let unmet: Vec<String> = problem
        .goals
        .iter()
        .filter(|g| !state.contains(*g))
        .map(|g| g.to_string())
        .collect();
    if !unmet.is_empty() {
        return ValidationReport::fail(steps, spent, ValidationFailure::GoalsUnmet { literals: unmet });
    }
    ValidationReport {
        valid: true,
        steps_checked: steps,
        total_cost: spent,
        failure: None,
    }
}

/// A plan that passed [`validate`] against its problem. Only [`certify`]
/// constructs one, so design translation cannot see unchecked plans.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(transparent)]
pub struct ValidatedPlan(DeploymentPlan);

impl ValidatedPlan {
    pub fn plan(&self) -> &DeploymentPlan {
        &self.0
    }

    pub fn into_inner(self) -> DeploymentPlan {
        self.0
    }
}

impl core::ops::Deref for ValidatedPlan {
    type Target = DeploymentPlan;

    fn deref(&self) -> &DeploymentPlan {
        &self.0
    }
}

pub fn certify(
    domain: &Domain,
    problem: &Problem,
    plan: DeploymentPlan,
) -> Result<ValidatedPlan, ValidationReport> {
    let report = validate(domain, problem, &plan);
    if report.valid {
        Ok(ValidatedPlan(plan))
    } else {
        Err(report)
    }
}
