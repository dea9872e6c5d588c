//! Deployment plans: ordered ground actions with cumulative cost checkpoints,
//! or an infeasibility certificate.

use alloc::string::String;
use alloc::vec::Vec;
use core::fmt::{self, Write};

use serde::{Deserialize, Serialize};

use crate::money::format_usd;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PlanStep {
    pub action: String,
    pub args: Vec<String>,
    /// Total spent after this step.
    pub cumulative_cost: u64,
}

impl PlanStep {
    /// `(deploy-fiber SITE1 SITE2 fiber1)`
    pub fn signature(&self) -> String {
        let mut s = String::new();
        s.push('(');
        s.push_str(&self.action);
        for a in &self.args {
            s.push(' ');
            s.push_str(a);
        }
        s.push(')');
        s
    }
}

/// Why no plan exists.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind")]
pub enum InfeasibilityReason {
    /// Goal literals no sequence of actions can reach, even ignoring budget
    /// and delete effects.
    UnreachableGoals { literals: Vec<String> },
    /// Every plan costs at least `minimum_cost`, which exceeds the budget.
    BudgetShortfall {
        minimum_cost: u64,
        budget_limit: u64,
        shortfall: u64,
    },
    /// Exhaustive search found no plan.
    SearchExhausted { expanded_states: usize },
}

impl fmt::Display for InfeasibilityReason {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            InfeasibilityReason::UnreachableGoals { literals } => {
                write!(f, "unreachable goal literals: {}", literals.join(", "))
            }
            InfeasibilityReason::BudgetShortfall {
                minimum_cost,
                budget_limit,
                shortfall,
            } => write!(
                f,
                "the cheapest plan costs {} but the budget is {} (short by {})",
                format_usd(*minimum_cost),
                format_usd(*budget_limit),
                format_usd(*shortfall)
            ),
            InfeasibilityReason::SearchExhausted { expanded_states } => write!(
                f,
                "no plan reaches the goals ({expanded_states} states explored exhaustively)"
            ),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DeploymentPlan {
    pub steps: Vec<PlanStep>,
    pub total_cost: u64,
    pub feasible: bool,
    #[serde(default)]
    pub infeasibility_reason: Option<InfeasibilityReason>,
}

impl DeploymentPlan {
    /// Builds a feasible plan from `(action, args, cost)` triples, computing
    /// the running total.
    pub fn from_actions<I>(actions: I) -> DeploymentPlan
    where
        I: IntoIterator<Item = (String, Vec<String>, u64)>,
    {
        let mut total = 0u64;
        let steps = actions
            .into_iter()
            .map(|(action, args, cost)| {
                total += cost;
                PlanStep {
                    action,
                    args,
                    cumulative_cost: total,
                }
            })
            .collect();
        DeploymentPlan {
            steps,
            total_cost: total,
            feasible: true,
            infeasibility_reason: None,
        }
    }

    pub fn infeasible(reason: InfeasibilityReason) -> DeploymentPlan {
        DeploymentPlan {
            steps: Vec::new(),
            total_cost: 0,
            feasible: false,
            infeasibility_reason: Some(reason),
        }
    }

    /// Cumulative cost after step `n` (1-based).
    pub fn checkpoint(&self, n: usize) -> Option<u64> {
        n.checked_sub(1)
            .and_then(|i| self.steps.get(i))
            .map(|s| s.cumulative_cost)
    }

    /// Numbered text form: `1: (commission-site SITE1) ; cumulative=$0`.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        if !self.feasible {
            let _ = write!(out, "; infeasible");
            if let Some(r) = &self.infeasibility_reason {
                let _ = write!(out, ": {r}");
            }
            out.push('\n');
            return out;
        }
        for (i, s) in self.steps.iter().enumerate() {
            let _ = writeln!(
                out,
                "{}: {} ; cumulative={}",
                i + 1,
                s.signature(),
                format_usd(s.cumulative_cost)
            );
        }
        out
    }

    /// Maximal runs of consecutive steps with the same action, as
    /// `(action, count)`.
    pub fn phases(&self) -> Vec<(&str, usize)> {
        let mut out: Vec<(&str, usize)> = Vec::new();
        for s in &self.steps {
            match out.last_mut() {
                Some((name, n)) if *name == s.action => *n += 1,
                _ => out.push((&s.action, 1)),
            }
        }
        out
    }
}
