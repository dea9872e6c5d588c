use alloc::borrow::ToOwned;
use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;
use core::fmt::Write;

use serde::{Deserialize, Serialize};

use super::{build, DesignTables, NetworkDesign};
use crate::feasibility::{FeasibilityVerdict, SiteRegistry};
use crate::intent::Role;
use crate::plan::{DeploymentPlan, InfeasibilityReason};
use crate::retrieval::EnrichedIntent;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "detail")]
pub enum DegradationCause {
    Physics(FeasibilityVerdict),
    Planning(InfeasibilityReason),
    Other(String),
}

/// A heuristic design shown when formal planning fails. Never verified.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DegradedDesign {
    pub verified: bool,
    /// `ring` or `hub-and-spoke`.
    pub topology: String,
    pub design: NetworkDesign,
    /// The unchecked action sequence the estimate is priced from.
    pub heuristic_plan: DeploymentPlan,
    pub limitation_notice: String,
    pub educational_feedback: String,
    pub cause: DegradationCause,
}

const RING_MAX_SITES: usize = 5;

fn pair(a: usize, b: usize) -> (usize, usize) {
    (a.min(b), a.max(b))
}

fn ring(nodes: &[usize]) -> Vec<(usize, usize)> {
    match nodes.len() {
        0 | 1 => Vec::new(),
        2 => alloc::vec![pair(nodes[0], nodes[1])],
        n => (0..n).map(|i| pair(nodes[i], nodes[(i + 1) % n])).collect(),
    }
}

/// Heuristic links over site indices: a ring for up to five sites, otherwise
/// a ring of hub/core sites (the first site if none is declared) with every
/// other site attached to one hub, round-robin.
pub fn heuristic_links(intent: &EnrichedIntent) -> Vec<(usize, usize)> {
    let sites = &intent.base.sites;
    let all: Vec<usize> = (0..sites.len()).collect();
    if sites.len() <= RING_MAX_SITES {
        return ring(&all);
    }
    let mut hubs: Vec<usize> = all
        .iter()
        .copied()
        .filter(|&i| matches!(sites[i].role, Some(Role::Hub | Role::Core)))
        .collect();
    if hubs.is_empty() {
        hubs.push(0);
    }
    let mut links = ring(&hubs);
    let spokes = all.iter().copied().filter(|i| !hubs.contains(i));
    for (k, s) in spokes.enumerate() {
        links.push(pair(s, hubs[k % hubs.len()]));
    }
    links
}

fn heuristic_plan(intent: &EnrichedIntent, links: &[(usize, usize)], tables: &DesignTables) -> DeploymentPlan {
    let names: Vec<&str> = intent.base.sites.iter().map(|s| s.name.as_str()).collect();
    let mut actions: Vec<(String, Vec<String>)> = Vec::new();
    let mut push = |action: &str, args: Vec<String>| actions.push((action.to_owned(), args));
    let roadm = |i: usize| format!("roadm{}", i + 1);
    let link = |k: usize| format!("link{}", k + 1);
    for s in &names {
        push("commission-site", alloc::vec![(*s).to_owned()]);
    }
    for (i, s) in names.iter().enumerate() {
        push("install-roadm", alloc::vec![(*s).to_owned(), roadm(i)]);
    }
    for (k, &(a, b)) in links.iter().enumerate() {
        push("deploy-fiber", alloc::vec![names[a].to_owned(), names[b].to_owned(), link(k)]);
    }
    for (i, s) in names.iter().enumerate() {
        push("activate-roadm", alloc::vec![(*s).to_owned(), roadm(i)]);
    }
    for (k, &(a, b)) in links.iter().enumerate() {
        push("activate-fiber", alloc::vec![names[a].to_owned(), names[b].to_owned(), link(k)]);
    }
    push("complete-deployment", Vec::new());
    DeploymentPlan::from_actions(actions.into_iter().filter_map(|(action, args)| {
        let cost = tables.price(&action)?.unit_cost;
        Some((action, args, cost))
    }))
}

fn feedback(cause: &DegradationCause) -> String {
    match cause {
        DegradationCause::Physics(v) => {
            let mut out = v.narrative.clone();
            for w in v.violations.iter().take(5) {
                let _ = write!(out, "\n- {w}");
            }
            if v.violations.len() > 5 {
                let _ = write!(out, "\n- ... and {} more pairs", v.violations.len() - 5);
            }
            if let Some(worst) = v.violations.first() {
                let floor = libm::ceil(worst.min_latency_ms) as u64;
                let _ = write!(
                    out,
                    "\nNo equipment choice can beat this bound. Either accept at least {floor} ms end to end, \
                     or split the network into regional clusters that each meet the target."
                );
            }
            out
        }
        DegradationCause::Planning(InfeasibilityReason::BudgetShortfall {
            minimum_cost,
            budget_limit,
            shortfall,
        }) => format!(
            "The cheapest deployment that reaches every goal costs {}, but the budget is {}. \
             Raise the budget by at least {} or connect fewer sites.",
            crate::money::format_usd(*minimum_cost),
            crate::money::format_usd(*budget_limit),
            crate::money::format_usd(*shortfall)
        ),
        DegradationCause::Planning(r @ InfeasibilityReason::UnreachableGoals { .. }) => format!(
            "The planner proved that no sequence of deployment actions can reach these goals ({r}). \
             Usually a precondition, such as the latency pre-check, was not established."
        ),
        DegradationCause::Planning(r) => format!("{r}."),
        DegradationCause::Other(s) => s.clone(),
    }
}

/// Builds the unverified fallback design. Costs and schedule are priced with
/// the same tables as verified designs, from a heuristic action sequence.
pub fn degrade(
    intent: &EnrichedIntent,
    cause: DegradationCause,
    tables: &DesignTables,
    registry: &SiteRegistry,
) -> DegradedDesign {
    let links = heuristic_links(intent);
    let topology = if intent.base.sites.len() <= RING_MAX_SITES {
        "ring"
    } else {
        "hub-and-spoke"
    };
    let plan = heuristic_plan(intent, &links, tables);
    let blocked = match &cause {
        DegradationCause::Physics(v) => Some(v),
        _ => None,
    };
    let mut design = build(&plan, intent, tables, registry, blocked)
        .expect("heuristic plan is priced from the same table");
    design.verified = false;
    design
        .notes
        .push("UNVERIFIED: heuristic topology, not produced or checked by the planner.".to_owned());
    let why = match &cause {
        DegradationCause::Physics(_) => "the latency target is physically impossible".to_owned(),
        DegradationCause::Planning(r) => format!("{r}"),
        DegradationCause::Other(s) => s.clone(),
    };
    let limitation_notice = format!(
        "Formal planning could not produce a verified design: {why}. \
         Shown instead is an unverified {topology} topology over {} sites with estimated costs \
         ({}) and schedule ({} weeks); treat it as a starting point, not a plan.",
        intent.base.sites.len(),
        crate::money::format_usd(design.cost_breakdown.grand_total),
        design.timeline_weeks
    );
    DegradedDesign {
        verified: false,
        topology: topology.to_owned(),
        design,
        heuristic_plan: plan,
        limitation_notice,
        educational_feedback: feedback(&cause),
        cause,
    }
}
