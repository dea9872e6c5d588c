//! Stage 3: validated plans become costed network designs with a schedule
//! and step-level traceability. Failed planning degrades to an unverified
//! heuristic topology instead.

mod degrade;
mod markdown;
pub mod tables;
pub mod timeline;

use alloc::borrow::ToOwned;
use alloc::collections::{BTreeMap, BTreeSet};
use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

use serde::{Deserialize, Serialize};

use crate::feasibility::{
    count_disjoint_paths, haversine_km, min_latency_ms, FeasibilityVerdict, SiteRegistry, Topology,
};
use crate::intent::Role;
use crate::money::format_usd;
use crate::plan::DeploymentPlan;
use crate::retrieval::EnrichedIntent;
use crate::validate::ValidatedPlan;

pub use degrade::{degrade, heuristic_links, DegradationCause, DegradedDesign};
pub use markdown::to_markdown;
pub use tables::{CostCategory, DesignTables, DurationEntry, ElementKind, PriceEntry};
pub use timeline::{TimelinePhase, ACCEPTANCE_PHASE};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DesignSite {
    pub name: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub role: Option<Role>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub location: Option<String>,
    pub cost: u64,
    pub steps: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FiberRoute {
    pub link: String,
    pub site_a: String,
    pub site_b: String,
    pub fiber_type: String,
    pub model: String,
    pub cost: u64,
    /// Great-circle length; real routes are longer. Unknown without
    /// coordinates for both ends.
    pub great_circle_km: Option<f64>,
    pub latency_floor_ms: Option<f64>,
    pub steps: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BomLine {
    pub item_class: String,
    pub model: String,
    pub category: CostCategory,
    pub unit_cost: u64,
    pub quantity: u32,
    /// Site or `A/B` site pair the line belongs to; `None` for network-wide
    /// items.
    pub location: Option<String>,
    pub steps: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CostPhase {
    pub name: String,
    pub first_step: usize,
    pub last_step: usize,
    pub cost: u64,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CostBreakdown {
    pub phases: Vec<CostPhase>,
    pub by_category: BTreeMap<CostCategory, u64>,
    pub grand_total: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ConstraintStatus {
    Met,
    NotApplicable,
    Degraded,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConstraintCheck {
    pub constraint: String,
    pub status: ConstraintStatus,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TraceEntry {
    pub step: usize,
    pub action: String,
    /// `site:NAME`, `route:LINK` or `bom:INDEX`.
    pub elements: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NetworkDesign {
    pub verified: bool,
    pub sites: Vec<DesignSite>,
    pub fiber_routes: Vec<FiberRoute>,
    pub equipment: Vec<BomLine>,
    pub cost_breakdown: CostBreakdown,
    pub timeline_weeks: u32,
    pub timeline: Vec<TimelinePhase>,
    pub guidance_applied: Vec<String>,
    pub standards_cited: Vec<String>,
    pub constraint_report: Vec<ConstraintCheck>,
    pub traceability: Vec<TraceEntry>,
    pub notes: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub enum DesignError {
    UnpricedAction { step: usize, action: String },
    PriceMismatch { step: usize, action: String, table: u64, plan: u64 },
}

impl fmt::Display for DesignError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            DesignError::UnpricedAction { step, action } => {
                write!(f, "step {step}: no price-table entry for {action}")
            }
            DesignError::PriceMismatch {
                step,
                action,
                table,
                plan,
            } => write!(
                f,
                "step {step}: price table says {action} costs {}, the plan charged {}",
                format_usd(*table),
                format_usd(*plan)
            ),
        }
    }
}

impl NetworkDesign {
    /// Plan steps referenced by any design element.
    pub fn referenced_steps(&self) -> BTreeSet<usize> {
        let sites = self.sites.iter().flat_map(|s| &s.steps);
        let routes = self.fiber_routes.iter().flat_map(|r| &r.steps);
        let bom = self.equipment.iter().flat_map(|b| &b.steps);
        sites.chain(routes).chain(bom).copied().collect()
    }

    /// Both directions of traceability against a plan of `steps` steps:
    /// every step is referenced and every element references a real step.
    pub fn traceability_complete(&self, steps: usize) -> bool {
        let all: BTreeSet<usize> = (1..=steps).collect();
        let elements_ok = self.sites.iter().all(|s| !s.steps.is_empty())
            && self.fiber_routes.iter().all(|r| !r.steps.is_empty())
            && self.equipment.iter().all(|b| !b.steps.is_empty());
        elements_ok && self.referenced_steps() == all
    }

    /// Sum over sites, routes and BOM lines.
    pub fn element_cost(&self) -> u64 {
        let s: u64 = self.sites.iter().map(|s| s.cost).sum();
        let r: u64 = self.fiber_routes.iter().map(|r| r.cost).sum();
        let b: u64 = self
            .equipment
            .iter()
            .map(|b| b.unit_cost * u64::from(b.quantity))
            .sum();
        s + r + b
    }
}

/// Turns a validated plan into a design. Fails only when the price table
/// disagrees with the plan's action costs.
pub fn translate(
    plan: &ValidatedPlan,
    intent: &EnrichedIntent,
    tables: &DesignTables,
    registry: &SiteRegistry,
) -> Result<NetworkDesign, DesignError> {
    let mut design = build(plan.plan(), intent, tables, registry, None)?;
    design.verified = true;
    Ok(design)
}

fn step_costs(plan: &DeploymentPlan) -> Vec<u64> {
    let mut prev = 0;
    plan.steps
        .iter()
        .map(|s| {
            let c = s.cumulative_cost - prev;
            prev = s.cumulative_cost;
            c
        })
        .collect()
}

/// Shared by [`translate`] and degradation. `blocked` marks a failed latency
/// pre-check.
pub(crate) fn build(
    plan: &DeploymentPlan,
    intent: &EnrichedIntent,
    tables: &DesignTables,
    registry: &SiteRegistry,
    blocked: Option<&FeasibilityVerdict>,
) -> Result<NetworkDesign, DesignError> {
    let base = &intent.base;
    let site_names: BTreeSet<&str> = base.sites.iter().map(|s| s.name.as_str()).collect();
    let site_spec = |name: &str| base.sites.iter().find(|s| s.name == name);
    let coords = |name: &str| {
        site_spec(name)
            .map(|s| s.location.as_deref().unwrap_or(&s.name))
            .and_then(|key| registry.get(key))
    };
    let os2 = intent.mentions("OS2");
    let fiber_type = if os2 { "OS2" } else { "G.652" };

    let mut sites: Vec<DesignSite> = Vec::new();
    let mut routes: Vec<FiberRoute> = Vec::new();
    let mut equipment: Vec<BomLine> = Vec::new();
    let mut trace: Vec<TraceEntry> = Vec::new();
    let mut by_category: BTreeMap<CostCategory, u64> = BTreeMap::new();

    for (i, (step, cost)) in plan.steps.iter().zip(step_costs(plan)).enumerate() {
        let n = i + 1;
        let entry = tables
            .price(&step.action)
            .ok_or_else(|| DesignError::UnpricedAction {
                step: n,
                action: step.action.clone(),
            })?;
        if entry.unit_cost != cost {
            return Err(DesignError::PriceMismatch {
                step: n,
                action: step.action.clone(),
                table: entry.unit_cost,
                plan: cost,
            });
        }
        *by_category.entry(entry.category).or_default() += cost;
        let mut refs = Vec::new();
        match entry.element {
            ElementKind::Site if !step.args.is_empty() => {
                let name = &step.args[0];
                let spec = site_spec(name);
                sites.push(DesignSite {
                    name: name.clone(),
                    role: spec.and_then(|s| s.role),
                    location: spec.and_then(|s| s.location.clone()),
                    cost,
                    steps: alloc::vec![n],
                });
                refs.push(format!("site:{name}"));
            }
            ElementKind::Route if step.args.len() >= 3 => {
                let (a, b) = (&step.args[0], &step.args[1]);
                let link = &step.args[step.args.len() - 1];
                let km = coords(a).zip(coords(b)).map(|(p, q)| haversine_km(p, q));
                routes.push(FiberRoute {
                    link: link.clone(),
                    site_a: a.clone(),
                    site_b: b.clone(),
                    fiber_type: fiber_type.to_owned(),
                    model: entry.model.clone(),
                    cost,
                    great_circle_km: km,
                    latency_floor_ms: km.map(|k| min_latency_ms(k) + tables.hop_penalty_ms),
                    steps: alloc::vec![n],
                });
                refs.push(format!("route:{link}"));
            }
            _ => {
                let here: Vec<&str> = step
                    .args
                    .iter()
                    .map(String::as_str)
                    .filter(|a| site_names.contains(a))
                    .collect();
                equipment.push(BomLine {
                    item_class: entry.item_class.clone(),
                    model: entry.model.clone(),
                    category: entry.category,
                    unit_cost: cost,
                    quantity: 1,
                    location: (!here.is_empty()).then(|| here.join("/")),
                    steps: alloc::vec![n],
                });
                refs.push(format!("bom:{}", equipment.len()));
            }
        }
        // activation and protection steps also belong to the routes they name
        if entry.element != ElementKind::Route {
            for r in routes.iter_mut().filter(|r| step.args.contains(&r.link)) {
                r.steps.push(n);
                refs.push(format!("route:{}", r.link));
            }
        }
        trace.push(TraceEntry {
            step: n,
            action: step.action.clone(),
            elements: refs,
        });
    }

    let checkpoint = |k: usize| if k == 0 { 0 } else { plan.steps[k - 1].cumulative_cost };
    let phases = timeline::phase_spans(&plan.steps)
        .into_iter()
        .map(|(name, first, last)| CostPhase {
            name: name.to_owned(),
            first_step: first,
            last_step: last,
            cost: checkpoint(last) - checkpoint(first - 1),
        })
        .collect();
    let (timeline, weeks) = timeline::schedule(&plan.steps, &site_names, tables);

    let mut design = NetworkDesign {
        verified: false,
        sites,
        fiber_routes: routes,
        equipment,
        cost_breakdown: CostBreakdown {
            phases,
            by_category,
            grand_total: plan.total_cost,
        },
        timeline_weeks: weeks,
        timeline,
        guidance_applied: intent.guidance.iter().map(|g| g.doc_id.clone()).collect(),
        standards_cited: intent.standards_cited.clone(),
        constraint_report: Vec::new(),
        traceability: trace,
        notes: Vec::new(),
    };
    design.constraint_report = constraint_report(&design, intent, blocked);
    if !design.fiber_routes.is_empty() {
        design.notes.push(if os2 {
            "Fiber type OS2 single-mode, as recommended by retrieved guidance.".to_owned()
        } else {
            "Fiber type G.652 single-mode (default; no guidance recommended otherwise).".to_owned()
        });
    }
    if design.timeline.iter().any(|p| p.name == ACCEPTANCE_PHASE) {
        design.notes.push(format!(
            "The schedule includes {} weeks of commissioning and acceptance testing after the last plan step.",
            f64::from(tables.acceptance_half_weeks) / 2.0
        ));
    }
    Ok(design)
}

fn min_disjoint(design: &NetworkDesign, intent: &EnrichedIntent) -> Option<u32> {
    let names = intent.base.sites.iter().map(|s| s.name.clone());
    let mut topo = Topology::new(names);
    for r in &design.fiber_routes {
        topo.link(&r.site_a, &r.site_b);
    }
    count_disjoint_paths(&topo).values().copied().min()
}

fn constraint_report(
    design: &NetworkDesign,
    intent: &EnrichedIntent,
    blocked: Option<&FeasibilityVerdict>,
) -> Vec<ConstraintCheck> {
    let c = &intent.base.constraints;
    let mut out = Vec::new();
    let check = |name: &str, status, detail: String| ConstraintCheck {
        constraint: name.to_owned(),
        status,
        detail,
    };
    let paths = min_disjoint(design, intent).unwrap_or(0);
    if let Some(a) = intent.base.availability {
        let need = if a == crate::intent::Availability::HighAvailability { 2 } else { 1 };
        let status = if paths >= need {
            ConstraintStatus::Met
        } else {
            ConstraintStatus::Degraded
        };
        out.push(check(
            "availability",
            status,
            format!("{a}: needs {need} edge-disjoint path(s) per site pair, topology provides at least {paths}"),
        ));
    }
    if let Some(k) = c.disjoint_paths {
        let k32 = u32::try_from(k).unwrap_or(u32::MAX);
        let status = if paths >= k32 {
            ConstraintStatus::Met
        } else {
            ConstraintStatus::Degraded
        };
        out.push(check(
            "disjoint_paths",
            status,
            format!("requested {k} edge-disjoint paths per site pair; the topology provides at least {paths} (max-flow)"),
        ));
    }
    if let Some(limit) = c.latency_ms {
        let located: Vec<f64> = design
            .fiber_routes
            .iter()
            .filter_map(|r| r.latency_floor_ms)
            .collect();
        let worst = located.iter().copied().fold(0.0f64, f64::max);
        let entry = match blocked {
            Some(v) if !v.feasible => check("latency", ConstraintStatus::Degraded, v.narrative.clone()),
            _ if located.is_empty() => check(
                "latency",
                ConstraintStatus::NotApplicable,
                format!("{limit} ms requested; no route has coordinates for both ends, so no physical bound was computed"),
            ),
            _ => check(
                "latency",
                if worst > limit as f64 {
                    ConstraintStatus::Degraded
                } else {
                    ConstraintStatus::Met
                },
                format!(
                    "{limit} ms requested; worst direct-route floor {worst:.2} ms over {} of {} routes with coordinates",
                    located.len(),
                    design.fiber_routes.len()
                ),
            ),
        };
        out.push(entry);
    }
    if let Some(b) = c.budget_usd {
        let total = design.cost_breakdown.grand_total;
        let (status, detail) = if total <= b {
            (
                ConstraintStatus::Met,
                format!("{} of {} ({} remaining)", format_usd(total), format_usd(b), format_usd(b - total)),
            )
        } else {
            (
                ConstraintStatus::Degraded,
                format!("{} exceeds {} by {}", format_usd(total), format_usd(b), format_usd(total - b)),
            )
        };
        out.push(check("budget", status, detail));
    }
    if let Some(list) = &c.compliance {
        let backed: Vec<&str> = list
            .iter()
            .filter(|s| intent.standards_cited.contains(s))
            .map(String::as_str)
            .collect();
        out.push(check(
            "compliance",
            if backed.len() == list.len() {
                ConstraintStatus::Met
            } else {
                ConstraintStatus::Degraded
            },
            format!("standards recorded in the design: {}", list.join(", ")),
        ));
    }
    out
}

#[cfg(test)]
mod tests;
