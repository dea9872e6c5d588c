//! Schedule: plan phases run one after another; steps inside a phase run in
//! parallel except where an exclusive action shares a site, which forces
//! another round.

use alloc::collections::BTreeSet;
use alloc::string::String;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use super::tables::DesignTables;
use crate::plan::PlanStep;

pub const ACCEPTANCE_PHASE: &str = "commissioning & acceptance";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TimelinePhase {
    pub name: String,
    pub start_week: f64,
    pub duration_weeks: f64,
    /// Sequential rounds the phase needs (1 when fully parallel).
    pub rounds: u32,
    /// 1-based plan steps in this phase; empty for the acceptance pad.
    pub steps: Vec<usize>,
}

/// Greedy round assignment in plan order: a step joins the first round in
/// which none of its sites is busy.
pub fn rounds(steps: &[&PlanStep], sites: &BTreeSet<&str>) -> u32 {
    let mut busy: Vec<BTreeSet<&str>> = Vec::new();
    for s in steps {
        let mine: Vec<&str> = s
            .args
            .iter()
            .map(String::as_str)
            .filter(|a| sites.contains(a))
            .collect();
        match busy.iter_mut().find(|r| mine.iter().all(|m| !r.contains(m))) {
            Some(r) => r.extend(mine),
            None => busy.push(mine.into_iter().collect()),
        }
    }
    busy.len().max(1) as u32
}

/// Phases as `(action, first step, last step)`, 1-based, inclusive.
pub fn phase_spans(steps: &[PlanStep]) -> Vec<(&str, usize, usize)> {
    let mut out: Vec<(&str, usize, usize)> = Vec::new();
    for (i, s) in steps.iter().enumerate() {
        match out.last_mut() {
            Some((name, _, last)) if *name == s.action => *last = i + 1,
            _ => out.push((&s.action, i + 1, i + 1)),
        }
    }
    out
}

/// Returns the phases and the total length in whole weeks (rounded up).
pub fn schedule(
    steps: &[PlanStep],
    sites: &BTreeSet<&str>,
    tables: &DesignTables,
) -> (Vec<TimelinePhase>, u32) {
    let mut phases = Vec::new();
    let mut clock = 0u32;
    for (action, first, last) in phase_spans(steps) {
        let members: Vec<&PlanStep> = steps[first - 1..last].iter().collect();
        let (unit, exclusive) = tables
            .duration(action)
            .map_or((0, false), |d| (d.half_weeks, d.exclusive_sites));
        let r = if exclusive { rounds(&members, sites) } else { 1 };
        let length = unit * r;
        phases.push(TimelinePhase {
            name: action.into(),
            start_week: f64::from(clock) / 2.0,
            duration_weeks: f64::from(length) / 2.0,
            rounds: r,
            steps: (first..=last).collect(),
        });
        clock += length;
    }
    if !steps.is_empty() && tables.acceptance_half_weeks > 0 {
        phases.push(TimelinePhase {
            name: ACCEPTANCE_PHASE.into(),
            start_week: f64::from(clock) / 2.0,
            duration_weeks: f64::from(tables.acceptance_half_weeks) / 2.0,
            rounds: 1,
            steps: Vec::new(),
        });
        clock += tables.acceptance_half_weeks;
    }
    (phases, clock.div_ceil(2))
}
