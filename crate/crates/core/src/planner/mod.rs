//! Cost-optimal forward search over grounded states.
//!
//! The default strategy is A* with the LM-cut heuristic; uniform-cost search
//! is available for comparison. Both break ties on the full action sequence,
//! compared lexicographically by ground-action order (schema declaration
//! order, then argument names), so the returned plan is the
//! lexicographically smallest among the cost-optimal ones.
//!
//! Infeasibility is proved three ways: goals unreachable in the
//! delete-relaxation, a budget below the cheapest plan (found by an unguarded
//! search), or exhaustion of the guarded state space.

mod ground;
mod lmcut;

use alloc::boxed::Box;
use alloc::collections::BinaryHeap;
use alloc::rc::Rc;
use alloc::string::{String, ToString};
use alloc::vec;
use alloc::vec::Vec;
use core::cmp::Reverse;
use core::fmt;

use hashbrown::{HashMap, HashSet};
use serde::{Deserialize, Serialize};

use crate::pddl::{Atom, Domain, PddlError, Problem};
use crate::plan::{DeploymentPlan, InfeasibilityReason};
use ground::Task;
use lmcut::{LmCut, INF};

pub const DEFAULT_GROUNDING_CAP: usize = 200_000;

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Strategy {
    #[default]
    AstarLmcut,
    UniformCost,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct PlannerConfig {
    pub grounding_cap: usize,
    pub strategy: Strategy,
    /// Abort after this many expansions (per search).
    pub node_limit: Option<usize>,
}

impl Default for PlannerConfig {
    fn default() -> Self {
        PlannerConfig {
            grounding_cap: DEFAULT_GROUNDING_CAP,
            strategy: Strategy::AstarLmcut,
            node_limit: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum PlanError {
    InvalidProblem(PddlError),
    GroundingLimit { grounded: usize, cap: usize },
    NodeLimit { limit: usize },
}

impl fmt::Display for PlanError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PlanError::InvalidProblem(e) => write!(f, "invalid problem: {e}"),
            PlanError::GroundingLimit { grounded, cap } => write!(
                f,
                "grounding produced more than {cap} actions (stopped at {grounded}); raise the cap or simplify the intent"
            ),
            PlanError::NodeLimit { limit } => {
                write!(f, "search expanded {limit} states without finishing")
            }
        }
    }
}

/// Solves with the default configuration.
pub fn solve(domain: &Domain, problem: &Problem) -> Result<DeploymentPlan, PlanError> {
    Planner::default().solve(domain, problem)
}

#[derive(Debug, Clone, Default)]
pub struct Planner {
    pub config: PlannerConfig,
}

/// Search statistics of the last phase that ran.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct SearchStats {
    pub ground_actions: usize,
    pub expanded: usize,
    pub evaluated: usize,
}

impl Planner {
    pub fn new(config: PlannerConfig) -> Self {
        Planner { config }
    }

    pub fn solve(&self, domain: &Domain, problem: &Problem) -> Result<DeploymentPlan, PlanError> {
        self.solve_with_stats(domain, problem).map(|(p, _)| p)
    }

    pub fn solve_with_stats(
        &self,
        domain: &Domain,
        problem: &Problem,
    ) -> Result<(DeploymentPlan, SearchStats), PlanError> {
        problem.check(domain).map_err(PlanError::InvalidProblem)?;
        let task = ground::ground(domain, problem, self.config.grounding_cap).map_err(|e| {
            PlanError::GroundingLimit {
                grounded: e.grounded,
                cap: self.config.grounding_cap,
            }
        })?;
        let mut stats = SearchStats {
            ground_actions: task.actions.len(),
            ..Default::default()
        };

        let unreachable = relaxed_unreachable(&task);
        if !task.dead_goals.is_empty() || !unreachable.is_empty() {
            let mut literals: Vec<String> = task.dead_goals.iter().map(|a| a.to_string()).collect();
            literals.extend(unreachable.iter().map(|&f| fact_atom(domain, &task, f).to_string()));
            return Ok((
                DeploymentPlan::infeasible(InfeasibilityReason::UnreachableGoals { literals }),
                stats,
            ));
        }

        let heuristic = match self.config.strategy {
            Strategy::AstarLmcut => Some(LmCut::new(&task)),
            Strategy::UniformCost => None,
        };
        let mut search = Search {
            task: &task,
            heuristic: heuristic.as_ref(),
            node_limit: self.config.node_limit,
            stats: &mut stats,
        };
        let budget = problem.budget_limit;
        if let Some(seq) = search.run(Some(budget))? {
            return Ok((build_plan(domain, &task, &seq), stats));
        }
        let exhausted = search.stats.expanded;
        let reason = match search.run(None)? {
            Some(seq) => {
                let minimum_cost: u64 = seq.iter().map(|&a| task.actions[a as usize].cost).sum();
                InfeasibilityReason::BudgetShortfall {
                    minimum_cost,
                    budget_limit: budget,
                    shortfall: minimum_cost.saturating_sub(budget),
                }
            }
            None => InfeasibilityReason::SearchExhausted {
                expanded_states: exhausted,
            },
        };
        Ok((DeploymentPlan::infeasible(reason), stats))
    }
}

fn fact_atom(domain: &Domain, task: &Task, fact: u32) -> Atom {
    let (pred, args) = &task.facts[fact as usize];
    Atom {
        predicate: domain.predicates[*pred].name.clone(),
        args: args.iter().map(|&o| task.objects[o].clone()).collect(),
    }
}

fn build_plan(domain: &Domain, task: &Task, seq: &[u32]) -> DeploymentPlan {
    DeploymentPlan::from_actions(seq.iter().map(|&a| {
        let ga = &task.actions[a as usize];
        (
            domain.actions[ga.schema].name.clone(),
            ga.args.iter().map(|&o| task.objects[o].clone()).collect(),
            ga.cost,
        )
    }))
}

/// Goal facts unreachable even when delete effects and the budget are
/// ignored. A non-empty result proves the problem unsolvable.
fn relaxed_unreachable(task: &Task) -> Vec<u32> {
    let mut reached = vec![false; task.facts.len()];
    for &f in &task.init {
        reached[f as usize] = true;
    }
    let mut fired = vec![false; task.actions.len()];
    let mut changed = true;
    while changed {
        changed = false;
        for (i, a) in task.actions.iter().enumerate() {
            if !fired[i] && a.pre.iter().all(|&p| reached[p as usize]) {
                fired[i] = true;
                for &e in &a.add {
                    if !reached[e as usize] {
                        reached[e as usize] = true;
                        changed = true;
                    }
                }
            }
        }
    }
    task.goals
        .iter()
        .copied()
        .filter(|&g| !reached[g as usize])
        .collect()
}

type State = Box<[u64]>;

fn bit(state: &[u64], f: u32) -> bool {
    state[(f / 64) as usize] >> (f % 64) & 1 == 1
}

struct Search<'a> {
    task: &'a Task,
    heuristic: Option<&'a LmCut>,
    node_limit: Option<usize>,
    stats: &'a mut SearchStats,
}

#[derive(PartialEq, Eq, PartialOrd, Ord)]
struct Entry {
    f: u64,
    seq: Rc<Vec<u32>>,
    /// Heuristic already computed for this entry's state.
    evaluated: bool,
    g: u64,
    node: usize,
}

impl Search<'_> {
    fn h(&mut self, state: &[u64], cache: &mut HashMap<State, u64>) -> u64 {
        let Some(lm) = self.heuristic else {
            return 0;
        };
        if let Some(&h) = cache.get(state) {
            return h;
        }
        self.stats.evaluated += 1;
        let flags: Vec<bool> = (0..self.task.facts.len() as u32).map(|f| bit(state, f)).collect();
        let h = lm.evaluate(&flags);
        cache.insert(state.into(), h);
        h
    }

    /// Cost-optimal search; `budget` enables the numeric guards. Returns the
    /// action sequence of the lexicographically smallest optimal plan.
    fn run(&mut self, budget: Option<u64>) -> Result<Option<Vec<u32>>, PlanError> {
        let task = self.task;
        let words = task.facts.len().div_ceil(64).max(1);
        let mut init: State = vec![0u64; words].into_boxed_slice();
        for &f in &task.init {
            init[(f / 64) as usize] |= 1 << (f % 64);
        }
        let is_goal = |s: &[u64]| task.goals.iter().all(|&g| bit(s, g));

        let mut h_cache: HashMap<State, u64> = HashMap::new();
        let mut nodes: Vec<State> = vec![init.clone()];
        let mut best: HashMap<State, (u64, Rc<Vec<u32>>)> = HashMap::new();
        let mut closed: HashSet<State> = HashSet::new();
        let mut open = BinaryHeap::new();
        let h0 = self.h(&init, &mut h_cache);
        if h0 == INF {
            return Ok(None);
        }
        best.insert(init, (0, Rc::new(Vec::new())));
        open.push(Reverse(Entry {
            f: h0,
            seq: Rc::new(Vec::new()),
            evaluated: true,
            g: 0,
            node: 0,
        }));
        let mut expanded = 0usize;
        while let Some(Reverse(entry)) = open.pop() {
            let state = nodes[entry.node].clone();
            if closed.contains(&state) {
                continue;
            }
            if let Some((g, seq)) = best.get(&state) {
                if (*g, seq) < (entry.g, &entry.seq) {
                    continue;
                }
            }
            let h = if entry.evaluated {
                entry.f - entry.g
            } else {
                let h = self.h(&state, &mut h_cache);
                if h == INF {
                    closed.insert(state);
                    continue;
                }
                let f = entry.g + h;
                if f > entry.f {
                    open.push(Reverse(Entry {
                        f,
                        evaluated: true,
                        ..entry
                    }));
                    continue;
                }
                h
            };
            if budget.is_some_and(|b| entry.g.saturating_add(h) > b) {
                closed.insert(state);
                continue;
            }
            if is_goal(&state) {
                self.stats.expanded = expanded;
                return Ok(Some(entry.seq.to_vec()));
            }
            closed.insert(state.clone());
            expanded += 1;
            if self.node_limit.is_some_and(|l| expanded > l) {
                return Err(PlanError::NodeLimit {
                    limit: self.node_limit.unwrap_or(0),
                });
            }
            for (ai, a) in task.actions.iter().enumerate() {
                if !a.pre.iter().all(|&p| bit(&state, p)) {
                    continue;
                }
                let g2 = entry.g + a.cost;
                if a.guarded && budget.is_some_and(|b| g2 > b) {
                    continue;
                }
                let mut child = state.clone();
                for &d in &a.del {
                    child[(d / 64) as usize] &= !(1 << (d % 64));
                }
                for &e in &a.add {
                    child[(e / 64) as usize] |= 1 << (e % 64);
                }
                if closed.contains(&child) {
                    continue;
                }
                let mut seq = Vec::with_capacity(entry.seq.len() + 1);
                seq.extend_from_slice(&entry.seq);
                seq.push(ai as u32);
                let seq = Rc::new(seq);
                if let Some((g, s)) = best.get(&child) {
                    if (*g, s) <= (g2, &seq) {
                        continue;
                    }
                }
                best.insert(child.clone(), (g2, seq.clone()));
                let cached = h_cache.get(&child).copied();
                let (f, evaluated) = match cached {
                    Some(INF) => continue,
                    Some(h) => (g2 + h, true),
                    None => (entry.f.max(g2), self.heuristic.is_none()),
                };
                nodes.push(child);
                open.push(Reverse(Entry {
                    f,
                    seq,
                    evaluated,
                    g: g2,
                    node: nodes.len() - 1,
                }));
            }
        }
        self.stats.expanded = expanded;
        Ok(None)
    }
}

#[cfg(test)]
mod tests;
