//! The LM-cut heuristic (Helmert & Domshlak, 2009): repeatedly find a cut of
//! the justification graph between the initial and goal facts, charge its
//! cheapest action and discount the whole cut. Admissible and consistent.

use alloc::collections::BinaryHeap;
use alloc::vec;
use alloc::vec::Vec;
use core::cmp::Reverse;

use super::ground::Task;

pub const INF: u64 = u64::MAX;

struct Op {
    pre: Vec<u32>,
    add: Vec<u32>,
    cost: u64,
}

pub struct LmCut {
    ops: Vec<Op>,
    /// Operators having each fact as a precondition.
    consumers: Vec<Vec<u32>>,
    n_facts: usize,
    init_fact: u32,
    goal_fact: u32,
}

impl LmCut {
    pub fn new(task: &Task) -> LmCut {
        let n = task.facts.len();
        let init_fact = n as u32;
        let goal_fact = n as u32 + 1;
        let mut ops: Vec<Op> = task
            .actions
            .iter()
            .map(|a| Op {
                pre: if a.pre.is_empty() {
                    vec![init_fact]
                } else {
                    a.pre.clone()
                },
                add: a.add.clone(),
                cost: a.cost,
            })
            .collect();
        ops.push(Op {
            pre: if task.goals.is_empty() {
                vec![init_fact]
            } else {
                task.goals.clone()
            },
            add: vec![goal_fact],
            cost: 0,
        });
        let mut consumers = vec![Vec::new(); n + 2];
        for (i, op) in ops.iter().enumerate() {
            for &p in &op.pre {
                consumers[p as usize].push(i as u32);
            }
        }
        LmCut {
            ops,
            consumers,
            n_facts: n + 2,
            init_fact,
            goal_fact,
        }
    }

    /// Generalized Dijkstra for h^max under the current costs. Fills `hmax`
    /// and the precondition choice function.
    fn hmax(&self, state: &[bool], costs: &[u64], hmax: &mut [u64], pcf: &mut [u32]) {
        hmax.fill(INF);
        let mut waiting: Vec<usize> = self.ops.iter().map(|o| o.pre.len()).collect();
        let mut heap = BinaryHeap::new();
        for (f, &on) in state.iter().enumerate() {
            if on {
                hmax[f] = 0;
                heap.push(Reverse((0u64, f as u32)));
            }
        }
        hmax[self.init_fact as usize] = 0;
        heap.push(Reverse((0, self.init_fact)));
        while let Some(Reverse((d, f))) = heap.pop() {
            if d > hmax[f as usize] {
                continue;
            }
            for &o in &self.consumers[f as usize] {
                let o = o as usize;
                waiting[o] -= 1;
                if waiting[o] > 0 {
                    continue;
                }
                // facts are settled in nondecreasing order, so f is a maximal
                // precondition
                pcf[o] = f;
                let reach = d.saturating_add(costs[o]);
                for &e in &self.ops[o].add {
                    if reach < hmax[e as usize] {
                        hmax[e as usize] = reach;
                        heap.push(Reverse((reach, e)));
                    }
                }
            }
        }
        for (o, w) in waiting.iter().enumerate() {
            if *w > 0 {
                pcf[o] = u32::MAX;
            }
        }
    }

    /// Heuristic value of a state given as a fact membership slice.
    pub fn evaluate(&self, state: &[bool]) -> u64 {
        let mut costs: Vec<u64> = self.ops.iter().map(|o| o.cost).collect();
        let mut hmax = vec![INF; self.n_facts];
        let mut pcf = vec![u32::MAX; self.ops.len()];
        let mut in_goal_zone = vec![false; self.n_facts];
        let mut reached = vec![false; self.n_facts];
        let mut total = 0u64;
        loop {
            self.hmax(state, &costs, &mut hmax, &mut pcf);
            let hg = hmax[self.goal_fact as usize];
            if hg == INF {
                return INF;
            }
            if hg == 0 {
                return total;
            }
            // goal zone: facts reaching the goal through zero-cost edges
            in_goal_zone.fill(false);
            in_goal_zone[self.goal_fact as usize] = true;
            let mut changed = true;
            while changed {
                changed = false;
                for (o, op) in self.ops.iter().enumerate() {
                    let p = pcf[o];
                    if p == u32::MAX || costs[o] != 0 || in_goal_zone[p as usize] {
                        continue;
                    }
                    if op.add.iter().any(|&e| in_goal_zone[e as usize]) {
                        in_goal_zone[p as usize] = true;
                        changed = true;
                    }
                }
            }
            // forward from the state without entering the goal zone
            reached.fill(false);
            let mut stack: Vec<u32> = Vec::new();
            for (f, &on) in state.iter().enumerate() {
                if on && !in_goal_zone[f] {
                    reached[f] = true;
                    stack.push(f as u32);
                }
            }
            reached[self.init_fact as usize] = true;
            stack.push(self.init_fact);
            let mut cut: Vec<usize> = Vec::new();
            while let Some(f) = stack.pop() {
                for &o in &self.consumers[f as usize] {
                    let o = o as usize;
                    if pcf[o] != f {
                        continue;
                    }
                    let op = &self.ops[o];
                    if op.add.iter().any(|&e| in_goal_zone[e as usize]) {
                        cut.push(o);
                    }
                    for &e in &op.add {
                        if !in_goal_zone[e as usize] && !reached[e as usize] {
                            reached[e as usize] = true;
                            stack.push(e);
                        }
                    }
                }
            }
            cut.sort_unstable();
            cut.dedup();
            let m = cut.iter().map(|&o| costs[o]).min().unwrap_or(0);
            debug_assert!(m > 0, "cut with a zero-cost action");
            if m == 0 {
                // cannot happen for a correct cut; never loop forever
                return total;
            }
            total = total.saturating_add(m);
            for o in cut {
                costs[o] -= m;
            }
        }
    }
}
