//! Brute-force reference implementations. They share no code with the
//! library: grounding, search and path counting are redone from scratch.

#![allow(dead_code)]

use std::cmp::Reverse;
use std::collections::{BTreeSet, BinaryHeap, HashMap};

use lightpath_core::pddl::{Atom, Domain, Problem};

/// Great-circle distance on a sphere of radius 6371 km.
pub fn haversine_km(lat1: f64, lon1: f64, lat2: f64, lon2: f64) -> f64 {
    let (p1, p2) = (lat1.to_radians(), lat2.to_radians());
    let dp = p2 - p1;
    let dl = (lon2 - lon1).to_radians();
    let h = (dp / 2.0).sin().powi(2) + p1.cos() * p2.cos() * (dl / 2.0).sin().powi(2);
    2.0 * 6371.0 * h.sqrt().asin()
}

/// Light in fiber: 200,000 km/s.
pub fn fiber_ms(km: f64) -> f64 {
    km / 200.0
}

struct Ground {
    pre: Vec<usize>,
    add: Vec<usize>,
    del: Vec<usize>,
    guard: Option<u64>,
    cost: u64,
}

fn is_a(domain: &Domain, ty: &str, want: &str) -> bool {
    let mut t = ty.to_owned();
    for _ in 0..=domain.types.len() + 1 {
        if t == want {
            return true;
        }
        match domain.types.iter().find(|d| d.name == t) {
            Some(d) => t = d.ty.clone(),
            None => return want == "object",
        }
    }
    false
}

fn substitute(atom: &Atom, binding: &HashMap<&str, &str>) -> String {
    let args: Vec<&str> = atom
        .args
        .iter()
        .map(|a| binding.get(a.as_str()).copied().unwrap_or(a.as_str()))
        .collect();
    format!("({} {})", atom.predicate, args.join(" "))
}

/// Cheapest plan cost by Dijkstra over every reachable fact set, with every
/// action grounded over every type-compatible tuple of objects. Budget
/// guards are checked against the cost so far, so `None` means no plan fits
/// the budget. `cap` bounds the number of settled states.
pub fn min_plan_cost(domain: &Domain, problem: &Problem, budget: u64, cap: usize) -> Option<u64> {
    let mut facts: HashMap<String, usize> = HashMap::new();
    let id = |s: String, facts: &mut HashMap<String, usize>| {
        let n = facts.len();
        *facts.entry(s).or_insert(n)
    };
    let init: BTreeSet<usize> = problem
        .init
        .iter()
        .map(|a| id(substitute(a, &HashMap::new()), &mut facts))
        .collect();
    let goals: Vec<usize> = problem
        .goals
        .iter()
        .map(|a| id(substitute(a, &HashMap::new()), &mut facts))
        .collect();

    let mut ground = Vec::new();
    for action in &domain.actions {
        let choices: Vec<Vec<&str>> = action
            .parameters
            .iter()
            .map(|p| {
                problem
                    .objects
                    .iter()
                    .filter(|o| is_a(domain, &o.ty, &p.ty))
                    .map(|o| o.name.as_str())
                    .collect()
            })
            .collect();
        let mut tuple = vec![0usize; choices.len()];
        if choices.iter().any(|c| c.is_empty()) {
            continue;
        }
        loop {
            let binding: HashMap<&str, &str> = action
                .parameters
                .iter()
                .zip(&tuple)
                .zip(&choices)
                .map(|((p, &i), c)| (p.name.as_str(), c[i]))
                .collect();
            let mut map = |atoms: &[Atom]| -> Vec<usize> {
                atoms.iter().map(|a| id(substitute(a, &binding), &mut facts)).collect()
            };
            ground.push(Ground {
                pre: map(&action.preconditions),
                add: map(&action.add),
                del: map(&action.delete),
                guard: action.guard,
                cost: action.cost,
            });
            // odometer over the tuple
            let mut k = 0;
            loop {
                if k == tuple.len() {
                    break;
                }
                tuple[k] += 1;
                if tuple[k] < choices[k].len() {
                    break;
                }
                tuple[k] = 0;
                k += 1;
            }
            if k == tuple.len() {
                break;
            }
        }
    }
    assert!(facts.len() <= 128, "oracle state encoding holds 128 facts");
    let bits = |set: &[usize]| set.iter().fold(0u128, |m, &f| m | (1u128 << f));
    let start = bits(&init.into_iter().collect::<Vec<_>>());
    let goal = bits(&goals);
    let ground: Vec<(u128, u128, u128, Option<u64>, u64)> = ground
        .iter()
        .map(|g| (bits(&g.pre), bits(&g.add), bits(&g.del), g.guard, g.cost))
        .collect();

    let mut best: HashMap<u128, u64> = HashMap::new();
    let mut heap = BinaryHeap::new();
    best.insert(start, 0);
    heap.push(Reverse((0u64, start)));
    let mut settled = 0;
    while let Some(Reverse((g, state))) = heap.pop() {
        if best.get(&state).is_some_and(|&b| b < g) {
            continue;
        }
        if state & goal == goal {
            return Some(g);
        }
        settled += 1;
        assert!(settled <= cap, "oracle state cap exceeded");
        for &(pre, add, del, guard, cost) in &ground {
            if state & pre != pre {
                continue;
            }
            if guard.is_some_and(|c| g + c > budget) {
                continue;
            }
            let next = (state & !del) | add;
            let ng = g + cost;
            if best.get(&next).is_none_or(|&b| ng < b) {
                best.insert(next, ng);
                heap.push(Reverse((ng, next)));
            }
        }
    }
    None
}

/// Every simple s-t path as a set of edge indices (undirected multigraph;
/// loops never lie on a simple path).
fn simple_paths(n: usize, edges: &[(usize, usize)], s: usize, t: usize) -> Vec<u32> {
    fn walk(
        at: usize,
        t: usize,
        edges: &[(usize, usize)],
        visited: &mut Vec<bool>,
        used: u32,
        out: &mut Vec<u32>,
    ) {
        if at == t {
            out.push(used);
            return;
        }
        for (i, &(a, b)) in edges.iter().enumerate() {
            let next = if a == at {
                b
            } else if b == at {
                a
            } else {
                continue;
            };
            if next == at || visited[next] {
                continue;
            }
            visited[next] = true;
            walk(next, t, edges, visited, used | (1 << i), out);
            visited[next] = false;
        }
    }
    let mut visited = vec![false; n];
    visited[s] = true;
    let mut out = Vec::new();
    walk(s, t, edges, &mut visited, 0, &mut out);
    out
}

/// Largest set of pairwise edge-disjoint s-t paths, by exhaustive packing.
pub fn max_disjoint_brute(n: usize, edges: &[(usize, usize)], s: usize, t: usize) -> u32 {
    if s == t {
        return 0;
    }
    assert!(edges.len() <= 32);
    let paths = simple_paths(n, edges, s, t);
    fn pack(paths: &[u32], from: usize, used: u32) -> u32 {
        let mut best = 0;
        for i in from..paths.len() {
            if paths[i] & used == 0 {
                best = best.max(1 + pack(paths, i + 1, used | paths[i]));
            }
        }
        best
    }
    pack(&paths, 0, 0)
}
