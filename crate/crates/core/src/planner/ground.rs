//! Grounding: instantiate action schemas over problem objects, compiling
//! static predicates away as soon as their arguments are bound.

use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use hashbrown::{HashMap, HashSet};

use crate::pddl::{Atom, Domain, Problem};

#[derive(Debug, Clone)]
pub struct GroundAction {
    pub schema: usize,
    pub args: Vec<usize>,
    pub pre: Vec<u32>,
    pub add: Vec<u32>,
    pub del: Vec<u32>,
    pub cost: u64,
    pub guarded: bool,
}

#[derive(Debug)]
pub struct Task {
    /// Object names, sorted.
    pub objects: Vec<String>,
    /// Fluent facts as (predicate index, object indices).
    pub facts: Vec<(usize, Vec<usize>)>,
    /// Ground actions ordered by schema, then argument names.
    pub actions: Vec<GroundAction>,
    pub init: Vec<u32>,
    pub goals: Vec<u32>,
    /// Goal literals that are static and false, or mention facts no action
    /// can produce and the initial state lacks.
    pub dead_goals: Vec<Atom>,
}

#[derive(Debug)]
pub struct TooMany {
    pub grounded: usize,
}

struct Interner {
    ids: HashMap<(usize, Vec<usize>), u32>,
    facts: Vec<(usize, Vec<usize>)>,
}

impl Interner {
    fn id(&mut self, pred: usize, args: Vec<usize>) -> u32 {
        let key = (pred, args);
        if let Some(&id) = self.ids.get(&key) {
            return id;
        }
        let id = self.facts.len() as u32;
        self.facts.push(key.clone());
        self.ids.insert(key, id);
        id
    }
}

/// Precondition or effect atom with arguments as parameter indices.
struct Lifted {
    pred: usize,
    params: Vec<usize>,
}

pub fn ground(domain: &Domain, problem: &Problem, cap: usize) -> Result<Task, TooMany> {
    let mut objects: Vec<(String, String)> = problem
        .objects
        .iter()
        .map(|o| (o.name.clone(), o.ty.clone()))
        .collect();
    objects.sort();
    let object_index: HashMap<&str, usize> = objects
        .iter()
        .enumerate()
        .map(|(i, (n, _))| (n.as_str(), i))
        .collect();
    let pred_index: HashMap<&str, usize> = domain
        .predicates
        .iter()
        .enumerate()
        .map(|(i, p)| (p.name.as_str(), i))
        .collect();
    let statics: HashSet<usize> = domain
        .static_predicates()
        .into_iter()
        .map(|p| pred_index[p])
        .collect();
    let resolve = |atom: &Atom| -> Option<(usize, Vec<usize>)> {
        let pred = *pred_index.get(atom.predicate.as_str())?;
        let args = atom
            .args
            .iter()
            .map(|a| object_index.get(a.as_str()).copied())
            .collect::<Option<Vec<_>>>()?;
        Some((pred, args))
    };
    let static_true: HashSet<(usize, Vec<usize>)> = problem
        .init
        .iter()
        .filter_map(resolve)
        .filter(|(p, _)| statics.contains(p))
        .collect();

    let mut interner = Interner {
        ids: HashMap::new(),
        facts: Vec::new(),
    };
    let mut actions = Vec::new();
    for (schema_idx, schema) in domain.actions.iter().enumerate() {
        let param_pos = |name: &str| schema.parameters.iter().position(|p| p.name == name).unwrap();
        let lift = |atoms: &[Atom]| -> Vec<Lifted> {
            atoms
                .iter()
                .map(|a| Lifted {
                    pred: pred_index[a.predicate.as_str()],
                    params: a.args.iter().map(|x| param_pos(x)).collect(),
                })
                .collect()
        };
        let pre = lift(&schema.preconditions);
        let add = lift(&schema.add);
        let del = lift(&schema.delete);
        let candidates: Vec<Vec<usize>> = schema
            .parameters
            .iter()
            .map(|p| {
                (0..objects.len())
                    .filter(|&i| domain.is_subtype(&objects[i].1, &p.ty))
                    .collect()
            })
            .collect();
        // static checks become decidable once their last parameter is bound
        let n = schema.parameters.len();
        let mut checks_at: Vec<Vec<&Lifted>> = (0..=n).map(|_| Vec::new()).collect();
        for l in pre.iter().filter(|l| statics.contains(&l.pred)) {
            let depth = l.params.iter().map(|&p| p + 1).max().unwrap_or(0);
            checks_at[depth].push(l);
        }
        let holds = |l: &Lifted, binding: &[usize]| {
            static_true.contains(&(l.pred, l.params.iter().map(|&p| binding[p]).collect()))
        };
        if !checks_at[0].iter().all(|l| holds(l, &[])) {
            continue;
        }
        let mut binding = vec![0usize; n];
        let mut cursor = vec![0usize; n];
        let mut depth = 0;
        loop {
            if depth == n {
                let make = |ls: &[Lifted], interner: &mut Interner| -> Vec<u32> {
                    let mut ids: Vec<u32> = ls
                        .iter()
                        .filter(|l| !statics.contains(&l.pred))
                        .map(|l| interner.id(l.pred, l.params.iter().map(|&p| binding[p]).collect()))
                        .collect();
                    ids.sort_unstable();
                    ids.dedup();
                    ids
                };
                actions.push(GroundAction {
                    schema: schema_idx,
                    args: binding.clone(),
                    pre: make(&pre, &mut interner),
                    add: make(&add, &mut interner),
                    del: make(&del, &mut interner),
                    cost: schema.cost,
                    guarded: schema.guard.is_some(),
                });
                if actions.len() > cap {
                    return Err(TooMany {
                        grounded: actions.len(),
                    });
                }
                if n == 0 {
                    break;
                }
                depth -= 1;
                continue;
            }
            if cursor[depth] >= candidates[depth].len() {
                cursor[depth] = 0;
                if depth == 0 {
                    break;
                }
                depth -= 1;
                continue;
            }
            binding[depth] = candidates[depth][cursor[depth]];
            cursor[depth] += 1;
            if checks_at[depth + 1].iter().all(|l| holds(l, &binding)) {
                depth += 1;
            }
        }
    }

    let mut dead_goals = Vec::new();
    let mut goals = Vec::new();
    for g in &problem.goals {
        match resolve(g) {
            Some((p, args)) if statics.contains(&p) => {
                if !static_true.contains(&(p, args)) {
                    dead_goals.push(g.clone());
                }
            }
            Some((p, args)) => goals.push(interner.id(p, args)),
            None => dead_goals.push(g.clone()),
        }
    }
    let mut init: Vec<u32> = problem
        .init
        .iter()
        .filter_map(resolve)
        .filter(|(p, _)| !statics.contains(p))
        .map(|(p, args)| interner.id(p, args))
        .collect();
    init.sort_unstable();
    init.dedup();
    goals.sort_unstable();
    goals.dedup();

    Ok(Task {
        objects: objects.iter().map(|(n, _)| n.clone()).collect(),
        facts: interner.facts,
        actions,
        init,
        goals,
        dead_goals,
    })
}
