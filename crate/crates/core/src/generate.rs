//! Template generation of planning problems from enriched intents.

use alloc::borrow::ToOwned;
use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::money::NO_BUDGET_SENTINEL;
use crate::pddl::{Atom, Problem, Typed};
use crate::retrieval::EnrichedIntent;

/// How the disjoint-paths constraint reaches the planner.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ProtectionMode {
    /// One fiber per site pair; redundancy is reported, not planned.
    #[default]
    Relaxed,
    /// `disjoint_paths - 1` spare fibers per pair plus a protection goal.
    Strict,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct GenerateOptions {
    pub protection: ProtectionMode,
    /// False when the latency pre-check found a physics violation; the
    /// `latency-ok` fact is then withheld and latency goals become
    /// unreachable.
    pub latency_ok: bool,
}

impl Default for GenerateOptions {
    fn default() -> Self {
        GenerateOptions {
            protection: ProtectionMode::Relaxed,
            latency_ok: true,
        }
    }
}

/// Unordered site pairs in intent order: (0,1), (0,2), ..., (n-2,n-1).
pub fn site_pairs(n: usize) -> Vec<(usize, usize)> {
    let mut out = Vec::with_capacity(n * n.saturating_sub(1) / 2);
    for i in 0..n {
        for j in i + 1..n {
            out.push((i, j));
        }
    }
    out
}

pub fn generate_problem(intent: &EnrichedIntent, options: GenerateOptions) -> Problem {
    let base = &intent.base;
    let sites: Vec<&str> = base.sites.iter().map(|s| s.name.as_str()).collect();
    let pairs = site_pairs(sites.len());
    let spares_per_pair = match (options.protection, base.constraints.disjoint_paths) {
        (ProtectionMode::Strict, Some(k)) if k >= 2 => (k - 1) as usize,
        _ => 0,
    };

    let mut objects: Vec<Typed> = Vec::new();
    let mut init: Vec<Atom> = Vec::new();
    let mut goals: Vec<Atom> = Vec::new();
    let typed = |name: String, ty: &str| Typed {
        name,
        ty: ty.to_owned(),
    };

    for s in &sites {
        objects.push(typed((*s).to_owned(), "site"));
    }
    for (i, s) in sites.iter().enumerate() {
        let r = format!("roadm{}", i + 1);
        objects.push(typed(r.clone(), "roadm"));
        init.push(Atom::new("roadm-at", &[&r, s]));
    }
    let mut links: Vec<String> = Vec::new();
    for (k, &(i, j)) in pairs.iter().enumerate() {
        let f = format!("fiber{}", k + 1);
        objects.push(typed(f.clone(), "fiber"));
        init.push(Atom::new("fiber-endpoint", &[&f, sites[i], sites[j]]));
        links.push(f);
    }
    let mut spare_no = 0;
    for &(i, j) in &pairs {
        for _ in 0..spares_per_pair {
            spare_no += 1;
            let p = format!("spare{spare_no}");
            objects.push(typed(p.clone(), "spare-fiber"));
            init.push(Atom::new("fiber-endpoint", &[&p, sites[i], sites[j]]));
            links.push(p);
        }
    }
    if base.constraints.latency_ms.is_none() || options.latency_ok {
        init.push(Atom::new("latency-ok", &[]));
    }

    for s in &sites {
        goals.push(Atom::new("site-operational", &[s]));
    }
    for l in &links {
        goals.push(Atom::new("fiber-active", &[l]));
    }
    if spares_per_pair > 0 {
        for &(i, j) in &pairs {
            goals.push(Atom::new("pair-protected", &[sites[i], sites[j]]));
        }
    }
    if base.constraints.latency_ms.is_some() {
        goals.push(Atom::new("latency-satisfied", &[]));
    }
    if base.constraints.budget_usd.is_some() {
        goals.push(Atom::new("within-budget", &[]));
    }
    goals.push(Atom::new("deployment-complete", &[]));

    Problem {
        name: format!("deploy-{}-sites", sites.len()),
        domain: "optical-deployment".to_owned(),
        objects,
        init,
        budget_limit: base.constraints.budget_usd.unwrap_or(NO_BUDGET_SENTINEL),
        goals,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::intent::{SiteSpec, StructuredIntent};
    use crate::pddl::optical_domain;
    use alloc::vec;

    fn intent(n: usize) -> EnrichedIntent {
        let sites = (1..=n).map(|i| SiteSpec::new(format!("SITE{i}"))).collect();
        EnrichedIntent::bare(StructuredIntent::new(sites))
    }

    fn count(p: &Problem, ty: &str) -> usize {
        p.objects.iter().filter(|o| o.ty == ty).count()
    }

    #[test]
    fn case_one_shape() {
        let mut e = intent(3);
        e.base.constraints.latency_ms = Some(10);
        e.base.constraints.budget_usd = Some(1_500_000);
        e.base.constraints.disjoint_paths = Some(3);
        let p = generate_problem(&e, GenerateOptions::default());
        p.check(&optical_domain()).unwrap();
        assert_eq!((count(&p, "site"), count(&p, "fiber"), count(&p, "roadm")), (3, 3, 3));
        assert_eq!(p.budget_limit, 1_500_000);
        assert!(p.goals.contains(&Atom::new("latency-satisfied", &[])));
        assert!(p.goals.contains(&Atom::new("within-budget", &[])));
        assert!(p.init.contains(&Atom::new("latency-ok", &[])));
        assert!(p.init.contains(&Atom::new("fiber-endpoint", &["fiber2", "SITE1", "SITE3"])));
    }

    #[test]
    fn minimal_goals() {
        let p = generate_problem(&intent(2), GenerateOptions::default());
        assert_eq!(
            p.goals,
            vec![
                Atom::new("site-operational", &["SITE1"]),
                Atom::new("site-operational", &["SITE2"]),
                Atom::new("fiber-active", &["fiber1"]),
                Atom::new("deployment-complete", &[]),
            ]
        );
        assert_eq!(p.budget_limit, NO_BUDGET_SENTINEL);
    }

    #[test]
    fn complete_graph_fibers() {
        let p = generate_problem(&intent(4), GenerateOptions::default());
        assert_eq!(count(&p, "fiber"), 6);
    }

    #[test]
    fn strict_mode_spares() {
        let mut e = intent(3);
        e.base.constraints.disjoint_paths = Some(3);
        let opts = GenerateOptions {
            protection: ProtectionMode::Strict,
            latency_ok: true,
        };
        let p = generate_problem(&e, opts);
        p.check(&optical_domain()).unwrap();
        assert_eq!(count(&p, "spare-fiber"), 6);
        assert_eq!(p.goals.iter().filter(|g| g.predicate == "pair-protected").count(), 3);
    }

    #[test]
    fn failed_latency_check_withholds_fact() {
        let mut e = intent(2);
        e.base.constraints.latency_ms = Some(1);
        let p = generate_problem(
            &e,
            GenerateOptions {
                latency_ok: false,
                ..Default::default()
            },
        );
        assert!(!p.init.iter().any(|a| a.predicate == "latency-ok"));
    }
}
