use alloc::borrow::ToOwned;
use alloc::format;
use alloc::vec::Vec;

use proptest::prelude::{any, prop, prop_assert, prop_assert_eq, proptest, ProptestConfig, Strategy as _};

use super::*;
use crate::generate::{generate_problem, GenerateOptions, ProtectionMode};
use crate::intent::{SiteSpec, StructuredIntent};
use crate::pddl::optical_domain;
use crate::retrieval::EnrichedIntent;

fn intent(n: usize, budget: Option<u64>, latency: Option<u64>) -> EnrichedIntent {
    let sites = (1..=n).map(|i| SiteSpec::new(format!("SITE{i}"))).collect();
    let mut base = StructuredIntent::new(sites);
    base.constraints.budget_usd = budget;
    base.constraints.latency_ms = latency;
    EnrichedIntent::bare(base)
}

fn case_one_problem() -> Problem {
    let mut e = intent(3, Some(1_500_000), Some(10));
    e.base.constraints.disjoint_paths = Some(3);
    generate_problem(&e, GenerateOptions::default())
}

#[test]
fn case_one_plan() {
    let plan = solve(&optical_domain(), &case_one_problem()).unwrap();
    assert!(plan.feasible);
    let text = plan.to_text();
    let expected = "\
1: (commission-site SITE1) ; cumulative=$0
2: (commission-site SITE2) ; cumulative=$0
3: (commission-site SITE3) ; cumulative=$0
4: (install-roadm SITE1 roadm1) ; cumulative=$130,000
5: (install-roadm SITE2 roadm2) ; cumulative=$260,000
6: (install-roadm SITE3 roadm3) ; cumulative=$390,000
7: (deploy-fiber SITE1 SITE2 fiber1) ; cumulative=$515,000
8: (deploy-fiber SITE1 SITE3 fiber2) ; cumulative=$640,000
9: (deploy-fiber SITE2 SITE3 fiber3) ; cumulative=$765,000
10: (activate-roadm SITE1 roadm1) ; cumulative=$835,000
11: (activate-roadm SITE2 roadm2) ; cumulative=$905,000
12: (activate-roadm SITE3 roadm3) ; cumulative=$975,000
13: (activate-fiber SITE1 SITE2 fiber1) ; cumulative=$1,100,000
14: (activate-fiber SITE1 SITE3 fiber2) ; cumulative=$1,225,000
15: (activate-fiber SITE2 SITE3 fiber3) ; cumulative=$1,350,000
16: (complete-deployment) ; cumulative=$1,400,000
";
    assert_eq!(text, expected);
    assert_eq!(plan.total_cost, 1_400_000);
}

#[test]
fn uniform_cost_agrees_on_case_one() {
    let planner = Planner::new(PlannerConfig {
        strategy: Strategy::UniformCost,
        ..Default::default()
    });
    let ucs = planner.solve(&optical_domain(), &case_one_problem()).unwrap();
    let astar = solve(&optical_domain(), &case_one_problem()).unwrap();
    assert_eq!(ucs, astar);
}

#[test]
fn zero_budget_reports_shortfall() {
    let mut p = generate_problem(&intent(2, Some(1), None), GenerateOptions::default());
    p.budget_limit = 0;
    let plan = solve(&optical_domain(), &p).unwrap();
    assert!(!plan.feasible);
    assert!(plan.steps.is_empty());
    // 2 ROADMs, 1 fiber, completion
    let min = 2 * 130_000 + 125_000 + 2 * 70_000 + 125_000 + 50_000;
    assert_eq!(
        plan.infeasibility_reason,
        Some(InfeasibilityReason::BudgetShortfall {
            minimum_cost: min,
            budget_limit: 0,
            shortfall: min,
        })
    );
}

#[test]
fn tight_budget_is_feasible() {
    let min = 700_000;
    let p = generate_problem(&intent(2, Some(min), None), GenerateOptions::default());
    let plan = solve(&optical_domain(), &p).unwrap();
    assert!(plan.feasible);
    assert_eq!(plan.total_cost, min);
    let p = generate_problem(&intent(2, Some(min - 1), None), GenerateOptions::default());
    assert!(!solve(&optical_domain(), &p).unwrap().feasible);
}

#[test]
fn physics_failure_is_unreachable_goal() {
    let p = generate_problem(
        &intent(3, None, Some(1)),
        GenerateOptions {
            latency_ok: false,
            ..Default::default()
        },
    );
    let plan = solve(&optical_domain(), &p).unwrap();
    let Some(InfeasibilityReason::UnreachableGoals { literals }) = plan.infeasibility_reason else {
        panic!("expected unreachable goals, got {plan:?}");
    };
    assert!(literals.contains(&"(latency-satisfied)".to_owned()));
    assert!(literals.contains(&"(deployment-complete)".to_owned()));
}

#[test]
fn grounding_cap() {
    let planner = Planner::new(PlannerConfig {
        grounding_cap: 10,
        ..Default::default()
    });
    let err = planner.solve(&optical_domain(), &case_one_problem()).unwrap_err();
    assert!(matches!(err, PlanError::GroundingLimit { cap: 10, .. }));
}

#[test]
fn goal_free_problem_has_empty_plan() {
    let mut p = case_one_problem();
    p.goals.clear();
    let plan = solve(&optical_domain(), &p).unwrap();
    assert!(plan.feasible);
    assert!(plan.steps.is_empty());
    assert_eq!(plan.total_cost, 0);
}

#[test]
fn strict_case_one_exceeds_budget() {
    let mut e = intent(3, Some(1_500_000), Some(10));
    e.base.constraints.disjoint_paths = Some(2);
    let p = generate_problem(
        &e,
        GenerateOptions {
            protection: ProtectionMode::Strict,
            latency_ok: true,
        },
    );
    let plan = solve(&optical_domain(), &p).unwrap();
    assert!(!plan.feasible);
    // 3 ROADMs, 6 links deployed and activated, 3 protections, completion
    let min = 3 * 200_000 + 6 * 250_000 + 3 * 25_000 + 50_000;
    assert!(matches!(
        plan.infeasibility_reason,
        Some(InfeasibilityReason::BudgetShortfall { minimum_cost, .. }) if minimum_cost == min
    ));
}

#[test]
fn fifteen_sites_without_latency_limit() {
    let e = intent(15, None, None);
    let p = generate_problem(&e, GenerateOptions::default());
    let (plan, stats) = Planner::default().solve_with_stats(&optical_domain(), &p).unwrap();
    assert!(plan.feasible);
    assert_eq!(plan.steps.len(), 15 * 3 + 105 * 2 + 1);
    assert!(stats.expanded < 1000, "{stats:?}");
}

fn small_intent() -> impl proptest::strategy::Strategy<Value = EnrichedIntent> {
    (2usize..=3, prop::option::of(0u64..1_500_000), any::<bool>()).prop_map(|(n, b, lat)| {
        intent(n, b, lat.then_some(5))
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn astar_matches_uniform_cost(e in small_intent(), latency_ok in any::<bool>()) {
        let opts = GenerateOptions { latency_ok, ..Default::default() };
        let p = generate_problem(&e, opts);
        let d = optical_domain();
        let a = solve(&d, &p).unwrap();
        let u = Planner::new(PlannerConfig { strategy: Strategy::UniformCost, ..Default::default() })
            .solve(&d, &p)
            .unwrap();
        prop_assert_eq!(a, u);
    }

    #[test]
    fn checkpoints_never_exceed_budget(e in small_intent()) {
        let p = generate_problem(&e, GenerateOptions::default());
        let plan = solve(&optical_domain(), &p).unwrap();
        prop_assert_eq!(plan.feasible, plan.infeasibility_reason.is_none());
        prop_assert_eq!(plan.feasible || plan.steps.is_empty(), true);
        let mut last = 0;
        for s in &plan.steps {
            prop_assert!(s.cumulative_cost >= last);
            prop_assert!(s.cumulative_cost <= p.budget_limit);
            last = s.cumulative_cost;
        }
    }

    #[test]
    fn raising_the_budget_keeps_the_cost(e in small_intent(), extra in 1u64..1_000_000) {
        let d = optical_domain();
        let p = generate_problem(&e, GenerateOptions::default());
        let plan = solve(&d, &p).unwrap();
        if plan.feasible {
            let mut q = p.clone();
            q.budget_limit = p.budget_limit.saturating_add(extra);
            let more = solve(&d, &q).unwrap();
            prop_assert!(more.feasible);
            prop_assert_eq!(more.total_cost, plan.total_cost);
        }
    }
}

#[test]
fn lmcut_is_exact_on_delete_free_instances() {
    let d = optical_domain();
    let p = case_one_problem();
    let task = ground::ground(&d, &p, DEFAULT_GROUNDING_CAP).unwrap();
    let h = LmCut::new(&task);
    let mut flags: Vec<bool> = alloc::vec![false; task.facts.len()];
    for &f in &task.init {
        flags[f as usize] = true;
    }
    assert_eq!(h.evaluate(&flags), 1_400_000);
}
