use alloc::borrow::ToOwned;
use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use proptest::prelude::*;

use super::*;
use crate::feasibility::check_latency;
use crate::generate::{generate_problem, GenerateOptions};
use crate::intent::{SiteSpec, StructuredIntent};
use crate::pddl::{optical_domain, Problem};
use crate::planner::solve;
use crate::retrieval::Guidance;
use crate::validate::certify;

fn case_one() -> EnrichedIntent {
    let sites = vec![
        SiteSpec::new("SITE1").with_role(Role::Core),
        SiteSpec::new("SITE2").with_role(Role::Edge),
        SiteSpec::new("SITE3").with_role(Role::Hub),
    ];
    let mut base = StructuredIntent::new(sites);
    base.availability = Some(crate::intent::Availability::HighAvailability);
    base.constraints.latency_ms = Some(10);
    base.constraints.budget_usd = Some(1_500_000);
    base.constraints.disjoint_paths = Some(3);
    let mut e = EnrichedIntent::bare(base);
    e.guidance.push(Guidance {
        doc_id: "fiber-os2".to_owned(),
        text: "Use OS2 single-mode fiber for long-haul connections".to_owned(),
        score: 1.0,
    });
    e
}

fn plan_for(e: &EnrichedIntent) -> (Problem, ValidatedPlan) {
    let d = optical_domain();
    let p = generate_problem(e, GenerateOptions::default());
    let plan = solve(&d, &p).unwrap();
    let v = certify(&d, &p, plan).unwrap();
    (p, v)
}

fn design(e: &EnrichedIntent) -> NetworkDesign {
    let (_, v) = plan_for(e);
    translate(&v, e, &DesignTables::default(), &SiteRegistry::new()).unwrap()
}

#[test]
fn case_one_totals() {
    let d = design(&case_one());
    assert!(d.verified);
    assert_eq!(d.cost_breakdown.grand_total, 1_400_000);
    assert_eq!(d.element_cost(), 1_400_000);
    assert_eq!(d.timeline_weeks, 18);
    let phase_costs: Vec<(&str, u64)> = d
        .cost_breakdown
        .phases
        .iter()
        .map(|p| (p.name.as_str(), p.cost))
        .collect();
    assert_eq!(
        phase_costs,
        [
            ("commission-site", 0),
            ("install-roadm", 390_000),
            ("deploy-fiber", 375_000),
            ("activate-roadm", 210_000),
            ("activate-fiber", 375_000),
            ("complete-deployment", 50_000),
        ]
    );
    let cats = &d.cost_breakdown.by_category;
    assert_eq!(cats[&CostCategory::Equipment], 390_000);
    assert_eq!(cats[&CostCategory::Infrastructure], 375_000);
    assert_eq!(cats[&CostCategory::InstallationLabor], 635_000);
}

#[test]
fn case_one_timeline() {
    let d = design(&case_one());
    let rows: Vec<(&str, f64, f64, u32)> = d
        .timeline
        .iter()
        .map(|p| (p.name.as_str(), p.start_week, p.duration_weeks, p.rounds))
        .collect();
    assert_eq!(
        rows,
        [
            ("commission-site", 0.0, 2.0, 1),
            ("install-roadm", 2.0, 1.0, 1),
            ("deploy-fiber", 3.0, 9.0, 3),
            ("activate-roadm", 12.0, 0.5, 1),
            ("activate-fiber", 12.5, 0.5, 1),
            ("complete-deployment", 13.0, 1.0, 1),
            (ACCEPTANCE_PHASE, 14.0, 4.0, 1),
        ]
    );
}

#[test]
fn case_one_elements() {
    let d = design(&case_one());
    assert!(d.traceability_complete(16));
    assert_eq!(d.fiber_routes.len(), 3);
    let deploy_steps: Vec<usize> = d.fiber_routes.iter().map(|r| r.steps[0]).collect();
    assert_eq!(deploy_steps, [7, 8, 9]);
    assert_eq!(d.fiber_routes[0].steps, [7, 13]);
    assert!(d.fiber_routes.iter().all(|r| r.fiber_type == "OS2"));
    assert_eq!((d.fiber_routes[1].site_a.as_str(), d.fiber_routes[1].site_b.as_str()), ("SITE1", "SITE3"));
    let roadms: Vec<&BomLine> = d.equipment.iter().filter(|b| b.item_class == "ROADM").collect();
    assert_eq!(roadms.len(), 3);
    assert_eq!(roadms[2].location.as_deref(), Some("SITE3"));
    assert_eq!(roadms[2].steps, [6]);
    assert_eq!(d.sites.len(), 3);
    assert_eq!(d.sites[1].role, Some(Role::Edge));
    assert_eq!(d.guidance_applied, ["fiber-os2"]);
}

#[test]
fn case_one_constraints() {
    let d = design(&case_one());
    let status = |name: &str| {
        d.constraint_report
            .iter()
            .find(|c| c.constraint == name)
            .map(|c| c.status)
    };
    assert_eq!(status("availability"), Some(ConstraintStatus::Met));
    // one fiber per pair of a triangle gives two edge-disjoint paths, not three
    assert_eq!(status("disjoint_paths"), Some(ConstraintStatus::Degraded));
    assert_eq!(status("latency"), Some(ConstraintStatus::NotApplicable));
    assert_eq!(status("budget"), Some(ConstraintStatus::Met));
    assert_eq!(status("compliance"), None);
    let budget = d.constraint_report.iter().find(|c| c.constraint == "budget").unwrap();
    assert!(budget.detail.contains("$100,000 remaining"));
}

#[test]
fn default_fiber_type() {
    let mut e = case_one();
    e.guidance.clear();
    assert!(design(&e).fiber_routes.iter().all(|r| r.fiber_type == "G.652"));
}

#[test]
fn located_routes_get_lengths() {
    let mut e = case_one();
    e.base.sites[0].location = Some("New York".to_owned());
    e.base.sites[1].location = Some("Boston".to_owned());
    let reg = SiteRegistry::from_entries([("New York", 40.7128, -74.0060), ("Boston", 42.3601, -71.0589)]).unwrap();
    let (_, v) = plan_for(&e);
    let d = translate(&v, &e, &DesignTables::default(), &reg).unwrap();
    let km = d.fiber_routes[0].great_circle_km.unwrap();
    assert!((km - 306.0).abs() < 2.0, "{km}");
    assert!(d.fiber_routes[1].great_circle_km.is_none());
    let lat = d.constraint_report.iter().find(|c| c.constraint == "latency").unwrap();
    assert_eq!(lat.status, ConstraintStatus::Met);
}

#[test]
fn empty_plan_design() {
    let e = case_one();
    let d = optical_domain();
    let mut p = generate_problem(&e, GenerateOptions::default());
    p.goals.clear();
    let v = certify(&d, &p, solve(&d, &p).unwrap()).unwrap();
    let design = translate(&v, &e, &DesignTables::default(), &SiteRegistry::new()).unwrap();
    assert!(design.equipment.is_empty());
    assert_eq!(design.cost_breakdown.grand_total, 0);
    assert_eq!(design.timeline_weeks, 0);
    assert!(design.timeline.is_empty());
    assert!(design.traceability_complete(0));
}

#[test]
fn out_of_sync_price_table() {
    let (_, v) = plan_for(&case_one());
    let mut t = DesignTables::default();
    t.prices.iter_mut().find(|p| p.action == "install-roadm").unwrap().unit_cost = 1;
    assert_eq!(
        translate(&v, &case_one(), &t, &SiteRegistry::new()),
        Err(DesignError::PriceMismatch {
            step: 4,
            action: "install-roadm".to_owned(),
            table: 1,
            plan: 130_000
        })
    );
    t.prices.retain(|p| p.action != "deploy-fiber");
    t.prices.iter_mut().find(|p| p.action == "install-roadm").unwrap().unit_cost = 130_000;
    assert!(matches!(
        translate(&v, &case_one(), &t, &SiteRegistry::new()),
        Err(DesignError::UnpricedAction { step: 7, .. })
    ));
}

#[test]
fn markdown_sections_in_order() {
    let md = to_markdown(&design(&case_one()));
    let order = ["## Topology", "## Equipment", "## Costs", "## Timeline", "## Constraints", "## Guidance", "## Traceability"];
    let mut at = 0;
    for h in order {
        let i = md[at..].find(h).unwrap_or_else(|| panic!("missing {h}")) + at;
        at = i;
    }
    assert!(md.contains("$1,400,000"));
    assert!(md.contains("Total: 18 weeks."));
    assert!(md.contains("| 16 | complete-deployment | bom:"));
    assert!(!md.contains("UNVERIFIED"));
}

fn n_sites(n: usize) -> EnrichedIntent {
    let sites = (1..=n).map(|i| SiteSpec::new(format!("SITE{i}"))).collect();
    EnrichedIntent::bare(StructuredIntent::new(sites))
}

#[test]
fn degrade_two_sites_single_link() {
    let e = n_sites(2);
    let dd = degrade(&e, DegradationCause::Other("test".to_owned()), &DesignTables::default(), &SiteRegistry::new());
    assert!(!dd.verified && !dd.design.verified);
    assert_eq!(dd.topology, "ring");
    assert_eq!(dd.design.fiber_routes.len(), 1);
    assert!(!dd.limitation_notice.is_empty());
    let json = serde_json::to_value(&dd).unwrap();
    assert_eq!(json["verified"], false);
    assert_eq!(json["design"]["verified"], false);
    assert!(dd.to_markdown().starts_with("> **UNVERIFIED DESIGN.**"));
}

#[test]
fn degrade_budget_shortfall_ring() {
    let mut e = n_sites(3);
    e.base.constraints.budget_usd = Some(1);
    let d = optical_domain();
    let p = generate_problem(&e, GenerateOptions::default());
    let reason = solve(&d, &p).unwrap().infeasibility_reason.unwrap();
    let dd = degrade(&e, DegradationCause::Planning(reason), &DesignTables::default(), &SiteRegistry::new());
    assert_eq!(dd.topology, "ring");
    assert_eq!(heuristic_links(&e), [(0, 1), (1, 2), (0, 2)]);
    assert!(dd.limitation_notice.contains("$1,400,000"), "{}", dd.limitation_notice);
    assert!(dd.educational_feedback.contains("costs $1,400,000"));
    // the ring here equals the planned triangle, so the estimate matches
    assert_eq!(dd.design.cost_breakdown.grand_total, 1_400_000);
    let budget = dd.design.constraint_report.iter().find(|c| c.constraint == "budget").unwrap();
    assert_eq!(budget.status, ConstraintStatus::Degraded);
}

#[test]
fn degrade_hub_and_spoke() {
    let mut e = n_sites(8);
    e.base.sites[2].role = Some(Role::Hub);
    e.base.sites[5].role = Some(Role::Core);
    let links = heuristic_links(&e);
    assert_eq!(links, [(2, 5), (0, 2), (1, 5), (3, 2), (4, 5), (6, 2), (7, 5)].map(|(a, b)| (a.min(b), a.max(b))));
    let dd = degrade(&e, DegradationCause::Other("x".to_owned()), &DesignTables::default(), &SiteRegistry::new());
    assert_eq!(dd.topology, "hub-and-spoke");
    assert_eq!(dd.design.fiber_routes.len(), 7);
    assert!(dd.design.traceability_complete(dd.heuristic_plan.steps.len()));
}

#[test]
fn degrade_physics() {
    let mut e = n_sites(2);
    e.base.sites[0].location = Some("New York".to_owned());
    e.base.sites[1].location = Some("Los Angeles".to_owned());
    e.base.constraints.latency_ms = Some(1);
    let reg = SiteRegistry::from_entries([("New York", 40.7128, -74.0060), ("Los Angeles", 34.0522, -118.2437)]).unwrap();
    let verdict = check_latency(&e.base, &reg);
    let dd = degrade(&e, DegradationCause::Physics(verdict), &DesignTables::default(), &reg);
    assert!(dd.educational_feedback.contains("200,000 km/s"));
    assert!(dd.educational_feedback.contains("SITE1 (New York) to SITE2 (Los Angeles)"));
    assert!(dd.educational_feedback.contains("19.7 ms"));
    assert!(dd.educational_feedback.contains("at least 20 ms"));
    let lat = dd.design.constraint_report.iter().find(|c| c.constraint == "latency").unwrap();
    assert_eq!(lat.status, ConstraintStatus::Degraded);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn conservation_and_traceability(n in 2usize..=5, os2 in any::<bool>(), budget in prop::option::of(500_000u64..5_000_000)) {
        let mut e = n_sites(n);
        e.base.constraints.budget_usd = budget;
        if os2 {
            e.guidance.push(Guidance { doc_id: "d".into(), text: "os2 fiber".into(), score: 1.0 });
        }
        let d = optical_domain();
        let p = generate_problem(&e, GenerateOptions::default());
        let plan = solve(&d, &p).unwrap();
        if plan.feasible {
            let steps = plan.steps.len();
            let v = certify(&d, &p, plan).unwrap();
            let design = translate(&v, &e, &DesignTables::default(), &SiteRegistry::new()).unwrap();
            prop_assert_eq!(design.cost_breakdown.grand_total, v.total_cost);
            prop_assert_eq!(design.element_cost(), v.total_cost);
            let phases: u64 = design.cost_breakdown.phases.iter().map(|p| p.cost).sum();
            prop_assert_eq!(phases, v.total_cost);
            let cats: u64 = design.cost_breakdown.by_category.values().sum();
            prop_assert_eq!(cats, v.total_cost);
            prop_assert!(design.traceability_complete(steps));
            prop_assert_eq!(design.fiber_routes.len(), n * (n - 1) / 2);
            // greedy rounds never beat the maximum site degree
            let deploy = design.timeline.iter().find(|p| p.name == "deploy-fiber").unwrap();
            prop_assert!(deploy.rounds as usize >= n - 1);
        }
    }

    #[test]
    fn degraded_is_always_flagged(n in 2usize..=12) {
        let e = n_sites(n);
        let dd = degrade(&e, DegradationCause::Other("x".into()), &DesignTables::default(), &SiteRegistry::new());
        let json: String = serde_json::to_string(&dd).unwrap();
        prop_assert!(json.contains("\"verified\":false"));
        prop_assert!(!dd.limitation_notice.is_empty());
        prop_assert_eq!(dd.design.element_cost(), dd.design.cost_breakdown.grand_total);
        prop_assert!(dd.design.traceability_complete(dd.heuristic_plan.steps.len()));
        // every site is connected
        let topo_links = heuristic_links(&e);
        let mut seen = vec![false; n];
        for (a, b) in topo_links { seen[a] = true; seen[b] = true; }
        prop_assert!(seen.into_iter().all(|s| s));
    }
}
