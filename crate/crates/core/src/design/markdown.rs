use alloc::string::String;
use core::fmt::Write;

use super::{ConstraintStatus, DegradedDesign, NetworkDesign};
use crate::money::format_usd;

fn weeks(w: f64) -> String {
    if libm::trunc(w) == w {
        alloc::format!("{w:.0}")
    } else {
        alloc::format!("{w:.1}")
    }
}

fn steps(list: &[usize]) -> String {
    let mut out = String::new();
    for (i, s) in list.iter().enumerate() {
        if i > 0 {
            out.push_str(", ");
        }
        let _ = write!(out, "{s}");
    }
    out
}

/// Renders a design as sectioned Markdown.
pub fn to_markdown(d: &NetworkDesign) -> String {
    let mut o = String::new();
    let _ = writeln!(o, "# Network design");
    if !d.verified {
        let _ = writeln!(o, "\n> **UNVERIFIED**: heuristic design, not checked by the planner.");
    }
    let _ = writeln!(
        o,
        "\nTotal {} over {} weeks.",
        format_usd(d.cost_breakdown.grand_total),
        d.timeline_weeks
    );

    let _ = writeln!(o, "\n## Topology\n");
    let _ = writeln!(o, "| Site | Role | Location | Steps |\n|---|---|---|---|");
    for s in &d.sites {
        let role = s.role.map_or("-", |r| r.as_str());
        let _ = writeln!(
            o,
            "| {} | {} | {} | {} |",
            s.name,
            role,
            s.location.as_deref().unwrap_or("-"),
            steps(&s.steps)
        );
    }
    let _ = writeln!(o, "\n| Link | Endpoints | Fiber | Great-circle km | Latency floor | Cost | Steps |\n|---|---|---|---|---|---|---|");
    for r in &d.fiber_routes {
        let km = r.great_circle_km.map_or("unknown".into(), |k| alloc::format!("{k:.0}"));
        let ms = r.latency_floor_ms.map_or("unknown".into(), |m| alloc::format!("{m:.2} ms"));
        let _ = writeln!(
            o,
            "| {} | {} - {} | {} | {} | {} | {} | {} |",
            r.link,
            r.site_a,
            r.site_b,
            r.fiber_type,
            km,
            ms,
            format_usd(r.cost),
            steps(&r.steps)
        );
    }

    let _ = writeln!(o, "\n## Equipment\n");
    let _ = writeln!(o, "| # | Item | Model | Location | Qty | Unit cost | Steps |\n|---|---|---|---|---|---|---|");
    for (i, b) in d.equipment.iter().enumerate() {
        let _ = writeln!(
            o,
            "| {} | {} | {} | {} | {} | {} | {} |",
            i + 1,
            b.item_class,
            b.model,
            b.location.as_deref().unwrap_or("network"),
            b.quantity,
            format_usd(b.unit_cost),
            steps(&b.steps)
        );
    }

    let _ = writeln!(o, "\n## Costs\n");
    let _ = writeln!(o, "| Phase | Steps | Cost |\n|---|---|---|");
    for p in &d.cost_breakdown.phases {
        let _ = writeln!(o, "| {} | {}-{} | {} |", p.name, p.first_step, p.last_step, format_usd(p.cost));
    }
    let _ = writeln!(o, "| **Total** | | **{}** |", format_usd(d.cost_breakdown.grand_total));
    let _ = writeln!(o);
    for (c, v) in &d.cost_breakdown.by_category {
        let _ = writeln!(o, "- {}: {}", c.as_str(), format_usd(*v));
    }

    let _ = writeln!(o, "\n## Timeline\n");
    let _ = writeln!(o, "| Phase | Start (week) | Duration (weeks) | Rounds |\n|---|---|---|---|");
    for p in &d.timeline {
        let _ = writeln!(
            o,
            "| {} | {} | {} | {} |",
            p.name,
            weeks(p.start_week),
            weeks(p.duration_weeks),
            p.rounds
        );
    }
    let _ = writeln!(o, "\nTotal: {} weeks.", d.timeline_weeks);

    let _ = writeln!(o, "\n## Constraints\n");
    for c in &d.constraint_report {
        let status = match c.status {
            ConstraintStatus::Met => "met",
            ConstraintStatus::NotApplicable => "not applicable",
            ConstraintStatus::Degraded => "DEGRADED",
        };
        let _ = writeln!(o, "- **{}**: {status}. {}", c.constraint, c.detail);
    }
    if d.constraint_report.is_empty() {
        let _ = writeln!(o, "No constraints were stated.");
    }

    let _ = writeln!(o, "\n## Guidance\n");
    if d.guidance_applied.is_empty() {
        let _ = writeln!(o, "No guidance retrieved.");
    }
    for g in &d.guidance_applied {
        let _ = writeln!(o, "- {g}");
    }
    if !d.standards_cited.is_empty() {
        let _ = writeln!(o, "\nStandards: {}", d.standards_cited.join(", "));
    }
    for n in &d.notes {
        let _ = writeln!(o, "\n{n}");
    }

    let _ = writeln!(o, "\n## Traceability\n");
    let _ = writeln!(o, "| Step | Action | Elements |\n|---|---|---|");
    for t in &d.traceability {
        let _ = writeln!(o, "| {} | {} | {} |", t.step, t.action, t.elements.join(", "));
    }
    o
}

impl DegradedDesign {
    pub fn to_markdown(&self) -> String {
        let mut o = String::new();
        let _ = writeln!(o, "> **UNVERIFIED DESIGN.** {}\n", self.limitation_notice);
        let _ = writeln!(o, "## Why\n\n{}\n", self.educational_feedback);
        o.push_str(&to_markdown(&self.design));
        o
    }
}
