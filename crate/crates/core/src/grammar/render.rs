use alloc::string::String;
use alloc::vec::Vec;
use core::fmt::Write;

use super::{
    is_title_word, IntentSentence, BUDGET_PRE, COMPLIANCE_PRE, INTRO, LATENCY_POST, LATENCY_PRE,
    NETWORK, REDUNDANCY_POST, REDUNDANCY_PRE,
};
use crate::intent::{SiteSpec, StructuredIntent};

/// Renders the unique canonical sentence for an intent. Clause order is fixed:
/// availability, sites, redundancy, latency, budget, compliance. Parsing the
/// result yields the same intent.
pub fn render_canonical(intent: &StructuredIntent) -> IntentSentence {
    let mut out = String::new();
    out.push_str(&INTRO.join(" "));
    if let Some(a) = intent.availability {
        out.push(' ');
        out.push_str(a.as_str());
    }
    out.push(' ');
    out.push_str(&NETWORK.join(" "));
    out.push(' ');
    let n = intent.sites.len();
    for (i, site) in intent.sites.iter().enumerate() {
        if i > 0 {
            out.push_str(if i + 1 == n { " and " } else { ", " });
        }
        render_site(&mut out, site);
    }
    let c = &intent.constraints;
    if let Some(k) = c.disjoint_paths {
        let _ = write!(
            out,
            " {} {} {}",
            REDUNDANCY_PRE.join(" "),
            k,
            REDUNDANCY_POST.join(" ")
        );
    }
    if let Some(ms) = c.latency_ms {
        let _ = write!(out, " {} {} {}", LATENCY_PRE.join(" "), ms, LATENCY_POST.join(" "));
    }
    if let Some(usd) = c.budget_usd {
        let _ = write!(out, " {} ${}", BUDGET_PRE.join(" "), usd);
    }
    if let Some(list) = &c.compliance {
        let _ = write!(out, " {} {}", COMPLIANCE_PRE.join(" "), list.join(", "));
    }
    IntentSentence::new(out).expect("rendered sentence is never blank")
}

fn render_site(out: &mut String, site: &SiteSpec) {
    out.push_str(&site.name);
    if let Some(city) = &site.location {
        out.push_str(" in ");
        if bare_city_ok(city) {
            out.push_str(city);
        } else {
            out.push('"');
            out.push_str(city);
            out.push('"');
        }
    }
    if let Some(role) = site.role {
        out.push_str(" (");
        out.push_str(role.as_str());
        out.push(')');
    }
}

/// A city can be written unquoted only if the parser would read back exactly
/// the same words.
fn bare_city_ok(city: &str) -> bool {
    let words: Vec<&str> = city.split(' ').collect();
    let clause_heads = [
        super::REDUNDANCY_PRE,
        super::LATENCY_PRE,
        super::BUDGET_PRE,
        super::COMPLIANCE_PRE,
    ];
    words.iter().all(|w| {
        is_title_word(w)
            && !w.eq_ignore_ascii_case("and")
            && !clause_heads.iter().any(|p| w.eq_ignore_ascii_case(p[0]))
    }) && !city.ends_with('.')
}
