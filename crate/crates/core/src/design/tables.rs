//! Price and duration tables. The defaults here are what the shipped CSV files
//! contain; deployments can override them without code changes.

use alloc::borrow::ToOwned;
use alloc::string::String;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CostCategory {
    Infrastructure,
    Equipment,
    InstallationLabor,
}

impl CostCategory {
    pub const ALL: [CostCategory; 3] = [
        CostCategory::Infrastructure,
        CostCategory::Equipment,
        CostCategory::InstallationLabor,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            CostCategory::Infrastructure => "infrastructure",
            CostCategory::Equipment => "equipment",
            CostCategory::InstallationLabor => "installation-labor",
        }
    }

    pub fn from_name(s: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|c| c.as_str() == s)
    }
}

/// Which design element a plan action becomes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ElementKind {
    /// A site entry (first argument is the site).
    Site,
    /// A fiber route (arguments: endpoint, endpoint, link).
    Route,
    /// A bill-of-materials line.
    Bom,
}

impl ElementKind {
    pub fn from_name(s: &str) -> Option<Self> {
        match s {
            "site" => Some(ElementKind::Site),
            "route" => Some(ElementKind::Route),
            "bom" => Some(ElementKind::Bom),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PriceEntry {
    pub action: String,
    pub element: ElementKind,
    pub item_class: String,
    pub model: String,
    pub category: CostCategory,
    pub unit_cost: u64,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DurationEntry {
    pub action: String,
    pub half_weeks: u32,
    /// Steps touching a common site run one after another instead of in
    /// parallel.
    pub exclusive_sites: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DesignTables {
    pub prices: Vec<PriceEntry>,
    pub durations: Vec<DurationEntry>,
    /// Commissioning and acceptance testing appended to every non-empty
    /// schedule.
    pub acceptance_half_weeks: u32,
    /// Per-hop equipment latency added to route estimates (reporting only;
    /// the feasibility bound ignores it).
    pub hop_penalty_ms: f64,
}

impl DesignTables {
    pub fn price(&self, action: &str) -> Option<&PriceEntry> {
        self.prices.iter().find(|p| p.action == action)
    }

    pub fn duration(&self, action: &str) -> Option<&DurationEntry> {
        self.durations.iter().find(|d| d.action == action)
    }
}

impl Default for DesignTables {
    fn default() -> Self {
        use CostCategory::*;
        use ElementKind::*;
        let price = |action: &str, element, class: &str, model: &str, category, unit_cost| PriceEntry {
            action: action.to_owned(),
            element,
            item_class: class.to_owned(),
            model: model.to_owned(),
            category,
            unit_cost,
        };
        let dur = |action: &str, half_weeks, exclusive_sites| DurationEntry {
            action: action.to_owned(),
            half_weeks,
            exclusive_sites,
        };
        DesignTables {
            prices: alloc::vec![
                price("commission-site", Site, "Site commissioning", "SVC-SITE-COMMISSION", InstallationLabor, 0),
                price("install-roadm", Bom, "ROADM", "ROADM-CDC-9D", Equipment, 130_000),
                price("deploy-fiber", Route, "Fiber span", "FIBER-SPAN-SMF", Infrastructure, 125_000),
                price("activate-roadm", Bom, "ROADM turn-up", "SVC-ROADM-TURNUP", InstallationLabor, 70_000),
                price("activate-fiber", Bom, "Fiber lighting and OTDR test", "SVC-FIBER-LIGHT", InstallationLabor, 125_000),
                price("configure-protection", Bom, "1+1 protection switch", "OPS-1P1", Equipment, 25_000),
                price("complete-deployment", Bom, "System integration", "SVC-INTEGRATION", InstallationLabor, 50_000),
                price("verify-latency", Bom, "Latency verification", "SVC-LATENCY-TEST", InstallationLabor, 0),
            ],
            durations: alloc::vec![
                dur("commission-site", 4, false),
                dur("install-roadm", 2, false),
                dur("deploy-fiber", 6, true),
                dur("activate-roadm", 1, false),
                dur("activate-fiber", 1, false),
                dur("configure-protection", 1, false),
                dur("complete-deployment", 2, false),
                dur("verify-latency", 1, false),
            ],
            acceptance_half_weeks: 8,
            hop_penalty_ms: 0.0,
        }
    }
}
