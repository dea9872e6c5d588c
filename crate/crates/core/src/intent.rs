//! Structured intent: the validated form of a parsed intent sentence.

use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

use serde::{Deserialize, Serialize};

/// Site role inside the optical network.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Role {
    Hub,
    Core,
    Edge,
}

impl Role {
    pub const ALL: [Role; 3] = [Role::Hub, Role::Core, Role::Edge];

    pub fn as_str(self) -> &'static str {
        match self {
            Role::Hub => "hub",
            Role::Core => "core",
            Role::Edge => "edge",
        }
    }

    /// Case-insensitive lookup of a role keyword.
    pub fn from_keyword(word: &str) -> Option<Role> {
        Role::ALL
            .into_iter()
            .find(|r| r.as_str().eq_ignore_ascii_case(word))
    }
}

impl fmt::Display for Role {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Availability class requested for the whole network.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Availability {
    #[serde(rename = "high-availability")]
    HighAvailability,
    #[serde(rename = "standard")]
    Standard,
    #[serde(rename = "best-effort")]
    BestEffort,
}

impl Availability {
    pub const ALL: [Availability; 3] = [
        Availability::HighAvailability,
        Availability::Standard,
        Availability::BestEffort,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Availability::HighAvailability => "high-availability",
            Availability::Standard => "standard",
            Availability::BestEffort => "best-effort",
        }
    }

    pub fn from_keyword(word: &str) -> Option<Availability> {
        Availability::ALL
            .into_iter()
            .find(|a| a.as_str().eq_ignore_ascii_case(word))
    }
}

impl fmt::Display for Availability {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct SiteSpec {
    pub name: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub location: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub role: Option<Role>,
}

impl SiteSpec {
    pub fn new(name: impl Into<String>) -> Self {
        SiteSpec {
            name: name.into(),
            location: None,
            role: None,
        }
    }

    pub fn with_role(mut self, role: Role) -> Self {
        self.role = Some(role);
        self
    }

    pub fn with_location(mut self, location: impl Into<String>) -> Self {
        self.location = Some(location.into());
        self
    }
}

/// Numeric and compliance constraints. Absent clauses stay `None`; the parser
/// never injects defaults.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct ConstraintSet {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub latency_ms: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub budget_usd: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub disjoint_paths: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub compliance: Option<Vec<String>>,
}

impl ConstraintSet {
    pub fn is_empty(&self) -> bool {
        self.latency_ms.is_none()
            && self.budget_usd.is_none()
            && self.disjoint_paths.is_none()
            && self.compliance.is_none()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct StructuredIntent {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub availability: Option<Availability>,
    pub sites: Vec<SiteSpec>,
    #[serde(default)]
    pub constraints: ConstraintSet,
}

/// Violations of [`StructuredIntent`] invariants, reported by
/// [`StructuredIntent::check`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum IntentInvariantError {
    TooFewSites(usize),
    DuplicateSite(String),
    BadSiteName(String),
    NonPositive(&'static str),
    EmptyCompliance,
}

impl fmt::Display for IntentInvariantError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            IntentInvariantError::TooFewSites(n) => {
                write!(f, "an intent needs at least two sites, found {n}")
            }
            IntentInvariantError::DuplicateSite(s) => write!(f, "duplicate site name {s}"),
            IntentInvariantError::BadSiteName(s) => write!(f, "invalid site name {s:?}"),
            IntentInvariantError::NonPositive(field) => write!(f, "{field} must be positive"),
            IntentInvariantError::EmptyCompliance => f.write_str("compliance list is empty"),
        }
    }
}

impl StructuredIntent {
    pub fn new(sites: Vec<SiteSpec>) -> Self {
        StructuredIntent {
            availability: None,
            sites,
            constraints: ConstraintSet::default(),
        }
    }

    /// Checks the type invariants. Intents produced by the parser always pass;
    /// intents deserialized from JSON should be checked before use.
    pub fn check(&self) -> Result<(), IntentInvariantError> {
        if self.sites.len() < 2 {
            return Err(IntentInvariantError::TooFewSites(self.sites.len()));
        }
        for (i, site) in self.sites.iter().enumerate() {
            if !crate::grammar::is_site_name(&site.name) {
                return Err(IntentInvariantError::BadSiteName(site.name.clone()));
            }
            if self.sites[..i].iter().any(|s| s.name == site.name) {
                return Err(IntentInvariantError::DuplicateSite(site.name.clone()));
            }
        }
        let c = &self.constraints;
        if c.latency_ms == Some(0) {
            return Err(IntentInvariantError::NonPositive("latency_ms"));
        }
        if c.budget_usd == Some(0) {
            return Err(IntentInvariantError::NonPositive("budget_usd"));
        }
        if c.disjoint_paths == Some(0) {
            return Err(IntentInvariantError::NonPositive("disjoint_paths"));
        }
        if matches!(&c.compliance, Some(list) if list.is_empty()) {
            return Err(IntentInvariantError::EmptyCompliance);
        }
        Ok(())
    }

    /// Distinct roles in site order.
    pub fn roles(&self) -> Vec<Role> {
        let mut out = Vec::new();
        for role in self.sites.iter().filter_map(|s| s.role) {
            if !out.contains(&role) {
                out.push(role);
            }
        }
        out
    }
}
