//! Physics and graph checks run before planning.
//!
//! Latency bounds use the great-circle distance between registry coordinates
//! and the speed of light in fiber. Real routes are longer than the great
//! circle, so a pair whose bound already exceeds the limit can never meet it.

use alloc::borrow::ToOwned;
use alloc::collections::{BTreeMap, VecDeque};
use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use serde::{Deserialize, Serialize};

use crate::intent::StructuredIntent;

pub const EARTH_RADIUS_KM: f64 = 6371.0;
pub const FIBER_KM_PER_S: f64 = 200_000.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Coordinates {
    pub lat: f64,
    pub lon: f64,
}

/// Great-circle distance in km.
pub fn haversine_km(a: Coordinates, b: Coordinates) -> f64 {
    let (p1, p2) = (a.lat.to_radians(), b.lat.to_radians());
    let dp = p2 - p1;
    let dl = (b.lon - a.lon).to_radians();
    let s = libm::sin(dp / 2.0);
    let t = libm::sin(dl / 2.0);
    let h = s * s + libm::cos(p1) * libm::cos(p2) * t * t;
    2.0 * EARTH_RADIUS_KM * libm::asin(libm::sqrt(h.min(1.0)))
}

/// One-way propagation delay lower bound in ms.
pub fn min_latency_ms(km: f64) -> f64 {
    km / FIBER_KM_PER_S * 1000.0
}

#[derive(Debug, Clone, PartialEq)]
pub enum RegistryError {
    OutOfRange { id: String, lat: f64, lon: f64 },
    Duplicate(String),
    EmptyId,
}

impl fmt::Display for RegistryError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RegistryError::OutOfRange { id, lat, lon } => {
                write!(f, "{id}: coordinates ({lat}, {lon}) out of range")
            }
            RegistryError::Duplicate(id) => write!(f, "duplicate registry identifier {id}"),
            RegistryError::EmptyId => f.write_str("empty registry identifier"),
        }
    }
}

/// City or site coordinates, looked up case-insensitively.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct SiteRegistry {
    entries: BTreeMap<String, (String, Coordinates)>,
}

impl SiteRegistry {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn insert(&mut self, id: &str, lat: f64, lon: f64) -> Result<(), RegistryError> {
        let id = id.trim();
        if id.is_empty() {
            return Err(RegistryError::EmptyId);
        }
        if !(-90.0..=90.0).contains(&lat) || !(-180.0..=180.0).contains(&lon) {
            return Err(RegistryError::OutOfRange {
                id: id.to_owned(),
                lat,
                lon,
            });
        }
        let key = id.to_lowercase();
        if self.entries.contains_key(&key) {
            return Err(RegistryError::Duplicate(id.to_owned()));
        }
        self.entries.insert(key, (id.to_owned(), Coordinates { lat, lon }));
        Ok(())
    }

    pub fn from_entries<'a, I>(entries: I) -> Result<Self, RegistryError>
    where
        I: IntoIterator<Item = (&'a str, f64, f64)>,
    {
        let mut r = SiteRegistry::new();
        for (id, lat, lon) in entries {
            r.insert(id, lat, lon)?;
        }
        Ok(r)
    }

    pub fn get(&self, id: &str) -> Option<Coordinates> {
        self.entries.get(&id.trim().to_lowercase()).map(|(_, c)| *c)
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// `(identifier, coordinates)` in identifier order.
    pub fn iter(&self) -> impl Iterator<Item = (&str, Coordinates)> {
        self.entries.values().map(|(id, c)| (id.as_str(), *c))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LatencyViolation {
    pub site_a: String,
    pub site_b: String,
    pub distance_km: f64,
    pub min_latency_ms: f64,
    pub required_ms: u64,
}

impl fmt::Display for LatencyViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{} to {}: {:.0} km great-circle, at least {:.1} ms at 200,000 km/s, but {} ms required",
            self.site_a, self.site_b, self.distance_km, self.min_latency_ms, self.required_ms
        )
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeasibilityVerdict {
    pub feasible: bool,
    /// Violating pairs, worst first.
    pub violations: Vec<LatencyViolation>,
    /// Sites skipped because their location is not in the registry.
    pub warnings: Vec<String>,
    pub narrative: String,
}

/// Registry key for a site: its location when given, else its name.
fn site_key(site: &crate::intent::SiteSpec) -> &str {
    site.location.as_deref().unwrap_or(&site.name)
}

fn site_label(site: &crate::intent::SiteSpec) -> String {
    match &site.location {
        Some(loc) => format!("{} ({loc})", site.name),
        None => site.name.clone(),
    }
}

pub fn check_latency(intent: &StructuredIntent, registry: &SiteRegistry) -> FeasibilityVerdict {
    let Some(limit) = intent.constraints.latency_ms else {
        return FeasibilityVerdict {
            feasible: true,
            violations: Vec::new(),
            warnings: Vec::new(),
            narrative: "No latency constraint; nothing to check.".to_owned(),
        };
    };
    let mut warnings = Vec::new();
    let mut located = Vec::new();
    for site in &intent.sites {
        match registry.get(site_key(site)) {
            Some(c) => located.push((site, c)),
            None => warnings.push(format!(
                "{} has no known coordinates; excluded from the latency check",
                site.name
            )),
        }
    }
    let mut violations = Vec::new();
    let mut pairs = 0usize;
    for (i, &(a, ca)) in located.iter().enumerate() {
        for &(b, cb) in &located[i + 1..] {
            pairs += 1;
            let km = haversine_km(ca, cb);
            let ms = min_latency_ms(km);
            if ms > limit as f64 {
                violations.push(LatencyViolation {
                    site_a: site_label(a),
                    site_b: site_label(b),
                    distance_km: km,
                    min_latency_ms: ms,
                    required_ms: limit,
                });
            }
        }
    }
    // stable: equal bounds keep pair order
    violations.sort_by(|x, y| y.min_latency_ms.total_cmp(&x.min_latency_ms));
    let narrative = match violations.first() {
        None if pairs == 0 => format!(
            "No located site pairs; the {limit} ms latency limit could not be checked."
        ),
        None => format!("All {pairs} located site pairs can meet the {limit} ms latency limit."),
        Some(worst) => format!(
            "Physically infeasible: {} of {pairs} site pairs cannot meet {limit} ms. \
             Light in fiber travels about 200,000 km/s, so distance alone sets a floor on latency. \
             Worst pair: {worst}.",
            violations.len()
        ),
    };
    FeasibilityVerdict {
        feasible: violations.is_empty(),
        violations,
        warnings,
        narrative,
    }
}

/// An undirected multigraph of sites and fiber links.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Topology {
    pub nodes: Vec<String>,
    pub links: Vec<(usize, usize)>,
}

impl Topology {
    pub fn new<S: Into<String>>(nodes: impl IntoIterator<Item = S>) -> Self {
        Topology {
            nodes: nodes.into_iter().map(Into::into).collect(),
            links: Vec::new(),
        }
    }

    pub fn index(&self, name: &str) -> Option<usize> {
        self.nodes.iter().position(|n| n == name)
    }

    /// Adds a link between two named nodes, creating them if needed.
    pub fn link(&mut self, a: &str, b: &str) {
        let mut idx = |name: &str| match self.index(name) {
            Some(i) => i,
            None => {
                self.nodes.push(name.to_owned());
                self.nodes.len() - 1
            }
        };
        let (i, j) = (idx(a), idx(b));
        self.links.push((i, j));
    }
}

struct Arc {
    to: usize,
    cap: u32,
    rev: usize,
}

/// Maximum number of edge-disjoint paths between `s` and `t` (Menger), by
/// unit-capacity max-flow. Self-loops are ignored.
pub fn max_edge_disjoint(n: usize, links: &[(usize, usize)], s: usize, t: usize) -> u32 {
    if s == t {
        return 0;
    }
    let mut adj: Vec<Vec<Arc>> = (0..n).map(|_| Vec::new()).collect();
    for &(u, v) in links {
        if u == v {
            continue;
        }
        // an undirected unit edge is a pair of opposite unit arcs, each the
        // other's residual
        let (ru, rv) = (adj[v].len(), adj[u].len());
        adj[u].push(Arc { to: v, cap: 1, rev: ru });
        adj[v].push(Arc { to: u, cap: 1, rev: rv });
    }
    let mut flow = 0;
    loop {
        let mut prev: Vec<Option<(usize, usize)>> = vec![None; n];
        let mut seen = vec![false; n];
        seen[s] = true;
        let mut queue = VecDeque::from([s]);
        while let Some(u) = queue.pop_front() {
            if u == t {
                break;
            }
            for (k, arc) in adj[u].iter().enumerate() {
                if arc.cap > 0 && !seen[arc.to] {
                    seen[arc.to] = true;
                    prev[arc.to] = Some((u, k));
                    queue.push_back(arc.to);
                }
            }
        }
        if !seen[t] {
            return flow;
        }
        let mut v = t;
        while let Some((u, k)) = prev[v] {
            adj[u][k].cap -= 1;
            let (to, rev) = (adj[u][k].to, adj[u][k].rev);
            adj[to][rev].cap += 1;
            v = u;
        }
        flow += 1;
    }
}

/// Edge-disjoint path counts for every unordered node pair `(i, j)`, `i < j`.
pub fn count_disjoint_paths(topology: &Topology) -> BTreeMap<(usize, usize), u32> {
    let n = topology.nodes.len();
    let mut out = BTreeMap::new();
    for i in 0..n {
        for j in i + 1..n {
            out.insert((i, j), max_edge_disjoint(n, &topology.links, i, j));
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::intent::SiteSpec;
    use proptest::prelude::*;

    const NY: Coordinates = Coordinates { lat: 40.7128, lon: -74.0060 };
    const LA: Coordinates = Coordinates { lat: 34.0522, lon: -118.2437 };

    fn registry() -> SiteRegistry {
        SiteRegistry::from_entries([
            ("New York", NY.lat, NY.lon),
            ("Los Angeles", LA.lat, LA.lon),
            ("Chicago", 41.8781, -87.6298),
            ("Philadelphia", 39.9526, -75.1652),
            ("Twin A", 10.0, 10.0),
            ("Twin B", 10.0, 10.0),
        ])
        .unwrap()
    }

    fn located(pairs: &[(&str, &str)], latency: u64) -> StructuredIntent {
        let sites = pairs
            .iter()
            .map(|(n, loc)| SiteSpec::new(*n).with_location(*loc))
            .collect();
        let mut i = StructuredIntent::new(sites);
        i.constraints.latency_ms = Some(latency);
        i
    }

    /// Spherical law of cosines: an independent formula for the same
    /// distance, well conditioned at continental scale.
    fn cosine_law_km(a: Coordinates, b: Coordinates) -> f64 {
        let (p1, p2) = (a.lat.to_radians(), b.lat.to_radians());
        let dl = (b.lon - a.lon).to_radians();
        let c = p1.sin() * p2.sin() + p1.cos() * p2.cos() * dl.cos();
        EARTH_RADIUS_KM * c.clamp(-1.0, 1.0).acos()
    }

    #[test]
    fn new_york_los_angeles() {
        let km = haversine_km(NY, LA);
        assert!((km - cosine_law_km(NY, LA)).abs() < 1e-6);
        assert!((km - 3936.0).abs() < 1.0, "{km}");
        let v = check_latency(
            &located(&[("SITE1", "New York"), ("SITE2", "Los Angeles")], 1),
            &registry(),
        );
        assert!(!v.feasible);
        let w = &v.violations[0];
        assert!((w.min_latency_ms - 19.68).abs() < 0.05, "{}", w.min_latency_ms);
        assert_eq!(w.site_a, "SITE1 (New York)");
        assert!(v.narrative.contains("200,000 km/s"));
        assert!(v.narrative.contains("19.7 ms"));
    }

    #[test]
    fn colocated_sites_are_feasible() {
        let v = check_latency(&located(&[("A", "Twin A"), ("B", "Twin B")], 1), &registry());
        assert!(v.feasible);
        assert!(v.violations.is_empty());
    }

    #[test]
    fn boundary_is_not_a_violation() {
        assert_eq!(min_latency_ms(2000.0), 10.0);
        // a pair exactly 2,000 km apart along the equator
        let deg = 2000.0 / EARTH_RADIUS_KM * 180.0 / core::f64::consts::PI;
        let r = SiteRegistry::from_entries([("P", 0.0, 0.0), ("Q", 0.0, deg)]).unwrap();
        let km = haversine_km(r.get("p").unwrap(), r.get("Q").unwrap());
        assert!((km - 2000.0).abs() < 1e-9);
        let v = check_latency(&located(&[("A", "P"), ("B", "Q")], 11), &r);
        assert!(v.feasible);
        let v = check_latency(&located(&[("A", "P"), ("B", "Q")], 9), &r);
        assert!(!v.feasible);
    }

    #[test]
    fn unknown_sites_warn() {
        let mut i = located(&[("SITE1", "New York"), ("SITE2", "Atlantis")], 1);
        i.sites.push(SiteSpec::new("SITE3"));
        let v = check_latency(&i, &registry());
        assert!(v.feasible);
        assert_eq!(v.warnings.len(), 2);
        assert!(v.narrative.contains("could not be checked"));
    }

    #[test]
    fn no_latency_constraint() {
        let mut i = located(&[("A", "New York"), ("B", "Los Angeles")], 1);
        i.constraints.latency_ms = None;
        assert!(check_latency(&i, &registry()).feasible);
    }

    #[test]
    fn violations_worst_first() {
        let i = located(
            &[("A", "New York"), ("B", "Philadelphia"), ("C", "Los Angeles"), ("D", "Chicago")],
            1,
        );
        let v = check_latency(&i, &registry());
        assert_eq!(v.violations.len(), 5, "New York to Philadelphia is under 1 ms");
        assert!(v.violations[0].site_a.contains("New York"));
        assert!(v.violations[0].site_b.contains("Los Angeles"));
        assert!(v.violations.windows(2).all(|w| w[0].min_latency_ms >= w[1].min_latency_ms));
    }

    #[test]
    fn registry_rejects_bad_entries() {
        let mut r = registry();
        assert_eq!(r.insert("new york", 0.0, 0.0), Err(RegistryError::Duplicate("new york".into())));
        assert!(matches!(r.insert("X", 91.0, 0.0), Err(RegistryError::OutOfRange { .. })));
        assert!(matches!(r.insert("X", 0.0, -180.5), Err(RegistryError::OutOfRange { .. })));
        assert_eq!(r.insert("  ", 0.0, 0.0), Err(RegistryError::EmptyId));
    }

    #[test]
    fn triangle_counts() {
        let mut t = Topology::new(["A", "B", "C"]);
        t.link("A", "B");
        t.link("B", "C");
        t.link("A", "C");
        assert!(count_disjoint_paths(&t).values().all(|&c| c == 2));
        t.link("A", "B");
        let c = count_disjoint_paths(&t);
        assert_eq!(c[&(0, 1)], 3);
        assert_eq!(c[&(0, 2)], 2);
        assert_eq!(c[&(1, 2)], 2);
    }

    #[test]
    fn disconnected_pair_is_zero() {
        let mut t = Topology::new(["A", "B", "C", "D"]);
        t.link("A", "B");
        t.link("C", "D");
        let c = count_disjoint_paths(&t);
        assert_eq!(c[&(0, 2)], 0);
        assert_eq!(c[&(0, 1)], 1);
        assert_eq!(max_edge_disjoint(4, &t.links, 1, 1), 0);
    }

    fn coords() -> impl Strategy<Value = Coordinates> {
        (-90.0f64..=90.0, -180.0f64..=180.0).prop_map(|(lat, lon)| Coordinates { lat, lon })
    }

    proptest! {
        #[test]
        fn haversine_symmetric(a in coords(), b in coords()) {
            prop_assert_eq!(haversine_km(a, b), haversine_km(b, a));
            prop_assert_eq!(haversine_km(a, a), 0.0);
            prop_assert!(haversine_km(a, b) <= core::f64::consts::PI * EARTH_RADIUS_KM + 1e-6);
        }

        #[test]
        fn haversine_triangle(a in coords(), b in coords(), c in coords()) {
            prop_assert!(haversine_km(a, c) <= haversine_km(a, b) + haversine_km(b, c) + 1e-6);
        }

        #[test]
        fn relaxing_latency_never_hurts(
            pts in prop::collection::vec(coords(), 2..6),
            limit in 1u64..50,
            extra in 0u64..50,
        ) {
            let mut r = SiteRegistry::new();
            let mut sites = Vec::new();
            for (k, p) in pts.iter().enumerate() {
                let id = format!("C{k}");
                r.insert(&id, p.lat, p.lon).unwrap();
                sites.push(SiteSpec::new(format!("SITE{k}")).with_location(id));
            }
            let mut i = StructuredIntent::new(sites);
            i.constraints.latency_ms = Some(limit);
            let tight = check_latency(&i, &r);
            i.constraints.latency_ms = Some(limit + extra);
            let loose = check_latency(&i, &r);
            prop_assert!(loose.violations.len() <= tight.violations.len());
            prop_assert!(!tight.feasible || loose.feasible);
            prop_assert_eq!(tight.feasible, tight.violations.is_empty());
            for v in &tight.violations {
                prop_assert!(v.min_latency_ms > v.required_ms as f64);
            }
        }
    }
}
