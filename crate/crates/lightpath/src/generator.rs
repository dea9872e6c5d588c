//! Seeded generation of intents, free-form requests and single-error
//! mutations; builds the shipped evaluation corpus and its mock rules.

use std::collections::BTreeSet;

use lightpath_core::grammar::render_canonical;
use lightpath_core::grammar::{is_site_name, VAGUE_WORDS};
use lightpath_core::triage::{Expected, Tier};
use lightpath_core::{Availability, ConstraintSet, GrammarErrorKind, Role, SiteSpec, StructuredIntent};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::eval::{EvalCase, EvalCorpus};
use crate::gateway::MockRule;

pub const DEFAULT_SEED: u64 = 20_250_417;

const SITE_PREFIXES: &[&str] = &["SITE", "DC", "POP", "CO", "NODE", "PE", "MUX", "LAB"];
/// Role words outside the grammar's hub/core/edge.
pub const FOREIGN_ROLES: &[&str] = &[
    "datacenter",
    "backbone",
    "access",
    "metro",
    "aggregation",
    "spine",
    "leaf",
    "gateway",
];
/// Standards the guidance corpus does not document.
pub const FOREIGN_STANDARDS: &[&str] = &[
    "ISO-27001",
    "GDPR",
    "SOC2",
    "HIPAA",
    "PCI-DSS",
    "NIST-800-53",
    "TIA-942",
    "FedRAMP",
];
const OPENERS: &[&str] = &["Build", "Set up", "Design", "We want", "Please plan", "I need"];

/// A numeric slot a vague word can replace.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Slot {
    Latency,
    Budget,
    Disjoint,
}

/// The single defect planted in a mutated intent.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Flaw {
    /// No sites clause (`single` keeps one site instead of none).
    MissingSites { single: bool },
    Vague { slot: Slot, word: String },
    /// Role replaced on the first site that has one.
    Role { word: String },
    Compliance { standard: String },
    /// A budget written without its dollar sign.
    Syntax,
}

impl Flaw {
    pub fn kind(&self) -> GrammarErrorKind {
        match self {
            Flaw::MissingSites { .. } => GrammarErrorKind::MissingSites,
            Flaw::Vague { .. } => GrammarErrorKind::VagueValue,
            Flaw::Role { .. } => GrammarErrorKind::InvalidRole,
            Flaw::Compliance { .. } => GrammarErrorKind::InvalidCompliance,
            Flaw::Syntax => GrammarErrorKind::SyntaxMalformation,
        }
    }
}

pub struct Generator<'a> {
    rng: ChaCha8Rng,
    standards: &'a [String],
    cities: &'a [String],
}

impl<'a> Generator<'a> {
    /// `standards` is the compliance allowlist; `cities` must be non-empty.
    pub fn new(seed: u64, standards: &'a [String], cities: &'a [String]) -> Self {
        assert!(!standards.is_empty() && !cities.is_empty());
        Generator {
            rng: ChaCha8Rng::seed_from_u64(seed),
            standards,
            cities,
        }
    }

    fn site_names(&mut self, n: usize) -> Vec<String> {
        let mut names = BTreeSet::new();
        let mut out = Vec::with_capacity(n);
        while out.len() < n {
            let prefix = SITE_PREFIXES.choose(&mut self.rng).expect("non-empty");
            let name = format!("{prefix}{}", self.rng.gen_range(1..100));
            debug_assert!(is_site_name(&name));
            if names.insert(name.clone()) {
                out.push(name);
            }
        }
        out
    }

    /// A valid intent of the given tier.
    ///
    /// basic: 2 sites, at most one constraint; intermediate: 3 sites, two
    /// constraints; complex: 4-6 sites, three or four constraints, every site
    /// with a role and a location.
    pub fn intent(&mut self, tier: Tier) -> StructuredIntent {
        let (n, constraints) = match tier {
            Tier::Basic => (2, self.rng.gen_range(0..=1)),
            Tier::Intermediate => (3, 2),
            Tier::Complex => (self.rng.gen_range(4..=6), self.rng.gen_range(3..=4)),
        };
        let names = self.site_names(n);
        let mut cities: Vec<&String> = self.cities.iter().collect();
        cities.shuffle(&mut self.rng);
        let sites = names
            .into_iter()
            .enumerate()
            .map(|(i, name)| {
                let mut site = SiteSpec::new(name);
                let with_role = match tier {
                    Tier::Basic => false,
                    Tier::Intermediate => self.rng.gen_bool(0.5),
                    Tier::Complex => true,
                };
                if with_role {
                    site.role = Some(*Role::ALL.choose(&mut self.rng).expect("roles"));
                }
                if tier == Tier::Complex {
                    site.location = Some(cities[i % cities.len()].clone());
                }
                site
            })
            .collect();
        let mut kinds = vec![0u8, 1, 2, 3];
        kinds.shuffle(&mut self.rng);
        let mut c = ConstraintSet::default();
        for k in kinds.into_iter().take(constraints) {
            match k {
                0 => c.disjoint_paths = Some(self.rng.gen_range(2..=4)),
                1 => c.latency_ms = Some(self.rng.gen_range(1..=50)),
                2 => c.budget_usd = Some(self.rng.gen_range(200..=5000) * 1000),
                _ => c.compliance = Some(self.standards_subset()),
            }
        }
        let availability = if self.rng.gen_bool(0.6) {
            Some(*Availability::ALL.choose(&mut self.rng).expect("availability"))
        } else {
            None
        };
        StructuredIntent {
            availability,
            sites,
            constraints: c,
        }
    }

    fn standards_subset(&mut self) -> Vec<String> {
        let k = self.rng.gen_range(1..=2.min(self.standards.len()));
        self.standards
            .choose_multiple(&mut self.rng, k)
            .cloned()
            .collect()
    }

    /// A flaw of the given kind suited to `intent`.
    pub fn flaw(&mut self, kind: GrammarErrorKind) -> Flaw {
        match kind {
            GrammarErrorKind::MissingSites => Flaw::MissingSites {
                single: self.rng.gen_bool(0.5),
            },
            GrammarErrorKind::VagueValue => {
                let slot = *[Slot::Latency, Slot::Budget, Slot::Disjoint]
                    .choose(&mut self.rng)
                    .expect("slots");
                self.vague(slot)
            }
            GrammarErrorKind::InvalidRole => Flaw::Role {
                word: (*FOREIGN_ROLES.choose(&mut self.rng).expect("roles")).to_owned(),
            },
            GrammarErrorKind::InvalidCompliance => {
                let allowed: Vec<&&str> = FOREIGN_STANDARDS
                    .iter()
                    .filter(|f| !self.standards.iter().any(|s| s == **f))
                    .collect();
                Flaw::Compliance {
                    standard: (**allowed.choose(&mut self.rng).expect("a foreign standard")).to_owned(),
                }
            }
            GrammarErrorKind::SyntaxMalformation => Flaw::Syntax,
        }
    }

    pub fn vague(&mut self, slot: Slot) -> Flaw {
        Flaw::Vague {
            slot,
            word: (*VAGUE_WORDS.choose(&mut self.rng).expect("words")).to_owned(),
        }
    }

    /// Makes `intent` able to carry `flaw` (adds the role, slot or budget it
    /// needs), then returns the damaged canonical sentence.
    pub fn plant(&mut self, intent: &mut StructuredIntent, flaw: &Flaw) -> String {
        let c = &mut intent.constraints;
        match flaw {
            Flaw::Vague { slot: Slot::Latency, .. } if c.latency_ms.is_none() => {
                c.latency_ms = Some(self.rng.gen_range(1..=50))
            }
            Flaw::Vague { slot: Slot::Budget, .. } | Flaw::Syntax if c.budget_usd.is_none() => {
                c.budget_usd = Some(self.rng.gen_range(200..=5000) * 1000)
            }
            Flaw::Vague { slot: Slot::Disjoint, .. } if c.disjoint_paths.is_none() => {
                c.disjoint_paths = Some(self.rng.gen_range(2..=4))
            }
            Flaw::Role { .. } if intent.sites.iter().all(|s| s.role.is_none()) => {
                let i = self.rng.gen_range(0..intent.sites.len());
                intent.sites[i].role = Some(*Role::ALL.choose(&mut self.rng).expect("roles"));
            }
            _ => {}
        }
        damage(intent, flaw)
    }
}

/// The canonical sentence of `intent` with `flaw` applied. The intent must
/// already carry whatever the flaw replaces.
pub fn damage(intent: &StructuredIntent, flaw: &Flaw) -> String {
    let sentence = render_canonical(intent).into_inner();
    let c = &intent.constraints;
    match flaw {
        Flaw::MissingSites { single } => {
            let start = sentence.find("connecting ").expect("canonical form") + "connecting ".len();
            let rest = &sentence[start..];
            let end = CLAUSE_HEADS
                .iter()
                .filter_map(|p| rest.find(p))
                .min()
                .map_or(rest.len(), |e| e - 1);
            let kept = if *single {
                let mut one = intent.clone();
                one.sites.truncate(1);
                one.constraints = ConstraintSet::default();
                let s = render_canonical(&one).into_inner();
                s[s.find("connecting ").expect("canonical form") + "connecting ".len()..].to_owned()
            } else {
                String::new()
            };
            let tail = &rest[end..];
            let joined = format!("{}{}{}", &sentence[..start], kept, tail);
            joined.replace("connecting  ", "connecting ").trim_end().to_owned()
        }
        Flaw::Vague { slot, word } => match slot {
            Slot::Latency => {
                let ms = c.latency_ms.expect("latency slot");
                sentence.replace(&format!("is {ms} milliseconds"), &format!("is {word} milliseconds"))
            }
            Slot::Budget => {
                let usd = c.budget_usd.expect("budget slot");
                sentence.replace(&format!("is ${usd}"), &format!("is {word}"))
            }
            Slot::Disjoint => {
                let k = c.disjoint_paths.expect("disjoint slot");
                sentence.replace(&format!("at least {k} "), &format!("at least {word} "))
            }
        },
        Flaw::Role { word } => {
            let role = intent.sites.iter().find_map(|s| s.role).expect("a site with a role");
            sentence.replacen(&format!("({role})"), &format!("({word})"), 1)
        }
        Flaw::Compliance { standard } => {
            let mut list = c.compliance.clone().unwrap_or_default();
            let at = list.len() / 2;
            list.insert(at, standard.clone());
            let mut bad = intent.clone();
            bad.constraints.compliance = Some(list);
            render_canonical(&bad).into_inner()
        }
        Flaw::Syntax => {
            let usd = c.budget_usd.expect("budget");
            sentence.replace(&format!("is ${usd}"), &format!("is {usd}"))
        }
    }
}

const CLAUSE_HEADS: &[&str] = &[
    "support continuous",
    "Maximum acceptable",
    "Our total",
    "compliant with",
];

fn join_names(names: &[String]) -> String {
    match names.len() {
        0 => String::new(),
        1 => names[0].clone(),
        n => format!("{} and {}", names[..n - 1].join(", "), names[n - 1]),
    }
}

fn dollars(n: u64) -> String {
    let digits = n.to_string();
    let mut out = String::new();
    for (i, ch) in digits.chars().enumerate() {
        if i > 0 && (digits.len() - i).is_multiple_of(3) {
            out.push(',');
        }
        out.push(ch);
    }
    format!("${out}")
}

impl Generator<'_> {
    /// A loosely worded request for `intent`, showing `flaw` the way a user
    /// would have written it.
    pub fn describe(&mut self, intent: &StructuredIntent, flaw: Option<&Flaw>) -> String {
        let opener = *OPENERS.choose(&mut self.rng).expect("openers");
        let avail = match intent.availability {
            Some(Availability::HighAvailability) => "high-availability ",
            Some(Availability::Standard) => "standard ",
            Some(Availability::BestEffort) => "best-effort ",
            None => "",
        };
        let article = if avail.is_empty() { "an" } else { "a" };
        let mut parts: Vec<String> = Vec::new();
        let names: Vec<String> = intent.sites.iter().map(|s| s.name.clone()).collect();
        match flaw {
            Some(Flaw::MissingSites { single: false }) => {
                parts.push(format!("{opener} {article} {avail}optical network for our facilities."))
            }
            Some(Flaw::MissingSites { single: true }) => {
                parts.push(format!("{opener} {article} {avail}optical network out of {}.", names[0]))
            }
            _ => parts.push(format!("{opener} {article} {avail}optical network linking {}.", join_names(&names))),
        }
        if !matches!(flaw, Some(Flaw::MissingSites { .. })) {
            let bad_role_site = match flaw {
                Some(Flaw::Role { .. }) => intent.sites.iter().position(|s| s.role.is_some()),
                _ => None,
            };
            for (i, s) in intent.sites.iter().enumerate() {
                let role = match (flaw, bad_role_site == Some(i)) {
                    (Some(Flaw::Role { word }), true) => Some(word.clone()),
                    _ => s.role.map(|r| r.as_str().to_owned()),
                };
                match (&s.location, role) {
                    (Some(city), Some(role)) => parts.push(format!("{} is in {city} and acts as {role}.", s.name)),
                    (Some(city), None) => parts.push(format!("{} is in {city}.", s.name)),
                    (None, Some(role)) => parts.push(format!("{} acts as {role}.", s.name)),
                    (None, None) => {}
                }
            }
        }
        let c = &intent.constraints;
        let vague = |slot: Slot| match flaw {
            Some(Flaw::Vague { slot: s, word }) if *s == slot => Some(word.as_str()),
            _ => None,
        };
        if let Some(k) = c.disjoint_paths {
            match vague(Slot::Disjoint) {
                Some(w) => parts.push(format!("Keep {w} disjoint fiber paths between every pair.")),
                None => parts.push(format!("Keep {k} disjoint fiber paths between every pair.")),
            }
        }
        if let Some(ms) = c.latency_ms {
            match vague(Slot::Latency) {
                Some(w) => parts.push(format!("We want {w} latency on every path.")),
                None => parts.push(format!("Latency per path must stay within {ms} ms.")),
            }
        }
        if let Some(usd) = c.budget_usd {
            match (vague(Slot::Budget), flaw) {
                (Some(w), _) => parts.push(format!("The budget should be {w}.")),
                (None, Some(Flaw::Syntax)) => parts.push(format!("Budget {usd}.")),
                _ => parts.push(format!("Total budget is {}.", dollars(usd))),
            }
        }
        let mut standards = c.compliance.clone().unwrap_or_default();
        if let Some(Flaw::Compliance { standard }) = flaw {
            standards.insert(standards.len() / 2, standard.clone());
        }
        if !standards.is_empty() {
            parts.push(format!("It has to comply with {}.", join_names(&standards)));
        }
        parts.join(" ")
    }
}

/// The shipped corpus plus the mock rules that reproduce the published
/// gateway behaviour over it.
#[derive(Debug, Clone)]
pub struct GeneratedCorpus {
    pub corpus: EvalCorpus,
    /// Planted rules first, then one faithful rule per case.
    pub mock_rules: Vec<MockRule>,
    pub planted: Vec<String>,
}

/// Number of valid cases per tier and invalid cases per error kind.
pub const VALID_PER_TIER: usize = 10;
pub const INVALID_PER_KIND: usize = 15;
pub const CORPUS_KINDS: [GrammarErrorKind; 4] = [
    GrammarErrorKind::MissingSites,
    GrammarErrorKind::VagueValue,
    GrammarErrorKind::InvalidRole,
    GrammarErrorKind::InvalidCompliance,
];

/// 30 valid (10 per tier) and 60 invalid (15 per kind) cases, plus mock
/// rules: two vague-latency cases whose rephrasing drops the latency clause
/// and one complex case whose rephrasing corrupts a role.
pub fn generate_eval_corpus(seed: u64, standards: &[String], cities: &[String]) -> GeneratedCorpus {
    let mut g = Generator::new(seed, standards, cities);
    let mut cases: Vec<EvalCase> = Vec::new();
    let mut seen: BTreeSet<String> = BTreeSet::new();
    let mut unique = |case: &EvalCase| seen.insert(case.user_text.clone()) && seen.insert(case.canonical.clone());

    for tier in Tier::ALL {
        let tag = match tier {
            Tier::Basic => 'B',
            Tier::Intermediate => 'I',
            Tier::Complex => 'C',
        };
        let mut i = 0;
        while i < VALID_PER_TIER {
            let intent = g.intent(tier);
            let case = EvalCase {
                id: format!("V-{tag}{:02}", i + 1),
                user_text: g.describe(&intent, None),
                canonical: render_canonical(&intent).into_inner(),
                expected: Expected::Valid(tier),
            };
            if unique(&case) {
                cases.push(case);
                i += 1;
            }
        }
    }
    for kind in CORPUS_KINDS {
        let tag = match kind {
            GrammarErrorKind::MissingSites => "MS",
            GrammarErrorKind::VagueValue => "VV",
            GrammarErrorKind::InvalidRole => "IR",
            _ => "IC",
        };
        let mut i = 0;
        while i < INVALID_PER_KIND {
            let mut intent = g.intent(Tier::ALL[i % 3]);
            let flaw = match kind {
                // rotate slots so a third of the vague cases are latency
                GrammarErrorKind::VagueValue => g.vague([Slot::Latency, Slot::Budget, Slot::Disjoint][i % 3]),
                _ => g.flaw(kind),
            };
            let canonical = g.plant(&mut intent, &flaw);
            let case = EvalCase {
                id: format!("E-{tag}{:02}", i + 1),
                user_text: g.describe(&intent, Some(&flaw)),
                canonical,
                expected: Expected::Error(kind),
            };
            if unique(&case) {
                cases.push(case);
                i += 1;
            }
        }
    }

    let mut planted_rules = Vec::new();
    let mut planted = Vec::new();
    // the rephrasing omits a vague latency clause instead of keeping the
    // vague word, so the parser never sees it
    for case in cases
        .iter()
        .filter(|c| c.expected == Expected::Error(GrammarErrorKind::VagueValue))
        .filter(|c| {
            VAGUE_WORDS
                .iter()
                .any(|w| c.canonical.contains(&format!("per path is {w} milliseconds")))
        })
        .take(2)
    {
        planted_rules.push(MockRule::exact(case.user_text.clone(), drop_latency_clause(&case.canonical)));
        planted.push(case.id.clone());
    }
    // the rephrasing of one complex request invents a role word
    let complex = cases
        .iter()
        .find(|c| c.expected == Expected::Valid(Tier::Complex))
        .expect("complex cases exist");
    let role = Role::ALL
        .iter()
        .map(|r| format!("({r})"))
        .filter_map(|r| complex.canonical.find(&r).map(|at| (at, r)))
        .min()
        .expect("complex intents have roles")
        .1;
    planted_rules.push(MockRule::exact(
        complex.user_text.clone(),
        complex.canonical.replacen(&role, "(datacenter)", 1),
    ));
    planted.push(complex.id.clone());

    let mut mock_rules = planted_rules;
    mock_rules.extend(cases.iter().map(|c| MockRule::exact(c.user_text.clone(), c.canonical.clone())));
    GeneratedCorpus {
        corpus: EvalCorpus { seed: Some(seed), cases },
        mock_rules,
        planted,
    }
}

fn drop_latency_clause(sentence: &str) -> String {
    let start = sentence.find(" Maximum acceptable latency").expect("latency clause");
    let end = sentence[start..].find(" milliseconds").expect("latency clause") + start + " milliseconds".len();
    format!("{}{}", &sentence[..start], &sentence[end..])
}

/// The rule file text for generated rules.
pub fn mock_rules_toml(rules: &[MockRule], planted: usize) -> String {
    let mut out = String::from(
        "# Mock gateway for the evaluation corpus. Generated; do not edit by hand.\n\
         # The first rules model rephrasing mistakes and shadow the faithful rules\n\
         # for the same requests further down.\n",
    );
    for (i, r) in rules.iter().enumerate() {
        if i == planted {
            out.push_str("\n# Faithful rephrasings, one per case.\n");
        }
        let file = crate::gateway::MockRuleFile { rule: vec![r.clone()] };
        out.push('\n');
        out.push_str(&toml::to_string(&file).expect("rules serialize"));
    }
    out
}
