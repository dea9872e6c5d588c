//! Data files: guidance corpus, site registry, price and duration tables,
//! hint templates and the planning domain. Bundled copies are compiled in;
//! [`DataPaths`] entries replace them one by one.

use std::io::Read;
use std::path::{Path, PathBuf};

use lightpath_core::design::{CostCategory, DesignTables, DurationEntry, ElementKind, PriceEntry};
use lightpath_core::feasibility::SiteRegistry;
use lightpath_core::pddl::{Domain, OPTICAL_DOMAIN_PDDL};
use lightpath_core::retrieval::{parse_document, Corpus, CorpusError, GuidanceDocument};
use lightpath_core::triage::{HintTemplates, Triage};
use serde::Deserialize;

use crate::config::{Config, DataPaths, DesignSettings};
use crate::gateway::PromptTemplates;

macro_rules! bundled_docs {
    ($($name:literal),* $(,)?) => {
        &[$(($name, include_str!(concat!("../data/corpus/", $name)))),*]
    };
}

/// The shipped guidance documents, by file name.
pub const BUNDLED_DOCS: &[(&str, &str)] = bundled_docs![
    "g01-protection-1plus1.md",
    "g02-geographic-diversity.md",
    "g03-os2-long-haul.md",
    "g04-dwdm-grid.md",
    "g05-roadm-cdc.md",
    "g06-otn-framing.md",
    "g07-latency-budget.md",
    "g08-latency-routing.md",
    "g09-ethernet-clients.md",
    "g10-ring-protection.md",
    "g11-otn-protection.md",
    "g12-bend-insensitive.md",
    "g13-cost-control.md",
    "g14-cost-sharing.md",
    "g15-compliance-records.md",
    "g16-alien-wavelength.md",
    "g17-performance-monitoring.md",
    "g18-frame-replication.md",
    "g19-best-effort.md",
    "g20-hub-power.md",
    "g21-large-networks.md",
    "g22-amplification.md",
    "g23-cable-security.md",
];

pub const BUNDLED_REGISTRY: &str = include_str!("../data/registry.csv");
pub const BUNDLED_PRICES: &str = include_str!("../data/prices.csv");
pub const BUNDLED_DURATIONS: &str = include_str!("../data/durations.csv");
pub const BUNDLED_HINTS: &str = include_str!("../data/hints.toml");
pub const BUNDLED_PROMPTS: &str = include_str!("../data/prompts.toml");

#[derive(Debug, thiserror::Error)]
pub enum DataError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("{file}: {message}")]
    Format { file: String, message: String },
    #[error("guidance corpus: {0}")]
    Corpus(CorpusError),
}

fn format_err(file: &str, message: impl ToString) -> DataError {
    DataError::Format {
        file: file.to_owned(),
        message: message.to_string(),
    }
}

fn read(path: &Path) -> Result<String, DataError> {
    std::fs::read_to_string(path).map_err(|source| DataError::Io {
        path: path.to_owned(),
        source,
    })
}

pub fn parse_corpus<'a>(files: impl IntoIterator<Item = (&'a str, &'a str)>) -> Result<Corpus, DataError> {
    let docs = files
        .into_iter()
        .map(|(name, text)| parse_document(text).map_err(|e| format_err(name, e)))
        .collect::<Result<Vec<GuidanceDocument>, _>>()?;
    Corpus::new(docs).map_err(DataError::Corpus)
}

/// Reads every `*.md` file in `dir`, in file-name order.
pub fn load_corpus_dir(dir: &Path) -> Result<Corpus, DataError> {
    let io = |source| DataError::Io {
        path: dir.to_owned(),
        source,
    };
    let mut paths: Vec<PathBuf> = std::fs::read_dir(dir)
        .map_err(io)?
        .map(|e| e.map(|e| e.path()))
        .collect::<Result<_, _>>()
        .map_err(io)?;
    paths.retain(|p| p.extension().is_some_and(|e| e == "md"));
    paths.sort();
    let texts = paths
        .iter()
        .map(|p| Ok((p.display().to_string(), read(p)?)))
        .collect::<Result<Vec<_>, DataError>>()?;
    parse_corpus(texts.iter().map(|(n, t)| (n.as_str(), t.as_str())))
}

#[derive(Deserialize)]
struct RegistryRow {
    identifier: String,
    latitude: f64,
    longitude: f64,
}

/// `identifier,latitude,longitude` with a header row.
pub fn parse_registry<R: Read>(source: R, file: &str) -> Result<SiteRegistry, DataError> {
    let mut registry = SiteRegistry::new();
    let mut reader = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(source);
    for (i, row) in reader.deserialize::<RegistryRow>().enumerate() {
        let row = row.map_err(|e| format_err(file, e))?;
        registry
            .insert(&row.identifier, row.latitude, row.longitude)
            .map_err(|e| format_err(file, format!("row {}: {e}", i + 2)))?;
    }
    Ok(registry)
}

#[derive(Deserialize)]
struct PriceRow {
    action: String,
    element: String,
    item_class: String,
    model: String,
    category: String,
    unit_cost: u64,
}

pub fn parse_prices<R: Read>(source: R, file: &str) -> Result<Vec<PriceEntry>, DataError> {
    let mut reader = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(source);
    let mut out: Vec<PriceEntry> = Vec::new();
    for row in reader.deserialize::<PriceRow>() {
        let row = row.map_err(|e| format_err(file, e))?;
        let element = ElementKind::from_name(&row.element)
            .ok_or_else(|| format_err(file, format!("unknown element kind {:?}", row.element)))?;
        let category = CostCategory::from_name(&row.category)
            .ok_or_else(|| format_err(file, format!("unknown cost category {:?}", row.category)))?;
        if out.iter().any(|p| p.action == row.action) {
            return Err(format_err(file, format!("duplicate action {}", row.action)));
        }
        out.push(PriceEntry {
            action: row.action,
            element,
            item_class: row.item_class,
            model: row.model,
            category,
            unit_cost: row.unit_cost,
        });
    }
    Ok(out)
}

pub fn parse_durations<R: Read>(source: R, file: &str) -> Result<Vec<DurationEntry>, DataError> {
    let mut reader = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(source);
    let mut out: Vec<DurationEntry> = Vec::new();
    for row in reader.deserialize::<DurationEntry>() {
        let row = row.map_err(|e| format_err(file, e))?;
        if out.iter().any(|d| d.action == row.action) {
            return Err(format_err(file, format!("duplicate action {}", row.action)));
        }
        out.push(row);
    }
    Ok(out)
}

/// Everything the pipeline reads but never writes.
pub struct Resources {
    pub corpus: Corpus,
    /// Compliance allowlist: the standards the corpus documents.
    pub standards: Vec<String>,
    pub registry: SiteRegistry,
    pub tables: DesignTables,
    pub hints: HintTemplates,
    pub prompts: PromptTemplates,
    pub domain: Domain,
}

impl Resources {
    /// The compiled-in data set.
    pub fn bundled() -> Resources {
        Resources::load(&DataPaths::default(), None, &DesignSettings::default())
            .expect("bundled data is valid")
    }

    pub fn from_config(config: &Config) -> Result<Resources, DataError> {
        Resources::load(&config.data, config.gateway.prompts.as_deref(), &config.design)
    }

    pub fn load(
        paths: &DataPaths,
        prompts: Option<&Path>,
        design: &DesignSettings,
    ) -> Result<Resources, DataError> {
        let corpus = match &paths.corpus_dir {
            Some(dir) => load_corpus_dir(dir)?,
            None => parse_corpus(BUNDLED_DOCS.iter().copied())?,
        };
        let text = |p: &Option<PathBuf>, bundled: &str| -> Result<(String, String), DataError> {
            match p {
                Some(path) => Ok((read(path)?, path.display().to_string())),
                None => Ok((bundled.to_owned(), "bundled".to_owned())),
            }
        };
        let (src, name) = text(&paths.registry, BUNDLED_REGISTRY)?;
        let registry = parse_registry(src.as_bytes(), &name)?;
        let (src, name) = text(&paths.prices, BUNDLED_PRICES)?;
        let prices = parse_prices(src.as_bytes(), &name)?;
        let (src, name) = text(&paths.durations, BUNDLED_DURATIONS)?;
        let durations = parse_durations(src.as_bytes(), &name)?;
        let (src, name) = text(&paths.hints, BUNDLED_HINTS)?;
        let hints: HintTemplates = toml::from_str(&src).map_err(|e| format_err(&name, e))?;
        let (src, name) = text(&prompts.map(Path::to_owned), BUNDLED_PROMPTS)?;
        let prompts = PromptTemplates::from_toml(&src).map_err(|e| format_err(&name, e))?;
        let (src, name) = text(&paths.domain, OPTICAL_DOMAIN_PDDL)?;
        let domain = Domain::parse(&src).map_err(|e| format_err(&name, e))?;

        for action in &domain.actions {
            match prices.iter().find(|p| p.action == action.name) {
                Some(p) if p.unit_cost == action.cost => {}
                Some(p) => {
                    return Err(format_err(
                        "price table",
                        format!(
                            "{} costs {} in the price table but {} in the planning domain",
                            action.name, p.unit_cost, action.cost
                        ),
                    ))
                }
                None => {
                    return Err(format_err("price table", format!("no price for action {}", action.name)))
                }
            }
        }

        let standards = corpus.allowlist_standards();
        Ok(Resources {
            corpus,
            standards,
            registry,
            tables: DesignTables {
                prices,
                durations,
                acceptance_half_weeks: design.acceptance_half_weeks,
                hop_penalty_ms: design.hop_penalty_ms,
            },
            hints,
            prompts,
            domain,
        })
    }

    pub fn triage(&self) -> Triage {
        Triage::new(self.hints.clone(), self.standards.clone())
    }

    pub fn parser(&self) -> lightpath_core::IntentParser {
        lightpath_core::IntentParser::new(self.standards.clone())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bundled_tables_match_the_defaults() {
        let r = Resources::bundled();
        assert_eq!(r.tables, DesignTables::default());
        assert_eq!(r.hints, HintTemplates::default());
    }

    #[test]
    fn bundled_corpus() {
        let r = Resources::bundled();
        assert!(r.corpus.len() >= 20);
        for s in ["ITU-T-G.652", "ITU-T-G.694.1", "ITU-T-G.709", "ITU-T-G.8031", "IEEE-802.3"] {
            assert!(r.standards.iter().any(|x| x == s), "{s} missing from allowlist");
        }
        assert!(!r.standards.iter().any(|s| s == "GDPR"));
    }

    #[test]
    fn bundled_registry_has_us_and_eu_cities() {
        let r = Resources::bundled();
        let ny = r.registry.get("new york").unwrap();
        assert_eq!((ny.lat, ny.lon), (40.7128, -74.0060));
        assert!(r.registry.get("Los Angeles").is_some());
        assert!(r.registry.get("Frankfurt").is_some());
        assert!(r.registry.len() >= 20);
    }

    #[test]
    fn registry_errors_name_the_row() {
        let bad = "identifier,latitude,longitude\nA,1,2\nB,95,0\n";
        let err = parse_registry(bad.as_bytes(), "sites.csv").unwrap_err().to_string();
        assert!(err.contains("sites.csv") && err.contains("row 3"), "{err}");
        let dup = "identifier,latitude,longitude\nA,1,2\na,3,4\n";
        assert!(parse_registry(dup.as_bytes(), "x").is_err());
    }

    #[test]
    fn price_rows_are_checked() {
        let bad = "action,element,item_class,model,category,unit_cost\nx,pipe,a,b,equipment,1\n";
        assert!(parse_prices(bad.as_bytes(), "p").unwrap_err().to_string().contains("element"));
        let bad = "action,element,item_class,model,category,unit_cost\nx,bom,a,b,snacks,1\n";
        assert!(parse_prices(bad.as_bytes(), "p").unwrap_err().to_string().contains("category"));
    }

    #[test]
    fn price_table_must_agree_with_domain() {
        let dir = tempfile::tempdir().unwrap();
        let prices = dir.path().join("prices.csv");
        std::fs::write(&prices, BUNDLED_PRICES.replace("130000", "131000")).unwrap();
        let paths = DataPaths {
            prices: Some(prices),
            ..DataPaths::default()
        };
        let err = Resources::load(&paths, None, &DesignSettings::default()).err().unwrap();
        assert!(err.to_string().contains("install-roadm"), "{err}");
    }

    #[test]
    fn corpus_directory_override() {
        let dir = tempfile::tempdir().unwrap();
        std::fs::write(
            dir.path().join("a.md"),
            "---\nid: a\nstandard: ITU-T-G.652\ntopic_tags: fiber\n---\nUse OS2.\n",
        )
        .unwrap();
        std::fs::write(dir.path().join("notes.txt"), "ignored").unwrap();
        let corpus = load_corpus_dir(dir.path()).unwrap();
        assert_eq!(corpus.len(), 1);
    }
}
