//! TOML configuration. Every field has a default, so an empty file (or no
//! file) gives an offline setup: mock gateway, bundled data, in-memory
//! sessions.
//!
//! The API key is never read from here; `gateway.api_key_env` names the
//! environment variable that holds it.

use std::path::{Path, PathBuf};

use lightpath_core::generate::ProtectionMode;
use lightpath_core::planner::{PlannerConfig, Strategy};
use lightpath_core::retrieval::DEFAULT_TOP_K;
use serde::{Deserialize, Serialize};

#[derive(Debug, thiserror::Error)]
pub enum ConfigError {
    #[error("cannot read {path}: {source}")]
    Read {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("invalid config: {0}")]
    Parse(#[from] toml::de::Error),
    #[error("secrets are not accepted in config files: remove `{0}` and set the environment variable named by gateway.api_key_env")]
    SecretInFile(String),
    #[error("invalid config: {0}")]
    Invalid(String),
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum GatewayMode {
    #[default]
    Mock,
    Http,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GatewayConfig {
    pub mode: GatewayMode,
    /// Chat-completions URL of an OpenAI-compatible endpoint.
    pub endpoint: String,
    pub model: String,
    pub timeout_secs: u64,
    /// Must stay 0: rephrasing should be as repeatable as the endpoint allows.
    pub temperature: f64,
    pub api_key_env: String,
    /// Mock rule file; the bundled rules are used when unset.
    pub mock_rules: Option<PathBuf>,
    /// Prompt template file; the bundled templates are used when unset.
    pub prompts: Option<PathBuf>,
}

impl Default for GatewayConfig {
    fn default() -> Self {
        GatewayConfig {
            mode: GatewayMode::Mock,
            endpoint: "https://api.openai.com/v1/chat/completions".into(),
            model: "gpt-4o-mini".into(),
            timeout_secs: 30,
            temperature: 0.0,
            api_key_env: "LIGHTPATH_API_KEY".into(),
            mock_rules: None,
            prompts: None,
        }
    }
}

/// Optional overrides for the bundled data files.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DataPaths {
    /// Directory of guidance documents (`*.md`).
    pub corpus_dir: Option<PathBuf>,
    pub registry: Option<PathBuf>,
    pub prices: Option<PathBuf>,
    pub durations: Option<PathBuf>,
    pub hints: Option<PathBuf>,
    pub domain: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PlannerSettings {
    pub grounding_cap: usize,
    pub strategy: Strategy,
    pub node_limit: Option<usize>,
    pub protection: ProtectionMode,
}

impl Default for PlannerSettings {
    fn default() -> Self {
        let p = PlannerConfig::default();
        PlannerSettings {
            grounding_cap: p.grounding_cap,
            strategy: p.strategy,
            node_limit: p.node_limit,
            protection: ProtectionMode::default(),
        }
    }
}

impl PlannerSettings {
    pub fn planner_config(&self) -> PlannerConfig {
        PlannerConfig {
            grounding_cap: self.grounding_cap,
            strategy: self.strategy,
            node_limit: self.node_limit,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PipelineSettings {
    /// Run every stage after a successful parse without waiting for
    /// `advance` calls.
    pub auto_advance: bool,
    pub top_k: usize,
}

impl Default for PipelineSettings {
    fn default() -> Self {
        PipelineSettings {
            auto_advance: true,
            top_k: DEFAULT_TOP_K,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DesignSettings {
    pub acceptance_half_weeks: u32,
    pub hop_penalty_ms: f64,
}

impl Default for DesignSettings {
    fn default() -> Self {
        let t = lightpath_core::design::DesignTables::default();
        DesignSettings {
            acceptance_half_weeks: t.acceptance_half_weeks,
            hop_penalty_ms: t.hop_penalty_ms,
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct StoreSettings {
    /// Directory for session event logs; sessions live only in memory when
    /// unset.
    pub dir: Option<PathBuf>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Config {
    pub gateway: GatewayConfig,
    pub data: DataPaths,
    pub planner: PlannerSettings,
    pub pipeline: PipelineSettings,
    pub design: DesignSettings,
    pub store: StoreSettings,
}

const SECRET_KEYS: &[&str] = &["api_key", "apikey", "key", "token", "secret", "password"];

fn find_secret(value: &toml::Value, prefix: &str) -> Option<String> {
    let table = value.as_table()?;
    for (k, v) in table {
        let path = if prefix.is_empty() {
            k.clone()
        } else {
            format!("{prefix}.{k}")
        };
        if SECRET_KEYS.contains(&k.to_ascii_lowercase().as_str()) {
            return Some(path);
        }
        if let Some(found) = find_secret(v, &path) {
            return Some(found);
        }
    }
    None
}

impl Config {
    pub fn from_toml(source: &str) -> Result<Config, ConfigError> {
        let raw: toml::Value = toml::from_str(source)?;
        if let Some(key) = find_secret(&raw, "") {
            return Err(ConfigError::SecretInFile(key));
        }
        let config: Config = toml::from_str(source)?;
        config.validate()?;
        Ok(config)
    }

    /// Loads a file; relative paths inside it resolve against its directory.
    pub fn load(path: &Path) -> Result<Config, ConfigError> {
        let source = std::fs::read_to_string(path).map_err(|source| ConfigError::Read {
            path: path.to_owned(),
            source,
        })?;
        let mut config = Config::from_toml(&source)?;
        if let Some(base) = path.parent() {
            config.resolve_paths(base);
        }
        Ok(config)
    }

    fn resolve_paths(&mut self, base: &Path) {
        let fix = |p: &mut Option<PathBuf>| {
            if let Some(path) = p {
                if path.is_relative() {
                    *path = base.join(&*path);
                }
            }
        };
        fix(&mut self.gateway.mock_rules);
        fix(&mut self.gateway.prompts);
        fix(&mut self.data.corpus_dir);
        fix(&mut self.data.registry);
        fix(&mut self.data.prices);
        fix(&mut self.data.durations);
        fix(&mut self.data.hints);
        fix(&mut self.data.domain);
        fix(&mut self.store.dir);
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        let g = &self.gateway;
        if g.temperature != 0.0 {
            return Err(ConfigError::Invalid(format!(
                "gateway.temperature must be 0, got {}",
                g.temperature
            )));
        }
        if g.timeout_secs == 0 {
            return Err(ConfigError::Invalid("gateway.timeout_secs must be positive".into()));
        }
        if g.mode == GatewayMode::Http {
            if !(g.endpoint.starts_with("http://") || g.endpoint.starts_with("https://")) {
                return Err(ConfigError::Invalid(format!(
                    "gateway.endpoint must be an http(s) URL, got {:?}",
                    g.endpoint
                )));
            }
            if g.model.trim().is_empty() {
                return Err(ConfigError::Invalid("gateway.model is empty".into()));
            }
        }
        if g.api_key_env.trim().is_empty() {
            return Err(ConfigError::Invalid("gateway.api_key_env is empty".into()));
        }
        if self.pipeline.top_k == 0 {
            return Err(ConfigError::Invalid("pipeline.top_k must be positive".into()));
        }
        if self.planner.grounding_cap == 0 {
            return Err(ConfigError::Invalid("planner.grounding_cap must be positive".into()));
        }
        Ok(())
    }
}
