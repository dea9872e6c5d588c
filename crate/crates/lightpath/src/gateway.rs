//! Rephrasing gateway: an OpenAI-compatible chat-completions client and a
//! rule-table mock with the same interface.

use std::time::Duration;

use lightpath_core::grammar::grammar_text;
use lightpath_core::IntentSentence;
use serde::{Deserialize, Serialize};

use crate::config::{GatewayConfig, GatewayMode};

pub const BUNDLED_MOCK_RULES: &str = include_str!("../data/mock_rules.toml");

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RephraseRequest {
    pub user_text: String,
    pub grammar: String,
    pub correction_hint: Option<String>,
    /// 0 for the first call, then 1..=MAX_RETRIES.
    pub attempt: u32,
}

impl RephraseRequest {
    pub fn new(user_text: impl Into<String>) -> Self {
        RephraseRequest {
            user_text: user_text.into(),
            grammar: grammar_text().to_owned(),
            correction_hint: None,
            attempt: 0,
        }
    }

    pub fn retry(&self, hint: impl Into<String>) -> Self {
        RephraseRequest {
            correction_hint: Some(hint.into()),
            attempt: self.attempt + 1,
            ..self.clone()
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum GatewayError {
    #[error("transport error: {0}")]
    Transport(String),
    #[error("endpoint returned HTTP {status}: {body}")]
    Status { status: u16, body: String },
    #[error("unusable completion: {0}")]
    BadResponse(String),
    #[error("no mock rule matches {0:?}")]
    NoMockRule(String),
    #[error("gateway configuration: {0}")]
    Config(String),
}

impl GatewayError {
    /// Network-side failures, as opposed to setup mistakes.
    pub fn is_transport(&self) -> bool {
        matches!(
            self,
            GatewayError::Transport(_) | GatewayError::Status { .. } | GatewayError::BadResponse(_)
        )
    }
}

/// Turns free-form text into a candidate grammar sentence. Implementations
/// hold no per-session state.
pub trait Rephraser: Send + Sync {
    fn rephrase(&self, request: &RephraseRequest) -> Result<IntentSentence, GatewayError>;

    /// Short label for logs and health output.
    fn describe(&self) -> String;
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Matcher {
    Exact,
    Substring,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MockRule {
    #[serde(rename = "match")]
    pub matcher: Matcher,
    pub pattern: String,
    pub response: String,
    /// Restricts the rule to one attempt number.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub attempt: Option<u32>,
}

impl MockRule {
    pub fn exact(pattern: impl Into<String>, response: impl Into<String>) -> Self {
        MockRule {
            matcher: Matcher::Exact,
            pattern: pattern.into(),
            response: response.into(),
            attempt: None,
        }
    }

    pub fn matches(&self, request: &RephraseRequest) -> bool {
        if self.attempt.is_some_and(|a| a != request.attempt) {
            return false;
        }
        match self.matcher {
            Matcher::Exact => request.user_text.trim() == self.pattern.trim(),
            Matcher::Substring => request.user_text.contains(&self.pattern),
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct MockRuleFile {
    #[serde(default)]
    pub rule: Vec<MockRule>,
}

/// Ordered rule table; the first matching rule answers.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MockGateway {
    rules: Vec<MockRule>,
}

impl MockGateway {
    pub fn new(rules: Vec<MockRule>) -> Self {
        MockGateway { rules }
    }

    pub fn from_toml(source: &str) -> Result<Self, GatewayError> {
        let file: MockRuleFile =
            toml::from_str(source).map_err(|e| GatewayError::Config(format!("mock rules: {e}")))?;
        Ok(MockGateway::new(file.rule))
    }

    /// Rules for the three worked cases and the retry paths.
    pub fn bundled() -> Self {
        MockGateway::from_toml(BUNDLED_MOCK_RULES).expect("bundled mock rules parse")
    }

    pub fn rules(&self) -> &[MockRule] {
        &self.rules
    }

    /// A new gateway answering from `self` first, then from `other`.
    pub fn chain(mut self, other: MockGateway) -> Self {
        self.rules.extend(other.rules);
        self
    }
}

impl Rephraser for MockGateway {
    fn rephrase(&self, request: &RephraseRequest) -> Result<IntentSentence, GatewayError> {
        let rule = self
            .rules
            .iter()
            .find(|r| r.matches(request))
            .ok_or_else(|| GatewayError::NoMockRule(request.user_text.clone()))?;
        IntentSentence::new(rule.response.clone())
            .ok_or_else(|| GatewayError::BadResponse("mock rule has an empty response".into()))
    }

    fn describe(&self) -> String {
        format!("mock ({} rules)", self.rules.len())
    }
}

/// Returns the user text unchanged: the parser sees exactly what was typed.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct Passthrough;

impl Rephraser for Passthrough {
    fn rephrase(&self, request: &RephraseRequest) -> Result<IntentSentence, GatewayError> {
        IntentSentence::new(request.user_text.clone())
            .ok_or_else(|| GatewayError::BadResponse("empty intent text".into()))
    }

    fn describe(&self) -> String {
        "passthrough".into()
    }
}

/// Prompt wording, kept in a versioned data file. Slots: `{grammar}` in the
/// system message; `{user_text}`, `{hint}`, `{attempt}` in the user messages.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PromptTemplates {
    pub version: u32,
    pub system: String,
    pub user: String,
    pub retry: String,
}

impl PromptTemplates {
    pub fn from_toml(source: &str) -> Result<Self, toml::de::Error> {
        toml::from_str(source)
    }

    pub fn messages(&self, request: &RephraseRequest) -> Vec<ChatMessage> {
        let system = self.system.replace("{grammar}", &request.grammar);
        let user = match &request.correction_hint {
            None => self.user.replace("{user_text}", &request.user_text),
            Some(hint) => self
                .retry
                .replace("{user_text}", &request.user_text)
                .replace("{hint}", hint)
                .replace("{attempt}", &request.attempt.to_string()),
        };
        vec![
            ChatMessage {
                role: "system".into(),
                content: system.trim().to_owned(),
            },
            ChatMessage {
                role: "user".into(),
                content: user.trim().to_owned(),
            },
        ]
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ChatMessage {
    pub role: String,
    pub content: String,
}

#[derive(Debug, Serialize)]
struct ChatRequest<'a> {
    model: &'a str,
    messages: Vec<ChatMessage>,
    temperature: f64,
}

#[derive(Debug, Deserialize)]
struct ChatResponse {
    choices: Vec<Choice>,
}

#[derive(Debug, Deserialize)]
struct Choice {
    message: ChoiceMessage,
}

#[derive(Debug, Deserialize)]
struct ChoiceMessage {
    content: Option<String>,
}

/// Blocking chat-completions client.
pub struct HttpGateway {
    agent: ureq::Agent,
    endpoint: String,
    model: String,
    temperature: f64,
    api_key: Option<String>,
    prompts: PromptTemplates,
}

impl HttpGateway {
    pub fn new(config: &GatewayConfig, prompts: PromptTemplates, api_key: Option<String>) -> Self {
        let agent: ureq::Agent = ureq::Agent::config_builder()
            .timeout_global(Some(Duration::from_secs(config.timeout_secs)))
            .http_status_as_error(false)
            .build()
            .into();
        HttpGateway {
            agent,
            endpoint: config.endpoint.clone(),
            model: config.model.clone(),
            temperature: config.temperature,
            api_key: api_key.filter(|k| !k.is_empty()),
            prompts,
        }
    }

    /// Reads the key from the environment variable named in the config.
    pub fn from_env(config: &GatewayConfig, prompts: PromptTemplates) -> Self {
        let key = std::env::var(&config.api_key_env).ok();
        HttpGateway::new(config, prompts, key)
    }
}

impl Rephraser for HttpGateway {
    fn rephrase(&self, request: &RephraseRequest) -> Result<IntentSentence, GatewayError> {
        let body = ChatRequest {
            model: &self.model,
            messages: self.prompts.messages(request),
            temperature: self.temperature,
        };
        let mut call = self.agent.post(&self.endpoint);
        if let Some(key) = &self.api_key {
            call = call.header("Authorization", &format!("Bearer {key}"));
        }
        let mut response = call
            .send_json(&body)
            .map_err(|e| GatewayError::Transport(e.to_string()))?;
        let status = response.status().as_u16();
        if !(200..300).contains(&status) {
            let text = response.body_mut().read_to_string().unwrap_or_default();
            let body: String = text.chars().take(500).collect();
            return Err(GatewayError::Status { status, body });
        }
        let parsed: ChatResponse = response.body_mut().read_json().map_err(|e| match e {
            ureq::Error::Json(j) => GatewayError::BadResponse(j.to_string()),
            other => GatewayError::Transport(other.to_string()),
        })?;
        let content = parsed
            .choices
            .into_iter()
            .next()
            .and_then(|c| c.message.content)
            .ok_or_else(|| GatewayError::BadResponse("no choices in completion".into()))?;
        IntentSentence::new(content).ok_or_else(|| GatewayError::BadResponse("empty completion".into()))
    }

    fn describe(&self) -> String {
        format!("http {} ({})", self.endpoint, self.model)
    }
}

/// Builds the configured gateway.
pub fn from_config(config: &GatewayConfig, prompts: &PromptTemplates) -> Result<Box<dyn Rephraser>, GatewayError> {
    match config.mode {
        GatewayMode::Http => Ok(Box::new(HttpGateway::from_env(config, prompts.clone()))),
        GatewayMode::Mock => match &config.mock_rules {
            Some(path) => {
                let source = std::fs::read_to_string(path)
                    .map_err(|e| GatewayError::Config(format!("{}: {e}", path.display())))?;
                Ok(Box::new(MockGateway::from_toml(&source)?))
            }
            None => Ok(Box::new(MockGateway::bundled())),
        },
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn req(text: &str) -> RephraseRequest {
        RephraseRequest::new(text)
    }

    #[test]
    fn first_match_wins() {
        let gw = MockGateway::new(vec![
            MockRule {
                matcher: Matcher::Substring,
                pattern: "latency".into(),
                response: "first".into(),
                attempt: None,
            },
            MockRule::exact("low latency please", "second"),
        ]);
        assert_eq!(gw.rephrase(&req("low latency please")).unwrap().as_str(), "first");
    }

    #[test]
    fn exact_ignores_surrounding_whitespace_only() {
        let gw = MockGateway::new(vec![MockRule::exact("abc", "x")]);
        assert!(gw.rephrase(&req("  abc\n")).is_ok());
        assert!(gw.rephrase(&req("abcd")).is_err());
    }

    #[test]
    fn miss_is_an_explicit_error() {
        let gw = MockGateway::new(vec![]);
        let err = gw.rephrase(&req("hello")).unwrap_err();
        assert_eq!(err, GatewayError::NoMockRule("hello".into()));
        assert!(!err.is_transport());
        assert!(err.to_string().contains("no mock rule"));
    }

    #[test]
    fn attempt_scoped_rules() {
        let gw = MockGateway::from_toml(
            r#"
            [[rule]]
            match = "exact"
            pattern = "x"
            response = "bad"
            attempt = 0

            [[rule]]
            match = "exact"
            pattern = "x"
            response = "good"
            "#,
        )
        .unwrap();
        let first = req("x");
        assert_eq!(gw.rephrase(&first).unwrap().as_str(), "bad");
        assert_eq!(gw.rephrase(&first.retry("hint")).unwrap().as_str(), "good");
    }

    #[test]
    fn deterministic() {
        let gw = MockGateway::bundled();
        let r = req("Build optical network with ROADM equipment and regulatory compliance");
        let a = gw.rephrase(&r).unwrap();
        for _ in 0..10 {
            assert_eq!(gw.rephrase(&r).unwrap(), a);
        }
    }

    #[test]
    fn request_carries_the_grammar() {
        let r = req("x");
        assert_eq!(r.grammar, grammar_text());
        let retry = r.retry("fix it");
        assert_eq!((retry.attempt, retry.correction_hint.as_deref()), (1, Some("fix it")));
        assert_eq!(retry.retry("again").attempt, 2);
    }

    #[test]
    fn prompt_messages() {
        let p = PromptTemplates::from_toml(crate::data::BUNDLED_PROMPTS).unwrap();
        let m = p.messages(&req("connect A and B"));
        assert_eq!(m[0].role, "system");
        assert!(m[0].content.contains(grammar_text().trim()));
        assert_eq!(m[1].content, "connect A and B");
        let m = p.messages(&req("connect A and B").retry("use $"));
        assert!(m[1].content.contains("connect A and B"));
        assert!(m[1].content.contains("use $"));
        assert!(m[1].content.contains("attempt 1"));
    }

    #[test]
    fn bad_rule_file_is_a_config_error() {
        let err = MockGateway::from_toml("[[rule]]\nmatch = \"regex\"\npattern = \"a\"\nresponse = \"b\"\n").unwrap_err();
        assert!(matches!(err, GatewayError::Config(_)));
    }
}
