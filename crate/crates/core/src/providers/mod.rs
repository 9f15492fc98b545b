//! External capabilities behind fixed interfaces: perplexity scoring,
//! sentence embedding, grammar checking and chat feedback.
//!
//! Each capability has a deterministic local default (except chat) and a
//! plain HTTP+JSON remote client. Remote responses are cached on disk, keyed
//! by request content, so a primed cache reproduces a run with no network.

mod cache;
pub mod http;
mod local;
mod remote;

use std::fmt;
use std::path::PathBuf;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::corpus::Language;
use crate::error::{Error, Result};

pub use cache::{canonical_json, CacheEntry, ResponseCache, CACHE_DIR_ENV};
pub use http::{Clock, FakeClock, HttpRequest, HttpResponse, RequestBody, SystemClock, Transport, UreqTransport};
pub use local::{DictionaryChecker, HashedEmbedder, UniformScorer, DEFAULT_EMBEDDING_DIM};
pub use remote::{
    chat_language_tag, RemoteChat, RemoteClient, RemoteEmbedder, RemoteGrammar, RemotePerplexity, RequestStats,
};

pub const CHAT_TOKEN_ENV: &str = "VERIDICT_CHAT_TOKEN";

pub trait PerplexityProvider: Send + Sync {
    /// One perplexity (> 0) per input sentence.
    fn score_perplexity(&self, sentences: &[String], language: Language) -> Result<Vec<f64>>;
}

pub trait EmbeddingProvider: Send + Sync {
    /// One vector per sentence; all vectors share a width.
    fn embed_sentences(&self, sentences: &[String], language: Language) -> Result<Vec<Vec<f64>>>;
}

pub trait GrammarProvider: Send + Sync {
    fn check_grammar(&self, text: &str, language: Language) -> Result<usize>;
}

pub trait ChatFeedbackProvider: Send + Sync {
    fn ask_chat(&self, prompt: &str, body: &str, language: Language) -> Result<String>;
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ProviderKind {
    Perplexity,
    Embedding,
    Grammar,
    Chat,
}

impl ProviderKind {
    pub fn name(self) -> &'static str {
        match self {
            ProviderKind::Perplexity => "perplexity",
            ProviderKind::Embedding => "embedding",
            ProviderKind::Grammar => "grammar",
            ProviderKind::Chat => "chat",
        }
    }
}

impl fmt::Display for ProviderKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ProviderMode {
    Local,
    Remote,
    Disabled,
}

fn default_timeout_ms() -> u64 {
    30_000
}

fn default_max_retries() -> u32 {
    3
}

fn default_rate_limit() -> u32 {
    60
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProviderConfig {
    pub kind: ProviderKind,
    pub mode: ProviderMode,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub endpoint: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub auth_token_env: Option<String>,
    #[serde(default = "default_timeout_ms")]
    pub timeout_ms: u64,
    #[serde(default = "default_max_retries")]
    pub max_retries: u32,
    #[serde(default = "default_rate_limit")]
    pub rate_limit_per_min: u32,
    /// Model name sent in chat requests.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub model: Option<String>,
}

impl ProviderConfig {
    pub fn local(kind: ProviderKind) -> Self {
        ProviderConfig {
            kind,
            mode: ProviderMode::Local,
            endpoint: None,
            auth_token_env: None,
            timeout_ms: default_timeout_ms(),
            max_retries: default_max_retries(),
            rate_limit_per_min: default_rate_limit(),
            model: None,
        }
    }

    pub fn remote(kind: ProviderKind, endpoint: &str) -> Self {
        ProviderConfig {
            mode: ProviderMode::Remote,
            endpoint: Some(endpoint.to_string()),
            ..ProviderConfig::local(kind)
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.timeout_ms == 0 {
            return Err(Error::Config(format!("{} provider: timeout_ms must be > 0", self.kind)));
        }
        match self.mode {
            ProviderMode::Remote if self.endpoint.as_deref().is_none_or(str::is_empty) => Err(Error::Config(
                format!("{} provider: remote mode requires an endpoint", self.kind),
            )),
            ProviderMode::Local if self.kind == ProviderKind::Chat => Err(Error::Config(
                "chat provider has no local implementation; use remote or disabled".into(),
            )),
            _ => Ok(()),
        }
    }

    pub fn token_env(&self) -> &str {
        self.auth_token_env.as_deref().unwrap_or(CHAT_TOKEN_ENV)
    }
}

/// Provider section of a run configuration. Absent entries fall back to the
/// local default (chat: disabled).
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProvidersConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub perplexity: Option<ProviderConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub embedding: Option<ProviderConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub grammar: Option<ProviderConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub chat: Option<ProviderConfig>,
    /// Overrides `$VERIDICT_CACHE_DIR`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cache_dir: Option<PathBuf>,
}

/// Where perplexities come from for a run.
#[derive(Clone)]
pub enum PerplexitySource {
    /// The bigram LM fitted on each split's training documents.
    LocalLm,
    Provider(Arc<dyn PerplexityProvider>),
    Disabled,
}

/// The resolved providers of one run.
#[derive(Clone)]
pub struct ProviderSet {
    pub perplexity: PerplexitySource,
    pub embedding: Option<Arc<dyn EmbeddingProvider>>,
    pub grammar: Option<Arc<dyn GrammarProvider>>,
    pub chat: Option<Arc<dyn ChatFeedbackProvider>>,
    /// Human-readable mode per kind, for reports and run manifests.
    pub modes: Vec<(ProviderKind, String)>,
}

impl fmt::Debug for ProviderSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ProviderSet").field("modes", &self.modes).finish()
    }
}

impl Default for ProviderSet {
    fn default() -> Self {
        ProviderSet::local()
    }
}

impl ProviderSet {
    /// Local defaults everywhere, chat disabled.
    pub fn local() -> Self {
        ProviderSet {
            perplexity: PerplexitySource::LocalLm,
            embedding: Some(Arc::new(HashedEmbedder::default())),
            grammar: Some(Arc::new(DictionaryChecker)),
            chat: None,
            modes: vec![
                (ProviderKind::Perplexity, "local".into()),
                (ProviderKind::Embedding, "local".into()),
                (ProviderKind::Grammar, "local".into()),
                (ProviderKind::Chat, "disabled".into()),
            ],
        }
    }

    pub fn from_config(config: &ProvidersConfig) -> Result<Self> {
        Self::from_config_with(config, Arc::new(UreqTransport), Arc::new(SystemClock::default()))
    }

    pub fn from_config_with(
        config: &ProvidersConfig,
        transport: Arc<dyn Transport>,
        clock: Arc<dyn Clock>,
    ) -> Result<Self> {
        let cache = config
            .cache_dir
            .clone()
            .map(ResponseCache::new)
            .or_else(ResponseCache::from_env)
            .map(Arc::new);
        let resolve = |slot: &Option<ProviderConfig>, kind: ProviderKind| -> Result<ProviderConfig> {
            let cfg = match slot {
                Some(c) => c.clone(),
                None if kind == ProviderKind::Chat => ProviderConfig {
                    mode: ProviderMode::Disabled,
                    ..ProviderConfig::local(kind)
                },
                None => ProviderConfig::local(kind),
            };
            if cfg.kind != kind {
                return Err(Error::Config(format!(
                    "provider entry {kind} declares kind {}",
                    cfg.kind
                )));
            }
            cfg.validate()?;
            Ok(cfg)
        };
        let client = |cfg: &ProviderConfig| {
            RemoteClient::new(cfg.clone(), transport.clone(), clock.clone(), cache.clone())
        };

        let mut modes = Vec::new();
        let mut mode_label = |cfg: &ProviderConfig| {
            let label = match cfg.mode {
                ProviderMode::Local => "local".to_string(),
                ProviderMode::Disabled => "disabled".to_string(),
                ProviderMode::Remote => format!("remote:{}", cfg.endpoint.as_deref().unwrap_or_default()),
            };
            modes.push((cfg.kind, label));
        };

        let ppl = resolve(&config.perplexity, ProviderKind::Perplexity)?;
        mode_label(&ppl);
        let perplexity = match ppl.mode {
            ProviderMode::Local => PerplexitySource::LocalLm,
            ProviderMode::Remote => PerplexitySource::Provider(Arc::new(RemotePerplexity::new(client(&ppl)))),
            ProviderMode::Disabled => PerplexitySource::Disabled,
        };

        let emb = resolve(&config.embedding, ProviderKind::Embedding)?;
        mode_label(&emb);
        let embedding: Option<Arc<dyn EmbeddingProvider>> = match emb.mode {
            ProviderMode::Local => Some(Arc::new(HashedEmbedder::default())),
            ProviderMode::Remote => Some(Arc::new(RemoteEmbedder::new(client(&emb)))),
            ProviderMode::Disabled => None,
        };

        let gram = resolve(&config.grammar, ProviderKind::Grammar)?;
        mode_label(&gram);
        let grammar: Option<Arc<dyn GrammarProvider>> = match gram.mode {
            ProviderMode::Local => Some(Arc::new(DictionaryChecker)),
            ProviderMode::Remote => Some(Arc::new(RemoteGrammar::new(client(&gram)))),
            ProviderMode::Disabled => None,
        };

        let chat_cfg = resolve(&config.chat, ProviderKind::Chat)?;
        mode_label(&chat_cfg);
        let chat: Option<Arc<dyn ChatFeedbackProvider>> = match chat_cfg.mode {
            ProviderMode::Remote => Some(Arc::new(RemoteChat::new(client(&chat_cfg)))),
            _ => None,
        };

        Ok(ProviderSet {
            perplexity,
            embedding,
            grammar,
            chat,
            modes,
        })
    }

    pub fn is_available(&self, kind: ProviderKind) -> bool {
        match kind {
            ProviderKind::Perplexity => !matches!(self.perplexity, PerplexitySource::Disabled),
            ProviderKind::Embedding => self.embedding.is_some(),
            ProviderKind::Grammar => self.grammar.is_some(),
            ProviderKind::Chat => self.chat.is_some(),
        }
    }

    pub fn mode_of(&self, kind: ProviderKind) -> &str {
        self.modes
            .iter()
            .find(|(k, _)| *k == kind)
            .map(|(_, m)| m.as_str())
            .unwrap_or("disabled")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn config_validation() {
        let mut cfg = ProviderConfig::remote(ProviderKind::Grammar, "");
        assert!(cfg.validate().is_err());
        cfg.endpoint = Some("http://localhost:8081".into());
        assert!(cfg.validate().is_ok());
        cfg.timeout_ms = 0;
        assert!(cfg.validate().is_err());
        assert!(ProviderConfig::local(ProviderKind::Chat).validate().is_err());
    }

    #[test]
    fn config_json_defaults() {
        let cfg: ProviderConfig =
            serde_json::from_str(r#"{"kind":"embedding","mode":"remote","endpoint":"http://x"}"#).unwrap();
        assert_eq!(cfg.timeout_ms, 30_000);
        assert_eq!(cfg.max_retries, 3);
        assert!(serde_json::from_str::<ProviderConfig>(r#"{"kind":"embedding","mode":"remote","bogus":1}"#).is_err());
    }

    #[test]
    fn default_set_has_no_chat() {
        let set = ProviderSet::from_config(&ProvidersConfig::default()).unwrap();
        assert!(!set.is_available(ProviderKind::Chat));
        assert!(set.is_available(ProviderKind::Perplexity));
        assert_eq!(set.mode_of(ProviderKind::Grammar), "local");
        assert_eq!(set.mode_of(ProviderKind::Chat), "disabled");
    }

    #[test]
    fn kind_mismatch_is_rejected() {
        let config = ProvidersConfig {
            grammar: Some(ProviderConfig::local(ProviderKind::Embedding)),
            ..Default::default()
        };
        assert!(ProviderSet::from_config(&config).is_err());
    }
}
