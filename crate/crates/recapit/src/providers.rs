//! Embedding and title providers.
//!
//! Remote providers are plain JSON-over-HTTP endpoints configured through
//! `RECAPIT_EMBED_URL`, `RECAPIT_TITLE_URL` and `RECAPIT_API_KEY`. When a URL
//! is unset the offline fallback is used instead.
//!
//! Embedding endpoint: request `{"id": "...", "text": "..."}`, response `{"vector": [...]}`.
//! Title endpoint: request `{"dialogue": "..."}`, response `{"title": "..."}`.

use std::collections::BTreeMap;
use std::time::Duration;

use recapit_core::cards::TitleProvider;
use recapit_core::segmentation::{EmbeddingProvider, HashedBagOfWords, ProviderError};
use serde::{Deserialize, Serialize};

pub const EMBED_URL_VAR: &str = "RECAPIT_EMBED_URL";
pub const TITLE_URL_VAR: &str = "RECAPIT_TITLE_URL";
pub const API_KEY_VAR: &str = "RECAPIT_API_KEY";

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ProviderConfig {
    pub embed_url: Option<String>,
    pub title_url: Option<String>,
    pub api_key: Option<String>,
}

impl ProviderConfig {
    pub fn from_env() -> Self {
        let var = |name| std::env::var(name).ok().filter(|v: &String| !v.trim().is_empty());
        Self {
            embed_url: var(EMBED_URL_VAR),
            title_url: var(TITLE_URL_VAR),
            api_key: var(API_KEY_VAR),
        }
    }

    /// Configuration that never touches the network.
    pub fn offline() -> Self {
        Self::default()
    }
}

#[derive(Debug, Clone)]
struct Endpoint {
    url: String,
    api_key: Option<String>,
    agent: ureq::Agent,
}

impl Endpoint {
    fn new(url: String, api_key: Option<String>) -> Self {
        let agent = ureq::Agent::config_builder()
            .timeout_global(Some(Duration::from_secs(60)))
            .build()
            .into();
        Self { url, api_key, agent }
    }

    fn call<Req: Serialize, Resp: for<'de> Deserialize<'de>>(&self, body: &Req) -> Result<Resp, ProviderError> {
        let mut req = self.agent.post(&self.url);
        if let Some(key) = &self.api_key {
            req = req.header("Authorization", &format!("Bearer {key}"));
        }
        let mut resp = req
            .send_json(body)
            .map_err(|e| ProviderError(format!("{}: {e}", self.url)))?;
        resp.body_mut()
            .read_json()
            .map_err(|e| ProviderError(format!("{}: bad response: {e}", self.url)))
    }
}

#[derive(Debug, Clone)]
pub struct HttpEmbedder(Endpoint);

impl HttpEmbedder {
    pub fn new(url: String, api_key: Option<String>) -> Self {
        Self(Endpoint::new(url, api_key))
    }
}

#[derive(Serialize)]
struct EmbedRequest<'a> {
    id: &'a str,
    text: &'a str,
}

#[derive(Deserialize)]
struct EmbedResponse {
    vector: Vec<f64>,
}

impl EmbeddingProvider for HttpEmbedder {
    fn embed(&self, chunk_id: &str, text: &str) -> Result<Vec<f64>, ProviderError> {
        let r: EmbedResponse = self.0.call(&EmbedRequest { id: chunk_id, text })?;
        Ok(r.vector)
    }
}

#[derive(Debug, Clone)]
pub struct HttpTitler(Endpoint);

impl HttpTitler {
    pub fn new(url: String, api_key: Option<String>) -> Self {
        Self(Endpoint::new(url, api_key))
    }
}

#[derive(Serialize)]
struct TitleRequest<'a> {
    dialogue: &'a str,
}

#[derive(Deserialize)]
struct TitleResponse {
    title: String,
}

impl TitleProvider for HttpTitler {
    fn title(&self, dialogue: &str) -> Result<String, ProviderError> {
        let r: TitleResponse = self.0.call(&TitleRequest { dialogue })?;
        Ok(r.title)
    }
}

/// Embeddings computed ahead of time, keyed by chunk id.
#[derive(Debug, Clone, Default)]
pub struct FileEmbeddings(pub BTreeMap<String, Vec<f64>>);

impl EmbeddingProvider for FileEmbeddings {
    fn embed(&self, chunk_id: &str, _text: &str) -> Result<Vec<f64>, ProviderError> {
        self.0
            .get(chunk_id)
            .cloned()
            .ok_or_else(|| ProviderError(format!("no precomputed embedding for chunk '{chunk_id}'")))
    }
}

/// Picks the embedding provider: a precomputed file wins, then the remote
/// endpoint, then the hashed bag-of-words fallback.
pub fn embedding_provider(config: &ProviderConfig, file: Option<FileEmbeddings>) -> Box<dyn EmbeddingProvider> {
    if let Some(f) = file {
        return Box::new(f);
    }
    match &config.embed_url {
        Some(url) => Box::new(HttpEmbedder::new(url.clone(), config.api_key.clone())),
        None => Box::new(HashedBagOfWords::default()),
    }
}

pub fn title_provider(config: &ProviderConfig) -> Option<HttpTitler> {
    config
        .title_url
        .as_ref()
        .map(|url| HttpTitler::new(url.clone(), config.api_key.clone()))
}
