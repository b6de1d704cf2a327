//! Client for a remote embedding service.
//!
//! Each batch is sent as `POST {"texts": [...]}` and must come back as
//! `{"embeddings": [[...], ...]}` with one row per text.

use std::time::Duration;

use newsimpact_core::corpus::Headline;
use newsimpact_core::embed::EmbeddingMatrix;
use serde::{Deserialize, Serialize};
use thiserror::Error;

pub const URL_ENV: &str = "NEWSIMPACT_EMBED_URL";
pub const TOKEN_ENV: &str = "NEWSIMPACT_EMBED_TOKEN";
pub const DEFAULT_TIMEOUT: Duration = Duration::from_secs(30);
pub const DEFAULT_BATCH_SIZE: usize = 64;
const EXCERPT_CHARS: usize = 200;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum HttpError {
    #[error("no embedding endpoint: pass --endpoint or set {URL_ENV}")]
    NoEndpoint,
    #[error("batch size must be at least 1")]
    ZeroBatchSize,
    #[error("request to {url} failed: {message}")]
    Transport { url: String, message: String },
    #[error("{url} answered HTTP {status}: {excerpt}")]
    Status {
        url: String,
        status: u16,
        excerpt: String,
    },
    #[error("cannot decode response of batch {batch}: {message}")]
    Decode { batch: usize, message: String },
    #[error("batch {batch}: sent {sent} texts but received {received} embeddings")]
    RowCount {
        batch: usize,
        sent: usize,
        received: usize,
    },
    #[error("batch {batch}: expected embeddings of dimension {expected}, got {got}")]
    Dimension {
        batch: usize,
        expected: usize,
        got: usize,
    },
}

#[derive(Debug, Clone, PartialEq)]
pub struct HttpConfig {
    pub endpoint: String,
    pub batch_size: usize,
    pub timeout: Duration,
    /// Sent as `Authorization: Bearer <token>` when present.
    pub token: Option<String>,
}

impl HttpConfig {
    /// Falls back to the environment for the endpoint and token.
    pub fn resolve(endpoint: Option<String>, batch_size: usize, timeout: Duration) -> Result<Self, HttpError> {
        let endpoint = endpoint
            .or_else(|| std::env::var(URL_ENV).ok())
            .filter(|e| !e.trim().is_empty())
            .ok_or(HttpError::NoEndpoint)?;
        let token = std::env::var(TOKEN_ENV).ok().filter(|t| !t.is_empty());
        Ok(Self {
            endpoint,
            batch_size,
            timeout,
            token,
        })
    }
}

#[derive(Serialize)]
struct EmbedRequest<'a> {
    texts: Vec<&'a str>,
}

#[derive(Deserialize)]
struct EmbedResponse {
    embeddings: Vec<Vec<f32>>,
}

fn excerpt(body: &str) -> String {
    let mut s: String = body.chars().take(EXCERPT_CHARS).collect();
    if body.chars().count() > EXCERPT_CHARS {
        s.push_str("...");
    }
    s
}

/// Embeds every title, batch by batch, keeping input order. Rows are
/// returned as the service produced them (not normalized).
pub fn embed_http(headlines: &[Headline], config: &HttpConfig) -> Result<EmbeddingMatrix, HttpError> {
    if config.batch_size == 0 {
        return Err(HttpError::ZeroBatchSize);
    }
    let agent: ureq::Agent = ureq::Agent::config_builder()
        .timeout_global(Some(config.timeout))
        .http_status_as_error(false)
        .build()
        .into();
    let url = config.endpoint.as_str();
    let transport = |e: ureq::Error| HttpError::Transport {
        url: url.to_string(),
        message: e.to_string(),
    };

    let mut dim: Option<usize> = None;
    let mut data = Vec::new();
    for (batch, chunk) in headlines.chunks(config.batch_size).enumerate() {
        let body = serde_json::to_string(&EmbedRequest {
            texts: chunk.iter().map(|h| h.title.as_str()).collect(),
        })
        .expect("string list serializes");
        let mut req = agent.post(url).content_type("application/json");
        if let Some(token) = &config.token {
            req = req.header("Authorization", format!("Bearer {token}"));
        }
        let mut resp = req.send(body).map_err(transport)?;
        let status = resp.status().as_u16();
        let text = resp.body_mut().read_to_string().map_err(transport)?;
        if !(200..300).contains(&status) {
            return Err(HttpError::Status {
                url: url.to_string(),
                status,
                excerpt: excerpt(&text),
            });
        }
        let parsed: EmbedResponse = serde_json::from_str(&text).map_err(|e| HttpError::Decode {
            batch,
            message: e.to_string(),
        })?;
        if parsed.embeddings.len() != chunk.len() {
            return Err(HttpError::RowCount {
                batch,
                sent: chunk.len(),
                received: parsed.embeddings.len(),
            });
        }
        for row in parsed.embeddings {
            let expected = *dim.get_or_insert(row.len());
            if row.len() != expected || expected == 0 {
                return Err(HttpError::Dimension {
                    batch,
                    expected,
                    got: row.len(),
                });
            }
            data.extend(row);
        }
    }
    let ids = headlines.iter().map(|h| h.id.to_string()).collect();
    Ok(EmbeddingMatrix::new(ids, dim.unwrap_or(1), data, false)
        .expect("rows were checked against the common dimension"))
}
