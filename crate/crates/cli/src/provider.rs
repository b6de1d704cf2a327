use std::collections::BTreeMap;
use std::path::PathBuf;

use newsimpact_core::corpus::Headline;
use newsimpact_core::embed::{embed_hashing, hash_features, EmbeddingMatrix};

use crate::emb1::load_embeddings;
use crate::error::{Error, Result};
use crate::http::{embed_http, HttpConfig};

/// Where headline embeddings come from.
#[derive(Debug, Clone, PartialEq)]
pub enum ProviderSpec {
    Hashing { dim: usize },
    /// A precomputed EMB1 file whose ids are headline ids.
    File { source: PathBuf },
    Http(HttpConfig),
}

impl ProviderSpec {
    pub fn kind(&self) -> &'static str {
        match self {
            ProviderSpec::Hashing { .. } => "hashing",
            ProviderSpec::File { .. } => "file",
            ProviderSpec::Http(_) => "http",
        }
    }
}

/// Embeds `headlines` in order. Rows are L2-normalized unless `normalize`
/// is false; the `seed` only affects the hashing provider.
pub fn embed(
    headlines: &[Headline],
    spec: &ProviderSpec,
    seed: u64,
    normalize: bool,
) -> Result<EmbeddingMatrix> {
    let mut m = match spec {
        ProviderSpec::Hashing { dim } if normalize => return Ok(embed_hashing(headlines, *dim, seed)?),
        ProviderSpec::Hashing { dim } => return Ok(hash_features(headlines, *dim, seed)?),
        ProviderSpec::File { source } => select_rows(&load_embeddings(source)?, headlines)?,
        ProviderSpec::Http(cfg) => embed_http(headlines, cfg)?,
    };
    if normalize && !m.is_normalized() {
        m.normalize();
    }
    Ok(m)
}

/// Picks the rows of `m` matching each headline id, in headline order.
pub fn select_rows(m: &EmbeddingMatrix, headlines: &[Headline]) -> Result<EmbeddingMatrix> {
    let index: BTreeMap<&str, usize> = m
        .ids()
        .iter()
        .enumerate()
        .map(|(i, id)| (id.as_str(), i))
        .collect();
    let mut ids = Vec::with_capacity(headlines.len());
    let mut data = Vec::with_capacity(headlines.len() * m.dim());
    for h in headlines {
        let id = h.id.to_string();
        let row = *index
            .get(id.as_str())
            .ok_or_else(|| Error::MissingEmbedding(id.clone()))?;
        data.extend_from_slice(m.row(row));
        ids.push(id);
    }
    Ok(EmbeddingMatrix::new(ids, m.dim(), data, m.is_normalized())?)
}
