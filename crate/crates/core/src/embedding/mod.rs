//! Text embeddings: vectors, providers, the on-disk cache, and cosine math.

mod cache;
mod provider;

use std::sync::Arc;

pub use cache::EmbeddingCache;
pub use provider::{
    EmbeddingProvider, HttpEmbedder, MockEmbedder, PrecomputedEmbedder, DEFAULT_MOCK_DIM,
};

use crate::error::{Error, Result};

/// A dense embedding tagged with the identity of the provider that produced it.
#[derive(Debug, Clone, PartialEq)]
pub struct EmbeddingVector {
    provider: Arc<str>,
    values: Vec<f64>,
}

impl EmbeddingVector {
    pub fn new(provider: impl Into<Arc<str>>, values: Vec<f64>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::Domain(
                "embedding must have positive dimension".into(),
            ));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::Domain(
                "embedding contains non-finite entries".into(),
            ));
        }
        Ok(Self {
            provider: provider.into(),
            values,
        })
    }

    pub fn provider(&self) -> &str {
        &self.provider
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn dim(&self) -> usize {
        self.values.len()
    }

    pub fn norm(&self) -> f64 {
        self.values.iter().map(|v| v * v).sum::<f64>().sqrt()
    }

    /// Unit-norm copy. Fails on the zero vector.
    pub fn normalized(&self) -> Result<Self> {
        let n = self.norm();
        if n == 0.0 {
            return Err(Error::Domain("cannot normalize a zero vector".into()));
        }
        Ok(Self {
            provider: self.provider.clone(),
            values: self.values.iter().map(|v| v / n).collect(),
        })
    }
}

/// Cosine similarity of two raw vectors, clamped to `[-1, 1]`.
///
/// Exactly symmetric, and exactly 1 for identical vectors: the norm product is
/// taken as `sqrt(|u|^2 |v|^2)`, which reproduces `|u|^2` when `u == v`.
pub fn cosine(u: &[f64], v: &[f64]) -> Result<f64> {
    if u.len() != v.len() {
        return Err(Error::Integrity(format!(
            "dimension mismatch: {} vs {}",
            u.len(),
            v.len()
        )));
    }
    let mut dot = 0.0;
    let mut nu = 0.0;
    let mut nv = 0.0;
    for (a, b) in u.iter().zip(v) {
        dot += a * b;
        nu += a * a;
        nv += b * b;
    }
    if nu == 0.0 || nv == 0.0 {
        return Err(Error::Domain(
            "cosine similarity of a zero-norm vector".into(),
        ));
    }
    let mut denom = (nu * nv).sqrt();
    if !denom.is_normal() {
        denom = nu.sqrt() * nv.sqrt();
    }
    Ok((dot / denom).clamp(-1.0, 1.0))
}

pub fn cosine_similarity(u: &EmbeddingVector, v: &EmbeddingVector) -> Result<f64> {
    cosine(u.values(), v.values())
}

/// Cosine mapped onto `[0, 1]` via `(c + 1) / 2`.
pub fn unit_similarity(u: &EmbeddingVector, v: &EmbeddingVector) -> Result<f64> {
    Ok((cosine_similarity(u, v)? + 1.0) / 2.0)
}

/// Embed `texts` in order, serving hits from `cache` and sending all misses to
/// `provider` in a single batch.
pub fn embed(
    texts: &[&str],
    provider: &dyn EmbeddingProvider,
    cache: &EmbeddingCache,
) -> Result<Vec<EmbeddingVector>> {
    if texts.is_empty() {
        return Err(Error::Domain("embed called with no texts".into()));
    }
    let id: Arc<str> = Arc::from(provider.identity());

    let mut misses: Vec<&str> = Vec::new();
    for t in texts {
        if cache.get(&id, t).is_none() && !misses.contains(t) {
            misses.push(t);
        }
    }
    if !misses.is_empty() {
        let fresh = provider.embed_batch(&misses)?;
        if fresh.len() != misses.len() {
            return Err(Error::Integrity(format!(
                "provider `{id}` returned {} vectors for {} texts",
                fresh.len(),
                misses.len()
            )));
        }
        for (t, v) in misses.iter().zip(fresh) {
            cache.insert(&id, t, v)?;
        }
    }

    texts
        .iter()
        .map(|t| {
            let values = cache
                .get(&id, t)
                .ok_or_else(|| Error::Integrity("cache lost an inserted entry".into()))?;
            EmbeddingVector::new(id.clone(), values)
        })
        .collect()
}
