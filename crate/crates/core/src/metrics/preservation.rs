use serde::{Deserialize, Serialize};

use crate::embedding::{
    embed, unit_similarity, EmbeddingCache, EmbeddingProvider, EmbeddingVector,
};
use crate::error::{Error, Result};

use super::lexical::tokenize;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PreservationMode {
    /// Greedy matching over per-token embeddings.
    TokenGreedy,
    /// `(cos + 1) / 2` between whole-document embeddings.
    DocumentFallback,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GreedyMatch {
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
}

/// Recall averages, over source tokens, the best mapped cosine to any output
/// token; precision does the same from the output side.
pub fn greedy_match(source: &[EmbeddingVector], output: &[EmbeddingVector]) -> Result<GreedyMatch> {
    if source.is_empty() || output.is_empty() {
        return Err(Error::Domain(
            "greedy matching needs tokens on both sides".into(),
        ));
    }
    let sim = source
        .iter()
        .map(|s| {
            output
                .iter()
                .map(|o| unit_similarity(s, o))
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<Vec<_>>>()?;
    let recall = sim
        .iter()
        .map(|row| row.iter().copied().fold(f64::NEG_INFINITY, f64::max))
        .sum::<f64>()
        / source.len() as f64;
    let precision = (0..output.len())
        .map(|j| {
            sim.iter()
                .map(|row| row[j])
                .fold(f64::NEG_INFINITY, f64::max)
        })
        .sum::<f64>()
        / output.len() as f64;
    Ok(GreedyMatch {
        precision,
        recall,
        f1: f1(precision, recall),
    })
}

pub fn f1(precision: f64, recall: f64) -> f64 {
    if precision + recall == 0.0 {
        0.0
    } else {
        2.0 * precision * recall / (precision + recall)
    }
}

/// Token-level preservation F1 between two texts.
pub fn preservation_score(
    source_text: &str,
    output_text: &str,
    token_embedder: &dyn EmbeddingProvider,
    cache: &EmbeddingCache,
) -> Result<f64> {
    let src = tokenize(source_text);
    let out = tokenize(output_text);
    if src.is_empty() || out.is_empty() {
        return Err(Error::Domain("preservation needs nonempty texts".into()));
    }
    let embed_all = |toks: &[String]| {
        let refs: Vec<&str> = toks.iter().map(String::as_str).collect();
        embed(&refs, token_embedder, cache)
    };
    Ok(greedy_match(&embed_all(&src)?, &embed_all(&out)?)?.f1)
}

/// Whole-document fallback when no token embedder is available.
pub fn document_preservation(source: &EmbeddingVector, output: &EmbeddingVector) -> Result<f64> {
    unit_similarity(source, output)
}
