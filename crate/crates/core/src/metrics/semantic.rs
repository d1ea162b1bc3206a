use crate::embedding::{cosine_similarity, EmbeddingVector};
use crate::error::{Error, Result};

/// Mean over unordered pairs of `(1 - cos) / 2`.
pub fn semantic_diversity(embeddings: &[EmbeddingVector]) -> Result<f64> {
    let k = embeddings.len();
    if k < 2 {
        return Err(Error::Domain(format!(
            "semantic diversity needs at least 2 outputs, got {k}"
        )));
    }
    let mut sum = 0.0;
    for i in 0..k {
        for j in i + 1..k {
            if embeddings[i].provider() != embeddings[j].provider() {
                return Err(Error::Integrity(
                    "embeddings come from different providers".into(),
                ));
            }
            sum += (1.0 - cosine_similarity(&embeddings[i], &embeddings[j])?) / 2.0;
        }
    }
    Ok(sum / (k * (k - 1) / 2) as f64)
}
