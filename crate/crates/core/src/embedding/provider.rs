use std::collections::HashMap;
use std::fs;
use std::path::Path;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::time::Duration;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::http::JsonClient;

pub const DEFAULT_MOCK_DIM: usize = 64;

/// Source of text embeddings. Implementations must return the same vector for
/// the same text for the lifetime of the instance.
pub trait EmbeddingProvider: Send + Sync {
    /// Stable identity used to key caches and tag vectors.
    fn identity(&self) -> &str;

    fn embed_batch(&self, texts: &[&str]) -> Result<Vec<Vec<f64>>>;
}

/// Offline provider: every text maps to a pseudorandom unit vector seeded by
/// the SHA-256 of the text.
#[derive(Debug)]
pub struct MockEmbedder {
    dim: usize,
    identity: String,
    requests: AtomicUsize,
}

impl MockEmbedder {
    pub fn new(dim: usize) -> Self {
        assert!(dim > 0, "mock embedder dimension must be positive");
        Self {
            dim,
            identity: format!("mock_deterministic:{dim}"),
            requests: AtomicUsize::new(0),
        }
    }

    /// Number of `embed_batch` calls served so far.
    pub fn requests(&self) -> usize {
        self.requests.load(Ordering::SeqCst)
    }

    fn vector_for(&self, text: &str) -> Vec<f64> {
        let digest = Sha256::digest(text.as_bytes());
        let mut seed = [0u8; 32];
        seed.copy_from_slice(&digest);
        let mut rng = ChaCha8Rng::from_seed(seed);
        loop {
            let v: Vec<f64> = (0..self.dim).map(|_| rng.gen_range(-1.0..1.0)).collect();
            let n = v.iter().map(|x| x * x).sum::<f64>().sqrt();
            if n > 1e-12 {
                return v.into_iter().map(|x| x / n).collect();
            }
        }
    }
}

impl Default for MockEmbedder {
    fn default() -> Self {
        Self::new(DEFAULT_MOCK_DIM)
    }
}

impl EmbeddingProvider for MockEmbedder {
    fn identity(&self) -> &str {
        &self.identity
    }

    fn embed_batch(&self, texts: &[&str]) -> Result<Vec<Vec<f64>>> {
        self.requests.fetch_add(1, Ordering::SeqCst);
        Ok(texts.iter().map(|t| self.vector_for(t)).collect())
    }
}

/// Vectors read from a file: a header line holding the dimension, then
/// `key<TAB>v1,v2,...` lines. A text is looked up by its literal value first,
/// then by the hex SHA-256 of its bytes.
#[derive(Debug)]
pub struct PrecomputedEmbedder {
    identity: String,
    dim: usize,
    vectors: HashMap<String, Vec<f64>>,
}

impl PrecomputedEmbedder {
    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let mut lines = text.lines();
        let header = lines.next().ok_or(Error::Parse {
            record: 1,
            message: "missing dimension header".into(),
        })?;
        let dim: usize = header.trim().parse().map_err(|_| Error::Parse {
            record: 1,
            message: format!("bad dimension header `{header}`"),
        })?;
        let mut vectors = HashMap::new();
        for (i, line) in lines.enumerate() {
            if line.trim().is_empty() {
                continue;
            }
            let record = i + 2;
            let (key, vals) = line.split_once('\t').ok_or(Error::Parse {
                record,
                message: "expected `key<TAB>values`".into(),
            })?;
            let v = vals
                .split(',')
                .map(|s| s.trim().parse::<f64>())
                .collect::<std::result::Result<Vec<_>, _>>()
                .map_err(|e| Error::Parse {
                    record,
                    message: e.to_string(),
                })?;
            if v.len() != dim {
                return Err(Error::Integrity(format!(
                    "line {record}: vector has {} entries, header says {dim}",
                    v.len()
                )));
            }
            vectors.insert(key.to_string(), v);
        }
        Ok(Self {
            identity: format!("file_precomputed:{}", path.display()),
            dim,
            vectors,
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }
}

impl EmbeddingProvider for PrecomputedEmbedder {
    fn identity(&self) -> &str {
        &self.identity
    }

    fn embed_batch(&self, texts: &[&str]) -> Result<Vec<Vec<f64>>> {
        texts
            .iter()
            .map(|t| {
                self.vectors
                    .get(*t)
                    .or_else(|| self.vectors.get(&hex::encode(Sha256::digest(t.as_bytes()))))
                    .cloned()
                    .ok_or_else(|| {
                        Error::Transport(format!("no precomputed vector for text `{t}`"))
                    })
            })
            .collect()
    }
}

#[derive(Serialize)]
struct EmbedRequest<'a> {
    texts: &'a [&'a str],
}

#[derive(Deserialize)]
struct EmbedResponse {
    vectors: Vec<Vec<f64>>,
}

/// Remote provider: POST `{"texts": [...]}`, expects `{"vectors": [[...], ...]}`
/// in request order.
#[derive(Debug)]
pub struct HttpEmbedder {
    identity: String,
    client: JsonClient,
}

impl HttpEmbedder {
    pub fn new(endpoint: &str, timeout: Duration) -> Result<Self> {
        Ok(Self {
            identity: format!("http_service:{endpoint}"),
            client: JsonClient::new(endpoint, timeout)?,
        })
    }
}

impl EmbeddingProvider for HttpEmbedder {
    fn identity(&self) -> &str {
        &self.identity
    }

    fn embed_batch(&self, texts: &[&str]) -> Result<Vec<Vec<f64>>> {
        let resp: EmbedResponse = self.client.post(&EmbedRequest { texts })?;
        if resp.vectors.len() != texts.len() {
            return Err(Error::Integrity(format!(
                "embedding service returned {} vectors for {} texts",
                resp.vectors.len(),
                texts.len()
            )));
        }
        if let Some(first) = resp.vectors.first() {
            if resp.vectors.iter().any(|v| v.len() != first.len()) {
                return Err(Error::Integrity(
                    "embedding service returned mixed dimensions".into(),
                ));
            }
        }
        Ok(resp.vectors)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn mock_is_deterministic_and_unit_norm() {
        let m = MockEmbedder::new(16);
        let a = m.embed_batch(&["a", "a", "b"]).unwrap();
        assert_eq!(a[0], a[1]);
        assert_ne!(a[0], a[2]);
        let n: f64 = a[2].iter().map(|x| x * x).sum::<f64>().sqrt();
        assert!((n - 1.0).abs() < 1e-6);
        let again = MockEmbedder::new(16).embed_batch(&["a"]).unwrap();
        assert_eq!(again[0], a[0]);
    }

    #[test]
    fn precomputed_file_lookup() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("vecs.tsv");
        let hashed = hex::encode(Sha256::digest(b"hola"));
        fs::write(&p, format!("2\nr1\t1,0\n{hashed}\t0,1\n")).unwrap();
        let e = PrecomputedEmbedder::load(&p).unwrap();
        assert_eq!(e.dim(), 2);
        let v = e.embed_batch(&["r1", "hola"]).unwrap();
        assert_eq!(v, vec![vec![1.0, 0.0], vec![0.0, 1.0]]);
        assert!(matches!(
            e.embed_batch(&["missing"]).unwrap_err(),
            Error::Transport(_)
        ));
    }

    #[test]
    fn precomputed_dimension_checked() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("vecs.tsv");
        fs::write(&p, "3\nr1\t1,0\n").unwrap();
        assert!(matches!(
            PrecomputedEmbedder::load(&p).unwrap_err(),
            Error::Integrity(_)
        ));
    }
}
