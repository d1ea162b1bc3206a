use std::collections::{BTreeMap, HashMap};
use std::fs::{self, File};
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::sync::{Arc, RwLock};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};

#[derive(Serialize, Deserialize)]
struct CacheLine {
    provider: String,
    key: String,
    vector: Vec<f64>,
}

#[derive(Default)]
struct Inner {
    entries: HashMap<(Arc<str>, String), Vec<f64>>,
    dims: HashMap<Arc<str>, usize>,
}

/// Embeddings keyed by `(provider identity, sha256(text))`.
///
/// Safe to share across threads. Persisted as JSONL sorted by key so the file
/// content depends only on the set of entries.
#[derive(Default)]
pub struct EmbeddingCache {
    inner: RwLock<Inner>,
    path: Option<PathBuf>,
}

fn text_key(text: &str) -> String {
    hex::encode(Sha256::digest(text.as_bytes()))
}

impl EmbeddingCache {
    pub fn in_memory() -> Self {
        Self::default()
    }

    /// Open (or start) a cache persisted at `path`.
    pub fn open(path: impl Into<PathBuf>) -> Result<Self> {
        let path = path.into();
        let cache = Self {
            inner: RwLock::default(),
            path: Some(path.clone()),
        };
        if path.exists() {
            let f = File::open(&path).map_err(|e| Error::io(&path, e))?;
            for (i, line) in BufReader::new(f).lines().enumerate() {
                let line = line.map_err(|e| Error::io(&path, e))?;
                if line.trim().is_empty() {
                    continue;
                }
                let rec: CacheLine = serde_json::from_str(&line).map_err(|e| Error::Parse {
                    record: i + 1,
                    message: e.to_string(),
                })?;
                cache.insert_keyed(Arc::from(rec.provider.as_str()), rec.key, rec.vector)?;
            }
        }
        Ok(cache)
    }

    pub fn path(&self) -> Option<&Path> {
        self.path.as_deref()
    }

    pub fn len(&self) -> usize {
        self.inner
            .read()
            .expect("cache lock poisoned")
            .entries
            .len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn get(&self, provider: &Arc<str>, text: &str) -> Option<Vec<f64>> {
        let inner = self.inner.read().expect("cache lock poisoned");
        inner
            .entries
            .get(&(provider.clone(), text_key(text)))
            .cloned()
    }

    pub fn contains(&self, provider: &str, text: &str) -> bool {
        self.get(&Arc::from(provider), text).is_some()
    }

    /// Insert a provider response. Fails if its dimension disagrees with what
    /// the cache already holds for that provider.
    pub fn insert(&self, provider: &Arc<str>, text: &str, vector: Vec<f64>) -> Result<()> {
        self.insert_keyed(provider.clone(), text_key(text), vector)
    }

    fn insert_keyed(&self, provider: Arc<str>, key: String, vector: Vec<f64>) -> Result<()> {
        let mut inner = self.inner.write().expect("cache lock poisoned");
        match inner.dims.get(&provider) {
            Some(&d) if d != vector.len() => {
                return Err(Error::Integrity(format!(
                    "provider `{provider}` produced dim {} but cache holds dim {d}",
                    vector.len()
                )))
            }
            Some(_) => {}
            None => {
                inner.dims.insert(provider.clone(), vector.len());
            }
        }
        inner.entries.insert((provider, key), vector);
        Ok(())
    }

    /// Rewrite the backing file atomically. No-op for in-memory caches.
    pub fn save(&self) -> Result<()> {
        let Some(path) = &self.path else {
            return Ok(());
        };
        if let Some(parent) = path.parent() {
            fs::create_dir_all(parent).map_err(|e| Error::io(parent, e))?;
        }
        let inner = self.inner.read().expect("cache lock poisoned");
        let sorted: BTreeMap<(&str, &str), &Vec<f64>> = inner
            .entries
            .iter()
            .map(|((p, k), v)| ((p.as_ref(), k.as_str()), v))
            .collect();
        let tmp = path.with_extension("tmp");
        {
            let f = File::create(&tmp).map_err(|e| Error::io(&tmp, e))?;
            let mut w = BufWriter::new(f);
            for ((provider, key), vector) in sorted {
                let line = serde_json::to_string(&CacheLine {
                    provider: provider.to_string(),
                    key: key.to_string(),
                    vector: vector.clone(),
                })
                .expect("cache line serializes");
                writeln!(w, "{line}").map_err(|e| Error::io(&tmp, e))?;
            }
            w.flush().map_err(|e| Error::io(&tmp, e))?;
        }
        fs::rename(&tmp, path).map_err(|e| Error::io(path, e))
    }
}
