//! Per-source generation history persisted as append-only JSONL logs, one
//! file per source recipe under the session directory.

use std::collections::HashMap;
use std::fs::{self, File, OpenOptions};
use std::io::{BufRead, BufReader, Write};
use std::path::{Path, PathBuf};
use std::sync::{Arc, RwLock};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::contextgen::AdaptedRecipe;
use crate::embedding::EmbeddingVector;
use crate::error::{Error, Result};
use crate::rerank::HistorySet;

/// One successful adaptation. `t` counts the source's recorded adaptations,
/// so it equals the generation index only when no earlier generation failed.
#[derive(Debug, Clone, PartialEq)]
pub struct SessionRecord {
    pub source_recipe_id: String,
    pub t: u64,
    pub adaptation: AdaptedRecipe,
    pub embedding: EmbeddingVector,
    pub context_ids: Vec<String>,
    pub ts: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct LogLine {
    source_id: String,
    t: u64,
    title: String,
    ingredients: Vec<String>,
    steps: Vec<String>,
    embedding: Vec<f64>,
    context_ids: Vec<String>,
    ts: u64,
}

impl LogLine {
    fn to_record(&self, provider: &Arc<str>) -> Result<SessionRecord> {
        let adaptation = AdaptedRecipe {
            title: self.title.clone(),
            ingredients: self.ingredients.clone(),
            steps: self.steps.clone(),
            raw: String::new(),
            t: self.t as u32,
        };
        let adaptation = AdaptedRecipe {
            raw: adaptation.text(),
            ..adaptation
        };
        Ok(SessionRecord {
            source_recipe_id: self.source_id.clone(),
            t: self.t,
            adaptation,
            embedding: EmbeddingVector::new(provider.clone(), self.embedding.clone())?,
            context_ids: self.context_ids.clone(),
            ts: self.ts,
        })
    }
}

/// File name for a source id's log. Ids outside `[A-Za-z0-9_-]` are
/// sanitized and suffixed with a short hash to stay unique.
pub fn log_file_name(source_id: &str) -> String {
    let clean: String = source_id
        .chars()
        .map(|c| {
            if c.is_ascii_alphanumeric() || c == '-' || c == '_' {
                c
            } else {
                '_'
            }
        })
        .collect();
    if clean == source_id && !clean.is_empty() {
        format!("{clean}.jsonl")
    } else {
        let h = hex::encode(Sha256::digest(source_id.as_bytes()));
        format!("{clean}-{}.jsonl", &h[..8])
    }
}

/// History store. Readers may run concurrently; each source id must have a
/// single writer, which the sequencing check enforces.
#[derive(Debug)]
pub struct SessionStore {
    dir: Option<PathBuf>,
    provider: Arc<str>,
    lines: RwLock<HashMap<String, Vec<LogLine>>>,
}

impl SessionStore {
    pub fn in_memory(provider: &str) -> Self {
        Self {
            dir: None,
            provider: provider.into(),
            lines: RwLock::default(),
        }
    }

    /// Open (creating if needed) `dir` and replay every log in it. Embeddings
    /// are tagged with `provider`.
    pub fn open(dir: impl Into<PathBuf>, provider: &str) -> Result<Self> {
        let dir = dir.into();
        fs::create_dir_all(&dir).map_err(|e| Error::io(&dir, e))?;
        let mut paths: Vec<PathBuf> = fs::read_dir(&dir)
            .map_err(|e| Error::io(&dir, e))?
            .map(|e| e.map(|e| e.path()).map_err(|e| Error::io(&dir, e)))
            .collect::<Result<Vec<_>>>()?;
        paths.retain(|p| p.extension().is_some_and(|x| x == "jsonl"));
        paths.sort();
        let mut lines: HashMap<String, Vec<LogLine>> = HashMap::new();
        for path in paths {
            let reader = BufReader::new(File::open(&path).map_err(|e| Error::io(&path, e))?);
            for (n, line) in reader.lines().enumerate() {
                let line = line.map_err(|e| Error::io(&path, e))?;
                if line.trim().is_empty() {
                    continue;
                }
                let parsed: LogLine = serde_json::from_str(&line).map_err(|e| Error::Parse {
                    record: n + 1,
                    message: format!("{}: {e}", path.display()),
                })?;
                let entries = lines.entry(parsed.source_id.clone()).or_default();
                if parsed.t != entries.len() as u64 {
                    return Err(Error::Sequencing {
                        source_id: parsed.source_id,
                        expected: entries.len() as u64,
                        got: parsed.t,
                    });
                }
                entries.push(parsed);
            }
        }
        Ok(Self {
            dir: Some(dir),
            provider: provider.into(),
            lines: RwLock::new(lines),
        })
    }

    pub fn dir(&self) -> Option<&Path> {
        self.dir.as_deref()
    }

    pub fn provider(&self) -> &str {
        &self.provider
    }

    /// Number of records for `source_id`.
    pub fn count(&self, source_id: &str) -> u64 {
        self.lines
            .read()
            .expect("session lock poisoned")
            .get(source_id)
            .map_or(0, |v| v.len() as u64)
    }

    /// Append `rec`. Its index must equal the current count for its source.
    pub fn record(&self, rec: &SessionRecord) -> Result<()> {
        if rec.embedding.provider() != &*self.provider {
            return Err(Error::Integrity(format!(
                "session expects `{}` embeddings, got `{}`",
                self.provider,
                rec.embedding.provider()
            )));
        }
        let mut lines = self.lines.write().expect("session lock poisoned");
        let entries = lines.entry(rec.source_recipe_id.clone()).or_default();
        if rec.t != entries.len() as u64 {
            return Err(Error::Sequencing {
                source_id: rec.source_recipe_id.clone(),
                expected: entries.len() as u64,
                got: rec.t,
            });
        }
        if let Some(first) = entries.first() {
            if first.embedding.len() != rec.embedding.dim() {
                return Err(Error::Integrity(format!(
                    "history for `{}` has dimension {}, got {}",
                    rec.source_recipe_id,
                    first.embedding.len(),
                    rec.embedding.dim()
                )));
            }
        }
        let line = LogLine {
            source_id: rec.source_recipe_id.clone(),
            t: rec.t,
            title: rec.adaptation.title.clone(),
            ingredients: rec.adaptation.ingredients.clone(),
            steps: rec.adaptation.steps.clone(),
            embedding: rec.embedding.values().to_vec(),
            context_ids: rec.context_ids.clone(),
            ts: rec.ts,
        };
        if let Some(dir) = &self.dir {
            let path = dir.join(log_file_name(&rec.source_recipe_id));
            let mut json = serde_json::to_string(&line).expect("log line serializes");
            json.push('\n');
            let mut f = OpenOptions::new()
                .create(true)
                .append(true)
                .open(&path)
                .map_err(|e| Error::io(&path, e))?;
            f.write_all(json.as_bytes())
                .map_err(|e| Error::io(&path, e))?;
            f.flush().map_err(|e| Error::io(&path, e))?;
        }
        entries.push(line);
        Ok(())
    }

    /// All records for `source_id` in index order.
    pub fn records(&self, source_id: &str) -> Result<Vec<SessionRecord>> {
        let lines = self.lines.read().expect("session lock poisoned");
        lines
            .get(source_id)
            .map(|v| v.iter().map(|l| l.to_record(&self.provider)).collect())
            .unwrap_or_else(|| Ok(Vec::new()))
    }

    /// History embeddings for MMR and parsed adaptations for the prompt.
    pub fn fetch_history(&self, source_id: &str) -> Result<(HistorySet, Vec<AdaptedRecipe>)> {
        let (embeddings, texts) = self
            .records(source_id)?
            .into_iter()
            .map(|r| (r.embedding, r.adaptation))
            .unzip();
        Ok((HistorySet::new(embeddings)?, texts))
    }

    /// Source ids with at least one record, sorted.
    pub fn sources(&self) -> Vec<String> {
        let mut ids: Vec<String> = self
            .lines
            .read()
            .expect("session lock poisoned")
            .keys()
            .cloned()
            .collect();
        ids.sort();
        ids
    }
}
