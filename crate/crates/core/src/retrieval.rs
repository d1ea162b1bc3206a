//! Candidate pool construction: query rewriting, brute-force dense search over
//! one country partition, and max-score fusion across queries.

use std::collections::HashMap;
use std::sync::{Arc, Mutex};

use log::warn;
use serde::{Deserialize, Serialize};

use crate::contextgen::{
    cultural_title_prompt, regenerate_title_prompt, GenerationRequest, Generator, SamplingParams,
    Task, Templates,
};
use crate::corpus::{CorpusStore, Recipe};
use crate::embedding::{
    cosine_similarity, embed, EmbeddingCache, EmbeddingProvider, EmbeddingVector,
};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum QueryProvenance {
    OriginalTitle,
    RegeneratedTitle,
    CulturallyAdaptedTitle,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Query {
    pub text: String,
    pub provenance: QueryProvenance,
}

/// Up to three retrieval queries; the first is always the source title.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QuerySet {
    pub source_recipe_id: String,
    pub queries: Vec<Query>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub warnings: Vec<String>,
}

impl QuerySet {
    pub fn original(source: &Recipe) -> Self {
        Self {
            source_recipe_id: source.id.clone(),
            queries: vec![Query {
                text: source.clean_title(),
                provenance: QueryProvenance::OriginalTitle,
            }],
            warnings: Vec::new(),
        }
    }
}

/// First nonempty line with surrounding whitespace and quote marks removed.
fn normalize_rewrite(raw: &str) -> String {
    let line = raw
        .lines()
        .map(str::trim)
        .find(|l| !l.is_empty())
        .unwrap_or("");
    line.trim_matches(|c: char| {
        c.is_whitespace() || matches!(c, '"' | '\'' | '«' | '»' | '“' | '”' | '`' | '*')
    })
    .to_string()
}

/// Ask `generator` for a regenerated title and a culturally adapted title.
/// Failed or empty rewrites are dropped with a warning; the original title is
/// always kept.
pub fn rewrite_queries(
    source: &Recipe,
    generator: &dyn Generator,
    templates: &Templates,
    params: SamplingParams,
    seed: Option<u64>,
    generation: u32,
) -> Result<QuerySet> {
    let mut set = QuerySet::original(source);
    let jobs = [
        (
            Task::RegenerateTitle,
            QueryProvenance::RegeneratedTitle,
            regenerate_title_prompt(&templates.rewrite_title, source)?,
        ),
        (
            Task::CulturalTitle,
            QueryProvenance::CulturallyAdaptedTitle,
            cultural_title_prompt(&templates.rewrite_cultural, source)?,
        ),
    ];
    for (i, (task, provenance, prompt)) in jobs.into_iter().enumerate() {
        let req = GenerationRequest {
            task,
            prompt,
            params,
            seed: seed.map(|s| s.wrapping_add(i as u64)),
            generation,
            attempt: 0,
        };
        match generator.generate(&req) {
            Ok(raw) => {
                let text = normalize_rewrite(&raw);
                if text.is_empty() {
                    set.warnings
                        .push(format!("{task:?} rewrite for `{}` was empty", source.id));
                } else {
                    set.queries.push(Query { text, provenance });
                }
            }
            Err(e) => set
                .warnings
                .push(format!("{task:?} rewrite for `{}` failed: {e}", source.id)),
        }
    }
    for w in &set.warnings {
        warn!("{w}");
    }
    Ok(set)
}

#[derive(Debug, Clone, PartialEq)]
pub struct Candidate {
    pub recipe_id: String,
    /// Best cosine between any contributing query and the recipe.
    pub dense_score: f64,
    pub embedding: EmbeddingVector,
}

/// Descending score, then ascending id.
fn rank_order(a: &Candidate, b: &Candidate) -> std::cmp::Ordering {
    b.dense_score
        .total_cmp(&a.dense_score)
        .then_with(|| a.recipe_id.cmp(&b.recipe_id))
}

type PartitionVectors = Arc<Vec<(String, EmbeddingVector)>>;

/// Brute-force dense retrieval over a [`CorpusStore`]. Partition embeddings
/// are computed once per country and memoized.
pub struct Retriever<'a> {
    store: &'a CorpusStore,
    provider: &'a dyn EmbeddingProvider,
    cache: &'a EmbeddingCache,
    partitions: Mutex<HashMap<String, PartitionVectors>>,
}

impl<'a> Retriever<'a> {
    pub fn new(
        store: &'a CorpusStore,
        provider: &'a dyn EmbeddingProvider,
        cache: &'a EmbeddingCache,
    ) -> Self {
        Self {
            store,
            provider,
            cache,
            partitions: Mutex::default(),
        }
    }

    pub fn store(&self) -> &CorpusStore {
        self.store
    }

    pub fn partition_vectors(&self, country: &str) -> Result<PartitionVectors> {
        if let Some(v) = self
            .partitions
            .lock()
            .expect("partition lock poisoned")
            .get(country)
        {
            return Ok(v.clone());
        }
        let ids = self.store.partition(country);
        if ids.is_empty() {
            return Err(Error::Domain(format!(
                "country partition `{country}` is empty"
            )));
        }
        let texts: Vec<String> = ids
            .iter()
            .map(|id| {
                self.store
                    .get(id)
                    .expect("partition ids resolve")
                    .document_text()
            })
            .collect();
        let refs: Vec<&str> = texts.iter().map(String::as_str).collect();
        let vectors = embed(&refs, self.provider, self.cache)?;
        let built: PartitionVectors = Arc::new(ids.iter().cloned().zip(vectors).collect());
        self.partitions
            .lock()
            .expect("partition lock poisoned")
            .insert(country.to_string(), built.clone());
        Ok(built)
    }

    pub fn embed_query(&self, text: &str) -> Result<EmbeddingVector> {
        Ok(embed(&[text], self.provider, self.cache)?.remove(0))
    }

    /// Top-`n` recipes of `country` by cosine to `query`.
    pub fn dense_retrieve(&self, query: &str, country: &str, n: usize) -> Result<Vec<Candidate>> {
        let q = self.embed_query(query)?;
        self.dense_retrieve_vector(&q, country, n)
    }

    pub fn dense_retrieve_vector(
        &self,
        query: &EmbeddingVector,
        country: &str,
        n: usize,
    ) -> Result<Vec<Candidate>> {
        if n == 0 {
            return Err(Error::Config("retrieval depth must be positive".into()));
        }
        let part = self.partition_vectors(country)?;
        let mut scored = part
            .iter()
            .map(|(id, v)| {
                Ok(Candidate {
                    recipe_id: id.clone(),
                    dense_score: cosine_similarity(query, v)?,
                    embedding: v.clone(),
                })
            })
            .collect::<Result<Vec<_>>>()?;
        scored.sort_by(rank_order);
        scored.truncate(n);
        Ok(scored)
    }
}

/// Union by recipe id keeping each id's best score, re-sorted and truncated.
pub fn merge_candidates(lists: &[Vec<Candidate>], pool_size: usize) -> Vec<Candidate> {
    let mut best: HashMap<&str, &Candidate> = HashMap::new();
    for c in lists.iter().flatten() {
        best.entry(c.recipe_id.as_str())
            .and_modify(|cur| {
                if c.dense_score > cur.dense_score {
                    *cur = c;
                }
            })
            .or_insert(c);
    }
    let mut merged: Vec<Candidate> = best.into_values().cloned().collect();
    merged.sort_by(rank_order);
    merged.truncate(pool_size);
    merged
}
