//! Relevance scoring and history-aware maximal marginal relevance selection.

use std::time::Duration;

use log::warn;
use serde::{Deserialize, Serialize};

use crate::embedding::{cosine_similarity, unit_similarity, EmbeddingVector};
use crate::error::{Error, Result};
use crate::http::JsonClient;
use crate::retrieval::Candidate;

#[derive(Serialize)]
struct RerankRequest<'a> {
    query: &'a str,
    documents: &'a [String],
}

#[derive(Deserialize)]
struct RerankResponse {
    scores: Vec<f64>,
}

/// Remote cross-encoder: POST `{"query", "documents"}`, expects `{"scores"}`.
#[derive(Debug, Clone)]
pub struct HttpReranker {
    client: JsonClient,
}

impl HttpReranker {
    pub fn new(endpoint: &str, timeout: Duration) -> Result<Self> {
        Ok(Self {
            client: JsonClient::new(endpoint, timeout)?,
        })
    }

    pub fn endpoint(&self) -> &str {
        self.client.endpoint()
    }

    /// Raw scores, one per document.
    pub fn score(&self, query: &str, documents: &[String]) -> Result<Vec<f64>> {
        let resp: RerankResponse = self.client.post(&RerankRequest { query, documents })?;
        if resp.scores.len() != documents.len() {
            return Err(Error::Transport(format!(
                "reranker returned {} scores for {} documents",
                resp.scores.len(),
                documents.len()
            )));
        }
        if resp.scores.iter().any(|s| !s.is_finite()) {
            return Err(Error::Transport(
                "reranker returned non-finite scores".into(),
            ));
        }
        Ok(resp.scores)
    }
}

#[derive(Debug, Clone, Default)]
pub enum RelevanceScorer {
    #[default]
    CosineFallback,
    Http(HttpReranker),
}

impl RelevanceScorer {
    pub fn identity(&self) -> String {
        match self {
            Self::CosineFallback => "cosine_fallback".into(),
            Self::Http(r) => format!("http_reranker:{}", r.endpoint()),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScoredCandidate {
    pub candidate: Candidate,
    /// Relevance in `[0, 1]`.
    pub rel: f64,
}

/// One pick of the greedy selection, with the objective value it won at.
#[derive(Debug, Clone, PartialEq)]
pub struct Selected {
    pub candidate: Candidate,
    pub rel: f64,
    pub score: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RelevanceScores {
    pub scored: Vec<ScoredCandidate>,
    /// Set when the HTTP scorer failed and cosine was used instead.
    pub fallback_warning: Option<String>,
}

/// Min-max normalize within the batch; an all-equal batch maps to 0.5.
pub fn min_max_normalize(scores: &[f64]) -> Vec<f64> {
    let lo = scores.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = scores.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if hi - lo == 0.0 {
        return vec![0.5; scores.len()];
    }
    scores.iter().map(|s| (s - lo) / (hi - lo)).collect()
}

/// Score each candidate against `query`. `documents[i]` is the text of
/// `candidates[i]` (used by the HTTP scorer); `query_vec` drives the cosine
/// path.
pub fn score_relevance(
    query: &str,
    query_vec: &EmbeddingVector,
    candidates: &[Candidate],
    documents: &[String],
    scorer: &RelevanceScorer,
) -> Result<RelevanceScores> {
    if candidates.is_empty() {
        return Err(Error::Domain("cannot score an empty candidate list".into()));
    }
    if documents.len() != candidates.len() {
        return Err(Error::Integrity(format!(
            "{} documents for {} candidates",
            documents.len(),
            candidates.len()
        )));
    }
    let mut fallback_warning = None;
    let rels = match scorer {
        RelevanceScorer::Http(r) => match r.score(query, documents) {
            Ok(raw) => Some(min_max_normalize(&raw)),
            Err(e) => {
                let msg = format!("reranker unavailable, using cosine relevance: {e}");
                warn!("{msg}");
                fallback_warning = Some(msg);
                None
            }
        },
        RelevanceScorer::CosineFallback => None,
    };
    let rels = match rels {
        Some(r) => r,
        None => candidates
            .iter()
            .map(|c| Ok((cosine_similarity(query_vec, &c.embedding)? + 1.0) / 2.0))
            .collect::<Result<Vec<_>>>()?,
    };
    Ok(RelevanceScores {
        scored: candidates
            .iter()
            .cloned()
            .zip(rels)
            .map(|(candidate, rel)| ScoredCandidate { candidate, rel })
            .collect(),
        fallback_warning,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct MmrConfig {
    pub lambda: f64,
    pub k: usize,
}

impl Default for MmrConfig {
    fn default() -> Self {
        Self { lambda: 0.6, k: 5 }
    }
}

impl MmrConfig {
    pub fn validate(&self) -> Result<()> {
        if !(0.0..=1.0).contains(&self.lambda) {
            return Err(Error::Config(format!(
                "lambda {} is outside [0, 1]",
                self.lambda
            )));
        }
        if self.k == 0 {
            return Err(Error::Config("k must be positive".into()));
        }
        Ok(())
    }
}

/// Embeddings of earlier adaptations of the same source recipe.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct HistorySet {
    embeddings: Vec<EmbeddingVector>,
}

impl HistorySet {
    pub fn new(embeddings: Vec<EmbeddingVector>) -> Result<Self> {
        check_consistent(embeddings.iter())?;
        Ok(Self { embeddings })
    }

    pub fn embeddings(&self) -> &[EmbeddingVector] {
        &self.embeddings
    }

    pub fn len(&self) -> usize {
        self.embeddings.len()
    }

    pub fn is_empty(&self) -> bool {
        self.embeddings.is_empty()
    }
}

fn check_consistent<'a>(mut it: impl Iterator<Item = &'a EmbeddingVector>) -> Result<()> {
    let Some(first) = it.next() else {
        return Ok(());
    };
    for v in it {
        if v.provider() != first.provider() {
            return Err(Error::Integrity(format!(
                "embeddings from `{}` and `{}` cannot be compared",
                first.provider(),
                v.provider()
            )));
        }
        if v.dim() != first.dim() {
            return Err(Error::Integrity(format!(
                "embedding dimensions {} and {} differ",
                first.dim(),
                v.dim()
            )));
        }
    }
    Ok(())
}

/// Greedy MMR over precomputed quantities.
///
/// `sim[i][j]` is the similarity between pool items, `history_max[i]` the
/// largest similarity of item `i` to any history entry (`None` for an empty
/// history). Returns `(index, objective)` pairs in pick order.
pub fn mmr_order(
    rel: &[f64],
    ids: &[&str],
    sim: &[Vec<f64>],
    history_max: &[Option<f64>],
    lambda: f64,
    k: usize,
) -> Vec<(usize, f64)> {
    let n = rel.len();
    let mut max_sim: Vec<Option<f64>> = history_max.to_vec();
    let mut taken = vec![false; n];
    let mut picks = Vec::with_capacity(k.min(n));
    while picks.len() < k.min(n) {
        let mut best: Option<(usize, f64)> = None;
        for i in (0..n).filter(|&i| !taken[i]) {
            let div = max_sim[i].unwrap_or(0.0);
            let score = lambda * rel[i] - (1.0 - lambda) * div;
            let better = match best {
                None => true,
                Some((b, bs)) => score
                    .partial_cmp(&bs)
                    .expect("finite objective")
                    .then_with(|| rel[i].total_cmp(&rel[b]))
                    .then_with(|| ids[b].cmp(ids[i]))
                    .is_gt(),
            };
            if better {
                best = Some((i, score));
            }
        }
        let (pick, score) = best.expect("unpicked items remain");
        taken[pick] = true;
        picks.push((pick, score));
        for i in 0..n {
            let s = sim[i][pick];
            max_sim[i] = Some(max_sim[i].map_or(s, |m| m.max(s)));
        }
    }
    picks
}

/// Select up to `cfg.k` contexts balancing relevance against similarity to
/// both the already selected items and the history.
pub fn mmr_select(
    pool: &[ScoredCandidate],
    history: &HistorySet,
    cfg: &MmrConfig,
) -> Result<Vec<Selected>> {
    cfg.validate()?;
    if pool.is_empty() {
        return Err(Error::Domain("cannot select from an empty pool".into()));
    }
    check_consistent(
        pool.iter()
            .map(|c| &c.candidate.embedding)
            .chain(history.embeddings()),
    )?;
    let n = pool.len();
    let mut sim = vec![vec![0.0; n]; n];
    for i in 0..n {
        sim[i][i] = 1.0;
        for j in i + 1..n {
            let s = unit_similarity(&pool[i].candidate.embedding, &pool[j].candidate.embedding)?;
            sim[i][j] = s;
            sim[j][i] = s;
        }
    }
    let history_max = pool
        .iter()
        .map(|c| {
            history
                .embeddings()
                .iter()
                .map(|h| unit_similarity(&c.candidate.embedding, h))
                .try_fold(None, |acc: Option<f64>, s| {
                    let s = s?;
                    Ok::<_, Error>(Some(acc.map_or(s, |m| m.max(s))))
                })
        })
        .collect::<Result<Vec<_>>>()?;
    let rel: Vec<f64> = pool.iter().map(|c| c.rel).collect();
    let ids: Vec<&str> = pool
        .iter()
        .map(|c| c.candidate.recipe_id.as_str())
        .collect();
    Ok(mmr_order(&rel, &ids, &sim, &history_max, cfg.lambda, cfg.k)
        .into_iter()
        .map(|(i, score)| Selected {
            candidate: pool[i].candidate.clone(),
            rel: pool[i].rel,
            score,
        })
        .collect())
}
