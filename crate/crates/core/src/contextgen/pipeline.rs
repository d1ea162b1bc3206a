//! The sequential K-generation loop for one source recipe.

use std::time::{SystemTime, UNIX_EPOCH};

use log::{debug, warn};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::corpus::Recipe;
use crate::error::{Error, Result};
use crate::rerank::{
    mmr_select, score_relevance, HistorySet, MmrConfig, RelevanceScorer, Selected,
};
use crate::retrieval::{merge_candidates, rewrite_queries, QuerySet, Retriever};
use crate::session::{SessionRecord, SessionStore};

use super::format::{parse_recipe, AdaptedRecipe};
use super::generator::{GenerationRequest, Generator, SamplingParams, Task};
use super::template::{assemble_prompt, AssemblyMode, Templates};
use super::window::build_window;

/// Component switches. With everything off the loop is plain RAG: the title
/// as the only query, top-k by relevance, the whole selection as context,
/// and no history in the prompt.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct Ablation {
    pub rewrite: bool,
    pub mmr: bool,
    pub history_in_mmr: bool,
    pub window: bool,
    pub contrastive: bool,
}

impl Default for Ablation {
    fn default() -> Self {
        Self::full()
    }
}

impl Ablation {
    pub const NAMES: [&'static str; 5] =
        ["rewrite", "mmr", "history_in_mmr", "window", "contrastive"];
    pub const PRESETS: [&'static str; 4] = ["vanilla", "rewrite", "rewrite-mmr", "full"];

    pub fn full() -> Self {
        Self {
            rewrite: true,
            mmr: true,
            history_in_mmr: true,
            window: true,
            contrastive: true,
        }
    }

    pub fn vanilla() -> Self {
        Self {
            rewrite: false,
            mmr: false,
            history_in_mmr: false,
            window: false,
            contrastive: false,
        }
    }

    pub fn preset(name: &str) -> Result<Self> {
        let v = Self::vanilla();
        match name {
            "vanilla" => Ok(v),
            "rewrite" => Ok(Self { rewrite: true, ..v }),
            "rewrite-mmr" => Ok(Self {
                rewrite: true,
                mmr: true,
                ..v
            }),
            "full" => Ok(Self::full()),
            _ => Err(Error::Config(format!(
                "unknown preset `{name}` (expected one of {})",
                Self::PRESETS.join(", ")
            ))),
        }
    }

    pub fn set(&mut self, name: &str, on: bool) -> Result<()> {
        let slot = match name {
            "rewrite" => &mut self.rewrite,
            "mmr" => &mut self.mmr,
            "history_in_mmr" | "history" => &mut self.history_in_mmr,
            "window" => &mut self.window,
            "contrastive" => &mut self.contrastive,
            _ => {
                return Err(Error::Config(format!(
                    "unknown ablation `{name}` (expected one of {})",
                    Self::NAMES.join(", ")
                )))
            }
        };
        *slot = on;
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct PipelineConfig {
    pub target_country: String,
    /// Candidates retrieved per query.
    pub retrieval_depth: usize,
    /// Size of the merged pool handed to the reranker.
    pub pool_size: usize,
    pub mmr: MmrConfig,
    pub window: usize,
    pub generations: u32,
    pub sampling: SamplingParams,
    /// Extra attempts after a failed or unparseable generation.
    pub retry_budget: u32,
    /// Most recent adaptations shown in the prompt.
    pub history_limit: usize,
    pub ablation: Ablation,
    pub seed: u64,
    /// Use the session index as the timestamp instead of wall-clock time.
    pub deterministic_clock: bool,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        Self {
            target_country: "ESP".into(),
            retrieval_depth: 10,
            pool_size: 30,
            mmr: MmrConfig::default(),
            window: 1,
            generations: 5,
            sampling: SamplingParams::default(),
            retry_budget: 2,
            history_limit: 5,
            ablation: Ablation::full(),
            seed: 0,
            deterministic_clock: false,
        }
    }
}

impl PipelineConfig {
    pub fn validate(&self) -> Result<()> {
        self.mmr.validate()?;
        if self.window == 0 || self.window > self.mmr.k {
            return Err(Error::Config(format!(
                "window {} must be between 1 and k = {}",
                self.window, self.mmr.k
            )));
        }
        if self.generations == 0 {
            return Err(Error::Config("generations must be at least 1".into()));
        }
        if self.retrieval_depth == 0 || self.pool_size == 0 {
            return Err(Error::Config(
                "retrieval depth and pool size must be positive".into(),
            ));
        }
        if self.target_country.trim().is_empty() {
            return Err(Error::Config("target country is empty".into()));
        }
        Ok(())
    }

    /// MMR settings after applying the ablation switches.
    pub fn effective_mmr(&self) -> MmrConfig {
        MmrConfig {
            lambda: if self.ablation.mmr {
                self.mmr.lambda
            } else {
                1.0
            },
            k: self.mmr.k,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum OutcomeStatus {
    Ok { adaptation: AdaptedRecipe },
    Failed { cause: String },
}

/// What happened at one generation index.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GenerationOutcome {
    pub source_id: String,
    pub t: u32,
    #[serde(flatten)]
    pub status: OutcomeStatus,
    pub queries: Vec<String>,
    /// The full ranked context selection, in order.
    pub selection_ids: Vec<String>,
    /// The part of the selection placed in the prompt.
    pub window_ids: Vec<String>,
    pub retries: u32,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub warnings: Vec<String>,
}

impl GenerationOutcome {
    pub fn adaptation(&self) -> Option<&AdaptedRecipe> {
        match &self.status {
            OutcomeStatus::Ok { adaptation } => Some(adaptation),
            OutcomeStatus::Failed { .. } => None,
        }
    }
}

/// Derive a per-request seed so reruns replay exactly regardless of
/// scheduling.
pub fn request_seed(seed: u64, source_id: &str, t: u32, attempt: u32, task: Task) -> u64 {
    let mut h = Sha256::new();
    h.update(seed.to_le_bytes());
    h.update(source_id.as_bytes());
    h.update([0]);
    h.update(t.to_le_bytes());
    h.update(attempt.to_le_bytes());
    h.update(format!("{task:?}").as_bytes());
    let d = h.finalize();
    u64::from_le_bytes(d[..8].try_into().expect("digest has 8 bytes"))
}

pub struct Pipeline<'a> {
    pub config: PipelineConfig,
    pub retriever: &'a Retriever<'a>,
    pub scorer: &'a RelevanceScorer,
    pub generator: &'a dyn Generator,
    pub session: &'a SessionStore,
    pub templates: &'a Templates,
}

impl Pipeline<'_> {
    /// Retrieve, rank and select contexts for `source` given its history.
    pub fn select_contexts(
        &self,
        source: &Recipe,
        queries: &QuerySet,
        history: &HistorySet,
    ) -> Result<(Vec<Selected>, Vec<String>)> {
        let cfg = &self.config;
        let lists = queries
            .queries
            .iter()
            .map(|q| {
                self.retriever
                    .dense_retrieve(&q.text, &cfg.target_country, cfg.retrieval_depth)
            })
            .collect::<Result<Vec<_>>>()?;
        let pool = merge_candidates(&lists, cfg.pool_size);
        let title = source.clean_title();
        let query_vec = self.retriever.embed_query(&title)?;
        let store = self.retriever.store();
        let docs: Vec<String> = pool
            .iter()
            .map(|c| {
                store
                    .get(&c.recipe_id)
                    .expect("candidate ids come from the store")
                    .document_text()
            })
            .collect();
        let rel = score_relevance(&title, &query_vec, &pool, &docs, self.scorer)?;
        let empty = HistorySet::default();
        let h = if cfg.ablation.history_in_mmr {
            history
        } else {
            &empty
        };
        let selection = mmr_select(&rel.scored, h, &cfg.effective_mmr())?;
        Ok((selection, rel.fallback_warning.into_iter().collect()))
    }

    fn timestamp(&self, index: u64) -> u64 {
        if self.config.deterministic_clock {
            index
        } else {
            SystemTime::now()
                .duration_since(UNIX_EPOCH)
                .map_or(0, |d| d.as_millis() as u64)
        }
    }

    /// Run all generations for `source`. Generator failures become failure
    /// outcomes; retrieval, embedding and session errors abort.
    pub fn generate_adaptations(&self, source: &Recipe) -> Result<Vec<GenerationOutcome>> {
        let cfg = &self.config;
        cfg.validate()?;
        let store = self.retriever.store();
        let mut outcomes = Vec::with_capacity(cfg.generations as usize);
        for t in 0..cfg.generations {
            let (history, history_texts) = self.session.fetch_history(&source.id)?;
            let queries = if cfg.ablation.rewrite {
                rewrite_queries(
                    source,
                    self.generator,
                    self.templates,
                    cfg.sampling,
                    Some(request_seed(
                        cfg.seed,
                        &source.id,
                        t,
                        0,
                        Task::RegenerateTitle,
                    )),
                    t,
                )?
            } else {
                QuerySet::original(source)
            };
            let mut warnings = queries.warnings.clone();
            let (selection, w) = self.select_contexts(source, &queries, &history)?;
            warnings.extend(w);
            let w = if cfg.ablation.window {
                cfg.window
            } else {
                selection.len()
            };
            let window = build_window(&selection, w, t as usize)?;
            let contexts: Vec<&Recipe> = window
                .members
                .iter()
                .map(|m| {
                    store
                        .get(&m.candidate.recipe_id)
                        .expect("selected ids come from the store")
                })
                .collect();
            let (template, mode) = if cfg.ablation.contrastive {
                (&self.templates.contrastive, AssemblyMode::Contrastive)
            } else {
                (&self.templates.plain, AssemblyMode::Plain)
            };
            let prompt = assemble_prompt(
                template,
                mode,
                &contexts,
                source,
                &history_texts,
                cfg.history_limit,
            )?;

            let mut status = None;
            let mut retries = 0;
            for attempt in 0..=cfg.retry_budget {
                let req = GenerationRequest {
                    task: Task::Adapt,
                    prompt: prompt.clone(),
                    params: cfg.sampling,
                    seed: Some(request_seed(cfg.seed, &source.id, t, attempt, Task::Adapt)),
                    generation: t,
                    attempt,
                };
                let result = self
                    .generator
                    .generate(&req)
                    .and_then(|raw| parse_recipe(&raw, t));
                match result {
                    Ok(a) => {
                        retries = attempt;
                        status = Some(a);
                        break;
                    }
                    Err(e) => {
                        retries = attempt;
                        let msg =
                            format!("generation {t} attempt {attempt} for `{}`: {e}", source.id);
                        warn!("{msg}");
                        warnings.push(msg);
                    }
                }
            }
            let status = match status {
                Some(adaptation) => {
                    let embedding = self.retriever.embed_query(&adaptation.text())?;
                    let index = self.session.count(&source.id);
                    self.session.record(&SessionRecord {
                        source_recipe_id: source.id.clone(),
                        t: index,
                        adaptation: adaptation.clone(),
                        embedding,
                        context_ids: window.ids(),
                        ts: self.timestamp(index),
                    })?;
                    debug!(
                        "`{}` generation {t} recorded as history entry {index}",
                        source.id
                    );
                    OutcomeStatus::Ok { adaptation }
                }
                None => OutcomeStatus::Failed {
                    cause: warnings.last().cloned().unwrap_or_default(),
                },
            };
            outcomes.push(GenerationOutcome {
                source_id: source.id.clone(),
                t,
                status,
                queries: queries.queries.iter().map(|q| q.text.clone()).collect(),
                selection_ids: selection
                    .iter()
                    .map(|s| s.candidate.recipe_id.clone())
                    .collect(),
                window_ids: window.ids(),
                retries,
                warnings,
            });
        }
        Ok(outcomes)
    }
}
