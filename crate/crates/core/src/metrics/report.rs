use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::contextgen::{AdaptedRecipe, GenerationOutcome};
use crate::corpus::{CorpusStore, Lexicon, Recipe, StandardIngredient};
use crate::embedding::{embed, EmbeddingCache, EmbeddingProvider, EmbeddingVector};
use crate::error::{Error, Result};

use super::aggregate::mean;
use super::correlation::pearson_matrix;
use super::culture::{culture_score, ClassifierProvider};
use super::ingredient::{global_ingredient_stats, ingredient_diversity, GlobalIngredientStats};
use super::lexical::{unique_n, DEFAULT_NS};
use super::preservation::{document_preservation, preservation_score, PreservationMode};
use super::probe::{context_utilization_probe, probe_distribution, ProbeDistribution, ProbeResult};
use super::semantic::semantic_diversity;

pub const UNIQUE_N: &str = "unique_n";
pub const SEMANTIC_DIVERSITY: &str = "semantic_diversity";
pub const INGREDIENT_DIVERSITY: &str = "ingredient_diversity";
pub const PRESERVATION: &str = "preservation";
pub const CULTURE_SCORE: &str = "culture_score";
pub const METRICS: [&str; 5] = [
    UNIQUE_N,
    SEMANTIC_DIVERSITY,
    INGREDIENT_DIVERSITY,
    PRESERVATION,
    CULTURE_SCORE,
];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Availability {
    Unavailable,
}

/// A number, or the string `"unavailable"` when the metric could not be
/// computed.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum MetricValue {
    Value(f64),
    Status(Availability),
}

impl MetricValue {
    pub fn value(&self) -> Option<f64> {
        match self {
            Self::Value(v) => Some(*v),
            Self::Status(_) => None,
        }
    }

    pub fn is_unavailable(&self) -> bool {
        matches!(self, Self::Status(Availability::Unavailable))
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct SourceMetrics {
    pub outputs: usize,
    pub failures: usize,
    pub values: BTreeMap<String, f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub probe: Option<ProbeResult>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Skip {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub source_id: Option<String>,
    pub metric: String,
    pub reason: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Correlation {
    pub metrics: Vec<String>,
    /// `null` where a metric had zero variance.
    pub matrix: Vec<Vec<Option<f64>>>,
    pub sources: usize,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct GlobalIngredients {
    pub outputs: Option<GlobalIngredientStats>,
    pub sources: Option<GlobalIngredientStats>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricReport {
    pub config: String,
    pub sources: usize,
    pub outputs: usize,
    pub failures: usize,
    pub preservation_mode: PreservationMode,
    pub providers: BTreeMap<String, String>,
    pub per_input: BTreeMap<String, SourceMetrics>,
    pub aggregates: BTreeMap<String, MetricValue>,
    pub probe: Option<ProbeDistribution>,
    pub correlation: Option<Correlation>,
    pub global_ingredients: GlobalIngredients,
    pub skipped: Vec<Skip>,
}

/// Everything needed to score a finished run.
pub struct Evaluator<'a> {
    pub config_label: String,
    pub store: &'a CorpusStore,
    pub embedder: &'a dyn EmbeddingProvider,
    pub cache: &'a EmbeddingCache,
    /// Token embedder for preservation; the document fallback is used when absent.
    pub token_embedder: Option<&'a dyn EmbeddingProvider>,
    pub classifier: Option<&'a dyn ClassifierProvider>,
    pub target_label: String,
    pub lexicon: &'a Lexicon,
    /// Number of probe buckets.
    pub k: usize,
    pub hf_fraction: f64,
}

/// Ordered union of every generation's context selection.
pub fn probe_context_ids(outcomes: &[GenerationOutcome]) -> Vec<String> {
    let mut ids: Vec<String> = Vec::new();
    for id in outcomes.iter().flat_map(|o| &o.selection_ids) {
        if !ids.contains(id) {
            ids.push(id.clone());
        }
    }
    ids
}

impl Evaluator<'_> {
    fn embed_texts(&self, texts: &[String]) -> Result<Vec<EmbeddingVector>> {
        let refs: Vec<&str> = texts.iter().map(String::as_str).collect();
        embed(&refs, self.embedder, self.cache)
    }

    fn probe(
        &self,
        outputs: &[EmbeddingVector],
        outcomes: &[GenerationOutcome],
    ) -> Result<ProbeResult> {
        let ids = probe_context_ids(outcomes);
        let texts = ids
            .iter()
            .map(|id| {
                self.store
                    .get(id)
                    .map(Recipe::document_text)
                    .ok_or_else(|| Error::Integrity(format!("context `{id}` is not in the corpus")))
            })
            .collect::<Result<Vec<_>>>()?;
        let contexts: Vec<(String, EmbeddingVector)> =
            ids.into_iter().zip(self.embed_texts(&texts)?).collect();
        context_utilization_probe(outputs, &contexts)
    }

    /// Probe results per source with at least one successful adaptation.
    pub fn probe_runs(
        &self,
        runs: &[(&Recipe, Vec<GenerationOutcome>)],
    ) -> Result<Vec<(String, ProbeResult)>> {
        let mut out = Vec::new();
        for (source, outcomes) in runs {
            let texts: Vec<String> = outcomes
                .iter()
                .filter_map(|o| o.adaptation().map(AdaptedRecipe::text))
                .collect();
            if texts.is_empty() {
                continue;
            }
            out.push((
                source.id.clone(),
                self.probe(&self.embed_texts(&texts)?, outcomes)?,
            ));
        }
        Ok(out)
    }

    pub fn evaluate(&self, runs: &[(&Recipe, Vec<GenerationOutcome>)]) -> Result<MetricReport> {
        if runs.is_empty() {
            return Err(Error::Domain("nothing to evaluate".into()));
        }
        let mut skipped = Vec::new();
        let mut skip = |source: Option<&str>, metric: &str, reason: String| {
            skipped.push(Skip {
                source_id: source.map(String::from),
                metric: metric.into(),
                reason,
            })
        };
        let preservation_mode = if self.token_embedder.is_some() {
            PreservationMode::TokenGreedy
        } else {
            PreservationMode::DocumentFallback
        };
        let mut culture_down: Option<String> = match self.classifier {
            None => Some("classifier disabled".into()),
            Some(_) => None,
        };

        let mut per_input = BTreeMap::new();
        let mut output_lists: Vec<Vec<StandardIngredient>> = Vec::new();
        let mut source_lists: Vec<Vec<StandardIngredient>> = Vec::new();
        let mut distinct_counts = Vec::new();
        let (mut n_outputs, mut n_failures) = (0, 0);

        for (source, outcomes) in runs {
            let id = source.id.as_str();
            let adaptations: Vec<&AdaptedRecipe> = outcomes
                .iter()
                .filter_map(GenerationOutcome::adaptation)
                .collect();
            let mut m = SourceMetrics {
                outputs: adaptations.len(),
                failures: outcomes.len() - adaptations.len(),
                ..SourceMetrics::default()
            };
            n_outputs += m.outputs;
            n_failures += m.failures;
            source_lists.push(source.standard_ingredients(self.lexicon));
            if adaptations.is_empty() {
                skip(Some(id), "all", "no successful adaptations".into());
                per_input.insert(id.to_string(), m);
                continue;
            }

            let texts: Vec<String> = adaptations.iter().map(|a| a.text()).collect();
            let embeddings = self.embed_texts(&texts)?;
            let ingredient_sets: Vec<Vec<StandardIngredient>> = adaptations
                .iter()
                .map(|a| a.standard_ingredients(self.lexicon))
                .collect();
            output_lists.extend(ingredient_sets.iter().cloned());

            let mut put = |name: &str, r: Result<f64>| match r {
                Ok(v) => {
                    m.values.insert(name.to_string(), v);
                }
                Err(e) => skip(Some(id), name, e.to_string()),
            };
            put(UNIQUE_N, unique_n(&texts, &DEFAULT_NS));
            put(SEMANTIC_DIVERSITY, semantic_diversity(&embeddings));
            put(INGREDIENT_DIVERSITY, ingredient_diversity(&ingredient_sets));

            let source_text = source.document_text();
            let pres: Result<Vec<f64>> = match self.token_embedder {
                Some(tok) => texts
                    .iter()
                    .map(|t| preservation_score(&source_text, t, tok, self.cache))
                    .collect(),
                None => {
                    let src = self.embed_texts(&[source_text])?.remove(0);
                    embeddings
                        .iter()
                        .map(|e| document_preservation(&src, e))
                        .collect()
                }
            };
            put(
                PRESERVATION,
                pres.map(|p| mean(&p).expect("at least one output")),
            );

            if let (None, Some(c)) = (&culture_down, self.classifier) {
                match culture_score(&adaptations, c, &self.target_label) {
                    Ok(v) => {
                        m.values.insert(CULTURE_SCORE.into(), v);
                    }
                    Err(e) => culture_down = Some(e.to_string()),
                }
            }

            match self.probe(&embeddings, outcomes) {
                Ok(p) => {
                    distinct_counts.push(p.distinct_count);
                    m.probe = Some(p);
                }
                Err(e) => skip(Some(id), "probe", e.to_string()),
            }
            per_input.insert(id.to_string(), m);
        }

        if let Some(reason) = &culture_down {
            for m in per_input.values_mut() {
                m.values.remove(CULTURE_SCORE);
            }
            skip(None, CULTURE_SCORE, reason.clone());
        }

        let mut aggregates = BTreeMap::new();
        for name in METRICS {
            let vals: Vec<f64> = per_input
                .values()
                .filter_map(|m| m.values.get(name).copied())
                .collect();
            let v = match mean(&vals) {
                Some(v) => MetricValue::Value(v),
                None => MetricValue::Status(Availability::Unavailable),
            };
            aggregates.insert(name.to_string(), v);
        }

        let probe = if distinct_counts.is_empty() {
            None
        } else {
            Some(probe_distribution(&distinct_counts, self.k)?)
        };

        let metrics: Vec<String> = METRICS
            .iter()
            .filter(|n| !aggregates[**n].is_unavailable())
            .map(|n| n.to_string())
            .collect();
        let rows: Vec<Vec<f64>> = per_input
            .values()
            .filter_map(|m| {
                metrics
                    .iter()
                    .map(|n| m.values.get(n).copied())
                    .collect::<Option<Vec<_>>>()
            })
            .collect();
        let columns: Vec<Vec<f64>> = (0..metrics.len())
            .map(|j| rows.iter().map(|r| r[j]).collect())
            .collect();
        let correlation = match pearson_matrix(&columns) {
            Ok(matrix) => Some(Correlation {
                metrics,
                matrix,
                sources: rows.len(),
            }),
            Err(e) => {
                skip(None, "correlation", e.to_string());
                None
            }
        };

        let mut global = GlobalIngredients::default();
        for (slot, lists, label) in [
            (
                &mut global.outputs,
                &output_lists,
                "global_ingredients.outputs",
            ),
            (
                &mut global.sources,
                &source_lists,
                "global_ingredients.sources",
            ),
        ] {
            match global_ingredient_stats(lists, self.hf_fraction) {
                Ok(s) => *slot = Some(s),
                Err(e) => skip(None, label, e.to_string()),
            }
        }

        let mut providers = BTreeMap::new();
        providers.insert("embedder".into(), self.embedder.identity().to_string());
        if let Some(t) = self.token_embedder {
            providers.insert("token_embedder".into(), t.identity().to_string());
        }
        if let Some(c) = self.classifier {
            providers.insert("classifier".into(), c.identity().to_string());
        }

        Ok(MetricReport {
            config: self.config_label.clone(),
            sources: runs.len(),
            outputs: n_outputs,
            failures: n_failures,
            preservation_mode,
            providers,
            per_input,
            aggregates,
            probe,
            correlation,
            global_ingredients: global,
            skipped,
        })
    }
}
