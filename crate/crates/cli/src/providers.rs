use std::path::Path;
use std::sync::Arc;
use std::time::Duration;

use anyhow::{bail, Context, Result};
use recipe_adapt::contextgen::{
    EchoContextGenerator, Generator, HttpGenerator, ScriptStep, ScriptedGenerator, Templates,
};
use recipe_adapt::corpus::Lexicon;
use recipe_adapt::embedding::{EmbeddingProvider, HttpEmbedder, MockEmbedder, PrecomputedEmbedder};
use recipe_adapt::metrics::{ClassifierProvider, HttpClassifier, MockLookupClassifier};
use recipe_adapt::rerank::{HttpReranker, RelevanceScorer};

use crate::config::RunConfig;

pub struct Providers {
    pub embedder: Arc<dyn EmbeddingProvider>,
    pub token_embedder: Option<Arc<dyn EmbeddingProvider>>,
    pub scorer: RelevanceScorer,
    pub generator: Arc<dyn Generator>,
    pub classifier: Option<Arc<dyn ClassifierProvider>>,
    pub templates: Templates,
    pub lexicon: Lexicon,
}

fn is_http(kind: &str) -> bool {
    kind.starts_with("http://") || kind.starts_with("https://")
}

fn parse_script(steps: &[String]) -> Result<Vec<ScriptStep>> {
    steps
        .iter()
        .map(|s| match s.as_str() {
            "pass" => Ok(ScriptStep::Pass),
            "fail" => Ok(ScriptStep::Fail),
            "garbage" => Ok(ScriptStep::Garbage),
            other => bail!("unknown mock_script step `{other}` (expected pass, fail or garbage)"),
        })
        .collect()
}

impl Providers {
    pub fn build(cfg: &RunConfig) -> Result<Self> {
        let p = &cfg.providers;
        let timeout = Duration::from_secs(p.timeout_secs);
        let mock = |kind: &str| cfg.mock_all || kind == "mock";

        let embedder: Arc<dyn EmbeddingProvider> = if mock(&p.embedder) {
            Arc::new(MockEmbedder::new(p.embedder_dim))
        } else if let Some(path) = p.embedder.strip_prefix("precomputed:") {
            Arc::new(PrecomputedEmbedder::load(Path::new(path))?)
        } else if is_http(&p.embedder) {
            Arc::new(HttpEmbedder::new(&p.embedder, timeout)?)
        } else {
            bail!("unsupported embedder `{}`", p.embedder);
        };

        let token_embedder: Option<Arc<dyn EmbeddingProvider>> = match p.token_embedder.as_str() {
            "disabled" => None,
            s if mock(s) => Some(Arc::new(MockEmbedder::new(p.embedder_dim))),
            s if is_http(s) => Some(Arc::new(HttpEmbedder::new(s, timeout)?)),
            s => bail!("unsupported token embedder `{s}`"),
        };

        let scorer = match p.reranker.as_str() {
            "cosine" => RelevanceScorer::CosineFallback,
            s if cfg.mock_all || s == "mock" => RelevanceScorer::CosineFallback,
            s if is_http(s) => RelevanceScorer::Http(HttpReranker::new(s, timeout)?),
            s => bail!("unsupported reranker `{s}`"),
        };

        let base: Arc<dyn Generator> = if mock(&p.generator) {
            Arc::new(EchoContextGenerator)
        } else if is_http(&p.generator) {
            Arc::new(HttpGenerator::new(&p.generator, timeout)?)
        } else {
            bail!("unsupported generator `{}`", p.generator);
        };
        let generator: Arc<dyn Generator> = if p.mock_script.is_empty() {
            base
        } else {
            Arc::new(ScriptedGenerator::new(
                base,
                parse_script(&p.mock_script)?,
                p.mock_script_generations.clone(),
            ))
        };

        let classifier: Option<Arc<dyn ClassifierProvider>> = match p.classifier.as_str() {
            "disabled" => None,
            s if mock(s) => Some(Arc::new(MockLookupClassifier::constant(
                p.mock_classifier_probability,
            ))),
            s if is_http(s) => Some(Arc::new(HttpClassifier::new(s, timeout)?)),
            s => bail!("unsupported classifier `{s}`"),
        };

        let templates = match &p.templates_dir {
            Some(d) => Templates::from_dir(d)
                .with_context(|| format!("loading templates from {}", d.display()))?,
            None => Templates::default(),
        };
        let lexicon = match &p.lexicon_dir {
            Some(d) => Lexicon::from_dir(d)
                .with_context(|| format!("loading lexicon from {}", d.display()))?,
            None => Lexicon::default(),
        };
        Ok(Self {
            embedder,
            token_embedder,
            scorer,
            generator,
            classifier,
            templates,
            lexicon,
        })
    }

    /// Provider identities, as recorded in run manifests.
    pub fn identities(&self) -> std::collections::BTreeMap<String, String> {
        let mut m = std::collections::BTreeMap::new();
        m.insert("embedder".into(), self.embedder.identity().to_string());
        if let Some(t) = &self.token_embedder {
            m.insert("token_embedder".into(), t.identity().to_string());
        }
        m.insert("reranker".into(), self.scorer.identity());
        m.insert("generator".into(), self.generator.identity().to_string());
        if let Some(c) = &self.classifier {
            m.insert("classifier".into(), c.identity().to_string());
        }
        m
    }
}
