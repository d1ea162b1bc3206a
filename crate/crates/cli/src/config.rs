use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use recipe_adapt::contextgen::{Ablation, PipelineConfig};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

/// Where each provider comes from. Values are `mock`, `disabled`, an
/// `http://` endpoint, or (embedder only) `precomputed:<path>`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ProviderConfig {
    pub embedder: String,
    pub embedder_dim: usize,
    /// Token embedder for preservation; `disabled` uses the document fallback.
    pub token_embedder: String,
    /// `cosine` or an endpoint.
    pub reranker: String,
    pub generator: String,
    pub classifier: String,
    /// Probability returned by the mock classifier.
    pub mock_classifier_probability: f64,
    /// Failure injection for the mock generator, e.g. `["fail", "pass"]`.
    pub mock_script: Vec<String>,
    /// Generations the script applies to; all when unset.
    pub mock_script_generations: Option<Vec<u32>>,
    pub timeout_secs: u64,
    pub templates_dir: Option<PathBuf>,
    pub lexicon_dir: Option<PathBuf>,
}

impl Default for ProviderConfig {
    fn default() -> Self {
        Self {
            embedder: "mock".into(),
            embedder_dim: recipe_adapt::embedding::DEFAULT_MOCK_DIM,
            token_embedder: "disabled".into(),
            reranker: "cosine".into(),
            generator: "mock".into(),
            classifier: "disabled".into(),
            mock_classifier_probability: 0.5,
            mock_script: Vec::new(),
            mock_script_generations: None,
            timeout_secs: 120,
            templates_dir: None,
            lexicon_dir: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub corpus: Option<PathBuf>,
    /// Countries kept at load time; empty keeps all.
    pub countries: Vec<String>,
    /// Countries sources are drawn from; empty means every country except the target.
    pub source_countries: Vec<String>,
    /// Number of sources to sample; all when unset.
    pub sample_size: Option<usize>,
    pub seed: Option<u64>,
    /// Replace every enabled provider with its offline mock.
    pub mock_all: bool,
    pub workers: usize,
    pub pipeline: PipelineConfig,
    pub providers: ProviderConfig,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            corpus: None,
            countries: Vec::new(),
            source_countries: Vec::new(),
            sample_size: None,
            seed: None,
            mock_all: false,
            workers: 4,
            pipeline: PipelineConfig::default(),
            providers: ProviderConfig::default(),
        }
    }
}

/// Command-line overrides layered on top of the config file.
#[derive(Debug, Clone, Default, clap::Args)]
pub struct Overrides {
    /// TOML run configuration.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Use offline mocks for every enabled provider.
    #[arg(long)]
    pub mock_all: bool,
    /// MMR trade-off between relevance (1) and diversity (0).
    #[arg(long)]
    pub lambda: Option<f64>,
    /// Context window size per generation.
    #[arg(long)]
    pub window: Option<usize>,
    /// Number of selected contexts (k).
    #[arg(long)]
    pub contexts: Option<usize>,
    /// Adaptations per source (K).
    #[arg(long)]
    pub generations: Option<u32>,
    #[arg(long)]
    pub temperature: Option<f64>,
    /// Start from a component preset: vanilla, rewrite, rewrite-mmr, full.
    #[arg(long)]
    pub preset: Option<String>,
    /// Toggle a component, e.g. `--ablation window=off`. Repeatable.
    #[arg(long, value_name = "NAME=on|off")]
    pub ablation: Vec<String>,
    /// Number of sources to sample.
    #[arg(long)]
    pub sample: Option<usize>,
    #[arg(long)]
    pub workers: Option<usize>,
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .with_context(|| format!("reading config {}", path.display()))?;
        toml::from_str(&text).with_context(|| format!("parsing config {}", path.display()))
    }

    /// Config file (if any) with `o` applied on top.
    pub fn resolve(o: &Overrides) -> Result<Self> {
        let mut c = match &o.config {
            Some(p) => Self::load(p)?,
            None => Self::default(),
        };
        c.apply(o)?;
        Ok(c)
    }

    pub fn apply(&mut self, o: &Overrides) -> Result<()> {
        if o.seed.is_some() {
            self.seed = o.seed;
        }
        self.mock_all |= o.mock_all;
        let p = &mut self.pipeline;
        if let Some(v) = o.lambda {
            p.mmr.lambda = v;
        }
        if let Some(v) = o.window {
            p.window = v;
        }
        if let Some(v) = o.contexts {
            p.mmr.k = v;
        }
        if let Some(v) = o.generations {
            p.generations = v;
        }
        if let Some(v) = o.temperature {
            p.sampling.temperature = v;
        }
        if let Some(name) = &o.preset {
            p.ablation = Ablation::preset(name)?;
        }
        for a in &o.ablation {
            let Some((name, state)) = a.split_once('=') else {
                bail!("--ablation expects NAME=on|off, got `{a}`");
            };
            let on = match state {
                "on" => true,
                "off" => false,
                _ => bail!("--ablation state must be `on` or `off`, got `{state}`"),
            };
            p.ablation.set(name, on)?;
        }
        if o.sample.is_some() {
            self.sample_size = o.sample;
        }
        if let Some(w) = o.workers {
            self.workers = w;
        }
        Ok(())
    }

    pub fn validate(&self) -> Result<()> {
        self.pipeline.validate()?;
        if self.mock_all && self.seed.is_none() {
            bail!("--seed is required in mock mode");
        }
        if self.workers == 0 {
            bail!("workers must be at least 1");
        }
        Ok(())
    }

    /// Pipeline settings with the run seed and clock policy filled in.
    pub fn effective_pipeline(&self) -> PipelineConfig {
        PipelineConfig {
            seed: self.seed.unwrap_or(0),
            deterministic_clock: self.pipeline.deterministic_clock || self.mock_all,
            ..self.pipeline.clone()
        }
    }

    /// Hex SHA-256 of the canonical JSON form.
    pub fn hash(&self) -> String {
        let json = serde_json::to_string(self).expect("config serializes");
        hex::encode(Sha256::digest(json.as_bytes()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_match_reference_setup() {
        let c = RunConfig::default();
        assert_eq!(c.pipeline.mmr.lambda, 0.6);
        assert_eq!(c.pipeline.mmr.k, 5);
        assert_eq!(c.pipeline.window, 1);
        assert_eq!(c.pipeline.generations, 5);
        assert_eq!(c.pipeline.sampling.temperature, 0.7);
    }

    #[test]
    fn toml_round_trip_and_overrides() {
        let text = "seed = 3\nmock_all = true\n[pipeline]\nwindow = 2\n[pipeline.mmr]\nlambda = 0.3\n[providers]\nmock_script = [\"fail\", \"pass\"]\n";
        let mut c: RunConfig = toml::from_str(text).unwrap();
        assert_eq!(c.pipeline.window, 2);
        assert_eq!(c.pipeline.mmr.lambda, 0.3);
        assert_eq!(c.pipeline.mmr.k, 5);
        c.apply(&Overrides {
            lambda: Some(1.0),
            preset: Some("vanilla".into()),
            ablation: vec!["window=on".into()],
            ..Overrides::default()
        })
        .unwrap();
        assert_eq!(c.pipeline.mmr.lambda, 1.0);
        assert!(c.pipeline.ablation.window && !c.pipeline.ablation.contrastive);
        let back: RunConfig = toml::from_str(&toml::to_string(&c).unwrap()).unwrap();
        assert_eq!(back, c);
    }

    #[test]
    fn bad_inputs_rejected() {
        let mut c = RunConfig::default();
        assert!(c
            .apply(&Overrides {
                ablation: vec!["window".into()],
                ..Overrides::default()
            })
            .is_err());
        assert!(c
            .apply(&Overrides {
                ablation: vec!["bogus=on".into()],
                ..Overrides::default()
            })
            .is_err());
        c.mock_all = true;
        assert!(c.validate().is_err());
        c.seed = Some(1);
        c.validate().unwrap();
        c.pipeline.window = 9;
        assert!(c.validate().is_err());
    }

    #[test]
    fn unknown_keys_rejected() {
        assert!(toml::from_str::<RunConfig>("lamda = 0.5").is_err());
    }
}
