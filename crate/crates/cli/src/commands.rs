use std::collections::{BTreeMap, BTreeSet};
use std::fs::{self, File};
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use anyhow::{bail, ensure, Context, Result};
use log::info;
use rand::seq::index::sample;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use recipe_adapt::contextgen::{Ablation, GenerationOutcome, OutcomeStatus, Pipeline};
use recipe_adapt::corpus::{load_corpus, CorpusFormat, CorpusStore, LoadOptions, Recipe};
use recipe_adapt::embedding::{embed, EmbeddingCache};
use recipe_adapt::metrics::{
    probe_distribution, Evaluator, MetricReport, ProbeDistribution, ProbeResult,
    DEFAULT_HF_FRACTION,
};
use recipe_adapt::retrieval::Retriever;
use recipe_adapt::session::SessionStore;
use serde::{Deserialize, Serialize};

use crate::config::RunConfig;
use crate::providers::Providers;

pub const CORPUS_FILE: &str = "corpus.jsonl";
pub const CACHE_FILE: &str = "embeddings.jsonl";
pub const ADAPTATIONS_FILE: &str = "adaptations.jsonl";
pub const MANIFEST_FILE: &str = "manifest.json";
pub const REPORT_FILE: &str = "report.json";
pub const SESSION_DIR: &str = "session";

fn load_options(cfg: &RunConfig) -> LoadOptions {
    LoadOptions {
        allowed_countries: (!cfg.countries.is_empty()).then(|| {
            cfg.countries
                .iter()
                .map(|c| c.trim().to_uppercase())
                .collect()
        }),
    }
}

/// Load a corpus file, or the `corpus.jsonl` of an ingest directory. Returns
/// the store and the cache path that belongs with it (`None` for a bare file).
pub fn open_corpus(path: &Path, cfg: &RunConfig) -> Result<(CorpusStore, Option<PathBuf>)> {
    if path.is_dir() {
        let file = path.join(CORPUS_FILE);
        let store = load_corpus(&file, CorpusFormat::Jsonl, &load_options(cfg))
            .with_context(|| format!("loading {}", file.display()))?;
        Ok((store, Some(path.join(CACHE_FILE))))
    } else {
        let store = load_corpus(path, CorpusFormat::from_path(path), &load_options(cfg))
            .with_context(|| format!("loading {}", path.display()))?;
        Ok((store, None))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct IngestSummary {
    pub records: usize,
    pub dropped: usize,
    pub countries: BTreeMap<String, usize>,
    pub cache_entries: usize,
    pub newly_embedded: usize,
}

/// Validate a corpus, copy it to `out` and fill the embedding cache there.
pub fn ingest(corpus: &Path, out: &Path, cfg: &RunConfig) -> Result<IngestSummary> {
    let (store, _) = open_corpus(corpus, cfg)?;
    fs::create_dir_all(out).with_context(|| format!("creating {}", out.display()))?;
    store.write_jsonl(&out.join(CORPUS_FILE))?;
    let providers = Providers::build(cfg)?;
    let cache = EmbeddingCache::open(out.join(CACHE_FILE))?;
    let texts: Vec<String> = store.iter().map(Recipe::document_text).collect();
    let provider = providers.embedder.as_ref();
    let newly_embedded = texts
        .iter()
        .collect::<BTreeSet<_>>()
        .into_iter()
        .filter(|t| !cache.contains(provider.identity(), t))
        .count();
    if !texts.is_empty() {
        let refs: Vec<&str> = texts.iter().map(String::as_str).collect();
        embed(&refs, provider, &cache)?;
    }
    cache.save()?;
    let countries = store
        .countries()
        .map(|c| (c.to_string(), store.partition(c).len()))
        .collect();
    Ok(IngestSummary {
        records: store.len(),
        dropped: store.dropped(),
        countries,
        cache_entries: cache.len(),
        newly_embedded,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FailureEntry {
    pub source_id: String,
    pub t: u32,
    pub cause: String,
}

/// Everything needed to re-run or evaluate an `adapt` run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub config: RunConfig,
    pub config_hash: String,
    pub seed: Option<u64>,
    pub providers: BTreeMap<String, String>,
    pub corpus: PathBuf,
    pub embedding_cache: PathBuf,
    pub sources: Vec<String>,
    pub adaptations: usize,
    pub failures: Vec<FailureEntry>,
}

impl Manifest {
    pub fn load(run: &Path) -> Result<Self> {
        let path = run.join(MANIFEST_FILE);
        let text =
            fs::read_to_string(&path).with_context(|| format!("reading {}", path.display()))?;
        serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))
    }
}

/// Seeded sample of source recipes, returned in id order.
pub fn sample_sources(store: &CorpusStore, cfg: &RunConfig) -> Vec<String> {
    let target = cfg.pipeline.target_country.to_uppercase();
    let wanted: BTreeSet<String> = cfg
        .source_countries
        .iter()
        .map(|c| c.trim().to_uppercase())
        .collect();
    let pool: Vec<&Recipe> = store
        .iter()
        .filter(|r| {
            if wanted.is_empty() {
                r.country != target
            } else {
                wanted.contains(&r.country)
            }
        })
        .collect();
    let mut picked: Vec<String> = match cfg.sample_size {
        Some(n) if n < pool.len() => {
            let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed.unwrap_or(0));
            sample(&mut rng, pool.len(), n)
                .into_iter()
                .map(|i| pool[i].id.clone())
                .collect()
        }
        _ => pool.iter().map(|r| r.id.clone()).collect(),
    };
    picked.sort();
    picked
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AdaptSummary {
    pub sources: usize,
    pub adaptations: usize,
    pub failures: usize,
}

/// Generate adaptations for the sampled sources into the run directory `out`.
pub fn adapt(corpus: &Path, out: &Path, cfg: &RunConfig) -> Result<AdaptSummary> {
    cfg.validate()?;
    ensure!(
        !out.join(ADAPTATIONS_FILE).exists(),
        "{} already holds a run; choose a new --out directory",
        out.display()
    );
    let (store, cache_path) = open_corpus(corpus, cfg)?;
    fs::create_dir_all(out).with_context(|| format!("creating {}", out.display()))?;
    let cache_path = cache_path.unwrap_or_else(|| out.join(CACHE_FILE));
    let corpus_path =
        fs::canonicalize(corpus).with_context(|| format!("resolving {}", corpus.display()))?;

    let providers = Providers::build(cfg)?;
    let cache = EmbeddingCache::open(&cache_path)?;
    let session = SessionStore::open(out.join(SESSION_DIR), providers.embedder.identity())?;
    let retriever = Retriever::new(&store, providers.embedder.as_ref(), &cache);
    let pipeline = Pipeline {
        config: cfg.effective_pipeline(),
        retriever: &retriever,
        scorer: &providers.scorer,
        generator: providers.generator.as_ref(),
        session: &session,
        templates: &providers.templates,
    };
    let sources = sample_sources(&store, cfg);
    if sources.is_empty() {
        bail!("no source recipes match the configured source countries");
    }
    info!(
        "adapting {} sources with {} workers",
        sources.len(),
        cfg.workers
    );

    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cfg.workers)
        .build()?;
    let results: Vec<Vec<GenerationOutcome>> = pool.install(|| {
        sources
            .par_iter()
            .map(|id| pipeline.generate_adaptations(store.get(id).expect("sampled ids exist")))
            .collect::<recipe_adapt::Result<_>>()
    })?;
    cache.save()?;

    let path = out.join(ADAPTATIONS_FILE);
    let mut w = BufWriter::new(
        File::create(&path).with_context(|| format!("creating {}", path.display()))?,
    );
    let mut failures = Vec::new();
    let mut adaptations = 0;
    for o in results.iter().flatten() {
        writeln!(w, "{}", serde_json::to_string(o)?)?;
        match &o.status {
            OutcomeStatus::Ok { .. } => adaptations += 1,
            OutcomeStatus::Failed { cause } => failures.push(FailureEntry {
                source_id: o.source_id.clone(),
                t: o.t,
                cause: cause.clone(),
            }),
        }
    }
    w.flush()?;

    let mut recorded = cfg.clone();
    recorded.corpus = Some(corpus_path.clone());
    let manifest = Manifest {
        config_hash: recorded.hash(),
        seed: cfg.seed,
        providers: providers.identities(),
        corpus: corpus_path,
        embedding_cache: cache_path,
        sources: sources.clone(),
        adaptations,
        failures: failures.clone(),
        config: recorded,
    };
    fs::write(
        out.join(MANIFEST_FILE),
        serde_json::to_string_pretty(&manifest)? + "\n",
    )?;
    Ok(AdaptSummary {
        sources: sources.len(),
        adaptations,
        failures: failures.len(),
    })
}

pub fn read_outcomes(run: &Path) -> Result<Vec<GenerationOutcome>> {
    let path = run.join(ADAPTATIONS_FILE);
    let f = File::open(&path).with_context(|| format!("no adaptations in {}", run.display()))?;
    let mut out = Vec::new();
    for (i, line) in BufReader::new(f).lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        out.push(
            serde_json::from_str(&line)
                .with_context(|| format!("{} line {}", path.display(), i + 1))?,
        );
    }
    ensure!(!out.is_empty(), "{} is empty", path.display());
    Ok(out)
}

/// Provider overrides for `evaluate`.
#[derive(Debug, Clone, Default)]
pub struct EvalOptions {
    pub classifier: Option<String>,
    pub token_embedder: Option<String>,
}

struct RunData {
    manifest: Manifest,
    store: CorpusStore,
    outcomes: Vec<GenerationOutcome>,
    providers: Providers,
    cache: EmbeddingCache,
}

impl RunData {
    fn load(run: &Path, opts: &EvalOptions) -> Result<Self> {
        let manifest = Manifest::load(run)?;
        let outcomes = read_outcomes(run)?;
        let mut cfg = manifest.config.clone();
        if let Some(c) = &opts.classifier {
            cfg.providers.classifier = c.clone();
        }
        if let Some(t) = &opts.token_embedder {
            cfg.providers.token_embedder = t.clone();
        }
        let (store, _) = open_corpus(&manifest.corpus, &cfg)?;
        let providers = Providers::build(&cfg)?;
        let cache = EmbeddingCache::open(&manifest.embedding_cache)?;
        Ok(Self {
            manifest,
            store,
            outcomes,
            providers,
            cache,
        })
    }

    fn runs(&self) -> Result<Vec<(&Recipe, Vec<GenerationOutcome>)>> {
        let mut grouped: BTreeMap<&str, Vec<GenerationOutcome>> = BTreeMap::new();
        for o in &self.outcomes {
            grouped
                .entry(o.source_id.as_str())
                .or_default()
                .push(o.clone());
        }
        grouped
            .into_iter()
            .map(|(id, outs)| {
                let r = self
                    .store
                    .get(id)
                    .with_context(|| format!("source `{id}` is missing from the corpus"))?;
                Ok((r, outs))
            })
            .collect()
    }

    fn evaluator(&self) -> Evaluator<'_> {
        let cfg = &self.manifest.config;
        let pipeline = cfg.effective_pipeline();
        Evaluator {
            config_label: Ablation::PRESETS
                .into_iter()
                .find(|p| Ablation::preset(p).is_ok_and(|a| a == pipeline.ablation))
                .unwrap_or("custom")
                .to_string(),
            store: &self.store,
            embedder: self.providers.embedder.as_ref(),
            cache: &self.cache,
            token_embedder: self.providers.token_embedder.as_deref(),
            classifier: self.providers.classifier.as_deref(),
            target_label: pipeline.target_country.clone(),
            lexicon: &self.providers.lexicon,
            k: pipeline.mmr.k.max(pipeline.generations as usize),
            hf_fraction: DEFAULT_HF_FRACTION,
        }
    }
}

/// Score a run and write `report.json` into it.
pub fn evaluate(run: &Path, opts: &EvalOptions) -> Result<MetricReport> {
    let data = RunData::load(run, opts)?;
    let runs = data.runs()?;
    let report = data.evaluator().evaluate(&runs)?;
    data.cache.save()?;
    fs::write(
        run.join(REPORT_FILE),
        serde_json::to_string_pretty(&report)? + "\n",
    )?;
    Ok(report)
}

/// Per-source context utilization and its distribution.
pub fn probe(run: &Path) -> Result<(Vec<(String, ProbeResult)>, ProbeDistribution)> {
    let data = RunData::load(run, &EvalOptions::default())?;
    let runs = data.runs()?;
    let ev = data.evaluator();
    let per_source = ev.probe_runs(&runs)?;
    let counts: Vec<usize> = per_source.iter().map(|(_, p)| p.distinct_count).collect();
    let dist = probe_distribution(&counts, ev.k)?;
    data.cache.save()?;
    Ok((per_source, dist))
}

/// Tab-separated `#1 .. #k  Avg.` table.
pub fn format_distribution(d: &ProbeDistribution) -> String {
    let header: Vec<String> = (1..=d.buckets.len())
        .map(|i| format!("#{i}"))
        .chain(["Avg.".into()])
        .collect();
    let row: Vec<String> = d
        .buckets
        .iter()
        .map(usize::to_string)
        .chain([format!("{:.2}", d.average)])
        .collect();
    format!("{}\n{}\n", header.join("\t"), row.join("\t"))
}
