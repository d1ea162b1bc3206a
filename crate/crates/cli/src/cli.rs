use std::path::PathBuf;

use anyhow::{Context, Result};
use clap::{Parser, Subcommand};

use crate::commands::{self, EvalOptions};
use crate::config::{Overrides, RunConfig};

#[derive(Debug, Parser)]
#[command(
    name = "recipe-adapt",
    version,
    about = "Retrieval-augmented cross-cultural recipe adaptation"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Validate a corpus and build its embedding cache.
    Ingest {
        /// Corpus file (.jsonl or .csv).
        #[arg(long)]
        corpus: Option<PathBuf>,
        /// Output directory for the normalized corpus and cache.
        #[arg(long)]
        out: PathBuf,
        #[command(flatten)]
        overrides: Overrides,
    },
    /// Generate adaptations for sampled source recipes.
    Adapt {
        /// Ingest directory or corpus file.
        #[arg(long)]
        corpus: Option<PathBuf>,
        /// New run directory.
        #[arg(long)]
        out: PathBuf,
        #[command(flatten)]
        overrides: Overrides,
    },
    /// Score a run and write report.json.
    Evaluate {
        run: PathBuf,
        /// Classifier overriding the run's (`disabled`, `mock`, or a URL).
        #[arg(long)]
        classifier: Option<String>,
        /// Token embedder for preservation.
        #[arg(long)]
        token_embedder: Option<String>,
    },
    /// Print the context utilization distribution of a run.
    Probe { run: PathBuf },
}

fn corpus_path(flag: Option<PathBuf>, cfg: &RunConfig) -> Result<PathBuf> {
    flag.or_else(|| cfg.corpus.clone())
        .context("--corpus is required (or set `corpus` in the config)")
}

pub fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Ingest {
            corpus,
            out,
            overrides,
        } => {
            let cfg = RunConfig::resolve(&overrides)?;
            let s = commands::ingest(&corpus_path(corpus, &cfg)?, &out, &cfg)?;
            println!("records\t{}\ndropped\t{}", s.records, s.dropped);
            for (c, n) in &s.countries {
                println!("country {c}\t{n}");
            }
            println!(
                "cache entries\t{}\nnewly embedded\t{}",
                s.cache_entries, s.newly_embedded
            );
        }
        Command::Adapt {
            corpus,
            out,
            overrides,
        } => {
            let cfg = RunConfig::resolve(&overrides)?;
            let s = commands::adapt(&corpus_path(corpus, &cfg)?, &out, &cfg)?;
            println!(
                "sources\t{}\nadaptations\t{}\nfailures\t{}\nrun\t{}",
                s.sources,
                s.adaptations,
                s.failures,
                out.display()
            );
        }
        Command::Evaluate {
            run,
            classifier,
            token_embedder,
        } => {
            let report = commands::evaluate(
                &run,
                &EvalOptions {
                    classifier,
                    token_embedder,
                },
            )?;
            for (name, v) in &report.aggregates {
                match v.value() {
                    Some(x) => println!("{name}\t{x:.4}"),
                    None => println!("{name}\tunavailable"),
                }
            }
            if let Some(p) = &report.probe {
                print!("{}", commands::format_distribution(p));
            }
            println!("report\t{}", run.join(commands::REPORT_FILE).display());
        }
        Command::Probe { run } => {
            let (_, dist) = commands::probe(&run)?;
            print!("{}", commands::format_distribution(&dist));
        }
    }
    Ok(())
}
