#![allow(dead_code)]

use std::fs;
use std::path::{Path, PathBuf};

use recipe_adapt_cli::RunConfig;
use serde_json::json;

const WORDS: [&str; 12] = [
    "tomate",
    "cebolla",
    "ajo",
    "pimiento",
    "arroz",
    "garbanzo",
    "patata",
    "huevo",
    "chorizo",
    "atun",
    "calabacin",
    "pollo",
];

fn record(id: &str, country: &str, i: usize) -> serde_json::Value {
    let ingredients: Vec<String> = (0..4)
        .map(|j| {
            format!(
                "{} g de {}",
                100 + 10 * j,
                WORDS[(i * 5 + j * 7) % WORDS.len()]
            )
        })
        .collect();
    json!({
        "id": id,
        "title": format!("Guiso de {} numero {i}", WORDS[i % WORDS.len()]),
        "ingredients": ingredients,
        "steps": [
            format!("Picar el {}", WORDS[(i + 3) % WORDS.len()]),
            format!("Cocer {} minutos", 10 + i),
            "Servir caliente",
        ],
        "country": country,
    })
}

/// Writes `n_target` ESP recipes and `n_sources` MEX recipes as JSONL.
pub fn write_corpus(dir: &Path, n_target: usize, n_sources: usize) -> PathBuf {
    let esp = (0..n_target).map(|i| record(&format!("esp-{i:02}"), "ESP", i));
    let mex = (0..n_sources).map(|i| record(&format!("mex-{i:02}"), "MEX", 100 + i));
    let lines: Vec<String> = esp.chain(mex).map(|r| r.to_string()).collect();
    let path = dir.join("corpus.jsonl");
    fs::write(&path, lines.join("\n") + "\n").unwrap();
    path
}

/// Offline configuration with a fixed seed.
pub fn mock_config(seed: u64) -> RunConfig {
    RunConfig {
        seed: Some(seed),
        mock_all: true,
        ..RunConfig::default()
    }
}
