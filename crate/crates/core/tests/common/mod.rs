#![allow(dead_code)]

use recipe_adapt::corpus::{CorpusStore, Recipe, SourceKind};

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

pub fn recipe(id: &str, country: &str, i: usize) -> Recipe {
    let ingredients: Vec<String> = (0..4)
        .map(|j| format!("{} {}", 100 + 10 * j, WORDS[(i * 5 + j * 7) % WORDS.len()]))
        .collect();
    Recipe {
        id: id.into(),
        title: format!("Guiso de {} numero {i}", WORDS[i % WORDS.len()]),
        ingredients_raw: ingredients.join("\n"),
        steps: vec![
            format!("Picar el {}", WORDS[(i + 3) % WORDS.len()]),
            format!("Cocer {} minutos", 10 + i),
            "Servir caliente".into(),
        ],
        country: country.into(),
        source_kind: SourceKind::Human,
    }
}

/// `n_target` ESP recipes plus `n_sources` MEX recipes.
pub fn synthetic_store(n_target: usize, n_sources: usize) -> CorpusStore {
    let esp = (0..n_target).map(|i| recipe(&format!("esp-{i:02}"), "ESP", i));
    let mex = (0..n_sources).map(|i| recipe(&format!("mex-{i:02}"), "MEX", 100 + i));
    CorpusStore::from_recipes(esp.chain(mex)).unwrap()
}
