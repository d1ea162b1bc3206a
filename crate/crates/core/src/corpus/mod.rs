//! Recipe corpus: records, the country-partitioned store, and loaders.

pub mod doc;
mod lexicon;
mod standardize;

use std::collections::{BTreeMap, BTreeSet};
use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

pub use lexicon::Lexicon;
pub use standardize::{fold_accents, standardize_ingredients, SourceKind, StandardIngredient};

use crate::error::{Error, Result};
use doc::{clean_item, clean_step, clean_title, render_recipe};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Recipe {
    pub id: String,
    pub title: String,
    /// Free-form text or a stringified list, exactly as found in the source.
    #[serde(rename = "ingredients")]
    pub ingredients_raw: String,
    pub steps: Vec<String>,
    pub country: String,
    #[serde(default)]
    pub source_kind: SourceKind,
}

impl Recipe {
    /// Display lines for the ingredient field.
    pub fn ingredient_lines(&self) -> Vec<String> {
        match standardize::parse_list_literal(&self.ingredients_raw) {
            Some(items) => items.iter().filter_map(|i| clean_item(i)).collect(),
            None => self
                .ingredients_raw
                .lines()
                .filter_map(clean_item)
                .collect(),
        }
    }

    pub fn clean_title(&self) -> String {
        clean_title(&self.title)
    }

    pub fn clean_steps(&self) -> Vec<String> {
        self.steps.iter().filter_map(|s| clean_step(s)).collect()
    }

    /// Canonical text used for embeddings, prompts and preservation scoring.
    pub fn document_text(&self) -> String {
        render_recipe(
            &self.clean_title(),
            &self.ingredient_lines(),
            &self.clean_steps(),
        )
    }

    pub fn standard_ingredients(&self, lex: &Lexicon) -> Vec<StandardIngredient> {
        standardize_ingredients(&self.ingredients_raw, self.source_kind, lex)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CorpusFormat {
    Jsonl,
    Csv,
}

impl CorpusFormat {
    /// Guess from the file extension; anything but `.csv` is JSONL.
    pub fn from_path(path: &Path) -> Self {
        match path.extension().and_then(|e| e.to_str()) {
            Some(e) if e.eq_ignore_ascii_case("csv") => Self::Csv,
            _ => Self::Jsonl,
        }
    }
}

#[derive(Debug, Clone, Default)]
pub struct LoadOptions {
    /// When set, any other country label is a parse error.
    pub allowed_countries: Option<BTreeSet<String>>,
}

/// Immutable, country-partitioned recipe collection.
#[derive(Debug, Clone, Default)]
pub struct CorpusStore {
    recipes: BTreeMap<String, Recipe>,
    partitions: BTreeMap<String, Vec<String>>,
    dropped: usize,
}

impl CorpusStore {
    pub fn from_recipes(recipes: impl IntoIterator<Item = Recipe>) -> Result<Self> {
        let mut store = Self::default();
        for r in recipes {
            store.insert(r)?;
        }
        Ok(store)
    }

    fn insert(&mut self, r: Recipe) -> Result<()> {
        if self.recipes.contains_key(&r.id) {
            return Err(Error::DuplicateId(r.id));
        }
        let ids = self.partitions.entry(r.country.clone()).or_default();
        let pos = ids.binary_search(&r.id).unwrap_or_else(|p| p);
        ids.insert(pos, r.id.clone());
        self.recipes.insert(r.id.clone(), r);
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.recipes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.recipes.is_empty()
    }

    /// Records skipped at load time for having no country label.
    pub fn dropped(&self) -> usize {
        self.dropped
    }

    pub fn get(&self, id: &str) -> Option<&Recipe> {
        self.recipes.get(id)
    }

    /// All recipes in ascending id order.
    pub fn iter(&self) -> impl Iterator<Item = &Recipe> {
        self.recipes.values()
    }

    /// Ids of one country's recipes, ascending.
    pub fn partition(&self, country: &str) -> &[String] {
        self.partitions.get(country).map_or(&[], Vec::as_slice)
    }

    pub fn countries(&self) -> impl Iterator<Item = &str> {
        self.partitions.keys().map(String::as_str)
    }

    /// Write every recipe as JSONL in id order.
    pub fn write_jsonl(&self, path: &Path) -> Result<()> {
        let f = File::create(path).map_err(|e| Error::io(path, e))?;
        let mut w = BufWriter::new(f);
        for r in self.iter() {
            let line = serde_json::to_string(r).expect("recipe serializes");
            writeln!(w, "{line}").map_err(|e| Error::io(path, e))?;
        }
        w.flush().map_err(|e| Error::io(path, e))
    }
}

#[derive(Deserialize)]
#[serde(untagged)]
enum TextOrList {
    Text(String),
    List(Vec<String>),
}

#[derive(Deserialize)]
struct RawRecord {
    id: String,
    title: String,
    ingredients: TextOrList,
    steps: TextOrList,
    #[serde(default)]
    country: Option<String>,
    #[serde(default)]
    source_kind: Option<SourceKind>,
}

#[derive(Deserialize)]
struct CsvRecord {
    id: String,
    title: String,
    ingredients: String,
    steps: String,
    #[serde(default)]
    country: Option<String>,
    #[serde(default)]
    source_kind: Option<SourceKind>,
}

impl From<CsvRecord> for RawRecord {
    fn from(c: CsvRecord) -> Self {
        let steps = if c.steps.trim_start().starts_with('[') {
            serde_json::from_str::<Vec<String>>(&c.steps)
                .map(TextOrList::List)
                .unwrap_or(TextOrList::Text(c.steps))
        } else {
            TextOrList::Text(c.steps)
        };
        RawRecord {
            id: c.id,
            title: c.title,
            ingredients: TextOrList::Text(c.ingredients),
            steps,
            country: c.country,
            source_kind: c.source_kind,
        }
    }
}

/// Outcome of validating one raw record.
enum Validated {
    Keep(Recipe),
    DropNoCountry,
}

fn validate(raw: RawRecord, record: usize, opts: &LoadOptions) -> Result<Validated> {
    let bad = |message: String| Error::Parse { record, message };
    let id = raw.id.trim().to_string();
    if id.is_empty() {
        return Err(bad("empty `id`".into()));
    }
    if raw.title.trim().is_empty() {
        return Err(bad(format!("recipe `{id}` has an empty `title`")));
    }
    let country = raw.country.unwrap_or_default().trim().to_uppercase();
    if country.is_empty() {
        return Ok(Validated::DropNoCountry);
    }
    if let Some(allowed) = &opts.allowed_countries {
        if !allowed.contains(&country) {
            return Err(bad(format!("undeclared country label `{country}`")));
        }
    }
    let ingredients_raw = match raw.ingredients {
        TextOrList::Text(t) => t,
        TextOrList::List(items) => items.join("\n"),
    };
    let steps = match raw.steps {
        TextOrList::Text(t) => t.lines().map(str::to_string).collect(),
        TextOrList::List(items) => items,
    }
    .into_iter()
    .filter(|s| !s.trim().is_empty())
    .collect();
    Ok(Validated::Keep(Recipe {
        id,
        title: raw.title,
        ingredients_raw,
        steps,
        country,
        source_kind: raw.source_kind.unwrap_or_default(),
    }))
}

/// Load and validate a corpus file.
///
/// Records with an empty country are skipped and counted in
/// [`CorpusStore::dropped`]. Record numbers in errors are 1-based (the line
/// for JSONL, the data row for CSV).
pub fn load_corpus(path: &Path, format: CorpusFormat, opts: &LoadOptions) -> Result<CorpusStore> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let mut store = CorpusStore::default();
    let accept = |raw: RawRecord, record: usize, store: &mut CorpusStore| -> Result<()> {
        match validate(raw, record, opts)? {
            Validated::Keep(r) => store.insert(r),
            Validated::DropNoCountry => {
                store.dropped += 1;
                Ok(())
            }
        }
    };
    match format {
        CorpusFormat::Jsonl => {
            for (i, line) in BufReader::new(file).lines().enumerate() {
                let line = line.map_err(|e| Error::io(path, e))?;
                if line.trim().is_empty() {
                    continue;
                }
                let raw: RawRecord = serde_json::from_str(&line).map_err(|e| Error::Parse {
                    record: i + 1,
                    message: e.to_string(),
                })?;
                accept(raw, i + 1, &mut store)?;
            }
        }
        CorpusFormat::Csv => {
            let mut reader = csv::Reader::from_reader(file);
            for (i, row) in reader.deserialize::<CsvRecord>().enumerate() {
                let row = row.map_err(|e| Error::Parse {
                    record: i + 1,
                    message: e.to_string(),
                })?;
                accept(row.into(), i + 1, &mut store)?;
            }
        }
    }
    Ok(store)
}
