//! Editable word lists that drive ingredient standardization.
//!
//! Defaults are compiled in from `data/`. A directory holding files with the
//! same names overrides them file by file.

use std::collections::{HashMap, HashSet};
use std::fs;
use std::path::Path;

use super::standardize::fold_accents;
use crate::error::{Error, Result};

const UNITS: &str = include_str!("../../data/units.txt");
const QUANTITIES: &str = include_str!("../../data/quantities.txt");
const FILLERS: &str = include_str!("../../data/fillers.txt");
const MODIFIERS: &str = include_str!("../../data/modifiers.txt");
const TYPOS: &str = include_str!("../../data/typos.tsv");
const PLURALS: &str = include_str!("../../data/plurals.tsv");

#[derive(Debug, Clone)]
pub struct Lexicon {
    pub(crate) units: HashSet<String>,
    pub(crate) quantities: HashSet<String>,
    /// Folded filler phrases, longest first.
    pub(crate) fillers: Vec<String>,
    pub(crate) modifiers: HashSet<String>,
    /// Lowercased `(from, to)` pairs applied before accent folding.
    pub(crate) typos: Vec<(String, String)>,
    pub(crate) plural_exceptions: HashMap<String, String>,
}

fn entries(text: &str) -> impl Iterator<Item = &str> {
    text.lines()
        .map(str::trim)
        .filter(|l| !l.is_empty() && !l.starts_with('#'))
}

fn word_set(text: &str) -> HashSet<String> {
    entries(text)
        .map(|w| fold_accents(&w.to_lowercase()))
        .collect()
}

fn pairs(text: &str, fold: bool) -> Vec<(String, String)> {
    // Keep untrimmed fields so mappings may carry meaningful whitespace.
    text.lines()
        .filter(|l| !l.trim().is_empty() && !l.trim_start().starts_with('#'))
        .map(|l| match l.split_once('\t') {
            Some((a, b)) => (a.to_lowercase(), b.to_lowercase()),
            None => (l.trim().to_lowercase(), l.trim().to_lowercase()),
        })
        .map(|(a, b)| {
            if fold {
                (fold_accents(&a), fold_accents(&b))
            } else {
                (a, b)
            }
        })
        .collect()
}

impl Default for Lexicon {
    fn default() -> Self {
        Self::from_texts(UNITS, QUANTITIES, FILLERS, MODIFIERS, TYPOS, PLURALS)
    }
}

impl Lexicon {
    fn from_texts(
        units: &str,
        quantities: &str,
        fillers: &str,
        modifiers: &str,
        typos: &str,
        plurals: &str,
    ) -> Self {
        let mut fillers: Vec<String> = entries(fillers)
            .map(|w| fold_accents(&w.to_lowercase()))
            .collect();
        fillers.sort_by(|a, b| b.len().cmp(&a.len()).then(a.cmp(b)));
        fillers.dedup();
        Self {
            units: word_set(units),
            quantities: word_set(quantities),
            fillers,
            modifiers: word_set(modifiers),
            typos: pairs(typos, false),
            plural_exceptions: pairs(plurals, true).into_iter().collect(),
        }
    }

    /// Load tables from `dir`, falling back to the built-in default for any
    /// file that is absent.
    pub fn from_dir(dir: &Path) -> Result<Self> {
        let read = |name: &str, default: &'static str| -> Result<String> {
            let p = dir.join(name);
            if p.exists() {
                fs::read_to_string(&p).map_err(|e| Error::io(&p, e))
            } else {
                Ok(default.to_string())
            }
        };
        Ok(Self::from_texts(
            &read("units.txt", UNITS)?,
            &read("quantities.txt", QUANTITIES)?,
            &read("fillers.txt", FILLERS)?,
            &read("modifiers.txt", MODIFIERS)?,
            &read("typos.tsv", TYPOS)?,
            &read("plurals.tsv", PLURALS)?,
        ))
    }

    pub fn is_unit(&self, token: &str) -> bool {
        self.units.contains(token)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_are_folded() {
        let lex = Lexicon::default();
        assert!(lex.is_unit("punado"));
        assert!(lex.modifiers.contains("pequeno"));
        assert!(lex.fillers.iter().any(|f| f == "al gusto"));
        assert_eq!(
            lex.plural_exceptions.get("anis").map(String::as_str),
            Some("anis")
        );
    }

    #[test]
    fn directory_overrides_single_file() {
        let dir = tempfile::tempdir().unwrap();
        fs::write(dir.path().join("units.txt"), "jarra\n").unwrap();
        let lex = Lexicon::from_dir(dir.path()).unwrap();
        assert!(lex.is_unit("jarra"));
        assert!(!lex.is_unit("taza"));
        assert!(lex.modifiers.contains("mediana"));
    }
}
