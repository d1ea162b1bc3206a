use serde::{Deserialize, Serialize};

use crate::corpus::doc::{clean_item, clean_step, clean_title, render_recipe};
use crate::corpus::{standardize_ingredients, Lexicon, SourceKind, StandardIngredient};
use crate::error::{Error, Result};

/// A generator output parsed into its three sections.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AdaptedRecipe {
    pub title: String,
    pub ingredients: Vec<String>,
    pub steps: Vec<String>,
    /// The generator text this was parsed from.
    pub raw: String,
    /// Generation index within the source recipe's run.
    pub t: u32,
}

impl AdaptedRecipe {
    /// Canonical rendering with steps numbered from 1.
    pub fn text(&self) -> String {
        render_recipe(&self.title, &self.ingredients, &self.steps)
    }

    /// `Nombre: <title>. Ingredientes: a, b, ...`, the classifier input.
    pub fn title_and_ingredients(&self) -> String {
        format!(
            "Nombre: {}. Ingredientes: {}",
            self.title,
            self.ingredients.join(", ")
        )
    }

    pub fn standard_ingredients(&self, lex: &Lexicon) -> Vec<StandardIngredient> {
        standardize_ingredients(&self.ingredients.join("\n"), SourceKind::Generated, lex)
    }
}

const HEADERS: [(&str, &str); 3] = [
    ("nombre:", "Nombre:"),
    ("ingredientes:", "Ingredientes:"),
    ("pasos:", "Pasos:"),
];

/// If `line` opens the section keyed by `key`, return the text following the header.
fn header_rest(line: &str, key: &str) -> Option<String> {
    let stripped =
        line.trim_start_matches(|c: char| c.is_whitespace() || matches!(c, '*' | '#' | '-' | '_'));
    let lower = stripped.to_lowercase();
    if !lower.starts_with(key) {
        return None;
    }
    // The key is ASCII, so byte offsets agree between `lower` and `stripped`.
    let rest = &stripped[key.len()..];
    Some(rest.trim_start_matches(['*', '_']).trim().to_string())
}

/// Split a single comma-separated ingredient line, leaving decimal commas.
fn split_inline_list(line: &str) -> Vec<String> {
    let mut parts = Vec::new();
    let mut cur = String::new();
    let chars: Vec<char> = line.chars().collect();
    for (i, &c) in chars.iter().enumerate() {
        if c == ',' && chars.get(i + 1).is_some_and(|n| n.is_whitespace()) {
            parts.push(std::mem::take(&mut cur));
        } else {
            cur.push(c);
        }
    }
    parts.push(cur);
    parts.iter().filter_map(|p| clean_item(p)).collect()
}

/// Parse `Nombre: / Ingredientes: / Pasos:` output.
///
/// Headers are located in order and matched case-insensitively, ignoring
/// markdown emphasis. Steps are renumbered from 1 by position.
pub fn parse_recipe(raw: &str, t: u32) -> Result<AdaptedRecipe> {
    let lines: Vec<&str> = raw.lines().collect();
    let mut starts: [(usize, String); 3] = Default::default();
    let mut from = 0;
    for (slot, (key, display)) in HEADERS.iter().enumerate() {
        let found = lines[from..]
            .iter()
            .enumerate()
            .find_map(|(i, l)| header_rest(l, key).map(|rest| (from + i, rest)));
        match found {
            Some((idx, rest)) => {
                starts[slot] = (idx, rest);
                from = idx + 1;
            }
            None => {
                return Err(Error::RecipeFormat {
                    missing: display,
                    raw: raw.to_string(),
                })
            }
        }
    }

    let body = |slot: usize| -> Vec<String> {
        let (idx, rest) = &starts[slot];
        let end = if slot + 1 < 3 {
            starts[slot + 1].0
        } else {
            lines.len()
        };
        std::iter::once(rest.clone())
            .chain(lines[idx + 1..end].iter().map(|l| l.to_string()))
            .filter(|l| !l.trim().is_empty())
            .collect()
    };

    let title_lines = body(0);
    let title = clean_title(title_lines.first().map_or("", String::as_str));
    if title.is_empty() {
        return Err(Error::RecipeFormat {
            missing: "Nombre:",
            raw: raw.to_string(),
        });
    }

    let mut ingredients: Vec<String> = body(1).iter().filter_map(|l| clean_item(l)).collect();
    if ingredients.len() == 1 && ingredients[0].contains(", ") {
        ingredients = split_inline_list(&ingredients[0]);
    }

    let steps = body(2).iter().filter_map(|l| clean_step(l)).collect();

    Ok(AdaptedRecipe {
        title,
        ingredients,
        steps,
        raw: raw.to_string(),
        t,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minimal_output() {
        let a = parse_recipe("Nombre: X\nIngredientes: a\nb\nPasos:\n1. p\n2. q", 0).unwrap();
        assert_eq!(a.title, "X");
        assert_eq!(a.ingredients, ["a", "b"]);
        assert_eq!(a.steps, ["p", "q"]);
    }

    #[test]
    fn missing_steps_header() {
        let err = parse_recipe("Nombre: X\nIngredientes: a", 0).unwrap_err();
        assert!(
            matches!(err, Error::RecipeFormat { missing: "Pasos:", raw } if raw.contains("Nombre"))
        );
    }

    #[test]
    fn headers_must_appear_in_order() {
        assert!(parse_recipe("Pasos:\n1. x\nNombre: T\nIngredientes: a", 0).is_err());
    }

    #[test]
    fn renumbers_steps() {
        let a = parse_recipe(
            "Nombre: X\nIngredientes:\n- a\nPasos:\n1. uno\n3. dos\n4. tres",
            0,
        )
        .unwrap();
        assert_eq!(a.steps, ["uno", "dos", "tres"]);
        assert!(a.text().ends_with("1. uno\n2. dos\n3. tres"));
    }

    #[test]
    fn markdown_and_whitespace_tolerated() {
        let raw = "\n  **Nombre:** Tortilla de patatas  \n\n**Ingredientes:**\n* 4 huevos\n* 2 patatas\n\n**Pasos:**\n1) Pelar.\n2) Freír.\n";
        let a = parse_recipe(raw, 3).unwrap();
        assert_eq!(a.title, "Tortilla de patatas");
        assert_eq!(a.ingredients, ["4 huevos", "2 patatas"]);
        assert_eq!(a.steps, ["Pelar.", "Freír."]);
        assert_eq!(a.t, 3);
    }

    #[test]
    fn inline_comma_list_is_split() {
        let a = parse_recipe(
            "Nombre: X\nIngredientes: huevo, 1,5 kg de patata, sal\nPasos:\n1. p",
            0,
        )
        .unwrap();
        assert_eq!(a.ingredients, ["huevo", "1,5 kg de patata", "sal"]);
    }

    #[test]
    fn empty_title_rejected() {
        assert!(parse_recipe("Nombre:\nIngredientes: a\nPasos:\n1. p", 0).is_err());
    }
}
