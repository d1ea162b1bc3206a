//! Prompt templates with `{name}` placeholders.

use std::fs;
use std::path::Path;

use crate::corpus::Recipe;
use crate::error::{Error, Result};

use super::format::AdaptedRecipe;

pub const CONTEXT: &str = "{context_str}";
pub const QUERY: &str = "{query_str}";
pub const HISTORY: &str = "{history_str}";
pub const RECIPE: &str = "{recipe_str}";
pub const TITLE: &str = "{title_str}";

/// Rendered in place of the history section when there is no prior output.
pub const EMPTY_HISTORY: &str = "(ninguna)";
pub const REFERENCE_TAG: &str = "[reference]";
pub const HISTORY_TAG: &str = "[history]";

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PromptTemplate {
    pub name: String,
    pub body: String,
}

impl PromptTemplate {
    pub fn new(name: impl Into<String>, body: impl Into<String>) -> Self {
        Self {
            name: name.into(),
            body: body.into(),
        }
    }

    pub fn from_file(path: &Path) -> Result<Self> {
        let body = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let name = path
            .file_stem()
            .map_or_else(|| "template".into(), |s| s.to_string_lossy().into_owned());
        Ok(Self { name, body })
    }

    /// Substitute each `(placeholder, value)` pair in a single left-to-right
    /// pass; inserted values are never rescanned. Every listed placeholder
    /// must occur exactly once, and `forbidden` ones not at all.
    pub fn render(&self, values: &[(&str, &str)], forbidden: &[&str]) -> Result<String> {
        for (ph, _) in values {
            let n = self.body.matches(ph).count();
            if n != 1 {
                return Err(Error::Template(format!(
                    "template `{}` must contain {ph} exactly once (found {n})",
                    self.name
                )));
            }
        }
        for ph in forbidden {
            if self.body.contains(ph) {
                return Err(Error::Template(format!(
                    "template `{}` contains {ph}, which this mode does not fill",
                    self.name
                )));
            }
        }
        let mut out = String::with_capacity(self.body.len());
        let mut rest = self.body.as_str();
        loop {
            let next = values
                .iter()
                .filter_map(|(ph, v)| rest.find(ph).map(|pos| (pos, *ph, *v)))
                .min_by_key(|(pos, _, _)| *pos);
            match next {
                Some((pos, ph, v)) => {
                    out.push_str(&rest[..pos]);
                    out.push_str(v);
                    rest = &rest[pos + ph.len()..];
                }
                None => {
                    out.push_str(rest);
                    break;
                }
            }
        }
        Ok(out)
    }
}

/// Which sections an adaptation prompt carries.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AssemblyMode {
    /// Context, query and contrastive history.
    Contrastive,
    /// Context and query only.
    Plain,
}

/// The four prompts used by the pipeline.
#[derive(Debug, Clone)]
pub struct Templates {
    pub contrastive: PromptTemplate,
    pub plain: PromptTemplate,
    pub rewrite_title: PromptTemplate,
    pub rewrite_cultural: PromptTemplate,
}

impl Default for Templates {
    fn default() -> Self {
        Self {
            contrastive: PromptTemplate::new(
                "contrastive",
                include_str!("../../templates/contrastive.txt"),
            ),
            plain: PromptTemplate::new("plain", include_str!("../../templates/plain.txt")),
            rewrite_title: PromptTemplate::new(
                "rewrite_title",
                include_str!("../../templates/rewrite_title.txt"),
            ),
            rewrite_cultural: PromptTemplate::new(
                "rewrite_cultural",
                include_str!("../../templates/rewrite_cultural.txt"),
            ),
        }
    }
}

impl Templates {
    /// Defaults, with any of `contrastive.txt`, `plain.txt`,
    /// `rewrite_title.txt`, `rewrite_cultural.txt` found in `dir` replacing
    /// the built-in text.
    pub fn from_dir(dir: &Path) -> Result<Self> {
        let mut t = Self::default();
        for (file, slot) in [
            ("contrastive.txt", &mut t.contrastive),
            ("plain.txt", &mut t.plain),
            ("rewrite_title.txt", &mut t.rewrite_title),
            ("rewrite_cultural.txt", &mut t.rewrite_cultural),
        ] {
            let p = dir.join(file);
            if p.exists() {
                *slot = PromptTemplate::from_file(&p)?;
            }
        }
        Ok(t)
    }
}

fn history_entry(a: &AdaptedRecipe) -> String {
    format!(
        "{HISTORY_TAG}\nNombre: {}\nIngredientes: {}",
        a.title,
        a.ingredients.join(", ")
    )
}

/// Fill an adaptation template.
///
/// Each context recipe becomes a `[reference]` block; each history entry (the
/// last `history_limit` of them) a `[history]` block with title and
/// ingredients. Blocks are separated by a blank line.
pub fn assemble_prompt(
    template: &PromptTemplate,
    mode: AssemblyMode,
    contexts: &[&Recipe],
    source: &Recipe,
    history: &[AdaptedRecipe],
    history_limit: usize,
) -> Result<String> {
    let context_str = contexts
        .iter()
        .map(|r| format!("{REFERENCE_TAG}\n{}", r.document_text()))
        .collect::<Vec<_>>()
        .join("\n\n");
    let query_str = source.document_text();
    match mode {
        AssemblyMode::Plain => {
            template.render(&[(CONTEXT, &context_str), (QUERY, &query_str)], &[HISTORY])
        }
        AssemblyMode::Contrastive => {
            let recent = &history[history.len().saturating_sub(history_limit)..];
            let history_str = if recent.is_empty() {
                EMPTY_HISTORY.to_string()
            } else {
                recent
                    .iter()
                    .map(history_entry)
                    .collect::<Vec<_>>()
                    .join("\n\n")
            };
            template.render(
                &[
                    (CONTEXT, &context_str),
                    (QUERY, &query_str),
                    (HISTORY, &history_str),
                ],
                &[],
            )
        }
    }
}

/// Prompt asking for a fresh title from the recipe body alone.
pub fn regenerate_title_prompt(template: &PromptTemplate, source: &Recipe) -> Result<String> {
    let mut body = format!("Ingredientes: {}", source.ingredient_lines().join(", "));
    let steps = source.clean_steps();
    if !steps.is_empty() {
        body.push_str(". Pasos: ");
        body.push_str(&steps.join(" "));
    }
    template.render(&[(RECIPE, &body)], &[])
}

pub fn cultural_title_prompt(template: &PromptTemplate, source: &Recipe) -> Result<String> {
    template.render(&[(TITLE, &source.clean_title())], &[])
}
