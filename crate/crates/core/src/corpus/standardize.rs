//! Rule-based reduction of raw ingredient text to standardized names.
//!
//! Stages: lowercase, fraction glyphs, typo table, accent folding, filler
//! phrases, source-dependent list splitting, then per item: parentheticals,
//! conjunction split, quantity/unit prefix removal, modifiers, singular form.
//! Per-item cleaning is iterated to a fixed point, so cleaning an already
//! clean name is a no-op.

use std::collections::HashSet;

use serde::{Deserialize, Serialize};
use unicode_normalization::char::is_combining_mark;
use unicode_normalization::UnicodeNormalization;

use super::lexicon::Lexicon;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum SourceKind {
    #[default]
    Human,
    Generated,
}

/// A lowercase, accent-free, singular ingredient name.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct StandardIngredient(String);

impl StandardIngredient {
    pub fn as_str(&self) -> &str {
        &self.0
    }
}

/// Wraps a name that is already standardized; no cleaning is applied.
impl From<&str> for StandardIngredient {
    fn from(name: &str) -> Self {
        Self(name.to_string())
    }
}

impl std::fmt::Display for StandardIngredient {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

const FRACTIONS: &[(char, &str)] = &[
    ('½', "1/2"),
    ('⅓', "1/3"),
    ('⅔', "2/3"),
    ('¼', "1/4"),
    ('¾', "3/4"),
    ('⅕', "1/5"),
    ('⅛', "1/8"),
    ('⅜', "3/8"),
    ('⅝', "5/8"),
    ('⅞', "7/8"),
];

const CONJUNCTIONS: &[&str] = &["y", "e"];
const LEADING_LINKS: &[&str] = &["de", "del", "la", "el", "los", "las", "a"];
const FIXED_POINT_ROUNDS: usize = 6;

/// NFD-decompose and drop combining marks (`á` → `a`, `ñ` → `n`).
pub fn fold_accents(s: &str) -> String {
    s.nfd().filter(|c| !is_combining_mark(*c)).collect()
}

fn normalize_fractions(s: &str) -> String {
    let mut out = String::with_capacity(s.len());
    for c in s.chars() {
        match FRACTIONS.iter().find(|(g, _)| *g == c) {
            Some((_, ascii)) => {
                if out.chars().last().is_some_and(|p| p.is_ascii_digit()) {
                    out.push(' ');
                }
                out.push_str(ascii);
            }
            None => out.push(c),
        }
    }
    out
}

/// Remove filler phrases occurring on word boundaries.
fn remove_fillers(s: &str, lex: &Lexicon) -> String {
    let mut padded = format!(" {} ", s.split_whitespace().collect::<Vec<_>>().join(" "));
    for f in &lex.fillers {
        let needle = format!(" {f} ");
        while let Some(pos) = padded.find(&needle) {
            padded.replace_range(pos..pos + needle.len(), " ");
        }
    }
    padded.trim().to_string()
}

/// Parse a stringified list literal such as `['a', "b"]`.
pub(crate) fn parse_list_literal(s: &str) -> Option<Vec<String>> {
    let mut chars = s.trim().chars().peekable();
    if chars.next()? != '[' {
        return None;
    }
    let mut items = Vec::new();
    loop {
        while chars.peek().is_some_and(|c| c.is_whitespace()) {
            chars.next();
        }
        match chars.next()? {
            ']' => break,
            q @ ('\'' | '"') => {
                let mut item = String::new();
                loop {
                    match chars.next()? {
                        '\\' => item.push(chars.next()?),
                        c if c == q => break,
                        c => item.push(c),
                    }
                }
                items.push(item);
                while chars.peek().is_some_and(|c| c.is_whitespace()) {
                    chars.next();
                }
                match chars.next()? {
                    ',' => continue,
                    ']' => break,
                    _ => return None,
                }
            }
            _ => return None,
        }
    }
    chars.all(char::is_whitespace).then_some(items)
}

/// Split on commas that are not decimal separators.
fn split_commas(s: &str) -> Vec<String> {
    let chars: Vec<char> = s.chars().collect();
    let mut parts = Vec::new();
    let mut cur = String::new();
    for (i, &c) in chars.iter().enumerate() {
        let decimal = c == ','
            && i > 0
            && chars[i - 1].is_ascii_digit()
            && chars.get(i + 1).is_some_and(|n| n.is_ascii_digit());
        if c == ',' && !decimal {
            parts.push(std::mem::take(&mut cur));
        } else {
            cur.push(c);
        }
    }
    parts.push(cur);
    parts
}

fn drop_parentheticals(s: &str) -> String {
    let mut out = String::new();
    let mut depth = 0usize;
    for c in s.chars() {
        match c {
            '(' | '[' => depth += 1,
            ')' | ']' => {
                depth = depth.saturating_sub(1);
                out.push(' ');
            }
            _ if depth == 0 => out.push(c),
            _ => {}
        }
    }
    out
}

/// Split bullet-style generated text on newlines and `-`/`*`/`•` markers.
fn split_bullets(s: &str) -> Vec<String> {
    let mut items = Vec::new();
    for line in s.lines() {
        let mut cur = String::new();
        let chars: Vec<char> = line.chars().collect();
        for (i, &c) in chars.iter().enumerate() {
            let at_boundary = i == 0 || chars[i - 1].is_whitespace();
            let followed = chars.get(i + 1).is_none_or(|n| n.is_whitespace());
            if matches!(c, '-' | '*' | '•') && at_boundary && followed {
                items.push(std::mem::take(&mut cur));
            } else {
                cur.push(c);
            }
        }
        items.push(cur);
    }
    items
}

fn is_quantity(token: &str, lex: &Lexicon) -> bool {
    token.chars().any(|c| c.is_ascii_digit()) || lex.quantities.contains(token)
}

fn singular(token: &str, lex: &Lexicon) -> String {
    if let Some(s) = lex.plural_exceptions.get(token) {
        return s.clone();
    }
    if token.chars().count() < 4 || !token.ends_with('s') || token.ends_with("ss") {
        return token.to_string();
    }
    if let Some(stem) = token.strip_suffix("ces") {
        return format!("{stem}z");
    }
    if let Some(stem) = token.strip_suffix("es") {
        if stem.ends_with(['l', 'n', 'r', 'd', 'j', 'y']) {
            return stem.to_string();
        }
    }
    token[..token.len() - 1].to_string()
}

/// One pass of per-item cleaning; may split an item into several names.
fn clean_once(item: &str, lex: &Lexicon) -> Vec<String> {
    let s = remove_fillers(&drop_parentheticals(item), lex);
    let tokens: Vec<String> = s
        .split(|c: char| !(c.is_ascii_alphanumeric() || matches!(c, '/' | '.' | ',')))
        .map(|t| t.trim_matches(|c: char| matches!(c, '.' | ',' | '/')))
        .filter(|t| !t.is_empty())
        .map(str::to_string)
        .collect();

    let mut groups: Vec<Vec<String>> = vec![Vec::new()];
    for t in tokens {
        if CONJUNCTIONS.contains(&t.as_str()) {
            groups.push(Vec::new());
        } else {
            groups.last_mut().expect("nonempty").push(t);
        }
    }

    groups
        .into_iter()
        .filter_map(|group| {
            let mut toks: Vec<&str> = group.iter().map(String::as_str).collect();
            // Leading "<quantity> <unit> de" chains, including "1 a 2" ranges.
            while let Some(first) = toks.first().copied() {
                let range_link = first == "a" && toks.get(1).is_some_and(|n| is_quantity(n, lex));
                if is_quantity(first, lex)
                    || lex.is_unit(first)
                    || LEADING_LINKS.contains(&first)
                    || range_link
                {
                    toks.remove(0);
                } else {
                    break;
                }
            }
            let kept: Vec<String> = toks
                .into_iter()
                .filter(|t| {
                    !lex.is_unit(t)
                        && !lex.modifiers.contains(*t)
                        && !t.chars().any(|c| c.is_ascii_digit())
                })
                .map(|t| {
                    t.chars()
                        .filter(char::is_ascii_lowercase)
                        .collect::<String>()
                })
                .filter(|t| !t.is_empty())
                .map(|t| singular(&t, lex))
                .collect();
            let mut kept = kept;
            while kept
                .last()
                .is_some_and(|t| LEADING_LINKS.contains(&t.as_str()))
            {
                kept.pop();
            }
            (!kept.is_empty()).then(|| kept.join(" "))
        })
        .collect()
}

fn clean_to_fixed_point(item: &str, lex: &Lexicon) -> Vec<String> {
    let mut names = clean_once(item, lex);
    for _ in 0..FIXED_POINT_ROUNDS {
        let next: Vec<String> = names.iter().flat_map(|n| clean_once(n, lex)).collect();
        if next == names {
            break;
        }
        names = next;
    }
    names
}

/// Reduce raw ingredient text to a deduplicated, order-preserving list of
/// standardized names.
pub fn standardize_ingredients(
    raw: &str,
    kind: SourceKind,
    lex: &Lexicon,
) -> Vec<StandardIngredient> {
    let mut text = normalize_fractions(&raw.to_lowercase());
    for (from, to) in &lex.typos {
        if !from.is_empty() {
            text = text.replace(from.as_str(), to);
        }
    }
    let text = fold_accents(&text);

    let items: Vec<String> = match kind {
        SourceKind::Generated => split_bullets(&text)
            .into_iter()
            .map(|i| cut_trailing(&i))
            .collect(),
        SourceKind::Human => match parse_list_literal(&text) {
            Some(elems) => elems.iter().map(|e| cut_trailing(e)).collect(),
            None => split_bullets(&text)
                .into_iter()
                .flat_map(|l| l.split(';').flat_map(split_commas).collect::<Vec<_>>())
                .collect(),
        },
    };

    let mut seen = HashSet::new();
    items
        .iter()
        .flat_map(|i| clean_to_fixed_point(&remove_fillers(i, lex), lex))
        .filter(|n| seen.insert(n.clone()))
        .map(StandardIngredient)
        .collect()
}

/// Keep only the part before a parenthesis or a non-decimal comma.
fn cut_trailing(item: &str) -> String {
    let head = item.split('(').next().unwrap_or_default();
    split_commas(head).into_iter().next().unwrap_or_default()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn names(raw: &str, kind: SourceKind) -> Vec<String> {
        standardize_ingredients(raw, kind, &Lexicon::default())
            .into_iter()
            .map(|s| s.0)
            .collect()
    }

    #[test]
    fn quantity_unit_prefix() {
        assert_eq!(names("200 g de Azúcar", SourceKind::Human), ["azucar"]);
    }

    #[test]
    fn conjunction_split() {
        assert_eq!(
            names("ajo y cebolla", SourceKind::Human),
            ["ajo", "cebolla"]
        );
    }

    #[test]
    fn filler_removed() {
        assert_eq!(names("sal al gusto", SourceKind::Human), ["sal"]);
    }

    #[test]
    fn empty_input() {
        assert!(names("", SourceKind::Human).is_empty());
        assert!(names("   \n ", SourceKind::Generated).is_empty());
    }

    #[test]
    fn mojibake_fixed() {
        assert_eq!(names("1 taza de AZÃºCAR", SourceKind::Human), ["azucar"]);
    }

    #[test]
    fn list_literal_parsing() {
        assert_eq!(
            parse_list_literal(r#"['a', "b\"c" ,'d']"#),
            Some(vec!["a".to_string(), "b\"c".into(), "d".into()])
        );
        assert_eq!(parse_list_literal("[]"), Some(vec![]));
        assert_eq!(parse_list_literal("['a' 'b']"), None);
        assert_eq!(parse_list_literal("['a'] x"), None);
        assert_eq!(parse_list_literal("a, b"), None);
    }

    #[test]
    fn singular_rules() {
        let lex = Lexicon::default();
        for (p, s) in [
            ("cebollas", "cebolla"),
            ("limones", "limon"),
            ("tomates", "tomate"),
            ("nueces", "nuez"),
            ("chiles", "chile"),
            ("anis", "anis"),
            ("sal", "sal"),
            ("mas", "mas"),
        ] {
            assert_eq!(singular(p, &lex), s, "{p}");
        }
    }
}
