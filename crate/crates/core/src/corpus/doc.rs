//! Canonical plain-text layout shared by corpus documents, prompts and parsed
//! generator output.

use std::sync::LazyLock;

use regex::Regex;

static STEP_NUMBER: LazyLock<Regex> =
    LazyLock::new(|| Regex::new(r"^\d+\s*[.)]\s+|^\d+\s*[.)]$").expect("valid regex"));

const BULLETS: &[char] = &['-', '*', '•', '·', '+', '\u{2013}', '\u{2014}'];

/// Collapse internal whitespace (including newlines) and trim.
pub fn clean_field(s: &str) -> String {
    s.split_whitespace().collect::<Vec<_>>().join(" ")
}

pub fn clean_title(s: &str) -> String {
    let s = clean_field(s);
    s.trim_matches(|c: char| {
        c.is_whitespace() || matches!(c, '*' | '"' | '\'' | '[' | ']' | '#' | '«' | '»')
    })
    .to_string()
}

/// Strip leading bullet markers. Returns `None` for items that end up empty.
pub fn clean_item(s: &str) -> Option<String> {
    let mut s = clean_field(s);
    loop {
        let t = s.trim_start_matches(BULLETS).trim_start();
        if t.len() == s.len() {
            break;
        }
        s = t.to_string();
    }
    (!s.is_empty()).then_some(s)
}

/// Strip leading bullets and step numbers such as `3.` or `2)`.
pub fn clean_step(s: &str) -> Option<String> {
    let mut s = clean_item(s)?;
    loop {
        let stripped = STEP_NUMBER.replace(&s, "");
        if stripped.len() == s.len() {
            break;
        }
        s = clean_item(&stripped)?;
    }
    Some(s)
}

/// Render a recipe in the `Nombre / Ingredientes / Pasos` layout, one item
/// per line and no blank lines.
pub fn render_recipe(title: &str, ingredients: &[String], steps: &[String]) -> String {
    let mut out = format!("Nombre: {title}\nIngredientes:\n");
    for i in ingredients {
        out.push_str("- ");
        out.push_str(i);
        out.push('\n');
    }
    out.push_str("Pasos:\n");
    for (n, s) in steps.iter().enumerate() {
        out.push_str(&format!("{}. {s}\n", n + 1));
    }
    out.pop();
    out
}
