use std::collections::HashSet;

use crate::error::{Error, Result};

/// Lowercased whitespace tokens with punctuation removed.
pub fn tokenize(text: &str) -> Vec<String> {
    text.to_lowercase()
        .split_whitespace()
        .map(|t| {
            t.chars()
                .filter(|c| c.is_alphanumeric())
                .collect::<String>()
        })
        .filter(|t| !t.is_empty())
        .collect()
}

/// Unique-to-total n-gram ratio pooled over `texts`, averaged over `ns`.
/// An `n` with no n-grams at all is left out of the average.
pub fn unique_n<S: AsRef<str>>(texts: &[S], ns: &[usize]) -> Result<f64> {
    let tokens: Vec<Vec<String>> = texts.iter().map(|t| tokenize(t.as_ref())).collect();
    if tokens.iter().all(Vec::is_empty) {
        return Err(Error::Domain("unique-n needs at least one token".into()));
    }
    let mut ratios = Vec::with_capacity(ns.len());
    for &n in ns {
        if n == 0 {
            return Err(Error::Domain("n-gram order must be positive".into()));
        }
        let mut seen: HashSet<&[String]> = HashSet::new();
        let mut total = 0usize;
        for toks in &tokens {
            for gram in toks.windows(n) {
                seen.insert(gram);
                total += 1;
            }
        }
        if total > 0 {
            ratios.push(seen.len() as f64 / total as f64);
        }
    }
    if ratios.is_empty() {
        return Err(Error::Domain(
            "texts are shorter than every n-gram order".into(),
        ));
    }
    Ok(ratios.iter().sum::<f64>() / ratios.len() as f64)
}

pub const DEFAULT_NS: [usize; 3] = [1, 2, 3];

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tokenizer_strips_punctuation() {
        assert_eq!(
            tokenize("¡Hola, Mundo!  1. sal"),
            ["hola", "mundo", "1", "sal"]
        );
    }

    #[test]
    fn hand_counts() {
        assert_eq!(unique_n(&["a b", "a b"], &[1]).unwrap(), 0.5);
        assert_eq!(unique_n(&["a b", "c d"], &[1]).unwrap(), 1.0);
        // bigrams: "a b" twice -> 1/2; trigrams absent -> skipped.
        assert_eq!(unique_n(&["a b", "a b"], &[1, 2, 3]).unwrap(), 0.5);
    }

    #[test]
    fn duplication_law() {
        let text = "la sal y la pimienta";
        for n in 1..=3 {
            let one = unique_n(&[text], &[n]).unwrap();
            let k = 4;
            let many = unique_n(&vec![text; k], &[n]).unwrap();
            assert!((many - one / k as f64).abs() < 1e-12);
        }
    }

    #[test]
    fn empty_is_error() {
        assert!(unique_n(&["", " ,"], &[1]).is_err());
    }
}
