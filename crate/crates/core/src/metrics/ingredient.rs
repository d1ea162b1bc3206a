use std::collections::{BTreeSet, HashMap, HashSet};

use serde::{Deserialize, Serialize};

use crate::corpus::StandardIngredient;
use crate::error::{Error, Result};

/// `|union| / sum of set sizes`. Each list is treated as a set.
pub fn ingredient_diversity(sets: &[Vec<StandardIngredient>]) -> Result<f64> {
    if sets.is_empty() {
        return Err(Error::Domain("no ingredient sets".into()));
    }
    let mut union = HashSet::new();
    let mut total = 0usize;
    for (i, s) in sets.iter().enumerate() {
        let uniq: HashSet<&str> = s.iter().map(StandardIngredient::as_str).collect();
        if uniq.is_empty() {
            return Err(Error::Domain(format!("ingredient set {i} is empty")));
        }
        total += uniq.len();
        union.extend(uniq);
    }
    Ok(union.len() as f64 / total as f64)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GlobalIngredientStats {
    /// Share of all occurrences that belong to the high-frequency names.
    pub hf_share: f64,
    pub across_input_diversity: f64,
    /// Distinct names divided by the mean list length.
    pub unique_count_normalized: f64,
    pub unique_count: usize,
    pub occurrences: usize,
    pub hf_names: Vec<String>,
}

pub const DEFAULT_HF_FRACTION: f64 = 0.01;

/// Pooled statistics over every ingredient list. The high-frequency names are
/// the top `hf_fraction` of distinct names by occurrence count (at least one
/// name), extended to every name tied with the last one.
pub fn global_ingredient_stats(
    lists: &[Vec<StandardIngredient>],
    hf_fraction: f64,
) -> Result<GlobalIngredientStats> {
    let mut counts: HashMap<&str, usize> = HashMap::new();
    let mut occurrences = 0usize;
    for l in lists {
        for ing in l {
            *counts.entry(ing.as_str()).or_default() += 1;
            occurrences += 1;
        }
    }
    if occurrences == 0 {
        return Err(Error::Domain("no ingredient occurrences".into()));
    }
    let mut freq: Vec<(&str, usize)> = counts.into_iter().collect();
    freq.sort_by(|a, b| b.1.cmp(&a.1).then_with(|| a.0.cmp(b.0)));
    let top = ((freq.len() as f64 * hf_fraction).ceil() as usize).clamp(1, freq.len());
    let cutoff = freq[top - 1].1;
    let hf: BTreeSet<&str> = freq
        .iter()
        .filter(|(_, c)| *c >= cutoff)
        .map(|(n, _)| *n)
        .collect();
    let hf_occ: usize = freq
        .iter()
        .filter(|(_, c)| *c >= cutoff)
        .map(|(_, c)| c)
        .sum();
    let mean_len = occurrences as f64 / lists.len() as f64;
    Ok(GlobalIngredientStats {
        hf_share: hf_occ as f64 / occurrences as f64,
        across_input_diversity: freq.len() as f64 / occurrences as f64,
        unique_count_normalized: freq.len() as f64 / mean_len,
        unique_count: freq.len(),
        occurrences,
        hf_names: hf.into_iter().map(String::from).collect(),
    })
}
