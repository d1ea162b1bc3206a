use serde::{Deserialize, Serialize};

use crate::contextgen::AdaptedRecipe;
use crate::error::{Error, Result};

/// The outputs generated for one source recipe under one configuration.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AdaptationSet {
    pub source_recipe_id: String,
    pub config: String,
    pub adaptations: Vec<AdaptedRecipe>,
}

/// Unweighted mean of `metric` over the sets. Errors name the offending
/// source.
pub fn per_input_diversity<F>(sets: &[AdaptationSet], metric: F) -> Result<f64>
where
    F: Fn(&AdaptationSet) -> Result<f64>,
{
    if sets.is_empty() {
        return Err(Error::Domain("no adaptation sets".into()));
    }
    let mut sum = 0.0;
    for s in sets {
        sum += metric(s)
            .map_err(|e| Error::Domain(format!("source `{}`: {e}", s.source_recipe_id)))?;
    }
    Ok(sum / sets.len() as f64)
}

pub fn mean(values: &[f64]) -> Option<f64> {
    (!values.is_empty()).then(|| values.iter().sum::<f64>() / values.len() as f64)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn set(id: &str, n: usize) -> AdaptationSet {
        AdaptationSet {
            source_recipe_id: id.into(),
            config: "test".into(),
            adaptations: (0..n)
                .map(|t| AdaptedRecipe {
                    title: format!("t{t}"),
                    ingredients: vec!["a".into()],
                    steps: vec!["p".into()],
                    raw: String::new(),
                    t: t as u32,
                })
                .collect(),
        }
    }

    #[test]
    fn mean_of_sets() {
        let sets = [set("a", 2), set("b", 4)];
        let v = per_input_diversity(&sets, |s| Ok(s.adaptations.len() as f64 / 10.0)).unwrap();
        assert!((v - 0.3).abs() < 1e-15);
        assert_eq!(per_input_diversity(&sets[..1], |_| Ok(0.7)).unwrap(), 0.7);
    }

    #[test]
    fn error_names_source() {
        let err = per_input_diversity(&[set("ok", 1), set("bad", 1)], |s| {
            if s.source_recipe_id == "bad" {
                Err(Error::Domain("boom".into()))
            } else {
                Ok(1.0)
            }
        })
        .unwrap_err();
        assert!(err.to_string().contains("`bad`"));
    }
}
