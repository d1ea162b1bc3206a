use std::collections::HashMap;
use std::time::Duration;

use serde::{Deserialize, Serialize};

use crate::contextgen::AdaptedRecipe;
use crate::error::{Error, Result};
use crate::http::JsonClient;

/// Predicts the probability that each text belongs to `target`.
pub trait ClassifierProvider: Send + Sync {
    fn identity(&self) -> &str;

    fn probabilities(&self, texts: &[String], target: &str) -> Result<Vec<f64>>;
}

#[derive(Serialize)]
struct ClassifyRequest<'a> {
    texts: &'a [String],
    target: &'a str,
}

#[derive(Deserialize)]
struct ClassifyResponse {
    probabilities: Vec<f64>,
}

/// POSTs `{"texts", "target"}` and reads `{"probabilities"}`.
#[derive(Debug)]
pub struct HttpClassifier {
    identity: String,
    client: JsonClient,
}

impl HttpClassifier {
    pub fn new(endpoint: &str, timeout: Duration) -> Result<Self> {
        Ok(Self {
            identity: format!("http_classifier:{endpoint}"),
            client: JsonClient::new(endpoint, timeout)?,
        })
    }
}

impl ClassifierProvider for HttpClassifier {
    fn identity(&self) -> &str {
        &self.identity
    }

    fn probabilities(&self, texts: &[String], target: &str) -> Result<Vec<f64>> {
        let resp: ClassifyResponse = self.client.post(&ClassifyRequest { texts, target })?;
        if resp.probabilities.len() != texts.len() {
            return Err(Error::Transport(format!(
                "classifier returned {} probabilities for {} texts",
                resp.probabilities.len(),
                texts.len()
            )));
        }
        Ok(resp.probabilities)
    }
}

/// Table-driven classifier: exact input text to probability, else `default`.
#[derive(Debug, Clone, Default)]
pub struct MockLookupClassifier {
    pub table: HashMap<String, f64>,
    pub default: f64,
}

impl MockLookupClassifier {
    pub fn constant(p: f64) -> Self {
        Self {
            table: HashMap::new(),
            default: p,
        }
    }
}

impl ClassifierProvider for MockLookupClassifier {
    fn identity(&self) -> &str {
        "mock_lookup"
    }

    fn probabilities(&self, texts: &[String], _target: &str) -> Result<Vec<f64>> {
        Ok(texts
            .iter()
            .map(|t| self.table.get(t).copied().unwrap_or(self.default))
            .collect())
    }
}

/// Mean probability of `target` over the outputs' title and ingredients.
pub fn culture_score(
    outputs: &[&AdaptedRecipe],
    classifier: &dyn ClassifierProvider,
    target: &str,
) -> Result<f64> {
    if outputs.is_empty() {
        return Err(Error::Domain(
            "culture score needs at least one output".into(),
        ));
    }
    let texts: Vec<String> = outputs.iter().map(|a| a.title_and_ingredients()).collect();
    let probs = classifier.probabilities(&texts, target)?;
    if probs.len() != texts.len() {
        return Err(Error::Integrity("classifier output count mismatch".into()));
    }
    if let Some(p) = probs.iter().find(|p| !(0.0..=1.0).contains(*p)) {
        return Err(Error::Integrity(format!(
            "classifier probability {p} is outside [0, 1]"
        )));
    }
    Ok(probs.iter().sum::<f64>() / probs.len() as f64)
}
