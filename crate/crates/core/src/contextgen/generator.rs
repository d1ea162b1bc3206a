//! Text generators: an HTTP client for local LLM servers and two offline mocks.

use std::sync::Arc;
use std::time::Duration;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::http::JsonClient;

use super::template::REFERENCE_TAG;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Task {
    RegenerateTitle,
    CulturalTitle,
    Adapt,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SamplingParams {
    pub temperature: f64,
    pub top_k: u32,
    pub top_p: f64,
    pub min_p: f64,
}

impl Default for SamplingParams {
    fn default() -> Self {
        Self {
            temperature: 0.7,
            top_k: 40,
            top_p: 0.9,
            min_p: 0.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GenerationRequest {
    pub task: Task,
    pub prompt: String,
    pub params: SamplingParams,
    pub seed: Option<u64>,
    /// Generation index the request belongs to.
    pub generation: u32,
    /// 0 for the first try, incremented on each retry.
    pub attempt: u32,
}

pub trait Generator: Send + Sync {
    fn identity(&self) -> &str;

    fn generate(&self, req: &GenerationRequest) -> Result<String>;
}

#[derive(Serialize)]
struct HttpRequest<'a> {
    prompt: &'a str,
    temperature: f64,
    top_k: u32,
    top_p: f64,
    min_p: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    seed: Option<u64>,
}

#[derive(Deserialize)]
struct HttpResponse {
    text: String,
}

/// POSTs `{"prompt", "temperature", "top_k", "top_p", "min_p", "seed"}` and
/// reads `{"text"}`.
#[derive(Debug)]
pub struct HttpGenerator {
    identity: String,
    client: JsonClient,
}

impl HttpGenerator {
    pub fn new(endpoint: &str, timeout: Duration) -> Result<Self> {
        Ok(Self {
            identity: format!("http_chat:{endpoint}"),
            client: JsonClient::new(endpoint, timeout)?,
        })
    }
}

impl Generator for HttpGenerator {
    fn identity(&self) -> &str {
        &self.identity
    }

    fn generate(&self, req: &GenerationRequest) -> Result<String> {
        let resp: HttpResponse = self.client.post(&HttpRequest {
            prompt: &req.prompt,
            temperature: req.params.temperature,
            top_k: req.params.top_k,
            top_p: req.params.top_p,
            min_p: req.params.min_p,
            seed: req.seed,
        })?;
        Ok(resp.text)
    }
}

fn short_hash(text: &str) -> String {
    hex::encode(&Sha256::digest(text.as_bytes())[..4])
}

/// Offline generator that copies the first `[reference]` block of an
/// adaptation prompt verbatim. Title rewrites return a hash-derived title.
#[derive(Debug, Default)]
pub struct EchoContextGenerator;

impl EchoContextGenerator {
    pub const IDENTITY: &'static str = "mock_echo_context";

    fn first_reference(prompt: &str) -> Option<&str> {
        let marker = format!("{REFERENCE_TAG}\n");
        let start = prompt
            .match_indices(&marker)
            .map(|(i, _)| i)
            .find(|&i| i == 0 || prompt[..i].ends_with('\n'))?
            + marker.len();
        let block = &prompt[start..];
        Some(block.split("\n\n").next().unwrap_or(block).trim_end())
    }
}

impl Generator for EchoContextGenerator {
    fn identity(&self) -> &str {
        Self::IDENTITY
    }

    fn generate(&self, req: &GenerationRequest) -> Result<String> {
        match req.task {
            Task::Adapt => Ok(match Self::first_reference(&req.prompt) {
                Some(block) => block.to_string(),
                None => format!(
                    "Nombre: receta {}\nIngredientes:\n- agua\nPasos:\n1. Servir",
                    short_hash(&req.prompt)
                ),
            }),
            Task::RegenerateTitle | Task::CulturalTitle => {
                Ok(format!("receta {}", short_hash(&req.prompt)))
            }
        }
    }
}

/// One scripted reaction to an adaptation request.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ScriptStep {
    /// Delegate to the wrapped generator.
    Pass,
    /// Fail with a transport error.
    Fail,
    /// Return text that does not parse as a recipe.
    Garbage,
    /// Return this literal text.
    Text(String),
}

/// Wraps another generator and overrides adaptation requests by attempt
/// number: attempt `i` follows `script[i]`, the last step repeating. Only
/// generations listed in `generations` are affected (all when `None`).
/// Title rewrites always pass through.
pub struct ScriptedGenerator {
    inner: Arc<dyn Generator>,
    script: Vec<ScriptStep>,
    generations: Option<Vec<u32>>,
    identity: String,
}

impl ScriptedGenerator {
    pub fn new(
        inner: Arc<dyn Generator>,
        script: Vec<ScriptStep>,
        generations: Option<Vec<u32>>,
    ) -> Self {
        let identity = format!("mock_scripted({})", inner.identity());
        Self {
            inner,
            script,
            generations,
            identity,
        }
    }
}

impl Generator for ScriptedGenerator {
    fn identity(&self) -> &str {
        &self.identity
    }

    fn generate(&self, req: &GenerationRequest) -> Result<String> {
        let scripted = req.task == Task::Adapt
            && self
                .generations
                .as_ref()
                .is_none_or(|g| g.contains(&req.generation));
        let step = if scripted {
            self.script
                .get(req.attempt as usize)
                .or(self.script.last())
                .unwrap_or(&ScriptStep::Pass)
        } else {
            &ScriptStep::Pass
        };
        match step {
            ScriptStep::Pass => self.inner.generate(req),
            ScriptStep::Fail => Err(Error::Transport(format!(
                "scripted failure (generation {}, attempt {})",
                req.generation, req.attempt
            ))),
            ScriptStep::Garbage => Ok("lo siento, no puedo ayudar con eso".into()),
            ScriptStep::Text(t) => Ok(t.clone()),
        }
    }
}
