//! Context organization and generation: sliding context windows, prompt
//! assembly with contrastive history, generator providers, output parsing,
//! and the per-source adaptation loop.

mod format;
mod generator;
mod pipeline;
mod template;
mod window;

pub use format::{parse_recipe, AdaptedRecipe};
pub use generator::{
    EchoContextGenerator, GenerationRequest, Generator, HttpGenerator, SamplingParams, ScriptStep,
    ScriptedGenerator, Task,
};
pub use pipeline::{Ablation, GenerationOutcome, OutcomeStatus, Pipeline, PipelineConfig};
pub use template::{
    assemble_prompt, cultural_title_prompt, regenerate_title_prompt, AssemblyMode, PromptTemplate,
    Templates, EMPTY_HISTORY, HISTORY_TAG, REFERENCE_TAG,
};
pub use window::{build_window, ContextWindow};
