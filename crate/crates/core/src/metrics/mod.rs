//! Diversity, quality and probe metrics over sets of adaptations, plus the
//! run-level report.

mod aggregate;
mod correlation;
mod culture;
mod ingredient;
mod lexical;
mod preservation;
mod probe;
mod report;
mod semantic;

pub use aggregate::{mean, per_input_diversity, AdaptationSet};
pub use correlation::{pearson, pearson_matrix};
pub use culture::{culture_score, ClassifierProvider, HttpClassifier, MockLookupClassifier};
pub use ingredient::{
    global_ingredient_stats, ingredient_diversity, GlobalIngredientStats, DEFAULT_HF_FRACTION,
};
pub use lexical::{tokenize, unique_n, DEFAULT_NS};
pub use preservation::{
    document_preservation, f1, greedy_match, preservation_score, GreedyMatch, PreservationMode,
};
pub use probe::{context_utilization_probe, probe_distribution, ProbeDistribution, ProbeResult};
pub use report::{
    probe_context_ids, Availability, Correlation, Evaluator, GlobalIngredients, MetricReport,
    MetricValue, Skip, SourceMetrics, CULTURE_SCORE, INGREDIENT_DIVERSITY, METRICS, PRESERVATION,
    SEMANTIC_DIVERSITY, UNIQUE_N,
};
pub use semantic::semantic_diversity;
