//! Diversity-aware retrieval-augmented recipe adaptation.
//!
//! The pipeline rewrites a source recipe into several queries, retrieves
//! candidates from the target-culture partition, reranks them with a
//! history-aware maximal-marginal-relevance objective, feeds a sliding window
//! of the selection (plus prior outputs as contrastive history) to a
//! generator, and records every adaptation. The [`metrics`] module scores the
//! resulting sets for lexical, semantic and ingredient diversity, source
//! preservation and cultural fit.
//!
//! All model inference sits behind provider traits with deterministic mock
//! implementations, so everything here runs offline.

pub mod contextgen;
pub mod corpus;
pub mod embedding;
pub mod error;
pub mod http;
pub mod metrics;
pub mod rerank;
pub mod retrieval;
pub mod session;

pub use error::{Error, Result};
