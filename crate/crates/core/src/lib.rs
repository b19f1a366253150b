//! Relation-driven named entity recognition with large language models.
//!
//! Predefined relations are expanded into diversified relation phrases,
//! each phrase is used to extract `(subject, object)` pairs from a sentence,
//! and the resulting entity slots are screened by graph reliability and
//! semantic consistency before being typed and evaluated.

pub mod cli;
pub mod config;
pub mod corpus;
pub mod eval;
pub mod extract;
pub mod gateway;
pub mod model;
pub mod pipeline;
pub mod relations;
pub mod screening;
pub mod similarity;
pub mod template;
pub mod text;

mod seeded;

pub use config::PipelineConfig;
pub use eval::AblationMode;
