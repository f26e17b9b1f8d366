//! Topic-model based category discovery.
//!
//! Fits LDA and HDP topic models to labeled text corpora, scores topics
//! with C_v coherence, and compares discovered topics against an existing
//! label taxonomy using mean cosine similarity and coverage.

pub mod coherence;
pub mod corpus;
pub mod error;
pub mod eval;
pub mod hdp;
pub mod lda;
pub mod math;
pub mod model;
pub mod synth;
mod variational;

pub use error::{Error, Result};
