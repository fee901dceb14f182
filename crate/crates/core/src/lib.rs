//! Measure how the quality of models trained on random subsets of a
//! line-oriented corpus is distributed across replicates.
//!
//! The pipeline draws seeded, exact-size random subsets of corpus lines
//! ([`sampler`]), trains an interpolated n-gram language model ([`ngram`])
//! and a skip-gram negative-sampling embedding ([`embedding`]) on each,
//! evaluates held-out perplexity and analogy accuracy, and characterizes the
//! per-size distributions of those values ([`stats`]): chi-square and
//! Anderson-Darling normality tests plus variance-versus-size scaling.
//! [`experiment`] ties it together and [`cli`] exposes it as `subpost`.
//!
//! Replicate-level work runs on a rayon pool when the `parallel` feature is
//! enabled (the default); see [`exec`].

pub mod cli;
pub mod corpus;
pub mod embedding;
pub mod error;
pub mod exec;
pub mod experiment;
pub mod ngram;
pub mod sampler;
pub mod stats;

pub use error::{Error, Result};
