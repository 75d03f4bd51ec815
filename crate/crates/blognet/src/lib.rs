//! Corpus-to-clusters toolkit for content-based similarity networks over
//! text documents.
//!
//! The pipeline: ingest raw documents and reduce them to frequency-filtered
//! word sets ([`corpus`]), build the word-overlap similarity graph through an
//! inverted index and analyze its similarity distribution ([`simnet`]), infer
//! flat topic clusters by modularity maximization ([`cluster`]), and infer
//! hierarchical structure by MCMC sampling over dendrograms ([`hrg`]).
//! [`synth`] generates corpora and graphs with planted ground truth, and
//! [`io`] holds every artifact format.
//!
//! With the default `parallel` feature, corpus indexing and graph
//! construction distribute over rayon worker threads; results are identical
//! to the sequential fallback.

pub mod cluster;
pub mod corpus;
pub mod error;
pub mod hrg;
pub mod io;
pub mod simnet;
pub mod synth;

pub use error::{Error, Result};
