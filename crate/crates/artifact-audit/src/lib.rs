//! Audit toolkit for annotation artifacts in sentence-pair inference datasets.
//!
//! Crowd-sourced inference corpora (premise/hypothesis pairs labeled
//! entailment, neutral, or contradiction) tend to carry give-away patterns in
//! the hypotheses alone. This crate measures how exploitable those patterns
//! are and repartitions test sets accordingly:
//!
//! * [`corpus`] loads JSON-lines datasets, normalizes text into tokens, and
//!   computes the majority-class baseline.
//! * [`features`] turns a hypothesis into sparse feature ids: exact vocabulary
//!   ids for words plus hashed buckets for word bigrams and character
//!   4-grams.
//! * [`classifier`] trains the premise-oblivious classifier (averaged feature
//!   embeddings, linear output, softmax) with plain SGD and a linearly
//!   decaying learning rate, fully deterministic for a given seed.
//! * [`artifacts`] computes smoothed PMI(word, class) tables with class
//!   coverage, per-class hypothesis-length distributions, and
//!   premise-containment rates.
//! * [`splits`] partitions a test set into Hard/Easy by the audit
//!   classifier's correctness and scores externally produced prediction
//!   files on full/Hard/Easy.
//! * [`cli`] wires the above into the `train`, `audit`, `split`, and `score`
//!   commands exposed by the `artifact-audit` binary, with every run's
//!   configuration serialized next to its outputs.
//!
//! Each major capability has a runnable demo under `examples/`; start with
//! `cargo run --example train_hypothesis_only`.

pub mod artifacts;
pub mod classifier;
pub mod cli;
pub mod corpus;
mod error;
pub mod features;
pub mod model_io;
pub mod rng;
pub mod splits;

pub use error::{Error, Result};
