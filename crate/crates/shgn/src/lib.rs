//! Story ending generation over a heterogeneous story graph.
//!
//! Given a multi-sentence story context, this crate builds a directed graph
//! with four node types (a global node, sentence nodes, word nodes, and
//! commonsense-knowledge nodes) and seven edge types, encodes it with a
//! heterogeneous graph transformer layer, and decodes a story ending with a
//! transformer decoder. Training jointly optimizes ending generation plus two
//! auxiliary predictions (ending sentiment and clue words) as a weighted
//! multi-task objective. Everything runs on a self-contained f64 reverse-mode
//! autodiff tape with a finite-difference gradient checker, so each numeric
//! component is verifiable on small instances.
//!
//! The `examples/` directory is the guided tour — one runnable example per
//! capability (graph construction, labeling, gradient checking, training,
//! generation, evaluation). The same functionality is also reachable through
//! the thin `shgn` binary and its subcommands.

pub mod auxtasks;
pub mod corpus;
pub mod decoder;
pub mod encoder;
mod error;
pub mod graph;
pub mod harness;
pub mod metrics;
pub mod model;
pub mod numerics;
pub mod toydata;

pub use error::{Result, ShgnError};
