//! Human-aware discovery prediction over publication hypergraphs.
//!
//! Papers become hyperedges over author, material and property nodes. Random
//! walks and exact meta-path transition probabilities over that hypergraph
//! score how likely a material is to be reported with a property next, who is
//! likely to report it, and (with the β-tunable fusion in [`alien`]) which
//! plausible candidates lie far from where human experts are looking.

pub mod alien;
pub mod corpus;
pub mod embedding;
pub mod error;
pub mod evaluate;
pub mod hypergraph;
pub mod predict;
pub mod sequences;
pub mod stats;
pub mod synth;
pub mod token;
pub mod transition;
pub mod walker;

pub use error::{Error, Result};
