//! K-hop random-walk sampling for heterogeneous graphs, skip-gram node
//! embeddings and a repeated-split link-prediction harness.
//!
//! The pipeline is: build a [`graph::HeteroGraph`], sample a walk
//! [`sampler::Corpus`] for a hop size `K`, train an
//! [`embedding::EmbeddingMatrix`] on it, and score held-out co-author pairs
//! with [`linkpred::evaluate`].

pub mod alias;
pub mod datagen;
pub mod embedding;
pub mod experiment;
pub mod graph;
pub mod linkpred;
pub mod sampler;

pub use embedding::{EmbeddingMatrix, TrainConfig};
pub use graph::{GraphBuilder, HeteroGraph, NodeId, NodeType};
pub use linkpred::{EvalConfig, EvalReport, LabeledPairSet};
pub use sampler::{Corpus, WalkConfig};
