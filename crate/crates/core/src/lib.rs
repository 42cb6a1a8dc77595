//! Edge-induced subgraph explanations for graph neural network classifiers.
//!
//! The crate bundles a small GCN/GIN inference engine, a full-batch GCN
//! trainer, the edge-scoring and prefix-search explainer with its baselines
//! and brute-force oracle, synthetic motif datasets, and evaluation reports.

pub mod error;
pub mod eval;
pub mod explain;
pub mod gnn;
pub mod graph;
pub mod induce;
pub mod datasets;
pub mod metrics;
pub mod trainer;

pub use error::{Error, Result};
pub use graph::{EdgeId, Graph};
