//! Forward inference for GCN and GIN graph classifiers over weighted
//! adjacency, plus the portable model file format.
//!
//! GCN layers use symmetric normalization with unit self-loops and degrees
//! recomputed from the current edge weights, so an edge of weight zero is
//! indistinguishable from a missing edge. All arithmetic is `f64`.

mod forward;
mod model;

pub use forward::{
    argmax, classify, forward, forward_on_induced, forward_with_override, induced_graph,
    node_embeddings, softmax, EmptyGraphPolicy, ForwardCounter, Prediction, Session,
};
pub(crate) use forward::{argmax_view, pool, relu, Propagation};
pub use model::{
    Architecture, ConvKind, ConvLayer, Dense, DenseFile, LayerFile, ModelFile, ModelSpec, Pooling,
    MODEL_FORMAT_VERSION,
};
