use std::collections::BTreeMap;
use std::sync::atomic::{AtomicUsize, Ordering};

use ndarray::{Array1, Array2, Axis};

use super::model::{ConvKind, ModelSpec, Pooling};
use crate::error::{Error, Result};
use crate::graph::{EdgeId, Graph};
use crate::induce::InducedSubgraph;

/// Class scores for one graph.
#[derive(Clone, Debug, PartialEq)]
pub struct Prediction {
    pub logits: Vec<f64>,
    pub probabilities: Vec<f64>,
    pub predicted_class: usize,
}

impl Prediction {
    pub fn from_logits(logits: Vec<f64>) -> Result<Self> {
        if logits.iter().any(|v| !v.is_finite()) {
            return Err(Error::NumericalFailure("non-finite logit".into()));
        }
        let probabilities = softmax(&logits);
        let predicted_class = argmax(&logits);
        Ok(Self {
            logits,
            probabilities,
            predicted_class,
        })
    }

    pub fn probability(&self, class: usize) -> f64 {
        self.probabilities[class]
    }
}

pub fn softmax(logits: &[f64]) -> Vec<f64> {
    let max = logits.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let exps: Vec<f64> = logits.iter().map(|&z| (z - max).exp()).collect();
    let total: f64 = exps.iter().sum();
    exps.into_iter().map(|e| e / total).collect()
}

/// Index of the largest value; ties go to the lowest index.
pub fn argmax(values: &[f64]) -> usize {
    let mut best = 0;
    for (i, &v) in values.iter().enumerate() {
        if v > values[best] {
            best = i;
        }
    }
    best
}

/// What `forward_on_induced` does with a subgraph that has no nodes.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum EmptyGraphPolicy {
    Reject,
    /// Evaluate every node of the parent graph with no edges.
    #[default]
    IsolatedNodes,
}

/// Weighted message coefficients for one graph. Zero-weight edges are dropped
/// so that a weight of zero and a missing edge give identical arithmetic.
pub(crate) struct Propagation {
    /// Coefficient on each node's own representation.
    pub self_coef: Vec<f64>,
    /// `(src, dst, coefficient)`, in directed edge order.
    pub messages: Vec<(usize, usize, f64)>,
}

impl Propagation {
    /// `D̂^{-1/2} (A_w + I) D̂^{-1/2}` with degrees from the current weights.
    pub fn gcn(g: &Graph) -> Self {
        let mut degree = vec![1.0; g.node_count()];
        for e in g.directed_edges().iter().filter(|e| e.weight != 0.0) {
            degree[e.dst] += e.weight;
        }
        let self_coef = degree.iter().map(|d| 1.0 / d).collect();
        let messages = g
            .directed_edges()
            .iter()
            .filter(|e| e.weight != 0.0)
            .map(|e| (e.src, e.dst, e.weight / (degree[e.src] * degree[e.dst]).sqrt()))
            .collect();
        Self {
            self_coef,
            messages,
        }
    }

    /// `(1 + ε) h_v + Σ_u w_uv h_u`.
    pub fn gin(g: &Graph, epsilon: f64) -> Self {
        let messages = g
            .directed_edges()
            .iter()
            .filter(|e| e.weight != 0.0)
            .map(|e| (e.src, e.dst, e.weight))
            .collect();
        Self {
            self_coef: vec![1.0 + epsilon; g.node_count()],
            messages,
        }
    }

    pub fn apply(&self, h: &Array2<f64>) -> Array2<f64> {
        let mut out = h.clone();
        for (mut row, &c) in out.rows_mut().into_iter().zip(&self.self_coef) {
            row *= c;
        }
        for &(src, dst, c) in &self.messages {
            out.row_mut(dst).scaled_add(c, &h.row(src));
        }
        out
    }

    /// Adjoint of [`Propagation::apply`].
    pub fn apply_transpose(&self, grad: &Array2<f64>) -> Array2<f64> {
        let mut out = grad.clone();
        for (mut row, &c) in out.rows_mut().into_iter().zip(&self.self_coef) {
            row *= c;
        }
        for &(src, dst, c) in &self.messages {
            out.row_mut(src).scaled_add(c, &grad.row(dst));
        }
        out
    }
}

pub(crate) fn relu(x: Array2<f64>) -> Array2<f64> {
    x.mapv_into(|v| if v < 0.0 { 0.0 } else { v })
}

pub(crate) fn pool(h: &Array2<f64>, pooling: Pooling) -> Array1<f64> {
    match pooling {
        Pooling::Sum => h.sum_axis(Axis(0)),
        Pooling::Mean => h.sum_axis(Axis(0)) / h.nrows() as f64,
        Pooling::Max => h.columns().into_iter().map(|c| c[argmax_view(c)]).collect(),
    }
}

/// Row holding each channel's maximum; ties go to the lowest node.
pub(crate) fn argmax_view(values: ndarray::ArrayView1<'_, f64>) -> usize {
    let mut best = 0;
    for (i, &v) in values.iter().enumerate() {
        if v > values[best] {
            best = i;
        }
    }
    best
}

fn check_input(m: &ModelSpec, g: &Graph) -> Result<()> {
    if g.node_count() == 0 {
        return Err(Error::InvalidGraph("forward pass on a graph with no nodes".into()));
    }
    if g.feature_dim() != m.input_dim() {
        return Err(Error::DimensionMismatch(format!(
            "graph features have dimension {} but the model expects {}",
            g.feature_dim(),
            m.input_dim()
        )));
    }
    Ok(())
}

/// Node embeddings after every message-passing layer.
pub fn node_embeddings(m: &ModelSpec, g: &Graph) -> Result<Array2<f64>> {
    check_input(m, g)?;
    let gcn = (m.conv_kind == ConvKind::Gcn).then(|| Propagation::gcn(g));
    let mut h = g.features().clone();
    for (k, layer) in m.layers.iter().enumerate() {
        h = match m.conv_kind {
            ConvKind::Gcn => {
                let lin = &layer.linears[0];
                let p = h.dot(&lin.weight);
                relu(gcn.as_ref().unwrap().apply(&p) + &lin.bias)
            }
            ConvKind::Gin => {
                let agg = Propagation::gin(g, m.epsilon(k)).apply(&h);
                let hidden = relu(layer.linears[0].apply(&agg));
                relu(layer.linears[1].apply(&hidden))
            }
        };
    }
    if h.iter().any(|v| !v.is_finite()) {
        return Err(Error::NumericalFailure("non-finite node embedding".into()));
    }
    Ok(h)
}

/// Pooling, classifier head and softmax on a pooled graph embedding.
pub fn classify(m: &ModelSpec, pooled: &Array1<f64>) -> Result<Prediction> {
    let hidden = (pooled.dot(&m.classifier[0].weight) + &m.classifier[0].bias)
        .mapv_into(|v| if v < 0.0 { 0.0 } else { v });
    let logits = hidden.dot(&m.classifier[1].weight) + &m.classifier[1].bias;
    Prediction::from_logits(logits.to_vec())
}

/// Deterministic forward inference `φ(A, X)`.
pub fn forward(m: &ModelSpec, g: &Graph) -> Result<Prediction> {
    let h = node_embeddings(m, g)?;
    classify(m, &pool(&h, m.pooling))
}

/// Forward on a copy of `g` with both directions of each listed edge reweighted.
pub fn forward_with_override(
    m: &ModelSpec,
    g: &Graph,
    overrides: &BTreeMap<EdgeId, f64>,
) -> Result<Prediction> {
    if overrides.is_empty() {
        return forward(m, g);
    }
    forward(m, &g.with_overrides(overrides)?)
}

/// Standalone graph built from an induced subgraph, or `None` when it is empty.
pub fn induced_graph(s: &InducedSubgraph<'_>) -> Option<Graph> {
    (!s.is_empty()).then(|| s.parent().restrict(s.nodes(), s.edges()))
}

/// Forward on the standalone graph made of the subgraph's nodes and edges.
pub fn forward_on_induced(
    m: &ModelSpec,
    s: &InducedSubgraph<'_>,
    policy: EmptyGraphPolicy,
) -> Result<Prediction> {
    match (induced_graph(s), policy) {
        (Some(g), _) => forward(m, &g),
        (None, EmptyGraphPolicy::Reject) => Err(Error::EmptySubgraph),
        (None, EmptyGraphPolicy::IsolatedNodes) => forward(m, &s.parent().without_edges()),
    }
}

/// Count of forward passes issued within one explanation session.
#[derive(Debug, Default)]
pub struct ForwardCounter(AtomicUsize);

impl ForwardCounter {
    pub fn count(&self) -> usize {
        self.0.load(Ordering::Relaxed)
    }

    pub fn reset(&self) {
        self.0.store(0, Ordering::Relaxed);
    }

    pub(crate) fn bump(&self) {
        self.0.fetch_add(1, Ordering::Relaxed);
    }
}

/// A model bound to an empty-graph policy and a private forward counter.
#[derive(Debug)]
pub struct Session<'m> {
    model: &'m ModelSpec,
    policy: EmptyGraphPolicy,
    counter: ForwardCounter,
}

impl<'m> Session<'m> {
    pub fn new(model: &'m ModelSpec) -> Self {
        Self::with_policy(model, EmptyGraphPolicy::default())
    }

    pub fn with_policy(model: &'m ModelSpec, policy: EmptyGraphPolicy) -> Self {
        Self {
            model,
            policy,
            counter: ForwardCounter::default(),
        }
    }

    pub fn model(&self) -> &'m ModelSpec {
        self.model
    }

    pub fn policy(&self) -> EmptyGraphPolicy {
        self.policy
    }

    pub fn forward_passes(&self) -> usize {
        self.counter.count()
    }

    pub fn reset_counter(&self) {
        self.counter.reset();
    }

    pub fn forward(&self, g: &Graph) -> Result<Prediction> {
        self.counter.bump();
        forward(self.model, g)
    }

    pub fn forward_with_override(
        &self,
        g: &Graph,
        overrides: &BTreeMap<EdgeId, f64>,
    ) -> Result<Prediction> {
        self.counter.bump();
        forward_with_override(self.model, g, overrides)
    }

    pub fn forward_on_induced(&self, s: &InducedSubgraph<'_>) -> Result<Prediction> {
        self.counter.bump();
        forward_on_induced(self.model, s, self.policy)
    }
}
