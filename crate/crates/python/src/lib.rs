//! Python bindings: graphs, models, explanations, synthetic corpora and the
//! GCN trainer. Explanation results come back as plain dicts.

use gexplain::datasets::{self, DatasetRecord};
use gexplain::explain::{self as core_explain, ClassPolicy, ExplainConfig, KRange, Method};
use gexplain::gnn::{self, Architecture, ModelSpec, Pooling, Session};
use gexplain::graph::GraphFile;
use gexplain::trainer::{self, TrainConfig};
use gexplain::Error;
use pyo3::exceptions::{PyArithmeticError, PyIOError, PyIndexError, PyValueError};
use pyo3::prelude::*;

fn to_py(e: Error) -> PyErr {
    match e {
        Error::Io(io) => PyIOError::new_err(io.to_string()),
        e if e.is_numerical() => PyArithmeticError::new_err(e.to_string()),
        e => PyValueError::new_err(e.to_string()),
    }
}

fn parse<T: std::str::FromStr<Err = Error>>(s: &str) -> PyResult<T> {
    s.parse().map_err(to_py)
}

fn json_loads<'py>(py: Python<'py>, text: &str) -> PyResult<Bound<'py, PyAny>> {
    py.import("json")?.call_method1("loads", (text,))
}

#[pyclass(name = "Graph", module = "gexplain", frozen)]
struct PyGraph {
    inner: gexplain::Graph,
}

#[pymethods]
impl PyGraph {
    /// Undirected graph from a feature matrix and `(u, v, weight)` edges.
    #[new]
    fn new(features: Vec<Vec<f64>>, edges: Vec<(usize, usize, f64)>) -> PyResult<Self> {
        let file = GraphFile {
            n: features.len(),
            features,
            edges,
            undirected: true,
            label: None,
        };
        Ok(Self {
            inner: gexplain::Graph::from_file(&file).map_err(to_py)?,
        })
    }

    #[staticmethod]
    fn from_json(text: &str) -> PyResult<Self> {
        let file: GraphFile = serde_json::from_str(text).map_err(|e| to_py(e.into()))?;
        Ok(Self {
            inner: gexplain::Graph::from_file(&file).map_err(to_py)?,
        })
    }

    #[staticmethod]
    fn load(path: &str) -> PyResult<Self> {
        let (inner, _) = gexplain::Graph::load(path).map_err(to_py)?;
        Ok(Self { inner })
    }

    fn to_json(&self) -> PyResult<String> {
        serde_json::to_string(&self.inner.to_file()).map_err(|e| to_py(e.into()))
    }

    #[getter]
    fn node_count(&self) -> usize {
        self.inner.node_count()
    }

    #[getter]
    fn edge_count(&self) -> usize {
        self.inner.edge_count()
    }

    fn endpoints(&self, edge: usize) -> PyResult<(usize, usize)> {
        self.inner.unit(edge).map_err(to_py)?;
        Ok(self.inner.endpoints(edge))
    }

    fn __repr__(&self) -> String {
        format!("Graph(nodes={}, edges={})", self.inner.node_count(), self.inner.edge_count())
    }
}

#[pyclass(name = "Model", module = "gexplain", frozen)]
struct PyModel {
    inner: ModelSpec,
}

#[pymethods]
impl PyModel {
    /// Randomly initialised GCN (`kind="gcn"`) or GIN (`kind="gin"`).
    #[staticmethod]
    #[pyo3(signature = (input_dim, layers, hidden, classes, kind="gcn", pooling="mean", scale=0.3, seed=0))]
    #[allow(clippy::too_many_arguments)]
    fn random(
        input_dim: usize,
        layers: usize,
        hidden: usize,
        classes: usize,
        kind: &str,
        pooling: &str,
        scale: f64,
        seed: u64,
    ) -> PyResult<Self> {
        use rand::SeedableRng;
        let mut arch = match kind {
            "gcn" => Architecture::gcn(input_dim, layers, hidden, classes),
            "gin" => Architecture::gin(input_dim, layers, hidden, classes),
            other => return Err(PyValueError::new_err(format!("unknown model kind `{other}`"))),
        };
        arch.pooling = pooling_of(pooling)?;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        Ok(Self {
            inner: ModelSpec::random(&arch, scale, &mut rng).map_err(to_py)?,
        })
    }

    #[staticmethod]
    fn load(path: &str) -> PyResult<Self> {
        Ok(Self {
            inner: ModelSpec::load(path).map_err(to_py)?,
        })
    }

    #[staticmethod]
    fn from_json(text: &str) -> PyResult<Self> {
        Ok(Self {
            inner: ModelSpec::from_json(text).map_err(to_py)?,
        })
    }

    fn to_json(&self) -> PyResult<String> {
        self.inner.to_json().map_err(to_py)
    }

    fn save(&self, path: &str) -> PyResult<()> {
        self.inner.save(path).map_err(to_py)
    }

    /// Class probabilities for `graph`.
    fn predict_proba(&self, graph: &PyGraph) -> PyResult<Vec<f64>> {
        Ok(gnn::forward(&self.inner, &graph.inner).map_err(to_py)?.probabilities)
    }

    fn predict(&self, graph: &PyGraph) -> PyResult<usize> {
        Ok(gnn::forward(&self.inner, &graph.inner).map_err(to_py)?.predicted_class)
    }

    #[getter]
    fn num_classes(&self) -> usize {
        self.inner.num_classes()
    }
}

fn pooling_of(s: &str) -> PyResult<Pooling> {
    match s {
        "mean" => Ok(Pooling::Mean),
        "sum" => Ok(Pooling::Sum),
        "max" => Ok(Pooling::Max),
        other => Err(PyValueError::new_err(format!("unknown pooling `{other}`"))),
    }
}

#[pyclass(name = "Dataset", module = "gexplain", frozen)]
struct PyDataset {
    records: Vec<DatasetRecord>,
}

#[pymethods]
impl PyDataset {
    #[staticmethod]
    fn load(path: &str) -> PyResult<Self> {
        Ok(Self {
            records: datasets::load_dataset(path).map_err(to_py)?,
        })
    }

    fn save(&self, path: &str) -> PyResult<()> {
        datasets::save_dataset(&self.records, path).map_err(to_py)
    }

    fn checksum(&self) -> PyResult<String> {
        datasets::dataset_checksum(&self.records).map_err(to_py)
    }

    fn __len__(&self) -> usize {
        self.records.len()
    }

    fn graph(&self, i: usize) -> PyResult<PyGraph> {
        Ok(PyGraph {
            inner: self.record(i)?.graph.clone(),
        })
    }

    fn label(&self, i: usize) -> PyResult<usize> {
        Ok(self.record(i)?.label)
    }

    fn gt_edge_mask(&self, i: usize) -> PyResult<Vec<bool>> {
        Ok(self.record(i)?.gt_edge_mask.clone())
    }

    fn motif_count(&self, i: usize) -> PyResult<usize> {
        Ok(self.record(i)?.motif_count)
    }
}

impl PyDataset {
    fn record(&self, i: usize) -> PyResult<&DatasetRecord> {
        self.records
            .get(i)
            .ok_or_else(|| PyIndexError::new_err(format!("record {i} out of range")))
    }
}

#[pyfunction]
#[pyo3(signature = (n_graphs, base_nodes=5, seed=0))]
fn gen_ba2motifs_mini(n_graphs: usize, base_nodes: usize, seed: u64) -> PyResult<PyDataset> {
    Ok(PyDataset {
        records: datasets::gen_ba2motifs_mini(n_graphs, base_nodes, seed).map_err(to_py)?,
    })
}

#[pyfunction]
#[pyo3(signature = (n_graphs, max_motifs=3, seed=0))]
fn gen_varsize_motifs(n_graphs: usize, max_motifs: usize, seed: u64) -> PyResult<PyDataset> {
    Ok(PyDataset {
        records: datasets::gen_varsize_motifs(n_graphs, max_motifs, seed).map_err(to_py)?,
    })
}

#[pyfunction]
fn edge_mask_auc(scores: Vec<f64>, mask: Vec<bool>) -> PyResult<f64> {
    datasets::edge_mask_auc(&scores, &mask).map_err(to_py)
}

/// Per-edge scores for `method` toward `class` (predicted class if omitted).
#[pyfunction]
#[pyo3(signature = (model, graph, method="linear-gradient", class_=None))]
fn edge_scores(model: &PyModel, graph: &PyGraph, method: &str, class_: Option<usize>) -> PyResult<Vec<f64>> {
    let session = Session::new(&model.inner);
    let class = match class_ {
        Some(c) => c,
        None => session.forward(&graph.inner).map_err(to_py)?.predicted_class,
    };
    let g = &graph.inner;
    let cfg = ExplainConfig::default();
    let scores = match parse::<Method>(method)? {
        Method::LinearGradient => core_explain::score_all_edges_linear_gradient(&session, g, class, cfg.base_weight),
        Method::Sa => core_explain::sa_edge_scores(&session, g, class, cfg.sa_step),
        Method::Ig => core_explain::ig_edge_scores(&session, g, class, cfg.ig_steps, cfg.base_weight, cfg.sa_step),
        Method::External => return Err(PyValueError::new_err("external scores cannot be computed")),
    };
    Ok(scores.map_err(to_py)?.scores)
}

/// Explanation of `graph` as a dict with the same keys as the explanation file.
#[pyfunction]
#[pyo3(signature = (model, graph, method="linear-gradient", k_range="full", class_=None))]
fn explain<'py>(
    py: Python<'py>,
    model: &PyModel,
    graph: &PyGraph,
    method: &str,
    k_range: &str,
    class_: Option<usize>,
) -> PyResult<Bound<'py, PyAny>> {
    let cfg = ExplainConfig {
        method: parse(method)?,
        k_range: parse::<KRange>(k_range)?,
        class: class_.map_or(ClassPolicy::Auto, ClassPolicy::Fixed),
        ..ExplainConfig::default()
    };
    let e = core_explain::explain(&model.inner, &graph.inner, &cfg).map_err(to_py)?;
    json_loads(py, &e.to_json(&graph.inner).map_err(to_py)?)
}

type TraceRow = (usize, f64, f64);

/// Full-batch GCN training; returns the model and the `(epoch, loss, accuracy)` trace.
#[pyfunction]
#[pyo3(signature = (
    dataset, layers=3, hidden=32, epochs=500, seed=0, learning_rate=0.05,
    momentum=0.9, init_scale=0.3, pooling="mean", target_accuracy=None
))]
#[allow(clippy::too_many_arguments)]
fn train(
    dataset: &PyDataset,
    layers: usize,
    hidden: usize,
    epochs: usize,
    seed: u64,
    learning_rate: f64,
    momentum: f64,
    init_scale: f64,
    pooling: &str,
    target_accuracy: Option<f64>,
) -> PyResult<(PyModel, Vec<TraceRow>)> {
    let dim = dataset
        .records
        .first()
        .map_or(datasets::FEATURE_DIM, |r| r.graph.feature_dim());
    let classes = dataset.records.iter().map(|r| r.label + 1).max().unwrap_or(2).max(2);
    let mut arch = Architecture::gcn(dim, layers, hidden, classes);
    arch.pooling = pooling_of(pooling)?;
    let cfg = TrainConfig {
        epochs,
        learning_rate,
        momentum,
        seed,
        init_scale,
        target_train_accuracy: target_accuracy,
    };
    let out = trainer::train_gcn(&dataset.records, &arch, &cfg).map_err(to_py)?;
    let trace = out.trace.iter().map(|r| (r.epoch, r.loss, r.accuracy)).collect();
    Ok((PyModel { inner: out.model }, trace))
}

/// Node-feature matrix helper for callers building graphs by hand.
#[pyfunction]
fn constant_features(n: usize, dim: usize, value: f64) -> Vec<Vec<f64>> {
    vec![vec![value; dim]; n]
}

#[pymodule]
#[pyo3(name = "gexplain")]
fn gexplain_module(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyGraph>()?;
    m.add_class::<PyModel>()?;
    m.add_class::<PyDataset>()?;
    m.add_function(wrap_pyfunction!(gen_ba2motifs_mini, m)?)?;
    m.add_function(wrap_pyfunction!(gen_varsize_motifs, m)?)?;
    m.add_function(wrap_pyfunction!(edge_mask_auc, m)?)?;
    m.add_function(wrap_pyfunction!(edge_scores, m)?)?;
    m.add_function(wrap_pyfunction!(explain, m)?)?;
    m.add_function(wrap_pyfunction!(train, m)?)?;
    m.add_function(wrap_pyfunction!(constant_features, m)?)?;
    Ok(())
}
