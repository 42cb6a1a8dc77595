//! Full-batch gradient descent with momentum for GCN graph classifiers, with
//! hand-derived reverse-mode gradients of the mean cross-entropy.
//!
//! Parameters are initialized uniformly in `(-init_scale, init_scale)` from
//! `ChaCha8Rng::seed_from_u64(seed)`, drawn layer by layer (weight row-major,
//! then bias) followed by the two classifier layers.

use std::io::Write;
use std::path::Path;

use ndarray::{s, Array1, Array2, Axis};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::datasets::DatasetRecord;
use crate::error::{Error, Result};
use crate::gnn::{argmax, argmax_view, forward, pool, relu, softmax, Architecture, ConvKind, Dense, ModelSpec, Pooling, Propagation};

#[derive(Clone, Debug, PartialEq)]
pub struct TrainConfig {
    pub epochs: usize,
    pub learning_rate: f64,
    pub momentum: f64,
    pub seed: u64,
    pub init_scale: f64,
    /// Stop as soon as training accuracy reaches this value.
    pub target_train_accuracy: Option<f64>,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            epochs: 500,
            learning_rate: 0.05,
            momentum: 0.9,
            seed: 0,
            init_scale: 0.3,
            target_train_accuracy: None,
        }
    }
}

impl TrainConfig {
    fn validate(&self) -> Result<()> {
        if self.epochs == 0 {
            return Err(Error::InvalidArgument("epochs must be at least 1".into()));
        }
        if !self.learning_rate.is_finite() || self.learning_rate < 0.0 {
            return Err(Error::InvalidArgument("learning rate must be finite and non-negative".into()));
        }
        if !(0.0..1.0).contains(&self.momentum) {
            return Err(Error::InvalidArgument("momentum must lie in [0, 1)".into()));
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EpochRecord {
    pub epoch: usize,
    pub loss: f64,
    pub accuracy: f64,
}

#[derive(Clone, Debug)]
pub struct TrainOutcome {
    pub model: ModelSpec,
    pub trace: Vec<EpochRecord>,
}

impl TrainOutcome {
    pub fn final_accuracy(&self) -> f64 {
        self.trace.last().map_or(0.0, |r| r.accuracy)
    }

    pub fn final_loss(&self) -> f64 {
        self.trace.last().map_or(f64::NAN, |r| r.loss)
    }
}

/// Gradients laid out with the same shapes as the model they belong to.
#[derive(Clone, Debug, PartialEq)]
pub struct Gradients(pub ModelSpec);

impl Gradients {
    pub fn flatten(&self) -> Vec<f64> {
        parameters(&self.0)
    }
}

/// Every parameter in a fixed order: each layer's weights (row-major) then
/// bias, then the classifier layers.
pub fn parameters(m: &ModelSpec) -> Vec<f64> {
    let mut out = Vec::new();
    for d in denses(m) {
        out.extend(d.weight.iter());
        out.extend(d.bias.iter());
    }
    out
}

pub fn set_parameters(m: &mut ModelSpec, values: &[f64]) {
    let mut it = values.iter().copied();
    for d in denses_mut(m) {
        for w in d.weight.iter_mut().chain(d.bias.iter_mut()) {
            *w = it.next().expect("parameter vector too short");
        }
    }
    assert!(it.next().is_none(), "parameter vector too long");
}

fn denses(m: &ModelSpec) -> impl Iterator<Item = &Dense> {
    m.layers.iter().flat_map(|l| &l.linears).chain(&m.classifier)
}

fn denses_mut(m: &mut ModelSpec) -> impl Iterator<Item = &mut Dense> {
    m.layers.iter_mut().flat_map(|l| &mut l.linears).chain(&mut m.classifier)
}

fn log_sum_exp(logits: &[f64]) -> f64 {
    let max = logits.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    max + logits.iter().map(|z| (z - max).exp()).sum::<f64>().ln()
}

/// Mean cross-entropy of the model over the dataset, through the inference engine.
pub fn mean_cross_entropy(m: &ModelSpec, dataset: &[DatasetRecord]) -> Result<f64> {
    if dataset.is_empty() {
        return Err(Error::InvalidArgument("empty dataset".into()));
    }
    let mut total = 0.0;
    for r in dataset {
        let p = forward(m, &r.graph)?;
        total += log_sum_exp(&p.logits) - p.logits[r.label];
    }
    Ok(total / dataset.len() as f64)
}

fn check_dataset(m: &ModelSpec, dataset: &[DatasetRecord]) -> Result<()> {
    if m.conv_kind != ConvKind::Gcn {
        return Err(Error::Unsupported("analytic gradients are implemented for GCN only".into()));
    }
    if dataset.is_empty() {
        return Err(Error::InvalidArgument("empty dataset".into()));
    }
    for (i, r) in dataset.iter().enumerate() {
        if r.label >= m.num_classes() {
            return Err(Error::InvalidArgument(format!(
                "record {i} has label {} but the model has {} classes",
                r.label,
                m.num_classes()
            )));
        }
        if r.graph.feature_dim() != m.input_dim() {
            return Err(Error::DimensionMismatch(format!(
                "record {i} has feature dimension {}, expected {}",
                r.graph.feature_dim(),
                m.input_dim()
            )));
        }
    }
    Ok(())
}

struct BatchStats {
    loss: f64,
    correct: usize,
}

fn step_mask(x: &Array2<f64>) -> Array2<f64> {
    x.mapv(|v| if v > 0.0 { 1.0 } else { 0.0 })
}

/// A dataset stacked into one disjoint union: node rows of all graphs in
/// order, a single propagation over the union, and each graph's row range.
struct Stacked {
    features: Array2<f64>,
    prop: Propagation,
    offsets: Vec<usize>,
    labels: Vec<usize>,
}

impl Stacked {
    fn new(m: &ModelSpec, dataset: &[DatasetRecord]) -> Result<Self> {
        check_dataset(m, dataset)?;
        let total: usize = dataset.iter().map(|r| r.graph.node_count()).sum();
        let mut features = Array2::zeros((total, m.input_dim()));
        let mut offsets = Vec::with_capacity(dataset.len() + 1);
        let mut self_coef = Vec::with_capacity(total);
        let mut messages = Vec::new();
        let mut start = 0;
        for (i, r) in dataset.iter().enumerate() {
            let g = &r.graph;
            if g.node_count() == 0 {
                return Err(Error::InvalidGraph(format!("training record {i} has no nodes")));
            }
            features.slice_mut(s![start..start + g.node_count(), ..]).assign(g.features());
            let p = Propagation::gcn(g);
            self_coef.extend(p.self_coef);
            messages.extend(p.messages.into_iter().map(|(u, v, c)| (u + start, v + start, c)));
            offsets.push(start);
            start += g.node_count();
        }
        offsets.push(start);
        Ok(Self {
            features,
            prop: Propagation { self_coef, messages },
            offsets,
            labels: dataset.iter().map(|r| r.label).collect(),
        })
    }

    fn graphs(&self) -> usize {
        self.labels.len()
    }

    fn rows(&self, i: usize) -> std::ops::Range<usize> {
        self.offsets[i]..self.offsets[i + 1]
    }

    /// Mean loss, correct count and, when asked, the gradients.
    fn evaluate(&self, m: &ModelSpec, want_grad: bool) -> Result<(BatchStats, Option<ModelSpec>)> {
        let b = self.graphs();
        let mut inputs = Vec::with_capacity(m.layers.len());
        let mut preacts = Vec::with_capacity(m.layers.len());
        let mut h = self.features.clone();
        for layer in &m.layers {
            let lin = &layer.linears[0];
            let q = self.prop.apply(&h.dot(&lin.weight)) + &lin.bias;
            inputs.push(h);
            h = relu(q.clone());
            preacts.push(q);
        }
        let width = h.ncols();
        let mut z = Array2::zeros((b, width));
        for i in 0..b {
            z.row_mut(i).assign(&pool(&h.slice(s![self.rows(i), ..]).to_owned(), m.pooling));
        }
        let [c0, c1] = &m.classifier;
        let a1 = z.dot(&c0.weight) + &c0.bias;
        let u = a1.mapv(|v| if v < 0.0 { 0.0 } else { v });
        let logits = u.dot(&c1.weight) + &c1.bias;
        if logits.iter().any(|v| !v.is_finite()) {
            return Err(Error::NumericalFailure("non-finite logit during training".into()));
        }
        let scale = 1.0 / b as f64;
        let mut stats = BatchStats { loss: 0.0, correct: 0 };
        let mut dlogits = Array2::zeros(logits.raw_dim());
        for (i, row) in logits.rows().into_iter().enumerate() {
            let row = row.to_vec();
            let y = self.labels[i];
            stats.loss += log_sum_exp(&row) - row[y];
            stats.correct += (argmax(&row) == y) as usize;
            let mut d = Array1::from(softmax(&row));
            d[y] -= 1.0;
            dlogits.row_mut(i).assign(&(d * scale));
        }
        stats.loss *= scale;
        if !want_grad {
            return Ok((stats, None));
        }

        let mut grad = zeros_like(m);
        let [g0, g1] = &mut grad.classifier;
        g1.weight.assign(&u.t().dot(&dlogits));
        g1.bias.assign(&dlogits.sum_axis(Axis(0)));
        let da1 = dlogits.dot(&c1.weight.t()) * step_mask(&a1);
        g0.weight.assign(&z.t().dot(&da1));
        g0.bias.assign(&da1.sum_axis(Axis(0)));
        let dz = da1.dot(&c0.weight.t());

        let mut dh = Array2::zeros(h.raw_dim());
        for i in 0..b {
            let rows = self.rows(i);
            let n = rows.len();
            let mut block = dh.slice_mut(s![rows.clone(), ..]);
            match m.pooling {
                Pooling::Sum => block.assign(&dz.row(i)),
                Pooling::Mean => block.assign(&(&dz.row(i) / n as f64)),
                Pooling::Max => {
                    let hb = h.slice(s![rows, ..]);
                    for (j, col) in hb.columns().into_iter().enumerate() {
                        block[[argmax_view(col), j]] = dz[[i, j]];
                    }
                }
            }
        }
        for k in (0..m.layers.len()).rev() {
            let dq = dh * step_mask(&preacts[k]);
            let lg = &mut grad.layers[k].linears[0];
            lg.bias.assign(&dq.sum_axis(Axis(0)));
            let dp = self.prop.apply_transpose(&dq);
            lg.weight.assign(&inputs[k].t().dot(&dp));
            dh = dp.dot(&m.layers[k].linears[0].weight.t());
        }
        Ok((stats, Some(grad)))
    }
}

fn zeros_like(m: &ModelSpec) -> ModelSpec {
    let mut z = m.clone();
    for d in denses_mut(&mut z) {
        d.weight.fill(0.0);
        d.bias.fill(0.0);
    }
    z
}

fn batch(m: &ModelSpec, dataset: &[DatasetRecord]) -> Result<(Gradients, BatchStats)> {
    let (stats, grad) = Stacked::new(m, dataset)?.evaluate(m, true)?;
    Ok((Gradients(grad.expect("gradients requested")), stats))
}

/// Gradients of the mean cross-entropy with respect to every parameter.
/// The rectifier's derivative at exactly zero is taken as zero.
pub fn analytic_gradients(m: &ModelSpec, dataset: &[DatasetRecord]) -> Result<Gradients> {
    Ok(batch(m, dataset)?.0)
}

#[derive(Clone, Debug, PartialEq)]
pub struct GradientCheck {
    pub max_relative_error: f64,
    /// Flat index (see [`parameters`]) of the worst parameter.
    pub worst_parameter: usize,
    pub parameters_checked: usize,
    pub passed: bool,
}

/// Floor on the denominator of the relative error, so that gradients that are
/// zero up to rounding are compared absolutely.
pub const RELATIVE_ERROR_FLOOR: f64 = 1e-6;

/// Compares every analytic gradient entry against the central difference
/// `(L(θ + h) - L(θ - h)) / 2h`. The relative error of one entry is
/// `|a - n| / max(|a|, |n|, RELATIVE_ERROR_FLOOR)`; the check passes when the
/// worst entry is strictly below `tol`.
pub fn finite_difference_check(m: &ModelSpec, dataset: &[DatasetRecord], h: f64, tol: f64) -> Result<GradientCheck> {
    let analytic = analytic_gradients(m, dataset)?.flatten();
    let theta = parameters(m);
    let mut probe = m.clone();
    let mut values = theta.clone();
    let mut worst = (0.0f64, 0usize);
    for i in 0..theta.len() {
        values[i] = theta[i] + h;
        set_parameters(&mut probe, &values);
        let up = mean_cross_entropy(&probe, dataset)?;
        values[i] = theta[i] - h;
        set_parameters(&mut probe, &values);
        let down = mean_cross_entropy(&probe, dataset)?;
        values[i] = theta[i];
        let numeric = (up - down) / (2.0 * h);
        let a = analytic[i];
        let err = (a - numeric).abs() / a.abs().max(numeric.abs()).max(RELATIVE_ERROR_FLOOR);
        if err > worst.0 || i == 0 {
            worst = (err, i);
        }
    }
    Ok(GradientCheck {
        max_relative_error: worst.0,
        worst_parameter: worst.1,
        parameters_checked: theta.len(),
        passed: worst.0 < tol,
    })
}

/// Trains a GCN from seeded uniform initialization.
pub fn train_gcn(dataset: &[DatasetRecord], arch: &Architecture, cfg: &TrainConfig) -> Result<TrainOutcome> {
    cfg.validate()?;
    if arch.conv_kind != ConvKind::Gcn {
        return Err(Error::Unsupported("only GCN models can be trained".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let model = ModelSpec::random(arch, cfg.init_scale, &mut rng)?;
    train_from(model, dataset, cfg)
}

/// Continues training from the given parameters.
pub fn train_from(mut model: ModelSpec, dataset: &[DatasetRecord], cfg: &TrainConfig) -> Result<TrainOutcome> {
    cfg.validate()?;
    let stacked = Stacked::new(&model, dataset)?;
    let evaluate = |m: &ModelSpec, epoch: usize, want_grad: bool| {
        let (stats, grad) = stacked.evaluate(m, want_grad).map_err(|e| match e {
            Error::NumericalFailure(_) => Error::Diverged { epoch, loss: f64::NAN },
            other => other,
        })?;
        if !stats.loss.is_finite() {
            return Err(Error::Diverged { epoch, loss: stats.loss });
        }
        let record = EpochRecord {
            epoch,
            loss: stats.loss,
            accuracy: stats.correct as f64 / dataset.len() as f64,
        };
        Ok((record, grad))
    };
    let mut theta = parameters(&model);
    let mut velocity = vec![0.0; theta.len()];
    let mut trace = Vec::with_capacity(cfg.epochs + 1);
    for epoch in 0..cfg.epochs {
        let (record, grad) = evaluate(&model, epoch, true)?;
        trace.push(record);
        if cfg.target_train_accuracy.is_some_and(|t| record.accuracy >= t) {
            return Ok(TrainOutcome { model, trace });
        }
        let grad = Gradients(grad.expect("gradients requested")).flatten();
        for ((t, v), g) in theta.iter_mut().zip(&mut velocity).zip(grad) {
            *v = cfg.momentum * *v - cfg.learning_rate * g;
            *t += *v;
        }
        set_parameters(&mut model, &theta);
    }
    trace.push(evaluate(&model, cfg.epochs, false)?.0);
    Ok(TrainOutcome { model, trace })
}

/// Training trace as text, one `epoch loss accuracy` line per record.
pub fn trace_to_string(trace: &[EpochRecord]) -> String {
    let mut out = String::from("# epoch loss accuracy\n");
    for r in trace {
        out.push_str(&format!("{} {:?} {:?}\n", r.epoch, r.loss, r.accuracy));
    }
    out
}

pub fn write_trace(trace: &[EpochRecord], path: impl AsRef<Path>) -> Result<()> {
    let mut f = std::fs::File::create(path)?;
    f.write_all(trace_to_string(trace).as_bytes())?;
    Ok(())
}
