use std::path::Path;

use ndarray::{Array1, Array2};
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Current model file format version.
pub const MODEL_FORMAT_VERSION: u32 = 1;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ConvKind {
    Gcn,
    Gin,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Pooling {
    Mean,
    Sum,
    /// Channel-wise maximum over nodes.
    Max,
}

impl Pooling {
    pub fn default_for(kind: ConvKind) -> Self {
        match kind {
            ConvKind::Gcn => Pooling::Mean,
            ConvKind::Gin => Pooling::Sum,
        }
    }
}

/// Affine map `x W + b` with `W` stored as `in_dim × out_dim`.
#[derive(Clone, Debug, PartialEq)]
pub struct Dense {
    pub weight: Array2<f64>,
    pub bias: Array1<f64>,
}

impl Dense {
    pub fn new(weight: Array2<f64>, bias: Array1<f64>) -> Result<Self> {
        if weight.ncols() != bias.len() {
            return Err(Error::DimensionMismatch(format!(
                "weight is {}x{} but bias has length {}",
                weight.nrows(),
                weight.ncols(),
                bias.len()
            )));
        }
        Ok(Self { weight, bias })
    }

    pub fn zeros(in_dim: usize, out_dim: usize) -> Self {
        Self {
            weight: Array2::zeros((in_dim, out_dim)),
            bias: Array1::zeros(out_dim),
        }
    }

    /// Uniform(-scale, scale) entries for both weight and bias.
    pub fn random<R: Rng>(in_dim: usize, out_dim: usize, scale: f64, rng: &mut R) -> Self {
        let mut draw = || {
            if scale > 0.0 {
                rng.random_range(-scale..scale)
            } else {
                0.0
            }
        };
        let weight = Array2::from_shape_simple_fn((in_dim, out_dim), &mut draw);
        let bias = Array1::from_shape_simple_fn(out_dim, &mut draw);
        Self { weight, bias }
    }

    pub fn in_dim(&self) -> usize {
        self.weight.nrows()
    }

    pub fn out_dim(&self) -> usize {
        self.weight.ncols()
    }

    pub fn apply(&self, x: &Array2<f64>) -> Array2<f64> {
        x.dot(&self.weight) + &self.bias
    }

    fn is_finite(&self) -> bool {
        self.weight.iter().chain(self.bias.iter()).all(|v| v.is_finite())
    }
}

/// A message-passing layer: one dense map for GCN, a two-layer MLP for GIN.
#[derive(Clone, Debug, PartialEq)]
pub struct ConvLayer {
    pub linears: Vec<Dense>,
}

impl ConvLayer {
    pub fn in_dim(&self) -> usize {
        self.linears[0].in_dim()
    }

    pub fn out_dim(&self) -> usize {
        self.linears[self.linears.len() - 1].out_dim()
    }
}

/// Parameters of a graph classifier: `L` message-passing layers, a pooling
/// readout and a two-layer classifier head producing logits.
#[derive(Clone, Debug, PartialEq)]
pub struct ModelSpec {
    pub conv_kind: ConvKind,
    pub layers: Vec<ConvLayer>,
    /// GIN self-weights `ε_k`, one per layer; empty for GCN.
    pub epsilons: Vec<f64>,
    pub pooling: Pooling,
    pub classifier: [Dense; 2],
}

/// Shape of a classifier, independent of its parameter values.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Architecture {
    pub conv_kind: ConvKind,
    pub input_dim: usize,
    pub layers: usize,
    pub hidden_dim: usize,
    pub pooling: Pooling,
    pub num_classes: usize,
}

impl Architecture {
    pub fn gcn(input_dim: usize, layers: usize, hidden_dim: usize, num_classes: usize) -> Self {
        Self {
            conv_kind: ConvKind::Gcn,
            input_dim,
            layers,
            hidden_dim,
            pooling: Pooling::Mean,
            num_classes,
        }
    }

    pub fn gin(input_dim: usize, layers: usize, hidden_dim: usize, num_classes: usize) -> Self {
        Self {
            conv_kind: ConvKind::Gin,
            pooling: Pooling::Sum,
            ..Self::gcn(input_dim, layers, hidden_dim, num_classes)
        }
    }
}

impl ModelSpec {
    pub fn new(
        conv_kind: ConvKind,
        layers: Vec<ConvLayer>,
        epsilons: Vec<f64>,
        pooling: Pooling,
        classifier: [Dense; 2],
    ) -> Result<Self> {
        let m = Self {
            conv_kind,
            layers,
            epsilons,
            pooling,
            classifier,
        };
        m.validate()?;
        Ok(m)
    }

    /// Random parameters, uniform in `(-scale, scale)`.
    pub fn random<R: Rng>(arch: &Architecture, scale: f64, rng: &mut R) -> Result<Self> {
        if arch.layers == 0 || arch.hidden_dim == 0 || arch.num_classes == 0 {
            return Err(Error::InvalidArgument(
                "architecture needs at least one layer, hidden unit and class".into(),
            ));
        }
        let mut layers = Vec::with_capacity(arch.layers);
        let mut fan_in = arch.input_dim;
        for _ in 0..arch.layers {
            let linears = match arch.conv_kind {
                ConvKind::Gcn => vec![Dense::random(fan_in, arch.hidden_dim, scale, rng)],
                ConvKind::Gin => vec![
                    Dense::random(fan_in, arch.hidden_dim, scale, rng),
                    Dense::random(arch.hidden_dim, arch.hidden_dim, scale, rng),
                ],
            };
            layers.push(ConvLayer { linears });
            fan_in = arch.hidden_dim;
        }
        let epsilons = match arch.conv_kind {
            ConvKind::Gcn => Vec::new(),
            ConvKind::Gin => vec![0.0; arch.layers],
        };
        let classifier = [
            Dense::random(arch.hidden_dim, arch.hidden_dim, scale, rng),
            Dense::random(arch.hidden_dim, arch.num_classes, scale, rng),
        ];
        Self::new(arch.conv_kind, layers, epsilons, arch.pooling, classifier)
    }

    pub fn input_dim(&self) -> usize {
        self.layers[0].in_dim()
    }

    pub fn hidden_dim(&self) -> usize {
        self.layers[self.layers.len() - 1].out_dim()
    }

    pub fn num_classes(&self) -> usize {
        self.classifier[1].out_dim()
    }

    pub fn epsilon(&self, layer: usize) -> f64 {
        self.epsilons.get(layer).copied().unwrap_or(0.0)
    }

    pub fn architecture(&self) -> Architecture {
        Architecture {
            conv_kind: self.conv_kind,
            input_dim: self.input_dim(),
            layers: self.layers.len(),
            hidden_dim: self.hidden_dim(),
            pooling: self.pooling,
            num_classes: self.num_classes(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.layers.is_empty() {
            return Err(Error::Schema("model has no message-passing layers".into()));
        }
        let per_layer = match self.conv_kind {
            ConvKind::Gcn => 1,
            ConvKind::Gin => 2,
        };
        let mut dim = self.input_dim();
        for (k, layer) in self.layers.iter().enumerate() {
            if layer.linears.len() != per_layer {
                return Err(Error::Schema(format!(
                    "layer {k} has {} linear maps, expected {per_layer}",
                    layer.linears.len()
                )));
            }
            for lin in &layer.linears {
                chain(&mut dim, lin, &format!("layer {k}"))?;
            }
        }
        for (j, lin) in self.classifier.iter().enumerate() {
            chain(&mut dim, lin, &format!("classifier {j}"))?;
        }
        match self.conv_kind {
            ConvKind::Gcn if !self.epsilons.is_empty() => {
                return Err(Error::Schema("GCN models carry no epsilons".into()))
            }
            ConvKind::Gin if self.epsilons.len() != self.layers.len() => {
                return Err(Error::Schema(format!(
                    "{} epsilons for {} layers",
                    self.epsilons.len(),
                    self.layers.len()
                )))
            }
            _ => {}
        }
        let finite = self.layers.iter().flat_map(|l| &l.linears).all(Dense::is_finite)
            && self.classifier.iter().all(Dense::is_finite)
            && self.epsilons.iter().all(|e| e.is_finite());
        if !finite {
            return Err(Error::Schema("non-finite parameter".into()));
        }
        Ok(())
    }

    pub fn to_file(&self) -> ModelFile {
        ModelFile {
            version: MODEL_FORMAT_VERSION,
            conv_kind: self.conv_kind,
            pooling: self.pooling,
            num_classes: self.num_classes(),
            layers: self
                .layers
                .iter()
                .map(|l| LayerFile {
                    linears: l.linears.iter().map(DenseFile::from).collect(),
                })
                .collect(),
            epsilons: self.epsilons.clone(),
            classifier: self.classifier.iter().map(DenseFile::from).collect(),
        }
    }

    pub fn from_file(file: ModelFile) -> Result<Self> {
        if file.version != MODEL_FORMAT_VERSION {
            return Err(Error::Schema(format!(
                "unsupported model version {} (expected {MODEL_FORMAT_VERSION})",
                file.version
            )));
        }
        let layers = file
            .layers
            .into_iter()
            .map(|l| {
                Ok(ConvLayer {
                    linears: l.linears.into_iter().map(Dense::try_from).collect::<Result<_>>()?,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        let classifier: Vec<Dense> = file
            .classifier
            .into_iter()
            .map(Dense::try_from)
            .collect::<Result<_>>()?;
        let classifier: [Dense; 2] = classifier
            .try_into()
            .map_err(|v: Vec<Dense>| Error::Schema(format!("classifier has {} layers, expected 2", v.len())))?;
        let epsilons = match (file.conv_kind, file.epsilons.is_empty()) {
            (ConvKind::Gin, true) => vec![0.0; layers.len()],
            _ => file.epsilons,
        };
        let m = Self::new(file.conv_kind, layers, epsilons, file.pooling, classifier)?;
        if m.num_classes() != file.num_classes {
            return Err(Error::Schema(format!(
                "num_classes = {} but classifier outputs {}",
                file.num_classes,
                m.num_classes()
            )));
        }
        Ok(m)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(&self.to_file())? + "\n")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Self::from_file(serde_json::from_str(text)?)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        std::fs::write(path, self.to_json()?)?;
        Ok(())
    }
}

fn chain(dim: &mut usize, lin: &Dense, what: &str) -> Result<()> {
    if lin.in_dim() != *dim {
        return Err(Error::DimensionMismatch(format!(
            "{what} expects input dimension {} but receives {}",
            lin.in_dim(),
            dim
        )));
    }
    if lin.bias.len() != lin.out_dim() {
        return Err(Error::DimensionMismatch(format!("{what} bias length")));
    }
    *dim = lin.out_dim();
    Ok(())
}

/// On-disk model schema.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelFile {
    pub version: u32,
    pub conv_kind: ConvKind,
    pub pooling: Pooling,
    pub num_classes: usize,
    pub layers: Vec<LayerFile>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub epsilons: Vec<f64>,
    pub classifier: Vec<DenseFile>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LayerFile {
    pub linears: Vec<DenseFile>,
}

/// Row-major weight (`in_dim` rows of `out_dim` entries) plus bias.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DenseFile {
    pub in_dim: usize,
    pub out_dim: usize,
    pub weight: Vec<Vec<f64>>,
    pub bias: Vec<f64>,
}

impl From<&Dense> for DenseFile {
    fn from(d: &Dense) -> Self {
        Self {
            in_dim: d.in_dim(),
            out_dim: d.out_dim(),
            weight: d.weight.rows().into_iter().map(|r| r.to_vec()).collect(),
            bias: d.bias.to_vec(),
        }
    }
}

impl TryFrom<DenseFile> for Dense {
    type Error = Error;

    fn try_from(f: DenseFile) -> Result<Self> {
        if f.weight.len() != f.in_dim || f.weight.iter().any(|r| r.len() != f.out_dim) {
            return Err(Error::Schema(format!(
                "weight matrix does not match declared {}x{}",
                f.in_dim, f.out_dim
            )));
        }
        if f.bias.len() != f.out_dim {
            return Err(Error::Schema(format!(
                "bias has length {}, expected {}",
                f.bias.len(),
                f.out_dim
            )));
        }
        let flat: Vec<f64> = f.weight.into_iter().flatten().collect();
        let weight = Array2::from_shape_vec((f.in_dim, f.out_dim), flat)
            .map_err(|e| Error::Schema(e.to_string()))?;
        Dense::new(weight, Array1::from(f.bias))
    }
}
