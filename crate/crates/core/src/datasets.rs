//! Synthetic graph-classification corpora with ground-truth motif edge masks,
//! line-delimited dataset files, and the edge-mask ROC AUC.
//!
//! All randomness comes from `ChaCha8Rng::seed_from_u64(seed)`, so a corpus is
//! fully determined by its generator arguments.

use std::io::{BufRead, BufReader, Write};
use std::path::Path;

use ndarray::Array2;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::graph::{Graph, GraphFile};

/// Node feature dimension of every generated graph.
pub const FEATURE_DIM: usize = 10;

/// Base size used for the variable-size motif corpus.
pub const VARSIZE_BASE_NODES: usize = 12;

/// House motif: the 5-cycle 0-1-2-4-3 plus the chord 2-3 under the roof apex 4.
pub const HOUSE_EDGES: [(usize, usize); 6] = [(0, 1), (1, 2), (2, 4), (4, 3), (3, 0), (2, 3)];

pub const PENTAGON_EDGES: [(usize, usize); 5] = [(0, 1), (1, 2), (2, 3), (3, 4), (4, 0)];

#[derive(Clone, Debug, PartialEq)]
pub struct DatasetRecord {
    pub graph: Graph,
    pub label: usize,
    /// One flag per undirected edge; `true` marks a planted motif edge.
    pub gt_edge_mask: Vec<bool>,
    pub motif_count: usize,
}

impl DatasetRecord {
    pub fn new(graph: Graph, label: usize, gt_edge_mask: Vec<bool>, motif_count: usize) -> Result<Self> {
        if gt_edge_mask.len() != graph.edge_count() {
            return Err(Error::Schema(format!(
                "mask has {} entries for {} edges",
                gt_edge_mask.len(),
                graph.edge_count()
            )));
        }
        Ok(Self {
            graph,
            label,
            gt_edge_mask,
            motif_count,
        })
    }
}

/// Tree grown by preferential attachment, one edge per new node.
pub fn preferential_attachment_tree<R: Rng>(n: usize, rng: &mut R) -> Vec<(usize, usize)> {
    let mut edges = Vec::with_capacity(n.saturating_sub(1));
    // Each node appears once per incident edge, so a uniform draw is degree-proportional.
    let mut endpoints: Vec<usize> = Vec::with_capacity(2 * n);
    for v in 1..n {
        let u = if endpoints.is_empty() {
            0
        } else {
            endpoints[rng.random_range(0..endpoints.len())]
        };
        edges.push((u, v));
        endpoints.push(u);
        endpoints.push(v);
    }
    edges
}

/// Mini BA-2Motifs: a preferential-attachment tree of `base_nodes` nodes with
/// one attached motif. Class 0 carries a house, class 1 a pentagon. Graph `i`
/// has label `i % 2`.
pub fn gen_ba2motifs_mini(n_graphs: usize, base_nodes: usize, seed: u64) -> Result<Vec<DatasetRecord>> {
    if base_nodes < 5 {
        return Err(Error::InvalidArgument(format!(
            "base_nodes must be at least 5 (got {base_nodes})"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n_graphs)
        .map(|i| {
            let label = i % 2;
            let motif: &[(usize, usize)] = if label == 0 { &HOUSE_EDGES } else { &PENTAGON_EDGES };
            let mut edges = preferential_attachment_tree(base_nodes, &mut rng);
            let mut mask = vec![false; edges.len()];
            edges.extend(motif.iter().map(|&(u, v)| (base_nodes + u, base_nodes + v)));
            mask.resize(edges.len(), true);
            let anchor = rng.random_range(0..base_nodes);
            let entry = base_nodes + rng.random_range(0..5);
            edges.push((anchor, entry));
            mask.push(false);
            let graph = Graph::unweighted(base_nodes + 5, FEATURE_DIM, &edges)?;
            DatasetRecord::new(graph, label, mask, 1)
        })
        .collect()
}

/// Variable explanation size: class 1 graphs carry between 1 and
/// `max_motifs` disjoint 3-node stars (a centre with two leaves, linked to the
/// base through the centre); class 0 graphs carry none. Node features are
/// one-hot types: base, star centre, star leaf.
pub fn gen_varsize_motifs(n_graphs: usize, max_motifs: usize, seed: u64) -> Result<Vec<DatasetRecord>> {
    if max_motifs == 0 {
        return Err(Error::InvalidArgument("max_motifs must be at least 1".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let base = VARSIZE_BASE_NODES;
    (0..n_graphs)
        .map(|i| {
            let label = i % 2;
            let copies = if label == 1 { rng.random_range(1..=max_motifs) } else { 0 };
            let n = base + 3 * copies;
            let mut edges = preferential_attachment_tree(base, &mut rng);
            let mut mask = vec![false; edges.len()];
            let mut features = Array2::zeros((n, FEATURE_DIM));
            for v in 0..base {
                features[[v, 0]] = 1.0;
            }
            for c in 0..copies {
                let centre = base + 3 * c;
                features[[centre, 1]] = 1.0;
                features[[centre + 1, 2]] = 1.0;
                features[[centre + 2, 2]] = 1.0;
                edges.push((centre, centre + 1));
                edges.push((centre, centre + 2));
                mask.extend([true, true]);
                edges.push((rng.random_range(0..base), centre));
                mask.push(false);
            }
            let weighted: Vec<_> = edges.iter().map(|&(u, v)| (u, v, 1.0)).collect();
            let graph = Graph::from_undirected(features, &weighted)?;
            DatasetRecord::new(graph, label, mask, copies)
        })
        .collect()
}

/// ROC AUC of `scores` against a binary mask, via average ranks so that each
/// tied positive/negative pair contributes one half.
pub fn edge_mask_auc(scores: &[f64], mask: &[bool]) -> Result<f64> {
    if scores.len() != mask.len() {
        return Err(Error::DimensionMismatch(format!(
            "{} scores for {} mask entries",
            scores.len(),
            mask.len()
        )));
    }
    let positives = mask.iter().filter(|&&m| m).count();
    let negatives = mask.len() - positives;
    if positives == 0 || negatives == 0 {
        return Err(Error::UndefinedMetric(
            "AUC needs at least one positive and one negative edge".into(),
        ));
    }
    if scores.iter().any(|s| s.is_nan()) {
        return Err(Error::UndefinedMetric("NaN score".into()));
    }
    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.sort_by(|&a, &b| scores[a].total_cmp(&scores[b]));
    let mut positive_rank_sum = 0.0;
    let mut i = 0;
    while i < order.len() {
        let mut j = i;
        while j + 1 < order.len() && scores[order[j + 1]] == scores[order[i]] {
            j += 1;
        }
        // Ranks i+1 ..= j+1 share their mean.
        let rank = (i + j + 2) as f64 / 2.0;
        positive_rank_sum += rank * order[i..=j].iter().filter(|&&k| mask[k]).count() as f64;
        i = j + 1;
    }
    let (p, n) = (positives as f64, negatives as f64);
    Ok((positive_rank_sum - p * (p + 1.0) / 2.0) / (p * n))
}

#[derive(Serialize, Deserialize)]
struct RecordLine {
    graph: GraphFile,
    label: usize,
    gt_edge_mask: Vec<u8>,
    motif_count: usize,
}

fn record_line(r: &DatasetRecord) -> Result<String> {
    let line = RecordLine {
        graph: r.graph.to_file(),
        label: r.label,
        gt_edge_mask: r.gt_edge_mask.iter().map(|&b| b as u8).collect(),
        motif_count: r.motif_count,
    };
    Ok(serde_json::to_string(&line)?)
}

/// One JSON record per line.
pub fn dataset_to_string(records: &[DatasetRecord]) -> Result<String> {
    let mut out = String::new();
    for r in records {
        out.push_str(&record_line(r)?);
        out.push('\n');
    }
    Ok(out)
}

pub fn save_dataset(records: &[DatasetRecord], path: impl AsRef<Path>) -> Result<()> {
    let mut f = std::io::BufWriter::new(std::fs::File::create(path)?);
    f.write_all(dataset_to_string(records)?.as_bytes())?;
    f.flush()?;
    Ok(())
}

pub fn parse_dataset<R: BufRead>(reader: R) -> Result<Vec<DatasetRecord>> {
    let mut out = Vec::new();
    for (i, line) in reader.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let parsed = serde_json::from_str::<RecordLine>(&line)
            .map_err(Error::from)
            .and_then(|r| {
                if r.gt_edge_mask.iter().any(|&b| b > 1) {
                    return Err(Error::Schema("mask entries must be 0 or 1".into()));
                }
                let graph = Graph::from_file(&r.graph)?;
                DatasetRecord::new(
                    graph,
                    r.label,
                    r.gt_edge_mask.iter().map(|&b| b == 1).collect(),
                    r.motif_count,
                )
            })
            .map_err(|e| Error::Parse {
                line: i + 1,
                message: e.to_string(),
            })?;
        out.push(parsed);
    }
    Ok(out)
}

pub fn load_dataset(path: impl AsRef<Path>) -> Result<Vec<DatasetRecord>> {
    parse_dataset(BufReader::new(std::fs::File::open(path)?))
}

/// SHA-256 (hex) of the corpus in its line-delimited file form.
pub fn dataset_checksum(records: &[DatasetRecord]) -> Result<String> {
    Ok(hex_digest(dataset_to_string(records)?.as_bytes()))
}

pub fn hex_digest(bytes: &[u8]) -> String {
    Sha256::digest(bytes).iter().map(|b| format!("{b:02x}")).collect()
}
