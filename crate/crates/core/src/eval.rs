//! Evaluation reports over a model and a dataset: fidelity against edge
//! sparsity, ranking methods compared through the same prefix search,
//! brute-force oracle gaps, forward-pass timing, and DOT rendering.
//!
//! Means are accumulated in dataset order, so every report is a pure
//! function of its inputs.

use std::fmt::Write as _;
use std::path::Path;
use std::time::Instant;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::datasets::{preferential_attachment_tree, DatasetRecord};
use crate::error::{Error, Result};
use crate::explain::{
    brute_force_best_subgraph, explain_in, ig_edge_scores, sa_edge_scores, score_all_edges_linear_gradient,
    ExplainConfig, FidelityEvaluator, KRange, Method,
};
use crate::gnn::{ModelSpec, Session};
use crate::graph::{EdgeId, Graph};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CurvePoint {
    pub sparsity_level: f64,
    pub fidelity_plus: f64,
    pub fidelity_minus: f64,
    pub overall: f64,
    pub n_instances: usize,
}

/// Number of top-ranked edges kept at sparsity `level`: `ceil((1 - level) |E|)`.
/// A relative tolerance absorbs rounding in `1 - level`, so that for example
/// a level of 0.7 on 10 edges keeps 3.
pub fn top_k_for_level(level: f64, edge_count: usize) -> usize {
    let raw = (1.0 - level) * edge_count as f64;
    let k = (raw - 1e-9 * edge_count.max(1) as f64).ceil().max(0.0) as usize;
    k.min(edge_count)
}

fn scores_for(session: &Session<'_>, g: &Graph, class: usize, method: Method, cfg: &ExplainConfig) -> Result<Vec<f64>> {
    let s = match method {
        Method::LinearGradient => score_all_edges_linear_gradient(session, g, class, cfg.base_weight)?,
        Method::Sa => sa_edge_scores(session, g, class, cfg.sa_step)?,
        Method::Ig => ig_edge_scores(session, g, class, cfg.ig_steps, cfg.base_weight, cfg.sa_step)?,
        Method::External => return Err(Error::InvalidArgument("external scores cannot be computed".into())),
    };
    Ok(s.scores)
}

/// Mean fidelities of the top-ranked edges at each sparsity level, with the
/// target class set to each graph's predicted class. Graphs without edges
/// are skipped.
pub fn fidelity_curve(m: &ModelSpec, dataset: &[DatasetRecord], method: Method, levels: &[f64]) -> Result<Vec<CurvePoint>> {
    fidelity_curve_with(m, dataset, method, levels, &ExplainConfig::with_method(method))
}

pub fn fidelity_curve_with(
    m: &ModelSpec,
    dataset: &[DatasetRecord],
    method: Method,
    levels: &[f64],
    cfg: &ExplainConfig,
) -> Result<Vec<CurvePoint>> {
    if let Some(l) = levels.iter().find(|l| !(0.0..=1.0).contains(*l)) {
        return Err(Error::InvalidArgument(format!("sparsity level {l} outside [0, 1]")));
    }
    let mut sums = vec![(0.0, 0.0); levels.len()];
    let mut count = 0;
    for r in dataset.iter().filter(|r| r.graph.edge_count() > 0) {
        let session = Session::new(m);
        let original = session.forward(&r.graph)?;
        let class = original.predicted_class;
        let ranked = crate::explain::rank_edges(&scores_for(&session, &r.graph, class, method, cfg)?);
        let eval = FidelityEvaluator::from_prediction(&session, &r.graph, class, &original)?;
        for (slot, &level) in sums.iter_mut().zip(levels) {
            let k = top_k_for_level(level, r.graph.edge_count());
            let c = eval.candidate(&ranked[..k])?;
            slot.0 += c.fidelity_plus;
            slot.1 += c.fidelity_minus;
        }
        count += 1;
    }
    Ok(levels
        .iter()
        .zip(sums)
        .map(|(&sparsity_level, (fp, fm))| {
            let (fidelity_plus, fidelity_minus) = if count == 0 {
                (0.0, 0.0)
            } else {
                (fp / count as f64, fm / count as f64)
            };
            CurvePoint {
                sparsity_level,
                fidelity_plus,
                fidelity_minus,
                overall: fidelity_plus - fidelity_minus,
                n_instances: count,
            }
        })
        .collect())
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MethodSummary {
    pub method: Method,
    pub mean_overall: f64,
    pub mean_fidelity_plus: f64,
    pub mean_fidelity_minus: f64,
    pub mean_sparsity: f64,
    pub mean_forward_passes: f64,
    pub n_instances: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ComparisonReport {
    pub k_range: KRange,
    pub methods: Vec<MethodSummary>,
}

impl ComparisonReport {
    pub fn get(&self, method: Method) -> Option<&MethodSummary> {
        self.methods.iter().find(|s| s.method == method)
    }

    pub fn to_table(&self) -> String {
        let mut out = format!(
            "{:<16} {:>10} {:>10} {:>10} {:>10} {:>10} {:>6}\n",
            "method", "overall", "fid+", "fid-", "sparsity", "forwards", "n"
        );
        for s in &self.methods {
            let _ = writeln!(
                out,
                "{:<16} {:>10.6} {:>10.6} {:>10.6} {:>10.4} {:>10.1} {:>6}",
                s.method.name(),
                s.mean_overall,
                s.mean_fidelity_plus,
                s.mean_fidelity_minus,
                s.mean_sparsity,
                s.mean_forward_passes,
                s.n_instances
            );
        }
        out
    }
}

/// Runs every method's ranking through the same prefix search and averages
/// the chosen explanations. Graphs without edges are skipped.
pub fn compare_methods(m: &ModelSpec, dataset: &[DatasetRecord], methods: &[Method], k_range: KRange) -> Result<ComparisonReport> {
    let mut summaries = Vec::with_capacity(methods.len());
    for &method in methods {
        let cfg = ExplainConfig {
            method,
            k_range,
            ..ExplainConfig::default()
        };
        let mut acc = [0.0; 5];
        let mut n = 0;
        for r in dataset.iter().filter(|r| r.graph.edge_count() > 0) {
            let e = explain_in(&Session::new(m), &r.graph, &cfg)?;
            acc[0] += e.overall;
            acc[1] += e.fidelity_plus;
            acc[2] += e.fidelity_minus;
            acc[3] += e.sparsity;
            acc[4] += e.forward_passes_used as f64;
            n += 1;
        }
        let mean = |v: f64| if n == 0 { 0.0 } else { v / n as f64 };
        summaries.push(MethodSummary {
            method,
            mean_overall: mean(acc[0]),
            mean_fidelity_plus: mean(acc[1]),
            mean_fidelity_minus: mean(acc[2]),
            mean_sparsity: mean(acc[3]),
            mean_forward_passes: mean(acc[4]),
            n_instances: n,
        });
    }
    Ok(ComparisonReport {
        k_range,
        methods: summaries,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OracleInstance {
    pub index: usize,
    pub edges: usize,
    pub search_overall: f64,
    pub oracle_overall: f64,
    pub gap: f64,
    pub search_edges: Vec<EdgeId>,
    pub oracle_edges: Vec<EdgeId>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OracleReport {
    pub cap: usize,
    pub evaluated: usize,
    pub skipped: usize,
    pub mean_gap: f64,
    pub max_gap: f64,
    pub median_gap: f64,
    /// Instances where the search matched the oracle.
    pub exact_matches: usize,
    /// Mean of `search / oracle` over instances with a positive oracle score.
    pub mean_ratio: f64,
    pub ratio_instances: usize,
    pub instances: Vec<OracleInstance>,
}

/// Linear-gradient explanations against the best subset over all edge
/// subsets, for each graph with at most `cap` edges.
pub fn oracle_report(m: &ModelSpec, dataset: &[DatasetRecord], cap: usize) -> Result<OracleReport> {
    let cfg = ExplainConfig::default();
    let mut instances = Vec::new();
    let mut skipped = 0;
    for (index, r) in dataset.iter().enumerate() {
        let edges = r.graph.edge_count();
        if edges == 0 || edges > cap {
            skipped += 1;
            continue;
        }
        let session = Session::new(m);
        let e = explain_in(&session, &r.graph, &cfg)?;
        let best = brute_force_best_subgraph(&session, &r.graph, e.target_class, cap)?;
        instances.push(OracleInstance {
            index,
            edges,
            search_overall: e.overall,
            oracle_overall: best.overall,
            gap: best.overall - e.overall,
            search_edges: e.subgraph_edges,
            oracle_edges: best.edges,
        });
    }
    let n = instances.len();
    let mut gaps: Vec<f64> = instances.iter().map(|i| i.gap).collect();
    gaps.sort_by(f64::total_cmp);
    let median_gap = match n {
        0 => 0.0,
        _ if n % 2 == 1 => gaps[n / 2],
        _ => 0.5 * (gaps[n / 2 - 1] + gaps[n / 2]),
    };
    let ratios: Vec<f64> = instances
        .iter()
        .filter(|i| i.oracle_overall > 0.0)
        .map(|i| i.search_overall / i.oracle_overall)
        .collect();
    Ok(OracleReport {
        cap,
        evaluated: n,
        skipped,
        mean_gap: if n == 0 { 0.0 } else { gaps.iter().sum::<f64>() / n as f64 },
        max_gap: gaps.last().copied().unwrap_or(0.0),
        median_gap,
        exact_matches: instances.iter().filter(|i| i.gap == 0.0).count(),
        mean_ratio: if ratios.is_empty() { 1.0 } else { ratios.iter().sum::<f64>() / ratios.len() as f64 },
        ratio_instances: ratios.len(),
        instances,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TimingRow {
    pub edges: usize,
    pub reps: usize,
    pub mean_seconds: f64,
    pub forward_passes: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TimingReport {
    pub rows: Vec<TimingRow>,
    /// Least-squares `forward_passes = slope · edges + intercept`.
    pub slope: f64,
    pub intercept: f64,
    pub max_abs_residual: f64,
}

/// Preferential-attachment tree with `edges` edges and features drawn for
/// the model's input dimension; used for timing.
pub fn timing_graph(edges: usize, input_dim: usize, seed: u64) -> Result<Graph> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let tree = preferential_attachment_tree(edges + 1, &mut rng);
    Graph::unweighted(edges + 1, input_dim, &tree)
}

/// Wall time and exact forward-pass count of a full linear-gradient
/// explanation on trees of the given edge counts.
pub fn timing_report(m: &ModelSpec, sizes: &[usize], reps: usize) -> Result<TimingReport> {
    if reps == 0 {
        return Err(Error::InvalidArgument("reps must be at least 1".into()));
    }
    let cfg = ExplainConfig::default();
    let mut rows = Vec::with_capacity(sizes.len());
    for &edges in sizes {
        if edges == 0 {
            return Err(Error::InvalidArgument("timing sizes must be positive".into()));
        }
        let g = timing_graph(edges, m.input_dim(), edges as u64)?;
        let mut total = 0.0;
        let mut passes = 0;
        for _ in 0..reps {
            let start = Instant::now();
            let e = explain_in(&Session::new(m), &g, &cfg)?;
            total += start.elapsed().as_secs_f64();
            passes = e.forward_passes_used;
        }
        rows.push(TimingRow {
            edges,
            reps,
            mean_seconds: total / reps as f64,
            forward_passes: passes,
        });
    }
    let pts: Vec<(f64, f64)> = rows.iter().map(|r| (r.edges as f64, r.forward_passes as f64)).collect();
    let (slope, intercept) = least_squares(&pts);
    let max_abs_residual = pts
        .iter()
        .map(|&(x, y)| (y - (slope * x + intercept)).abs())
        .fold(0.0, f64::max);
    Ok(TimingReport {
        rows,
        slope,
        intercept,
        max_abs_residual,
    })
}

/// Ordinary least-squares line through the points; a single point gives a
/// zero slope through it. Uses raw sums so that integer-valued data on an
/// exact line is fitted without rounding.
pub fn least_squares(points: &[(f64, f64)]) -> (f64, f64) {
    let n = points.len() as f64;
    if points.is_empty() {
        return (0.0, 0.0);
    }
    let sx: f64 = points.iter().map(|p| p.0).sum();
    let sy: f64 = points.iter().map(|p| p.1).sum();
    let sxx: f64 = points.iter().map(|p| p.0 * p.0).sum();
    let sxy: f64 = points.iter().map(|p| p.0 * p.1).sum();
    let denom = n * sxx - sx * sx;
    if denom == 0.0 {
        return (0.0, sy / n);
    }
    let slope = (n * sxy - sx * sy) / denom;
    (slope, (sy - slope * sx) / n)
}

impl TimingReport {
    pub fn to_table(&self) -> String {
        let mut out = format!("{:>8} {:>6} {:>14} {:>10}\n", "edges", "reps", "mean_seconds", "forwards");
        for r in &self.rows {
            let _ = writeln!(out, "{:>8} {:>6} {:>14.6} {:>10}", r.edges, r.reps, r.mean_seconds, r.forward_passes);
        }
        let _ = writeln!(
            out,
            "fit: forwards = {:.6} * edges + {:.6}, max residual {:.3e}",
            self.slope, self.intercept, self.max_abs_residual
        );
        out
    }
}

/// Graphviz rendering of `g` with the explanation edges bold and red and
/// every other edge gray.
pub fn dot_string(g: &Graph, explanation_edges: &[EdgeId]) -> Result<String> {
    g.check_edges(explanation_edges)?;
    let mut chosen = vec![false; g.edge_count()];
    for &e in explanation_edges {
        chosen[e] = true;
    }
    let mut out = String::from("graph explanation {\n  node [shape=circle];\n");
    for v in 0..g.node_count() {
        let _ = writeln!(out, "  {v};");
    }
    for (e, &is_chosen) in chosen.iter().enumerate() {
        let (u, v) = g.endpoints(e);
        let style = if is_chosen {
            "color=\"red\", penwidth=3, style=\"bold\""
        } else {
            "color=\"gray\", penwidth=1, style=\"solid\""
        };
        let _ = writeln!(out, "  {u} -- {v} [{style}, label=\"{e}\"];");
    }
    out.push_str("}\n");
    Ok(out)
}

pub fn export_dot(g: &Graph, explanation_edges: &[EdgeId], path: impl AsRef<Path>) -> Result<()> {
    std::fs::write(path, dot_string(g, explanation_edges)?)?;
    Ok(())
}
