//! Edge scoring and subgraph search.
//!
//! An edge's linear-gradient score is the slope of the target-class
//! probability along the straight line from a base point, where the edge is
//! set to the base weight, to the observed graph. Edges ranked by score are
//! then searched prefix by prefix for the edge-induced subgraph that
//! maximizes `Fidelity+ - Fidelity-`. Finite-difference saliency and
//! integrated gradients are provided as alternative rankings, and a
//! brute-force search over every edge subset serves as an oracle.
//!
//! Every function that runs the model takes a [`Session`], whose counter
//! records the forward passes spent.

use std::collections::BTreeMap;
use std::fmt;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gnn::{ModelSpec, Prediction, Session};
use crate::graph::{EdgeId, Graph};
use crate::induce::induce_by_edges;

pub const DEFAULT_BASE_WEIGHT: f64 = 0.0;
pub const DEFAULT_SA_STEP: f64 = 1e-3;
pub const DEFAULT_IG_STEPS: usize = 50;
pub const DEFAULT_BRUTE_FORCE_CAP: usize = 14;
/// Largest subset enumeration `brute_force_best_subgraph` accepts.
pub const MAX_BRUTE_FORCE_CAP: usize = 24;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Method {
    LinearGradient,
    #[serde(rename = "sa-fd", alias = "sa")]
    Sa,
    #[serde(rename = "ig-fd", alias = "ig")]
    Ig,
    /// Scores supplied by the caller.
    External,
}

impl Method {
    pub fn name(self) -> &'static str {
        match self {
            Method::LinearGradient => "linear-gradient",
            Method::Sa => "sa-fd",
            Method::Ig => "ig-fd",
            Method::External => "external",
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "linear-gradient" | "lg" => Ok(Method::LinearGradient),
            "sa" | "sa-fd" => Ok(Method::Sa),
            "ig" | "ig-fd" => Ok(Method::Ig),
            "external" => Ok(Method::External),
            other => Err(Error::InvalidArgument(format!("unknown method `{other}`"))),
        }
    }
}

/// Which prefix sizes the search considers.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum KRange {
    /// `1..=|E|`.
    #[default]
    Full,
    /// `2..=|E|-1`; graphs with fewer than three edges fall back to `Full`.
    Paper,
}

impl KRange {
    pub fn bounds(self, edge_count: usize) -> (usize, usize) {
        match self {
            KRange::Paper if edge_count >= 3 => (2, edge_count - 1),
            _ => (1, edge_count),
        }
    }
}

impl FromStr for KRange {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "full" => Ok(KRange::Full),
            "paper" => Ok(KRange::Paper),
            other => Err(Error::InvalidArgument(format!("unknown k range `{other}`"))),
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum ClassPolicy {
    /// The class the model predicts for the full graph.
    #[default]
    Auto,
    Fixed(usize),
}

impl FromStr for ClassPolicy {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        if s == "auto" {
            return Ok(ClassPolicy::Auto);
        }
        s.parse()
            .map(ClassPolicy::Fixed)
            .map_err(|_| Error::InvalidArgument(format!("class must be `auto` or an index, got `{s}`")))
    }
}

/// One score per undirected edge.
#[derive(Clone, Debug, PartialEq)]
pub struct EdgeScores {
    pub scores: Vec<f64>,
    pub target_class: usize,
    pub method: Method,
}

impl EdgeScores {
    pub fn new(scores: Vec<f64>, target_class: usize, method: Method) -> Result<Self> {
        if let Some(i) = scores.iter().position(|s| !s.is_finite()) {
            return Err(Error::NumericalFailure(format!("score of edge {i} is not finite")));
        }
        Ok(Self {
            scores,
            target_class,
            method,
        })
    }

    pub fn ranked(&self) -> Vec<EdgeId> {
        rank_edges(&self.scores)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ExplainConfig {
    pub method: Method,
    pub k_range: KRange,
    pub class: ClassPolicy,
    pub base_weight: f64,
    pub sa_step: f64,
    pub ig_steps: usize,
}

impl Default for ExplainConfig {
    fn default() -> Self {
        Self {
            method: Method::LinearGradient,
            k_range: KRange::Full,
            class: ClassPolicy::Auto,
            base_weight: DEFAULT_BASE_WEIGHT,
            sa_step: DEFAULT_SA_STEP,
            ig_steps: DEFAULT_IG_STEPS,
        }
    }
}

impl ExplainConfig {
    pub fn with_method(method: Method) -> Self {
        Self {
            method,
            ..Self::default()
        }
    }
}

/// Fidelity of one candidate prefix.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Candidate {
    pub k: usize,
    pub fidelity_plus: f64,
    pub fidelity_minus: f64,
    pub overall: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Explanation {
    pub target_class: usize,
    pub method: Method,
    pub k_range: KRange,
    /// Per-edge scores behind the ranking (empty for a bare [`linear_search`]).
    pub scores: Vec<f64>,
    pub ranked_edges: Vec<EdgeId>,
    pub chosen_k: usize,
    /// The chosen prefix, sorted by edge index.
    pub subgraph_edges: Vec<EdgeId>,
    pub fidelity_plus: f64,
    pub fidelity_minus: f64,
    pub overall: f64,
    /// Edge sparsity of the chosen subgraph.
    pub sparsity: f64,
    pub forward_passes_used: usize,
    pub candidates: Vec<Candidate>,
}

/// Override map sending every edge of `et` to `base`.
pub fn base_adjacency(g: &Graph, et: &[EdgeId], base: f64) -> Result<BTreeMap<EdgeId, f64>> {
    g.check_edges(et)?;
    Ok(et.iter().map(|&e| (e, base)).collect())
}

/// Entrywise L1 distance between the adjacency and its base point for `et`,
/// summed over directed realizations.
pub fn base_distance(g: &Graph, et: &[EdgeId], base: f64) -> Result<f64> {
    let mut unique = et.to_vec();
    unique.sort_unstable();
    unique.dedup();
    let mut total = 0.0;
    for e in unique {
        let unit = g.unit(e)?;
        total += unit.directed().map(|d| (g.directed_edges()[d].weight - base).abs()).sum::<f64>();
    }
    Ok(total)
}

fn check_class(session: &Session<'_>, c: usize) -> Result<()> {
    let classes = session.model().num_classes();
    if c >= classes {
        return Err(Error::InvalidArgument(format!("class {c} out of range for {classes} classes")));
    }
    Ok(())
}

fn slope(p0: f64, p_base: f64, distance: f64) -> f64 {
    if distance == 0.0 {
        0.0
    } else {
        (p0 - p_base) / distance
    }
}

/// `(φ(c|A) - φ(c|A^t)) / |A - A^t|` for the edge set `et`. An edge set that
/// already sits at the base weight has distance zero and scores zero.
pub fn edge_set_importance(session: &Session<'_>, g: &Graph, et: &[EdgeId], c: usize, base: f64) -> Result<f64> {
    if et.is_empty() {
        return Err(Error::UndefinedScore("edge set importance of an empty edge set".into()));
    }
    check_class(session, c)?;
    let overrides = base_adjacency(g, et, base)?;
    let distance = base_distance(g, et, base)?;
    let p0 = session.forward(g)?.probability(c);
    let pt = session.forward_with_override(g, &overrides)?.probability(c);
    Ok(slope(p0, pt, distance))
}

fn linear_gradient_from(session: &Session<'_>, g: &Graph, c: usize, base: f64, original: &Prediction) -> Result<EdgeScores> {
    let p0 = original.probability(c);
    let mut scores = Vec::with_capacity(g.edge_count());
    for e in 0..g.edge_count() {
        let overrides = BTreeMap::from([(e, base)]);
        let pt = session.forward_with_override(g, &overrides)?.probability(c);
        scores.push(slope(p0, pt, base_distance(g, &[e], base)?));
    }
    EdgeScores::new(scores, c, Method::LinearGradient)
}

/// Linear-gradient score of every undirected edge, using `|E| + 1` forward passes.
pub fn score_all_edges_linear_gradient(session: &Session<'_>, g: &Graph, c: usize, base: f64) -> Result<EdgeScores> {
    check_class(session, c)?;
    let original = session.forward(g)?;
    linear_gradient_from(session, g, c, base, &original)
}

fn unit_weights(g: &Graph) -> Vec<f64> {
    (0..g.edge_count()).map(|e| g.weight(e)).collect()
}

/// Central difference of `φ(c|·)` in the weight of edge `e`, starting from
/// the weights `w`, with both points clamped to `[0, 1]`.
fn weight_slope(session: &Session<'_>, g: &Graph, w: &mut [f64], e: EdgeId, c: usize, h: f64) -> Result<f64> {
    let centre = w[e];
    let hi = (centre + h).min(1.0);
    let lo = (centre - h).max(0.0);
    w[e] = hi;
    let up = session.forward(&g.with_unit_weights(w))?.probability(c);
    w[e] = lo;
    let down = session.forward(&g.with_unit_weights(w))?.probability(c);
    w[e] = centre;
    Ok((up - down) / (hi - lo))
}

/// Finite-difference saliency: the magnitude of the class-probability slope
/// in each edge's weight, two forward passes per edge.
pub fn sa_edge_scores(session: &Session<'_>, g: &Graph, c: usize, h: f64) -> Result<EdgeScores> {
    check_class(session, c)?;
    if !(h > 0.0 && h <= 0.5) {
        return Err(Error::InvalidArgument(format!("saliency step must lie in (0, 0.5], got {h}")));
    }
    let mut w = unit_weights(g);
    let scores = (0..g.edge_count())
        .map(|e| weight_slope(session, g, &mut w, e, c, h).map(f64::abs))
        .collect::<Result<_>>()?;
    EdgeScores::new(scores, c, Method::Sa)
}

/// Integrated gradients along the straight path from every edge at `base`
/// to the observed weights: a right Riemann sum over `α = j/steps`, with each
/// partial derivative taken by central difference of step `h`, multiplied
/// by `w - base`.
pub fn ig_edge_scores(session: &Session<'_>, g: &Graph, c: usize, steps: usize, base: f64, h: f64) -> Result<EdgeScores> {
    check_class(session, c)?;
    if steps < 1 {
        return Err(Error::InvalidArgument("integrated gradients needs at least one step".into()));
    }
    if !(h > 0.0 && h <= 0.5) {
        return Err(Error::InvalidArgument(format!("gradient step must lie in (0, 0.5], got {h}")));
    }
    let target = unit_weights(g);
    let mut totals = vec![0.0; target.len()];
    for j in 1..=steps {
        let alpha = j as f64 / steps as f64;
        let mut w: Vec<f64> = target.iter().map(|&t| base + alpha * (t - base)).collect();
        for (e, total) in totals.iter_mut().enumerate() {
            *total += weight_slope(session, g, &mut w, e, c, h)?;
        }
    }
    let scores = totals
        .iter()
        .zip(&target)
        .map(|(t, w)| (w - base) * t / steps as f64)
        .collect();
    EdgeScores::new(scores, c, Method::Ig)
}

/// Edges by descending score, ties by ascending index.
pub fn rank_edges(scores: &[f64]) -> Vec<EdgeId> {
    let mut order: Vec<EdgeId> = (0..scores.len()).collect();
    order.sort_by(|&a, &b| scores[b].total_cmp(&scores[a]).then(a.cmp(&b)));
    order
}

/// Evaluates fidelity of edge-induced subgraphs against one reference prediction.
///
/// `G[E]` is taken to be `G` itself, so keeping every edge reproduces the
/// reference exactly even when `G` has isolated nodes. An empty edge set is
/// handled by the session's empty-graph policy.
pub struct FidelityEvaluator<'s, 'm, 'g> {
    session: &'s Session<'m>,
    graph: &'g Graph,
    class: usize,
    reference: f64,
}

impl<'s, 'm, 'g> FidelityEvaluator<'s, 'm, 'g> {
    /// Runs one forward pass for the reference prediction.
    pub fn new(session: &'s Session<'m>, graph: &'g Graph, class: usize) -> Result<Self> {
        let original = session.forward(graph)?;
        Self::from_prediction(session, graph, class, &original)
    }

    pub fn from_prediction(session: &'s Session<'m>, graph: &'g Graph, class: usize, original: &Prediction) -> Result<Self> {
        check_class(session, class)?;
        Ok(Self {
            session,
            graph,
            class,
            reference: original.probability(class),
        })
    }

    pub fn class(&self) -> usize {
        self.class
    }

    pub fn reference(&self) -> f64 {
        self.reference
    }

    /// `φ(G[edges])_y` for a sorted, duplicate-free edge list.
    fn probability_of(&self, edges: &[EdgeId]) -> Result<f64> {
        let p = if edges.len() == self.graph.edge_count() {
            self.session.forward(self.graph)?
        } else {
            let s = induce_by_edges(self.graph, edges)?;
            self.session.forward_on_induced(&s)?
        };
        Ok(p.probability(self.class))
    }

    fn split(&self, es: &[EdgeId]) -> Result<(Vec<EdgeId>, Vec<EdgeId>)> {
        self.graph.check_edges(es)?;
        let mut keep = vec![false; self.graph.edge_count()];
        for &e in es {
            keep[e] = true;
        }
        let (inside, outside): (Vec<EdgeId>, Vec<EdgeId>) = (0..keep.len()).partition(|&e| keep[e]);
        Ok((inside, outside))
    }

    /// `φ(G)_y - φ(G[E \ E_S])_y`.
    pub fn plus(&self, es: &[EdgeId]) -> Result<f64> {
        let (_, outside) = self.split(es)?;
        Ok(self.reference - self.probability_of(&outside)?)
    }

    /// `φ(G)_y - φ(G[E_S])_y`.
    pub fn minus(&self, es: &[EdgeId]) -> Result<f64> {
        let (inside, _) = self.split(es)?;
        Ok(self.reference - self.probability_of(&inside)?)
    }

    /// Both fidelities and their difference, two forward passes.
    pub fn candidate(&self, es: &[EdgeId]) -> Result<Candidate> {
        let (inside, outside) = self.split(es)?;
        let fidelity_plus = self.reference - self.probability_of(&outside)?;
        let fidelity_minus = self.reference - self.probability_of(&inside)?;
        Ok(Candidate {
            k: inside.len(),
            fidelity_plus,
            fidelity_minus,
            overall: fidelity_plus - fidelity_minus,
        })
    }
}

pub fn fidelity_plus(session: &Session<'_>, g: &Graph, es: &[EdgeId], y: usize) -> Result<f64> {
    FidelityEvaluator::new(session, g, y)?.plus(es)
}

pub fn fidelity_minus(session: &Session<'_>, g: &Graph, es: &[EdgeId], y: usize) -> Result<f64> {
    FidelityEvaluator::new(session, g, y)?.minus(es)
}

fn check_permutation(g: &Graph, ranked: &[EdgeId]) -> Result<()> {
    let mut seen = vec![false; g.edge_count()];
    for &e in ranked {
        if e >= seen.len() || std::mem::replace(&mut seen[e], true) {
            return Err(Error::InvalidSelection(format!(
                "ranking is not a permutation of the {} edges",
                g.edge_count()
            )));
        }
    }
    if ranked.len() != g.edge_count() {
        return Err(Error::InvalidSelection(format!(
            "ranking has {} entries for {} edges",
            ranked.len(),
            g.edge_count()
        )));
    }
    Ok(())
}

fn search(eval: &FidelityEvaluator<'_, '_, '_>, ranked: &[EdgeId], k_range: KRange) -> Result<(usize, Vec<Candidate>)> {
    let (lo, hi) = k_range.bounds(ranked.len());
    let mut candidates: Vec<Candidate> = Vec::with_capacity(hi + 1 - lo);
    let mut best = 0;
    for k in lo..=hi {
        let c = eval.candidate(&ranked[..k])?;
        if candidates.is_empty() || c.overall > candidates[best].overall {
            best = candidates.len();
        }
        candidates.push(c);
    }
    Ok((best, candidates))
}

fn assemble(
    session: &Session<'_>,
    g: &Graph,
    class: usize,
    method: Method,
    k_range: KRange,
    scores: Vec<f64>,
    ranked: Vec<EdgeId>,
    reference: &Prediction,
) -> Result<Explanation> {
    let eval = FidelityEvaluator::from_prediction(session, g, class, reference)?;
    let (best, candidates) = search(&eval, &ranked, k_range)?;
    let chosen = candidates[best];
    let mut subgraph_edges = ranked[..chosen.k].to_vec();
    subgraph_edges.sort_unstable();
    Ok(Explanation {
        target_class: class,
        method,
        k_range,
        scores,
        ranked_edges: ranked,
        chosen_k: chosen.k,
        subgraph_edges,
        fidelity_plus: chosen.fidelity_plus,
        fidelity_minus: chosen.fidelity_minus,
        overall: chosen.overall,
        sparsity: 1.0 - chosen.k as f64 / g.edge_count() as f64,
        forward_passes_used: session.forward_passes(),
        candidates,
    })
}

/// Evaluates every prefix of `ranked` in the range and keeps the one with the
/// largest `Fidelity+ - Fidelity-`, the smallest such prefix on ties.
/// Costs one forward pass for the reference plus two per candidate.
pub fn linear_search(session: &Session<'_>, g: &Graph, ranked: &[EdgeId], y: usize, k_range: KRange) -> Result<Explanation> {
    if g.edge_count() == 0 {
        return Err(Error::InvalidGraph("cannot search a graph without edges".into()));
    }
    check_permutation(g, ranked)?;
    check_class(session, y)?;
    let reference = session.forward(g)?;
    assemble(session, g, y, Method::External, k_range, Vec::new(), ranked.to_vec(), &reference)
}

fn resolve_class(policy: ClassPolicy, original: &Prediction) -> usize {
    match policy {
        ClassPolicy::Auto => original.predicted_class,
        ClassPolicy::Fixed(c) => c,
    }
}

/// Scores, ranks and searches with a fresh session. The reference forward
/// pass is shared by scoring and search, so the linear-gradient method in
/// full range costs `3|E| + 1` passes.
pub fn explain(m: &ModelSpec, g: &Graph, cfg: &ExplainConfig) -> Result<Explanation> {
    explain_in(&Session::new(m), g, cfg)
}

pub fn explain_in(session: &Session<'_>, g: &Graph, cfg: &ExplainConfig) -> Result<Explanation> {
    if g.edge_count() == 0 {
        return Err(Error::InvalidGraph("cannot explain a graph without edges".into()));
    }
    let original = session.forward(g)?;
    let class = resolve_class(cfg.class, &original);
    check_class(session, class)?;
    let scores = match cfg.method {
        Method::LinearGradient => linear_gradient_from(session, g, class, cfg.base_weight, &original)?,
        Method::Sa => sa_edge_scores(session, g, class, cfg.sa_step)?,
        Method::Ig => ig_edge_scores(session, g, class, cfg.ig_steps, cfg.base_weight, cfg.sa_step)?,
        Method::External => {
            return Err(Error::InvalidArgument("external scores must be supplied with explain_with_scores".into()))
        }
    };
    let ranked = scores.ranked();
    assemble(session, g, class, cfg.method, cfg.k_range, scores.scores, ranked, &original)
}

/// Searches the ranking induced by caller-supplied scores.
pub fn explain_with_scores(m: &ModelSpec, g: &Graph, scores: &[f64], cfg: &ExplainConfig) -> Result<Explanation> {
    if scores.len() != g.edge_count() {
        return Err(Error::InvalidArgument(format!(
            "{} scores for {} edges",
            scores.len(),
            g.edge_count()
        )));
    }
    if g.edge_count() == 0 {
        return Err(Error::InvalidGraph("cannot explain a graph without edges".into()));
    }
    let session = Session::new(m);
    let original = session.forward(g)?;
    let class = resolve_class(cfg.class, &original);
    let scores = EdgeScores::new(scores.to_vec(), class, Method::External)?;
    let ranked = scores.ranked();
    assemble(&session, g, class, Method::External, cfg.k_range, scores.scores, ranked, &original)
}

/// Best edge subset found by evaluating every nonempty subset.
#[derive(Clone, Debug, PartialEq)]
pub struct OracleBest {
    pub edges: Vec<EdgeId>,
    pub overall: f64,
    pub subsets_evaluated: usize,
}

/// `Fidelity+ - Fidelity-` maximized over all nonempty edge subsets; ties go
/// to the lexicographically smallest sorted edge list.
pub fn brute_force_best_subgraph(session: &Session<'_>, g: &Graph, y: usize, cap: usize) -> Result<OracleBest> {
    let m = g.edge_count();
    if m == 0 {
        return Err(Error::InvalidGraph("cannot search a graph without edges".into()));
    }
    if m > cap.min(MAX_BRUTE_FORCE_CAP) {
        return Err(Error::EnumerationTooLarge {
            edges: m,
            cap: cap.min(MAX_BRUTE_FORCE_CAP),
        });
    }
    let eval = FidelityEvaluator::new(session, g, y)?;
    let mut best: Option<(f64, Vec<EdgeId>)> = None;
    let total = (1u64 << m) - 1;
    for mask in 1..=total {
        let edges: Vec<EdgeId> = (0..m).filter(|&e| (mask >> e) & 1 == 1).collect();
        let overall = eval.candidate(&edges)?.overall;
        let better = match &best {
            None => true,
            Some((s, b)) => overall > *s || (overall == *s && edges < *b),
        };
        if better {
            best = Some((overall, edges));
        }
    }
    let (overall, edges) = best.expect("at least one subset");
    Ok(OracleBest {
        edges,
        overall,
        subsets_evaluated: total as usize,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RankedEdge {
    pub edge: EdgeId,
    pub src: usize,
    pub dst: usize,
    pub score: Option<f64>,
}

/// Serialized form of an [`Explanation`]; field order is fixed.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExplanationFile {
    pub target_class: usize,
    pub method: Method,
    pub k_range: KRange,
    pub ranked_edges: Vec<RankedEdge>,
    pub chosen_k: usize,
    pub subgraph_edges: Vec<EdgeId>,
    pub fidelity_plus: f64,
    pub fidelity_minus: f64,
    pub overall: f64,
    pub sparsity: f64,
    pub forward_passes_used: usize,
    pub candidates: Vec<Candidate>,
}

impl Explanation {
    pub fn to_file(&self, g: &Graph) -> ExplanationFile {
        let ranked_edges = self
            .ranked_edges
            .iter()
            .map(|&e| {
                let (src, dst) = g.endpoints(e);
                RankedEdge {
                    edge: e,
                    src,
                    dst,
                    score: self.scores.get(e).copied(),
                }
            })
            .collect();
        ExplanationFile {
            target_class: self.target_class,
            method: self.method,
            k_range: self.k_range,
            ranked_edges,
            chosen_k: self.chosen_k,
            subgraph_edges: self.subgraph_edges.clone(),
            fidelity_plus: self.fidelity_plus,
            fidelity_minus: self.fidelity_minus,
            overall: self.overall,
            sparsity: self.sparsity,
            forward_passes_used: self.forward_passes_used,
            candidates: self.candidates.clone(),
        }
    }

    pub fn to_json(&self, g: &Graph) -> Result<String> {
        let mut text = serde_json::to_string_pretty(&self.to_file(g))?;
        text.push('\n');
        Ok(text)
    }

    pub fn save(&self, g: &Graph, path: impl AsRef<Path>) -> Result<()> {
        std::fs::write(path, self.to_json(g)?)?;
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ranking_ties_and_order() {
        assert_eq!(rank_edges(&[0.1, 0.9, 0.5]), vec![1, 2, 0]);
        assert_eq!(rank_edges(&[0.0; 4]), vec![0, 1, 2, 3]);
        assert!(rank_edges(&[]).is_empty());
        assert_eq!(rank_edges(&[-1.0, 2.0, -1.0, 2.0]), vec![1, 3, 0, 2]);
    }

    #[test]
    fn narrow_range_bounds() {
        assert_eq!(KRange::Paper.bounds(5), (2, 4));
        assert_eq!(KRange::Paper.bounds(2), (1, 2));
        assert_eq!(KRange::Full.bounds(5), (1, 5));
    }

    #[test]
    fn parse_names() {
        assert_eq!("sa".parse::<Method>().unwrap(), Method::Sa);
        assert_eq!("linear-gradient".parse::<Method>().unwrap(), Method::LinearGradient);
        assert!("x".parse::<Method>().is_err());
        assert_eq!("auto".parse::<ClassPolicy>().unwrap(), ClassPolicy::Auto);
        assert_eq!("1".parse::<ClassPolicy>().unwrap(), ClassPolicy::Fixed(1));
    }

    #[test]
    fn base_map_and_distance() {
        let g = Graph::from_undirected(ndarray::Array2::ones((3, 1)), &[(0, 1, 1.0), (1, 2, 0.4)]).unwrap();
        assert!(base_adjacency(&g, &[], 0.0).unwrap().is_empty());
        assert_eq!(base_adjacency(&g, &[0], 0.0).unwrap(), BTreeMap::from([(0, 0.0)]));
        assert_eq!(base_distance(&g, &[0], 0.0).unwrap(), 2.0);
        assert!((base_distance(&g, &[0, 1], 0.0).unwrap() - 2.8).abs() < 1e-15);
        assert!(base_adjacency(&g, &[5], 0.0).is_err());
    }
}
