//! Structural metrics over induced subgraphs: intuitiveness, exhaustiveness of
//! an inducing technique, and sparsity.

use crate::error::{Error, Result};
use crate::graph::{EdgeId, Graph};
use crate::induce::{induce_by_edges, induce_by_nodes, induce_by_nodes_and_edges, InduceMode, InducedSubgraph};

/// Default edge-count cap for exhaustive enumeration.
pub const DEFAULT_ENUMERATION_CAP: usize = 16;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SparsityUnit {
    Edges,
    Nodes,
}

/// Fraction of the subgraph's components that carry at least one edge.
pub fn intuitiveness(s: &InducedSubgraph<'_>) -> Result<f64> {
    let total = s.components().len();
    if total == 0 {
        return Err(Error::UndefinedMetric(
            "intuitiveness of an empty subgraph".into(),
        ));
    }
    let with_edges = s.components().iter().filter(|c| c.has_edges()).count();
    Ok(with_edges as f64 / total as f64)
}

/// `1 - |S| / |G|` counted in edges or nodes of the parent graph.
pub fn sparsity(s: &InducedSubgraph<'_>, unit: SparsityUnit) -> Result<f64> {
    let g = s.parent();
    let (part, whole) = match unit {
        SparsityUnit::Edges => (s.edges().len(), g.edge_count()),
        SparsityUnit::Nodes => (s.nodes().len(), g.node_count()),
    };
    if whole == 0 {
        return Err(Error::UndefinedMetric(format!(
            "sparsity over a graph with no {}",
            match unit {
                SparsityUnit::Edges => "edges",
                SparsityUnit::Nodes => "nodes",
            }
        )));
    }
    Ok(1.0 - part as f64 / whole as f64)
}

fn mask_to_edges(mask: u64) -> Vec<EdgeId> {
    (0..64).filter(|i| mask >> i & 1 == 1).collect()
}

fn check_cap(g: &Graph, cap: usize) -> Result<()> {
    let m = g.edge_count();
    if m > cap || m > 64 {
        return Err(Error::EnumerationTooLarge {
            edges: m,
            cap: cap.min(64),
        });
    }
    Ok(())
}

/// Every connected edge subset of `g` (at least one edge), each exactly once.
///
/// Runs an ESU-style extension over the line graph: each subset is grown from
/// its smallest edge, and only edges exclusive to the newest addition are
/// admitted into the extension set, so no subset is produced twice. Output is
/// ordered by size, then lexicographically by sorted edge index.
pub fn enumerate_connected_edge_subgraphs(g: &Graph, cap: usize) -> Result<Vec<Vec<EdgeId>>> {
    Ok(connected_edge_masks(g, cap)?
        .into_iter()
        .map(mask_to_edges)
        .collect())
}

pub(crate) fn connected_edge_masks(g: &Graph, cap: usize) -> Result<Vec<u64>> {
    check_cap(g, cap)?;
    let m = g.edge_count();
    let adj = g.neighbours();
    let mut line = vec![0u64; m];
    for (e, slot) in line.iter_mut().enumerate() {
        let (u, v) = g.endpoints(e);
        for &(_, f) in adj[u].iter().chain(&adj[v]) {
            if f != e {
                *slot |= 1 << f;
            }
        }
    }

    let mut out = Vec::new();
    for root in 0..m {
        let above = !((1u64 << root) | ((1u64 << root) - 1));
        extend(&line, 1 << root, line[root] & above, line[root], above, &mut out);
    }
    out.sort_by(|&a, &b| {
        a.count_ones()
            .cmp(&b.count_ones())
            .then_with(|| mask_to_edges(a).cmp(&mask_to_edges(b)))
    });
    Ok(out)
}

fn extend(line: &[u64], sub: u64, mut ext: u64, closed_nbrs: u64, above: u64, out: &mut Vec<u64>) {
    out.push(sub);
    while ext != 0 {
        let w = ext.trailing_zeros() as usize;
        ext &= !(1 << w);
        let exclusive = line[w] & !sub & !closed_nbrs & above;
        extend(
            line,
            sub | 1 << w,
            ext | exclusive,
            closed_nbrs | line[w] | sub,
            above,
            out,
        );
    }
}

/// Whether `edges` (connected, nonempty) appears as a component of some
/// selection under the given technique.
///
/// Components of a node-induced subgraph are themselves node-induced on their
/// node set, so for the node technique the endpoint set is the only candidate
/// selection worth checking. For the combined technique a witness is either
/// the bare edge selection or the endpoint node selection.
pub fn reachable_by(mode: InduceMode, g: &Graph, edges: &[EdgeId]) -> Result<bool> {
    let mut nodes: Vec<usize> = edges
        .iter()
        .flat_map(|&e| {
            let (u, v) = g.endpoints(e);
            [u, v]
        })
        .collect();
    nodes.sort_unstable();
    nodes.dedup();
    let is_component = |s: InducedSubgraph<'_>| s.components().iter().any(|c| c.edges == edges);
    Ok(match mode {
        InduceMode::Edge => is_component(induce_by_edges(g, edges)?),
        InduceMode::Node => is_component(induce_by_nodes(g, &nodes)?),
        InduceMode::NodeAndEdge => {
            is_component(induce_by_nodes_and_edges(g, &[], edges)?)
                || is_component(induce_by_nodes_and_edges(g, &nodes, &[])?)
        }
    })
}

/// Fraction of the connected edge-bearing subgraphs of `g` that the technique
/// can produce as a component of some selection.
pub fn exhaustiveness(mode: InduceMode, g: &Graph, cap: usize) -> Result<f64> {
    let all = enumerate_connected_edge_subgraphs(g, cap)?;
    if all.is_empty() {
        return Err(Error::UndefinedMetric(
            "exhaustiveness of a graph without edges".into(),
        ));
    }
    let mut reached = 0usize;
    for edges in &all {
        if reachable_by(mode, g, edges)? {
            reached += 1;
        }
    }
    Ok(reached as f64 / all.len() as f64)
}
