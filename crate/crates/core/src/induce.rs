//! The three subgraph inducing techniques (by nodes, by edges, by both) and
//! connected-component bookkeeping for the induced result.

use std::collections::BTreeSet;

use petgraph::unionfind::UnionFind;

use crate::error::{Error, Result};
use crate::graph::{EdgeId, Graph};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum InduceMode {
    Node,
    Edge,
    NodeAndEdge,
}

/// A choice of nodes and/or undirected edges to induce a subgraph from.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SubgraphSelection {
    mode: InduceMode,
    nodes: BTreeSet<usize>,
    edges: BTreeSet<EdgeId>,
}

impl SubgraphSelection {
    pub fn nodes(nodes: impl IntoIterator<Item = usize>) -> Self {
        Self {
            mode: InduceMode::Node,
            nodes: nodes.into_iter().collect(),
            edges: BTreeSet::new(),
        }
    }

    pub fn edges(edges: impl IntoIterator<Item = EdgeId>) -> Self {
        Self {
            mode: InduceMode::Edge,
            nodes: BTreeSet::new(),
            edges: edges.into_iter().collect(),
        }
    }

    pub fn nodes_and_edges(
        nodes: impl IntoIterator<Item = usize>,
        edges: impl IntoIterator<Item = EdgeId>,
    ) -> Self {
        Self {
            mode: InduceMode::NodeAndEdge,
            nodes: nodes.into_iter().collect(),
            edges: edges.into_iter().collect(),
        }
    }

    pub fn mode(&self) -> InduceMode {
        self.mode
    }

    pub fn induce<'g>(&self, g: &'g Graph) -> Result<InducedSubgraph<'g>> {
        match self.mode {
            InduceMode::Node => induce_by_nodes(g, &self.nodes),
            InduceMode::Edge => induce_by_edges(g, &self.edges),
            InduceMode::NodeAndEdge => induce_by_nodes_and_edges(g, &self.nodes, &self.edges),
        }
    }
}

/// A connected component of an induced subgraph.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Component {
    pub nodes: Vec<usize>,
    pub edges: Vec<EdgeId>,
}

impl Component {
    pub fn has_edges(&self) -> bool {
        !self.edges.is_empty()
    }
}

#[derive(Clone, Debug)]
pub struct InducedSubgraph<'g> {
    parent: &'g Graph,
    nodes: Vec<usize>,
    edges: Vec<EdgeId>,
    components: Vec<Component>,
}

impl PartialEq for InducedSubgraph<'_> {
    fn eq(&self, other: &Self) -> bool {
        std::ptr::eq(self.parent, other.parent)
            && self.nodes == other.nodes
            && self.edges == other.edges
            && self.components == other.components
    }
}

impl<'g> InducedSubgraph<'g> {
    fn build(parent: &'g Graph, nodes: BTreeSet<usize>, edges: BTreeSet<EdgeId>) -> Self {
        let nodes: Vec<usize> = nodes.into_iter().collect();
        let edges: Vec<EdgeId> = edges.into_iter().collect();
        let components = components_of(parent, &nodes, &edges);
        Self {
            parent,
            nodes,
            edges,
            components,
        }
    }

    pub fn parent(&self) -> &'g Graph {
        self.parent
    }

    /// Sorted node indices of the parent graph.
    pub fn nodes(&self) -> &[usize] {
        &self.nodes
    }

    /// Sorted undirected edge indices of the parent graph.
    pub fn edges(&self) -> &[EdgeId] {
        &self.edges
    }

    pub fn components(&self) -> &[Component] {
        &self.components
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }
}

fn check_nodes<'a>(g: &Graph, nodes: impl IntoIterator<Item = &'a usize>) -> Result<()> {
    let n = g.node_count();
    for &v in nodes {
        if v >= n {
            return Err(Error::InvalidSelection(format!(
                "node {v} not in graph with {n} nodes"
            )));
        }
    }
    Ok(())
}

fn check_edge_ids<'a>(g: &Graph, edges: impl IntoIterator<Item = &'a EdgeId>) -> Result<()> {
    let m = g.edge_count();
    for &e in edges {
        if e >= m {
            return Err(Error::InvalidSelection(format!(
                "edge {e} not in graph with {m} edges"
            )));
        }
    }
    Ok(())
}

/// `G[V_S]`: the chosen nodes and every edge with both endpoints among them.
pub fn induce_by_nodes<'g, 'a>(
    g: &'g Graph,
    nodes: impl IntoIterator<Item = &'a usize> + Clone,
) -> Result<InducedSubgraph<'g>> {
    check_nodes(g, nodes.clone())?;
    let vs: BTreeSet<usize> = nodes.into_iter().copied().collect();
    let es = edges_within(g, &vs);
    Ok(InducedSubgraph::build(g, vs, es))
}

/// `G[E_S]`: the chosen edges and exactly their endpoints.
pub fn induce_by_edges<'g, 'a>(
    g: &'g Graph,
    edges: impl IntoIterator<Item = &'a EdgeId> + Clone,
) -> Result<InducedSubgraph<'g>> {
    check_edge_ids(g, edges.clone())?;
    let es: BTreeSet<EdgeId> = edges.into_iter().copied().collect();
    let vs = endpoints_of(g, &es);
    Ok(InducedSubgraph::build(g, vs, es))
}

/// `G[V_S, E_S]`: union of the node-induced and edge-induced parts.
pub fn induce_by_nodes_and_edges<'g, 'a, 'b>(
    g: &'g Graph,
    nodes: impl IntoIterator<Item = &'a usize> + Clone,
    edges: impl IntoIterator<Item = &'b EdgeId> + Clone,
) -> Result<InducedSubgraph<'g>> {
    check_nodes(g, nodes.clone())?;
    check_edge_ids(g, edges.clone())?;
    let selected: BTreeSet<usize> = nodes.into_iter().copied().collect();
    let mut es: BTreeSet<EdgeId> = edges.into_iter().copied().collect();
    let mut vs = endpoints_of(g, &es);
    es.extend(edges_within(g, &selected));
    vs.extend(selected);
    Ok(InducedSubgraph::build(g, vs, es))
}

fn edges_within(g: &Graph, nodes: &BTreeSet<usize>) -> BTreeSet<EdgeId> {
    (0..g.edge_count())
        .filter(|&e| {
            let (u, v) = g.endpoints(e);
            nodes.contains(&u) && nodes.contains(&v)
        })
        .collect()
}

fn endpoints_of(g: &Graph, edges: &BTreeSet<EdgeId>) -> BTreeSet<usize> {
    edges
        .iter()
        .flat_map(|&e| {
            let (u, v) = g.endpoints(e);
            [u, v]
        })
        .collect()
}

/// Components of the subgraph `(nodes, edges)` of `g`, ordered by smallest node.
/// `nodes` must be sorted and contain every endpoint of `edges`.
pub fn components_of(g: &Graph, nodes: &[usize], edges: &[EdgeId]) -> Vec<Component> {
    let mut uf = UnionFind::<usize>::new(g.node_count());
    for &e in edges {
        let (u, v) = g.endpoints(e);
        uf.union(u, v);
    }
    // Nodes are visited in ascending order, so the first node of each root
    // fixes the component order.
    let mut slot = vec![usize::MAX; g.node_count()];
    let mut out: Vec<Component> = Vec::new();
    for &v in nodes {
        let r = uf.find(v);
        if slot[r] == usize::MAX {
            slot[r] = out.len();
            out.push(Component {
                nodes: Vec::new(),
                edges: Vec::new(),
            });
        }
        out[slot[r]].nodes.push(v);
    }
    for &e in edges {
        let (u, _) = g.endpoints(e);
        out[slot[uf.find(u)]].edges.push(e);
    }
    out
}

/// Components of the whole graph.
pub fn connected_components(g: &Graph) -> Vec<Component> {
    let nodes: Vec<usize> = (0..g.node_count()).collect();
    let edges: Vec<EdgeId> = (0..g.edge_count()).collect();
    components_of(g, &nodes, &edges)
}
