//! Graph storage: node features plus a directed weighted edge list in which
//! opposite-direction edges are grouped into undirected edge units.
//!
//! Every selection, ranking and sparsity count in this crate is expressed in
//! undirected edge indices ([`EdgeId`]). The directed list is what the GNN
//! engine consumes.

use std::collections::{BTreeMap, HashMap};
use std::path::Path;

use ndarray::Array2;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Index of an undirected edge unit.
pub type EdgeId = usize;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DirectedEdge {
    pub src: usize,
    pub dst: usize,
    pub weight: f64,
}

/// One undirected edge: a forward directed edge and, when present, its reverse.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct EdgeUnit {
    pub fwd: usize,
    pub rvs: Option<usize>,
}

impl EdgeUnit {
    pub fn directed(&self) -> impl Iterator<Item = usize> {
        std::iter::once(self.fwd).chain(self.rvs)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Graph {
    features: Array2<f64>,
    directed: Vec<DirectedEdge>,
    units: Vec<EdgeUnit>,
}

impl Graph {
    /// Builds a graph from a directed edge list. Opposite-direction edges with
    /// equal weight are paired into one undirected unit; any other edge forms a
    /// unit of its own.
    pub fn new(features: Array2<f64>, directed: Vec<DirectedEdge>) -> Result<Self> {
        let n = features.nrows();
        if features.iter().any(|x| !x.is_finite()) {
            return Err(Error::InvalidGraph("non-finite node feature".into()));
        }
        let mut index: HashMap<(usize, usize), usize> = HashMap::with_capacity(directed.len());
        for (i, e) in directed.iter().enumerate() {
            if e.src >= n || e.dst >= n {
                return Err(Error::InvalidGraph(format!(
                    "edge {i} ({}, {}) out of range for {n} nodes",
                    e.src, e.dst
                )));
            }
            if e.src == e.dst {
                return Err(Error::InvalidGraph(format!("self-loop on node {}", e.src)));
            }
            if !e.weight.is_finite() || !(0.0..=1.0).contains(&e.weight) {
                return Err(Error::InvalidGraph(format!(
                    "edge {i} weight {} outside [0, 1]",
                    e.weight
                )));
            }
            if index.insert((e.src, e.dst), i).is_some() {
                return Err(Error::InvalidGraph(format!(
                    "duplicate edge ({}, {})",
                    e.src, e.dst
                )));
            }
        }

        let mut paired = vec![false; directed.len()];
        let mut units = Vec::new();
        for (i, e) in directed.iter().enumerate() {
            if paired[i] {
                continue;
            }
            paired[i] = true;
            let rvs = index
                .get(&(e.dst, e.src))
                .copied()
                .filter(|&j| !paired[j] && directed[j].weight == e.weight);
            if let Some(j) = rvs {
                paired[j] = true;
            }
            units.push(EdgeUnit { fwd: i, rvs });
        }
        Ok(Self {
            features,
            directed,
            units,
        })
    }

    /// Builds an undirected graph; undirected edge `k` becomes directed edges
    /// `2k` (u→v) and `2k+1` (v→u).
    pub fn from_undirected(features: Array2<f64>, edges: &[(usize, usize, f64)]) -> Result<Self> {
        let directed = edges
            .iter()
            .flat_map(|&(u, v, w)| {
                [
                    DirectedEdge {
                        src: u,
                        dst: v,
                        weight: w,
                    },
                    DirectedEdge {
                        src: v,
                        dst: u,
                        weight: w,
                    },
                ]
            })
            .collect();
        let g = Self::new(features, directed)?;
        debug_assert_eq!(g.units.len(), edges.len());
        Ok(g)
    }

    /// Unit-weight undirected graph with all-ones features of dimension `dim`.
    pub fn unweighted(n: usize, dim: usize, edges: &[(usize, usize)]) -> Result<Self> {
        let weighted: Vec<_> = edges.iter().map(|&(u, v)| (u, v, 1.0)).collect();
        Self::from_undirected(Array2::ones((n, dim)), &weighted)
    }

    pub fn node_count(&self) -> usize {
        self.features.nrows()
    }

    pub fn feature_dim(&self) -> usize {
        self.features.ncols()
    }

    pub fn features(&self) -> &Array2<f64> {
        &self.features
    }

    pub fn directed_edges(&self) -> &[DirectedEdge] {
        &self.directed
    }

    /// Number of undirected edge units.
    pub fn edge_count(&self) -> usize {
        self.units.len()
    }

    pub fn units(&self) -> &[EdgeUnit] {
        &self.units
    }

    pub fn unit(&self, id: EdgeId) -> Result<EdgeUnit> {
        self.units.get(id).copied().ok_or(Error::UnknownEdge {
            index: id,
            count: self.units.len(),
        })
    }

    /// Endpoints of an undirected edge as stored on its forward direction.
    pub fn endpoints(&self, id: EdgeId) -> (usize, usize) {
        let e = &self.directed[self.units[id].fwd];
        (e.src, e.dst)
    }

    pub fn weight(&self, id: EdgeId) -> f64 {
        self.directed[self.units[id].fwd].weight
    }

    pub fn check_edges<'a>(&self, ids: impl IntoIterator<Item = &'a EdgeId>) -> Result<()> {
        for &id in ids {
            self.unit(id)?;
        }
        Ok(())
    }

    /// Copy of the graph with both directions of each listed edge reweighted.
    pub fn with_overrides(&self, overrides: &BTreeMap<EdgeId, f64>) -> Result<Self> {
        let mut directed = self.directed.clone();
        for (&id, &w) in overrides {
            let unit = self.unit(id)?;
            if !w.is_finite() || !(0.0..=1.0).contains(&w) {
                return Err(Error::InvalidArgument(format!(
                    "override weight {w} for edge {id} outside [0, 1]"
                )));
            }
            for d in unit.directed() {
                directed[d].weight = w;
            }
        }
        Ok(Self {
            features: self.features.clone(),
            directed,
            units: self.units.clone(),
        })
    }

    /// Copy of the graph with every undirected edge reweighted from `weights`.
    pub(crate) fn with_unit_weights(&self, weights: &[f64]) -> Self {
        debug_assert_eq!(weights.len(), self.units.len());
        let mut directed = self.directed.clone();
        for (unit, &w) in self.units.iter().zip(weights) {
            for d in unit.directed() {
                directed[d].weight = w;
            }
        }
        Self {
            features: self.features.clone(),
            directed,
            units: self.units.clone(),
        }
    }

    /// Standalone graph over `nodes` (sorted) keeping only the edge units in
    /// `edges`. Directed edges keep their relative order, so taking every
    /// node and edge reproduces `self` exactly.
    pub(crate) fn restrict(&self, nodes: &[usize], edges: &[EdgeId]) -> Self {
        let mut remap = vec![usize::MAX; self.node_count()];
        for (new, &old) in nodes.iter().enumerate() {
            remap[old] = new;
        }
        let features = self.features.select(ndarray::Axis(0), nodes);
        let mut picked: Vec<(usize, usize)> = Vec::with_capacity(edges.len() * 2);
        for (new_unit, &id) in edges.iter().enumerate() {
            for d in self.units[id].directed() {
                picked.push((d, new_unit));
            }
        }
        picked.sort_unstable();
        let mut directed = Vec::with_capacity(picked.len());
        let mut units: Vec<EdgeUnit> = edges
            .iter()
            .map(|_| EdgeUnit {
                fwd: usize::MAX,
                rvs: None,
            })
            .collect();
        for (pos, &(old, unit)) in picked.iter().enumerate() {
            let e = self.directed[old];
            directed.push(DirectedEdge {
                src: remap[e.src],
                dst: remap[e.dst],
                weight: e.weight,
            });
            if old == self.units[edges[unit]].fwd {
                units[unit].fwd = pos;
            } else {
                units[unit].rvs = Some(pos);
            }
        }
        Self {
            features,
            directed,
            units,
        }
    }

    /// The same nodes and features with no edges.
    pub(crate) fn without_edges(&self) -> Self {
        Self {
            features: self.features.clone(),
            directed: Vec::new(),
            units: Vec::new(),
        }
    }

    /// Adjacency lists over undirected edges: `(neighbour, edge id)` per node.
    pub fn neighbours(&self) -> Vec<Vec<(usize, EdgeId)>> {
        let mut adj = vec![Vec::new(); self.node_count()];
        for id in 0..self.units.len() {
            let (u, v) = self.endpoints(id);
            adj[u].push((v, id));
            adj[v].push((u, id));
        }
        adj
    }

    pub fn to_file(&self) -> GraphFile {
        let features = self.features.rows().into_iter().map(|r| r.to_vec()).collect();
        let undirected = self.units.iter().all(|u| u.rvs.is_some());
        let edges = if undirected {
            self.units
                .iter()
                .map(|u| {
                    let e = self.directed[u.fwd];
                    (e.src, e.dst, e.weight)
                })
                .collect()
        } else {
            self.directed.iter().map(|e| (e.src, e.dst, e.weight)).collect()
        };
        GraphFile {
            n: self.node_count(),
            features,
            edges,
            undirected,
            label: None,
        }
    }

    pub fn from_file(file: &GraphFile) -> Result<Self> {
        if file.features.len() != file.n {
            return Err(Error::Schema(format!(
                "features has {} rows, expected n = {}",
                file.features.len(),
                file.n
            )));
        }
        let dim = file.features.first().map_or(0, Vec::len);
        if file.features.iter().any(|r| r.len() != dim) {
            return Err(Error::Schema("ragged feature matrix".into()));
        }
        let flat: Vec<f64> = file.features.iter().flatten().copied().collect();
        let features = Array2::from_shape_vec((file.n, dim), flat)
            .map_err(|e| Error::Schema(e.to_string()))?;
        if file.undirected {
            Self::from_undirected(features, &file.edges)
        } else {
            let directed = file
                .edges
                .iter()
                .map(|&(src, dst, weight)| DirectedEdge { src, dst, weight })
                .collect();
            Self::new(features, directed)
        }
    }

    pub fn load(path: impl AsRef<Path>) -> Result<(Self, Option<usize>)> {
        let text = std::fs::read_to_string(path)?;
        let file: GraphFile = serde_json::from_str(&text)?;
        Ok((Self::from_file(&file)?, file.label))
    }

    pub fn save(&self, path: impl AsRef<Path>, label: Option<usize>) -> Result<()> {
        let mut file = self.to_file();
        file.label = label;
        std::fs::write(path, serde_json::to_string_pretty(&file)? + "\n")?;
        Ok(())
    }
}

/// On-disk graph schema. With `undirected = true` each entry of `edges` is one
/// undirected edge and the reverse direction is synthesized on load.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GraphFile {
    pub n: usize,
    pub features: Vec<Vec<f64>>,
    pub edges: Vec<(usize, usize, f64)>,
    pub undirected: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub label: Option<usize>,
}

#[cfg(test)]
mod tests {
    use super::*;

    fn triangle() -> Graph {
        Graph::unweighted(3, 2, &[(0, 1), (1, 2), (0, 2)]).unwrap()
    }

    #[test]
    fn undirected_pairs_are_adjacent_indices() {
        let g = triangle();
        assert_eq!(g.edge_count(), 3);
        assert_eq!(g.directed_edges().len(), 6);
        assert_eq!(g.units()[1], EdgeUnit { fwd: 2, rvs: Some(3) });
        assert_eq!(g.endpoints(2), (0, 2));
    }

    #[test]
    fn directed_input_pairs_reverse_edges() {
        let d = |src, dst| DirectedEdge {
            src,
            dst,
            weight: 1.0,
        };
        let g = Graph::new(Array2::ones((3, 1)), vec![d(0, 1), d(1, 2), d(1, 0)]).unwrap();
        assert_eq!(
            g.units(),
            &[
                EdgeUnit { fwd: 0, rvs: Some(2) },
                EdgeUnit { fwd: 1, rvs: None }
            ]
        );
    }

    #[test]
    fn rejects_bad_edges() {
        let f = Array2::ones((2, 1));
        assert!(Graph::from_undirected(f.clone(), &[(0, 2, 1.0)]).is_err());
        assert!(Graph::from_undirected(f.clone(), &[(0, 1, 1.5)]).is_err());
        assert!(Graph::from_undirected(f.clone(), &[(0, 1, f64::NAN)]).is_err());
        assert!(Graph::from_undirected(f.clone(), &[(1, 1, 1.0)]).is_err());
        assert!(Graph::from_undirected(f, &[(0, 1, 1.0), (0, 1, 1.0)]).is_err());
        let mut bad = Array2::ones((2, 1));
        bad[[0, 0]] = f64::INFINITY;
        assert!(Graph::from_undirected(bad, &[]).is_err());
    }

    #[test]
    fn overrides_touch_both_directions_only() {
        let g = triangle();
        let h = g.with_overrides(&BTreeMap::from([(1, 0.0)])).unwrap();
        let w: Vec<f64> = h.directed_edges().iter().map(|e| e.weight).collect();
        assert_eq!(w, vec![1.0, 1.0, 0.0, 0.0, 1.0, 1.0]);
        assert_eq!(g.weight(1), 1.0);
        assert!(g.with_overrides(&BTreeMap::from([(7, 0.0)])).is_err());
    }

    #[test]
    fn restrict_to_everything_is_identity() {
        let g = Graph::unweighted(4, 1, &[(0, 1), (2, 3), (1, 2)]).unwrap();
        assert_eq!(g.restrict(&[0, 1, 2, 3], &[0, 1, 2]), g);
        let sub = g.restrict(&[1, 2, 3], &[1, 2]);
        assert_eq!(sub.node_count(), 3);
        assert_eq!(sub.endpoints(0), (1, 2));
        assert_eq!(sub.endpoints(1), (0, 1));
        assert_eq!(sub.units()[1], EdgeUnit { fwd: 2, rvs: Some(3) });
    }

    #[test]
    fn file_round_trip() {
        let g = Graph::from_undirected(
            Array2::from_shape_vec((3, 2), vec![0.1, -2.0, 3.5, 0.0, 1e-300, 7.0]).unwrap(),
            &[(0, 1, 0.25), (2, 1, 1.0)],
        )
        .unwrap();
        let f = g.to_file();
        assert!(f.undirected);
        let text = serde_json::to_string(&f).unwrap();
        let back = Graph::from_file(&serde_json::from_str(&text).unwrap()).unwrap();
        assert_eq!(back, g);
    }

    #[test]
    fn file_rejects_ragged_features() {
        let f = GraphFile {
            n: 2,
            features: vec![vec![1.0], vec![1.0, 2.0]],
            edges: vec![],
            undirected: true,
            label: None,
        };
        assert!(matches!(Graph::from_file(&f), Err(Error::Schema(_))));
    }
}
