//! Node-weighted undirected graphs: representation, generators, weight
//! assignment and the plain-text file format.

mod generate;
mod io;
mod weights;

use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use generate::{generate, Topology, TopologyKind};
pub use io::{load_graph, parse_graph, save_graph, write_graph, GraphFileError};
pub use weights::{assign_weights, WeightDistribution, WEIGHT_MAX, WEIGHT_MIN};

/// Vertex identifier. IDs are positive and contiguous: `1..=|V|`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct VertexId(pub u32);

impl VertexId {
    /// Zero-based slot of this vertex in per-vertex arrays.
    #[inline]
    pub fn index(self) -> usize {
        self.0 as usize - 1
    }

    #[inline]
    pub fn from_index(index: usize) -> Self {
        VertexId(index as u32 + 1)
    }
}

impl fmt::Display for VertexId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GraphError {
    #[error("vertex {vertex} out of range 1..={order}")]
    VertexOutOfRange { vertex: u32, order: usize },
    #[error("self-loop on vertex {0}")]
    SelfLoop(u32),
    #[error("duplicate edge ({0}, {1})")]
    DuplicateEdge(u32, u32),
    #[error("weight of vertex {vertex} must be positive and finite, got {weight}")]
    NonPositiveWeight { vertex: u32, weight: f64 },
    #[error("expected {expected} weights, got {got}")]
    WeightCount { expected: usize, got: usize },
    #[error("invalid topology: {0}")]
    InvalidTopology(String),
}

/// Immutable node-weighted undirected graph.
///
/// Adjacency lists are sorted and symmetric; there are no self-loops and no
/// parallel edges. Every weight is strictly positive.
#[derive(Clone, Debug, PartialEq)]
pub struct Graph {
    weights: Vec<f64>,
    adjacency: Vec<Vec<VertexId>>,
    edge_count: usize,
}

impl Graph {
    /// Builds a graph on vertices `1..=order` with unit weights.
    pub fn from_edges<I>(order: usize, edges: I) -> Result<Self, GraphError>
    where
        I: IntoIterator<Item = (u32, u32)>,
    {
        Self::with_weights(order, edges, vec![1.0; order])
    }

    pub fn with_weights<I>(order: usize, edges: I, weights: Vec<f64>) -> Result<Self, GraphError>
    where
        I: IntoIterator<Item = (u32, u32)>,
    {
        if weights.len() != order {
            return Err(GraphError::WeightCount {
                expected: order,
                got: weights.len(),
            });
        }
        for (i, &w) in weights.iter().enumerate() {
            if !(w > 0.0 && w.is_finite()) {
                return Err(GraphError::NonPositiveWeight {
                    vertex: i as u32 + 1,
                    weight: w,
                });
            }
        }
        let mut adjacency = vec![Vec::new(); order];
        let mut edge_count = 0;
        for (u, v) in edges {
            for x in [u, v] {
                if x == 0 || x as usize > order {
                    return Err(GraphError::VertexOutOfRange { vertex: x, order });
                }
            }
            if u == v {
                return Err(GraphError::SelfLoop(u));
            }
            adjacency[u as usize - 1].push(VertexId(v));
            adjacency[v as usize - 1].push(VertexId(u));
            edge_count += 1;
        }
        for (i, list) in adjacency.iter_mut().enumerate() {
            list.sort_unstable();
            if let Some(pair) = list.windows(2).find(|p| p[0] == p[1]) {
                let (a, b) = (i as u32 + 1, pair[0].0);
                return Err(GraphError::DuplicateEdge(a.min(b), a.max(b)));
            }
        }
        Ok(Graph {
            weights,
            adjacency,
            edge_count,
        })
    }

    /// Edgeless graph on `order` vertices with unit weights.
    pub fn empty(order: usize) -> Self {
        Graph {
            weights: vec![1.0; order],
            adjacency: vec![Vec::new(); order],
            edge_count: 0,
        }
    }

    /// Same structure, new weights.
    pub fn reweighted(&self, weights: Vec<f64>) -> Result<Self, GraphError> {
        Self::with_weights(self.order(), self.edges().map(|(u, v)| (u.0, v.0)), weights)
    }

    pub fn order(&self) -> usize {
        self.weights.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edge_count
    }

    pub fn vertices(&self) -> impl Iterator<Item = VertexId> + '_ {
        (0..self.order()).map(VertexId::from_index)
    }

    pub fn weight(&self, v: VertexId) -> f64 {
        self.weights[v.index()]
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn total_weight(&self) -> f64 {
        self.weights.iter().sum()
    }

    pub fn neighbors(&self, v: VertexId) -> &[VertexId] {
        &self.adjacency[v.index()]
    }

    pub fn degree(&self, v: VertexId) -> usize {
        self.adjacency[v.index()].len()
    }

    pub fn has_edge(&self, u: VertexId, v: VertexId) -> bool {
        self.adjacency[u.index()].binary_search(&v).is_ok()
    }

    /// Edges as `(u, v)` with `u < v`, in lexicographic order.
    pub fn edges(&self) -> impl Iterator<Item = (VertexId, VertexId)> + '_ {
        self.vertices().flat_map(move |u| {
            self.neighbors(u)
                .iter()
                .copied()
                .filter(move |&v| u < v)
                .map(move |v| (u, v))
        })
    }

    /// `2|E| / |V|`, or 0 for the empty graph.
    pub fn average_degree(&self) -> f64 {
        if self.order() == 0 {
            0.0
        } else {
            2.0 * self.edge_count as f64 / self.order() as f64
        }
    }

    pub fn max_degree(&self) -> usize {
        self.adjacency.iter().map(Vec::len).max().unwrap_or(0)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_bad_edges() {
        assert_eq!(
            Graph::from_edges(3, [(1, 4)]),
            Err(GraphError::VertexOutOfRange {
                vertex: 4,
                order: 3
            })
        );
        assert_eq!(Graph::from_edges(3, [(2, 2)]), Err(GraphError::SelfLoop(2)));
        assert_eq!(
            Graph::from_edges(3, [(1, 2), (2, 1)]),
            Err(GraphError::DuplicateEdge(1, 2))
        );
    }

    #[test]
    fn rejects_non_positive_weight() {
        let err = Graph::with_weights(2, [(1, 2)], vec![3.0, 0.0]).unwrap_err();
        assert!(matches!(
            err,
            GraphError::NonPositiveWeight { vertex: 2, .. }
        ));
    }

    #[test]
    fn adjacency_is_symmetric_and_sorted() {
        let g = Graph::from_edges(4, [(3, 1), (1, 2), (4, 1)]).unwrap();
        assert_eq!(
            g.neighbors(VertexId(1)),
            &[VertexId(2), VertexId(3), VertexId(4)]
        );
        assert_eq!(g.neighbors(VertexId(3)), &[VertexId(1)]);
        assert_eq!(g.degree(VertexId(1)), 3);
        assert!(g.has_edge(VertexId(4), VertexId(1)));
        assert!(!g.has_edge(VertexId(2), VertexId(3)));
        let edges: Vec<_> = g.edges().map(|(u, v)| (u.0, v.0)).collect();
        assert_eq!(edges, vec![(1, 2), (1, 3), (1, 4)]);
        assert_eq!(g.average_degree(), 1.5);
    }
}
