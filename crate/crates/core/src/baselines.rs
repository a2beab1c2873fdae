//! Centralized reference solvers: an exact enumerator for small graphs and a
//! weight-per-uncovered-edge greedy with an optional pruning pass.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::graph::{Graph, VertexId};
use crate::protocol::{score, Score};

/// Largest graph the exact solver accepts.
pub const BRUTE_FORCE_MAX_ORDER: usize = 24;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum BaselineError {
    #[error("exact solver supports at most {max} vertices, graph has {order}")]
    TooLarge { order: usize, max: usize },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SolverResult {
    pub cover: Vec<VertexId>,
    pub cover_weight: f64,
    pub exact: bool,
}

impl SolverResult {
    fn new(graph: &Graph, mut cover: Vec<VertexId>, exact: bool) -> Self {
        cover.sort_unstable();
        let cover_weight = cover.iter().map(|&v| graph.weight(v)).sum();
        SolverResult {
            cover,
            cover_weight,
            exact,
        }
    }
}

/// Exact minimum-weight vertex cover by branch and bound over vertices in ID
/// order. Among optima of equal weight the lexicographically smallest sorted
/// vertex list is returned.
pub fn brute_force_mwvc(graph: &Graph) -> Result<SolverResult, BaselineError> {
    let n = graph.order();
    if n > BRUTE_FORCE_MAX_ORDER {
        return Err(BaselineError::TooLarge {
            order: n,
            max: BRUTE_FORCE_MAX_ORDER,
        });
    }
    let masks: Vec<u32> = graph
        .vertices()
        .map(|v| {
            graph
                .neighbors(v)
                .iter()
                .fold(0u32, |m, u| m | 1 << u.index())
        })
        .collect();
    let mut search = Exact {
        weights: graph.weights(),
        neighbor_masks: &masks,
        best_weight: f64::INFINITY,
        best_set: 0,
    };
    search.branch(0, 0, 0.0);
    let cover = (0..n)
        .filter(|&i| search.best_set >> i & 1 == 1)
        .map(VertexId::from_index)
        .collect();
    Ok(SolverResult::new(graph, cover, true))
}

struct Exact<'a> {
    weights: &'a [f64],
    neighbor_masks: &'a [u32],
    best_weight: f64,
    best_set: u32,
}

impl Exact<'_> {
    /// Vertices below `next` are decided: in `chosen` or excluded. An
    /// excluded vertex forces all its neighbours into the cover, so the
    /// invariant is that every edge between decided vertices is covered.
    fn branch(&mut self, next: usize, chosen: u32, weight: f64) {
        if weight > self.best_weight {
            return;
        }
        if next == self.weights.len() {
            if weight < self.best_weight
                || (weight == self.best_weight && lex_less(chosen, self.best_set))
            {
                self.best_weight = weight;
                self.best_set = chosen;
            }
            return;
        }
        let bit = 1u32 << next;
        let decided = bit - 1;
        if chosen & bit != 0 {
            // Already forced in by an excluded neighbour.
            self.branch(next + 1, chosen, weight);
            return;
        }
        // Including first visits lexicographically smaller sets earlier.
        self.branch(next + 1, chosen | bit, weight + self.weights[next]);
        if self.neighbor_masks[next] & decided & !chosen == 0 {
            let forced = self.neighbor_masks[next] & !decided & !chosen;
            let extra: f64 = (0..self.weights.len())
                .filter(|&j| forced >> j & 1 == 1)
                .map(|j| self.weights[j])
                .sum();
            self.branch(next + 1, chosen | forced, weight + extra);
        }
    }
}

/// Lexicographic comparison of the sorted vertex lists encoded by two masks.
fn lex_less(a: u32, b: u32) -> bool {
    let (mut a, mut b) = (a, b);
    loop {
        match (a == 0, b == 0) {
            (true, true) => return false,
            (true, false) => return true,
            (false, true) => return false,
            _ => {}
        }
        let (x, y) = (a.trailing_zeros(), b.trailing_zeros());
        if x != y {
            return x < y;
        }
        a &= a - 1;
        b &= b - 1;
    }
}

#[derive(PartialEq, Eq)]
struct Candidate {
    score: Score,
    vertex: VertexId,
}

impl Ord for Candidate {
    // Max-heap order: lowest score first, then highest ID.
    fn cmp(&self, other: &Self) -> Ordering {
        other
            .score
            .cmp(&self.score)
            .then_with(|| self.vertex.cmp(&other.vertex))
    }
}

impl PartialOrd for Candidate {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Repeatedly adds the vertex minimizing `weight / uncovered incident
/// edges` until every edge is covered. Ties go to the highest ID.
pub fn greedy_mwvc(graph: &Graph) -> SolverResult {
    let mut in_cover = vec![false; graph.order()];
    let mut uncovered_degree: Vec<usize> = graph.vertices().map(|v| graph.degree(v)).collect();
    let mut heap: BinaryHeap<Candidate> = graph
        .vertices()
        .filter_map(|v| {
            score(graph.weight(v), uncovered_degree[v.index()])
                .ok()
                .map(|score| Candidate { score, vertex: v })
        })
        .collect();

    let mut cover = Vec::new();
    while let Some(Candidate {
        score: s,
        vertex: v,
    }) = heap.pop()
    {
        let i = v.index();
        if in_cover[i] || uncovered_degree[i] == 0 {
            continue;
        }
        // Lazy deletion: stale entries are re-pushed with the current gain.
        if s.gain() as usize != uncovered_degree[i] {
            heap.push(Candidate {
                score: score(graph.weight(v), uncovered_degree[i]).expect("gain > 0"),
                vertex: v,
            });
            continue;
        }
        in_cover[i] = true;
        cover.push(v);
        uncovered_degree[i] = 0;
        for &u in graph.neighbors(v) {
            if !in_cover[u.index()] {
                uncovered_degree[u.index()] -= 1;
            }
        }
    }
    SolverResult::new(graph, cover, false)
}

/// Drops cover vertices whose neighbours are all in the cover, heaviest
/// first (ties: highest ID first). One pass yields a minimal cover because
/// removals only ever make other vertices less removable.
pub fn redundancy_prune(graph: &Graph, cover: &[VertexId]) -> Vec<VertexId> {
    let mut in_cover = vec![false; graph.order()];
    for &v in cover {
        in_cover[v.index()] = true;
    }
    let mut order: Vec<VertexId> = cover.to_vec();
    order.sort_by(|a, b| {
        graph
            .weight(*b)
            .total_cmp(&graph.weight(*a))
            .then_with(|| b.cmp(a))
    });
    for v in order {
        if graph.neighbors(v).iter().all(|u| in_cover[u.index()]) {
            in_cover[v.index()] = false;
        }
    }
    graph.vertices().filter(|v| in_cover[v.index()]).collect()
}

/// Greedy followed by [`redundancy_prune`].
pub fn greedy_pruned_mwvc(graph: &Graph) -> SolverResult {
    let greedy = greedy_mwvc(graph);
    SolverResult::new(graph, redundancy_prune(graph, &greedy.cover), false)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::engine::validate_cover;

    fn ids(v: &[u32]) -> Vec<VertexId> {
        v.iter().map(|&x| VertexId(x)).collect()
    }

    /// Plain enumeration of all 2^n subsets, independent of the search above.
    fn enumerate_optimum(graph: &Graph) -> (f64, Vec<VertexId>) {
        let n = graph.order();
        let mut best: Option<(f64, Vec<VertexId>)> = None;
        for mask in 0u32..(1 << n) {
            let set: Vec<VertexId> = (0..n)
                .filter(|&i| mask >> i & 1 == 1)
                .map(VertexId::from_index)
                .collect();
            if !validate_cover(graph, &set) {
                continue;
            }
            let w: f64 = set.iter().map(|&v| graph.weight(v)).sum();
            let better = match &best {
                None => true,
                Some((bw, bs)) => w < *bw || (w == *bw && set < *bs),
            };
            if better {
                best = Some((w, set));
            }
        }
        best.unwrap()
    }

    #[test]
    fn exact_small_examples() {
        let k2 = Graph::with_weights(2, [(1, 2)], vec![10.0, 20.0]).unwrap();
        let r = brute_force_mwvc(&k2).unwrap();
        assert_eq!((r.cover, r.cover_weight, r.exact), (ids(&[1]), 10.0, true));

        let path = Graph::with_weights(3, [(1, 2), (2, 3)], vec![10.0, 1.0, 10.0]).unwrap();
        let r = brute_force_mwvc(&path).unwrap();
        assert_eq!((r.cover, r.cover_weight), (ids(&[2]), 1.0));

        let tri = Graph::with_weights(3, [(1, 2), (2, 3), (1, 3)], vec![20.0, 30.0, 40.0]).unwrap();
        let r = brute_force_mwvc(&tri).unwrap();
        assert_eq!((r.cover, r.cover_weight), (ids(&[1, 2]), 50.0));
    }

    #[test]
    fn exact_refuses_large_graphs() {
        assert_eq!(
            brute_force_mwvc(&Graph::empty(25)),
            Err(BaselineError::TooLarge { order: 25, max: 24 })
        );
        assert!(brute_force_mwvc(&Graph::empty(24)).is_ok());
    }

    #[test]
    fn exact_tie_break_is_lexicographic() {
        // C4 with unit weights: {1,3} and {2,4} both weigh 2.
        let c4 = Graph::from_edges(4, [(1, 2), (2, 3), (3, 4), (1, 4)]).unwrap();
        assert_eq!(brute_force_mwvc(&c4).unwrap().cover, ids(&[1, 3]));
        assert!(lex_less(0b0101, 0b1010));
        assert!(lex_less(0b0001, 0b0011));
        assert!(!lex_less(0b0011, 0b0011));
    }

    #[test]
    fn greedy_examples() {
        let path = Graph::with_weights(3, [(1, 2), (2, 3)], vec![10.0, 1.0, 10.0]).unwrap();
        assert_eq!(greedy_mwvc(&path).cover, ids(&[2]));
        assert!(greedy_mwvc(&Graph::empty(4)).cover.is_empty());
        let k2 = Graph::with_weights(2, [(1, 2)], vec![5.0, 5.0]).unwrap();
        assert_eq!(greedy_mwvc(&k2).cover, ids(&[2]));
    }

    #[test]
    fn prune_examples() {
        let tri = Graph::with_weights(3, [(1, 2), (2, 3), (1, 3)], vec![20.0, 30.0, 40.0]).unwrap();
        assert_eq!(redundancy_prune(&tri, &ids(&[1, 2, 3])), ids(&[1, 2]));
        assert_eq!(redundancy_prune(&tri, &ids(&[1, 2])), ids(&[1, 2]));
        let k2 = Graph::with_weights(2, [(1, 2)], vec![5.0, 7.0]).unwrap();
        assert_eq!(redundancy_prune(&k2, &ids(&[1, 2])), ids(&[1]));
    }

    #[test]
    fn exact_matches_full_enumeration() {
        use crate::graph::{assign_weights, generate, Topology, TopologyKind, WeightDistribution};
        for seed in 0..40u64 {
            let kind = TopologyKind::ALL[seed as usize % 3];
            let order = 4 + (seed as usize % 9);
            let d = 1 + (seed as u32 % (order as u32 - 1)).min(5);
            let g = generate(&Topology::new(kind, order, d), seed).unwrap();
            let g = assign_weights(&g, WeightDistribution::Uniform, seed);
            let (w, set) = enumerate_optimum(&g);
            let r = brute_force_mwvc(&g).unwrap();
            assert_eq!(r.cover_weight, w, "seed {seed}");
            assert_eq!(r.cover, set, "seed {seed}");

            let greedy = greedy_mwvc(&g);
            let pruned = greedy_pruned_mwvc(&g);
            assert!(validate_cover(&g, &greedy.cover));
            assert!(validate_cover(&g, &pruned.cover));
            assert!(pruned.cover_weight <= greedy.cover_weight);
            assert!(w <= pruned.cover_weight);
        }
    }
}
