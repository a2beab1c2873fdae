//! Plain-text graph format:
//!
//! ```text
//! <n> <m>
//! <weight of vertex 1>
//! ...
//! <weight of vertex n>
//! <u> <v>        (m lines, 1 <= u < v <= n)
//! ```

use std::collections::HashSet;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use thiserror::Error;

use super::Graph;

#[derive(Debug, Error)]
pub enum GraphFileError {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("malformed header `{0}`, expected `<n> <m>`")]
    MalformedHeader(String),
    #[error("line {line}: malformed weight `{content}`")]
    MalformedWeight { line: usize, content: String },
    #[error("line {line}: weight of vertex {vertex} must be positive, got {weight}")]
    NonPositiveWeight {
        line: usize,
        vertex: usize,
        weight: f64,
    },
    #[error("line {line}: malformed edge `{content}`, expected `<u> <v>`")]
    MalformedEdge { line: usize, content: String },
    #[error("line {line}: vertex {vertex} out of range 1..={order}")]
    VertexOutOfRange {
        line: usize,
        vertex: u64,
        order: usize,
    },
    #[error("line {line}: self-loop on vertex {vertex}")]
    SelfLoop { line: usize, vertex: u64 },
    #[error("line {line}: duplicate edge ({u}, {v})")]
    DuplicateEdge { line: usize, u: u32, v: u32 },
    #[error("file ends after {found} of {expected} {what} lines")]
    Truncated {
        what: &'static str,
        expected: usize,
        found: usize,
    },
    #[error("line {line}: unexpected content after the declared edges")]
    TrailingData { line: usize },
}

pub fn load_graph(path: impl AsRef<Path>) -> Result<Graph, GraphFileError> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|source| GraphFileError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    parse_graph(&text)
}

pub fn save_graph(graph: &Graph, path: impl AsRef<Path>) -> Result<(), GraphFileError> {
    let path = path.as_ref();
    fs::write(path, write_graph(graph)).map_err(|source| GraphFileError::Io {
        path: path.to_path_buf(),
        source,
    })
}

/// Serializes a graph. Weights use the shortest representation that parses
/// back to the same `f64`, so loading the output is exact.
pub fn write_graph(graph: &Graph) -> String {
    let mut out = String::with_capacity(16 * (graph.order() + graph.edge_count()));
    let _ = writeln!(out, "{} {}", graph.order(), graph.edge_count());
    for w in graph.weights() {
        let _ = writeln!(out, "{w}");
    }
    for (u, v) in graph.edges() {
        let _ = writeln!(out, "{u} {v}");
    }
    out
}

pub fn parse_graph(text: &str) -> Result<Graph, GraphFileError> {
    // Blank lines are ignored anywhere; line numbers stay 1-based and physical.
    let mut lines = text
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty());

    let (_, header) = lines
        .next()
        .ok_or_else(|| GraphFileError::MalformedHeader(String::new()))?;
    let (order, edge_count) = parse_pair::<usize>(header)
        .ok_or_else(|| GraphFileError::MalformedHeader(header.to_string()))?;

    let mut weights = Vec::with_capacity(order);
    for vertex in 1..=order {
        let (line, content) = lines.next().ok_or(GraphFileError::Truncated {
            what: "weight",
            expected: order,
            found: vertex - 1,
        })?;
        let weight: f64 = content
            .parse()
            .map_err(|_| GraphFileError::MalformedWeight {
                line,
                content: content.to_string(),
            })?;
        if !(weight > 0.0 && weight.is_finite()) {
            return Err(GraphFileError::NonPositiveWeight {
                line,
                vertex,
                weight,
            });
        }
        weights.push(weight);
    }

    let mut seen = HashSet::with_capacity(edge_count);
    let mut edges = Vec::with_capacity(edge_count);
    for found in 0..edge_count {
        let (line, content) = lines.next().ok_or(GraphFileError::Truncated {
            what: "edge",
            expected: edge_count,
            found,
        })?;
        let (u, v) = parse_pair::<u64>(content).ok_or_else(|| GraphFileError::MalformedEdge {
            line,
            content: content.to_string(),
        })?;
        for vertex in [u, v] {
            if vertex == 0 || vertex > order as u64 {
                return Err(GraphFileError::VertexOutOfRange {
                    line,
                    vertex,
                    order,
                });
            }
        }
        if u == v {
            return Err(GraphFileError::SelfLoop { line, vertex: u });
        }
        let key = (u.min(v) as u32, u.max(v) as u32);
        if !seen.insert(key) {
            return Err(GraphFileError::DuplicateEdge {
                line,
                u: key.0,
                v: key.1,
            });
        }
        edges.push(key);
    }
    if let Some((line, _)) = lines.next() {
        return Err(GraphFileError::TrailingData { line });
    }

    Ok(Graph::with_weights(order, edges, weights).expect("edges and weights validated above"))
}

fn parse_pair<T: std::str::FromStr>(line: &str) -> Option<(T, T)> {
    let mut it = line.split_ascii_whitespace();
    let a = it.next()?.parse().ok()?;
    let b = it.next()?.parse().ok()?;
    if it.next().is_some() {
        return None;
    }
    Some((a, b))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{assign_weights, generate, Topology, TopologyKind, WeightDistribution};

    #[test]
    fn k2_layout() {
        let g = Graph::with_weights(2, [(1, 2)], vec![20.0, 100.0]).unwrap();
        assert_eq!(write_graph(&g), "2 1\n20\n100\n1 2\n");
    }

    #[test]
    fn generated_graph_round_trips_through_file() {
        let g = generate(&Topology::new(TopologyKind::Random, 128, 5), 3).unwrap();
        let g = assign_weights(&g, WeightDistribution::PowerLaw, 3);
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("g.txt");
        save_graph(&g, &path).unwrap();
        assert_eq!(load_graph(&path).unwrap(), g);
    }

    #[test]
    fn out_of_range_vertex() {
        let err = parse_graph("3 1\n1\n1\n1\n1 4\n").unwrap_err();
        assert!(matches!(
            err,
            GraphFileError::VertexOutOfRange {
                line: 5,
                vertex: 4,
                order: 3
            }
        ));
    }

    #[test]
    fn distinct_errors() {
        assert!(matches!(
            parse_graph("3\n1\n1\n1\n").unwrap_err(),
            GraphFileError::MalformedHeader(_)
        ));
        assert!(matches!(
            parse_graph("two 1\n").unwrap_err(),
            GraphFileError::MalformedHeader(_)
        ));
        assert!(matches!(
            parse_graph("2 2\n1\n1\n1 2\n2 1\n").unwrap_err(),
            GraphFileError::DuplicateEdge {
                line: 5,
                u: 1,
                v: 2
            }
        ));
        assert!(matches!(
            parse_graph("2 0\n1\n0\n").unwrap_err(),
            GraphFileError::NonPositiveWeight { vertex: 2, .. }
        ));
        assert!(matches!(
            parse_graph("2 0\n1\n-3\n").unwrap_err(),
            GraphFileError::NonPositiveWeight { vertex: 2, .. }
        ));
        assert!(matches!(
            parse_graph("2 0\n1\nabc\n").unwrap_err(),
            GraphFileError::MalformedWeight { line: 3, .. }
        ));
        assert!(matches!(
            parse_graph("2 1\n1\n1\n").unwrap_err(),
            GraphFileError::Truncated { what: "edge", .. }
        ));
        assert!(matches!(
            parse_graph("2 1\n1\n1\n1 1\n").unwrap_err(),
            GraphFileError::SelfLoop { vertex: 1, .. }
        ));
        assert!(matches!(
            parse_graph("2 0\n1\n1\n1 2\n").unwrap_err(),
            GraphFileError::TrailingData { line: 4 }
        ));
    }

    #[test]
    fn missing_file_reports_path() {
        let err = load_graph("/nonexistent/graph.txt").unwrap_err();
        assert!(err.to_string().contains("/nonexistent/graph.txt"));
    }
}
