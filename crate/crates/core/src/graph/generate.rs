use std::collections::HashSet;
use std::fmt;
use std::str::FromStr;

use rand::seq::index;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{Graph, GraphError};

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TopologyKind {
    /// Erdős–Rényi.
    Random,
    /// Barabási–Albert preferential attachment.
    ScaleFree,
    /// Newman–Watts–Strogatz ring lattice plus shortcuts.
    SmallWorld,
}

impl TopologyKind {
    pub const ALL: [TopologyKind; 3] = [
        TopologyKind::Random,
        TopologyKind::ScaleFree,
        TopologyKind::SmallWorld,
    ];

    pub fn name(self) -> &'static str {
        match self {
            TopologyKind::Random => "random",
            TopologyKind::ScaleFree => "scalefree",
            TopologyKind::SmallWorld => "smallworld",
        }
    }
}

impl fmt::Display for TopologyKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for TopologyKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "random" | "er" | "erdos-renyi" => Ok(TopologyKind::Random),
            "scalefree" | "scale-free" | "ba" => Ok(TopologyKind::ScaleFree),
            "smallworld" | "small-world" | "nws" => Ok(TopologyKind::SmallWorld),
            other => Err(format!("unknown topology `{other}`")),
        }
    }
}

/// Generator parameters: shape, vertex count and target average degree.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Topology {
    pub kind: TopologyKind,
    pub order: usize,
    pub target_avg_degree: u32,
}

impl Topology {
    pub fn new(kind: TopologyKind, order: usize, target_avg_degree: u32) -> Self {
        Topology {
            kind,
            order,
            target_avg_degree,
        }
    }

    pub fn validate(&self) -> Result<(), GraphError> {
        if self.order < 2 {
            return Err(GraphError::InvalidTopology(format!(
                "order must be at least 2, got {}",
                self.order
            )));
        }
        if self.target_avg_degree == 0 {
            return Err(GraphError::InvalidTopology(
                "target average degree must be positive".into(),
            ));
        }
        if self.target_avg_degree as usize >= self.order {
            return Err(GraphError::InvalidTopology(format!(
                "target average degree {} must be below the order {}",
                self.target_avg_degree, self.order
            )));
        }
        Ok(())
    }

    /// Edge count that realizes the target average degree exactly.
    fn target_edges(&self) -> usize {
        let n = self.order;
        let wanted = (n as f64 * self.target_avg_degree as f64 / 2.0).round() as usize;
        wanted.min(n * (n - 1) / 2)
    }
}

/// Generates an unweighted (unit-weight) graph. Vertex IDs follow generation
/// order; the result depends only on `(topology, seed)`.
pub fn generate(topology: &Topology, seed: u64) -> Result<Graph, GraphError> {
    topology.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let edges = match topology.kind {
        TopologyKind::Random => erdos_renyi(topology, &mut rng),
        TopologyKind::ScaleFree => barabasi_albert(topology, &mut rng),
        TopologyKind::SmallWorld => newman_watts_strogatz(topology, &mut rng),
    };
    Graph::from_edges(topology.order, edges)
}

/// G(n, M) with M = round(n·D/2): every M-subset of vertex pairs is equally likely.
fn erdos_renyi(topology: &Topology, rng: &mut ChaCha8Rng) -> Vec<(u32, u32)> {
    let n = topology.order;
    let pairs = n * (n - 1) / 2;
    let mut picked = index::sample(rng, pairs, topology.target_edges()).into_vec();
    picked.sort_unstable();

    // Pair index k enumerates (0,1), (0,2), .., (0,n-1), (1,2), ..
    let mut edges = Vec::with_capacity(picked.len());
    let mut row = 0usize;
    let mut row_start = 0usize;
    for k in picked {
        while k >= row_start + (n - 1 - row) {
            row_start += n - 1 - row;
            row += 1;
        }
        let col = row + 1 + (k - row_start);
        edges.push((row as u32 + 1, col as u32 + 1));
    }
    edges
}

/// Preferential attachment seeded with a clique of `ceil(D/2) + 1` vertices.
/// Each later vertex attaches to `D/2` existing vertices on average; the
/// fractional part is spread so that the final edge count is round(n·D/2).
fn barabasi_albert(topology: &Topology, rng: &mut ChaCha8Rng) -> Vec<(u32, u32)> {
    let n = topology.order;
    let m_hi = (topology.target_avg_degree as usize).div_ceil(2);
    let seed_size = (m_hi + 1).min(n);

    let mut edges = Vec::with_capacity(topology.target_edges());
    // One entry per edge endpoint: sampling from it is degree-proportional.
    let mut endpoints: Vec<u32> = Vec::with_capacity(2 * topology.target_edges());
    for u in 0..seed_size {
        for v in (u + 1)..seed_size {
            edges.push((u as u32, v as u32));
            endpoints.push(u as u32);
            endpoints.push(v as u32);
        }
    }

    let remaining = topology.target_edges().saturating_sub(edges.len());
    let newcomers = n - seed_size;
    let mut chosen: Vec<u32> = Vec::with_capacity(m_hi);
    for t in seed_size..n {
        let j = t - seed_size;
        let quota = remaining * (j + 1) / newcomers - remaining * j / newcomers;
        let quota = quota.min(t);

        chosen.clear();
        if quota == t {
            chosen.extend(0..t as u32);
        } else {
            let mut attempts = 0usize;
            while chosen.len() < quota {
                let candidate = if endpoints.is_empty() || attempts > 64 * quota {
                    rng.gen_range(0..t as u32)
                } else {
                    endpoints[rng.gen_range(0..endpoints.len())]
                };
                attempts += 1;
                if !chosen.contains(&candidate) {
                    chosen.push(candidate);
                }
            }
        }
        for &target in &chosen {
            edges.push((target, t as u32));
            endpoints.push(target);
            endpoints.push(t as u32);
        }
    }
    edges.into_iter().map(|(u, v)| (u + 1, v + 1)).collect()
}

/// Ring lattice where every vertex links to its `k/2` nearest neighbours on
/// each side, then for every ring edge a shortcut to a uniformly random
/// non-neighbour is added with probability `(D - k) / k`. No ring edge is
/// ever removed.
///
/// `k` is the smallest even number with `k >= D/2` (so the probability
/// stays at most 1), capped at the largest even number not above D. For
/// D = 5, 10, 15 this gives k = 4, 6, 8.
fn newman_watts_strogatz(topology: &Topology, rng: &mut ChaCha8Rng) -> Vec<(u32, u32)> {
    let n = topology.order;
    let d = topology.target_avg_degree as usize;
    let k = ring_degree(d);

    let mut present: HashSet<(u32, u32)> = HashSet::new();
    let mut degree = vec![0usize; n];
    let mut edges = Vec::new();
    let mut add = |u: usize, v: usize, edges: &mut Vec<(u32, u32)>, degree: &mut Vec<usize>| {
        let key = (u.min(v) as u32, u.max(v) as u32);
        if u != v && present.insert(key) {
            edges.push(key);
            degree[u] += 1;
            degree[v] += 1;
            true
        } else {
            false
        }
    };

    for u in 0..n {
        for j in 1..=k / 2 {
            add(u, (u + j) % n, &mut edges, &mut degree);
        }
    }

    // With k = 0 (D = 1) there is no ring; each vertex tries one shortcut
    // with probability D/2 instead.
    let (trials_per_vertex, p) = if k == 0 {
        (1, d as f64 / 2.0)
    } else {
        (k / 2, (d - k) as f64 / k as f64)
    };
    if p > 0.0 {
        for u in 0..n {
            for _ in 0..trials_per_vertex {
                if rng.gen::<f64>() >= p || degree[u] >= n - 1 {
                    continue;
                }
                loop {
                    let w = rng.gen_range(0..n);
                    if add(u, w, &mut edges, &mut degree) {
                        break;
                    }
                }
            }
        }
    }
    edges.into_iter().map(|(u, v)| (u + 1, v + 1)).collect()
}

fn ring_degree(d: usize) -> usize {
    let half = d.div_ceil(2);
    (half + half % 2).min(d - d % 2)
}
