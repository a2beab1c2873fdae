//! Seeded batch experiments over the synthetic testbed.
//!
//! A configuration is the cross product of topologies, orders, degrees and
//! weight distributions; each cell is repeated `repetitions` times on freshly
//! generated graphs and weights. Seeds are derived from the cell identity and
//! repetition index only, so cells can run in any order (or in parallel) and
//! adding cells never changes existing ones.

use std::fs;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::engine::{run_with, RunReport, Schedule};
use crate::graph::{
    assign_weights, generate, Graph, GraphError, Topology, TopologyKind, VertexId,
    WeightDistribution,
};
use crate::protocol::OptimizeRule;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("config parse error: {0}")]
    Parse(#[from] toml::de::Error),
    #[error("invalid config: {0}")]
    Invalid(String),
}

#[derive(Debug, Error)]
pub enum EmitError {
    #[error("nothing to emit: no rows")]
    Empty,
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}: {source}")]
    Json {
        path: PathBuf,
        #[source]
        source: serde_json::Error,
    },
    #[error("{path}: {source}")]
    Csv {
        path: PathBuf,
        #[source]
        source: csv::Error,
    },
}

fn default_repetitions() -> usize {
    10
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub topologies: Vec<TopologyKind>,
    pub orders: Vec<usize>,
    pub degrees: Vec<u32>,
    pub distributions: Vec<WeightDistribution>,
    #[serde(default = "default_repetitions")]
    pub repetitions: usize,
    #[serde(default)]
    pub base_seed: u64,
    #[serde(default)]
    pub rule: OptimizeRule,
    #[serde(default)]
    pub schedule: Schedule,
}

impl ExperimentConfig {
    /// The full sparse testbed: 3 topologies, orders 2^6..=2^14, degrees
    /// 5/10/15, both weight distributions.
    pub fn full_matrix(base_seed: u64) -> Self {
        ExperimentConfig {
            topologies: TopologyKind::ALL.to_vec(),
            orders: (6..=14).map(|e| 1usize << e).collect(),
            degrees: vec![5, 10, 15],
            distributions: WeightDistribution::ALL.to_vec(),
            repetitions: default_repetitions(),
            base_seed,
            rule: OptimizeRule::SafeLocalMin,
            schedule: Schedule::Sweep,
        }
    }

    /// Parses the TOML key-value form, e.g.
    ///
    /// ```toml
    /// topologies = ["random", "scalefree", "smallworld"]
    /// orders = [64, 128, 256]
    /// degrees = [5, 10, 15]
    /// distributions = ["uniform", "power"]
    /// repetitions = 10
    /// base_seed = 1
    /// rule = "safe"
    /// schedule = "sweep"
    /// ```
    pub fn parse(text: &str) -> Result<Self, ConfigError> {
        let config: ExperimentConfig = toml::from_str(text)?;
        config.validate()?;
        Ok(config)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self, ConfigError> {
        let path = path.as_ref();
        let text = fs::read_to_string(path).map_err(|source| ConfigError::Io {
            path: path.to_path_buf(),
            source,
        })?;
        Self::parse(&text)
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        let invalid = |m: &str| Err(ConfigError::Invalid(m.to_string()));
        if self.repetitions == 0 {
            return invalid("repetitions must be at least 1");
        }
        if self.topologies.is_empty()
            || self.orders.is_empty()
            || self.degrees.is_empty()
            || self.distributions.is_empty()
        {
            return invalid("topologies, orders, degrees and distributions must be non-empty");
        }
        if self.orders.iter().any(|&n| n < 2) {
            return invalid("orders must be at least 2");
        }
        if self.degrees.contains(&0) {
            return invalid("degrees must be positive");
        }
        Ok(())
    }

    /// Cells in enumeration order: topology, order, degree, distribution.
    pub fn cells(&self) -> Vec<CellKey> {
        let mut cells = Vec::new();
        for &topology in &self.topologies {
            for &order in &self.orders {
                for &degree in &self.degrees {
                    for &distribution in &self.distributions {
                        cells.push(CellKey {
                            topology,
                            order,
                            degree,
                            distribution,
                        });
                    }
                }
            }
        }
        cells
    }
}

/// Identity of one experiment cell.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct CellKey {
    pub topology: TopologyKind,
    pub order: usize,
    pub degree: u32,
    pub distribution: WeightDistribution,
}

impl CellKey {
    pub fn topology_params(&self) -> Topology {
        Topology::new(self.topology, self.order, self.degree)
    }

    /// Seed of repetition `rep`: `base_seed` xor a stable hash of the cell
    /// fields and the repetition index.
    pub fn seed(&self, base_seed: u64, rep: usize) -> u64 {
        let topology = match self.topology {
            TopologyKind::Random => 1,
            TopologyKind::ScaleFree => 2,
            TopologyKind::SmallWorld => 3,
        };
        let distribution = match self.distribution {
            WeightDistribution::Uniform => 1,
            WeightDistribution::PowerLaw => 2,
        };
        let h = [
            topology,
            self.order as u64,
            self.degree as u64,
            distribution,
            rep as u64,
        ]
        .into_iter()
        .fold(0x243f_6a88_85a3_08d3u64, |acc, x| splitmix64(acc ^ x));
        base_seed ^ h
    }

    /// Graph and weights for one repetition.
    pub fn instance(&self, base_seed: u64, rep: usize) -> Result<Graph, GraphError> {
        let seed = self.seed(base_seed, rep);
        let graph = generate(&self.topology_params(), splitmix64(seed ^ 0x67))?;
        Ok(assign_weights(
            &graph,
            self.distribution,
            splitmix64(seed ^ 0x77),
        ))
    }
}

/// SplitMix64 finalizer, used as a portable integer hash.
pub fn splitmix64(x: u64) -> u64 {
    let mut z = x.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Fraction of the total vertex weight taken by `cover`. Lower is better.
pub fn apw(graph: &Graph, cover: &[VertexId]) -> f64 {
    let total = graph.total_weight();
    if total <= 0.0 {
        return 0.0;
    }
    cover.iter().map(|&v| graph.weight(v)).sum::<f64>() / total
}

/// Means over the repetitions of one cell. Statistic fields are `None`
/// when the cell failed.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AggregateRow {
    pub topology: TopologyKind,
    pub order: usize,
    pub degree: u32,
    pub distribution: WeightDistribution,
    pub rule: OptimizeRule,
    pub schedule: Schedule,
    pub repetitions: usize,
    pub mean_apw: Option<f64>,
    pub mean_rounds: Option<f64>,
    pub mean_mpn: Option<f64>,
    pub mean_elapsed_ms: Option<f64>,
    pub mean_cover_size: Option<f64>,
    pub mean_avg_degree: Option<f64>,
    pub validity_rate: Option<f64>,
    pub error: Option<String>,
}

impl AggregateRow {
    pub fn key(&self) -> CellKey {
        CellKey {
            topology: self.topology,
            order: self.order,
            degree: self.degree,
            distribution: self.distribution,
        }
    }

    pub fn is_failed(&self) -> bool {
        self.error.is_some()
    }

    pub fn failed(key: CellKey, config: &ExperimentConfig, error: String) -> Self {
        AggregateRow {
            topology: key.topology,
            order: key.order,
            degree: key.degree,
            distribution: key.distribution,
            rule: config.rule,
            schedule: config.schedule,
            repetitions: config.repetitions,
            mean_apw: None,
            mean_rounds: None,
            mean_mpn: None,
            mean_elapsed_ms: None,
            mean_cover_size: None,
            mean_avg_degree: None,
            validity_rate: None,
            error: Some(error),
        }
    }

    /// Averages a non-empty set of runs of one cell.
    pub fn from_runs(key: CellKey, runs: &[RunReport]) -> Self {
        assert!(!runs.is_empty(), "aggregate of zero runs");
        let r = runs.len() as f64;
        let mean = |f: &dyn Fn(&RunReport) -> f64| Some(runs.iter().map(f).sum::<f64>() / r);
        AggregateRow {
            topology: key.topology,
            order: key.order,
            degree: key.degree,
            distribution: key.distribution,
            rule: runs[0].rule,
            schedule: runs[0].schedule,
            repetitions: runs.len(),
            mean_apw: mean(&|x| x.apw),
            mean_rounds: mean(&|x| x.rounds as f64),
            mean_mpn: mean(&|x| x.mpn),
            mean_elapsed_ms: mean(&|x| x.elapsed_ms),
            mean_cover_size: mean(&|x| x.cover_size as f64),
            mean_avg_degree: mean(&|x| 2.0 * x.edges as f64 / x.order as f64),
            validity_rate: mean(&|x| if x.valid { 1.0 } else { 0.0 }),
            error: None,
        }
    }
}

/// All repetitions of one cell.
pub fn run_cell(key: CellKey, config: &ExperimentConfig) -> Result<Vec<RunReport>, GraphError> {
    (0..config.repetitions)
        .map(|rep| {
            let graph = key.instance(config.base_seed, rep)?;
            Ok(run_with(&graph, config.rule, config.schedule))
        })
        .collect()
}

/// One row per cell, in [`ExperimentConfig::cells`] order. Cells run in
/// parallel; a failing cell yields a row with `error` set.
pub fn run_experiment(config: &ExperimentConfig) -> Vec<AggregateRow> {
    config
        .cells()
        .into_par_iter()
        .map(|key| match run_cell(key, config) {
            Ok(runs) => AggregateRow::from_runs(key, &runs),
            Err(e) => AggregateRow::failed(key, config, e.to_string()),
        })
        .collect()
}

const CSV_HEADER: [&str; 14] = [
    "topology",
    "order",
    "degree",
    "distribution",
    "rule",
    "schedule",
    "repetitions",
    "mean_apw",
    "mean_rounds",
    "mean_mpn",
    "mean_cover_size",
    "mean_avg_degree",
    "validity_rate",
    "error",
];

fn fmt_opt(x: Option<f64>) -> String {
    x.map(|v| format!("{v:.6}")).unwrap_or_default()
}

/// Writes rows as CSV with a fixed column order. Timing is hardware
/// dependent, so `mean_elapsed_ms` is only appended when `include_timing`
/// is set; without it the output is a pure function of the rows' seeds.
pub fn emit_csv(
    rows: &[AggregateRow],
    path: impl AsRef<Path>,
    include_timing: bool,
) -> Result<(), EmitError> {
    let path = path.as_ref();
    let bytes = csv_bytes(rows, include_timing).map_err(|source| EmitError::Csv {
        path: path.to_path_buf(),
        source,
    })?;
    if rows.is_empty() {
        return Err(EmitError::Empty);
    }
    fs::write(path, bytes).map_err(|source| EmitError::Io {
        path: path.to_path_buf(),
        source,
    })
}

pub fn csv_bytes(rows: &[AggregateRow], include_timing: bool) -> Result<Vec<u8>, csv::Error> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let mut header: Vec<&str> = CSV_HEADER.to_vec();
    if include_timing {
        header.push("mean_elapsed_ms");
    }
    w.write_record(&header)?;
    for row in rows {
        let mut record = vec![
            row.topology.to_string(),
            row.order.to_string(),
            row.degree.to_string(),
            row.distribution.to_string(),
            row.rule.to_string(),
            row.schedule.to_string(),
            row.repetitions.to_string(),
            fmt_opt(row.mean_apw),
            fmt_opt(row.mean_rounds),
            fmt_opt(row.mean_mpn),
            fmt_opt(row.mean_cover_size),
            fmt_opt(row.mean_avg_degree),
            fmt_opt(row.validity_rate),
            row.error.clone().unwrap_or_default(),
        ];
        if include_timing {
            record.push(fmt_opt(row.mean_elapsed_ms));
        }
        w.write_record(&record)?;
    }
    Ok(w.into_inner().expect("in-memory writer"))
}

/// Writes rows as a JSON array of objects keyed by field name.
pub fn emit_json(rows: &[AggregateRow], path: impl AsRef<Path>) -> Result<(), EmitError> {
    let path = path.as_ref();
    if rows.is_empty() {
        return Err(EmitError::Empty);
    }
    let mut text = serde_json::to_string_pretty(rows).map_err(|source| EmitError::Json {
        path: path.to_path_buf(),
        source,
    })?;
    text.push('\n');
    fs::write(path, text).map_err(|source| EmitError::Io {
        path: path.to_path_buf(),
        source,
    })
}
