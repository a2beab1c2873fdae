use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use serde::Serialize;
use thiserror::Error;

use decwvc::baselines::{brute_force_mwvc, greedy_pruned_mwvc, BaselineError, SolverResult};
use decwvc::engine::{run_with, validate_cover, Schedule};
use decwvc::experiments::{apw, emit_csv, emit_json, ConfigError, EmitError, ExperimentConfig};
use decwvc::graph::{
    assign_weights, generate, load_graph, save_graph, GraphError, GraphFileError, Topology,
    TopologyKind, WeightDistribution,
};
use decwvc::{OptimizeRule, VertexId};

#[derive(Parser)]
#[command(
    name = "decwvc",
    version,
    about = "Decentralized weighted vertex cover simulator"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a weighted synthetic graph.
    Generate {
        #[arg(long)]
        topology: TopologyKind,
        #[arg(long)]
        nodes: usize,
        #[arg(long)]
        avg_degree: u32,
        #[arg(long, default_value = "uniform")]
        weights: WeightDistribution,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Run the protocol (or a baseline) on a graph file and write a JSON report.
    Solve {
        #[arg(long)]
        graph: PathBuf,
        #[arg(long, default_value = "safe")]
        rule: OptimizeRule,
        #[arg(long, value_enum)]
        baseline: Option<Baseline>,
        #[arg(long, default_value = "sweep")]
        schedule: Schedule,
        #[arg(long)]
        out: PathBuf,
    },
    /// Run an experiment matrix from a TOML config.
    Experiment {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out_csv: PathBuf,
        #[arg(long)]
        out_json: Option<PathBuf>,
        /// Append the mean wall-clock time column (output is then not reproducible).
        #[arg(long)]
        timing: bool,
    },
    /// Check that a cover file covers every edge of a graph.
    Validate {
        #[arg(long)]
        graph: PathBuf,
        #[arg(long)]
        cover: PathBuf,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Baseline {
    Greedy,
    Exact,
}

#[derive(Debug, Error)]
enum CliError {
    #[error(transparent)]
    GraphFile(#[from] GraphFileError),
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error(transparent)]
    Baseline(#[from] BaselineError),
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Emit(#[from] EmitError),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("{path}:{line}: malformed vertex id `{text}`")]
    CoverEntry {
        path: PathBuf,
        line: usize,
        text: String,
    },
    #[error("cover vertex {id} is outside 1..={order}")]
    CoverVertex { id: u32, order: usize },
    #[error("cover is not valid: {0} uncovered edge(s)")]
    InvalidCover(usize),
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::InvalidCover(_) => 2,
            _ => 1,
        }
    }
}

#[derive(Serialize)]
struct BaselineReport {
    baseline: &'static str,
    order: usize,
    edges: usize,
    cover: Vec<VertexId>,
    cover_size: usize,
    cover_weight: f64,
    apw: f64,
    exact: bool,
    valid: bool,
}

fn main() -> ExitCode {
    // Usage errors are invalid input; clap's own code 2 is reserved for bad covers.
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(err) => {
            let code = if err.use_stderr() { 1 } else { 0 };
            let _ = err.print();
            return ExitCode::from(code);
        }
    };
    match execute(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::from(err.exit_code())
        }
    }
}

fn execute(command: Command) -> Result<(), CliError> {
    match command {
        Command::Generate {
            topology,
            nodes,
            avg_degree,
            weights,
            seed,
            out,
        } => {
            let graph = generate(&Topology::new(topology, nodes, avg_degree), seed)?;
            let graph = assign_weights(&graph, weights, seed.wrapping_add(1));
            save_graph(&graph, &out)?;
            println!(
                "wrote {} vertices, {} edges to {}",
                graph.order(),
                graph.edge_count(),
                out.display()
            );
            Ok(())
        }
        Command::Solve {
            graph,
            rule,
            baseline,
            schedule,
            out,
        } => {
            let graph = load_graph(&graph)?;
            let (json, valid, uncovered) = match baseline {
                None => {
                    let report = run_with(&graph, rule, schedule);
                    let uncovered = count_uncovered(&graph, &report.cover);
                    (to_json(&report), report.valid, uncovered)
                }
                Some(kind) => {
                    let (name, result) = match kind {
                        Baseline::Greedy => ("greedy", greedy_pruned_mwvc(&graph)),
                        Baseline::Exact => ("exact", brute_force_mwvc(&graph)?),
                    };
                    let report = baseline_report(&graph, name, result);
                    let uncovered = count_uncovered(&graph, &report.cover);
                    (to_json(&report), report.valid, uncovered)
                }
            };
            write(&out, json)?;
            if !valid {
                return Err(CliError::InvalidCover(uncovered));
            }
            Ok(())
        }
        Command::Experiment {
            config,
            out_csv,
            out_json,
            timing,
        } => {
            let config = ExperimentConfig::load(&config)?;
            let rows = decwvc::experiments::run_experiment(&config);
            emit_csv(&rows, &out_csv, timing)?;
            if let Some(path) = out_json {
                emit_json(&rows, path)?;
            }
            let failed = rows.iter().filter(|r| r.is_failed()).count();
            println!("{} cells, {} failed", rows.len(), failed);
            Ok(())
        }
        Command::Validate { graph, cover } => {
            let graph = load_graph(&graph)?;
            let cover = read_cover(&cover)?;
            if let Some(v) = cover
                .iter()
                .find(|v| v.0 == 0 || v.index() >= graph.order())
            {
                return Err(CliError::CoverVertex {
                    id: v.0,
                    order: graph.order(),
                });
            }
            let uncovered = count_uncovered(&graph, &cover);
            if uncovered > 0 || !validate_cover(&graph, &cover) {
                return Err(CliError::InvalidCover(uncovered));
            }
            println!("valid cover of {} vertices", cover.len());
            Ok(())
        }
    }
}

fn baseline_report(
    graph: &decwvc::Graph,
    name: &'static str,
    result: SolverResult,
) -> BaselineReport {
    BaselineReport {
        baseline: name,
        order: graph.order(),
        edges: graph.edge_count(),
        cover_size: result.cover.len(),
        cover_weight: result.cover_weight,
        apw: apw(graph, &result.cover),
        exact: result.exact,
        valid: validate_cover(graph, &result.cover),
        cover: result.cover,
    }
}

fn count_uncovered(graph: &decwvc::Graph, cover: &[VertexId]) -> usize {
    let mut flags = vec![false; graph.order()];
    for v in cover {
        if let Some(f) = v.0.checked_sub(1).and_then(|i| flags.get_mut(i as usize)) {
            *f = true;
        }
    }
    graph
        .edges()
        .filter(|(u, v)| !flags[u.index()] && !flags[v.index()])
        .count()
}

fn read_cover(path: &Path) -> Result<Vec<VertexId>, CliError> {
    let text = fs::read_to_string(path).map_err(|source| CliError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    let mut cover = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        let id = line.parse::<u32>().map_err(|_| CliError::CoverEntry {
            path: path.to_path_buf(),
            line: i + 1,
            text: line.to_string(),
        })?;
        cover.push(VertexId(id));
    }
    Ok(cover)
}

fn to_json<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("report serializes");
    s.push('\n');
    s
}

fn write(path: &Path, contents: String) -> Result<(), CliError> {
    fs::write(path, contents).map_err(|source| CliError::Io {
        path: path.to_path_buf(),
        source,
    })
}
