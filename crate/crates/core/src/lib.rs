//! Simulation of a decentralized weighted minimum vertex cover protocol.
//!
//! Nodes know only their own weight and their neighbours. In lock-step
//! selection rounds each unsettled node nominates the lowest
//! `weight / uncovered-degree` vertex of its closed neighbourhood; once
//! everyone is settled, one optimize round lets redundant cover nodes leave.
//!
//! Modules:
//! - [`graph`]: weighted graphs, generators, weights and file format
//! - [`protocol`]: pure per-node decision logic
//! - [`engine`]: round scheduler and message accounting
//! - [`baselines`]: exact and greedy centralized solvers
//! - [`experiments`]: batch runs, aggregation and CSV/JSON output

pub mod baselines;
pub mod engine;
pub mod experiments;
pub mod graph;
pub mod protocol;

pub use engine::{run, validate_cover, RunReport};
pub use graph::{Graph, VertexId};
pub use protocol::OptimizeRule;
