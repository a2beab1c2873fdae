//! Round-based simulation of the protocol with exact message accounting.
//!
//! Selection repeats until every node is settled, followed by exactly one
//! optimize round. Two schedules define what a selection round is:
//!
//! - [`Schedule::Sweep`] (default): active nodes act one at a time in ID
//!   order. Each exchanges scores with its uncovered neighbours, nominates
//!   a vertex and the nominee joins immediately, so later nodes in the same
//!   round already see the new cover.
//! - [`Schedule::LockStep`]: all active nodes exchange scores, nominate from
//!   the state at round start, and all nominees join together at round end.
//!
//! Accounting: every point-to-point transmission is one message and a
//! broadcast to `d` neighbours is `d` messages. A score exchange between two
//! nodes is two messages. A node that nominates itself sends no `Include`;
//! a node leaving the cover during optimize sends nothing.

use std::time::Instant;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::graph::{Graph, VertexId};
use crate::protocol::{
    optimize_decision, select_candidate, DropReply, Message, MessageKind, NodeState,
    OptimizeDecision, OptimizeRule, Score,
};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum EngineError {
    #[error("operation requires phase {expected:?}, simulation is in {actual:?}")]
    WrongPhase { expected: Phase, actual: Phase },
    #[error("optimize requested while {0} node(s) are unsettled")]
    Unsettled(usize),
}

/// How activations inside one selection round are ordered.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Schedule {
    /// Sequential activation in ID order with immediate effect.
    #[default]
    Sweep,
    /// Simultaneous decisions on the round-start state.
    LockStep,
}

impl Schedule {
    pub fn name(self) -> &'static str {
        match self {
            Schedule::Sweep => "sweep",
            Schedule::LockStep => "lockstep",
        }
    }
}

impl std::fmt::Display for Schedule {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for Schedule {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "sweep" => Ok(Schedule::Sweep),
            "lockstep" | "lock-step" => Ok(Schedule::LockStep),
            other => Err(format!("unknown schedule `{other}`")),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Phase {
    Selection,
    Optimize,
    Done,
}

/// Messages sent so far, split by kind.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct MessageCounts {
    pub score_exchange: u64,
    pub include: u64,
    pub cover_announce: u64,
    pub settled: u64,
    pub communicate_drop: u64,
    pub drop_reply: u64,
    pub revoke_drop: u64,
}

impl MessageCounts {
    pub fn total(&self) -> u64 {
        self.score_exchange
            + self.include
            + self.cover_announce
            + self.settled
            + self.communicate_drop
            + self.drop_reply
            + self.revoke_drop
    }

    fn record(&mut self, kind: &MessageKind) {
        let slot = match kind {
            MessageKind::ScoreExchange(_) => &mut self.score_exchange,
            MessageKind::Include => &mut self.include,
            MessageKind::CoverAnnounce => &mut self.cover_announce,
            MessageKind::Settled(_) => &mut self.settled,
            MessageKind::CommunicateDrop(_) => &mut self.communicate_drop,
            MessageKind::DropReply(_) => &mut self.drop_reply,
            MessageKind::RevokeDrop(_) => &mut self.revoke_drop,
        };
        *slot += 1;
    }
}

/// What happened in a single round.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct RoundSummary {
    pub messages: u64,
    pub joined: Vec<VertexId>,
    pub newly_settled: Vec<VertexId>,
    pub left: Vec<VertexId>,
}

/// Mutable simulation over a borrowed graph.
#[derive(Clone, Debug)]
pub struct Simulation<'g> {
    graph: &'g Graph,
    schedule: Schedule,
    nodes: Vec<NodeState>,
    selection_rounds: usize,
    counts: MessageCounts,
    round_messages: Vec<u64>,
    phase: Phase,
}

impl<'g> Simulation<'g> {
    pub fn new(graph: &'g Graph) -> Self {
        Self::with_schedule(graph, Schedule::default())
    }

    pub fn with_schedule(graph: &'g Graph, schedule: Schedule) -> Self {
        let nodes = graph
            .vertices()
            .map(|v| NodeState::new(v, graph.weight(v), graph.neighbors(v).to_vec()))
            .collect();
        Simulation {
            graph,
            schedule,
            nodes,
            selection_rounds: 0,
            counts: MessageCounts::default(),
            round_messages: Vec::new(),
            phase: Phase::Selection,
        }
    }

    /// Skips selection: starts the optimize phase from an existing cover,
    /// as if every node had announced its membership and settled.
    pub fn from_cover(graph: &'g Graph, cover: &[VertexId]) -> Result<Self, EngineError> {
        let mut sim = Self::new(graph);
        let mut flags = vec![false; graph.order()];
        for &v in cover {
            if let Some(f) = v.0.checked_sub(1).and_then(|i| flags.get_mut(i as usize)) {
                *f = true;
            }
        }
        for node in &mut sim.nodes {
            node.in_cover = flags[node.id.index()];
            node.known_covered = node
                .neighbors
                .iter()
                .copied()
                .filter(|u| flags[u.index()])
                .collect();
            node.known_settled = node.neighbors.iter().copied().collect();
        }
        let unsettled = sim.nodes.iter().filter(|n| !n.locally_settled()).count();
        if unsettled > 0 {
            return Err(EngineError::Unsettled(unsettled));
        }
        for node in &mut sim.nodes {
            node.settled = true;
        }
        sim.phase = Phase::Optimize;
        Ok(sim)
    }

    pub fn graph(&self) -> &Graph {
        self.graph
    }

    pub fn schedule(&self) -> Schedule {
        self.schedule
    }

    pub fn phase(&self) -> Phase {
        self.phase
    }

    pub fn node(&self, v: VertexId) -> &NodeState {
        &self.nodes[v.index()]
    }

    pub fn nodes(&self) -> &[NodeState] {
        &self.nodes
    }

    pub fn selection_rounds(&self) -> usize {
        self.selection_rounds
    }

    pub fn message_counts(&self) -> MessageCounts {
        self.counts
    }

    pub fn total_messages(&self) -> u64 {
        self.counts.total()
    }

    /// Messages sent in each completed round, selection rounds first.
    pub fn round_messages(&self) -> &[u64] {
        &self.round_messages
    }

    pub fn unsettled_count(&self) -> usize {
        self.nodes.iter().filter(|n| !n.settled).count()
    }

    pub fn cover(&self) -> Vec<VertexId> {
        self.nodes
            .iter()
            .filter(|n| n.in_cover)
            .map(|n| n.id)
            .collect()
    }

    fn deliver(&mut self, msg: Message) {
        self.counts.record(&msg.kind);
        self.nodes[msg.to.index()].observe(&msg);
    }

    fn broadcast(&mut self, from: VertexId, kind: MessageKind) {
        let graph = self.graph;
        for &to in graph.neighbors(from) {
            self.deliver(Message { from, to, kind });
        }
    }

    /// One selection round under the simulation's schedule. A fully settled
    /// state is a fixpoint: nothing changes and no round is counted.
    pub fn selection_round(&mut self) -> Result<RoundSummary, EngineError> {
        if self.phase != Phase::Selection {
            return Err(EngineError::WrongPhase {
                expected: Phase::Selection,
                actual: self.phase,
            });
        }
        let active: Vec<usize> = (0..self.nodes.len())
            .filter(|&i| self.nodes[i].is_active())
            .collect();
        if active.is_empty() {
            return Ok(RoundSummary::default());
        }
        let before = self.counts.total();
        let mut summary = RoundSummary::default();
        match self.schedule {
            Schedule::Sweep => self.sweep(&active, &mut summary),
            Schedule::LockStep => self.lock_step(&active, &mut summary),
        }

        self.selection_rounds += 1;
        summary.messages = self.counts.total() - before;
        self.round_messages.push(summary.messages);
        if self.unsettled_count() == 0 {
            self.phase = Phase::Optimize;
        }
        Ok(summary)
    }

    fn sweep(&mut self, active: &[usize], summary: &mut RoundSummary) {
        let graph = self.graph;
        for &i in active {
            // Earlier activations in this round may have settled the node.
            if !self.nodes[i].is_active() {
                continue;
            }
            let node = &self.nodes[i];
            let id = node.id;
            let own = node.local_score().expect("active node has positive gain");
            let mut scores = Vec::with_capacity(node.degree());
            for u in node.uncovered_neighbors() {
                let theirs = self.nodes[u.index()]
                    .local_score()
                    .expect("uncovered neighbour of an active node has positive gain");
                // Each activation fetches fresh scores: request plus reply.
                self.counts.record(&MessageKind::ScoreExchange(own));
                self.counts.record(&MessageKind::ScoreExchange(theirs));
                scores.push((u, theirs));
            }
            let target = select_candidate(&self.nodes[i], Some(own), &scores)
                .expect("active node always has itself as a candidate");
            if target != id {
                self.counts.record(&MessageKind::Include);
            }
            self.join(target, summary);
            // Only the nominee and its neighbours can have become settled.
            self.settle(target, summary);
            for &u in graph.neighbors(target) {
                self.settle(u, summary);
            }
        }
    }

    fn lock_step(&mut self, active: &[usize], summary: &mut RoundSummary) {
        // Every active node sends its current score to each neighbour it
        // believes is outside the cover; those neighbours are active too.
        let mut inbox: Vec<Vec<(VertexId, Score)>> = vec![Vec::new(); self.nodes.len()];
        let mut own_scores: Vec<Option<Score>> = vec![None; self.nodes.len()];
        for &i in active {
            let node = &self.nodes[i];
            let own = node.local_score();
            own_scores[i] = own;
            let own = own.expect("active node has positive gain");
            for to in node.uncovered_neighbors() {
                self.counts.record(&MessageKind::ScoreExchange(own));
                inbox[to.index()].push((node.id, own));
            }
        }

        let mut chosen = vec![false; self.nodes.len()];
        for &i in active {
            let node = &self.nodes[i];
            let target = select_candidate(node, own_scores[i], &inbox[i])
                .expect("active node always has itself as a candidate");
            if target != node.id {
                self.counts.record(&MessageKind::Include);
            }
            chosen[target.index()] = true;
        }

        // Includes take effect together; repeated Includes are idempotent.
        for (i, _) in chosen.iter().enumerate().filter(|(_, &c)| c) {
            self.join(VertexId::from_index(i), summary);
        }
        for i in 0..self.nodes.len() {
            self.settle(VertexId::from_index(i), summary);
        }
    }

    fn join(&mut self, v: VertexId, summary: &mut RoundSummary) {
        let node = &mut self.nodes[v.index()];
        if node.in_cover {
            return;
        }
        node.in_cover = true;
        summary.joined.push(v);
        self.broadcast(v, MessageKind::CoverAnnounce);
    }

    fn settle(&mut self, v: VertexId, summary: &mut RoundSummary) {
        let node = &mut self.nodes[v.index()];
        if node.settled || !node.locally_settled() {
            return;
        }
        node.settled = true;
        summary.newly_settled.push(v);
        self.broadcast(v, MessageKind::Settled(v));
    }

    /// The single optimize round: redundant cover nodes announce their
    /// intent to drop, collect one reply per neighbour and decide by `rule`.
    pub fn optimize_round(&mut self, rule: OptimizeRule) -> Result<RoundSummary, EngineError> {
        if self.phase == Phase::Selection && self.unsettled_count() == 0 {
            self.phase = Phase::Optimize;
        }
        if self.phase != Phase::Optimize {
            let unsettled = self.unsettled_count();
            if self.phase == Phase::Selection && unsettled > 0 {
                return Err(EngineError::Unsettled(unsettled));
            }
            return Err(EngineError::WrongPhase {
                expected: Phase::Optimize,
                actual: self.phase,
            });
        }
        let before = self.counts.total();

        let candidates: Vec<usize> = (0..self.nodes.len())
            .filter(|&i| self.nodes[i].is_drop_candidate())
            .collect();

        let mut decisions = Vec::with_capacity(candidates.len());
        for &i in &candidates {
            let id = self.nodes[i].id;
            self.broadcast(id, MessageKind::CommunicateDrop(id));
            let graph = self.graph;
            let replies: Vec<DropReply> = graph
                .neighbors(id)
                .iter()
                .map(|&m| self.nodes[m.index()].drop_reply())
                .collect();
            for (&m, &reply) in graph.neighbors(id).iter().zip(&replies) {
                self.deliver(Message {
                    from: m,
                    to: id,
                    kind: MessageKind::DropReply(reply),
                });
            }
            let decision = optimize_decision(&self.nodes[i], &replies, rule)
                .expect("candidate and reply count checked above");
            decisions.push((i, decision));
        }

        let mut left = Vec::new();
        for (i, decision) in decisions {
            let id = self.nodes[i].id;
            match decision {
                OptimizeDecision::Leave => {
                    self.nodes[i].in_cover = false;
                    left.push(id);
                    // Silence after CommunicateDrop means the node has left.
                    for &m in self.graph.neighbors(id) {
                        self.nodes[m.index()].known_covered.remove(&id);
                    }
                }
                OptimizeDecision::Stay => self.broadcast(id, MessageKind::RevokeDrop(id)),
            }
        }

        let messages = self.counts.total() - before;
        self.round_messages.push(messages);
        self.phase = Phase::Done;
        Ok(RoundSummary {
            messages,
            joined: Vec::new(),
            newly_settled: Vec::new(),
            left,
        })
    }

    /// Runs selection to global settlement, then one optimize round.
    pub fn run_to_completion(&mut self, rule: OptimizeRule) {
        while self.phase == Phase::Selection && self.unsettled_count() > 0 {
            self.selection_round().expect("phase checked");
        }
        if self.phase != Phase::Done {
            self.optimize_round(rule).expect("all nodes settled");
        }
    }
}

/// Outcome of one protocol run.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub rule: OptimizeRule,
    pub schedule: Schedule,
    pub order: usize,
    pub edges: usize,
    pub cover: Vec<VertexId>,
    pub cover_size: usize,
    pub cover_weight: f64,
    /// Same as `cover_weight`; numerator of the weight ratio.
    pub apw_numerator: f64,
    /// Total vertex weight of the graph.
    pub apw_denominator: f64,
    pub apw: f64,
    pub selection_rounds: usize,
    /// Selection rounds plus the optimize round.
    pub rounds: usize,
    pub total_messages: u64,
    pub messages: MessageCounts,
    pub round_messages: Vec<u64>,
    /// Messages per node.
    pub mpn: f64,
    pub elapsed_ms: f64,
    pub valid: bool,
}

impl RunReport {
    /// Copy with the timing zeroed, for comparing runs.
    pub fn without_timing(&self) -> RunReport {
        RunReport {
            elapsed_ms: 0.0,
            ..self.clone()
        }
    }
}

/// Runs the full protocol on `graph` with the default schedule.
pub fn run(graph: &Graph, rule: OptimizeRule) -> RunReport {
    run_with(graph, rule, Schedule::default())
}

pub fn run_with(graph: &Graph, rule: OptimizeRule, schedule: Schedule) -> RunReport {
    let start = Instant::now();
    let mut sim = Simulation::with_schedule(graph, schedule);
    sim.run_to_completion(rule);
    let elapsed_ms = start.elapsed().as_secs_f64() * 1e3;

    let cover = sim.cover();
    let cover_weight: f64 = cover.iter().map(|&v| graph.weight(v)).sum();
    let total_weight = graph.total_weight();
    let total_messages = sim.total_messages();
    RunReport {
        rule,
        schedule,
        order: graph.order(),
        edges: graph.edge_count(),
        cover_size: cover.len(),
        cover_weight,
        apw_numerator: cover_weight,
        apw_denominator: total_weight,
        apw: if total_weight > 0.0 {
            cover_weight / total_weight
        } else {
            0.0
        },
        selection_rounds: sim.selection_rounds(),
        rounds: sim.selection_rounds() + 1,
        total_messages,
        messages: sim.message_counts(),
        round_messages: sim.round_messages().to_vec(),
        mpn: if graph.order() > 0 {
            total_messages as f64 / graph.order() as f64
        } else {
            0.0
        },
        elapsed_ms,
        valid: validate_cover(graph, &cover),
        cover,
    }
}

/// True iff every edge has at least one endpoint in `cover`.
pub fn validate_cover(graph: &Graph, cover: &[VertexId]) -> bool {
    let mut flags = vec![false; graph.order()];
    for &v in cover {
        if v.0 == 0 || v.index() >= graph.order() {
            return false;
        }
        flags[v.index()] = true;
    }
    let valid = uncovered_edges(graph, &flags).next().is_none();
    valid
}

/// Edges with neither endpoint flagged.
pub fn uncovered_edges<'a>(
    graph: &'a Graph,
    in_cover: &'a [bool],
) -> impl Iterator<Item = (VertexId, VertexId)> + 'a {
    graph
        .edges()
        .filter(move |(u, v)| !in_cover[u.index()] && !in_cover[v.index()])
}
