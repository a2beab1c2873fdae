//! Per-node logic of the decentralized cover protocol.
//!
//! Everything here is a pure function of explicit node state and received
//! values; scheduling and message delivery live in [`crate::engine`].

use std::cmp::Ordering;
use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::graph::VertexId;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ProtocolError {
    #[error("score is undefined for gain 0 (weight {weight})")]
    ZeroGain { weight: f64 },
    #[error("node {0} has no selection candidate")]
    NoCandidate(VertexId),
    #[error("node {0} is already in the cover")]
    AlreadyInCover(VertexId),
    #[error("node {0} is not a drop candidate")]
    NotDropCandidate(VertexId),
    #[error("node {node} expected {expected} drop replies, got {got}")]
    ReplyCount {
        node: VertexId,
        expected: usize,
        got: usize,
    },
}

/// Selection score `weight / gain`, kept as the exact pair so that ties are
/// detected by cross-multiplication rather than by comparing rounded
/// quotients. Lower is better.
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct Score {
    weight: f64,
    gain: u32,
}

impl Score {
    pub fn weight(&self) -> f64 {
        self.weight
    }

    pub fn gain(&self) -> u32 {
        self.gain
    }

    pub fn value(&self) -> f64 {
        self.weight / self.gain as f64
    }
}

impl Ord for Score {
    fn cmp(&self, other: &Self) -> Ordering {
        (self.weight * other.gain as f64).total_cmp(&(other.weight * self.gain as f64))
    }
}

impl PartialOrd for Score {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl PartialEq for Score {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for Score {}

/// Number of neighbours not in the cover.
pub fn gain(node: &NodeState, in_cover: impl Fn(VertexId) -> bool) -> usize {
    node.neighbors.iter().filter(|&&u| !in_cover(u)).count()
}

pub fn score(weight: f64, gain: usize) -> Result<Score, ProtocolError> {
    if gain == 0 {
        return Err(ProtocolError::ZeroGain { weight });
    }
    Ok(Score {
        weight,
        gain: gain as u32,
    })
}

/// A node is settled when it is in the cover or all its neighbours are.
pub fn is_settled(node: &NodeState, in_cover: impl Fn(VertexId) -> bool) -> bool {
    node.in_cover || node.neighbors.iter().all(|&u| in_cover(u))
}

/// Picks the lowest-scoring vertex among the node itself and its uncovered
/// neighbours; equal scores go to the highest ID. The result does not depend
/// on the order of `neighbors`.
pub fn select_candidate(
    node: &NodeState,
    own_score: Option<Score>,
    neighbors: &[(VertexId, Score)],
) -> Result<VertexId, ProtocolError> {
    if node.in_cover {
        return Err(ProtocolError::AlreadyInCover(node.id));
    }
    own_score
        .map(|s| (node.id, s))
        .into_iter()
        .chain(neighbors.iter().copied())
        .min_by(|(a_id, a), (b_id, b)| a.cmp(b).then_with(|| b_id.cmp(a_id)))
        .map(|(id, _)| id)
        .ok_or(ProtocolError::NoCandidate(node.id))
}

/// Rule used by a drop candidate to settle conflicts with adjacent candidates.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum OptimizeRule {
    /// Leave when every reply is -1 or some reply carries a higher ID.
    /// Two adjacent candidates can both leave, so the cover may break.
    #[serde(rename = "paper")]
    PaperLiteral,
    /// Leave only when every conflicting neighbour has a higher ID, i.e. the
    /// node is the strict ID-minimum among its adjacent candidates.
    #[default]
    #[serde(rename = "safe")]
    SafeLocalMin,
}

impl OptimizeRule {
    pub fn name(self) -> &'static str {
        match self {
            OptimizeRule::PaperLiteral => "paper",
            OptimizeRule::SafeLocalMin => "safe",
        }
    }
}

impl fmt::Display for OptimizeRule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for OptimizeRule {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "paper" | "paperliteral" | "paper-literal" => Ok(OptimizeRule::PaperLiteral),
            "safe" | "safelocalmin" | "safe-local-min" => Ok(OptimizeRule::SafeLocalMin),
            other => Err(format!("unknown optimize rule `{other}`")),
        }
    }
}

/// Answer to a `CommunicateDrop`: either the neighbour stays (`-1` on the
/// wire) or it is itself a drop candidate and sends its own ID.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum DropReply {
    Remain,
    Conflict(VertexId),
}

impl DropReply {
    pub fn value(self) -> i64 {
        match self {
            DropReply::Remain => -1,
            DropReply::Conflict(id) => id.0 as i64,
        }
    }

    pub fn from_value(value: i64) -> Option<Self> {
        match value {
            -1 => Some(DropReply::Remain),
            v if v >= 1 && v <= u32::MAX as i64 => Some(DropReply::Conflict(VertexId(v as u32))),
            _ => None,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum OptimizeDecision {
    Leave,
    Stay,
}

pub fn optimize_decision(
    node: &NodeState,
    replies: &[DropReply],
    rule: OptimizeRule,
) -> Result<OptimizeDecision, ProtocolError> {
    if !node.is_drop_candidate() {
        return Err(ProtocolError::NotDropCandidate(node.id));
    }
    if replies.len() != node.degree() {
        return Err(ProtocolError::ReplyCount {
            node: node.id,
            expected: node.degree(),
            got: replies.len(),
        });
    }
    let higher = |r: &DropReply| matches!(r, DropReply::Conflict(id) if *id > node.id);
    let leave = match rule {
        OptimizeRule::PaperLiteral => {
            replies.iter().all(|r| *r == DropReply::Remain) || replies.iter().any(higher)
        }
        OptimizeRule::SafeLocalMin => replies.iter().all(|r| *r == DropReply::Remain || higher(r)),
    };
    Ok(if leave {
        OptimizeDecision::Leave
    } else {
        OptimizeDecision::Stay
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub enum MessageKind {
    ScoreExchange(Score),
    Include,
    CoverAnnounce,
    Settled(VertexId),
    CommunicateDrop(VertexId),
    DropReply(DropReply),
    RevokeDrop(VertexId),
}

impl MessageKind {
    pub fn label(&self) -> &'static str {
        match self {
            MessageKind::ScoreExchange(_) => "score_exchange",
            MessageKind::Include => "include",
            MessageKind::CoverAnnounce => "cover_announce",
            MessageKind::Settled(_) => "settled",
            MessageKind::CommunicateDrop(_) => "communicate_drop",
            MessageKind::DropReply(_) => "drop_reply",
            MessageKind::RevokeDrop(_) => "revoke_drop",
        }
    }
}

/// Point-to-point message between adjacent nodes.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Message {
    pub from: VertexId,
    pub to: VertexId,
    pub kind: MessageKind,
}

/// Local view of one node: its own flags plus what neighbours have told it.
#[derive(Clone, Debug, PartialEq)]
pub struct NodeState {
    pub id: VertexId,
    pub weight: f64,
    /// Sorted neighbour IDs.
    pub neighbors: Vec<VertexId>,
    pub in_cover: bool,
    pub settled: bool,
    pub known_covered: BTreeSet<VertexId>,
    pub known_settled: BTreeSet<VertexId>,
}

impl NodeState {
    /// Fresh state: outside the cover, and settled only when isolated.
    pub fn new(id: VertexId, weight: f64, mut neighbors: Vec<VertexId>) -> Self {
        neighbors.sort_unstable();
        let settled = neighbors.is_empty();
        NodeState {
            id,
            weight,
            neighbors,
            in_cover: false,
            settled,
            known_covered: BTreeSet::new(),
            known_settled: BTreeSet::new(),
        }
    }

    pub fn degree(&self) -> usize {
        self.neighbors.len()
    }

    pub fn is_neighbor(&self, v: VertexId) -> bool {
        self.neighbors.binary_search(&v).is_ok()
    }

    /// Gain from the node's own knowledge of covered neighbours.
    pub fn local_gain(&self) -> usize {
        gain(self, |u| self.known_covered.contains(&u))
    }

    pub fn local_score(&self) -> Option<Score> {
        score(self.weight, self.local_gain()).ok()
    }

    pub fn locally_settled(&self) -> bool {
        is_settled(self, |u| self.known_covered.contains(&u))
    }

    /// Still running selection: outside the cover with an uncovered neighbour.
    pub fn is_active(&self) -> bool {
        !self.locally_settled()
    }

    pub fn uncovered_neighbors(&self) -> impl Iterator<Item = VertexId> + '_ {
        self.neighbors
            .iter()
            .copied()
            .filter(|u| !self.known_covered.contains(u))
    }

    /// In the cover with every neighbour also in the cover.
    pub fn is_drop_candidate(&self) -> bool {
        self.in_cover && self.known_covered.len() == self.degree()
    }

    pub fn neighbors_settled(&self) -> bool {
        self.known_settled.len() == self.degree()
    }

    pub fn drop_reply(&self) -> DropReply {
        if self.is_drop_candidate() {
            DropReply::Conflict(self.id)
        } else {
            DropReply::Remain
        }
    }

    /// Applies the knowledge carried by a message addressed to this node.
    /// Messages that carry no persistent knowledge are ignored here.
    pub fn observe(&mut self, msg: &Message) {
        debug_assert_eq!(msg.to, self.id);
        debug_assert!(self.is_neighbor(msg.from), "{} -> {}", msg.from, msg.to);
        match msg.kind {
            MessageKind::CoverAnnounce => {
                self.known_covered.insert(msg.from);
            }
            MessageKind::Settled(id) => {
                self.known_settled.insert(id);
            }
            _ => {}
        }
    }
}
