//! Main-node queries and worker responses.

use serde::{Deserialize, Serialize};

use crate::gradient::GradientVector;
use crate::matchtree::{MatchTree, NodeRange};
use crate::Residue;

/// A request from the main node to one worker. Positions are 0-based within
/// the worker's group block.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Query {
    /// The coded response `z_0`: the sum of all assigned gradients.
    Initial { group: usize },
    /// One coordinate of a match-tree node label.
    NodeLabel {
        group: usize,
        node: NodeRange,
        coord: usize,
    },
    /// Whether the worker endorses `value` as coordinate `coord` of gradient `position`.
    Commit {
        group: usize,
        position: usize,
        coord: usize,
        value: Residue,
    },
}

impl Query {
    pub fn group(&self) -> usize {
        match *self {
            Query::Initial { group }
            | Query::NodeLabel { group, .. }
            | Query::Commit { group, .. } => group,
        }
    }

    pub fn kind(&self) -> MessageKind {
        match self {
            Query::Initial { .. } => MessageKind::Initial,
            Query::NodeLabel { .. } => MessageKind::NodeLabel,
            Query::Commit { .. } => MessageKind::Commit,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MessageKind {
    Initial,
    NodeLabel,
    Commit,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Message {
    Symbols(Vec<Residue>),
    Bit(bool),
}

impl Message {
    /// Checks the response has the shape the query asked for: `d` symbols for
    /// `Initial`, one symbol for `NodeLabel`, one bit for `Commit`, every
    /// symbol a residue mod `q`.
    pub fn is_well_formed(&self, query: &Query, d: usize, q: u64) -> bool {
        match (query, self) {
            (Query::Initial { .. }, Message::Symbols(s)) => {
                s.len() == d && s.iter().all(|&x| x < q)
            }
            (Query::NodeLabel { .. }, Message::Symbols(s)) => s.len() == 1 && s[0] < q,
            (Query::Commit { .. }, Message::Bit(_)) => true,
            _ => false,
        }
    }
}

/// Answers `query` consistently from a block of claimed gradients. This is
/// how honest workers behave, and how table adversaries behave with their
/// claimed values in place of the truth.
pub fn respond_from_claims(claims: &[GradientVector], query: &Query) -> Message {
    match *query {
        Query::Initial { .. } => Message::Symbols(
            crate::gradient::full_gradient(claims)
                .expect("non-empty block")
                .coords()
                .to_vec(),
        ),
        Query::NodeLabel { node, coord, group } => {
            let tree = MatchTree::new(group, claims).expect("non-empty block");
            Message::Symbols(vec![tree
                .node_label(node, coord)
                .expect("query inside the tree")])
        }
        Query::Commit {
            position,
            coord,
            value,
            ..
        } => Message::Bit(claims[position].coord(coord) == value),
    }
}
