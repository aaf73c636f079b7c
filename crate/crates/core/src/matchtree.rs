//! Balanced binary sum tree over one group's claimed partial gradients.
//!
//! Nodes are half-open ranges `[lo, hi)` of 0-based positions inside the
//! group's gradient block. The left child of `[lo, hi)` is `[lo, mid)` with
//! `mid = lo + ⌈(hi - lo) / 2⌉`, the right child is `[mid, hi)`, and every
//! node is labelled with the sum of the claims it covers.

use thiserror::Error;

use crate::gradient::{add_mod, sub_mod, GradientVector};
use crate::Residue;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum TreeError {
    #[error("invalid node range [{lo}, {hi})")]
    InvalidRange { lo: usize, hi: usize },
    #[error("node [{lo}, {hi}) exceeds the {len} leaves of the tree")]
    OutOfTree { lo: usize, hi: usize, len: usize },
    #[error("coordinate {coord} out of range for dimension {dim}")]
    Coordinate { coord: usize, dim: usize },
    #[error("leaf [{0}, {1}) has no children")]
    Leaf(usize, usize),
    #[error("a match tree needs at least one leaf")]
    Empty,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct NodeRange {
    lo: usize,
    hi: usize,
}

impl NodeRange {
    pub fn new(lo: usize, hi: usize) -> Result<Self, TreeError> {
        if lo >= hi {
            return Err(TreeError::InvalidRange { lo, hi });
        }
        Ok(Self { lo, hi })
    }

    pub fn root(leaves: usize) -> Self {
        assert!(leaves > 0, "empty tree");
        Self { lo: 0, hi: leaves }
    }

    pub fn leaf(index: usize) -> Self {
        Self {
            lo: index,
            hi: index + 1,
        }
    }

    pub fn lo(&self) -> usize {
        self.lo
    }

    pub fn hi(&self) -> usize {
        self.hi
    }

    pub fn len(&self) -> usize {
        self.hi - self.lo
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn is_leaf(&self) -> bool {
        self.len() == 1
    }

    pub fn contains(&self, index: usize) -> bool {
        (self.lo..self.hi).contains(&index)
    }

    pub fn children(&self) -> Result<(NodeRange, NodeRange), TreeError> {
        if self.is_leaf() {
            return Err(TreeError::Leaf(self.lo, self.hi));
        }
        let mid = self.lo + self.len().div_ceil(2);
        Ok((
            NodeRange {
                lo: self.lo,
                hi: mid,
            },
            NodeRange {
                lo: mid,
                hi: self.hi,
            },
        ))
    }
}

/// `⌈log2 leaves⌉`, the number of internal nodes on the longest root-to-leaf path.
pub fn tree_height(leaves: usize) -> usize {
    match leaves {
        0 | 1 => 0,
        n => (usize::BITS - (n - 1).leading_zeros()) as usize,
    }
}

/// Label of the right child inferred from its parent and left sibling.
pub fn infer_right_label(parent: Residue, left: Residue, q: u64) -> Residue {
    sub_mod(parent, left, q)
}

/// A read-only view of one worker's claims for one group.
#[derive(Debug, Clone, Copy)]
pub struct MatchTree<'a> {
    group: usize,
    claims: &'a [GradientVector],
}

impl<'a> MatchTree<'a> {
    pub fn new(group: usize, claims: &'a [GradientVector]) -> Result<Self, TreeError> {
        if claims.is_empty() {
            return Err(TreeError::Empty);
        }
        Ok(Self { group, claims })
    }

    pub fn group(&self) -> usize {
        self.group
    }

    pub fn leaves(&self) -> usize {
        self.claims.len()
    }

    pub fn root(&self) -> NodeRange {
        NodeRange::root(self.leaves())
    }

    fn check(&self, range: NodeRange) -> Result<(), TreeError> {
        if range.hi > self.leaves() {
            return Err(TreeError::OutOfTree {
                lo: range.lo,
                hi: range.hi,
                len: self.leaves(),
            });
        }
        Ok(())
    }

    /// Coordinate `coord` of the label of `range`.
    pub fn node_label(&self, range: NodeRange, coord: usize) -> Result<Residue, TreeError> {
        self.check(range)?;
        let dim = self.claims[0].dim();
        if coord >= dim {
            return Err(TreeError::Coordinate { coord, dim });
        }
        let q = self.claims[0].q();
        Ok(self.claims[range.lo..range.hi]
            .iter()
            .fold(0, |acc, g| add_mod(acc, g.coord(coord), q)))
    }

    /// The full label vector of `range`.
    pub fn label(&self, range: NodeRange) -> Result<GradientVector, TreeError> {
        self.check(range)?;
        let slice = &self.claims[range.lo..range.hi];
        Ok(crate::gradient::full_gradient(slice).expect("claims share one shape"))
    }
}
