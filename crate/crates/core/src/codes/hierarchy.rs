//! Lazily enumerated lattice of subcodes obtained by deleting rows from a root.
//!
//! Layer `u` holds every code with exactly `u` root rows deleted; a layer-`u`
//! code is connected to the layer-`(u + 1)` codes obtained by deleting one more
//! row. Nodes are identified by the sorted root positions they delete.

use itertools::Itertools;

use super::ParityCheck;
use crate::error::{Error, Result};

#[derive(Clone, Debug)]
pub struct CodeHierarchy {
    root: ParityCheck,
    depth: usize,
}

/// A hierarchy member, stored as the root row positions it lacks.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct HierarchyNode {
    deleted: Vec<usize>,
}

impl HierarchyNode {
    pub fn root() -> Self {
        HierarchyNode { deleted: vec![] }
    }

    pub fn layer(&self) -> usize {
        self.deleted.len()
    }

    pub fn deleted(&self) -> &[usize] {
        &self.deleted
    }

    pub fn is_root(&self) -> bool {
        self.deleted.is_empty()
    }
}

pub fn build_hierarchy(root: ParityCheck, depth: usize) -> Result<CodeHierarchy> {
    if depth >= root.num_rows() {
        return Err(Error::InvalidHierarchy(format!(
            "depth {depth} must be below the root's row count {}",
            root.num_rows()
        )));
    }
    Ok(CodeHierarchy { root, depth })
}

impl CodeHierarchy {
    pub fn root(&self) -> &ParityCheck {
        &self.root
    }

    pub fn depth(&self) -> usize {
        self.depth
    }

    /// Node deleting the given root positions.
    pub fn node(&self, deleted: impl IntoIterator<Item = usize>) -> Result<HierarchyNode> {
        let mut deleted: Vec<usize> = deleted.into_iter().collect();
        deleted.sort_unstable();
        deleted.dedup();
        if deleted.len() > self.depth {
            return Err(Error::InvalidHierarchy(format!(
                "layer {} is deeper than {}",
                deleted.len(),
                self.depth
            )));
        }
        if let Some(&p) = deleted.iter().find(|&&p| p >= self.root.num_rows()) {
            return Err(Error::InvalidHierarchy(format!("row position {p} out of range")));
        }
        Ok(HierarchyNode { deleted })
    }

    /// Every code in layer `u`, generated on demand in lexicographic order.
    pub fn layer(&self, u: usize) -> impl Iterator<Item = HierarchyNode> + '_ {
        let rows = if u <= self.depth { self.root.num_rows() } else { 0 };
        (0..rows)
            .combinations(u)
            .map(|deleted| HierarchyNode { deleted })
    }

    pub fn layer_size(&self, u: usize) -> u128 {
        if u > self.depth {
            return 0;
        }
        binomial(self.root.num_rows() as u128, u as u128)
    }

    /// Root positions still present in `node`, ascending.
    pub fn present_rows(&self, node: &HierarchyNode) -> Vec<usize> {
        let mut missing = node.deleted.iter().peekable();
        (0..self.root.num_rows())
            .filter(|p| {
                if missing.peek() == Some(&p) {
                    missing.next();
                    false
                } else {
                    true
                }
            })
            .collect()
    }

    pub fn code(&self, node: &HierarchyNode) -> ParityCheck {
        self.root.select_rows(&self.present_rows(node))
    }

    /// Layer-`(u + 1)` neighbours: delete one more present row.
    pub fn children(&self, node: &HierarchyNode) -> Vec<HierarchyNode> {
        if node.layer() >= self.depth {
            return vec![];
        }
        self.present_rows(node)
            .into_iter()
            .map(|p| self.child(node, p))
            .collect()
    }

    /// Layer-`(u - 1)` neighbours: restore one deleted row.
    pub fn parents(&self, node: &HierarchyNode) -> Vec<HierarchyNode> {
        node.deleted
            .iter()
            .map(|&p| self.with_row_restored(node, p))
            .collect()
    }

    /// Child that additionally deletes root position `position`.
    pub fn child(&self, node: &HierarchyNode, position: usize) -> HierarchyNode {
        let mut deleted = node.deleted.clone();
        if let Err(at) = deleted.binary_search(&position) {
            deleted.insert(at, position);
        }
        HierarchyNode { deleted }
    }

    /// Parent that restores root position `position`.
    pub fn with_row_restored(&self, node: &HierarchyNode, position: usize) -> HierarchyNode {
        HierarchyNode {
            deleted: node.deleted.iter().copied().filter(|&p| p != position).collect(),
        }
    }

    /// Whether `a` and `b` differ by exactly one row, in adjacent layers.
    pub fn connected(&self, a: &HierarchyNode, b: &HierarchyNode) -> bool {
        let (small, big) = if a.layer() < b.layer() { (a, b) } else { (b, a) };
        big.layer() == small.layer() + 1 && small.deleted.iter().all(|p| big.deleted.contains(p))
    }
}

fn binomial(n: u128, k: u128) -> u128 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    (0..k).fold(1, |acc, i| acc * (n - i) / (i + 1))
}
