//! Bipartite check/variable adjacency of a parity-check matrix.
//!
//! Edges are stored once, ordered by check then variable, and every variable
//! keeps the list of its edge ids ordered by check. Puncturing removes a
//! variable's edges but keeps its index, so noise vectors, posteriors and
//! syndromes stay indexed the same way across protocol levels.

use std::ops::Range;

use crate::codes::ParityCheck;
use crate::field::{symplectic_pair, Gf4};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TannerGraph {
    n_vars: usize,
    check_start: Vec<usize>,
    edge_check: Vec<usize>,
    edge_var: Vec<usize>,
    edge_label: Vec<Gf4>,
    var_start: Vec<usize>,
    var_edges: Vec<usize>,
    punctured: Vec<bool>,
}

impl TannerGraph {
    pub fn from_parity_check(h: &ParityCheck) -> Self {
        let edges = h
            .rows()
            .iter()
            .enumerate()
            .flat_map(|(i, row)| row.iter().map(move |&(j, x)| (i, j, x)));
        Self::from_edges(h.num_rows(), h.n(), edges, vec![false; h.n()])
    }

    fn from_edges(
        n_checks: usize,
        n_vars: usize,
        edges: impl Iterator<Item = (usize, usize, Gf4)>,
        punctured: Vec<bool>,
    ) -> Self {
        let mut check_start = vec![0; n_checks + 1];
        let (mut edge_check, mut edge_var, mut edge_label) = (vec![], vec![], vec![]);
        for (i, j, x) in edges {
            debug_assert!(edge_check.last().is_none_or(|&last| last <= i));
            check_start[i + 1] += 1;
            edge_check.push(i);
            edge_var.push(j);
            edge_label.push(x);
        }
        for i in 0..n_checks {
            check_start[i + 1] += check_start[i];
        }
        let mut var_start = vec![0; n_vars + 1];
        for &j in &edge_var {
            var_start[j + 1] += 1;
        }
        for j in 0..n_vars {
            var_start[j + 1] += var_start[j];
        }
        let mut fill = var_start.clone();
        let mut var_edges = vec![0; edge_var.len()];
        // Edge ids ascend with check index, so each variable's list is check-ordered.
        for (e, &j) in edge_var.iter().enumerate() {
            var_edges[fill[j]] = e;
            fill[j] += 1;
        }
        TannerGraph {
            n_vars,
            check_start,
            edge_check,
            edge_var,
            edge_label,
            var_start,
            var_edges,
            punctured,
        }
    }

    pub fn n_checks(&self) -> usize {
        self.check_start.len() - 1
    }

    pub fn n_vars(&self) -> usize {
        self.n_vars
    }

    pub fn n_edges(&self) -> usize {
        self.edge_var.len()
    }

    /// Edge ids of check `i`, ascending in variable index.
    pub fn check_edges(&self, i: usize) -> Range<usize> {
        self.check_start[i]..self.check_start[i + 1]
    }

    /// Edge ids of variable `j`, ascending in check index.
    pub fn var_edges(&self, j: usize) -> &[usize] {
        &self.var_edges[self.var_start[j]..self.var_start[j + 1]]
    }

    pub fn edge_check(&self, e: usize) -> usize {
        self.edge_check[e]
    }

    pub fn edge_var(&self, e: usize) -> usize {
        self.edge_var[e]
    }

    pub fn edge_label(&self, e: usize) -> Gf4 {
        self.edge_label[e]
    }

    /// `𝒩(i)` with labels: `(j, H_ij)` pairs.
    pub fn check_adj(&self, i: usize) -> impl Iterator<Item = (usize, Gf4)> + '_ {
        self.check_edges(i).map(|e| (self.edge_var[e], self.edge_label[e]))
    }

    /// `ℳ(j)` with labels: `(i, H_ij)` pairs.
    pub fn var_adj(&self, j: usize) -> impl Iterator<Item = (usize, Gf4)> + '_ {
        self.var_edges(j)
            .iter()
            .map(|&e| (self.edge_check[e], self.edge_label[e]))
    }

    pub fn check_degree(&self, i: usize) -> usize {
        self.check_start[i + 1] - self.check_start[i]
    }

    pub fn var_degree(&self, j: usize) -> usize {
        self.var_start[j + 1] - self.var_start[j]
    }

    pub fn is_punctured(&self, j: usize) -> bool {
        self.punctured[j]
    }

    pub fn punctured(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.n_vars).filter(|&j| self.punctured[j])
    }

    /// Removes the listed variables' edges. Checks are kept, possibly empty.
    pub fn puncture(&self, discard: &[usize]) -> TannerGraph {
        let mut punctured = self.punctured.clone();
        for &j in discard {
            punctured[j] = true;
        }
        let edges: Vec<_> = (0..self.n_edges())
            .filter(|&e| !punctured[self.edge_var[e]])
            .map(|e| (self.edge_check[e], self.edge_var[e], self.edge_label[e]))
            .collect();
        Self::from_edges(self.n_checks(), self.n_vars, edges.into_iter(), punctured)
    }

    /// Syndrome of `e` over the graph's (possibly punctured) checks.
    pub fn syndrome(&self, e: &[Gf4]) -> Vec<bool> {
        debug_assert_eq!(e.len(), self.n_vars);
        (0..self.n_checks())
            .map(|i| {
                self.check_adj(i)
                    .fold(false, |acc, (j, h)| acc ^ symplectic_pair(h, e[j]))
            })
            .collect()
    }
}
