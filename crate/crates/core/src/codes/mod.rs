//! Sparse GF(4) parity-check matrices for stabilizer codes.

mod bicycle;
mod hierarchy;

pub use bicycle::{build_bicycle, choose_delete_classes, sample_spec, BicycleParams, SparseVectorSpec};
pub use hierarchy::{build_hierarchy, CodeHierarchy, HierarchyNode};

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::field::{symplectic_pair, Gf4};
use crate::gf2::{BitVec, XorBasis};

/// One sparse row: `(column, value)` pairs with strictly increasing columns and
/// nonzero values.
pub type SparseRow = Vec<(usize, Gf4)>;

/// A stabilizer parity-check matrix over GF(4).
///
/// `row_ids` name each row by its index in the matrix it was cut from (the full
/// bicyclic `H` for constructed codes), so subcodes can be related to their
/// root. Commutation of the rows is not enforced here; see
/// [`ParityCheck::verify_commuting`].
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ParityCheck {
    n: usize,
    rows: Vec<SparseRow>,
    row_ids: Vec<usize>,
}

impl ParityCheck {
    /// Builds a matrix with row ids `0..rows.len()`. Rows are sorted by column
    /// and zero entries dropped.
    pub fn new(n: usize, rows: Vec<SparseRow>) -> Result<Self> {
        let ids = (0..rows.len()).collect();
        Self::with_row_ids(n, rows, ids)
    }

    pub fn with_row_ids(n: usize, rows: Vec<SparseRow>, row_ids: Vec<usize>) -> Result<Self> {
        if rows.len() != row_ids.len() {
            return Err(Error::LengthMismatch {
                expected: rows.len(),
                found: row_ids.len(),
            });
        }
        let mut clean = Vec::with_capacity(rows.len());
        for mut row in rows {
            row.retain(|(_, x)| !x.is_zero());
            row.sort_by_key(|&(j, _)| j);
            if let Some(&(j, _)) = row.iter().find(|&&(j, _)| j >= n) {
                return Err(Error::InvalidSpec(format!("column {j} out of range for n = {n}")));
            }
            if row.windows(2).any(|w| w[0].0 == w[1].0) {
                return Err(Error::InvalidSpec("repeated column within a row".into()));
            }
            clean.push(row);
        }
        Ok(ParityCheck {
            n,
            rows: clean,
            row_ids,
        })
    }

    pub fn from_dense(rows: &[Vec<Gf4>]) -> Result<Self> {
        let n = rows.first().map_or(0, Vec::len);
        if let Some(bad) = rows.iter().find(|r| r.len() != n) {
            return Err(Error::LengthMismatch {
                expected: n,
                found: bad.len(),
            });
        }
        let sparse = rows
            .iter()
            .map(|r| r.iter().copied().enumerate().filter(|(_, x)| !x.is_zero()).collect())
            .collect();
        Self::new(n, sparse)
    }

    /// Number of qubits (columns).
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn num_rows(&self) -> usize {
        self.rows.len()
    }

    pub fn rows(&self) -> &[SparseRow] {
        &self.rows
    }

    pub fn row(&self, i: usize) -> &[(usize, Gf4)] {
        &self.rows[i]
    }

    pub fn row_ids(&self) -> &[usize] {
        &self.row_ids
    }

    pub fn nnz(&self) -> usize {
        self.rows.iter().map(Vec::len).sum()
    }

    pub fn dense_row(&self, i: usize) -> Vec<Gf4> {
        let mut dense = vec![Gf4::ZERO; self.n];
        for &(j, x) in &self.rows[i] {
            dense[j] = x;
        }
        dense
    }

    /// Symplectic product of two rows.
    pub fn row_pair(&self, a: usize, b: usize) -> bool {
        sparse_pair(&self.rows[a], &self.rows[b])
    }

    /// True iff every pair of rows commutes.
    pub fn verify_commuting(&self) -> bool {
        (0..self.rows.len()).all(|a| (a..self.rows.len()).all(|b| !self.row_pair(a, b)))
    }

    pub fn column_weights(&self) -> Vec<usize> {
        let mut w = vec![0; self.n];
        for &(j, _) in self.rows.iter().flatten() {
            w[j] += 1;
        }
        w
    }

    /// Constant column weight and constant row weight, where uniform.
    pub fn regularity(&self) -> (Option<usize>, Option<usize>) {
        (uniform(self.column_weights().into_iter()), uniform(self.rows.iter().map(Vec::len)))
    }

    /// Rank over GF(2) of the rows' binary symplectic expansions.
    pub fn symplectic_rank(&self) -> usize {
        let mut basis = XorBasis::new(2 * self.n);
        for row in &self.rows {
            basis.insert(BitVec::symplectic_expansion(self.n, row.iter().copied()));
        }
        basis.rank()
    }

    /// The submatrix made of the given row positions, in the given order.
    pub fn select_rows(&self, positions: &[usize]) -> ParityCheck {
        ParityCheck {
            n: self.n,
            rows: positions.iter().map(|&p| self.rows[p].clone()).collect(),
            row_ids: positions.iter().map(|&p| self.row_ids[p]).collect(),
        }
    }

    /// Renders the plain-text code format.
    pub fn to_text(&self) -> String {
        self.to_string()
    }
}

fn uniform(mut weights: impl Iterator<Item = usize>) -> Option<usize> {
    let first = weights.next()?;
    weights.all(|w| w == first).then_some(first)
}

/// Symplectic product of two sparse rows by merge-join over columns.
pub(crate) fn sparse_pair(a: &[(usize, Gf4)], b: &[(usize, Gf4)]) -> bool {
    let (mut i, mut k, mut acc) = (0, 0, false);
    while i < a.len() && k < b.len() {
        match a[i].0.cmp(&b[k].0) {
            std::cmp::Ordering::Less => i += 1,
            std::cmp::Ordering::Greater => k += 1,
            std::cmp::Ordering::Equal => {
                acc ^= symplectic_pair(a[i].1, b[k].1);
                i += 1;
                k += 1;
            }
        }
    }
    acc
}

/// Format: a header `n=<n> rows=<r>`, then one line per row with one symbol per
/// column from `{0, 1, w, W}`; every line ends in `\n`.
impl fmt::Display for ParityCheck {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "n={} rows={}", self.n, self.rows.len())?;
        for i in 0..self.rows.len() {
            let line: String = self.dense_row(i).iter().map(|x| x.symbol()).collect();
            writeln!(f, "{line}")?;
        }
        Ok(())
    }
}

impl FromStr for ParityCheck {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let mut lines = s.lines();
        let header = lines.next().ok_or_else(|| Error::Parse("empty code file".into()))?;
        let (n, rows) = parse_header(header)?;
        let mut dense = Vec::with_capacity(rows);
        for (k, line) in lines.by_ref().take(rows).enumerate() {
            let row = line.chars().map(Gf4::from_symbol).collect::<Result<Vec<_>>>()?;
            if row.len() != n {
                return Err(Error::Parse(format!(
                    "row {} has {} symbols, expected {n}",
                    k + 1,
                    row.len()
                )));
            }
            dense.push(row);
        }
        if dense.len() != rows {
            return Err(Error::Parse(format!("expected {rows} rows, found {}", dense.len())));
        }
        if lines.any(|l| !l.trim().is_empty()) {
            return Err(Error::Parse("trailing content after last row".into()));
        }
        let sparse = dense
            .iter()
            .map(|r| r.iter().copied().enumerate().filter(|(_, x)| !x.is_zero()).collect())
            .collect();
        ParityCheck::new(n, sparse)
    }
}

fn parse_header(header: &str) -> Result<(usize, usize)> {
    let bad = || Error::Parse(format!("malformed header {header:?}, expected \"n=<n> rows=<r>\""));
    let mut parts = header.split(' ');
    let n = parts
        .next()
        .and_then(|p| p.strip_prefix("n="))
        .and_then(|v| v.parse().ok())
        .ok_or_else(bad)?;
    let rows = parts
        .next()
        .and_then(|p| p.strip_prefix("rows="))
        .and_then(|v| v.parse().ok())
        .ok_or_else(bad)?;
    if parts.next().is_some() {
        return Err(bad());
    }
    Ok((n, rows))
}
