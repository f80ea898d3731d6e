//! Dense bit vectors and an incremental XOR basis over GF(2).
//!
//! Used for symplectic rank and stabilizer-span membership. A GF(4) vector of
//! length `n` expands to `2n` bits, interleaved as `(x_0, z_0, x_1, z_1, ...)`.

use crate::field::Gf4;

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct BitVec {
    words: Vec<u64>,
    len: usize,
}

impl BitVec {
    pub fn zeros(len: usize) -> Self {
        BitVec {
            words: vec![0; len.div_ceil(64)],
            len,
        }
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn get(&self, i: usize) -> bool {
        debug_assert!(i < self.len);
        self.words[i / 64] >> (i % 64) & 1 == 1
    }

    pub fn set(&mut self, i: usize, value: bool) {
        debug_assert!(i < self.len);
        let mask = 1u64 << (i % 64);
        if value {
            self.words[i / 64] |= mask;
        } else {
            self.words[i / 64] &= !mask;
        }
    }

    pub fn xor_assign(&mut self, other: &BitVec) {
        debug_assert_eq!(self.len, other.len);
        for (a, b) in self.words.iter_mut().zip(&other.words) {
            *a ^= b;
        }
    }

    pub fn is_zero(&self) -> bool {
        self.words.iter().all(|&w| w == 0)
    }

    pub fn highest_set_bit(&self) -> Option<usize> {
        self.words
            .iter()
            .enumerate()
            .rev()
            .find(|(_, &w)| w != 0)
            .map(|(k, &w)| k * 64 + 63 - w.leading_zeros() as usize)
    }

    /// Symplectic binary expansion of a GF(4) vector given as sparse entries
    /// over `n` coordinates.
    pub fn symplectic_expansion(n: usize, entries: impl IntoIterator<Item = (usize, Gf4)>) -> Self {
        let mut v = BitVec::zeros(2 * n);
        for (j, x) in entries {
            if x.x_part() {
                v.set(2 * j, true);
            }
            if x.z_part() {
                v.set(2 * j + 1, true);
            }
        }
        v
    }
}

/// Row-echelon basis keyed by each vector's highest set bit.
#[derive(Clone, Debug)]
pub struct XorBasis {
    by_pivot: Vec<Option<BitVec>>,
    rank: usize,
}

impl XorBasis {
    pub fn new(len: usize) -> Self {
        XorBasis {
            by_pivot: vec![None; len],
            rank: 0,
        }
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    pub fn contains(&self, v: &BitVec) -> bool {
        let mut v = v.clone();
        while let Some(b) = v.highest_set_bit() {
            match &self.by_pivot[b] {
                Some(basis_vec) => v.xor_assign(basis_vec),
                None => return false,
            }
        }
        true
    }

    /// Adds `v`; returns whether it was independent of the current basis.
    pub fn insert(&mut self, mut v: BitVec) -> bool {
        while let Some(b) = v.highest_set_bit() {
            match &self.by_pivot[b] {
                Some(basis_vec) => v.xor_assign(basis_vec),
                None => {
                    self.by_pivot[b] = Some(v);
                    self.rank += 1;
                    return true;
                }
            }
        }
        false
    }
}

/// Rank over GF(2) of a set of equal-length bit vectors.
pub fn rank<'a>(len: usize, vectors: impl IntoIterator<Item = &'a BitVec>) -> usize {
    let mut basis = XorBasis::new(len);
    for v in vectors {
        basis.insert(v.clone());
    }
    basis.rank()
}
