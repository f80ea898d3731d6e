//! Arithmetic over GF(4) viewed as single-qubit Pauli errors.
//!
//! An element `a + b·ω` stands for the operator `X^a Z^b`, so `1` is X, `ω` is Z
//! and `ω² = 1 + ω` is Y (up to phase). Two Paulis commute exactly when their
//! symplectic pairing is zero.

use std::fmt;
use std::ops::{Add, AddAssign, Mul};

use crate::error::Error;

/// An element of GF(4), packed as `a | b << 1`.
///
/// The derived ordering is the canonical total order `0 < 1 < ω < ω²`, which is
/// used wherever a deterministic tie-break is needed.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Gf4(u8);

impl Gf4 {
    pub const ZERO: Gf4 = Gf4(0);
    pub const ONE: Gf4 = Gf4(1);
    pub const OMEGA: Gf4 = Gf4(2);
    pub const OMEGA2: Gf4 = Gf4(3);

    /// All four elements in canonical order.
    pub const ALL: [Gf4; 4] = [Gf4::ZERO, Gf4::ONE, Gf4::OMEGA, Gf4::OMEGA2];
    /// The three non-identity errors X, Z, Y.
    pub const NONZERO: [Gf4; 3] = [Gf4::ONE, Gf4::OMEGA, Gf4::OMEGA2];

    /// Builds `a + b·ω` from its two GF(2) coordinates.
    pub const fn from_parts(a: bool, b: bool) -> Self {
        Gf4(a as u8 | (b as u8) << 1)
    }

    /// Index in canonical order, in `0..4`.
    pub const fn index(self) -> usize {
        self.0 as usize
    }

    pub fn from_index(index: usize) -> Self {
        assert!(index < 4, "GF(4) index out of range: {index}");
        Gf4(index as u8)
    }

    /// Coefficient of 1 (the X part).
    pub const fn x_part(self) -> bool {
        self.0 & 1 == 1
    }

    /// Coefficient of ω (the Z part).
    pub const fn z_part(self) -> bool {
        self.0 & 2 == 2
    }

    pub const fn is_zero(self) -> bool {
        self.0 == 0
    }

    /// Text symbol used by the code file format: `0`, `1`, `w`, `W`.
    pub const fn symbol(self) -> char {
        match self.0 {
            0 => '0',
            1 => '1',
            2 => 'w',
            _ => 'W',
        }
    }

    pub fn from_symbol(c: char) -> Result<Self, Error> {
        match c {
            '0' => Ok(Gf4::ZERO),
            '1' => Ok(Gf4::ONE),
            'w' => Ok(Gf4::OMEGA),
            'W' => Ok(Gf4::OMEGA2),
            other => Err(Error::Parse(format!("unknown GF(4) symbol {other:?}"))),
        }
    }
}

impl Add for Gf4 {
    type Output = Gf4;

    fn add(self, rhs: Gf4) -> Gf4 {
        Gf4(self.0 ^ rhs.0)
    }
}

impl AddAssign for Gf4 {
    fn add_assign(&mut self, rhs: Gf4) {
        self.0 ^= rhs.0;
    }
}

impl Mul for Gf4 {
    type Output = Gf4;

    // (a + bω)(c + dω) = (ac + bd) + (ad + bc + bd)ω, using ω² = ω + 1.
    fn mul(self, rhs: Gf4) -> Gf4 {
        let (a, b) = (self.x_part(), self.z_part());
        let (c, d) = (rhs.x_part(), rhs.z_part());
        Gf4::from_parts((a & c) ^ (b & d), (a & d) ^ (b & c) ^ (b & d))
    }
}

impl fmt::Display for Gf4 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.symbol())
    }
}

/// Skew-symmetric pairing `Tr(ad - bc)` of `x = a + bω` and `y = c + dω`.
///
/// Over GF(2) the trace is the identity and the pairing is `ad + bc`; `true`
/// means the two single-qubit Paulis anticommute.
#[inline]
pub fn symplectic_pair(x: Gf4, y: Gf4) -> bool {
    (x.x_part() & y.z_part()) ^ (x.z_part() & y.x_part())
}

/// Sum of termwise pairings of two dense vectors.
pub fn symplectic_dot(row: &[Gf4], e: &[Gf4]) -> Result<bool, Error> {
    if row.len() != e.len() {
        return Err(Error::LengthMismatch {
            expected: row.len(),
            found: e.len(),
        });
    }
    Ok(row
        .iter()
        .zip(e)
        .fold(false, |acc, (&h, &x)| acc ^ symplectic_pair(h, x)))
}

/// A probability vector indexed by GF(4) in canonical order.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ProbVec4(pub [f64; 4]);

impl ProbVec4 {
    pub const UNIFORM: ProbVec4 = ProbVec4([0.25; 4]);

    /// Point mass at `x`.
    pub fn point(x: Gf4) -> Self {
        let mut p = [0.0; 4];
        p[x.index()] = 1.0;
        ProbVec4(p)
    }

    /// Depolarizing prior: identity with `1 - p0`, each of X, Z, Y with `p0 / 3`.
    pub fn depolarizing(p0: f64) -> Self {
        let q = p0 / 3.0;
        ProbVec4([1.0 - p0, q, q, q])
    }

    /// Normalizes in place. Returns `false`, leaving the vector untouched, when
    /// the total mass is zero or not finite.
    pub fn normalize(&mut self) -> bool {
        let total: f64 = self.0.iter().sum();
        if !(total > 0.0 && total.is_finite()) {
            return false;
        }
        for p in &mut self.0 {
            *p /= total;
        }
        true
    }

    pub fn get(&self, x: Gf4) -> f64 {
        self.0[x.index()]
    }

    pub fn sum(&self) -> f64 {
        self.0.iter().sum()
    }

    /// Most probable element; ties go to the earliest element in canonical order.
    pub fn argmax(&self) -> Gf4 {
        let mut best = 0;
        for k in 1..4 {
            if self.0[k] > self.0[best] {
                best = k;
            }
        }
        Gf4::from_index(best)
    }

    pub fn is_valid(&self, tol: f64) -> bool {
        self.0.iter().all(|&p| p >= 0.0 && p.is_finite()) && (self.sum() - 1.0).abs() <= tol
    }
}

/// Shannon entropy in bits, with `0 log 0 = 0`. Clamped to `[0, 2]`.
pub fn entropy4(q: &ProbVec4) -> f64 {
    let h: f64 = q
        .0
        .iter()
        .filter(|&&p| p > 0.0)
        .map(|&p| -p * p.log2())
        .sum();
    h.clamp(0.0, 2.0)
}

/// Entropy of the Werner state reached from a perfect pair through a
/// depolarizing channel of total error probability `p0`.
pub fn werner_entropy(p0: f64) -> f64 {
    let xlogx = |p: f64| if p > 0.0 { p * p.log2() } else { 0.0 };
    let third = p0 / 3.0;
    let h = -xlogx(1.0 - p0) - if third > 0.0 { p0 * third.log2() } else { 0.0 };
    h.clamp(0.0, 2.0)
}
