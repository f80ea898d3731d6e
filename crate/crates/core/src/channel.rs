//! Depolarizing Pauli noise on shared pairs and the syndromes it produces.

use rand::Rng;

use crate::codes::ParityCheck;
use crate::error::{Error, Result};
use crate::field::{symplectic_pair, Gf4, ProbVec4};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ChannelModel {
    p0: f64,
}

impl ChannelModel {
    pub fn new(p0: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&p0) {
            return Err(Error::InvalidParams(format!("error probability {p0} outside [0, 1]")));
        }
        Ok(ChannelModel { p0 })
    }

    pub fn p0(&self) -> f64 {
        self.p0
    }

    /// Per-qubit prior `(1 - p0, p0/3, p0/3, p0/3)`.
    pub fn prior(&self) -> ProbVec4 {
        ProbVec4::depolarizing(self.p0)
    }

    /// Fidelity of the Werner pair this channel produces.
    pub fn fidelity(&self) -> f64 {
        1.0 - self.p0
    }

    pub fn sample_pauli(&self, rng: &mut impl Rng) -> Gf4 {
        // One uniform draw per qubit keeps stream consumption independent of p0.
        let u: f64 = rng.gen();
        if u >= self.p0 {
            Gf4::ZERO
        } else {
            Gf4::NONZERO[((3.0 * u / self.p0) as usize).min(2)]
        }
    }
}

pub type NoiseVector = Vec<Gf4>;

pub fn sample_noise(n: usize, model: &ChannelModel, rng: &mut impl Rng) -> NoiseVector {
    (0..n).map(|_| model.sample_pauli(rng)).collect()
}

pub fn syndrome(h: &ParityCheck, e: &[Gf4]) -> Result<Vec<bool>> {
    if e.len() != h.n() {
        return Err(Error::LengthMismatch {
            expected: h.n(),
            found: e.len(),
        });
    }
    Ok(h.rows()
        .iter()
        .map(|row| row.iter().fold(false, |acc, &(j, x)| acc ^ symplectic_pair(x, e[j])))
        .collect())
}
