//! Recurrence-method baseline on Bell-diagonal pairs.
//!
//! Each round pairs up survivors, compares the parity of the block check
//! `(ω, ω)` (the X components of the two pair errors), keeps the first pair of
//! every agreeing couple and twirls the survivors back to Werner form. A pair
//! error is a Pauli `I, X, Z, Y`, identified with `0, 1, ω, ω²`.

use rand::Rng;

use crate::error::{Error, Result};
use crate::field::Gf4;

/// Bell-diagonal error distribution of a pair.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BellDiag {
    pub p_i: f64,
    pub p_x: f64,
    pub p_y: f64,
    pub p_z: f64,
}

impl BellDiag {
    pub fn new(p_i: f64, p_x: f64, p_y: f64, p_z: f64) -> Result<Self> {
        let d = BellDiag { p_i, p_x, p_y, p_z };
        let probs = d.probs();
        if probs.iter().any(|&p| !(p >= 0.0)) || (probs.iter().sum::<f64>() - 1.0).abs() > 1e-9 {
            return Err(Error::InvalidParams(format!("{d:?} is not a distribution")));
        }
        Ok(d)
    }

    /// Werner pair with fidelity `1 - p0`.
    pub fn werner(p0: f64) -> Self {
        let q = p0 / 3.0;
        BellDiag {
            p_i: 1.0 - p0,
            p_x: q,
            p_y: q,
            p_z: q,
        }
    }

    pub fn fidelity(&self) -> f64 {
        self.p_i
    }

    /// Probabilities indexed by GF(4) canonical order.
    pub fn probs(&self) -> [f64; 4] {
        [self.p_i, self.p_x, self.p_z, self.p_y]
    }

    fn from_probs(p: [f64; 4]) -> Self {
        BellDiag {
            p_i: p[0],
            p_x: p[1],
            p_z: p[2],
            p_y: p[3],
        }
    }

    /// Depolarizing twirl: keeps the fidelity, spreads the rest evenly.
    pub fn twirled(&self) -> Self {
        BellDiag::werner(1.0 - self.fidelity())
    }

    pub fn sample(&self, rng: &mut impl Rng) -> Gf4 {
        let u: f64 = rng.gen();
        let mut acc = 0.0;
        for (k, p) in self.probs().into_iter().enumerate() {
            acc += p;
            if u < acc {
                return Gf4::from_index(k);
            }
        }
        Gf4::OMEGA2
    }
}

/// Error left on the kept pair of an agreeing couple.
fn surviving_error(first: Gf4, second: Gf4) -> Option<Gf4> {
    (first.x_part() == second.x_part())
        .then(|| Gf4::from_parts(first.x_part(), first.z_part() ^ second.z_part()))
}

/// One exact round: acceptance probability and the (untwirled) distribution of
/// accepted pairs.
pub fn recurrence_round(d: &BellDiag) -> (f64, BellDiag) {
    let p = d.probs();
    let mut out = [0.0; 4];
    for a in Gf4::ALL {
        for b in Gf4::ALL {
            if let Some(x) = surviving_error(a, b) {
                out[x.index()] += p[a.index()] * p[b.index()];
            }
        }
    }
    let accept: f64 = out.iter().sum();
    if accept > 0.0 {
        out.iter_mut().for_each(|q| *q /= accept);
    }
    (accept, BellDiag::from_probs(out))
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RecurrenceStep {
    pub acceptance: f64,
    /// Fidelity after the round's post-selection.
    pub fidelity: f64,
    /// Output pairs per original input pair after this round.
    pub yield_: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct RecurrenceResult {
    pub yield_: f64,
    pub final_state: BellDiag,
    pub steps: Vec<RecurrenceStep>,
}

pub fn run_recurrence_baseline(d: &BellDiag, rounds: usize) -> RecurrenceResult {
    let mut state = *d;
    let mut yield_ = 1.0;
    let mut steps = Vec::with_capacity(rounds);
    for _ in 0..rounds {
        let (acceptance, kept) = recurrence_round(&state);
        yield_ *= acceptance / 2.0;
        steps.push(RecurrenceStep {
            acceptance,
            fidelity: kept.fidelity(),
            yield_,
        });
        state = kept.twirled();
    }
    RecurrenceResult {
        yield_,
        final_state: state,
        steps,
    }
}

/// Counts from one simulated round.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct SimulatedRound {
    pub input_pairs: u64,
    pub accepted: u64,
    /// Accepted pairs with no residual error.
    pub perfect: u64,
}

impl SimulatedRound {
    pub fn fidelity(&self) -> f64 {
        self.perfect as f64 / self.accepted as f64
    }

    /// Binomial standard error of [`Self::fidelity`].
    pub fn fidelity_stderr(&self) -> f64 {
        let f = self.fidelity();
        (f * (1.0 - f) / self.accepted as f64).sqrt()
    }
}

/// Monte Carlo version of [`run_recurrence_baseline`] on an explicit population.
pub fn simulate_recurrence(
    d: &BellDiag,
    rounds: usize,
    pairs: usize,
    rng: &mut impl Rng,
) -> Vec<SimulatedRound> {
    let mut population: Vec<Gf4> = (0..pairs).map(|_| d.sample(rng)).collect();
    let mut out = Vec::with_capacity(rounds);
    for _ in 0..rounds {
        let input_pairs = population.len() as u64;
        let survivors: Vec<Gf4> = population
            .chunks_exact(2)
            .filter_map(|c| surviving_error(c[0], c[1]))
            .collect();
        out.push(SimulatedRound {
            input_pairs,
            accepted: survivors.len() as u64,
            perfect: survivors.iter().filter(|x| x.is_zero()).count() as u64,
        });
        population = survivors
            .into_iter()
            .map(|x| {
                if x.is_zero() {
                    x
                } else {
                    Gf4::NONZERO[rng.gen_range(0..3)]
                }
            })
            .collect();
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::stream_rng;

    #[test]
    fn perfect_pairs_only_halve() {
        let r = run_recurrence_baseline(&BellDiag::werner(0.0), 3);
        assert_eq!(r.yield_, 0.125);
        assert_eq!(r.final_state.fidelity(), 1.0);
    }

    #[test]
    fn werner_round_by_hand() {
        let (acc, kept) = recurrence_round(&BellDiag::werner(0.3));
        assert!((acc - 0.68).abs() < 1e-12);
        assert!((kept.fidelity() - 0.50 / 0.68).abs() < 1e-12);
    }

    #[test]
    fn maximally_mixed_is_fixed() {
        let (acc, kept) = recurrence_round(&BellDiag::werner(0.75));
        assert!((acc - 0.5).abs() < 1e-12);
        assert!((kept.fidelity() - 0.25).abs() < 1e-12);
    }

    #[test]
    fn simulation_tracks_exact_round() {
        let d = BellDiag::werner(0.3);
        let sim = simulate_recurrence(&d, 2, 200_000, &mut stream_rng(3, &[]));
        let exact = run_recurrence_baseline(&d, 2);
        for (s, x) in sim.iter().zip(&exact.steps) {
            assert!((s.fidelity() - x.fidelity).abs() < 4.0 * s.fidelity_stderr());
        }
    }

    #[test]
    fn invalid_distribution() {
        assert!(BellDiag::new(0.5, 0.5, 0.5, 0.0).is_err());
        assert!(BellDiag::new(1.0, 0.0, 0.0, 0.0).is_ok());
    }
}
