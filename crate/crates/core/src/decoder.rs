//! Syndrome belief propagation over GF(4) with a flooding schedule.
//!
//! Messages live on Tanner-graph edges. A check-to-variable message only
//! depends on the parity bits `(H_ij | x_j)` of the other variables, so each
//! incoming message is collapsed to a two-point distribution and the
//! leave-one-out XOR convolutions are formed by recursive halving of the
//! neighbour list.

use crate::error::{Error, Result};
use crate::field::{symplectic_pair, Gf4, ProbVec4};
use crate::tanner::TannerGraph;

pub const DEFAULT_MAX_ITERATIONS: usize = 10;

/// Raised when a variable's incoming messages annihilate every GF(4) value.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct DegenerateMessage {
    pub variable: usize,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum DecodeStatus {
    /// The tentative decoding reproduces the syndrome.
    Converged,
    MaxIterations,
    Degenerate,
}

#[derive(Clone, Debug)]
pub struct DecodeResult {
    pub status: DecodeStatus,
    pub tentative: Vec<Gf4>,
    pub posteriors: Vec<ProbVec4>,
    pub iterations_used: usize,
}

impl DecodeResult {
    pub fn converged(&self) -> bool {
        self.status == DecodeStatus::Converged
    }
}

#[derive(Clone, Debug)]
pub struct BeliefState {
    /// Variable-to-check messages, one per edge.
    q: Vec<ProbVec4>,
    /// Check-to-variable messages, one per edge.
    r: Vec<ProbVec4>,
    posteriors: Vec<ProbVec4>,
    tentative: Vec<Gf4>,
    iterations: usize,
}

type Bit = [f64; 2];

fn xor_conv(a: Bit, b: Bit) -> Bit {
    [a[0] * b[0] + a[1] * b[1], a[0] * b[1] + a[1] * b[0]]
}

const BIT_ZERO: Bit = [1.0, 0.0];

/// Distribution of the XOR of every bit in `bits`.
fn aggregate(bits: &[Bit]) -> Bit {
    match bits.len() {
        0 => BIT_ZERO,
        1 => bits[0],
        len => {
            let (left, right) = bits.split_at(len.div_ceil(2));
            xor_conv(aggregate(left), aggregate(right))
        }
    }
}

/// `out[k]` becomes `outside ⊛ (XOR of all bits except bits[k])`.
fn leave_one_out(bits: &[Bit], outside: Bit, out: &mut [Bit]) {
    match bits.len() {
        0 => {}
        1 => out[0] = outside,
        len => {
            let mid = len.div_ceil(2);
            let (left, right) = bits.split_at(mid);
            let (out_left, out_right) = out.split_at_mut(mid);
            leave_one_out(left, xor_conv(outside, aggregate(right)), out_left);
            leave_one_out(right, xor_conv(outside, aggregate(left)), out_right);
        }
    }
}

impl BeliefState {
    /// Q messages start at each variable's prior, R messages uniform.
    pub fn init(g: &TannerGraph, priors: &[ProbVec4]) -> Result<Self> {
        if priors.len() != g.n_vars() {
            return Err(Error::LengthMismatch {
                expected: g.n_vars(),
                found: priors.len(),
            });
        }
        let q = (0..g.n_edges()).map(|e| priors[g.edge_var(e)]).collect();
        Ok(BeliefState {
            q,
            r: vec![ProbVec4::UNIFORM; g.n_edges()],
            posteriors: priors.to_vec(),
            tentative: priors.iter().map(ProbVec4::argmax).collect(),
            iterations: 0,
        })
    }

    pub fn q_message(&self, edge: usize) -> &ProbVec4 {
        &self.q[edge]
    }

    pub fn r_message(&self, edge: usize) -> &ProbVec4 {
        &self.r[edge]
    }

    pub fn posteriors(&self) -> &[ProbVec4] {
        &self.posteriors
    }

    pub fn tentative(&self) -> &[Gf4] {
        &self.tentative
    }

    pub fn iterations(&self) -> usize {
        self.iterations
    }

    /// Recomputes every check-to-variable message from the current Q messages.
    pub fn check_update(&mut self, g: &TannerGraph, s: &[bool]) {
        let mut bits = Vec::new();
        let mut others = Vec::new();
        for i in 0..g.n_checks() {
            let edges = g.check_edges(i);
            bits.clear();
            bits.extend(edges.clone().map(|e| {
                let h = g.edge_label(e);
                let q = &self.q[e];
                let one: f64 = Gf4::ALL
                    .iter()
                    .filter(|&&a| symplectic_pair(h, a))
                    .map(|&a| q.get(a))
                    .sum();
                [q.sum() - one, one]
            }));
            others.clear();
            others.resize(bits.len(), BIT_ZERO);
            leave_one_out(&bits, BIT_ZERO, &mut others);
            for (k, e) in edges.enumerate() {
                let h = g.edge_label(e);
                let mut r = ProbVec4(Gf4::ALL.map(|a| {
                    let need = s[i] ^ symplectic_pair(h, a);
                    others[k][need as usize]
                }));
                if !r.normalize() {
                    r = ProbVec4::UNIFORM;
                }
                self.r[e] = r;
            }
        }
    }

    /// Recomputes every variable-to-check message from the current R messages.
    pub fn variable_update(
        &mut self,
        g: &TannerGraph,
        priors: &[ProbVec4],
    ) -> Result<(), DegenerateMessage> {
        let mut prefix = Vec::new();
        for j in 0..g.n_vars() {
            let edges = g.var_edges(j);
            prefix.clear();
            let mut acc = priors[j].0;
            for &e in edges {
                prefix.push(acc);
                acc = mul(acc, self.r[e].0);
            }
            let mut suffix = [1.0; 4];
            for (k, &e) in edges.iter().enumerate().rev() {
                let mut q = ProbVec4(mul(prefix[k], suffix));
                if !q.normalize() {
                    return Err(DegenerateMessage { variable: j });
                }
                self.q[e] = q;
                suffix = mul(suffix, self.r[e].0);
            }
        }
        Ok(())
    }

    /// Pseudo-posteriors from all incoming R messages, and their argmax.
    pub fn posterior_update(
        &mut self,
        g: &TannerGraph,
        priors: &[ProbVec4],
    ) -> Result<(), DegenerateMessage> {
        for j in 0..g.n_vars() {
            let mut post = ProbVec4(
                g.var_edges(j)
                    .iter()
                    .fold(priors[j].0, |acc, &e| mul(acc, self.r[e].0)),
            );
            if !post.normalize() {
                return Err(DegenerateMessage { variable: j });
            }
            self.posteriors[j] = post;
            self.tentative[j] = post.argmax();
        }
        Ok(())
    }

    /// One flooding round: all checks, then all variables, then posteriors.
    pub fn iterate(
        &mut self,
        g: &TannerGraph,
        s: &[bool],
        priors: &[ProbVec4],
    ) -> Result<(), DegenerateMessage> {
        self.check_update(g, s);
        self.variable_update(g, priors)?;
        self.posterior_update(g, priors)?;
        self.iterations += 1;
        Ok(())
    }
}

fn mul(a: [f64; 4], b: [f64; 4]) -> [f64; 4] {
    [a[0] * b[0], a[1] * b[1], a[2] * b[2], a[3] * b[3]]
}

fn check_inputs(g: &TannerGraph, s: &[bool], m_max: usize) -> Result<()> {
    if s.len() != g.n_checks() {
        return Err(Error::LengthMismatch {
            expected: g.n_checks(),
            found: s.len(),
        });
    }
    if m_max == 0 {
        return Err(Error::InvalidParams("the iteration limit must be at least 1".into()));
    }
    Ok(())
}

/// Runs up to `m_max` rounds, stopping once the tentative decoding matches `s`.
pub fn decode(
    g: &TannerGraph,
    s: &[bool],
    priors: &[ProbVec4],
    m_max: usize,
) -> Result<DecodeResult> {
    check_inputs(g, s, m_max)?;
    let mut state = BeliefState::init(g, priors)?;
    let mut status = DecodeStatus::MaxIterations;
    for _ in 0..m_max {
        if state.iterate(g, s, priors).is_err() {
            status = DecodeStatus::Degenerate;
            break;
        }
        if g.syndrome(&state.tentative) == s {
            status = DecodeStatus::Converged;
            break;
        }
    }
    Ok(finish(state, status))
}

/// Runs exactly `rounds` rounds with no early stop; the status reflects the
/// final tentative decoding.
pub fn decode_fixed(
    g: &TannerGraph,
    s: &[bool],
    priors: &[ProbVec4],
    rounds: usize,
) -> Result<DecodeResult> {
    check_inputs(g, s, rounds)?;
    let mut state = BeliefState::init(g, priors)?;
    for _ in 0..rounds {
        if state.iterate(g, s, priors).is_err() {
            return Ok(finish(state, DecodeStatus::Degenerate));
        }
    }
    let status = if g.syndrome(&state.tentative) == s {
        DecodeStatus::Converged
    } else {
        DecodeStatus::MaxIterations
    };
    Ok(finish(state, status))
}

fn finish(state: BeliefState, status: DecodeStatus) -> DecodeResult {
    DecodeResult {
        status,
        iterations_used: state.iterations,
        tentative: state.tentative,
        posteriors: state.posteriors,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::codes::{BicycleParams, ParityCheck};
    use crate::field::symplectic_dot;
    use proptest::prelude::*;

    const W: Gf4 = Gf4::OMEGA;

    fn graph(rows: &[Vec<Gf4>]) -> TannerGraph {
        TannerGraph::from_parity_check(&ParityCheck::from_dense(rows).unwrap())
    }

    fn all_errors(n: usize) -> impl Iterator<Item = Vec<Gf4>> {
        (0..4usize.pow(n as u32))
            .map(move |code| (0..n).map(|j| Gf4::from_index(code >> (2 * j) & 3)).collect())
    }

    /// Syndrome-conditional marginals by summing over all 4^n errors.
    fn exact_marginals(rows: &[Vec<Gf4>], s: &[bool], prior: ProbVec4) -> Vec<[f64; 4]> {
        let n = rows[0].len();
        let mut marg = vec![[0.0; 4]; n];
        for e in all_errors(n) {
            if rows.iter().zip(s).any(|(h, &b)| symplectic_dot(h, &e).unwrap() != b) {
                continue;
            }
            let w: f64 = e.iter().map(|&x| prior.get(x)).product();
            for (j, x) in e.iter().enumerate() {
                marg[j][x.index()] += w;
            }
        }
        for m in &mut marg {
            let t: f64 = m.iter().sum();
            m.iter_mut().for_each(|p| *p /= t);
        }
        marg
    }

    fn assert_close(a: &[f64; 4], b: &[f64; 4], tol: f64) {
        for k in 0..4 {
            assert!((a[k] - b[k]).abs() <= tol, "{a:?} vs {b:?}");
        }
    }

    #[test]
    fn split_convolution_matches_direct_product() {
        let bits: Vec<Bit> = (0..7).map(|k| [0.1 + 0.1 * k as f64, 0.9 - 0.1 * k as f64]).collect();
        let mut out = vec![BIT_ZERO; 7];
        leave_one_out(&bits, BIT_ZERO, &mut out);
        for k in 0..7 {
            let direct = bits
                .iter()
                .enumerate()
                .filter(|&(t, _)| t != k)
                .fold(BIT_ZERO, |acc, (_, &b)| xor_conv(acc, b));
            assert!((direct[0] - out[k][0]).abs() < 1e-15 && (direct[1] - out[k][1]).abs() < 1e-15);
        }
    }

    #[test]
    fn degree_one_check_is_an_indicator() {
        let g = graph(&[vec![W]]);
        let mut st = BeliefState::init(&g, &[ProbVec4::depolarizing(0.3)]).unwrap();
        st.check_update(&g, &[true]);
        // (ω|α) = 1 exactly for α ∈ {1, ω²}.
        assert_close(&st.r_message(0).0, &[0.0, 0.5, 0.0, 0.5], 0.0);
    }

    #[test]
    fn check_message_matches_enumeration() {
        let g = graph(&[vec![W, W, W]]);
        let q = [
            ProbVec4([0.4, 0.3, 0.2, 0.1]),
            ProbVec4([0.1, 0.2, 0.3, 0.4]),
            ProbVec4([0.25, 0.25, 0.25, 0.25]),
        ];
        for s in [false, true] {
            let mut st = BeliefState::init(&g, &q).unwrap();
            st.check_update(&g, &[s]);
            for j in 0..3 {
                let mut r = [0.0; 4];
                for a in Gf4::ALL {
                    for x in Gf4::ALL {
                        for y in Gf4::ALL {
                            let mut e = [Gf4::ZERO; 3];
                            e[j] = a;
                            let others: Vec<usize> = (0..3).filter(|&t| t != j).collect();
                            e[others[0]] = x;
                            e[others[1]] = y;
                            if symplectic_dot(&[W, W, W], &e).unwrap() == s {
                                r[a.index()] += q[others[0]].get(x) * q[others[1]].get(y);
                            }
                        }
                    }
                }
                let t: f64 = r.iter().sum();
                r.iter_mut().for_each(|p| *p /= t);
                assert_close(&st.r_message(j).0, &r, 1e-12);
            }
        }
    }

    #[test]
    fn point_mass_messages_pin_the_coset() {
        let g = graph(&[vec![W, Gf4::ONE, Gf4::OMEGA2]]);
        let e = [Gf4::ONE, Gf4::OMEGA, Gf4::ZERO];
        let s = symplectic_dot(&[W, Gf4::ONE, Gf4::OMEGA2], &e).unwrap();
        let mut st = BeliefState::init(&g, &e.map(ProbVec4::point)).unwrap();
        st.check_update(&g, &[s]);
        for (j, &h) in [W, Gf4::ONE, Gf4::OMEGA2].iter().enumerate() {
            for a in Gf4::ALL {
                let compatible = symplectic_pair(h, a) == symplectic_pair(h, e[j]);
                assert_eq!(st.r_message(j).get(a) > 0.0, compatible);
            }
        }
    }

    #[test]
    fn variable_messages() {
        let g = graph(&[vec![W, W], vec![W, W]]);
        let prior = ProbVec4([0.4, 0.3, 0.2, 0.1]);
        let mut st = BeliefState::init(&g, &[prior; 2]).unwrap();
        st.r[0] = ProbVec4([0.1, 0.2, 0.3, 0.4]);
        st.r[2] = ProbVec4([0.4, 0.1, 0.4, 0.1]);
        st.variable_update(&g, &[prior; 2]).unwrap();
        // Variable 0 sits on edges 0 and 2; the message to check 0 uses R from check 1.
        let mut expect = mul(prior.0, [0.4, 0.1, 0.4, 0.1]);
        let t: f64 = expect.iter().sum();
        expect.iter_mut().for_each(|p| *p /= t);
        assert_close(&st.q_message(0).0, &expect, 1e-15);

        let single = graph(&[vec![W]]);
        let mut st = BeliefState::init(&single, &[prior]).unwrap();
        st.check_update(&single, &[true]);
        st.variable_update(&single, &[prior]).unwrap();
        assert_close(&st.q_message(0).0, &prior.0, 1e-15);
    }

    #[test]
    fn point_prior_is_absorbing_or_degenerate() {
        let g = graph(&[vec![W, W], vec![W, W]]);
        let prior = [ProbVec4::point(Gf4::ZERO); 2];
        let r = decode(&g, &[false, false], &prior, 5).unwrap();
        assert!(r.converged());
        assert_eq!(r.posteriors[0], ProbVec4::point(Gf4::ZERO));
        let r = decode(&g, &[true, true], &prior, 5).unwrap();
        assert_eq!(r.status, DecodeStatus::Degenerate);
    }

    #[test]
    fn isolated_variable_keeps_its_prior() {
        let g = graph(&[vec![W, Gf4::ZERO]]);
        let prior = ProbVec4([0.1, 0.2, 0.6, 0.1]);
        let r = decode_fixed(&g, &[false], &[ProbVec4::UNIFORM, prior], 3).unwrap();
        assert_close(&r.posteriors[1].0, &prior.0, 1e-15);
        assert_eq!(r.tentative[1], W);
    }

    #[test]
    fn single_check_posteriors_are_exact() {
        let rows = vec![vec![W, W, W]];
        let prior = ProbVec4::depolarizing(0.1);
        let exact = exact_marginals(&rows, &[true], prior);
        let r = decode_fixed(&graph(&rows), &[true], &[prior; 3], 1).unwrap();
        for j in 0..3 {
            assert_close(&r.posteriors[j].0, &exact[j], 1e-12);
        }
    }

    #[test]
    fn path_tree_posteriors_are_exact() {
        // Three checks chained through shared qubits 1 and 3; shared entries agree.
        let o = Gf4::ZERO;
        let y = Gf4::OMEGA2;
        let rows = vec![
            vec![Gf4::ONE, W, o, o, o, o],
            vec![o, W, y, y, o, o],
            vec![o, o, o, y, Gf4::ONE, W],
        ];
        let prior = ProbVec4::depolarizing(0.2);
        let g = graph(&rows);
        for s in [[true, false, true], [false, true, true], [true, true, false]] {
            let exact = exact_marginals(&rows, &s, prior);
            let r = decode_fixed(&g, &s, &[prior; 6], 4).unwrap();
            for j in 0..6 {
                assert_close(&r.posteriors[j].0, &exact[j], 1e-9);
            }
        }
    }

    #[test]
    fn zero_syndrome_converges_in_one_round() {
        let h = BicycleParams::from_weights(16, 2, 4).unwrap().sample_code(3).unwrap();
        let g = TannerGraph::from_parity_check(&h);
        let r = decode(&g, &vec![false; h.num_rows()], &vec![ProbVec4::depolarizing(0.2); 16], 10)
            .unwrap();
        assert!(r.converged());
        assert_eq!(r.iterations_used, 1);
        assert!(r.tentative.iter().all(|x| x.is_zero()));
    }

    /// Weight-1 errors with the same syndrome as `e`.
    fn weight_one_matches(g: &TannerGraph, s: &[bool]) -> usize {
        (0..g.n_vars())
            .flat_map(|k| Gf4::NONZERO.map(|y| (k, y)))
            .filter(|&(k, y)| {
                let mut f = vec![Gf4::ZERO; g.n_vars()];
                f[k] = y;
                g.syndrome(&f) == s
            })
            .count()
    }

    fn single_qubit_report(h: &ParityCheck, p0: f64) -> (usize, usize, usize) {
        let n = h.n();
        let g = TannerGraph::from_parity_check(h);
        let priors = vec![ProbVec4::depolarizing(p0); n];
        let (mut unique, mut unique_ok, mut ambiguous) = (0, 0, 0);
        for j in 0..n {
            for x in Gf4::NONZERO {
                let mut e = vec![Gf4::ZERO; n];
                e[j] = x;
                let s = g.syndrome(&e);
                let r = decode(&g, &s, &priors, DEFAULT_MAX_ITERATIONS).unwrap();
                if r.converged() {
                    assert_eq!(g.syndrome(&r.tentative), s);
                }
                if weight_one_matches(&g, &s) == 1 {
                    unique += 1;
                    unique_ok += r.converged() as usize;
                } else {
                    ambiguous += 1;
                }
            }
        }
        (unique, unique_ok, ambiguous)
    }

    #[test]
    fn single_qubit_errors_on_small_codes() {
        // In a two-term bicycle code every single-qubit error on the left half
        // shares its syndrome with one on the right half, so no weight-1
        // syndrome singles out one qubit.
        let h = BicycleParams::from_weights(16, 2, 4).unwrap().sample_code(11).unwrap();
        let (unique, _, ambiguous) = single_qubit_report(&h, 0.05);
        assert_eq!((unique, ambiguous), (0, 48));

        for (n, dv, dc, seed) in [(32, 4, 8, 0), (24, 3, 6, 0), (32, 8, 16, 1)] {
            let h = BicycleParams::from_weights(n, dv, dc).unwrap().sample_code(seed).unwrap();
            let (unique, unique_ok, _) = single_qubit_report(&h, 0.05);
            assert!(unique > 0);
            assert_eq!(unique_ok, unique, "({dv},{dc}) n={n}");
        }
    }

    fn arb_prior() -> impl Strategy<Value = ProbVec4> {
        prop::array::uniform4(0.01f64..1.0).prop_map(|p| {
            let mut v = ProbVec4(p);
            v.normalize();
            v
        })
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn messages_stay_normalized(seed in 0u64..1000, p0 in 0.01f64..0.5, bits in prop::collection::vec(any::<bool>(), 8)) {
            let h = BicycleParams::from_weights(16, 2, 4).unwrap().sample_code(seed).unwrap();
            let g = TannerGraph::from_parity_check(&h);
            let priors = vec![ProbVec4::depolarizing(p0); 16];
            let mut st = BeliefState::init(&g, &priors).unwrap();
            for _ in 0..4 {
                if st.iterate(&g, &bits, &priors).is_err() {
                    break;
                }
                for e in 0..g.n_edges() {
                    prop_assert!(st.q_message(e).is_valid(1e-9));
                    prop_assert!(st.r_message(e).is_valid(1e-9));
                }
                prop_assert!(st.posteriors().iter().all(|p| p.is_valid(1e-9)));
            }
        }

        #[test]
        fn relabeling_variables_permutes_posteriors(
            seed in 0u64..1000,
            perm in Just((0..16).collect::<Vec<usize>>()).prop_shuffle(),
            bits in prop::collection::vec(any::<bool>(), 8),
            prior in arb_prior(),
        ) {
            let h = BicycleParams::from_weights(16, 2, 4).unwrap().sample_code(seed).unwrap();
            let dense: Vec<Vec<Gf4>> = (0..h.num_rows()).map(|i| h.dense_row(i)).collect();
            let permuted: Vec<Vec<Gf4>> = dense
                .iter()
                .map(|row| {
                    let mut out = vec![Gf4::ZERO; 16];
                    for (j, &x) in row.iter().enumerate() {
                        out[perm[j]] = x;
                    }
                    out
                })
                .collect();
            let priors = vec![prior; 16];
            let a = decode_fixed(&graph(&dense), &bits, &priors, 5).unwrap();
            let b = decode_fixed(&graph(&permuted), &bits, &priors, 5).unwrap();
            prop_assert_eq!(a.status, b.status);
            if a.status != DecodeStatus::Degenerate {
                for j in 0..16 {
                    for k in 0..4 {
                        prop_assert!((a.posteriors[j].0[k] - b.posteriors[perm[j]].0[k]).abs() < 1e-12);
                    }
                }
            }
        }
    }
}
