//! The adaptive distillation protocol: measure syndromes, decode, discard
//! low-confidence pairs, climb the code hierarchy, and adjudicate the outcome.
//!
//! Success is judged on coordinates: a trial succeeds when the residual
//! `e + x̃` on the kept pairs lies in the span of the used checks restricted to
//! those pairs, and it then yields `n - rows - discarded` output pairs.

mod recurrence;

pub use recurrence::{
    recurrence_round, run_recurrence_baseline, simulate_recurrence, BellDiag, RecurrenceResult,
    RecurrenceStep, SimulatedRound,
};

use std::fmt;

use rand::seq::index;
use rand::Rng;

use crate::codes::{CodeHierarchy, HierarchyNode, ParityCheck};
use crate::decoder::{decode, DecodeStatus, DEFAULT_MAX_ITERATIONS};
use crate::error::{Error, Result};
use crate::field::{entropy4, werner_entropy, Gf4, ProbVec4};
use crate::gf2::{BitVec, XorBasis};
use crate::tanner::TannerGraph;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Implementation {
    /// One fixed code, one decoding level.
    A,
    /// Start from a subcode and add back one row per failed level.
    B,
}

impl Implementation {
    pub fn label(self) -> &'static str {
        match self {
            Implementation::A => "A",
            Implementation::B => "B",
        }
    }
}

impl fmt::Display for Implementation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

impl std::str::FromStr for Implementation {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "A" | "a" => Ok(Implementation::A),
            "B" | "b" => Ok(Implementation::B),
            _ => Err(Error::Parse(format!("unknown implementation {s:?}, expected A or B"))),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ProtocolParams {
    implementation: Implementation,
    max_level: usize,
    max_iterations: usize,
    /// Entropy threshold in bits for levels `1..=max_level`.
    thresholds: Vec<f64>,
    p0_assumed: f64,
}

impl ProtocolParams {
    pub fn implementation_a(p0_assumed: f64) -> Self {
        ProtocolParams {
            implementation: Implementation::A,
            max_level: 1,
            max_iterations: DEFAULT_MAX_ITERATIONS,
            thresholds: vec![werner_entropy(p0_assumed)],
            p0_assumed,
        }
    }

    /// Uses the default level count `min(n/4, rows - 1)`, at least 1.
    pub fn implementation_b(p0_assumed: f64, n: usize, rows: usize) -> Self {
        let max_level = default_max_level(n, rows);
        Self::implementation_b_with_levels(p0_assumed, max_level)
            .expect("default level count is positive")
    }

    pub fn implementation_b_with_levels(p0_assumed: f64, max_level: usize) -> Result<Self> {
        if max_level == 0 {
            return Err(Error::InvalidParams("at least one level is required".into()));
        }
        let mut thresholds = vec![2.0; max_level];
        thresholds[max_level - 1] = werner_entropy(p0_assumed);
        Ok(ProtocolParams {
            implementation: Implementation::B,
            max_level,
            max_iterations: DEFAULT_MAX_ITERATIONS,
            thresholds,
            p0_assumed,
        })
    }

    pub fn with_max_iterations(mut self, m_max: usize) -> Result<Self> {
        if m_max == 0 {
            return Err(Error::InvalidParams("the iteration limit must be at least 1".into()));
        }
        self.max_iterations = m_max;
        Ok(self)
    }

    /// Replaces every level's threshold.
    pub fn with_thresholds(mut self, thresholds: Vec<f64>) -> Result<Self> {
        if thresholds.len() != self.max_level {
            return Err(Error::LengthMismatch {
                expected: self.max_level,
                found: thresholds.len(),
            });
        }
        self.thresholds = thresholds;
        Ok(self)
    }

    pub fn implementation(&self) -> Implementation {
        self.implementation
    }

    pub fn max_level(&self) -> usize {
        self.max_level
    }

    pub fn max_iterations(&self) -> usize {
        self.max_iterations
    }

    pub fn p0_assumed(&self) -> f64 {
        self.p0_assumed
    }

    /// Threshold for 1-based `level`.
    pub fn threshold(&self, level: usize) -> f64 {
        self.thresholds[level - 1]
    }
}

pub fn default_max_level(n: usize, rows: usize) -> usize {
    (n / 4).min(rows.saturating_sub(1)).max(1)
}

/// Implementation B's first code: `max_level - 1` root rows deleted at random.
pub fn random_start(
    hierarchy: &CodeHierarchy,
    max_level: usize,
    rng: &mut impl Rng,
) -> Result<HierarchyNode> {
    let rows = hierarchy.root().num_rows();
    let count = max_level.saturating_sub(1);
    if count > rows {
        return Err(Error::InvalidHierarchy(format!("cannot delete {count} of {rows} rows")));
    }
    hierarchy.node(index::sample(rng, rows, count))
}

/// One decoding level of a trial.
#[derive(Clone, Debug, PartialEq)]
pub struct LevelRecord {
    pub level: usize,
    pub rows: usize,
    pub converged: bool,
    pub iterations: usize,
    /// Pairs discarded so far, including this level's.
    pub discarded: usize,
    pub entropy_mean: f64,
    pub entropy_max: f64,
}

/// One line per level: `level=<l> rows=<r> converged=<bool> iterations=<m>
/// discarded=<k> entropy_mean=<x> entropy_max=<y>`.
impl fmt::Display for LevelRecord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "level={} rows={} converged={} iterations={} discarded={} entropy_mean={:.6} entropy_max={:.6}",
            self.level,
            self.rows,
            self.converged,
            self.iterations,
            self.discarded,
            self.entropy_mean,
            self.entropy_max
        )
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct TrialOutcome {
    pub level_reached: usize,
    pub converged_level: Option<usize>,
    pub degenerate: bool,
    pub discard_set: Vec<usize>,
    /// Rows of the code the trial ended on.
    pub rows_used: usize,
    pub kept: usize,
    pub success: bool,
    pub trace: Vec<LevelRecord>,
}

impl TrialOutcome {
    /// Output pairs this trial contributes: `kept` on success, else 0.
    pub fn output_pairs(&self) -> usize {
        if self.success {
            self.kept
        } else {
            0
        }
    }

    pub fn total_iterations(&self) -> usize {
        self.trace.iter().map(|r| r.iterations).sum()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Adjudication {
    pub success: bool,
    pub kept: usize,
}

/// Success iff `e + x̃` on kept coordinates lies in the GF(2) span of `h`'s rows
/// restricted to those coordinates. `kept = n - rows - |discard|`, floored at 0.
pub fn adjudicate(h: &ParityCheck, e: &[Gf4], x_hat: &[Gf4], discard: &[usize]) -> Adjudication {
    let n = h.n();
    let mut dropped = vec![false; n];
    for &j in discard {
        dropped[j] = true;
    }
    let n_dropped = dropped.iter().filter(|&&d| d).count();
    let kept = n.saturating_sub(h.num_rows() + n_dropped);
    let residual: Vec<(usize, Gf4)> = (0..n)
        .filter(|&j| !dropped[j])
        .map(|j| (j, e[j] + x_hat[j]))
        .filter(|(_, x)| !x.is_zero())
        .collect();
    if residual.is_empty() {
        return Adjudication { success: true, kept };
    }
    let mut basis = XorBasis::new(2 * n);
    for row in h.rows() {
        let restricted = row.iter().copied().filter(|&(j, _)| !dropped[j]);
        basis.insert(BitVec::symplectic_expansion(n, restricted));
    }
    let success = basis.contains(&BitVec::symplectic_expansion(n, residual));
    Adjudication { success, kept }
}

/// Adds back the deleted root row whose support carries the most posterior
/// entropy; ties go to the lowest row id.
pub fn select_next_row(
    hierarchy: &CodeHierarchy,
    current: &HierarchyNode,
    posteriors: &[ProbVec4],
) -> Result<HierarchyNode> {
    let root = hierarchy.root();
    let mut best: Option<(f64, usize, usize)> = None;
    for &p in current.deleted() {
        let score: f64 = root.row(p).iter().map(|&(j, _)| entropy4(&posteriors[j])).sum();
        let id = root.row_ids()[p];
        let better = match best {
            None => true,
            Some((s, best_id, _)) => score > s || (score == s && id < best_id),
        };
        if better {
            best = Some((score, id, p));
        }
    }
    let (_, _, position) = best.ok_or(Error::NoRowAvailable)?;
    Ok(hierarchy.with_row_restored(current, position))
}

/// Runs one trial starting at `start`, which must sit `max_level - 1` rows
/// below the root so that the last level decodes with the root itself.
pub fn run_trial(
    hierarchy: &CodeHierarchy,
    start: &HierarchyNode,
    e: &[Gf4],
    params: &ProtocolParams,
) -> Result<TrialOutcome> {
    let n = hierarchy.root().n();
    if e.len() != n {
        return Err(Error::LengthMismatch {
            expected: n,
            found: e.len(),
        });
    }
    if start.layer() + 1 != params.max_level {
        return Err(Error::InvalidHierarchy(format!(
            "a {}-level run must start {} rows below the root, not {}",
            params.max_level,
            params.max_level - 1,
            start.layer()
        )));
    }
    let priors = vec![ProbVec4::depolarizing(params.p0_assumed); n];
    let mut node = start.clone();
    let mut dropped = vec![false; n];
    let mut discard_set = Vec::new();
    let mut trace = Vec::new();
    let mut level = 1;
    loop {
        let h = hierarchy.code(&node);
        let g = TannerGraph::from_parity_check(&h).puncture(&discard_set);
        let s = g.syndrome(e);
        let result = decode(&g, &s, &priors, params.max_iterations)?;
        let converged = result.status == DecodeStatus::Converged;
        let entropies: Vec<f64> = result.posteriors.iter().map(entropy4).collect();
        if !converged && result.status != DecodeStatus::Degenerate {
            let threshold = params.threshold(level);
            for j in 0..n {
                if !dropped[j] && entropies[j] > threshold {
                    dropped[j] = true;
                    discard_set.push(j);
                }
            }
        }
        trace.push(LevelRecord {
            level,
            rows: h.num_rows(),
            converged,
            iterations: result.iterations_used,
            discarded: discard_set.len(),
            entropy_mean: entropies.iter().sum::<f64>() / n.max(1) as f64,
            entropy_max: entropies.iter().copied().fold(0.0, f64::max),
        });
        let finished = converged || level == params.max_level;
        if result.status == DecodeStatus::Degenerate || finished {
            discard_set.sort_unstable();
            let verdict = adjudicate(&h, e, &result.tentative, &discard_set);
            let degenerate = result.status == DecodeStatus::Degenerate;
            return Ok(TrialOutcome {
                level_reached: level,
                converged_level: converged.then_some(level),
                degenerate,
                discard_set,
                rows_used: h.num_rows(),
                kept: verdict.kept,
                success: verdict.success && !degenerate,
                trace,
            });
        }
        node = select_next_row(hierarchy, &node, &result.posteriors)?;
        level += 1;
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::{sample_noise, ChannelModel};
    use crate::codes::{build_hierarchy, tests::example, BicycleParams};
    use crate::rng::stream_rng;
    use proptest::prelude::*;
    use rand::Rng;

    const W: Gf4 = Gf4::OMEGA;

    fn flat(h: ParityCheck) -> CodeHierarchy {
        build_hierarchy(h, 0).unwrap()
    }

    fn run_a(h: &ParityCheck, e: &[Gf4], p0: f64) -> TrialOutcome {
        let hier = flat(h.clone());
        run_trial(&hier, &HierarchyNode::root(), e, &ProtocolParams::implementation_a(p0)).unwrap()
    }

    #[test]
    fn noiseless_trial() {
        let h = BicycleParams::from_weights(64, 2, 8).unwrap().sample_code(1).unwrap();
        let out = run_a(&h, &[Gf4::ZERO; 64], 0.0);
        assert_eq!(out.converged_level, Some(1));
        assert!(out.success && out.discard_set.is_empty());
        assert_eq!(out.kept, 64 - h.symplectic_rank());
    }

    #[test]
    fn single_check_trial_matches_enumeration() {
        let row = [W, W, W];
        let h = ParityCheck::from_dense(&[row.to_vec()]).unwrap();
        let e = [Gf4::ONE, Gf4::ZERO, Gf4::ZERO];
        let prior = ProbVec4::depolarizing(0.1);
        // Exact syndrome-conditional marginals; BP is exact on a single check.
        let mut marg = [[0.0; 4]; 3];
        for code in 0..64usize {
            let x: Vec<Gf4> = (0..3).map(|j| Gf4::from_index(code >> (2 * j) & 3)).collect();
            if crate::field::symplectic_dot(&row, &x).unwrap() {
                let w: f64 = x.iter().map(|&v| prior.get(v)).product();
                for j in 0..3 {
                    marg[j][x[j].index()] += w;
                }
            }
        }
        let post: Vec<ProbVec4> = marg
            .iter()
            .map(|m| {
                let mut p = ProbVec4(*m);
                p.normalize();
                p
            })
            .collect();
        let x_hat: Vec<Gf4> = post.iter().map(ProbVec4::argmax).collect();
        // Identity stays most likely on every qubit, so no consistent decoding exists.
        assert!(x_hat.iter().all(|x| x.is_zero()));
        let discard: Vec<usize> =
            (0..3).filter(|&j| entropy4(&post[j]) > werner_entropy(0.1)).collect();
        let residual: Vec<Gf4> = (0..3)
            .map(|j| if discard.contains(&j) { Gf4::ZERO } else { e[j] + x_hat[j] })
            .collect();
        let restricted: Vec<Gf4> = (0..3)
            .map(|j| if discard.contains(&j) { Gf4::ZERO } else { row[j] })
            .collect();
        let expected = residual.iter().all(|x| x.is_zero()) || residual == restricted;

        let out = run_a(&h, &e, 0.1);
        assert_eq!(out.converged_level, None);
        assert_eq!(out.discard_set, discard);
        assert_eq!(out.success, expected);
        assert_eq!(out.kept, 3usize.saturating_sub(1 + discard.len()));
    }

    #[test]
    fn zero_error_with_noisy_prior_converges() {
        let h = BicycleParams::from_weights(16, 2, 4).unwrap().sample_code(2).unwrap();
        let out = run_a(&h, &[Gf4::ZERO; 16], 0.3);
        assert_eq!(out.converged_level, Some(1));
        assert!(out.success);
    }

    #[test]
    fn adjudication_examples() {
        let h = example();
        let mut rng = stream_rng(5, &[]);
        let e = sample_noise(12, &ChannelModel::new(0.4).unwrap(), &mut rng);
        assert_eq!(adjudicate(&h, &e, &e, &[]), Adjudication { success: true, kept: 8 });
        let shifted: Vec<Gf4> = e.iter().zip(h.dense_row(2)).map(|(&a, b)| a + b).collect();
        assert!(adjudicate(&h, &e, &shifted, &[]).success);
        let mut off = e.clone();
        off[3] += Gf4::ONE;
        assert!(!adjudicate(&h, &e, &off, &[]).success);
        // Discarding the only wrong coordinate restores success.
        assert_eq!(adjudicate(&h, &e, &off, &[3]), Adjudication { success: true, kept: 7 });
        // Corrections on discarded coordinates never matter.
        let mut elsewhere = off.clone();
        elsewhere[3] = Gf4::OMEGA2;
        assert!(adjudicate(&h, &e, &elsewhere, &[3]).success);
        assert_eq!(adjudicate(&h, &e, &e, &(0..12).collect::<Vec<_>>()).kept, 0);
    }

    #[test]
    fn next_row_selection() {
        let hier = build_hierarchy(example(), 3).unwrap();
        let node = hier.node([1, 2, 3]).unwrap();
        let uniform = vec![ProbVec4::UNIFORM; 12];
        assert_eq!(select_next_row(&hier, &node, &uniform).unwrap().deleted(), &[2, 3]);

        // Only qubit 11 is uncertain; root rows 0 and 1 cover it, so row 1 returns.
        let mut spike = vec![ProbVec4::point(Gf4::ZERO); 12];
        spike[11] = ProbVec4::UNIFORM;
        assert_eq!(select_next_row(&hier, &node, &spike).unwrap().deleted(), &[2, 3]);
        let node = hier.node([0, 2, 3]).unwrap();
        assert_eq!(select_next_row(&hier, &node, &spike).unwrap().deleted(), &[2, 3]);

        assert!(matches!(
            select_next_row(&hier, &HierarchyNode::root(), &uniform),
            Err(Error::NoRowAvailable)
        ));
    }

    #[test]
    fn next_row_matches_exhaustive_scoring() {
        let hier = build_hierarchy(example(), 2).unwrap();
        let node = hier.node([2, 3]).unwrap();
        let mut rng = stream_rng(17, &[]);
        for _ in 0..50 {
            let posts: Vec<ProbVec4> = (0..12)
                .map(|_| {
                    let mut p = ProbVec4([rng.gen(), rng.gen(), rng.gen(), rng.gen()]);
                    p.normalize();
                    p
                })
                .collect();
            let score = |p: usize| -> f64 {
                hier.root().dense_row(p)
                    .iter()
                    .enumerate()
                    .filter(|(_, x)| !x.is_zero())
                    .map(|(j, _)| entropy4(&posts[j]))
                    .sum()
            };
            let pick = if score(2) >= score(3) { 2 } else { 3 };
            let chosen = select_next_row(&hier, &node, &posts).unwrap();
            assert_eq!(chosen.deleted(), &[5 - pick]);
        }
    }

    #[test]
    fn trace_lines_are_stable() {
        let rec = LevelRecord {
            level: 2,
            rows: 30,
            converged: false,
            iterations: 10,
            discarded: 4,
            entropy_mean: 0.5,
            entropy_max: 1.25,
        };
        assert_eq!(
            rec.to_string(),
            "level=2 rows=30 converged=false iterations=10 discarded=4 entropy_mean=0.500000 entropy_max=1.250000"
        );
    }

    #[test]
    fn start_layer_must_match_levels() {
        let hier = build_hierarchy(example(), 2).unwrap();
        let params = ProtocolParams::implementation_b_with_levels(0.1, 3).unwrap();
        let e = [Gf4::ZERO; 12];
        assert!(run_trial(&hier, &HierarchyNode::root(), &e, &params).is_err());
        assert!(run_trial(&hier, &hier.node([0, 1]).unwrap(), &e, &params).is_ok());
    }

    #[test]
    fn params() {
        let a = ProtocolParams::implementation_a(0.19);
        assert_eq!((a.max_level(), a.max_iterations()), (1, 10));
        assert_eq!(a.threshold(1), werner_entropy(0.19));
        let b = ProtocolParams::implementation_b(0.1, 240, 60);
        assert_eq!(b.max_level(), 59);
        assert_eq!(b.threshold(1), 2.0);
        assert_eq!(b.threshold(59), werner_entropy(0.1));
        assert_eq!(ProtocolParams::implementation_b(0.1, 240, 120).max_level(), 60);
        assert_eq!(default_max_level(4, 1), 1);
    }

    fn noisy_setup(seed: u64, p0: f64) -> (ParityCheck, Vec<Gf4>) {
        let h = BicycleParams::from_weights(32, 2, 4).unwrap().sample_code(seed).unwrap();
        let e = sample_noise(32, &ChannelModel::new(p0).unwrap(), &mut stream_rng(seed, &[1]));
        (h, e)
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(48))]

        #[test]
        fn zero_threshold_discards_everything_unconverged(seed in 0u64..500) {
            let (h, e) = noisy_setup(seed, 0.3);
            let hier = flat(h);
            let params = ProtocolParams::implementation_a(0.3).with_thresholds(vec![0.0]).unwrap();
            let out = run_trial(&hier, &HierarchyNode::root(), &e, &params).unwrap();
            if out.converged_level.is_none() {
                prop_assert_eq!(out.kept, 0);
            }
        }

        #[test]
        fn accounting_identity(seed in 0u64..500, p0 in 0.0f64..0.4) {
            let (h, e) = noisy_setup(seed, p0);
            let out = run_a(&h, &e, p0);
            prop_assert_eq!(out.kept, 32usize.saturating_sub(out.rows_used + out.discard_set.len()));
        }

        #[test]
        fn b_without_early_convergence_reduces_to_a(seed in 0u64..500, levels in 2usize..6) {
            let (h, e) = noisy_setup(seed, 0.25);
            let hier = build_hierarchy(h.clone(), levels - 1).unwrap();
            let start = random_start(&hier, levels, &mut stream_rng(seed, &[2])).unwrap();
            let b = run_trial(&hier, &start, &e, &ProtocolParams::implementation_b_with_levels(0.25, levels).unwrap()).unwrap();
            prop_assume!(b.converged_level.is_none_or(|l| l == levels) && !b.degenerate);
            let a = run_a(&h, &e, 0.25);
            prop_assert_eq!(b.level_reached, levels);
            prop_assert_eq!((a.success, a.kept, &a.discard_set), (b.success, b.kept, &b.discard_set));
        }
    }
}
