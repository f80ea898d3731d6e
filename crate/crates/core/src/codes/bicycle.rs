//! Regular non-CSS bicycle codes.
//!
//! A sparse vector `α` of length `m = n/2` over GF(4) defines the circulant
//! `C[i][j] = α[(j - i) mod m]`. The rows of `H = [C, Cᵀ]` commute pairwise under
//! the symplectic pairing whatever `α` is. Splitting the indices of `α` into
//! `n'` residue classes mod `n'` and placing `u` nonzeros in each class makes `H`
//! `(n'u, 2n'u)`-regular; deleting whole row classes keeps it regular.
//!
//! Class labels `j` are 1-based (`1..=n'`); index `k` of `α` (0-based) belongs to
//! class `k mod n' + 1`, and so does row `r` of `H`.

use rand::seq::index;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::ParityCheck;
use crate::error::{Error, Result};
use crate::field::Gf4;
use crate::rng::{stream_rng, tag};

/// Attempts made by [`BicycleParams::sample_code`] before giving up on finding
/// a full-rank matrix.
pub const MAX_RANK_ATTEMPTS: usize = 32;

/// The generating vector `α` together with its class layout.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SparseVectorSpec {
    pub half_n: usize,
    pub block_count: usize,
    pub per_block_weight: usize,
    /// `(index, value)` with `index < half_n`, sorted by index.
    pub nonzeros: Vec<(usize, Gf4)>,
}

impl SparseVectorSpec {
    /// Reads a dense `α`; the per-class weight is inferred and must be uniform.
    pub fn from_dense(block_count: usize, alpha: &[Gf4]) -> Result<Self> {
        let nonzeros: Vec<(usize, Gf4)> = alpha
            .iter()
            .copied()
            .enumerate()
            .filter(|(_, x)| !x.is_zero())
            .collect();
        if block_count == 0 {
            return Err(Error::InvalidSpec("block count must be positive".into()));
        }
        let per_block_weight = nonzeros.iter().filter(|(k, _)| k % block_count == 0).count();
        let spec = SparseVectorSpec {
            half_n: alpha.len(),
            block_count,
            per_block_weight,
            nonzeros,
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn n(&self) -> usize {
        2 * self.half_n
    }

    pub fn dense(&self) -> Vec<Gf4> {
        let mut alpha = vec![Gf4::ZERO; self.half_n];
        for &(k, x) in &self.nonzeros {
            alpha[k] = x;
        }
        alpha
    }

    pub fn validate(&self) -> Result<()> {
        let (m, nb, u) = (self.half_n, self.block_count, self.per_block_weight);
        if nb == 0 || m == 0 {
            return Err(Error::InvalidSpec("n/2 and n' must be positive".into()));
        }
        if m % nb != 0 {
            return Err(Error::InvalidSpec(format!("n/2 = {m} is not divisible by n' = {nb}")));
        }
        if u == 0 || self.nonzeros.is_empty() {
            return Err(Error::DegenerateSpec("the generating vector has no nonzeros".into()));
        }
        let mut per_class = vec![0usize; nb];
        let mut seen = vec![false; m];
        for &(k, x) in &self.nonzeros {
            if k >= m || x.is_zero() || seen[k] {
                return Err(Error::InvalidSpec(format!("bad entry ({k}, {x})")));
            }
            seen[k] = true;
            per_class[k % nb] += 1;
        }
        if let Some(c) = per_class.iter().position(|&w| w != u) {
            return Err(Error::InvalidSpec(format!(
                "class {} holds {} nonzeros, expected {u}",
                c + 1,
                per_class[c]
            )));
        }
        Ok(())
    }
}

/// Draws `α` with `u` uniformly placed nonzeros per class, values uniform over
/// `{1, ω, ω²}`.
pub fn sample_spec(n: usize, block_count: usize, u: usize, seed: u64) -> Result<SparseVectorSpec> {
    if n == 0 || !n.is_multiple_of(2) {
        return Err(Error::InvalidSpec(format!("n = {n} must be positive and even")));
    }
    let m = n / 2;
    if block_count == 0 || !m.is_multiple_of(block_count) {
        return Err(Error::InvalidSpec(format!("n/2 = {m} is not divisible by n' = {block_count}")));
    }
    if u == 0 {
        return Err(Error::DegenerateSpec("u = 0 gives an all-zero generating vector".into()));
    }
    let class_size = m / block_count;
    if u > class_size {
        return Err(Error::InvalidSpec(format!("u = {u} exceeds class size {class_size}")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut nonzeros = Vec::with_capacity(u * block_count);
    for class in 0..block_count {
        for slot in index::sample(&mut rng, class_size, u) {
            let value = Gf4::NONZERO[rng.gen_range(0..3)];
            nonzeros.push((slot * block_count + class, value));
        }
    }
    nonzeros.sort_by_key(|&(k, _)| k);
    Ok(SparseVectorSpec {
        half_n: m,
        block_count,
        per_block_weight: u,
        nonzeros,
    })
}

/// Builds `H = [C, Cᵀ]` and removes every row whose class label is in `delete`.
pub fn build_bicycle(spec: &SparseVectorSpec, delete: &[usize]) -> Result<ParityCheck> {
    spec.validate()?;
    let (m, nb) = (spec.half_n, spec.block_count);
    let mut drop = vec![false; nb];
    for &j in delete {
        if j == 0 || j > nb {
            return Err(Error::InvalidSpec(format!("class label {j} outside 1..={nb}")));
        }
        drop[j - 1] = true;
    }
    if drop.iter().all(|&d| d) {
        return Err(Error::InvalidSpec("deleting every row class leaves no rows".into()));
    }
    let mut rows = Vec::new();
    let mut ids = Vec::new();
    for r in (0..m).filter(|r| !drop[r % nb]) {
        let mut row: Vec<(usize, Gf4)> = Vec::with_capacity(2 * spec.nonzeros.len());
        for &(k, x) in &spec.nonzeros {
            row.push(((r + k) % m, x));
            row.push((m + (r + m - k) % m, x));
        }
        rows.push(row);
        ids.push(r);
    }
    ParityCheck::with_row_ids(2 * m, rows, ids)
}

/// Picks `count` distinct class labels out of `1..=block_count`, sorted.
pub fn choose_delete_classes(block_count: usize, count: usize, rng: &mut impl Rng) -> Vec<usize> {
    let mut labels: Vec<usize> = index::sample(rng, block_count, count)
        .into_iter()
        .map(|c| c + 1)
        .collect();
    labels.sort_unstable();
    labels
}

/// Shape of a `(d_v, d_c)`-regular bicycle ensemble.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct BicycleParams {
    pub n: usize,
    pub block_count: usize,
    pub per_block_weight: usize,
    pub deleted_classes: usize,
}

impl BicycleParams {
    /// Derives `n' = d_c / (2u)`, `|J| = n' - d_v / u` with `u = gcd(d_v, d_c / 2)`.
    pub fn from_weights(n: usize, dv: usize, dc: usize) -> Result<Self> {
        if dv == 0 || dc == 0 || !dc.is_multiple_of(2) {
            return Err(Error::InvalidSpec(format!(
                "(d_v, d_c) = ({dv}, {dc}) needs d_v > 0 and d_c even"
            )));
        }
        if dv > dc / 2 {
            return Err(Error::InvalidSpec(format!("d_v = {dv} exceeds d_c / 2 = {}", dc / 2)));
        }
        let u = gcd(dv, dc / 2);
        let block_count = dc / (2 * u);
        let params = BicycleParams {
            n,
            block_count,
            per_block_weight: u,
            deleted_classes: block_count - dv / u,
        };
        params.validate()?;
        Ok(params)
    }

    pub fn validate(&self) -> Result<()> {
        if self.n == 0 || !self.n.is_multiple_of(2) {
            return Err(Error::InvalidSpec(format!("n = {} must be positive and even", self.n)));
        }
        if self.block_count == 0 || !(self.n / 2).is_multiple_of(self.block_count) {
            return Err(Error::InvalidSpec(format!(
                "n/2 = {} is not divisible by n' = {}",
                self.n / 2,
                self.block_count
            )));
        }
        if self.per_block_weight == 0 {
            return Err(Error::DegenerateSpec("u = 0".into()));
        }
        if self.per_block_weight > self.n / 2 / self.block_count {
            return Err(Error::InvalidSpec(format!(
                "u = {} exceeds class size {}",
                self.per_block_weight,
                self.n / 2 / self.block_count
            )));
        }
        if self.deleted_classes >= self.block_count {
            return Err(Error::InvalidSpec(format!(
                "|J| = {} must be smaller than n' = {}",
                self.deleted_classes, self.block_count
            )));
        }
        Ok(())
    }

    pub fn dv(&self) -> usize {
        (self.block_count - self.deleted_classes) * self.per_block_weight
    }

    pub fn dc(&self) -> usize {
        2 * self.block_count * self.per_block_weight
    }

    /// Number of rows of the constructed matrix.
    pub fn num_rows(&self) -> usize {
        self.n / 2 / self.block_count * (self.block_count - self.deleted_classes)
    }

    /// Samples a full-rank code. Attempt `a` draws from the stream
    /// `(seed, CODE, a)`; rank-deficient draws move on to the next attempt.
    pub fn sample_code(&self, seed: u64) -> Result<ParityCheck> {
        self.validate()?;
        for attempt in 0..MAX_RANK_ATTEMPTS as u64 {
            let mut rng = stream_rng(seed, &[tag::CODE, attempt]);
            let spec = sample_spec(self.n, self.block_count, self.per_block_weight, rng.gen())?;
            let delete = choose_delete_classes(self.block_count, self.deleted_classes, &mut rng);
            let h = build_bicycle(&spec, &delete)?;
            if h.symplectic_rank() == h.num_rows() {
                return Ok(h);
            }
        }
        Err(Error::RankDeficient {
            attempts: MAX_RANK_ATTEMPTS,
        })
    }
}

fn gcd(a: usize, b: usize) -> usize {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}
