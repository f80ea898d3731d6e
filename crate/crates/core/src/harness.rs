//! Monte Carlo sweeps over code ensembles and error probabilities.
//!
//! Every random draw comes from a stream keyed by the master seed and the
//! draw's role: code `c` from `(CODE, c)`, Implementation B's starting subcode
//! of code `c` from `(DELETE, c)`, and the noise of trial `t` at grid point `k`
//! from `(NOISE, k, t)`. Trial `t` uses code `t % codes`. Per-point statistics
//! are accumulated as integer sums, so results do not depend on how trials are
//! split across workers.

use std::io::Write;

use rayon::prelude::*;

use crate::channel::{sample_noise, ChannelModel};
use crate::codes::{build_hierarchy, BicycleParams, CodeHierarchy, HierarchyNode};
use crate::error::{Error, Result};
use crate::protocol::{
    default_max_level, random_start, run_trial, Implementation, ProtocolParams, TrialOutcome,
};
use crate::rng::{derive_seed, stream_rng, tag};

pub const DEFAULT_CODES_PER_POINT: usize = 10;

#[derive(Clone, Debug, PartialEq)]
pub struct SweepConfig {
    pub n: usize,
    pub dv: usize,
    pub dc: usize,
    pub implementation: Implementation,
    pub p0_grid: Vec<f64>,
    pub trials: usize,
    pub codes: usize,
    pub seed: u64,
    pub max_iterations: usize,
    /// Implementation B's level count; `None` picks `min(n/4, rows - 1)`.
    pub max_level: Option<usize>,
    /// Worker threads; `None` uses all available cores.
    pub threads: Option<usize>,
}

impl SweepConfig {
    pub fn new(n: usize, dv: usize, dc: usize, implementation: Implementation) -> Self {
        SweepConfig {
            n,
            dv,
            dc,
            implementation,
            p0_grid: vec![],
            trials: 1000,
            codes: DEFAULT_CODES_PER_POINT,
            seed: 0,
            max_iterations: crate::decoder::DEFAULT_MAX_ITERATIONS,
            max_level: None,
            threads: None,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.trials == 0 || self.codes == 0 {
            return Err(Error::InvalidParams("trials and codes must be positive".into()));
        }
        if self.max_iterations == 0 {
            return Err(Error::InvalidParams("the iteration limit must be at least 1".into()));
        }
        if let Some(p) = self.p0_grid.iter().find(|p| !(0.0..=1.0).contains(*p)) {
            return Err(Error::InvalidParams(format!("grid value {p} outside [0, 1]")));
        }
        BicycleParams::from_weights(self.n, self.dv, self.dc)?;
        Ok(())
    }

    fn params(&self, p0: f64, rows: usize) -> Result<ProtocolParams> {
        let params = match self.implementation {
            Implementation::A => ProtocolParams::implementation_a(p0),
            Implementation::B => {
                let levels = self.max_level.unwrap_or_else(|| default_max_level(self.n, rows));
                ProtocolParams::implementation_b_with_levels(p0, levels)?
            }
        };
        params.with_max_iterations(self.max_iterations)
    }
}

/// Aggregated statistics of one grid point.
#[derive(Clone, Debug, PartialEq)]
pub struct SweepRecord {
    pub implementation: Implementation,
    pub n: usize,
    pub dv: usize,
    pub dc: usize,
    pub p0: f64,
    pub trials: usize,
    pub codes: usize,
    pub yield_mean: f64,
    pub yield_stderr: f64,
    pub success_rate: f64,
    pub mean_discarded: f64,
    pub mean_iterations: f64,
    pub mean_level: f64,
    pub seed: u64,
}

/// Integer sums over trials; merging is exact and order-independent.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct Accumulator {
    pub trials: u64,
    pub output: u64,
    pub output_sq: u128,
    pub successes: u64,
    pub discarded: u64,
    pub iterations: u64,
    pub levels: u64,
}

impl Accumulator {
    pub fn add(&mut self, out: &TrialOutcome) {
        let y = out.output_pairs() as u64;
        self.trials += 1;
        self.output += y;
        self.output_sq += (y as u128) * (y as u128);
        self.successes += out.success as u64;
        self.discarded += out.discard_set.len() as u64;
        self.iterations += out.total_iterations() as u64;
        self.levels += out.level_reached as u64;
    }

    pub fn merge(mut self, other: Accumulator) -> Accumulator {
        self.trials += other.trials;
        self.output += other.output;
        self.output_sq += other.output_sq;
        self.successes += other.successes;
        self.discarded += other.discarded;
        self.iterations += other.iterations;
        self.levels += other.levels;
        self
    }

    /// Mean output pairs per input pair.
    pub fn yield_mean(&self, n: usize) -> f64 {
        self.output as f64 / (self.trials as f64 * n as f64)
    }

    /// Standard error of [`Self::yield_mean`] from the sample variance.
    pub fn yield_stderr(&self, n: usize) -> f64 {
        stderr(self.trials, self.output as i128, self.output_sq) / n as f64
    }
}

/// Standard error of a mean from integer sums of values and squares.
fn stderr(count: u64, sum: i128, sum_sq: u128) -> f64 {
    if count < 2 {
        return 0.0;
    }
    let t = count as u128;
    let spread = t * sum_sq - sum.unsigned_abs() * sum.unsigned_abs();
    (spread as f64 / (t * (t - 1)) as f64 / count as f64).sqrt()
}

/// Shared per-sweep state: sampled codes and their starting subcodes.
struct Ensemble {
    hierarchies: Vec<CodeHierarchy>,
    starts: Vec<HierarchyNode>,
}

fn build_ensemble(config: &SweepConfig) -> Result<Ensemble> {
    let layout = BicycleParams::from_weights(config.n, config.dv, config.dc)?;
    let rows = layout.num_rows();
    let levels = match config.implementation {
        Implementation::A => 1,
        Implementation::B => config.max_level.unwrap_or_else(|| default_max_level(config.n, rows)),
    };
    let mut hierarchies = Vec::with_capacity(config.codes);
    let mut starts = Vec::with_capacity(config.codes);
    for c in 0..config.codes as u64 {
        let code = layout.sample_code(derive_seed(config.seed, &[tag::CODE, c]))?;
        let hierarchy = build_hierarchy(code, levels - 1)?;
        let start = random_start(&hierarchy, levels, &mut stream_rng(config.seed, &[tag::DELETE, c]))?;
        hierarchies.push(hierarchy);
        starts.push(start);
    }
    Ok(Ensemble {
        hierarchies,
        starts,
    })
}

fn with_pool<T: Send>(threads: Option<usize>, job: impl FnOnce() -> T + Send) -> Result<T> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads.unwrap_or(0))
        .build()
        .map_err(|e| Error::InvalidParams(format!("thread pool: {e}")))?;
    Ok(pool.install(job))
}

fn trial_noise(config: &SweepConfig, point: usize, trial: usize, p0: f64) -> Result<Vec<crate::Gf4>> {
    let model = ChannelModel::new(p0)?;
    let mut rng = stream_rng(config.seed, &[tag::NOISE, point as u64, trial as u64]);
    Ok(sample_noise(config.n, &model, &mut rng))
}

fn record(config: &SweepConfig, p0: f64, acc: &Accumulator) -> SweepRecord {
    let t = acc.trials as f64;
    SweepRecord {
        implementation: config.implementation,
        n: config.n,
        dv: config.dv,
        dc: config.dc,
        p0,
        trials: config.trials,
        codes: config.codes,
        yield_mean: acc.yield_mean(config.n),
        yield_stderr: acc.yield_stderr(config.n),
        success_rate: acc.successes as f64 / t,
        mean_discarded: acc.discarded as f64 / t,
        mean_iterations: acc.iterations as f64 / t,
        mean_level: acc.levels as f64 / t,
        seed: config.seed,
    }
}

fn point_trial(
    config: &SweepConfig,
    ensemble: &Ensemble,
    point: usize,
    p0: f64,
    trial: usize,
) -> Result<TrialOutcome> {
    let c = trial % config.codes;
    let hierarchy = &ensemble.hierarchies[c];
    let params = config.params(p0, hierarchy.root().num_rows())?;
    let e = trial_noise(config, point, trial, p0)?;
    run_trial(hierarchy, &ensemble.starts[c], &e, &params)
}

/// One record per grid point, in grid order.
pub fn run_sweep(config: &SweepConfig) -> Result<Vec<SweepRecord>> {
    config.validate()?;
    let ensemble = build_ensemble(config)?;
    with_pool(config.threads, || {
        config
            .p0_grid
            .iter()
            .enumerate()
            .map(|(point, &p0)| {
                let acc = (0..config.trials)
                    .into_par_iter()
                    .map(|t| point_trial(config, &ensemble, point, p0, t))
                    .try_fold(Accumulator::default, |mut acc, out| {
                        acc.add(&out?);
                        Ok::<_, Error>(acc)
                    })
                    .try_reduce(Accumulator::default, |a, b| Ok(a.merge(b)))?;
                Ok(record(config, p0, &acc))
            })
            .collect()
    })?
}

/// A and B on the same codes and noise vectors, with paired statistics.
#[derive(Clone, Debug, PartialEq)]
pub struct PairedRecord {
    pub a: SweepRecord,
    pub b: SweepRecord,
    /// Mean of the per-trial yield difference `B - A`.
    pub diff_mean: f64,
    pub diff_stderr: f64,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
struct PairedAccumulator {
    a: Accumulator,
    b: Accumulator,
    diff: i128,
    diff_sq: u128,
}

impl PairedAccumulator {
    fn add(&mut self, a: &TrialOutcome, b: &TrialOutcome) {
        self.a.add(a);
        self.b.add(b);
        let d = b.output_pairs() as i128 - a.output_pairs() as i128;
        self.diff += d;
        self.diff_sq += d.unsigned_abs() * d.unsigned_abs();
    }

    fn merge(self, other: Self) -> Self {
        PairedAccumulator {
            a: self.a.merge(other.a),
            b: self.b.merge(other.b),
            diff: self.diff + other.diff,
            diff_sq: self.diff_sq + other.diff_sq,
        }
    }
}

/// Runs both configs with common random numbers. They must agree on
/// everything except the implementation; B's root codes are A's codes.
pub fn compare_implementations(
    config_a: &SweepConfig,
    config_b: &SweepConfig,
) -> Result<Vec<PairedRecord>> {
    config_a.validate()?;
    config_b.validate()?;
    let mut aligned = config_b.clone();
    aligned.implementation = config_a.implementation;
    aligned.max_level = config_a.max_level;
    if aligned != *config_a
        || config_a.implementation != Implementation::A
        || config_b.implementation != Implementation::B
    {
        return Err(Error::InvalidParams(
            "paired configs must be A then B and otherwise identical".into(),
        ));
    }
    let ens_a = build_ensemble(config_a)?;
    let ens_b = build_ensemble(config_b)?;
    with_pool(config_a.threads, || {
        config_a
            .p0_grid
            .iter()
            .enumerate()
            .map(|(point, &p0)| {
                let acc = (0..config_a.trials)
                    .into_par_iter()
                    .map(|t| {
                        let a = point_trial(config_a, &ens_a, point, p0, t)?;
                        let b = point_trial(config_b, &ens_b, point, p0, t)?;
                        Ok::<_, Error>((a, b))
                    })
                    .try_fold(PairedAccumulator::default, |mut acc, pair| {
                        let (a, b) = pair?;
                        acc.add(&a, &b);
                        Ok::<_, Error>(acc)
                    })
                    .try_reduce(PairedAccumulator::default, |x, y| Ok(x.merge(y)))?;
                let n = config_a.n as f64;
                Ok(PairedRecord {
                    a: record(config_a, p0, &acc.a),
                    b: record(config_b, p0, &acc.b),
                    diff_mean: acc.diff as f64 / (acc.a.trials as f64 * n),
                    diff_stderr: stderr(acc.a.trials, acc.diff, acc.diff_sq) / n,
                })
            })
            .collect()
    })?
}

pub const CSV_HEADER: [&str; 14] = [
    "impl",
    "n",
    "dv",
    "dc",
    "p0",
    "trials",
    "codes",
    "yield_mean",
    "yield_stderr",
    "success_rate",
    "mean_discarded",
    "mean_iterations",
    "mean_level",
    "seed",
];

/// Writes the results file: a header row, then one row per record. Floats use
/// the shortest decimal form that parses back to the same value.
pub fn write_csv<W: Write>(writer: W, records: &[SweepRecord]) -> Result<()> {
    let mut out = csv::Writer::from_writer(writer);
    out.write_record(CSV_HEADER)?;
    for r in records {
        out.write_record([
            r.implementation.to_string(),
            r.n.to_string(),
            r.dv.to_string(),
            r.dc.to_string(),
            r.p0.to_string(),
            r.trials.to_string(),
            r.codes.to_string(),
            r.yield_mean.to_string(),
            r.yield_stderr.to_string(),
            r.success_rate.to_string(),
            r.mean_discarded.to_string(),
            r.mean_iterations.to_string(),
            r.mean_level.to_string(),
            r.seed.to_string(),
        ])?;
    }
    out.flush()?;
    Ok(())
}

pub fn to_csv_string(records: &[SweepRecord]) -> Result<String> {
    let mut buf = Vec::new();
    write_csv(&mut buf, records)?;
    Ok(String::from_utf8(buf).expect("csv output is ASCII"))
}
