use std::fmt::Write as _;
use std::fs;
use std::io::{self, Write};
use std::path::Path;

use anyhow::{anyhow, bail, Context, Result};
use clap::error::ErrorKind;
use clap::CommandFactory;
use qldpc_edp::channel::{sample_noise, ChannelModel};
use qldpc_edp::codes::{build_bicycle, build_hierarchy, sample_spec, HierarchyNode, ParityCheck, SparseVectorSpec};
use qldpc_edp::decoder::{decode, DecodeStatus};
use qldpc_edp::field::entropy4;
use qldpc_edp::harness::{compare_implementations, run_sweep, write_csv, SweepConfig, SweepRecord};
use qldpc_edp::protocol::{
    run_recurrence_baseline, run_trial, simulate_recurrence, BellDiag, Implementation, ProtocolParams,
};
use qldpc_edp::rng::{stream_rng, tag};
use qldpc_edp::tanner::TannerGraph;
use qldpc_edp::{Gf4, ProbVec4};
use rand::seq::index;
use rand::Rng;

use crate::{Cli, Command, CompareArgs, ConstructArgs, DecodeArgs, EnsembleArgs, RecurrenceArgs, SweepArgs};

pub fn run(cli: Cli) -> Result<()> {
    let Cli {
        seed,
        threads,
        out,
        command,
        ..
    } = cli;
    let out = out.as_deref();
    match command {
        Command::Construct(a) => construct(a, seed, out),
        Command::Decode(a) => decode_one(a, seed),
        Command::Sweep(a) => sweep(a, seed, threads, out),
        Command::Compare(a) => compare(a, seed, threads, out),
        Command::Recurrence(a) => recurrence(a, seed, out),
    }
}

/// Exits with a clap usage error (status 2).
fn usage(msg: impl std::fmt::Display) -> ! {
    Cli::command().error(ErrorKind::ValueValidation, msg).exit()
}

fn parse_symbols(text: &str) -> Result<Vec<Gf4>> {
    text.chars()
        .filter(|c| !c.is_whitespace() && *c != ',')
        .map(|c| Gf4::from_symbol(c).map_err(Into::into))
        .collect()
}

fn format_symbols(v: &[Gf4]) -> String {
    v.iter().map(|x| x.symbol()).collect()
}

// construct -------------------------------------------------------------------

fn construct(a: ConstructArgs, seed: u64, out: Option<&Path>) -> Result<()> {
    let n_prime = a.n_prime.unwrap_or_else(|| usage("construct needs --n-prime"));
    let spec = match &a.alpha {
        Some(text) => {
            let alpha = parse_symbols(text)?;
            if let Some(n) = a.n {
                if n != 2 * alpha.len() {
                    usage(format!("--n {n} does not match an --alpha of length {}", alpha.len()));
                }
            }
            let spec = SparseVectorSpec::from_dense(n_prime, &alpha)?;
            if let Some(u) = a.u {
                let weight = alpha.iter().filter(|x| !x.is_zero()).count();
                if u * n_prime != weight {
                    usage(format!("--u {u} does not match the {weight} nonzeros of --alpha"));
                }
            }
            spec
        }
        None => {
            let n = a.n.unwrap_or_else(|| usage("construct needs --n or --alpha"));
            let u = a.u.unwrap_or_else(|| usage("construct needs --u or --alpha"));
            sample_spec(n, n_prime, u, seed)?
        }
    };
    let h = build_bicycle(&spec, &a.delete)?;
    let text = h.to_text();
    print!("{text}");
    match h.regularity() {
        (Some(c), Some(r)) => println!("regularity: column weight {c}, row weight {r}"),
        (c, r) => println!("regularity: irregular (columns {c:?}, rows {r:?})"),
    }
    let rank = h.symplectic_rank();
    let full = if rank == h.num_rows() { "full rank" } else { "rank deficient" };
    println!("rank: {rank} of {} rows ({full})", h.num_rows());
    println!("commuting: {}", h.verify_commuting());
    if let Some(path) = out {
        fs::write(path, text).with_context(|| format!("cannot write {}", path.display()))?;
    }
    Ok(())
}

// decode ----------------------------------------------------------------------

fn read_code(path: &Path) -> Result<ParityCheck> {
    let text = fs::read_to_string(path).with_context(|| format!("cannot read {}", path.display()))?;
    text.parse()
        .map_err(|e| anyhow!("{e}"))
        .with_context(|| format!("malformed code file {}", path.display()))
}

fn weighted_error(n: usize, weight: usize, seed: u64) -> Vec<Gf4> {
    if weight > n {
        usage(format!("--weight {weight} exceeds the block length {n}"));
    }
    let mut rng = stream_rng(seed, &[tag::NOISE]);
    let mut e = vec![Gf4::ZERO; n];
    for j in index::sample(&mut rng, n, weight) {
        e[j] = Gf4::NONZERO[rng.gen_range(0..3)];
    }
    e
}

fn decode_one(a: DecodeArgs, seed: u64) -> Result<()> {
    let path = a.code.as_deref().unwrap_or_else(|| usage("decode needs --code"));
    let h = read_code(path)?;
    let n = h.n();
    let e = match (&a.error, a.weight) {
        (Some(text), _) => {
            let e = parse_symbols(text)?;
            if e.len() != n {
                usage(format!("--error has {} symbols but the code has n = {n}", e.len()));
            }
            e
        }
        (None, Some(w)) => weighted_error(n, w, seed),
        (None, None) => sample_noise(n, &ChannelModel::new(a.p0)?, &mut stream_rng(seed, &[tag::NOISE])),
    };
    let g = TannerGraph::from_parity_check(&h);
    let s = g.syndrome(&e);
    let priors = vec![ProbVec4::depolarizing(a.p0); n];
    let result = decode(&g, &s, &priors, a.max_iterations)?;

    let syndrome: String = s.iter().map(|&b| if b { '1' } else { '0' }).collect();
    println!("error: {}", format_symbols(&e));
    println!("syndrome: {syndrome}");
    let status = match result.status {
        DecodeStatus::Converged => "converged",
        DecodeStatus::MaxIterations => "not converged",
        DecodeStatus::Degenerate => "degenerate",
    };
    let x_hat = if result.tentative.iter().all(|x| x.is_zero()) {
        "identity".to_owned()
    } else {
        format_symbols(&result.tentative)
    };
    println!("{status}, iterations={}, x̃={x_hat}", result.iterations_used);
    let mut entropies = String::new();
    for q in &result.posteriors {
        write!(entropies, " {:.4}", entropy4(q))?;
    }
    println!("entropies:{entropies}");

    let params = ProtocolParams::implementation_a(a.p0).with_max_iterations(a.max_iterations)?;
    let hierarchy = build_hierarchy(h, 0)?;
    let outcome = run_trial(&hierarchy, &HierarchyNode::root(), &e, &params)?;
    println!("protocol A:");
    for level in &outcome.trace {
        println!("  {level}");
    }
    println!(
        "  success={} kept={} discarded={} output_pairs={}",
        outcome.success,
        outcome.kept,
        outcome.discard_set.len(),
        outcome.output_pairs()
    );
    Ok(())
}

// sweep and compare -----------------------------------------------------------

fn parse_grid(text: &str) -> Result<Vec<f64>> {
    let parts: Vec<&str> = text.split(':').collect();
    match parts.as_slice() {
        [start, stop, step] => {
            let (start, stop, step): (f64, f64, f64) = (start.trim().parse()?, stop.trim().parse()?, step.trim().parse()?);
            if !(step > 0.0) || stop < start {
                bail!("grid {text:?} needs start <= stop and a positive step");
            }
            let count = ((stop - start) / step + 1e-9).floor() as usize + 1;
            // Rounding keeps 0.01 + 2 * 0.01 printing as 0.03.
            Ok((0..count)
                .map(|k| ((start + k as f64 * step) * 1e12).round() / 1e12)
                .collect())
        }
        [_] => text
            .split(',')
            .filter(|s| !s.trim().is_empty())
            .map(|s| s.trim().parse().with_context(|| format!("bad grid value {s:?}")))
            .collect(),
        _ => bail!("grid {text:?} is neither a list nor start:stop:step"),
    }
}

fn sweep_config(e: &EnsembleArgs, imp: Implementation, seed: u64, threads: Option<usize>) -> Result<SweepConfig> {
    let grid = parse_grid(&e.p0_grid)?;
    if grid.is_empty() {
        bail!("empty p0 grid");
    }
    Ok(SweepConfig {
        p0_grid: grid,
        trials: e.trials,
        codes: e.codes,
        seed,
        max_iterations: e.max_iterations,
        max_level: e.max_level,
        threads,
        ..SweepConfig::new(e.n, e.dv, e.dc, imp)
    })
}

/// Writes CSV to `out`, or to stdout when no path is given.
fn emit_csv(records: &[SweepRecord], out: Option<&Path>) -> Result<()> {
    match out {
        Some(path) => {
            let file = fs::File::create(path).with_context(|| format!("cannot write {}", path.display()))?;
            write_csv(file, records)?;
        }
        None => write_csv(io::stdout().lock(), records)?,
    }
    Ok(())
}

/// Summary goes to stdout when the CSV has its own file, else to stderr.
fn summary_sink(out: Option<&Path>) -> Box<dyn Write> {
    if out.is_some() {
        Box::new(io::stdout())
    } else {
        Box::new(io::stderr())
    }
}

fn sweep(a: SweepArgs, seed: u64, threads: Option<usize>, out: Option<&Path>) -> Result<()> {
    let cfg = sweep_config(&a.ensemble, a.implementation, seed, threads)?;
    let records = run_sweep(&cfg)?;
    emit_csv(&records, out)?;
    let mut w = summary_sink(out);
    writeln!(
        w,
        "{:>8} {:>10} {:>10} {:>9} {:>10} {:>10} {:>7}",
        "p0", "yield", "stderr", "success", "discarded", "iterations", "level"
    )?;
    for r in &records {
        writeln!(
            w,
            "{:>8} {:>10.5} {:>10.5} {:>9.4} {:>10.2} {:>10.2} {:>7.2}",
            r.p0, r.yield_mean, r.yield_stderr, r.success_rate, r.mean_discarded, r.mean_iterations, r.mean_level
        )?;
    }
    Ok(())
}

fn compare(a: CompareArgs, seed: u64, threads: Option<usize>, out: Option<&Path>) -> Result<()> {
    let cfg_a = sweep_config(&a.ensemble, Implementation::A, seed, threads)?;
    let cfg_b = SweepConfig {
        implementation: Implementation::B,
        ..cfg_a.clone()
    };
    let paired = compare_implementations(&cfg_a, &cfg_b)?;
    let records: Vec<SweepRecord> = paired
        .iter()
        .map(|p| p.a.clone())
        .chain(paired.iter().map(|p| p.b.clone()))
        .collect();
    emit_csv(&records, out)?;
    let mut w = summary_sink(out);
    writeln!(w, "{:>8} {:>10} {:>10} {:>10} {:>10}", "p0", "D_A", "D_B", "D_B-D_A", "stderr")?;
    for p in &paired {
        writeln!(
            w,
            "{:>8} {:>10.5} {:>10.5} {:>10.5} {:>10.5}",
            p.a.p0, p.a.yield_mean, p.b.yield_mean, p.diff_mean, p.diff_stderr
        )?;
    }
    Ok(())
}

// recurrence ------------------------------------------------------------------

fn recurrence(a: RecurrenceArgs, seed: u64, out: Option<&Path>) -> Result<()> {
    let start = BellDiag::new(1.0 - a.p0, a.p0 / 3.0, a.p0 / 3.0, a.p0 / 3.0)?;
    let exact = run_recurrence_baseline(&start, a.rounds);
    let simulated = (a.pairs > 0)
        .then(|| simulate_recurrence(&start, a.rounds, a.pairs, &mut stream_rng(seed, &[tag::RECURRENCE])));

    let mut csv = String::from("round,acceptance,fidelity,yield");
    let mut table = format!("{:>5} {:>11} {:>10} {:>10}", "round", "acceptance", "fidelity", "yield");
    if simulated.is_some() {
        csv.push_str(",simulated_fidelity,simulated_stderr");
        write!(table, " {:>12} {:>10}", "simulated", "stderr")?;
    }
    csv.push('\n');
    table.push('\n');
    writeln!(csv, "0,1,{},1", start.fidelity())?;
    writeln!(table, "{:>5} {:>11} {:>10.6} {:>10.6}", 0, "", start.fidelity(), 1.0)?;
    for (k, step) in exact.steps.iter().enumerate() {
        write!(csv, "{},{},{},{}", k + 1, step.acceptance, step.fidelity, step.yield_)?;
        write!(
            table,
            "{:>5} {:>11.6} {:>10.6} {:>10.6}",
            k + 1,
            step.acceptance,
            step.fidelity,
            step.yield_
        )?;
        if let Some(sim) = &simulated {
            let r = &sim[k];
            write!(csv, ",{},{}", r.fidelity(), r.fidelity_stderr())?;
            write!(table, " {:>12.6} {:>10.6}", r.fidelity(), r.fidelity_stderr())?;
        }
        csv.push('\n');
        table.push('\n');
    }
    print!("{table}");
    if let Some(path) = out {
        fs::write(path, csv).with_context(|| format!("cannot write {}", path.display()))?;
    }
    Ok(())
}
