//! The selection benchmark and a small harness that runs it over a grid of
//! worker counts and placements.
//!
//! ```text
//! dom(1..n).
//! sel(X) :- dom(X), not nsel(X).
//! nsel(X) :- dom(X), not sel(X).
//! :- sel(X), sel(Y), X != Y.
//! p(X1,...,X6) :- sel(X1), ..., sel(X6).
//! ```
//!
//! At most one `sel(x)` can hold, so there are `n + 1` answer sets, while
//! the ground program has `n^6` rules for `p`.

use std::fmt::Write as _;
use std::time::Duration;

use thiserror::Error;

use crate::program::{parse_program, GroundProgram};
use crate::runtime::{distributed_solve, Distribution, RunStats, RuntimeConfig, RuntimeError, Scheduler, Transport};

pub const TOY_ARITY: u32 = 6;

#[derive(Debug, Error)]
pub enum ToyError {
    #[error("domain size must be at least 1")]
    EmptyDomain,
    #[error("arity must be at least 1")]
    ZeroArity,
    #[error("{n}^{arity} rules is too large to generate")]
    TooLarge { n: u32, arity: u32 },
}

/// Closed-form rule count: `n + 2n + n(n-1) + n^arity`.
pub fn toy_rule_count(n: u32, arity: u32) -> Option<u64> {
    let n64 = n as u64;
    let p = n64.checked_pow(arity)?;
    Some(n64 + 2 * n64 + n64 * n64.saturating_sub(1) + p)
}

/// Ground text of the benchmark with `p` of the given arity.
pub fn gen_toy_with_arity(n: u32, arity: u32) -> Result<String, ToyError> {
    if n == 0 {
        return Err(ToyError::EmptyDomain);
    }
    if arity == 0 {
        return Err(ToyError::ZeroArity);
    }
    match toy_rule_count(n, arity) {
        Some(c) if c <= 50_000_000 => {}
        _ => return Err(ToyError::TooLarge { n, arity }),
    }
    let mut out = String::new();
    for x in 1..=n {
        writeln!(out, "dom({x}).").unwrap();
    }
    for x in 1..=n {
        writeln!(out, "sel({x}) :- dom({x}), not nsel({x}).").unwrap();
    }
    for x in 1..=n {
        writeln!(out, "nsel({x}) :- dom({x}), not sel({x}).").unwrap();
    }
    for x in 1..=n {
        for y in 1..=n {
            if x != y {
                writeln!(out, ":- sel({x}), sel({y}).").unwrap();
            }
        }
    }
    let mut args = vec![1u32; arity as usize];
    loop {
        let head: Vec<String> = args.iter().map(u32::to_string).collect();
        let mut body: Vec<u32> = args.clone();
        body.sort_unstable();
        body.dedup();
        let body: Vec<String> = body.iter().map(|x| format!("sel({x})")).collect();
        writeln!(out, "p({}) :- {}.", head.join(","), body.join(", ")).unwrap();
        // odometer over 1..=n, last position fastest
        let mut i = args.len();
        loop {
            if i == 0 {
                return Ok(out);
            }
            i -= 1;
            if args[i] < n {
                args[i] += 1;
                break;
            }
            args[i] = 1;
        }
    }
}

pub fn gen_toy(n: u32) -> Result<String, ToyError> {
    gen_toy_with_arity(n, TOY_ARITY)
}

pub fn toy_program(n: u32, arity: u32) -> Result<GroundProgram, ToyError> {
    let text = gen_toy_with_arity(n, arity)?;
    Ok(parse_program(&text).expect("generated text always parses"))
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BenchConfig {
    pub sizes: Vec<u32>,
    pub arity: u32,
    pub workers: Vec<usize>,
    pub distributions: Vec<Distribution>,
    pub transport: Transport,
    pub seed: u64,
}

impl Default for BenchConfig {
    fn default() -> Self {
        BenchConfig {
            sizes: vec![2],
            arity: TOY_ARITY,
            workers: (1..=5).collect(),
            distributions: vec![Distribution::RoundRobin, Distribution::Greedy],
            transport: Transport::Sim,
            seed: 0,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BenchRow {
    pub n: u32,
    pub rules: usize,
    pub stats: RunStats,
}

#[derive(Debug, Error)]
pub enum BenchError {
    #[error(transparent)]
    Toy(#[from] ToyError),
    #[error("n = {n}, k = {k}, {distribution}: {source}")]
    Run {
        n: u32,
        k: usize,
        distribution: Distribution,
        source: RuntimeError,
    },
}

/// Runs every size over the grid of worker counts and placements.
pub fn run_bench(cfg: &BenchConfig) -> Result<Vec<BenchRow>, BenchError> {
    let mut rows = Vec::new();
    for &n in &cfg.sizes {
        let program = toy_program(n, cfg.arity)?;
        for &k in &cfg.workers {
            for &distribution in &cfg.distributions {
                let rc = RuntimeConfig {
                    workers: k,
                    distribution,
                    transport: cfg.transport,
                    scheduler: Scheduler::Random { seed: cfg.seed },
                    max_models: None,
                    record_transcript: false,
                };
                let out = distributed_solve(&program, &rc).map_err(|source| BenchError::Run {
                    n,
                    k,
                    distribution,
                    source,
                })?;
                rows.push(BenchRow {
                    n,
                    rules: program.len(),
                    stats: out.stats,
                });
            }
        }
    }
    Ok(rows)
}

const HEADER: &str = "n,rules,k,distribution,models,decisions,backtracks,\
propagation_messages,coordination_messages,token_messages,initial_cut,final_cut";

/// CSV with a header row. Wall time is only included on request so that
/// the default output is reproducible byte for byte.
pub fn bench_csv(rows: &[BenchRow], timing: bool) -> String {
    let mut out = String::from(HEADER);
    if timing {
        out.push_str(",wall_ms");
    }
    out.push('\n');
    for r in rows {
        let s = &r.stats;
        write!(
            out,
            "{},{},{},{},{},{},{},{},{},{},{},{}",
            r.n,
            r.rules,
            s.k,
            s.distribution_label(),
            s.models,
            s.decisions,
            s.backtracks,
            s.propagation_messages,
            s.coordination_messages,
            s.token_messages,
            s.initial_cut,
            s.final_cut
        )
        .unwrap();
        if timing {
            write!(out, ",{:.3}", millis(s.wall_time)).unwrap();
        }
        out.push('\n');
    }
    out
}

fn millis(d: Duration) -> f64 {
    d.as_secs_f64() * 1000.0
}
