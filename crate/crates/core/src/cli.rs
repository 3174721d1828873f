//! Command-line front end. [`run`] does the work and returns the exit code;
//! the binary only parses arguments and reports errors.
//!
//! Exit codes: `solve` returns 10 when at least one answer set was found
//! and 20 when none exists; `check` returns 0 for an answer set and 2 for
//! anything else; every command returns 1 on errors.

use std::fs;
use std::io::{self, Read, Write};
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::coloring::{answer_set_of, Solver};
use crate::oracle::{check_answer_set, Interpretation};
use crate::program::{parse_program, GroundProgram};
use crate::rdg::{dump_classic, dump_prime, RdgClassic, RdgPrime};
use crate::runtime::{distributed_solve, Distribution, RunStats, RuntimeConfig, Scheduler, Transport};
use crate::toy::{bench_csv, gen_toy_with_arity, run_bench, BenchConfig, TOY_ARITY};

pub const EXIT_SAT: i32 = 10;
pub const EXIT_UNSAT: i32 = 20;
pub const EXIT_NOT_ANSWER_SET: i32 = 2;

#[derive(Debug, Parser)]
#[command(
    name = "dasc",
    version,
    about = "Answer sets as rule-graph colorings, sequential or over k workers"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Enumerate answer sets.
    Solve(SolveArgs),
    /// Test whether a set of atoms is an answer set.
    Check(CheckArgs),
    /// Print the ground selection benchmark.
    GenToy(GenToyArgs),
    /// Run the benchmark over worker counts and placements, as CSV.
    Bench(BenchArgs),
    /// Print the dependency graph as `kind src dst` lines.
    DumpGraph(DumpGraphArgs),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum DistributionArg {
    Rr,
    Greedy,
}

impl From<DistributionArg> for Distribution {
    fn from(d: DistributionArg) -> Self {
        match d {
            DistributionArg::Rr => Distribution::RoundRobin,
            DistributionArg::Greedy => Distribution::Greedy,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum TransportArg {
    Sim,
    Proc,
}

impl From<TransportArg> for Transport {
    fn from(t: TransportArg) -> Self {
        match t {
            TransportArg::Sim => Transport::Sim,
            TransportArg::Proc => Transport::Proc,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum GraphKind {
    Prime,
    Classic,
}

#[derive(Debug, Args)]
pub struct SolveArgs {
    /// Program file (`-` or omitted: standard input).
    pub input: Option<PathBuf>,
    /// Number of workers; 1 runs the sequential engine.
    #[arg(short = 'k', long, default_value_t = 1, value_parser = clap::value_parser!(u32).range(1..))]
    pub workers: u32,
    #[arg(long, value_enum, default_value_t = DistributionArg::Rr)]
    pub distribution: DistributionArg,
    #[arg(long, value_enum, default_value_t = TransportArg::Sim)]
    pub transport: TransportArg,
    /// Scheduler seed for the simulated transport.
    #[arg(long, env = "DASC_SEED", default_value_t = 0)]
    pub seed: u64,
    /// Stop after this many answer sets (0: all).
    #[arg(long, default_value_t = 0)]
    pub models: usize,
    /// Print run statistics after the answer sets.
    #[arg(long)]
    pub stats: bool,
    /// Include wall time in the statistics.
    #[arg(long)]
    pub timing: bool,
    /// Trace operator applications on stderr (sequential engine only).
    #[arg(long)]
    pub trace: bool,
}

#[derive(Debug, Args)]
pub struct CheckArgs {
    pub program: PathBuf,
    /// One atom per line; blank lines and `%` comments are ignored.
    pub model: PathBuf,
}

#[derive(Debug, Args)]
pub struct GenToyArgs {
    /// Domain size.
    pub n: u32,
    #[arg(long, default_value_t = TOY_ARITY)]
    pub arity: u32,
}

#[derive(Debug, Args)]
pub struct BenchArgs {
    /// Domain sizes, comma separated.
    #[arg(short, long, value_delimiter = ',', default_value = "2")]
    pub n: Vec<u32>,
    #[arg(long, default_value_t = TOY_ARITY)]
    pub arity: u32,
    /// Worker counts, comma separated.
    #[arg(short = 'k', long, value_delimiter = ',', default_value = "1,2,3,4,5")]
    pub workers: Vec<usize>,
    #[arg(long, value_enum, default_value_t = TransportArg::Sim)]
    pub transport: TransportArg,
    #[arg(long, env = "DASC_SEED", default_value_t = 0)]
    pub seed: u64,
    /// Add a wall-time column.
    #[arg(long)]
    pub timing: bool,
}

#[derive(Debug, Args)]
pub struct DumpGraphArgs {
    pub input: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = GraphKind::Prime)]
    pub graph: GraphKind,
    /// Append edge and vertex counts.
    #[arg(long)]
    pub stats: bool,
}

pub fn run(cli: Cli, out: &mut dyn Write) -> Result<i32> {
    match cli.command {
        Command::Solve(a) => run_solve(&a, out),
        Command::Check(a) => run_check(&a, out),
        Command::GenToy(a) => {
            out.write_all(gen_toy_with_arity(a.n, a.arity)?.as_bytes())?;
            Ok(0)
        }
        Command::Bench(a) => run_bench_cmd(&a, out),
        Command::DumpGraph(a) => run_dump_graph(&a, out),
    }
}

fn read_input(path: Option<&Path>) -> Result<String> {
    match path {
        None => read_stdin(),
        Some(p) if p == Path::new("-") => read_stdin(),
        Some(p) => fs::read_to_string(p).with_context(|| format!("reading {}", p.display())),
    }
}

fn read_stdin() -> Result<String> {
    let mut s = String::new();
    io::stdin().read_to_string(&mut s).context("reading standard input")?;
    Ok(s)
}

fn load_program(path: Option<&Path>) -> Result<GroundProgram> {
    let text = read_input(path)?;
    let name = path.map_or("<stdin>".to_string(), |p| p.display().to_string());
    parse_program(&text).with_context(|| format!("parsing {name}"))
}

pub fn run_solve(a: &SolveArgs, out: &mut dyn Write) -> Result<i32> {
    let program = load_program(a.input.as_deref())?;
    let max_models = (a.models > 0).then_some(a.models);
    let (models, stats) = if a.workers == 1 {
        solve_sequential(&program, max_models, a.trace)
    } else {
        let cfg = RuntimeConfig {
            workers: a.workers as usize,
            distribution: a.distribution.into(),
            transport: a.transport.into(),
            scheduler: Scheduler::Random { seed: a.seed },
            max_models,
            record_transcript: false,
        };
        let r = distributed_solve(&program, &cfg)?;
        (r.models, r.stats)
    };
    for (i, m) in models.iter().enumerate() {
        let atoms = m.sorted_texts(&program);
        if atoms.is_empty() {
            writeln!(out, "Answer {}:", i + 1)?;
        } else {
            writeln!(out, "Answer {}: {}", i + 1, atoms.join(" "))?;
        }
    }
    let sat = !models.is_empty();
    writeln!(out, "{}", if sat { "SATISFIABLE" } else { "UNSATISFIABLE" })?;
    if a.stats {
        write_stats(out, &stats, a.timing)?;
    }
    Ok(if sat { EXIT_SAT } else { EXIT_UNSAT })
}

fn solve_sequential(
    program: &GroundProgram,
    max_models: Option<usize>,
    trace: bool,
) -> (Vec<Interpretation>, RunStats) {
    let start = std::time::Instant::now();
    let g = RdgPrime::build(program);
    let mut solver = Solver::new(&g).max_models(max_models);
    if trace {
        solver = solver.with_trace(|e| eprintln!("{e}"));
    }
    let models: Vec<Interpretation> = solver.by_ref().map(|c| answer_set_of(&g, &c)).collect();
    let s = solver.stats();
    let stats = RunStats {
        models: models.len(),
        wall_time: start.elapsed(),
        decisions: s.decisions,
        backtracks: s.backtracks,
        propagation_messages: 0,
        coordination_messages: 0,
        token_messages: 0,
        token_rounds: 0,
        initial_cut: 0,
        final_cut: 0,
        k: 1,
        distribution: Distribution::RoundRobin,
        quiescence_violations: 0,
    };
    (models, stats)
}

fn write_stats(out: &mut dyn Write, s: &RunStats, timing: bool) -> io::Result<()> {
    writeln!(out, "models: {}", s.models)?;
    writeln!(out, "decisions: {}", s.decisions)?;
    writeln!(out, "backtracks: {}", s.backtracks)?;
    writeln!(out, "workers: {}", s.k)?;
    writeln!(out, "distribution: {}", s.distribution_label())?;
    writeln!(out, "initial_cut: {}", s.initial_cut)?;
    writeln!(out, "final_cut: {}", s.final_cut)?;
    writeln!(out, "propagation_messages: {}", s.propagation_messages)?;
    writeln!(out, "coordination_messages: {}", s.coordination_messages)?;
    writeln!(out, "token_messages: {}", s.token_messages)?;
    writeln!(out, "token_rounds: {}", s.token_rounds)?;
    if timing {
        writeln!(out, "wall_ms: {:.3}", s.wall_time.as_secs_f64() * 1000.0)?;
    }
    Ok(())
}

/// Atoms listed in a model file, resolved against `program`.
pub fn parse_model(program: &GroundProgram, text: &str) -> Result<Interpretation> {
    let mut x = Interpretation::new();
    for (i, line) in text.lines().enumerate() {
        let atom = line.split('%').next().unwrap_or("").trim();
        if atom.is_empty() {
            continue;
        }
        match program.atom_table().get(atom) {
            Some(id) => {
                x.insert(id);
            }
            None => bail!("line {}: unknown atom `{atom}`", i + 1),
        }
    }
    Ok(x)
}

pub fn run_check(a: &CheckArgs, out: &mut dyn Write) -> Result<i32> {
    let program = load_program(Some(&a.program))?;
    let text = fs::read_to_string(&a.model).with_context(|| format!("reading {}", a.model.display()))?;
    let x = parse_model(&program, &text).with_context(|| format!("in {}", a.model.display()))?;
    let check = check_answer_set(&program, &x);
    match check.failure(&program, &x) {
        None => {
            writeln!(out, "ANSWER SET")?;
            Ok(0)
        }
        Some(reason) => {
            writeln!(out, "NOT AN ANSWER SET: {reason}")?;
            Ok(EXIT_NOT_ANSWER_SET)
        }
    }
}

fn run_bench_cmd(a: &BenchArgs, out: &mut dyn Write) -> Result<i32> {
    if a.workers.contains(&0) {
        bail!("worker counts must be at least 1");
    }
    let cfg = BenchConfig {
        sizes: a.n.clone(),
        arity: a.arity,
        workers: a.workers.clone(),
        distributions: vec![Distribution::RoundRobin, Distribution::Greedy],
        transport: a.transport.into(),
        seed: a.seed,
    };
    let rows = run_bench(&cfg)?;
    out.write_all(bench_csv(&rows, a.timing).as_bytes())?;
    Ok(0)
}

fn run_dump_graph(a: &DumpGraphArgs, out: &mut dyn Write) -> Result<i32> {
    let program = load_program(a.input.as_deref())?;
    let (text, stats) = match a.graph {
        GraphKind::Prime => {
            let g = RdgPrime::build(&program);
            (dump_prime(&g), g.stats())
        }
        GraphKind::Classic => {
            let g = RdgClassic::build(&program);
            (dump_classic(&g), g.stats())
        }
    };
    out.write_all(text.as_bytes())?;
    if a.stats {
        writeln!(out, "% e0 {}", stats.e0)?;
        writeln!(out, "% e1 {}", stats.e1)?;
        writeln!(out, "% e2 {}", stats.e2)?;
        writeln!(out, "% rules {}", stats.rule_vertices)?;
        writeln!(out, "% atoms {}", stats.atom_vertices)?;
    }
    Ok(0)
}
