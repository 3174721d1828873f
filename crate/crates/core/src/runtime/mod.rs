//! Distributed search over `k` workers.
//!
//! The RDG′ is partitioned, every worker owns its share of rule and atom
//! vertices, and propagation travels as messages along cut edges. Worker 0
//! also coordinates: it waits for quiescence between phases and picks the
//! branching rule, so the search tree is the one the sequential solver walks.

pub mod coordinator;
pub mod message;
pub mod sim;
pub mod socket;
pub mod worker;

use std::fmt;
use std::str::FromStr;
use std::sync::Arc;
use std::time::{Duration, Instant};

use thiserror::Error;

use crate::coloring::Color;
use crate::oracle::Interpretation;
use crate::partition::{cut_size, greedy_redistribute, round_robin, Partition, PartitionError};
use crate::program::{GroundProgram, RuleId};
use crate::rdg::RdgPrime;

pub use coordinator::{backtrack_directive, coordinate_branch, CoordEvent, CoordinatorStats, Directive};
pub use message::{Body, Message, Report, Token, WireError};
pub use sim::{Scheduler, SimStats, Simulation};
pub use worker::{Event, Outbox, RuleVals, Worker, WorkerSnapshot, WorkerStats};

#[derive(Debug, Error)]
pub enum RuntimeError {
    #[error("vertex {vertex} is not owned by worker {worker}")]
    NotOwned { vertex: usize, worker: u32 },
    #[error("protocol violation: {0}")]
    Protocol(String),
    #[error("transport failure: {0}")]
    Transport(String),
    #[error("no worker can make progress")]
    Stalled,
    #[error("gave up after {0} scheduler actions")]
    ActionLimit(u64),
    #[error(transparent)]
    Partition(#[from] PartitionError),
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash)]
pub enum Distribution {
    #[default]
    RoundRobin,
    Greedy,
}

impl fmt::Display for Distribution {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Distribution::RoundRobin => "rr",
            Distribution::Greedy => "greedy",
        })
    }
}

impl FromStr for Distribution {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "rr" => Ok(Distribution::RoundRobin),
            "greedy" => Ok(Distribution::Greedy),
            _ => Err(format!("unknown distribution `{s}` (expected rr or greedy)")),
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum Transport {
    /// Deterministic single-thread simulation.
    #[default]
    Sim,
    /// One thread per worker over Unix socket pairs.
    Proc,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct RuntimeConfig {
    pub workers: usize,
    pub distribution: Distribution,
    pub transport: Transport,
    pub scheduler: Scheduler,
    pub max_models: Option<usize>,
    pub record_transcript: bool,
}

impl Default for RuntimeConfig {
    fn default() -> Self {
        RuntimeConfig {
            workers: 1,
            distribution: Distribution::RoundRobin,
            transport: Transport::Sim,
            scheduler: Scheduler::default(),
            max_models: None,
            record_transcript: false,
        }
    }
}

impl RuntimeConfig {
    pub fn new(workers: usize, distribution: Distribution) -> Self {
        RuntimeConfig {
            workers,
            distribution,
            ..RuntimeConfig::default()
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Placement {
    pub partition: Partition,
    pub initial_cut: usize,
    pub final_cut: usize,
    pub swaps: usize,
}

/// Round-robin placement, optionally refined by greedy swaps. With one
/// worker there is nothing to refine and `greedy` is ignored.
pub fn place(g: &RdgPrime, k: usize, distribution: Distribution) -> Result<Placement, PartitionError> {
    let rr = round_robin(g.num_vertices(), k)?;
    let initial_cut = cut_size(g, &rr)?.cut_size;
    if distribution == Distribution::Greedy && k >= 2 {
        let r = greedy_redistribute(g, &rr)?;
        return Ok(Placement {
            partition: r.partition,
            initial_cut,
            final_cut: r.final_cut,
            swaps: r.swaps,
        });
    }
    Ok(Placement {
        partition: rr,
        initial_cut,
        final_cut: initial_cut,
        swaps: 0,
    })
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RunStats {
    pub models: usize,
    pub wall_time: Duration,
    /// Branching steps, ⊕ decisions and ⊖ flips alike.
    pub decisions: usize,
    pub backtracks: usize,
    /// Cross-worker propagation messages.
    pub propagation_messages: u64,
    /// Cross-worker control messages, tokens excluded.
    pub coordination_messages: u64,
    pub token_messages: u64,
    pub token_rounds: u64,
    pub initial_cut: usize,
    pub final_cut: usize,
    pub k: usize,
    pub distribution: Distribution,
    pub quiescence_violations: u64,
}

impl RunStats {
    /// `NR` when redistribution does not apply (a single worker).
    pub fn distribution_label(&self) -> String {
        if self.k == 1 && self.distribution == Distribution::Greedy {
            "NR".to_string()
        } else {
            self.distribution.to_string()
        }
    }
}

#[derive(Clone, Debug)]
pub struct RunOutcome {
    pub models: Vec<Interpretation>,
    pub stats: RunStats,
    pub transcript: Option<Vec<u8>>,
}

/// Builds the RDG′, places it and runs the distributed search.
pub fn distributed_solve(program: &GroundProgram, cfg: &RuntimeConfig) -> Result<RunOutcome, RuntimeError> {
    let g = Arc::new(RdgPrime::build(program));
    let placement = place(&g, cfg.workers, cfg.distribution)?;
    solve_placed(g, &placement, cfg)
}

/// Runs the search on an explicit placement.
pub fn solve_placed(g: Arc<RdgPrime>, placement: &Placement, cfg: &RuntimeConfig) -> Result<RunOutcome, RuntimeError> {
    let start = Instant::now();
    let partition = Arc::new(placement.partition.clone());
    let k = partition.k();
    let (workers, transcript, violations) = match cfg.transport {
        Transport::Sim => {
            let mut sim = Simulation::new(g, partition, cfg.max_models, cfg.scheduler);
            if cfg.record_transcript {
                sim = sim.record_transcript();
            }
            sim.run()?;
            let transcript = sim.take_transcript();
            let violations = sim.stats().quiescence_violations;
            let workers = sim.into_workers();
            (workers, transcript, violations)
        }
        Transport::Proc => (socket::run_socket(g, partition, cfg.max_models)?, None, 0),
    };
    let wall_time = start.elapsed();
    let coord = workers[0].coordinator_stats().unwrap_or_default();
    let models = workers[0].models().to_vec();
    let mut stats = RunStats {
        models: models.len(),
        wall_time,
        decisions: coord.decisions,
        backtracks: coord.backtracks,
        propagation_messages: 0,
        coordination_messages: 0,
        token_messages: 0,
        token_rounds: coord.token_rounds,
        initial_cut: placement.initial_cut,
        final_cut: placement.final_cut,
        k,
        distribution: cfg.distribution,
        quiescence_violations: violations,
    };
    for w in &workers {
        let s = w.stats();
        stats.propagation_messages += s.propagation_sent;
        stats.coordination_messages += s.control_sent;
        stats.token_messages += s.token_sent;
    }
    Ok(RunOutcome {
        models,
        stats,
        transcript,
    })
}

/// Applies `path` decision by decision from a fresh start and returns each
/// worker's state after the last closure.
pub fn replay(
    g: Arc<RdgPrime>,
    partition: Arc<Partition>,
    path: &[(RuleId, Color)],
) -> Result<Vec<WorkerSnapshot>, RuntimeError> {
    let mut sim = Simulation::new(g, partition, None, Scheduler::RoundRobin);
    sim.workers_mut()[0].set_script(path.to_vec());
    sim.run()?;
    Ok(sim.workers().iter().map(Worker::snapshot).collect())
}
