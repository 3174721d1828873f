//! Deterministic in-process transport.
//!
//! All workers live in one thread. At every step the scheduler picks one
//! enabled action: a worker processing its top task, or the head message
//! of a non-empty channel being delivered. Channels are FIFO per ordered
//! worker pair; nothing else about ordering is guaranteed, so a seeded
//! random scheduler exercises many interleavings reproducibly.

use std::collections::VecDeque;
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::partition::Partition;
use crate::rdg::RdgPrime;

use super::coordinator::CoordEvent;
use super::message::{encode, Message};
use super::worker::{Outbox, Worker};
use super::RuntimeError;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Scheduler {
    /// Uniform choice among enabled actions from a seeded stream.
    Random { seed: u64 },
    /// Cycles through workers, then channels, in a fixed order.
    RoundRobin,
}

impl Default for Scheduler {
    fn default() -> Self {
        Scheduler::Random { seed: 0 }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct SimStats {
    pub actions: u64,
    pub delivered: u64,
    pub detections: u64,
    /// Detections that fired while work was still pending somewhere.
    pub quiescence_violations: u64,
    /// Worst number of completed token rounds between the moment the
    /// system went quiet and the detection.
    pub max_rounds_to_detect: u64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Action {
    Step(usize),
    Deliver(usize),
}

pub struct Simulation {
    workers: Vec<Worker>,
    /// `channels[src * k + dst]`.
    channels: Vec<VecDeque<Message>>,
    scheduler: Scheduler,
    rng: ChaCha8Rng,
    cursor: usize,
    transcript: Option<Vec<u8>>,
    stats: SimStats,
    quiet_since: Option<u64>,
    started: bool,
}

impl Simulation {
    pub fn new(g: Arc<RdgPrime>, partition: Arc<Partition>, max_models: Option<usize>, scheduler: Scheduler) -> Self {
        let k = partition.k();
        let workers = (0..k)
            .map(|w| Worker::new(w as u32, g.clone(), partition.clone(), max_models))
            .collect();
        let seed = match scheduler {
            Scheduler::Random { seed } => seed,
            Scheduler::RoundRobin => 0,
        };
        Simulation {
            workers,
            channels: vec![VecDeque::new(); k * k],
            scheduler,
            rng: ChaCha8Rng::seed_from_u64(seed),
            cursor: 0,
            transcript: None,
            stats: SimStats::default(),
            quiet_since: None,
            started: false,
        }
    }

    /// Records every delivered message as `src (u32 LE) dst (u32 LE) frame`.
    pub fn record_transcript(mut self) -> Self {
        self.transcript = Some(Vec::new());
        self
    }

    pub fn k(&self) -> usize {
        self.workers.len()
    }

    pub fn workers(&self) -> &[Worker] {
        &self.workers
    }

    pub fn into_workers(self) -> Vec<Worker> {
        self.workers
    }

    pub(crate) fn workers_mut(&mut self) -> &mut [Worker] {
        &mut self.workers
    }

    pub fn stats(&self) -> SimStats {
        self.stats
    }

    pub fn transcript(&self) -> Option<&[u8]> {
        self.transcript.as_deref()
    }

    pub fn take_transcript(&mut self) -> Option<Vec<u8>> {
        self.transcript.take()
    }

    pub fn in_flight(&self) -> usize {
        self.channels.iter().map(VecDeque::len).sum()
    }

    /// Global inspection: every worker is passive and only termination
    /// tokens are travelling.
    pub fn globally_quiescent(&self) -> bool {
        self.workers.iter().all(Worker::is_passive) && self.channels.iter().all(|c| c.iter().all(|m| m.body.is_token()))
    }

    /// Injects a message as if some worker had sent it.
    pub fn post(&mut self, msg: Message) {
        let k = self.k();
        self.channels[msg.src as usize * k + msg.dst as usize].push_back(msg);
    }

    fn route(&mut self, out: Outbox, observer: &mut dyn FnMut(&CoordEvent, &Simulation)) {
        for m in out.messages {
            self.post(m);
        }
        for ev in &out.events {
            observer(ev, self);
        }
    }

    /// Seeds every worker's level-0 propagation.
    pub fn start(&mut self) -> Result<(), RuntimeError> {
        if self.started {
            return Ok(());
        }
        self.started = true;
        for w in 0..self.k() {
            let mut out = Outbox::default();
            self.workers[w].start(&mut out)?;
            self.route(out, &mut |_, _| {});
        }
        Ok(())
    }

    fn enabled(&self) -> Vec<Action> {
        let mut v: Vec<Action> = (0..self.k())
            .filter(|&w| self.workers[w].has_work())
            .map(Action::Step)
            .collect();
        v.extend(
            self.channels
                .iter()
                .enumerate()
                .filter(|(_, c)| !c.is_empty())
                .map(|(i, _)| Action::Deliver(i)),
        );
        v
    }

    fn pick(&mut self, enabled: &[Action]) -> Action {
        match self.scheduler {
            Scheduler::Random { .. } => enabled[self.rng.gen_range(0..enabled.len())],
            Scheduler::RoundRobin => {
                let slots = self.k() + self.channels.len();
                let slot_of = |a: &Action| match *a {
                    Action::Step(w) => w,
                    Action::Deliver(c) => self.k() + c,
                };
                let a = *enabled
                    .iter()
                    .min_by_key(|a| (slot_of(a) + slots - self.cursor) % slots)
                    .expect("at least one action");
                self.cursor = (slot_of(&a) + 1) % slots;
                a
            }
        }
    }

    /// Performs one scheduled action. Returns `false` if none was enabled.
    pub fn step(&mut self, observer: &mut dyn FnMut(&CoordEvent, &Simulation)) -> Result<bool, RuntimeError> {
        self.start()?;
        let enabled = self.enabled();
        if enabled.is_empty() {
            return Ok(false);
        }
        let action = self.pick(&enabled);
        self.stats.actions += 1;
        let mut out = Outbox::default();
        match action {
            Action::Step(w) => {
                self.workers[w].step(&mut out)?;
            }
            Action::Deliver(c) => {
                let msg = self.channels[c].pop_front().expect("channel is non-empty");
                self.stats.delivered += 1;
                if let Some(t) = self.transcript.as_mut() {
                    t.extend_from_slice(&msg.src.to_le_bytes());
                    t.extend_from_slice(&msg.dst.to_le_bytes());
                    t.extend_from_slice(&encode(&msg.body));
                }
                let dst = msg.dst as usize;
                self.workers[dst].receive(msg, &mut out)?;
            }
        }
        self.route(out, observer);
        Ok(true)
    }

    /// Lets idle workers forward tokens; on detection, checks that the
    /// system really is quiet and lets the coordinator move on. Returns
    /// whether quiescence was detected.
    pub fn poll(&mut self, observer: &mut dyn FnMut(&CoordEvent, &Simulation)) -> Result<bool, RuntimeError> {
        let mut detected = false;
        for w in 0..self.k() {
            if self.globally_quiescent() {
                if self.quiet_since.is_none() {
                    self.quiet_since = Some(self.token_rounds());
                }
            } else {
                self.quiet_since = None;
            }
            let mut out = Outbox::default();
            if self.workers[w].poll(&mut out) {
                self.stats.detections += 1;
                detected = true;
                if !self.globally_quiescent() {
                    self.stats.quiescence_violations += 1;
                }
                let since = self.quiet_since.take().unwrap_or(self.token_rounds());
                let rounds = self.token_rounds() - since;
                self.stats.max_rounds_to_detect = self.stats.max_rounds_to_detect.max(rounds);
                self.workers[w].resume(&mut out)?;
            }
            self.route(out, observer);
        }
        Ok(detected)
    }

    fn token_rounds(&self) -> u64 {
        self.workers[0].coordinator_stats().map_or(0, |s| s.token_rounds)
    }

    pub fn halted(&self) -> bool {
        self.workers.iter().all(Worker::is_halted)
    }

    /// Runs to completion. `observer` sees every coordinator event together
    /// with the simulation state at that moment.
    pub fn run_observed(
        &mut self,
        max_actions: Option<u64>,
        observer: &mut dyn FnMut(&CoordEvent, &Simulation),
    ) -> Result<(), RuntimeError> {
        self.start()?;
        loop {
            self.poll(observer)?;
            if self.halted() {
                return Ok(());
            }
            if !self.step(observer)? && !self.poll(observer)? && !self.halted() && self.enabled().is_empty() {
                return Err(RuntimeError::Stalled);
            }
            if max_actions.is_some_and(|m| self.stats.actions >= m) {
                return Err(RuntimeError::ActionLimit(self.stats.actions));
            }
        }
    }

    pub fn run(&mut self) -> Result<(), RuntimeError> {
        self.run_observed(None, &mut |_, _| {})
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::partition::round_robin;
    use crate::program::parse_program;
    use crate::runtime::message::Body;

    fn sim(src: &str, k: usize, scheduler: Scheduler) -> Simulation {
        let g = Arc::new(RdgPrime::build(&parse_program(src).unwrap()));
        let p = Arc::new(round_robin(g.num_vertices(), k).unwrap());
        Simulation::new(g, p, None, scheduler)
    }

    #[test]
    fn single_worker_empty_stack_is_quiet() {
        let s = sim("a.", 1, Scheduler::default());
        assert!(s.globally_quiescent());
    }

    #[test]
    fn message_in_flight_is_not_quiet() {
        let mut s = sim("a.", 2, Scheduler::default());
        s.post(Message {
            src: 0,
            dst: 1,
            body: Body::AtomProvenTrue {
                epoch: 0,
                atom: crate::program::AtomId(1),
            },
        });
        assert!(!s.globally_quiescent());
    }

    #[test]
    fn finds_both_models_of_two_loop() {
        for k in 1..=3 {
            let mut s = sim("a :- not b. b :- not a.", k, Scheduler::default());
            s.run().unwrap();
            assert_eq!(s.workers()[0].models().len(), 2, "k = {k}");
            assert_eq!(s.stats().quiescence_violations, 0);
        }
    }

    #[test]
    fn empty_program_has_one_model() {
        for k in 1..=2 {
            let mut s = sim("", k, Scheduler::default());
            s.run().unwrap();
            assert_eq!(s.workers()[0].models().len(), 1, "k = {k}");
        }
    }

    #[test]
    fn round_robin_scheduler_terminates() {
        let mut s = sim("a. b :- a, not c. c :- not b.", 3, Scheduler::RoundRobin);
        s.run().unwrap();
        assert_eq!(s.workers()[0].models().len(), 2);
    }
}
