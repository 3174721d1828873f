//! Search control: which phase comes next, and which rule to branch on.
//!
//! Worker 0 runs the coordinator next to its own vertices. Between choices
//! the coordinator drives one deterministic closure, phase by phase, each
//! phase ending at global quiescence:
//!
//! 1. propagation of the last change (`P` to fixpoint),
//! 2. founding: mark every rule derivable without ⊖ rules,
//! 3. sweep: color unfounded rules ⊖ and propagate again,
//! 4. reports: every worker sends a [`Report`].
//!
//! If the sweep colored anything, founding starts over. Otherwise the
//! reports decide the next step through [`coordinate_branch`].

use std::collections::VecDeque;

use crate::coloring::Color;
use crate::oracle::Interpretation;
use crate::program::{AtomId, RuleId};

use super::message::Report;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Directive {
    /// The sweep changed something; run founding again.
    Refound,
    Decide(RuleId),
    /// Undo to before `level` and flip its decision on `rule` to ⊖.
    Backtrack {
        level: u32,
        rule: RuleId,
    },
    ModelFound,
    Halt,
}

/// Deepest ⊕ decision still to be flipped, or `Halt` when none is left.
pub fn backtrack_directive(decisions: &[(RuleId, Color)]) -> Directive {
    match decisions.iter().rposition(|&(_, c)| c == Color::Plus) {
        Some(i) => Directive::Backtrack {
            level: (i + 1) as u32,
            rule: decisions[i].0,
        },
        None => Directive::Halt,
    }
}

/// Next step after every worker has reported at the end of a closure.
///
/// Branches on the globally lowest candidate rule, so the search visits
/// the same tree as the sequential solver.
pub fn coordinate_branch(reports: &[Report], decisions: &[(RuleId, Color)]) -> Directive {
    if reports.iter().any(|r| r.conflict) {
        return backtrack_directive(decisions);
    }
    if reports.iter().any(|r| r.swept > 0) {
        return Directive::Refound;
    }
    if reports.iter().all(|r| r.uncolored == 0) {
        return Directive::ModelFound;
    }
    match reports.iter().filter_map(|r| r.candidate).min() {
        Some(rule) => Directive::Decide(rule),
        None => backtrack_directive(decisions),
    }
}

/// What the coordinator does once the current propagation goes quiet.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub(crate) enum Next {
    Founding,
    Sweep,
    Report,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub(crate) enum Phase {
    Propagate(Next),
    Reports,
    Model,
    Done,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct CoordinatorStats {
    pub decisions: usize,
    pub backtracks: usize,
    pub token_rounds: u64,
    pub closures: usize,
}

/// Coordinator-side notifications surfaced to the driver.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum CoordEvent {
    /// A closure finished (possibly in conflict); all workers are quiet.
    Closure {
        path: Vec<(RuleId, Color)>,
        conflict: bool,
    },
    Model(Interpretation),
}

pub(crate) struct Coordinator {
    pub(crate) phase: Phase,
    pub(crate) epoch: u32,
    pub(crate) decisions: Vec<(RuleId, Color)>,
    pub(crate) reports: Vec<Option<Report>>,
    pub(crate) parts: Vec<Option<Vec<AtomId>>>,
    pub(crate) models: Vec<Interpretation>,
    pub(crate) max_models: Option<usize>,
    pub(crate) token_out: bool,
    /// Replay mode: apply these decisions in order instead of searching.
    pub(crate) script: Option<VecDeque<(RuleId, Color)>>,
    pub(crate) stats: CoordinatorStats,
}

impl Coordinator {
    pub(crate) fn new(k: usize, max_models: Option<usize>) -> Self {
        Coordinator {
            phase: Phase::Propagate(Next::Founding),
            epoch: 0,
            decisions: Vec::new(),
            reports: vec![None; k],
            parts: vec![None; k],
            models: Vec::new(),
            max_models,
            token_out: false,
            script: None,
            stats: CoordinatorStats::default(),
        }
    }

    pub(crate) fn awaiting_quiescence(&self) -> bool {
        matches!(self.phase, Phase::Propagate(_))
    }

    pub(crate) fn next_epoch(&mut self) -> u32 {
        self.epoch += 1;
        self.epoch
    }

    pub(crate) fn model_cap_reached(&self) -> bool {
        self.max_models.is_some_and(|m| self.models.len() >= m)
    }

    /// Decision for a completed closure, honoring replay scripts. The color
    /// only matters for `Decide`.
    pub(crate) fn next_step(&mut self, reports: &[Report]) -> (Directive, Color) {
        let Some(script) = self.script.as_mut() else {
            return (coordinate_branch(reports, &self.decisions), Color::Plus);
        };
        if reports.iter().any(|r| r.conflict) {
            return (Directive::Halt, Color::Plus);
        }
        if reports.iter().any(|r| r.swept > 0) {
            return (Directive::Refound, Color::Plus);
        }
        match script.pop_front() {
            Some((rule, color)) => (Directive::Decide(rule), color),
            None => (Directive::Halt, Color::Plus),
        }
    }
}
