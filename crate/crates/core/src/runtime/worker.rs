//! One worker: the vertices it owns, their counters, and the propagation
//! loop over them.
//!
//! A worker is a plain state machine. Drivers feed it messages with
//! [`Worker::receive`], let it drain its task stack with [`Worker::step`],
//! and call [`Worker::poll`] when it may have gone idle. Everything it wants
//! to send ends up in an [`Outbox`].
//!
//! Propagation only ever flows along RDG′ edges out of a vertex whose state
//! just changed. A change addressed to a local vertex goes on the task
//! stack; any other becomes a message to the owner.

use std::collections::VecDeque;
use std::sync::Arc;

use crate::coloring::{AtomState, Color};
use crate::oracle::Interpretation;
use crate::partition::{Partition, WorkerId};
use crate::program::{AtomId, RuleId};
use crate::rdg::{RdgPrime, Vertex, VertexId};

use super::coordinator::{backtrack_directive, CoordEvent, Coordinator, CoordinatorStats, Directive, Next, Phase};
use super::message::{Body, Message, Report, Token};
use super::RuntimeError;

/// A local change waiting to be applied to an owned vertex.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Event {
    ColorRule {
        rule: RuleId,
        color: Color,
    },
    /// A defining rule of `atom` got `color` (head edge).
    DefinerColored {
        atom: AtomId,
        color: Color,
    },
    /// A body atom of `rule` became proven true (`value`) or false.
    BodyAtom {
        rule: RuleId,
        positive: bool,
        value: bool,
    },
    AtomFounded {
        atom: AtomId,
    },
    BodyFounded {
        rule: RuleId,
    },
}

impl Event {
    pub fn target(&self, g: &RdgPrime) -> VertexId {
        match *self {
            Event::ColorRule { rule, .. } | Event::BodyAtom { rule, .. } | Event::BodyFounded { rule } => {
                g.rule_vertex(rule)
            }
            Event::DefinerColored { atom, .. } | Event::AtomFounded { atom } => g.atom_vertex(atom),
        }
    }

    fn to_body(self, epoch: u32) -> Body {
        match self {
            Event::DefinerColored {
                atom,
                color: Color::Plus,
            } => Body::AtomProvenTrue { epoch, atom },
            Event::DefinerColored {
                atom,
                color: Color::Minus,
            } => Body::AtomDefinerDisabled { epoch, atom },
            Event::BodyAtom { rule, positive, value } => Body::AtomDecided {
                epoch,
                rule,
                positive,
                value,
            },
            Event::AtomFounded { atom } => Body::AtomFounded { epoch, atom },
            Event::BodyFounded { rule } => Body::BodyFounded { epoch, rule },
            // rules are only ever colored by their owner
            Event::ColorRule { .. } => unreachable!("rule coloring is never sent"),
        }
    }

    fn from_body(body: &Body) -> Option<Event> {
        Some(match *body {
            Body::AtomProvenTrue { atom, .. } => Event::DefinerColored {
                atom,
                color: Color::Plus,
            },
            Body::AtomDefinerDisabled { atom, .. } => Event::DefinerColored {
                atom,
                color: Color::Minus,
            },
            Body::AtomDecided {
                rule, positive, value, ..
            } => Event::BodyAtom { rule, positive, value },
            Body::AtomFounded { atom, .. } => Event::AtomFounded { atom },
            Body::BodyFounded { rule, .. } => Event::BodyFounded { rule },
            _ => return None,
        })
    }
}

/// Trailed state of a rule vertex.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct RuleVals {
    pub color: Option<Color>,
    pub pos_true: u32,
    pub pos_false: u32,
    pub neg_true: u32,
    pub neg_false: u32,
}

#[derive(Clone, Copy, Debug)]
enum Undo {
    Rule(usize, RuleVals),
    Atom(usize, AtomState),
}

/// Comparable view of a worker's trailed state.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct WorkerSnapshot {
    pub worker: WorkerId,
    pub rules: Vec<(RuleId, RuleVals)>,
    pub atoms: Vec<(AtomId, AtomState)>,
    pub conflict: bool,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct WorkerStats {
    pub propagation_sent: u64,
    pub control_sent: u64,
    pub token_sent: u64,
    pub tasks: u64,
    pub deferred: u64,
}

/// Messages and coordinator notifications produced by one call.
#[derive(Debug, Default)]
pub struct Outbox {
    pub messages: Vec<Message>,
    pub events: Vec<CoordEvent>,
}

const NOT_OWNED: u32 = u32::MAX;

pub struct Worker {
    id: WorkerId,
    k: usize,
    g: Arc<RdgPrime>,
    partition: Arc<Partition>,
    /// Global vertex id to slot in `rules` or `atoms`.
    slot: Vec<u32>,
    rule_ids: Vec<RuleId>,
    atom_ids: Vec<AtomId>,
    rules: Vec<RuleVals>,
    atoms: Vec<AtomState>,
    rule_founded: Vec<bool>,
    founded_pos: Vec<u32>,
    atom_founded: Vec<bool>,
    stack: Vec<Event>,
    deferred: VecDeque<Message>,
    epoch: u32,
    trail: Vec<Undo>,
    /// Trail length when each decision level was opened.
    marks: Vec<usize>,
    conflict: bool,
    swept: u32,
    halted: bool,
    // termination detection
    counter: i64,
    black: bool,
    token: Option<Token>,
    coord: Option<Coordinator>,
    /// Coordinator decision taken at the end of a closure, applied as the
    /// next task so the closed state can be observed first.
    pending: Option<(Directive, Color)>,
    stats: WorkerStats,
}

impl Worker {
    pub fn new(id: WorkerId, g: Arc<RdgPrime>, partition: Arc<Partition>, max_models: Option<usize>) -> Self {
        let k = partition.k();
        let mut slot = vec![NOT_OWNED; g.num_vertices()];
        let mut rule_ids = Vec::new();
        let mut atom_ids = Vec::new();
        for (v, s) in slot.iter_mut().enumerate() {
            if partition.owner(v) != id {
                continue;
            }
            match g.vertex(VertexId(v as u32)) {
                Vertex::Rule(r) => {
                    *s = rule_ids.len() as u32;
                    rule_ids.push(r);
                }
                Vertex::Atom(a) => {
                    *s = atom_ids.len() as u32;
                    atom_ids.push(a);
                }
            }
        }
        let atoms = atom_ids
            .iter()
            .map(|&a| AtomState {
                total_defining: g.defining(a).len() as u32,
                ..AtomState::default()
            })
            .collect();
        Worker {
            id,
            k,
            slot,
            rules: vec![RuleVals::default(); rule_ids.len()],
            atoms,
            rule_founded: vec![false; rule_ids.len()],
            founded_pos: vec![0; rule_ids.len()],
            atom_founded: vec![false; atom_ids.len()],
            rule_ids,
            atom_ids,
            g,
            partition,
            stack: Vec::new(),
            deferred: VecDeque::new(),
            epoch: 0,
            trail: Vec::new(),
            marks: Vec::new(),
            conflict: false,
            swept: 0,
            halted: false,
            counter: 0,
            black: false,
            token: None,
            coord: (id == 0).then(|| Coordinator::new(k, max_models)),
            pending: None,
            stats: WorkerStats::default(),
        }
    }

    pub fn id(&self) -> WorkerId {
        self.id
    }

    pub fn epoch(&self) -> u32 {
        self.epoch
    }

    pub fn is_halted(&self) -> bool {
        self.halted
    }

    /// No pending local work: empty task stack and nothing deferred.
    pub fn is_passive(&self) -> bool {
        self.stack.is_empty() && self.deferred.is_empty() && self.pending.is_none()
    }

    /// Whether [`Worker::step`] would do something.
    pub fn has_work(&self) -> bool {
        !self.stack.is_empty() || self.pending.is_some()
    }

    pub fn stack_len(&self) -> usize {
        self.stack.len()
    }

    pub fn pending_tasks(&self) -> usize {
        self.stack.len() + self.deferred.len()
    }

    pub fn has_conflict(&self) -> bool {
        self.conflict
    }

    pub fn stats(&self) -> WorkerStats {
        self.stats
    }

    pub fn owned_rules(&self) -> &[RuleId] {
        &self.rule_ids
    }

    pub fn owned_atoms(&self) -> &[AtomId] {
        &self.atom_ids
    }

    pub fn rule_vals(&self, r: RuleId) -> Option<RuleVals> {
        let v = self.g.rule_vertex(r).index();
        self.owns(v).then(|| self.rules[self.slot[v] as usize])
    }

    pub fn atom_state(&self, a: AtomId) -> Option<AtomState> {
        let v = self.g.atom_vertex(a).index();
        self.owns(v).then(|| self.atoms[self.slot[v] as usize])
    }

    /// Models gathered so far (coordinator only; empty elsewhere).
    pub fn models(&self) -> &[Interpretation] {
        self.coord.as_ref().map_or(&[], |c| &c.models)
    }

    pub fn coordinator_stats(&self) -> Option<CoordinatorStats> {
        self.coord.as_ref().map(|c| c.stats)
    }

    pub fn is_coordinator(&self) -> bool {
        self.coord.is_some()
    }

    /// Replays `path` instead of searching. Must be set before [`Worker::start`].
    pub(crate) fn set_script(&mut self, path: Vec<(RuleId, Color)>) {
        if let Some(c) = self.coord.as_mut() {
            c.script = Some(path.into());
        }
    }

    pub fn snapshot(&self) -> WorkerSnapshot {
        WorkerSnapshot {
            worker: self.id,
            rules: self.rule_ids.iter().copied().zip(self.rules.iter().copied()).collect(),
            atoms: self.atom_ids.iter().copied().zip(self.atoms.iter().copied()).collect(),
            conflict: self.conflict,
        }
    }

    fn owns(&self, v: usize) -> bool {
        self.slot[v] != NOT_OWNED
    }

    fn rule_slot(&self, r: RuleId) -> Result<usize, RuntimeError> {
        let v = self.g.rule_vertex(r).index();
        if !self.owns(v) {
            return Err(RuntimeError::NotOwned {
                vertex: v,
                worker: self.id,
            });
        }
        Ok(self.slot[v] as usize)
    }

    fn atom_slot(&self, a: AtomId) -> Result<usize, RuntimeError> {
        let v = self.g.atom_vertex(a).index();
        if !self.owns(v) {
            return Err(RuntimeError::NotOwned {
                vertex: v,
                worker: self.id,
            });
        }
        Ok(self.slot[v] as usize)
    }

    fn send(&mut self, dst: WorkerId, body: Body, out: &mut Outbox) {
        if body.is_token() {
            self.stats.token_sent += 1;
        } else {
            self.counter += 1;
            if body.is_propagation() {
                self.stats.propagation_sent += 1;
            } else {
                self.stats.control_sent += 1;
            }
        }
        out.messages.push(Message {
            src: self.id,
            dst,
            body,
        });
    }

    /// Routes a change to the owner of its target vertex.
    fn emit(&mut self, ev: Event, out: &mut Outbox) {
        let v = ev.target(&self.g).index();
        if self.owns(v) {
            self.stack.push(ev);
        } else {
            let dst = self.partition.owner(v);
            let body = ev.to_body(self.epoch);
            self.send(dst, body, out);
        }
    }

    /// Seeds level 0: atoms without definitions are false from the start,
    /// and rules with empty bodies are applicable right away.
    pub fn start(&mut self, out: &mut Outbox) -> Result<(), RuntimeError> {
        for i in 0..self.atom_ids.len() {
            if self.atoms[i].total_defining == 0 {
                self.announce_atom(i, false, out);
            }
        }
        for i in 0..self.rule_ids.len() {
            self.evaluate(i, out)?;
        }
        Ok(())
    }

    /// Applies one event and returns the messages it produced; changes to
    /// local vertices are queued on the task stack instead.
    pub fn notify_change_step(&mut self, ev: Event) -> Result<Vec<Message>, RuntimeError> {
        let mut out = Outbox::default();
        self.apply(ev, &mut out)?;
        Ok(out.messages)
    }

    /// Processes the top task. Returns `false` if there was none.
    pub fn step(&mut self, out: &mut Outbox) -> Result<bool, RuntimeError> {
        if let Some((d, color)) = self.pending.take() {
            self.apply_directive(d, color, out)?;
            return Ok(true);
        }
        if let Some(ev) = self.stack.pop() {
            self.stats.tasks += 1;
            self.apply(ev, out)?;
            return Ok(true);
        }
        Ok(false)
    }

    /// Drains the task stack.
    pub fn run_local(&mut self, out: &mut Outbox) -> Result<(), RuntimeError> {
        while self.step(out)? {}
        Ok(())
    }

    fn apply(&mut self, ev: Event, out: &mut Outbox) -> Result<(), RuntimeError> {
        match ev {
            Event::ColorRule { rule, color } => {
                let i = self.rule_slot(rule)?;
                self.color_rule(i, color, out);
            }
            Event::DefinerColored { atom, color } => {
                let i = self.atom_slot(atom)?;
                let prev = self.atoms[i];
                self.trail.push(Undo::Atom(i, prev));
                match color {
                    Color::Plus => {
                        self.atoms[i].plus_defining += 1;
                        if prev.plus_defining == 0 {
                            self.announce_atom(i, true, out);
                        }
                    }
                    Color::Minus => {
                        self.atoms[i].minus_defining += 1;
                        if self.atoms[i].proven_false() {
                            self.announce_atom(i, false, out);
                        }
                    }
                }
            }
            Event::BodyAtom { rule, positive, value } => {
                let i = self.rule_slot(rule)?;
                self.trail.push(Undo::Rule(i, self.rules[i]));
                let r = &mut self.rules[i];
                match (positive, value) {
                    (true, true) => r.pos_true += 1,
                    (true, false) => r.pos_false += 1,
                    (false, true) => r.neg_true += 1,
                    (false, false) => r.neg_false += 1,
                }
                self.evaluate(i, out)?;
            }
            Event::AtomFounded { atom } => {
                let i = self.atom_slot(atom)?;
                if !self.atom_founded[i] {
                    self.atom_founded[i] = true;
                    for &r in self.g.clone().pos_out(atom) {
                        self.emit(Event::BodyFounded { rule: r }, out);
                    }
                }
            }
            Event::BodyFounded { rule } => {
                let i = self.rule_slot(rule)?;
                self.founded_pos[i] += 1;
                self.try_found(i, out);
            }
        }
        Ok(())
    }

    fn announce_atom(&mut self, i: usize, value: bool, out: &mut Outbox) {
        let a = self.atom_ids[i];
        let g = self.g.clone();
        for &rule in g.pos_out(a) {
            self.emit(
                Event::BodyAtom {
                    rule,
                    positive: true,
                    value,
                },
                out,
            );
        }
        for &rule in g.neg_out(a) {
            self.emit(
                Event::BodyAtom {
                    rule,
                    positive: false,
                    value,
                },
                out,
            );
        }
    }

    fn color_rule(&mut self, i: usize, color: Color, out: &mut Outbox) {
        match self.rules[i].color {
            Some(c) if c == color => {}
            Some(_) => self.conflict = true,
            None => {
                self.trail.push(Undo::Rule(i, self.rules[i]));
                self.rules[i].color = Some(color);
                let rule = self.rule_ids[i];
                if let Some(atom) = self.g.head(rule) {
                    self.emit(Event::DefinerColored { atom, color }, out);
                }
                self.check_colored(i);
            }
        }
    }

    fn status(&self, i: usize) -> (bool, bool, bool, bool) {
        let r = self.rule_ids[i];
        let v = &self.rules[i];
        let supported = v.pos_true as usize == self.g.body_pos(r).len();
        let unsupported = v.pos_false > 0;
        let blocked = v.neg_true > 0;
        let unblocked = v.neg_false as usize == self.g.body_neg(r).len();
        (supported, unsupported, blocked, unblocked)
    }

    fn check_colored(&mut self, i: usize) {
        let (s, us, b, ub) = self.status(i);
        match self.rules[i].color {
            Some(Color::Plus) if us || b => self.conflict = true,
            Some(Color::Minus) if s && ub => self.conflict = true,
            _ => {}
        }
    }

    /// The local `P` step for one rule after its counters moved.
    fn evaluate(&mut self, i: usize, out: &mut Outbox) -> Result<(), RuntimeError> {
        let (s, us, b, ub) = self.status(i);
        match self.rules[i].color {
            None if s && ub => {
                if self.g.is_constraint(self.rule_ids[i]) {
                    self.conflict = true;
                } else {
                    self.color_rule(i, Color::Plus, out);
                }
            }
            None if us || b => self.color_rule(i, Color::Minus, out),
            None => {}
            Some(_) => self.check_colored(i),
        }
        Ok(())
    }

    fn try_found(&mut self, i: usize, out: &mut Outbox) {
        let r = self.rule_ids[i];
        if self.rule_founded[i]
            || self.rules[i].color == Some(Color::Minus)
            || self.founded_pos[i] as usize != self.g.body_pos(r).len()
        {
            return;
        }
        self.rule_founded[i] = true;
        if let Some(atom) = self.g.head(r) {
            self.emit(Event::AtomFounded { atom }, out);
        }
    }

    fn undo_to(&mut self, len: usize) {
        while self.trail.len() > len {
            match self.trail.pop().expect("trail length checked") {
                Undo::Rule(i, v) => self.rules[i] = v,
                Undo::Atom(i, a) => self.atoms[i] = a,
            }
        }
    }

    fn release_deferred(&mut self) {
        let epoch = self.epoch;
        let mut keep = VecDeque::new();
        while let Some(m) = self.deferred.pop_front() {
            if m.body.epoch().is_some_and(|e| e <= epoch) {
                self.stack.extend(Event::from_body(&m.body));
            } else {
                keep.push_back(m);
            }
        }
        self.deferred = keep;
    }

    fn report(&self) -> Report {
        let mut candidate = None;
        let mut uncolored = 0;
        for (i, &r) in self.rule_ids.iter().enumerate() {
            if self.rules[i].color.is_some() {
                continue;
            }
            uncolored += 1;
            if candidate.is_none() && !self.g.is_constraint(r) && self.status(i).0 {
                candidate = Some(r);
            }
        }
        Report {
            conflict: self.conflict,
            candidate,
            uncolored,
            swept: self.swept,
        }
    }

    fn model_part(&self) -> Vec<AtomId> {
        let mut atoms: Vec<AtomId> = self
            .rule_ids
            .iter()
            .zip(&self.rules)
            .filter(|(_, v)| v.color == Some(Color::Plus))
            .filter_map(|(&r, _)| self.g.head(r))
            .collect();
        atoms.sort();
        atoms.dedup();
        atoms
    }

    /// Applies a phase-opening control message.
    fn apply_control(&mut self, body: &Body, out: &mut Outbox) -> Result<(), RuntimeError> {
        match *body {
            Body::Decide {
                epoch,
                level,
                rule,
                color,
            } => {
                self.epoch = epoch;
                if level as usize != self.marks.len() + 1 {
                    return Err(RuntimeError::Protocol(format!(
                        "worker {} at level {} got decision for level {level}",
                        self.id,
                        self.marks.len()
                    )));
                }
                self.marks.push(self.trail.len());
                self.swept = 0;
                if let Ok(i) = self.rule_slot(rule) {
                    self.color_rule(i, color, out);
                }
            }
            Body::Backtrack { epoch, level, rule } => {
                self.epoch = epoch;
                let level = level as usize;
                if level == 0 || level > self.marks.len() {
                    return Err(RuntimeError::Protocol(format!(
                        "worker {} at level {} cannot backtrack to level {level}",
                        self.id,
                        self.marks.len()
                    )));
                }
                let mark = self.marks[level - 1];
                self.undo_to(mark);
                self.marks.truncate(level);
                self.stack.clear();
                self.conflict = false;
                self.swept = 0;
                if let Ok(i) = self.rule_slot(rule) {
                    self.color_rule(i, Color::Minus, out);
                }
            }
            Body::StartFounding { epoch } => {
                self.epoch = epoch;
                self.rule_founded.iter_mut().for_each(|f| *f = false);
                self.atom_founded.iter_mut().for_each(|f| *f = false);
                self.founded_pos.iter_mut().for_each(|f| *f = 0);
                for i in 0..self.rule_ids.len() {
                    self.try_found(i, out);
                }
            }
            Body::Sweep { epoch } => {
                self.epoch = epoch;
                self.swept = 0;
                for i in 0..self.rule_ids.len() {
                    if self.rule_founded[i] {
                        continue;
                    }
                    match self.rules[i].color {
                        Some(Color::Plus) => self.conflict = true,
                        Some(Color::Minus) => {}
                        None => {
                            self.swept += 1;
                            self.color_rule(i, Color::Minus, out);
                        }
                    }
                }
            }
            _ => unreachable!("not a phase message"),
        }
        self.release_deferred();
        Ok(())
    }

    pub fn receive(&mut self, msg: Message, out: &mut Outbox) -> Result<(), RuntimeError> {
        if !msg.body.is_token() {
            self.counter -= 1;
            self.black = true;
        }
        match &msg.body {
            b if b.is_propagation() => {
                let e = b.epoch().expect("propagation carries an epoch");
                if e > self.epoch {
                    self.stats.deferred += 1;
                    self.deferred.push_back(msg);
                } else if e < self.epoch {
                    return Err(RuntimeError::Protocol(format!(
                        "worker {} in epoch {} got stale message from epoch {e}",
                        self.id, self.epoch
                    )));
                } else {
                    self.stack.extend(Event::from_body(b));
                }
            }
            Body::Decide { .. } | Body::Backtrack { .. } | Body::StartFounding { .. } | Body::Sweep { .. } => {
                self.apply_control(&msg.body, out)?;
            }
            Body::ReportRequest => {
                let r = self.report();
                self.send(msg.src, Body::ReportCandidates(r), out);
            }
            Body::ModelFound => {
                let atoms = self.model_part();
                self.send(msg.src, Body::ModelPart { atoms }, out);
            }
            Body::ReportCandidates(r) => self.record_report(msg.src, *r, out)?,
            Body::ModelPart { atoms } => self.record_part(msg.src, atoms.clone(), out)?,
            Body::QuiescenceToken(t) => self.token = Some(*t),
            Body::Halt => self.halted = true,
            _ => unreachable!(),
        }
        Ok(())
    }

    /// Token handling for an idle worker. Returns `true` on the coordinator
    /// when quiescence has been detected; the driver should then call
    /// [`Worker::resume`].
    pub fn poll(&mut self, out: &mut Outbox) -> bool {
        if self.halted || !self.is_passive() {
            return false;
        }
        let next = ((self.id as usize + 1) % self.k) as WorkerId;
        let Some(coord) = self.coord.as_mut() else {
            if let Some(mut t) = self.token.take() {
                t.count += self.counter as i32;
                t.black |= self.black;
                self.black = false;
                self.send(next, Body::QuiescenceToken(t), out);
            }
            return false;
        };
        if !coord.awaiting_quiescence() {
            return false;
        }
        if self.k == 1 {
            return true;
        }
        if let Some(t) = self.token.take() {
            coord.token_out = false;
            coord.stats.token_rounds += 1;
            if !t.black && !self.black && t.count as i64 + self.counter == 0 {
                return true;
            }
        }
        if !coord.token_out {
            coord.token_out = true;
            self.black = false;
            self.send(next, Body::QuiescenceToken(Token::default()), out);
        }
        false
    }

    /// Coordinator: advances to the next phase after detected quiescence.
    pub fn resume(&mut self, out: &mut Outbox) -> Result<(), RuntimeError> {
        let phase = self.coord_mut().phase;
        match phase {
            Phase::Propagate(Next::Founding) => {
                let epoch = self.coord_mut().next_epoch();
                self.coord_mut().phase = Phase::Propagate(Next::Sweep);
                self.broadcast(Body::StartFounding { epoch }, out)
            }
            Phase::Propagate(Next::Sweep) => {
                let epoch = self.coord_mut().next_epoch();
                self.coord_mut().phase = Phase::Propagate(Next::Report);
                self.broadcast(Body::Sweep { epoch }, out)
            }
            Phase::Propagate(Next::Report) => {
                let c = self.coord_mut();
                c.phase = Phase::Reports;
                c.reports.iter_mut().for_each(|r| *r = None);
                self.broadcast(Body::ReportRequest, out)
            }
            _ => Ok(()),
        }
    }

    fn coord_mut(&mut self) -> &mut Coordinator {
        self.coord.as_mut().expect("only the coordinator drives phases")
    }

    fn broadcast(&mut self, body: Body, out: &mut Outbox) -> Result<(), RuntimeError> {
        for w in 1..self.k {
            self.send(w as WorkerId, body.clone(), out);
        }
        match body {
            Body::ReportRequest => {
                let r = self.report();
                self.record_report(0, r, out)
            }
            Body::ModelFound => {
                let atoms = self.model_part();
                self.record_part(0, atoms, out)
            }
            Body::Halt => {
                self.halted = true;
                Ok(())
            }
            b => self.apply_control(&b, out),
        }
    }

    fn record_report(&mut self, src: WorkerId, r: Report, out: &mut Outbox) -> Result<(), RuntimeError> {
        let c = self.coord_mut();
        if c.phase != Phase::Reports {
            return Err(RuntimeError::Protocol(format!("unexpected report from worker {src}")));
        }
        c.reports[src as usize] = Some(r);
        if c.reports.iter().any(Option::is_none) {
            return Ok(());
        }
        let reports: Vec<Report> = c.reports.iter().flatten().copied().collect();
        let (directive, color) = c.next_step(&reports);
        if directive != Directive::Refound {
            c.stats.closures += 1;
            out.events.push(CoordEvent::Closure {
                path: c.decisions.clone(),
                conflict: reports.iter().any(|r| r.conflict),
            });
        }
        self.pending = Some((directive, color));
        Ok(())
    }

    fn record_part(&mut self, src: WorkerId, atoms: Vec<AtomId>, out: &mut Outbox) -> Result<(), RuntimeError> {
        let c = self.coord_mut();
        if c.phase != Phase::Model {
            return Err(RuntimeError::Protocol(format!(
                "unexpected model part from worker {src}"
            )));
        }
        c.parts[src as usize] = Some(atoms);
        if c.parts.iter().any(Option::is_none) {
            return Ok(());
        }
        let model: Interpretation = c.parts.iter_mut().flat_map(|p| p.take().unwrap_or_default()).collect();
        c.models.push(model.clone());
        out.events.push(CoordEvent::Model(model));
        let next = if c.model_cap_reached() || c.script.is_some() {
            Directive::Halt
        } else {
            backtrack_directive(&c.decisions)
        };
        self.apply_directive(next, Color::Plus, out)
    }

    fn apply_directive(&mut self, d: Directive, color: Color, out: &mut Outbox) -> Result<(), RuntimeError> {
        let c = self.coord_mut();
        match d {
            Directive::Refound => {
                let epoch = c.next_epoch();
                c.phase = Phase::Propagate(Next::Sweep);
                self.broadcast(Body::StartFounding { epoch }, out)
            }
            Directive::Decide(rule) => {
                c.decisions.push((rule, color));
                c.stats.decisions += 1;
                let level = c.decisions.len() as u32;
                let epoch = c.next_epoch();
                c.phase = Phase::Propagate(Next::Founding);
                self.broadcast(
                    Body::Decide {
                        epoch,
                        level,
                        rule,
                        color,
                    },
                    out,
                )
            }
            Directive::Backtrack { level, rule } => {
                c.decisions.truncate(level as usize);
                c.decisions[level as usize - 1].1 = Color::Minus;
                c.stats.decisions += 1;
                c.stats.backtracks += 1;
                let epoch = c.next_epoch();
                c.phase = Phase::Propagate(Next::Founding);
                self.broadcast(Body::Backtrack { epoch, level, rule }, out)
            }
            Directive::ModelFound => {
                c.phase = Phase::Model;
                c.parts.iter_mut().for_each(|p| *p = None);
                self.broadcast(Body::ModelFound, out)
            }
            Directive::Halt => {
                c.phase = Phase::Done;
                self.broadcast(Body::Halt, out)
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::partition::round_robin;
    use crate::program::parse_program;

    fn setup(src: &str, assignment: Vec<WorkerId>, k: usize) -> (Arc<RdgPrime>, Arc<Partition>) {
        let g = Arc::new(RdgPrime::build(&parse_program(src).unwrap()));
        let p = Arc::new(Partition::new(assignment, k).unwrap());
        (g, p)
    }

    #[test]
    fn local_head_sends_nothing() {
        // r0 = vertex 0, a = vertex 1
        let (g, p) = setup("a.", vec![0, 0], 1);
        let mut w = Worker::new(0, g, p, None);
        let out = w
            .notify_change_step(Event::ColorRule {
                rule: RuleId(0),
                color: Color::Plus,
            })
            .unwrap();
        assert!(out.is_empty());
        assert_eq!(w.pending_tasks(), 1);
    }

    #[test]
    fn remote_head_sends_one_message() {
        let (g, p) = setup("a.", vec![0, 1], 2);
        let mut w = Worker::new(0, g, p, None);
        let out = w
            .notify_change_step(Event::ColorRule {
                rule: RuleId(0),
                color: Color::Plus,
            })
            .unwrap();
        assert_eq!(out.len(), 1);
        assert_eq!(out[0].dst, 1);
        assert!(matches!(out[0].body, Body::AtomProvenTrue { .. }));
    }

    #[test]
    fn rejects_foreign_vertex() {
        let (g, p) = setup("a.", vec![0, 1], 2);
        let mut w = Worker::new(1, g, p, None);
        let err = w.notify_change_step(Event::ColorRule {
            rule: RuleId(0),
            color: Color::Plus,
        });
        assert!(matches!(err, Err(RuntimeError::NotOwned { vertex: 0, worker: 1 })));
    }

    #[test]
    fn third_disabled_definer_fans_out() {
        // a has three definers (r0..r2); it feeds r3 positively and r4 negatively.
        let src = "a :- x. a :- y. a :- z. b :- a. c :- not a.";
        let g = RdgPrime::build(&parse_program(src).unwrap());
        let a = g.program().atom_table().get("a").unwrap();
        let n = g.num_vertices();
        // everything on worker 0 except rules r3 and r4
        let mut assignment = vec![0; n];
        assignment[3] = 1;
        assignment[4] = 1;
        let g = Arc::new(g);
        let p = Arc::new(Partition::new(assignment, 2).unwrap());
        let mut w = Worker::new(0, g, p, None);
        let minus = Event::DefinerColored {
            atom: a,
            color: Color::Minus,
        };
        assert!(w.notify_change_step(minus).unwrap().is_empty());
        assert!(w.notify_change_step(minus).unwrap().is_empty());
        let out = w.notify_change_step(minus).unwrap();
        assert_eq!(out.len(), 2);
        assert!(out
            .iter()
            .all(|m| matches!(m.body, Body::AtomDecided { value: false, .. })));
        assert!(w.atom_state(a).unwrap().proven_false());
    }

    #[test]
    fn single_worker_solves_alone() {
        let (g, p) = setup("a :- not b. b :- not a.", vec![0; 4], 1);
        let mut w = Worker::new(0, g, p, None);
        let mut out = Outbox::default();
        w.start(&mut out).unwrap();
        while !w.is_halted() {
            w.run_local(&mut out).unwrap();
            if w.poll(&mut out) {
                w.resume(&mut out).unwrap();
            }
        }
        assert!(out.messages.is_empty());
        assert_eq!(w.models().len(), 2);
    }

    #[test]
    fn newer_epoch_messages_wait() {
        let (g, p) = setup("a. b :- a.", round_robin(4, 2).unwrap().assignment().to_vec(), 2);
        let mut w = Worker::new(1, g, p, None);
        let mut out = Outbox::default();
        let early = Message {
            src: 0,
            dst: 1,
            body: Body::BodyFounded {
                epoch: 1,
                rule: RuleId(1),
            },
        };
        w.receive(early, &mut out).unwrap();
        assert!(!w.is_passive());
        assert!(!w.step(&mut out).unwrap());
        w.receive(
            Message {
                src: 0,
                dst: 1,
                body: Body::StartFounding { epoch: 1 },
            },
            &mut out,
        )
        .unwrap();
        assert_eq!(w.epoch(), 1);
        assert!(w.step(&mut out).unwrap());
    }
}
