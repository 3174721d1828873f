//! Sequential coloring semantics over [`RdgPrime`].
//!
//! A coloring marks rules as applied (⊕) or blocked out (⊖). Answer sets are
//! exactly the heads of the ⊕ rules of the total colorings reachable from the
//! empty coloring by alternating two steps:
//!
//! * deterministic closure under the propagation operator `P` and the
//!   unfounded-rule operator `V` ([`op_pv_star`]);
//! * a choice `D` that colors one supported, still uncolored rule
//!   ([`branch_d`]).
//!
//! [`Solver`] runs that search depth first. It is the reference the
//! distributed runtime is checked against, so the branching order is fixed:
//! the lowest supported uncolored non-constraint rule, ⊕ before ⊖.
//!
//! Rule statuses are read off per-atom counters ([`AtomState`]) that
//! [`ColoringState`] keeps up to date as rules are colored.

use std::fmt;

use thiserror::Error;

use crate::oracle::Interpretation;
use crate::program::{AtomId, RuleId};
use crate::rdg::RdgPrime;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Color {
    Plus,
    Minus,
}

impl Color {
    pub fn flip(self) -> Color {
        match self {
            Color::Plus => Color::Minus,
            Color::Minus => Color::Plus,
        }
    }
}

impl fmt::Display for Color {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Color::Plus => "+",
            Color::Minus => "-",
        })
    }
}

/// A partial coloring `(C⊕, C⊖)`. The two sides are disjoint by construction.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Coloring {
    cells: Vec<Option<Color>>,
}

impl Coloring {
    pub fn empty(num_rules: usize) -> Self {
        Coloring {
            cells: vec![None; num_rules],
        }
    }

    /// Fails with a conflict if some rule is on both sides.
    pub fn from_sets(
        num_rules: usize,
        plus: impl IntoIterator<Item = RuleId>,
        minus: impl IntoIterator<Item = RuleId>,
    ) -> Result<Self, Conflict> {
        let mut c = Coloring::empty(num_rules);
        for r in plus {
            c.cells[r.index()] = Some(Color::Plus);
        }
        for r in minus {
            if c.cells[r.index()] == Some(Color::Plus) {
                return Err(Conflict::overlap(r));
            }
            c.cells[r.index()] = Some(Color::Minus);
        }
        Ok(c)
    }

    pub fn num_rules(&self) -> usize {
        self.cells.len()
    }

    pub fn get(&self, r: RuleId) -> Option<Color> {
        self.cells[r.index()]
    }

    pub fn is_colored(&self, r: RuleId) -> bool {
        self.cells[r.index()].is_some()
    }

    fn ids_with(&self, color: Option<Color>) -> impl Iterator<Item = RuleId> + '_ {
        self.cells
            .iter()
            .enumerate()
            .filter(move |(_, &c)| c == color)
            .map(|(i, _)| RuleId(i as u32))
    }

    pub fn plus(&self) -> impl Iterator<Item = RuleId> + '_ {
        self.ids_with(Some(Color::Plus))
    }

    pub fn minus(&self) -> impl Iterator<Item = RuleId> + '_ {
        self.ids_with(Some(Color::Minus))
    }

    pub fn uncolored(&self) -> impl Iterator<Item = RuleId> + '_ {
        self.ids_with(None)
    }

    pub fn colored_count(&self) -> usize {
        self.cells.iter().filter(|c| c.is_some()).count()
    }

    pub fn is_total(&self) -> bool {
        self.cells.iter().all(Option::is_some)
    }

    /// The partial order `C ⊑ C'`: both sides grow.
    pub fn le(&self, other: &Coloring) -> bool {
        self.cells.len() == other.cells.len() && self.cells.iter().zip(&other.cells).all(|(a, b)| a.is_none() || a == b)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ConflictKind {
    /// The rule would be both ⊕ and ⊖.
    Overlap,
    /// A constraint became supported and unblocked.
    ConstraintApplicable,
    /// A ⊕ rule is not derivable without ⊖ rules.
    Unfounded,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Error)]
#[error("conflict on rule {rule}: {kind:?}")]
pub struct Conflict {
    pub rule: RuleId,
    pub kind: ConflictKind,
}

impl Conflict {
    fn overlap(rule: RuleId) -> Self {
        Conflict {
            rule,
            kind: ConflictKind::Overlap,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ColoringError {
    #[error("rule {0} is already colored")]
    AlreadyColored(RuleId),
    #[error("rule {0} is not supported")]
    NotSupported(RuleId),
    #[error("constraint {0} cannot be colored +")]
    ConstraintChoice(RuleId),
    #[error("coloring is partial")]
    NotTotal,
    #[error(transparent)]
    Conflict(#[from] Conflict),
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct RuleStatus {
    pub supported: bool,
    pub unsupported: bool,
    pub blocked: bool,
    pub unblocked: bool,
}

/// Truth counters of one atom node.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct AtomState {
    /// Rules with this atom as head.
    pub total_defining: u32,
    /// Of those, how many are ⊖.
    pub minus_defining: u32,
    /// Of those, how many are ⊕.
    pub plus_defining: u32,
}

impl AtomState {
    pub fn proven_true(&self) -> bool {
        self.plus_defining > 0
    }

    pub fn proven_false(&self) -> bool {
        self.minus_defining == self.total_defining
    }
}

/// Recomputes every atom's counters from scratch. Index 0 is the falsity slot.
pub fn atom_states(g: &RdgPrime, c: &Coloring) -> Vec<AtomState> {
    let mut atoms = vec![AtomState::default(); g.num_atoms() + 1];
    for a in g.atom_ids() {
        let st = &mut atoms[a.index()];
        for &r in g.defining(a) {
            st.total_defining += 1;
            match c.get(r) {
                Some(Color::Plus) => st.plus_defining += 1,
                Some(Color::Minus) => st.minus_defining += 1,
                None => {}
            }
        }
    }
    atoms
}

fn status_from(g: &RdgPrime, atoms: &[AtomState], r: RuleId) -> RuleStatus {
    let pos = g.body_pos(r);
    let neg = g.body_neg(r);
    RuleStatus {
        supported: pos.iter().all(|a| atoms[a.index()].proven_true()),
        unsupported: pos.iter().any(|a| atoms[a.index()].proven_false()),
        blocked: neg.iter().any(|a| atoms[a.index()].proven_true()),
        unblocked: neg.iter().all(|a| atoms[a.index()].proven_false()),
    }
}

/// Status of rule `r` under coloring `c`.
pub fn rule_status(g: &RdgPrime, c: &Coloring, r: RuleId) -> RuleStatus {
    status_from(g, &atom_states(g, c), r)
}

/// Plus-side of `T*(c)`: close `c⊕` under adding every supported rule not in `c⊖`.
fn t_star_plus(g: &RdgPrime, c: &Coloring) -> Vec<bool> {
    let mut plus: Vec<bool> = (0..g.num_rules())
        .map(|i| c.get(RuleId(i as u32)) == Some(Color::Plus))
        .collect();
    let mut atom_true = vec![false; g.num_atoms() + 1];
    let mut pos_true = vec![0usize; g.num_rules()];
    let mut queue: Vec<RuleId> = Vec::new();
    let allowed = |r: RuleId| c.get(r) != Some(Color::Minus);
    for r in g.rule_ids() {
        if plus[r.index()] {
            queue.push(r);
        } else if g.body_pos(r).is_empty() && allowed(r) {
            plus[r.index()] = true;
            queue.push(r);
        }
    }
    while let Some(r) = queue.pop() {
        let Some(h) = g.head(r) else { continue };
        if std::mem::replace(&mut atom_true[h.index()], true) {
            continue;
        }
        for &s in g.pos_out(h) {
            pos_true[s.index()] += 1;
            if pos_true[s.index()] == g.body_pos(s).len() && !plus[s.index()] && allowed(s) {
                plus[s.index()] = true;
                queue.push(s);
            }
        }
    }
    plus
}

/// Rules derivable bottom-up from facts without using any ⊖ rule.
fn founded(g: &RdgPrime, c: &Coloring) -> Vec<bool> {
    let seed = Coloring::from_sets(c.num_rules(), [], c.minus()).expect("minus only");
    t_star_plus(g, &seed)
}

/// A coloring together with incrementally maintained atom counters.
#[derive(Clone, Debug)]
pub struct ColoringState<'g> {
    g: &'g RdgPrime,
    coloring: Coloring,
    atoms: Vec<AtomState>,
}

impl<'g> ColoringState<'g> {
    pub fn new(g: &'g RdgPrime) -> Self {
        Self::from_coloring(g, Coloring::empty(g.num_rules()))
    }

    pub fn from_coloring(g: &'g RdgPrime, coloring: Coloring) -> Self {
        let atoms = atom_states(g, &coloring);
        ColoringState { g, coloring, atoms }
    }

    pub fn coloring(&self) -> &Coloring {
        &self.coloring
    }

    pub fn into_coloring(self) -> Coloring {
        self.coloring
    }

    pub fn atom(&self, a: AtomId) -> &AtomState {
        &self.atoms[a.index()]
    }

    pub fn atom_states(&self) -> &[AtomState] {
        &self.atoms
    }

    pub fn status(&self, r: RuleId) -> RuleStatus {
        status_from(self.g, &self.atoms, r)
    }

    /// Colors `r`, updating its head's counters. Recoloring with the same
    /// color is a no-op; the opposite color is a conflict.
    pub fn assign(&mut self, r: RuleId, color: Color) -> Result<bool, Conflict> {
        match self.coloring.cells[r.index()] {
            Some(c) if c == color => return Ok(false),
            Some(_) => return Err(Conflict::overlap(r)),
            None => {}
        }
        self.coloring.cells[r.index()] = Some(color);
        if let Some(h) = self.g.head(r) {
            let st = &mut self.atoms[h.index()];
            match color {
                Color::Plus => st.plus_defining += 1,
                Color::Minus => st.minus_defining += 1,
            }
        }
        Ok(true)
    }

    /// One application of `P`: supported and unblocked rules go ⊕,
    /// unsupported or blocked rules go ⊖. Statuses are all read before any
    /// rule is recolored. Returns whether anything changed.
    pub fn apply_p(&mut self) -> Result<Delta, Conflict> {
        let mut to_plus = Vec::new();
        let mut to_minus = Vec::new();
        for r in self.g.rule_ids() {
            let s = self.status(r);
            let current = self.coloring.get(r);
            if s.supported && s.unblocked {
                if self.g.is_constraint(r) {
                    return Err(Conflict {
                        rule: r,
                        kind: ConflictKind::ConstraintApplicable,
                    });
                }
                match current {
                    Some(Color::Minus) => return Err(Conflict::overlap(r)),
                    None => to_plus.push(r),
                    Some(Color::Plus) => {}
                }
            } else if s.unsupported || s.blocked {
                match current {
                    Some(Color::Plus) => return Err(Conflict::overlap(r)),
                    None => to_minus.push(r),
                    Some(Color::Minus) => {}
                }
            }
        }
        for &r in &to_plus {
            self.assign(r, Color::Plus)?;
        }
        for &r in &to_minus {
            self.assign(r, Color::Minus)?;
        }
        Ok(Delta {
            plus: to_plus,
            minus: to_minus,
        })
    }

    /// One application of `V`: every rule outside the founded set goes ⊖.
    /// A ⊕ rule outside it is a conflict.
    pub fn apply_v(&mut self) -> Result<Delta, Conflict> {
        let founded = founded(self.g, &self.coloring);
        let mut to_minus = Vec::new();
        for r in self.g.rule_ids() {
            if founded[r.index()] {
                continue;
            }
            match self.coloring.get(r) {
                Some(Color::Plus) => {
                    return Err(Conflict {
                        rule: r,
                        kind: ConflictKind::Unfounded,
                    })
                }
                Some(Color::Minus) => {}
                None => to_minus.push(r),
            }
        }
        for &r in &to_minus {
            self.assign(r, Color::Minus)?;
        }
        Ok(Delta {
            plus: Vec::new(),
            minus: to_minus,
        })
    }

    /// Closes the state under `P` and `V`, reporting each productive
    /// operator application to `trace`.
    pub fn close_pv(&mut self, trace: &mut dyn FnMut(TraceEvent)) -> Result<(), Conflict> {
        loop {
            loop {
                let d = self.apply_p().inspect_err(|c| trace(TraceEvent::Conflict(*c)))?;
                if d.is_empty() {
                    break;
                }
                trace(TraceEvent::P(d));
            }
            let d = self.apply_v().inspect_err(|c| trace(TraceEvent::Conflict(*c)))?;
            if d.is_empty() {
                return Ok(());
            }
            trace(TraceEvent::V(d));
        }
    }

    /// The branching operator `D`: color a supported, uncolored rule.
    pub fn branch(&mut self, r: RuleId, color: Color) -> Result<(), ColoringError> {
        if self.coloring.is_colored(r) {
            return Err(ColoringError::AlreadyColored(r));
        }
        if !self.status(r).supported {
            return Err(ColoringError::NotSupported(r));
        }
        if color == Color::Plus && self.g.is_constraint(r) {
            return Err(ColoringError::ConstraintChoice(r));
        }
        self.assign(r, color)?;
        Ok(())
    }

    /// Lowest supported, uncolored, non-constraint rule.
    pub fn branch_candidate(&self) -> Option<RuleId> {
        self.g
            .rule_ids()
            .find(|&r| !self.coloring.is_colored(r) && !self.g.is_constraint(r) && self.status(r).supported)
    }
}

/// Rules newly colored by one operator application.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Delta {
    pub plus: Vec<RuleId>,
    pub minus: Vec<RuleId>,
}

impl Delta {
    pub fn is_empty(&self) -> bool {
        self.plus.is_empty() && self.minus.is_empty()
    }
}

pub fn op_p(g: &RdgPrime, c: &Coloring) -> Result<Coloring, Conflict> {
    let mut st = ColoringState::from_coloring(g, c.clone());
    st.apply_p()?;
    Ok(st.into_coloring())
}

/// Least coloring above `c` closed under `T`; the ⊖ side is unchanged.
pub fn op_t_star(g: &RdgPrime, c: &Coloring) -> Coloring {
    let plus = t_star_plus(g, c);
    let mut out = c.clone();
    for (i, &p) in plus.iter().enumerate() {
        if p {
            out.cells[i] = Some(Color::Plus);
        }
    }
    out
}

/// `(C⊕, C⊖ ∪ (Π \ V))` where `V` is the ⊕ side of `T*((∅, C⊖))`.
pub fn op_v(g: &RdgPrime, c: &Coloring) -> Result<Coloring, Conflict> {
    let mut st = ColoringState::from_coloring(g, c.clone());
    st.apply_v()?;
    Ok(st.into_coloring())
}

pub fn op_pv_star(g: &RdgPrime, c: &Coloring) -> Result<Coloring, Conflict> {
    let mut st = ColoringState::from_coloring(g, c.clone());
    st.close_pv(&mut |_| {})?;
    Ok(st.into_coloring())
}

pub fn branch_d(g: &RdgPrime, c: &Coloring, r: RuleId, color: Color) -> Result<Coloring, ColoringError> {
    let mut st = ColoringState::from_coloring(g, c.clone());
    st.branch(r, color)?;
    Ok(st.into_coloring())
}

/// Whether a total coloring corresponds to an answer set.
pub fn is_admissible(g: &RdgPrime, c: &Coloring) -> Result<bool, ColoringError> {
    if !c.is_total() {
        return Err(ColoringError::NotTotal);
    }
    let st = ColoringState::from_coloring(g, c.clone());
    for r in g.rule_ids() {
        let s = st.status(r);
        let ok = match c.get(r) {
            Some(Color::Plus) => s.supported && s.unblocked && !g.is_constraint(r),
            Some(Color::Minus) => s.unsupported || s.blocked,
            None => unreachable!(),
        };
        if !ok {
            return Ok(false);
        }
    }
    Ok(op_v(g, c).is_ok_and(|v| &v == c))
}

/// Heads of the ⊕ rules.
pub fn answer_set_of(g: &RdgPrime, c: &Coloring) -> Interpretation {
    c.plus().filter_map(|r| g.head(r)).collect()
}

/// One line of the solver trace.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum TraceEvent {
    P(Delta),
    V(Delta),
    Decide { depth: usize, rule: RuleId, color: Color },
    Conflict(Conflict),
    Model(usize),
    DeadEnd,
}

impl fmt::Display for TraceEvent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fn ids(v: &[RuleId]) -> String {
            v.iter().map(|r| r.to_string()).collect::<Vec<_>>().join(",")
        }
        match self {
            TraceEvent::P(d) => write!(f, "P +[{}] -[{}]", ids(&d.plus), ids(&d.minus)),
            TraceEvent::V(d) => write!(f, "V -[{}]", ids(&d.minus)),
            TraceEvent::Decide { depth, rule, color } => write!(f, "D{color} {rule} @{depth}"),
            TraceEvent::Conflict(c) => write!(f, "conflict {} {:?}", c.rule, c.kind),
            TraceEvent::Model(n) => write!(f, "model {n}"),
            TraceEvent::DeadEnd => write!(f, "dead end"),
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct SolveStats {
    pub models: usize,
    /// Applications of `D`, both colors.
    pub decisions: usize,
    /// ⊖ branches taken after the ⊕ side was exhausted.
    pub backtracks: usize,
    pub conflicts: usize,
}

enum Node<'g> {
    Root,
    Branch {
        state: ColoringState<'g>,
        depth: usize,
        rule: RuleId,
        color: Color,
    },
}

type TraceFn<'g> = Box<dyn FnMut(&TraceEvent) + 'g>;

/// Depth-first enumeration of admissible colorings.
pub struct Solver<'g> {
    g: &'g RdgPrime,
    stack: Vec<Node<'g>>,
    max_models: Option<usize>,
    stats: SolveStats,
    trace: Option<TraceFn<'g>>,
}

impl<'g> Solver<'g> {
    pub fn new(g: &'g RdgPrime) -> Self {
        Solver {
            g,
            stack: vec![Node::Root],
            max_models: None,
            stats: SolveStats::default(),
            trace: None,
        }
    }

    /// Stop after `n` models. `None` enumerates all of them.
    pub fn max_models(mut self, n: Option<usize>) -> Self {
        self.max_models = n;
        self
    }

    pub fn with_trace(mut self, f: impl FnMut(&TraceEvent) + 'g) -> Self {
        self.trace = Some(Box::new(f));
        self
    }

    pub fn stats(&self) -> SolveStats {
        self.stats
    }

    fn emit(&mut self, ev: TraceEvent) {
        if let Some(t) = self.trace.as_mut() {
            t(&ev);
        }
    }
}

impl Iterator for Solver<'_> {
    type Item = Coloring;

    fn next(&mut self) -> Option<Coloring> {
        if self.max_models.is_some_and(|m| self.stats.models >= m) {
            return None;
        }
        while let Some(node) = self.stack.pop() {
            let (mut state, depth) = match node {
                Node::Root => (ColoringState::new(self.g), 0),
                Node::Branch {
                    mut state,
                    depth,
                    rule,
                    color,
                } => {
                    self.stats.decisions += 1;
                    if color == Color::Minus {
                        self.stats.backtracks += 1;
                    }
                    self.emit(TraceEvent::Decide { depth, rule, color });
                    state.branch(rule, color).expect("branch candidate is valid");
                    (state, depth)
                }
            };
            let mut events = Vec::new();
            let closed = state.close_pv(&mut |e| events.push(e));
            for e in events {
                self.emit(e);
            }
            if closed.is_err() {
                self.stats.conflicts += 1;
                continue;
            }
            if state.coloring().is_total() {
                if is_admissible(self.g, state.coloring()).unwrap_or(false) {
                    self.stats.models += 1;
                    self.emit(TraceEvent::Model(self.stats.models));
                    return Some(state.into_coloring());
                }
                continue;
            }
            let Some(rule) = state.branch_candidate() else {
                self.emit(TraceEvent::DeadEnd);
                continue;
            };
            self.stack.push(Node::Branch {
                state: state.clone(),
                depth: depth + 1,
                rule,
                color: Color::Minus,
            });
            self.stack.push(Node::Branch {
                state,
                depth: depth + 1,
                rule,
                color: Color::Plus,
            });
        }
        None
    }
}

/// All answer sets, in search order.
pub fn solve_answer_sets(g: &RdgPrime, max_models: Option<usize>) -> (Vec<Interpretation>, SolveStats) {
    let mut solver = Solver::new(g).max_models(max_models);
    let models = solver.by_ref().map(|c| answer_set_of(g, &c)).collect();
    (models, solver.stats())
}
