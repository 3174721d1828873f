//! Rule dependency graphs.
//!
//! [`RdgClassic`] connects rules to rules directly: `(r, r')` is a positive
//! edge when the head of `r` occurs in the positive body of `r'`, negative
//! when it occurs in the negative body. It is only used to cross-check the
//! bipartite graph.
//!
//! [`RdgPrime`] inserts one node per atom between the rules. Positive and
//! negative edges run from an atom to the rules using it, head edges run from
//! a rule to its head atom. Every atom node carries the counters the solver
//! needs, and `n` rules sharing a head used by `m` rules cost `n + m` edges
//! instead of `n * m`.
//!
//! Constraints have no head edge.
//!
//! Vertex numbering: rule `r` is vertex `r`, user atom `a` is vertex
//! `num_rules + a - 1`.

use std::fmt;

use crate::program::{AtomId, GroundProgram, RuleId};

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct VertexId(pub u32);

impl VertexId {
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Vertex {
    Rule(RuleId),
    Atom(AtomId),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum EdgeKind {
    /// Positive dependency.
    E0,
    /// Negative dependency.
    E1,
    /// Rule to head atom.
    E2,
}

impl fmt::Display for EdgeKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            EdgeKind::E0 => "e0",
            EdgeKind::E1 => "e1",
            EdgeKind::E2 => "e2",
        })
    }
}

/// Edge counts of either graph form. `e2` is always zero for the classic graph.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct EdgeStats {
    pub e0: usize,
    pub e1: usize,
    pub e2: usize,
    pub rule_vertices: usize,
    pub atom_vertices: usize,
}

impl EdgeStats {
    pub fn total_edges(&self) -> usize {
        self.e0 + self.e1 + self.e2
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RdgClassic {
    pub num_rules: usize,
    pub e0: Vec<(RuleId, RuleId)>,
    pub e1: Vec<(RuleId, RuleId)>,
}

impl RdgClassic {
    pub fn build(program: &GroundProgram) -> RdgClassic {
        let defining = defining_rules(program);
        let mut e0 = Vec::new();
        let mut e1 = Vec::new();
        for target in program.rule_ids() {
            let rule = program.rule(target);
            for &a in &rule.body_pos {
                e0.extend(defining[a.index()].iter().map(|&src| (src, target)));
            }
            for &a in &rule.body_neg {
                e1.extend(defining[a.index()].iter().map(|&src| (src, target)));
            }
        }
        e0.sort_unstable();
        e1.sort_unstable();
        RdgClassic {
            num_rules: program.len(),
            e0,
            e1,
        }
    }

    pub fn stats(&self) -> EdgeStats {
        EdgeStats {
            e0: self.e0.len(),
            e1: self.e1.len(),
            e2: 0,
            rule_vertices: self.num_rules,
            atom_vertices: 0,
        }
    }
}

fn defining_rules(program: &GroundProgram) -> Vec<Vec<RuleId>> {
    let mut defining = vec![Vec::new(); program.atom_table().len() + 1];
    for r in program.rule_ids() {
        if let Some(h) = program.rule(r).head {
            defining[h.index()].push(r);
        }
    }
    defining
}

/// The bipartite rule/atom dependency graph the solver runs on.
///
/// Adjacency is stored per node; edge lists are materialized in a fixed
/// order: rules by id, then body literals in rule order.
#[derive(Clone, Debug)]
pub struct RdgPrime {
    program: GroundProgram,
    /// Indexed by atom id; slot 0 (falsity) stays empty.
    defining: Vec<Vec<RuleId>>,
    pos_out: Vec<Vec<RuleId>>,
    neg_out: Vec<Vec<RuleId>>,
}

impl RdgPrime {
    pub fn build(program: &GroundProgram) -> RdgPrime {
        let n = program.atom_table().len() + 1;
        let defining = defining_rules(program);
        let mut pos_out = vec![Vec::new(); n];
        let mut neg_out = vec![Vec::new(); n];
        for r in program.rule_ids() {
            let rule = program.rule(r);
            for &a in &rule.body_pos {
                pos_out[a.index()].push(r);
            }
            for &a in &rule.body_neg {
                neg_out[a.index()].push(r);
            }
        }
        RdgPrime {
            program: program.clone(),
            defining,
            pos_out,
            neg_out,
        }
    }

    pub fn program(&self) -> &GroundProgram {
        &self.program
    }

    pub fn num_rules(&self) -> usize {
        self.program.len()
    }

    pub fn num_atoms(&self) -> usize {
        self.program.atom_table().len()
    }

    pub fn num_vertices(&self) -> usize {
        self.num_rules() + self.num_atoms()
    }

    pub fn rule_ids(&self) -> impl Iterator<Item = RuleId> {
        self.program.rule_ids()
    }

    pub fn atom_ids(&self) -> impl Iterator<Item = AtomId> {
        (1..=self.num_atoms() as u32).map(AtomId)
    }

    pub fn head(&self, r: RuleId) -> Option<AtomId> {
        self.program.rule(r).head
    }

    pub fn is_constraint(&self, r: RuleId) -> bool {
        self.program.rule(r).is_constraint()
    }

    pub fn body_pos(&self, r: RuleId) -> &[AtomId] {
        &self.program.rule(r).body_pos
    }

    pub fn body_neg(&self, r: RuleId) -> &[AtomId] {
        &self.program.rule(r).body_neg
    }

    /// Rules with head `a` (incoming head edges).
    pub fn defining(&self, a: AtomId) -> &[RuleId] {
        &self.defining[a.index()]
    }

    /// Rules with `a` in their positive body (outgoing positive edges).
    pub fn pos_out(&self, a: AtomId) -> &[RuleId] {
        &self.pos_out[a.index()]
    }

    /// Rules with `a` in their negative body (outgoing negative edges).
    pub fn neg_out(&self, a: AtomId) -> &[RuleId] {
        &self.neg_out[a.index()]
    }

    pub fn rule_vertex(&self, r: RuleId) -> VertexId {
        VertexId(r.0)
    }

    pub fn atom_vertex(&self, a: AtomId) -> VertexId {
        debug_assert!(!a.is_bottom());
        VertexId((self.num_rules() + a.index() - 1) as u32)
    }

    pub fn vertex(&self, v: VertexId) -> Vertex {
        let r = self.num_rules();
        if v.index() < r {
            Vertex::Rule(RuleId(v.0))
        } else {
            Vertex::Atom(AtomId((v.index() - r + 1) as u32))
        }
    }

    /// Every edge as `(kind, src, dst)` in deterministic order.
    pub fn edges(&self) -> Vec<(EdgeKind, VertexId, VertexId)> {
        let mut out = Vec::new();
        for r in self.rule_ids() {
            let rv = self.rule_vertex(r);
            for &a in self.body_pos(r) {
                out.push((EdgeKind::E0, self.atom_vertex(a), rv));
            }
            for &a in self.body_neg(r) {
                out.push((EdgeKind::E1, self.atom_vertex(a), rv));
            }
            if let Some(h) = self.head(r) {
                out.push((EdgeKind::E2, rv, self.atom_vertex(h)));
            }
        }
        out
    }

    pub fn stats(&self) -> EdgeStats {
        let mut s = EdgeStats {
            rule_vertices: self.num_rules(),
            atom_vertices: self.num_atoms(),
            ..EdgeStats::default()
        };
        for r in self.rule_ids() {
            let rule = self.program.rule(r);
            s.e0 += rule.body_pos.len();
            s.e1 += rule.body_neg.len();
            s.e2 += usize::from(rule.head.is_some());
        }
        s
    }

    /// Human-readable vertex label: `r<id>` for rules, the atom text for atoms.
    pub fn label(&self, v: VertexId) -> String {
        match self.vertex(v) {
            Vertex::Rule(r) => r.to_string(),
            Vertex::Atom(a) => self.program.atom_text(a).to_owned(),
        }
    }
}

/// Line-oriented dump, one `kind src dst` line per edge with numeric vertex ids.
pub fn dump_prime(g: &RdgPrime) -> String {
    let mut out = String::new();
    for (kind, src, dst) in g.edges() {
        out.push_str(&format!("{kind} {} {}\n", src.0, dst.0));
    }
    out
}

/// Same as [`dump_prime`] for the classic graph; vertices are rule ids.
pub fn dump_classic(g: &RdgClassic) -> String {
    let mut out = String::new();
    for &(a, b) in &g.e0 {
        out.push_str(&format!("e0 {} {}\n", a.0, b.0));
    }
    for &(a, b) in &g.e1 {
        out.push_str(&format!("e1 {} {}\n", a.0, b.0));
    }
    out
}
