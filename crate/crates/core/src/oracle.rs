//! Reference stable-model semantics by direct evaluation of the definitions.
//!
//! Nothing here is clever. The solver is checked against these functions,
//! so they stay as close to the textbook definitions as possible: reduct,
//! least model by naive iteration of the immediate consequence operator,
//! and answer-set enumeration over every subset of the atoms.

use std::collections::BTreeSet;
use std::fmt;

use thiserror::Error;

use crate::program::{AtomId, GroundProgram, Rule, RuleId};

/// Default cap on the number of atoms [`enumerate_answer_sets`] will accept.
pub const DEFAULT_ATOM_BOUND: usize = 20;

/// A finite set of atoms. May contain the falsity atom when it is the
/// result of [`cn`] on a program with an applicable constraint.
#[derive(Clone, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Interpretation(BTreeSet<AtomId>);

impl Interpretation {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn contains(&self, atom: AtomId) -> bool {
        self.0.contains(&atom)
    }

    pub fn insert(&mut self, atom: AtomId) -> bool {
        self.0.insert(atom)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = AtomId> + '_ {
        self.0.iter().copied()
    }

    pub fn is_subset(&self, other: &Interpretation) -> bool {
        self.0.is_subset(&other.0)
    }

    pub fn as_set(&self) -> &BTreeSet<AtomId> {
        &self.0
    }

    /// Atom texts in lexicographic order, falsity atom omitted.
    pub fn sorted_texts<'p>(&self, program: &'p GroundProgram) -> Vec<&'p str> {
        let mut out: Vec<&str> = self
            .0
            .iter()
            .filter(|a| !a.is_bottom())
            .map(|&a| program.atom_text(a))
            .collect();
        out.sort_unstable();
        out
    }

    pub fn display<'a>(&'a self, program: &'a GroundProgram) -> impl fmt::Display + 'a {
        DisplayInterpretation { set: self, program }
    }
}

impl FromIterator<AtomId> for Interpretation {
    fn from_iter<T: IntoIterator<Item = AtomId>>(iter: T) -> Self {
        Interpretation(iter.into_iter().collect())
    }
}

struct DisplayInterpretation<'a> {
    set: &'a Interpretation,
    program: &'a GroundProgram,
}

impl fmt::Display for DisplayInterpretation<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{{}}}", self.set.sorted_texts(self.program).join(", "))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum OracleError {
    #[error("rule {0} has a negative body; least models are defined only for definite programs")]
    NotDefinite(RuleId),
    #[error("program has {atoms} atoms, above the enumeration bound of {bound}")]
    TooManyAtoms { atoms: usize, bound: usize },
}

fn body_holds(x: &Interpretation, rule: &Rule) -> bool {
    rule.body_pos.iter().all(|&a| x.contains(a)) && rule.body_neg.iter().all(|&a| !x.contains(a))
}

/// `X ⊨ r`: whenever the body holds in X, the head is in X. Constraints are
/// satisfied exactly when their body does not hold.
pub fn satisfies(x: &Interpretation, rule: &Rule) -> bool {
    if !body_holds(x, rule) {
        return true;
    }
    match rule.head {
        Some(h) => x.contains(h),
        None => false,
    }
}

/// Gelfond-Lifschitz reduct: drop every rule whose negative body meets X,
/// strip negative bodies from the rest. Constraints survive as headless
/// definite rules.
pub fn reduct(program: &GroundProgram, x: &Interpretation) -> GroundProgram {
    let rules = program
        .rules()
        .iter()
        .filter(|r| r.body_neg.iter().all(|&a| !x.contains(a)))
        .map(|r| Rule {
            head: r.head,
            body_pos: r.body_pos.clone(),
            body_neg: Vec::new(),
        })
        .collect();
    program.with_rules(rules)
}

/// One application of the immediate consequence operator. Headless rules
/// contribute the falsity atom.
pub fn immediate_consequence(definite: &GroundProgram, x: &Interpretation) -> Interpretation {
    definite
        .rules()
        .iter()
        .filter(|r| r.body_pos.iter().all(|&a| x.contains(a)))
        .map(|r| r.head.unwrap_or(AtomId::BOTTOM))
        .collect()
}

/// The iterates `T^0(∅), T^1(∅), ...` up to and including the fixpoint.
pub fn consequence_chain(definite: &GroundProgram) -> Result<Vec<Interpretation>, OracleError> {
    check_definite(definite)?;
    let mut chain = vec![Interpretation::new()];
    loop {
        let next = immediate_consequence(definite, chain.last().unwrap());
        if &next == chain.last().unwrap() {
            return Ok(chain);
        }
        chain.push(next);
    }
}

fn check_definite(program: &GroundProgram) -> Result<(), OracleError> {
    match program.rule_ids().find(|&r| !program.rule(r).is_definite()) {
        Some(r) => Err(OracleError::NotDefinite(r)),
        None => Ok(()),
    }
}

/// Least model of a definite program.
pub fn cn(definite: &GroundProgram) -> Result<Interpretation, OracleError> {
    Ok(consequence_chain(definite)?.pop().unwrap())
}

/// Rules whose positive body lies in X and whose negative body avoids X.
pub fn generating_rules(program: &GroundProgram, x: &Interpretation) -> BTreeSet<RuleId> {
    program.rule_ids().filter(|&r| body_holds(x, program.rule(r))).collect()
}

/// Outcome of both answer-set characterizations for one candidate.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AnswerSetCheck {
    /// `Cn(Π^X)`.
    pub reduct_model: Interpretation,
    /// `Cn(R_Π(X)^∅)`.
    pub generating_model: Interpretation,
    pub is_answer_set: bool,
}

impl AnswerSetCheck {
    /// Human-readable reason the candidate was rejected, if it was.
    pub fn failure(&self, program: &GroundProgram, x: &Interpretation) -> Option<String> {
        if self.is_answer_set {
            return None;
        }
        if x.contains(AtomId::BOTTOM) || self.reduct_model.contains(AtomId::BOTTOM) {
            return Some(format!(
                "a constraint is applicable: Cn(reduct) = {} derives false",
                self.reduct_model.display(program)
            ));
        }
        let missing: Interpretation = x.iter().filter(|&a| !self.reduct_model.contains(a)).collect();
        let extra: Interpretation = self.reduct_model.iter().filter(|&a| !x.contains(a)).collect();
        Some(format!(
            "Cn(reduct) = {} differs from the candidate (unsupported: {}, missing: {})",
            self.reduct_model.display(program),
            missing.display(program),
            extra.display(program)
        ))
    }
}

/// Evaluates `Cn(Π^X) = X` and `Cn(R_Π(X)^∅) = X` side by side.
///
/// Panics if the two characterizations disagree, which would indicate a
/// bug in this module.
pub fn check_answer_set(program: &GroundProgram, x: &Interpretation) -> AnswerSetCheck {
    let reduct_model = cn(&reduct(program, x)).expect("reduct is definite");
    let generating: Vec<Rule> = generating_rules(program, x)
        .into_iter()
        .map(|r| program.rule(r).clone())
        .collect();
    let generating = reduct(&program.with_rules(generating), &Interpretation::new());
    let generating_model = cn(&generating).expect("reduct is definite");
    let sound = !x.contains(AtomId::BOTTOM);
    let by_reduct = sound && reduct_model == *x;
    let by_generating = sound && generating_model == *x;
    assert_eq!(
        by_reduct, by_generating,
        "answer-set characterizations disagree on {x:?}"
    );
    AnswerSetCheck {
        reduct_model,
        generating_model,
        is_answer_set: by_reduct,
    }
}

pub fn is_answer_set(program: &GroundProgram, x: &Interpretation) -> bool {
    check_answer_set(program, x).is_answer_set
}

/// Every answer set, found by testing each subset of the program's atoms.
///
/// Subsets are visited in increasing bitmask order, where bit `i` stands for
/// the `i`-th smallest atom id; the output follows that order.
pub fn enumerate_answer_sets(program: &GroundProgram) -> Result<Vec<Interpretation>, OracleError> {
    enumerate_answer_sets_bounded(program, DEFAULT_ATOM_BOUND)
}

pub fn enumerate_answer_sets_bounded(
    program: &GroundProgram,
    bound: usize,
) -> Result<Vec<Interpretation>, OracleError> {
    let atoms: Vec<AtomId> = program.atoms_of().into_iter().collect();
    if atoms.len() > bound {
        return Err(OracleError::TooManyAtoms {
            atoms: atoms.len(),
            bound,
        });
    }
    let mut out = Vec::new();
    for mask in 0u64..(1u64 << atoms.len()) {
        let x: Interpretation = atoms
            .iter()
            .enumerate()
            .filter(|(i, _)| mask & (1 << i) != 0)
            .map(|(_, &a)| a)
            .collect();
        if is_answer_set(program, &x) {
            out.push(x);
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::program::parse_program;

    fn interp(p: &GroundProgram, texts: &[&str]) -> Interpretation {
        texts.iter().map(|t| p.atom_table().get(t).unwrap()).collect()
    }

    fn texts(p: &GroundProgram, x: &Interpretation) -> Vec<String> {
        x.sorted_texts(p).into_iter().map(str::to_owned).collect()
    }

    #[test]
    fn satisfaction() {
        let p = parse_program("b :- a. :- a.").unwrap();
        let (r, c) = (&p.rules()[0], &p.rules()[1]);
        assert!(!satisfies(&interp(&p, &["a"]), r));
        assert!(satisfies(&interp(&p, &["a", "b"]), r));
        assert!(!satisfies(&interp(&p, &["a"]), c));
        assert!(satisfies(&Interpretation::new(), c));
    }

    #[test]
    fn reduct_examples() {
        let p = parse_program("a :- not b.").unwrap();
        assert_eq!(reduct(&p, &Interpretation::new()).serialize(), "a.\n");
        assert!(reduct(&p, &interp(&p, &["b"])).is_empty());

        let p = parse_program("a. b :- a, not c.").unwrap();
        assert_eq!(reduct(&p, &interp(&p, &["a", "b"])).serialize(), "a.\nb :- a.\n");

        let p = parse_program(":- a, not b.").unwrap();
        let r = reduct(&p, &Interpretation::new());
        assert_eq!(r.len(), 1);
        assert!(r.rules()[0].is_constraint() && r.rules()[0].is_definite());
    }

    #[test]
    fn least_model_examples() {
        let p = parse_program("a. b :- a.").unwrap();
        assert_eq!(texts(&p, &cn(&p).unwrap()), ["a", "b"]);
        assert!(cn(&GroundProgram::default()).unwrap().is_empty());
        let p = parse_program("a :- b. b :- a.").unwrap();
        assert!(cn(&p).unwrap().is_empty());
    }

    #[test]
    fn least_model_rejects_negation() {
        let p = parse_program("a. b :- not a.").unwrap();
        assert_eq!(cn(&p), Err(OracleError::NotDefinite(RuleId(1))));
    }

    #[test]
    fn constraint_derives_bottom() {
        let p = parse_program("a. :- a.").unwrap();
        assert!(cn(&p).unwrap().contains(AtomId::BOTTOM));
    }

    #[test]
    fn chain_is_monotone_and_bounded() {
        let p = parse_program("a. b :- a. c :- b. d :- c, a.").unwrap();
        let chain = consequence_chain(&p).unwrap();
        assert!(chain.len() <= p.len() + 1);
        for w in chain.windows(2) {
            assert!(w[0].is_subset(&w[1]));
        }
    }

    #[test]
    fn generating_rules_examples() {
        let p = parse_program("a :- not b. b :- not a.").unwrap();
        let got = generating_rules(&p, &interp(&p, &["a"]));
        assert_eq!(got.into_iter().collect::<Vec<_>>(), [RuleId(0)]);

        let p = parse_program("a.").unwrap();
        assert_eq!(generating_rules(&p, &Interpretation::new()).len(), 1);

        let p = parse_program("b :- a.").unwrap();
        assert!(generating_rules(&p, &Interpretation::new()).is_empty());
    }

    #[test]
    fn answer_set_examples() {
        let p = parse_program("a :- not b. b :- not a.").unwrap();
        assert!(is_answer_set(&p, &interp(&p, &["a"])));
        assert!(!is_answer_set(&p, &interp(&p, &["a", "b"])));
        let p = parse_program("a :- a.").unwrap();
        assert!(!is_answer_set(&p, &interp(&p, &["a"])));
        assert!(is_answer_set(&p, &Interpretation::new()));
    }

    #[test]
    fn failure_reasons() {
        let p = parse_program("a :- not b. b :- not a.").unwrap();
        let x = interp(&p, &["a", "b"]);
        let check = check_answer_set(&p, &x);
        assert!(check.failure(&p, &x).unwrap().contains("differs"));
        let p = parse_program("a. :- a.").unwrap();
        let x = interp(&p, &["a"]);
        assert!(check_answer_set(&p, &x).failure(&p, &x).unwrap().contains("false"));
    }

    #[test]
    fn enumeration_examples() {
        let p = parse_program("a :- not b. b :- not a.").unwrap();
        let all = enumerate_answer_sets(&p).unwrap();
        let all: Vec<Vec<String>> = all.iter().map(|x| texts(&p, x)).collect();
        assert_eq!(all, [vec!["a".to_owned()], vec!["b".to_owned()]]);

        let empty = enumerate_answer_sets(&GroundProgram::default()).unwrap();
        assert_eq!(empty, vec![Interpretation::new()]);

        let p = parse_program("a. :- a.").unwrap();
        assert!(enumerate_answer_sets(&p).unwrap().is_empty());
    }

    #[test]
    fn enumeration_bound() {
        let p = parse_program("a. b. c.").unwrap();
        assert_eq!(
            enumerate_answer_sets_bounded(&p, 2),
            Err(OracleError::TooManyAtoms { atoms: 3, bound: 2 })
        );
    }
}
