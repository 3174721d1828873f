#![allow(dead_code)]

use std::collections::BTreeSet;
use std::fmt::Write as _;

use dasc::oracle::{enumerate_answer_sets, Interpretation};
use dasc::program::{parse_program, GroundProgram};
use dasc::toy::gen_toy_with_arity;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub const RANDOM_PROGRAMS: u64 = 200;

pub const HANDCRAFTED: &[(&str, &str)] = &[
    ("empty", ""),
    ("fact", "a."),
    ("facts", "a. b. c."),
    ("chain", "a. b :- a. c :- b. d :- c."),
    ("broken_chain", "b :- a. c :- b."),
    ("even_loop", "a :- not b. b :- not a."),
    ("odd_loop", "a :- not a."),
    ("odd_loop_3", "a :- not b. b :- not c. c :- not a."),
    ("odd_loop_escaped", "a :- not a. a :- b. b."),
    ("unfounded_loop", "a :- b. b :- a."),
    ("self_support", "a :- a."),
    ("loop_with_exit", "p :- q. q :- p. q :- r. r."),
    ("loop_choice", "a :- b. b :- a. a :- not c. c :- not a."),
    ("constraint_prunes", "a :- not b. b :- not a. :- a."),
    ("constraint_unsat", "a. :- a."),
    ("constraint_neg", ":- not a. a :- not b. b :- not a."),
    (
        "choose_one_of_three",
        "a :- not b, not c. b :- not a, not c. c :- not a, not b.",
    ),
    ("alternating", "a :- not b. b :- not c. c :- not d. d."),
    ("two_components", "a :- not b. b :- not a. x :- not y. y :- not x."),
    (
        "shared_head",
        "a :- not b. b :- not a. c :- a. c :- b. d :- c, not e. e :- not d.",
    ),
    ("self_block", "a :- a, not b. b :- not a."),
    (
        "pair_constraint",
        ":- a, b. a :- not c. b :- not d. c :- not a. d :- not b.",
    ),
    (
        "mixed_support",
        "a. b :- a, not c. c :- not b. d :- b. d :- c. :- d, not a.",
    ),
    (
        "deep_neg",
        "a :- not b. b :- not a. c :- a, not d. d :- a, not c. e :- d. :- e, b.",
    ),
];

/// Random program with at most 12 atoms and 25 rules.
pub fn random_program_text(seed: u64) -> String {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n_atoms = rng.gen_range(1..=12);
    let n_rules = rng.gen_range(1..=25);
    let atoms: Vec<String> = (0..n_atoms).map(|i| format!("a{i}")).collect();
    let mut out = String::new();
    for _ in 0..n_rules {
        let head = (rng.gen_range(0..10) != 0).then(|| atoms.choose(&mut rng).unwrap().clone());
        let mut pos: Vec<&String> = Vec::new();
        let mut neg: Vec<&String> = Vec::new();
        let min_body = usize::from(head.is_none());
        let len = rng.gen_range(min_body..=3);
        for _ in 0..len {
            let a = atoms.choose(&mut rng).unwrap();
            if rng.gen_bool(0.5) {
                pos.push(a);
            } else {
                neg.push(a);
            }
        }
        let body: Vec<String> = pos
            .iter()
            .map(|a| a.to_string())
            .chain(neg.iter().map(|a| format!("not {a}")))
            .collect();
        match (head, body.is_empty()) {
            (Some(h), true) => writeln!(out, "{h}.").unwrap(),
            (Some(h), false) => writeln!(out, "{h} :- {}.", body.join(", ")).unwrap(),
            (None, _) => writeln!(out, ":- {}.", body.join(", ")).unwrap(),
        }
    }
    out
}

pub struct Case {
    pub name: String,
    pub program: GroundProgram,
}

pub fn handcrafted() -> Vec<Case> {
    let mut cases: Vec<Case> = HANDCRAFTED
        .iter()
        .map(|(name, src)| Case {
            name: name.to_string(),
            program: parse_program(src).unwrap_or_else(|e| panic!("{name}: {e}")),
        })
        .collect();
    cases.push(Case {
        name: "toy_n2_arity2".into(),
        program: parse_program(&gen_toy_with_arity(2, 2).unwrap()).unwrap(),
    });
    cases
}

pub fn random_cases(count: u64) -> Vec<Case> {
    (0..count)
        .map(|seed| Case {
            name: format!("random_{seed}"),
            program: parse_program(&random_program_text(seed)).unwrap(),
        })
        .collect()
}

/// Handcrafted programs followed by the seeded random ones.
pub fn corpus() -> Vec<Case> {
    let mut c = handcrafted();
    c.extend(random_cases(RANDOM_PROGRAMS));
    c
}

pub type ModelSet = BTreeSet<Vec<String>>;

pub fn model_set(program: &GroundProgram, models: &[Interpretation]) -> ModelSet {
    models
        .iter()
        .map(|m| m.sorted_texts(program).into_iter().map(str::to_string).collect())
        .collect()
}

pub fn oracle_models(program: &GroundProgram) -> ModelSet {
    model_set(program, &enumerate_answer_sets(program).unwrap())
}

/// `n` rules defining `a`, `m` rules using `a` positively, nothing else
/// connected.
pub fn fan_pattern(n: usize, m: usize) -> GroundProgram {
    let mut src = String::new();
    for i in 0..n {
        writeln!(src, "a :- not u{i}.").unwrap();
    }
    for j in 0..m {
        writeln!(src, "b{j} :- a.").unwrap();
    }
    parse_program(&src).unwrap()
}
