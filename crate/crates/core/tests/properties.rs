use std::collections::BTreeSet;

use dasc::coloring::{answer_set_of, is_admissible, op_p, op_pv_star, op_v, Color, Coloring, Solver};
use dasc::oracle::{enumerate_answer_sets, is_answer_set};
use dasc::partition::{cut_report, redistribute, round_robin, CutGraph};
use dasc::program::{parse_program, GroundProgram, RuleId};
use dasc::rdg::{RdgClassic, RdgPrime};
use dasc::runtime::message::{decode, encode};
use dasc::runtime::{Body, Report, Token};
use proptest::prelude::*;

fn literal() -> impl Strategy<Value = (bool, u8)> {
    (any::<bool>(), 0u8..8)
}

fn rule_text() -> impl Strategy<Value = String> {
    (
        proptest::option::weighted(0.9, 0u8..8),
        proptest::collection::vec(literal(), 0..4),
    )
        .prop_map(|(head, body)| {
            let body: Vec<String> = body
                .iter()
                .map(|&(neg, a)| if neg { format!("not p{a}") } else { format!("p{a}") })
                .collect();
            match (head, body.is_empty()) {
                (Some(h), true) => format!("p{h}."),
                (Some(h), false) => format!("p{h} :- {}.", body.join(", ")),
                (None, true) => "p0.".to_string(),
                (None, false) => format!(":- {}.", body.join(", ")),
            }
        })
}

fn program() -> impl Strategy<Value = GroundProgram> {
    proptest::collection::vec(rule_text(), 0..14).prop_map(|rules| parse_program(&rules.join("\n")).unwrap())
}

fn coloring_for(n: usize) -> impl Strategy<Value = Vec<Option<bool>>> {
    proptest::collection::vec(proptest::option::of(any::<bool>()), n)
}

fn to_coloring(n: usize, cells: &[Option<bool>]) -> Coloring {
    let plus = (0..n).filter(|&i| cells[i] == Some(true)).map(|i| RuleId(i as u32));
    let minus = (0..n).filter(|&i| cells[i] == Some(false)).map(|i| RuleId(i as u32));
    Coloring::from_sets(n, plus, minus).unwrap()
}

fn graph() -> impl Strategy<Value = CutGraph> {
    (2usize..24).prop_flat_map(|n| {
        proptest::collection::vec((0..n, 0..n), 0..3 * n)
            .prop_map(move |edges| CutGraph::from_edges(n, edges.into_iter().filter(|(a, b)| a != b)))
    })
}

fn body() -> impl Strategy<Value = Body> {
    let id = 0u32..1000;
    prop_oneof![
        (id.clone(), id.clone()).prop_map(|(epoch, a)| Body::AtomProvenTrue {
            epoch,
            atom: dasc::program::AtomId(a)
        }),
        (id.clone(), id.clone(), any::<bool>(), any::<bool>()).prop_map(|(epoch, r, positive, value)| {
            Body::AtomDecided {
                epoch,
                rule: RuleId(r),
                positive,
                value,
            }
        }),
        (id.clone(), 1u32..50, id.clone(), any::<bool>()).prop_map(|(epoch, level, r, plus)| Body::Decide {
            epoch,
            level,
            rule: RuleId(r),
            color: if plus { Color::Plus } else { Color::Minus },
        }),
        (any::<bool>(), proptest::option::of(id.clone()), id.clone(), id.clone()).prop_map(
            |(conflict, c, uncolored, swept)| Body::ReportCandidates(Report {
                conflict,
                candidate: c.map(RuleId),
                uncolored,
                swept,
            })
        ),
        (any::<i32>(), any::<bool>()).prop_map(|(count, black)| Body::QuiescenceToken(Token { count, black })),
        proptest::collection::vec(id, 0..10).prop_map(|v| Body::ModelPart {
            atoms: v.into_iter().map(dasc::program::AtomId).collect()
        }),
        Just(Body::Halt),
    ]
}

proptest! {
    #![proptest_config(ProptestConfig {
        cases: 200,
        failure_persistence: None,
        ..ProptestConfig::default()
    })]

    #[test]
    fn serialize_round_trips(p in program()) {
        let again = parse_program(&p.serialize()).unwrap();
        prop_assert_eq!(again.serialize(), p.serialize());
        prop_assert_eq!(again.len(), p.len());
    }

    #[test]
    fn solver_agrees_with_oracle(p in program()) {
        let g = RdgPrime::build(&p);
        let mut got: Vec<_> = Solver::new(&g).map(|c| {
            assert!(is_admissible(&g, &c).unwrap());
            answer_set_of(&g, &c)
        }).collect();
        got.sort();
        let mut want = enumerate_answer_sets(&p).unwrap();
        want.sort();
        prop_assert_eq!(&got, &want);
        for m in &got {
            prop_assert!(is_answer_set(&p, m));
        }
    }

    #[test]
    fn operators_are_monotone((p, small, extra) in program().prop_flat_map(|p| {
        let n = p.len();
        (Just(p), coloring_for(n), coloring_for(n))
    })) {
        let g = RdgPrime::build(&p);
        let n = g.num_rules();
        let lo = to_coloring(n, &small);
        let merged: Vec<Option<bool>> = small.iter().zip(&extra).map(|(a, b)| a.or(*b)).collect();
        let hi = to_coloring(n, &merged);
        prop_assert!(lo.le(&hi));
        for op in [op_p, op_v, op_pv_star] {
            if let (Ok(a), Ok(b)) = (op(&g, &lo), op(&g, &hi)) {
                prop_assert!(lo.le(&a));
                prop_assert!(a.le(&b));
            }
        }
    }

    /// Every RDG′ body edge either stands for at least one classic edge or
    /// comes from an atom nothing defines.
    #[test]
    fn compression_bound(p in program()) {
        let g = RdgPrime::build(&p);
        let prime = g.stats();
        let classic = RdgClassic::build(&p).stats();
        let undefined: usize = g
            .rule_ids()
            .map(|r| g.body_pos(r).iter().chain(g.body_neg(r)).filter(|&&a| g.defining(a).is_empty()).count())
            .sum();
        prop_assert!(prime.e0 + prime.e1 + prime.e2 <= classic.e0 + classic.e1 + p.len() + undefined);
        if undefined == 0 {
            prop_assert!(prime.e0 + prime.e1 + prime.e2 <= classic.e0 + classic.e1 + p.len() + p.atom_table().len());
        }
    }

    #[test]
    fn classic_edges_are_two_step_paths(p in program()) {
        let g = RdgPrime::build(&p);
        let classic = RdgClassic::build(&p);
        let mut pos = BTreeSet::new();
        let mut neg = BTreeSet::new();
        for r in g.rule_ids() {
            let Some(a) = g.head(r) else { continue };
            pos.extend(g.pos_out(a).iter().map(|&s| (r, s)));
            neg.extend(g.neg_out(a).iter().map(|&s| (r, s)));
        }
        prop_assert_eq!(classic.e0.iter().copied().collect::<BTreeSet<_>>(), pos);
        prop_assert_eq!(classic.e1.iter().copied().collect::<BTreeSet<_>>(), neg);
    }

    #[test]
    fn greedy_never_worsens_and_settles((g, k) in (graph(), 2usize..6)) {
        let rr = round_robin(g.num_vertices(), k).unwrap();
        let first = redistribute(&g, &rr).unwrap();
        prop_assert!(first.final_cut <= first.initial_cut);
        prop_assert_eq!(cut_report(&g, &first.partition).unwrap().cut_size, first.final_cut);
        prop_assert_eq!(first.partition.sizes(), rr.sizes());
        prop_assert_eq!(redistribute(&g, &first.partition).unwrap().swaps, 0);
    }

    #[test]
    fn frames_round_trip(b in body()) {
        let frame = encode(&b);
        let len = u32::from_le_bytes(frame[..4].try_into().unwrap()) as usize;
        prop_assert_eq!(len, frame.len() - 4);
        prop_assert_eq!((len - 1) % 4, 0);
        prop_assert_eq!(decode(&frame[4..]).unwrap(), b);
    }
}
