//! Acceptance run: prints one PASS/FAIL line per criterion and exits
//! non-zero if any of them fails.

mod common;

use std::collections::BTreeSet;
use std::process::ExitCode;
use std::sync::Arc;
use std::time::{Duration, Instant};

use common::{corpus, fan_pattern, model_set, oracle_models, Case};
use dasc::coloring::{atom_states, op_p, op_pv_star, op_v, rule_status, solve_answer_sets, Coloring, ColoringState};
use dasc::oracle::is_answer_set;
use dasc::partition::{cut_report, cut_size, redistribute, round_robin, CutGraph, Partition};
use dasc::program::{parse_program, RuleId};
use dasc::rdg::{EdgeKind, RdgClassic, RdgPrime, Vertex, VertexId};
use dasc::runtime::{
    distributed_solve, solve_placed, Distribution, Outbox, Placement, RunStats, RuntimeConfig, Scheduler, Transport,
    Worker,
};
use dasc::toy::{toy_program, toy_rule_count};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Outcome = Result<String, String>;
type Criterion<'a> = Box<dyn Fn() -> Outcome + 'a>;

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn oracle_equivalence(cases: &[Case]) -> Outcome {
    let start = Instant::now();
    for c in cases {
        let g = RdgPrime::build(&c.program);
        let (models, _) = solve_answer_sets(&g, None);
        let got = model_set(&c.program, &models);
        ensure(models.len() == got.len(), || format!("{}: duplicate models", c.name))?;
        let want = oracle_models(&c.program);
        ensure(got == want, || {
            format!("{}: solver {:?} vs oracle {:?}", c.name, got, want)
        })?;
    }
    let t = start.elapsed();
    ensure(t < Duration::from_secs(60), || format!("took {t:?}"))?;
    Ok(format!("{} programs in {:.2?}", cases.len(), t))
}

fn comparable(mut s: RunStats) -> RunStats {
    s.wall_time = Duration::ZERO;
    s
}

fn distribution_transparency(cases: &[Case]) -> Outcome {
    let mut runs = 0;
    for c in cases {
        let g = RdgPrime::build(&c.program);
        let (seq, _) = solve_answer_sets(&g, None);
        let want = model_set(&c.program, &seq);
        let socket_ks: &[usize] = &[2, 5];
        let configs = (1..=5)
            .map(|k| (k, Transport::Sim))
            .chain(socket_ks.iter().map(|&k| (k, Transport::Proc)));
        for (k, transport) in configs {
            for dist in [Distribution::RoundRobin, Distribution::Greedy] {
                let cfg = RuntimeConfig {
                    transport,
                    ..RuntimeConfig::new(k, dist)
                };
                let out = distributed_solve(&c.program, &cfg)
                    .map_err(|e| format!("{} k={k} {dist} {transport:?}: {e}", c.name))?;
                ensure(
                    model_set(&c.program, &out.models) == want && out.models.len() == want.len(),
                    || {
                        format!(
                            "{} k={k} {dist} {transport:?}: models differ from the sequential engine",
                            c.name
                        )
                    },
                )?;
                ensure(out.stats.quiescence_violations == 0, || {
                    format!("{} k={k} {dist}: early quiescence detection", c.name)
                })?;
                runs += 1;
            }
        }
    }
    let mut transcripts = 0;
    for c in cases.iter().step_by(5) {
        for scheduler in [Scheduler::Random { seed: 7 }, Scheduler::RoundRobin] {
            for dist in [Distribution::RoundRobin, Distribution::Greedy] {
                let cfg = RuntimeConfig {
                    scheduler,
                    record_transcript: true,
                    ..RuntimeConfig::new(3, dist)
                };
                let a = distributed_solve(&c.program, &cfg).map_err(|e| e.to_string())?;
                let b = distributed_solve(&c.program, &cfg).map_err(|e| e.to_string())?;
                ensure(a.transcript.is_some() && a.transcript == b.transcript, || {
                    format!("{}: transcript differs between identical runs", c.name)
                })?;
                ensure(comparable(a.stats) == comparable(b.stats), || {
                    format!("{}: stats differ between identical runs", c.name)
                })?;
                transcripts += 1;
            }
        }
    }
    Ok(format!(
        "{runs} distributed runs (simulated and socket) agree; {transcripts} transcript pairs identical"
    ))
}

fn edge_compression() -> Outcome {
    let mut parts = Vec::new();
    for (n, m) in [(3, 4), (10, 10), (1, 50)] {
        let p = fan_pattern(n, m);
        let classic = RdgClassic::build(&p).stats();
        ensure(classic.e0 == n * m, || {
            format!("({n},{m}): classic e0 = {}", classic.e0)
        })?;
        let g = RdgPrime::build(&p);
        let a = g.atom_vertex(p.atom_table().get("a").unwrap());
        let through_a = g
            .edges()
            .into_iter()
            .filter(|&(kind, src, dst)| (kind == EdgeKind::E2 && dst == a) || (kind == EdgeKind::E0 && src == a))
            .count();
        ensure(through_a == n + m, || {
            format!("({n},{m}): {through_a} RDG' edges through a")
        })?;
        parts.push(format!("({n},{m}) {} -> {through_a}", n * m));
    }
    Ok(parts.join(", "))
}

fn toy_benchmark() -> Outcome {
    let mut parts = Vec::new();
    for n in 1..=4u32 {
        let start = Instant::now();
        let program = toy_program(n, 6).map_err(|e| e.to_string())?;
        let expected = (n + 2 * n + n * (n - 1) + n.pow(6)) as usize;
        ensure(
            program.len() == expected && toy_rule_count(n, 6) == Some(expected as u64),
            || format!("n={n}: {} rules, expected {expected}", program.len()),
        )?;
        let g = RdgPrime::build(&program);
        let (models, _) = solve_answer_sets(&g, None);
        ensure(models.len() == n as usize + 1, || {
            format!("n={n}: {} models", models.len())
        })?;
        for m in &models {
            ensure(is_answer_set(&program, m), || {
                format!("n={n}: {} is not an answer set", m.display(&program))
            })?;
        }
        let distinct: BTreeSet<_> = models.iter().collect();
        ensure(distinct.len() == models.len(), || format!("n={n}: duplicate models"))?;
        let t = start.elapsed();
        ensure(t < Duration::from_secs(120), || format!("n={n} took {t:?}"))?;
        parts.push(format!("n={n}: {expected} rules, {} models, {t:.2?}", models.len()));
    }
    let program = toy_program(2, 6).map_err(|e| e.to_string())?;
    let one =
        distributed_solve(&program, &RuntimeConfig::new(1, Distribution::RoundRobin)).map_err(|e| e.to_string())?;
    let three =
        distributed_solve(&program, &RuntimeConfig::new(3, Distribution::RoundRobin)).map_err(|e| e.to_string())?;
    ensure(
        three.models.len() == 3 && model_set(&program, &one.models) == model_set(&program, &three.models),
        || "n=2: k=3 differs from k=1".into(),
    )?;
    Ok(parts.join("; "))
}

fn random_graph(rng: &mut ChaCha8Rng) -> CutGraph {
    let n = rng.gen_range(4..=40);
    let m = rng.gen_range(0..=3 * n);
    let edges: Vec<(usize, usize)> = (0..m)
        .map(|_| (rng.gen_range(0..n), rng.gen_range(0..n)))
        .filter(|(a, b)| a != b)
        .collect();
    CutGraph::from_edges(n, edges)
}

/// Minimum cut over every partition with the same worker sizes as `p`.
fn exhaustive_min_cut(g: &CutGraph, p: &Partition) -> usize {
    let n = g.num_vertices();
    let sizes = p.sizes();
    let mut best = usize::MAX;
    for mask in 0u32..(1 << n) {
        if mask.count_ones() as usize != sizes[1] {
            continue;
        }
        let assignment = (0..n).map(|v| (mask >> v) & 1).collect();
        let q = Partition::new(assignment, 2).unwrap();
        best = best.min(cut_report(g, &q).unwrap().cut_size);
    }
    best
}

fn cut_monotonicity() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut instances = 0;
    let mut improved = 0;
    let mut seed = 10_000;
    while instances < 100 {
        seed += 1;
        let g = if seed % 2 == 0 {
            let p = parse_program(&common::random_program_text(seed)).unwrap();
            CutGraph::from_rdg(&RdgPrime::build(&p))
        } else {
            random_graph(&mut rng)
        };
        if g.num_vertices() < 5 {
            continue;
        }
        for k in 2..=5 {
            let rr = round_robin(g.num_vertices(), k).unwrap();
            let first = redistribute(&g, &rr).map_err(|e| e.to_string())?;
            ensure(first.final_cut <= first.initial_cut, || {
                format!(
                    "instance {instances}, k={k}: cut grew {} -> {}",
                    first.initial_cut, first.final_cut
                )
            })?;
            ensure(
                cut_report(&g, &first.partition).unwrap().cut_size == first.final_cut,
                || format!("instance {instances}, k={k}: reported cut is wrong"),
            )?;
            let second = redistribute(&g, &first.partition).map_err(|e| e.to_string())?;
            ensure(second.swaps == 0, || {
                format!("instance {instances}, k={k}: second run swapped {}", second.swaps)
            })?;
            improved += usize::from(first.final_cut < first.initial_cut);
        }
        instances += 1;
    }
    let cliques = CutGraph::from_edges(6, [(0, 1), (0, 2), (1, 2), (3, 4), (3, 5), (4, 5), (0, 3)]);
    let rr = round_robin(6, 2).unwrap();
    let optimum = exhaustive_min_cut(&cliques, &rr);
    let r = redistribute(&cliques, &rr).map_err(|e| e.to_string())?;
    ensure(optimum == 1 && r.final_cut == optimum, || {
        format!("two cliques: greedy {} vs optimum {optimum}", r.final_cut)
    })?;
    Ok(format!(
        "{instances} instances x k=2..5, {improved} improved; two cliques {} -> {}",
        r.initial_cut, r.final_cut
    ))
}

fn locality() -> Outcome {
    let program = parse_program("a. b :- a. c :- b, not d. x :- not y. y :- not x.").unwrap();
    let g = Arc::new(RdgPrime::build(&program));
    let first = ["a", "b", "c", "d"];
    let in_first = |v: usize| match g.vertex(VertexId(v as u32)) {
        Vertex::Rule(r) => g.head(r).is_some_and(|h| first.contains(&program.atom_text(h))),
        Vertex::Atom(a) => first.contains(&program.atom_text(a)),
    };
    let assignment: Vec<u32> = (0..g.num_vertices()).map(|v| u32::from(!in_first(v))).collect();
    let partition = Partition::new(assignment, 2).unwrap();
    let cut = cut_size(&g, &partition).unwrap().cut_size;
    ensure(cut == 0, || format!("components share {cut} edges"))?;

    let mut w = Worker::new(0, g.clone(), Arc::new(partition.clone()), None);
    let mut out = Outbox::default();
    w.start(&mut out).map_err(|e| e.to_string())?;
    w.run_local(&mut out).map_err(|e| e.to_string())?;
    let cascade = out.messages.iter().filter(|m| m.body.is_propagation()).count();
    ensure(cascade == 0, || format!("fact cascade sent {cascade} messages"))?;

    let placement = Placement {
        partition,
        initial_cut: cut,
        final_cut: cut,
        swaps: 0,
    };
    let out = solve_placed(g.clone(), &placement, &RuntimeConfig::new(2, Distribution::RoundRobin))
        .map_err(|e| e.to_string())?;
    ensure(out.models.len() == 2, || format!("{} models", out.models.len()))?;
    ensure(out.stats.propagation_messages == 0, || {
        format!("{} cross-worker propagation messages", out.stats.propagation_messages)
    })?;
    let rr =
        distributed_solve(&program, &RuntimeConfig::new(2, Distribution::RoundRobin)).map_err(|e| e.to_string())?;
    Ok(format!(
        "0 propagation messages ({} control, {} token); round robin placement sends {}",
        out.stats.coordination_messages, out.stats.token_messages, rr.stats.propagation_messages
    ))
}

fn random_coloring(rng: &mut ChaCha8Rng, base: &Coloring, density: f64) -> Coloring {
    let n = base.num_rules();
    let (mut plus, mut minus): (Vec<RuleId>, Vec<RuleId>) = (base.plus().collect(), base.minus().collect());
    for i in 0..n {
        let r = RuleId(i as u32);
        if base.is_colored(r) || !rng.gen_bool(density) {
            continue;
        }
        if rng.gen_bool(0.5) {
            plus.push(r);
        } else {
            minus.push(r);
        }
    }
    Coloring::from_sets(n, plus, minus).unwrap()
}

/// After every operator application, successful or not, the incremental
/// counters match a recomputation from the coloring.
fn counters_consistent(g: &RdgPrime, c: &Coloring) -> bool {
    let fresh = |st: &ColoringState| st.atom_states() == atom_states(g, st.coloring()).as_slice();
    let mut st = ColoringState::from_coloring(g, c.clone());
    let _ = st.apply_p();
    let p_ok = fresh(&st);
    let mut st = ColoringState::from_coloring(g, c.clone());
    let _ = st.apply_v();
    let v_ok = fresh(&st);
    let mut st = ColoringState::from_coloring(g, c.clone());
    let _ = st.close_pv(&mut |_| {});
    p_ok && v_ok && fresh(&st)
}

fn operator_laws(cases: &[Case]) -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let mut checked = 0;
    let mut closed = 0;
    type Op = fn(&RdgPrime, &Coloring) -> Result<Coloring, dasc::coloring::Conflict>;
    let ops: [(&str, Op); 3] = [("P", op_p), ("V", op_v), ("PV*", op_pv_star)];
    for c in cases {
        let g = RdgPrime::build(&c.program);
        let empty = Coloring::empty(g.num_rules());
        for _ in 0..50 {
            let density = rng.gen_range(0.0..0.6);
            let small = random_coloring(&mut rng, &empty, density);
            let large = random_coloring(&mut rng, &small, 0.3);
            for (name, op) in ops {
                let (Ok(a), b) = (op(&g, &small), op(&g, &large)) else {
                    continue;
                };
                ensure(small.le(&a), || format!("{}: {name} is not extensive", c.name))?;
                if let Ok(b) = b {
                    ensure(a.le(&b), || format!("{}: {name} is not monotone", c.name))?;
                }
            }
            if let Ok(fix) = op_pv_star(&g, &small) {
                closed += 1;
                for (name, op) in ops {
                    ensure(op(&g, &fix).as_ref() == Ok(&fix), || {
                        format!("{}: PV* result is not a {name} fixpoint", c.name)
                    })?;
                }
            }
            for col in [&small, &large] {
                for r in g.rule_ids() {
                    let s = rule_status(&g, col, r);
                    ensure(!(s.supported && s.unsupported) && !(s.blocked && s.unblocked), || {
                        format!("{}: rule {r} has contradictory status", c.name)
                    })?;
                }
                let st = ColoringState::from_coloring(&g, col.clone());
                ensure(st.atom_states() == atom_states(&g, col).as_slice(), || {
                    format!("{}: counters differ from recomputation", c.name)
                })?;
                ensure(counters_consistent(&g, col), || {
                    format!("{}: counters drift under operators", c.name)
                })?;
            }
            checked += 1;
        }
    }
    Ok(format!("{checked} coloring pairs, {closed} closed without conflict"))
}

fn main() -> ExitCode {
    let cases = corpus();
    let criteria: Vec<(&str, Criterion)> = vec![
        ("oracle equivalence", Box::new(|| oracle_equivalence(&cases))),
        (
            "distribution transparency",
            Box::new(|| distribution_transparency(&cases)),
        ),
        ("edge compression", Box::new(edge_compression)),
        ("toy benchmark", Box::new(toy_benchmark)),
        ("cut monotonicity", Box::new(cut_monotonicity)),
        ("locality", Box::new(locality)),
        ("operator laws", Box::new(|| operator_laws(&cases))),
    ];
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        match check() {
            Ok(detail) => println!("PASS {} {name}: {detail}", i + 1),
            Err(why) => {
                failed += 1;
                println!("FAIL {} {name}: {why}", i + 1);
            }
        }
    }
    println!("{} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
