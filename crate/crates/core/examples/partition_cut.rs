//! Round-robin placement and greedy swap refinement.

use dasc::partition::{cut_report, greedy_redistribute, redistribute, round_robin, CutGraph};
use dasc::rdg::RdgPrime;
use dasc::toy::toy_program;

fn main() -> anyhow::Result<()> {
    // two triangles joined by one bridge
    let g = CutGraph::from_edges(6, [(0, 1), (0, 2), (1, 2), (3, 4), (3, 5), (4, 5), (0, 3)]);
    let rr = round_robin(6, 2)?;
    let before = cut_report(&g, &rr)?;
    let r = redistribute(&g, &rr)?;
    println!(
        "two cliques: {:?} cut {} -> {:?} cut {} ({} swaps)",
        rr.assignment(),
        before.cut_size,
        r.partition.assignment(),
        r.final_cut,
        r.swaps
    );

    let program = toy_program(3, 3)?;
    let rdg = RdgPrime::build(&program);
    println!("\ntoy n=3 arity 3: {} vertices", rdg.num_vertices());
    println!("{:>2} {:>6} {:>6} {:>6} {:>6}", "k", "rr", "greedy", "swaps", "passes");
    for k in 2..=5 {
        let rr = round_robin(rdg.num_vertices(), k)?;
        let r = greedy_redistribute(&rdg, &rr)?;
        println!(
            "{k:>2} {:>6} {:>6} {:>6} {:>6}",
            r.initial_cut, r.final_cut, r.swaps, r.passes
        );
    }
    Ok(())
}
