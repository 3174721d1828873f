//! The selection benchmark solved over 1..5 simulated workers with both
//! placements. Model sets match the sequential engine every time.
//!
//! cargo run --example distributed_toy [-- n]

use dasc::coloring::solve_answer_sets;
use dasc::rdg::RdgPrime;
use dasc::runtime::{distributed_solve, Distribution, RuntimeConfig};
use dasc::toy::toy_program;

fn main() -> anyhow::Result<()> {
    let n: u32 = std::env::args().nth(1).map_or(Ok(2), |s| s.parse())?;
    let program = toy_program(n, 6)?;
    let (sequential, _) = solve_answer_sets(&RdgPrime::build(&program), None);
    println!("n = {n}: {} rules, {} answer sets", program.len(), sequential.len());
    println!(
        "{:>2} {:>7} {:>6} {:>5} {:>7} {:>8} {:>7}",
        "k", "place", "cut", "prop", "control", "tokens", "same"
    );
    for k in 1..=5 {
        for dist in [Distribution::RoundRobin, Distribution::Greedy] {
            if k == 1 && dist == Distribution::Greedy {
                continue;
            }
            let out = distributed_solve(&program, &RuntimeConfig::new(k, dist))?;
            let s = &out.stats;
            println!(
                "{k:>2} {:>7} {:>6} {:>5} {:>7} {:>8} {:>7}",
                s.distribution_label(),
                s.final_cut,
                s.propagation_messages,
                s.coordination_messages,
                s.token_messages,
                out.models == sequential
            );
        }
    }
    Ok(())
}
