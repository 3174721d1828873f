//! Parse a ground program and enumerate its answer sets with the
//! sequential coloring engine.
//!
//! cargo run --example solve_program [-- path/to/program.gasp]

use dasc::coloring::{answer_set_of, Solver};
use dasc::program::parse_program;
use dasc::rdg::RdgPrime;

const DEFAULT: &str = "\
% a choice between a and b, c follows from either
a :- not b.
b :- not a.
c :- a.
c :- b.
d :- c, not e.
e :- not d.
";

fn main() -> anyhow::Result<()> {
    let text = match std::env::args().nth(1) {
        Some(path) => std::fs::read_to_string(path)?,
        None => DEFAULT.to_string(),
    };
    let program = parse_program(&text)?;
    let g = RdgPrime::build(&program);

    let mut solver = Solver::new(&g).with_trace(|e| println!("  {e}"));
    let mut n = 0;
    for c in solver.by_ref() {
        n += 1;
        let x = answer_set_of(&g, &c);
        println!("Answer {n}: {}", x.sorted_texts(&program).join(" "));
    }
    let s = solver.stats();
    println!(
        "{n} answer sets, {} decisions, {} backtracks, {} conflicts",
        s.decisions, s.backtracks, s.conflicts
    );
    Ok(())
}
