//! Classic rule graph against the bipartite one: n rules deriving `a` and m
//! rules using it need n*m rule-to-rule edges but only n+m through `a`.

use std::fmt::Write as _;

use dasc::program::parse_program;
use dasc::rdg::{dump_prime, RdgClassic, RdgPrime};

fn main() -> anyhow::Result<()> {
    println!("{:>4} {:>4} {:>8} {:>8}", "n", "m", "classic", "rdg'");
    for (n, m) in [(3, 4), (10, 10), (1, 50), (40, 40)] {
        let mut src = String::new();
        for i in 0..n {
            writeln!(src, "a :- not u{i}.")?;
        }
        for j in 0..m {
            writeln!(src, "b{j} :- a.")?;
        }
        let p = parse_program(&src)?;
        let classic = RdgClassic::build(&p).stats();
        let g = RdgPrime::build(&p);
        let a = g.atom_vertex(p.atom_table().get("a").unwrap());
        let through_a = g.edges().iter().filter(|&&(_, src, dst)| src == a || dst == a).count();
        println!("{n:>4} {m:>4} {:>8} {:>8}", classic.e0, through_a);
    }

    let p = parse_program("a. b :- a, not c. c :- not b.")?;
    let g = RdgPrime::build(&p);
    println!("\nedges of `a. b :- a, not c. c :- not b.`");
    for line in dump_prime(&g).lines() {
        let mut f = line.split(' ');
        let (kind, src, dst) = (f.next().unwrap(), f.next().unwrap(), f.next().unwrap());
        let label = |v: &str| g.label(dasc::rdg::VertexId(v.parse().unwrap()));
        println!("  {kind} {} -> {}", label(src), label(dst));
    }
    Ok(())
}
