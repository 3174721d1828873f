//! Step through P, V and branching by hand on a small program.

use dasc::coloring::{rule_status, Color, ColoringState};
use dasc::program::{parse_program, RuleId};
use dasc::rdg::RdgPrime;

fn show(g: &RdgPrime, st: &ColoringState) {
    for r in g.rule_ids() {
        let s = st.status(r);
        let color = match st.coloring().get(r) {
            Some(Color::Plus) => "+",
            Some(Color::Minus) => "-",
            None => ".",
        };
        println!(
            "  {color} {:<22} supported={:<5} blocked={:<5} unsupported={:<5} unblocked={}",
            g.program().display_rule(r),
            s.supported,
            s.blocked,
            s.unsupported,
            s.unblocked
        );
    }
}

fn main() -> anyhow::Result<()> {
    let program = parse_program(
        "a.
         b :- a, not c.
         c :- not b.
         d :- e.
         e :- d.
         f :- d, not b.",
    )?;
    let g = RdgPrime::build(&program);
    let mut st = ColoringState::new(&g);

    let d = st.apply_p()?;
    println!("P colors {:?} + and {:?} -", d.plus, d.minus);
    let d = st.apply_v()?;
    println!("V colors {:?} - (d and e only support each other)", d.minus);
    st.close_pv(&mut |e| println!("  {e}"))?;
    show(&g, &st);

    let r = st.branch_candidate().expect("b and c are still open");
    println!("branch on {r}: {}", program.display_rule(r));
    let mut plus = st.clone();
    plus.branch(r, Color::Plus)?;
    plus.close_pv(&mut |e| println!("  {e}"))?;
    show(&g, &plus);

    let mut minus = st.clone();
    minus.branch(r, Color::Minus)?;
    minus.close_pv(&mut |e| println!("  {e}"))?;
    show(&g, &minus);

    let s = rule_status(&g, minus.coloring(), RuleId(2));
    println!("under the - branch, c is supported: {}", s.supported && s.unblocked);
    Ok(())
}
