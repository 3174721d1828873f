//! Watch the coordinator: every closure, every model, and what the token
//! ring cost, under a seeded random scheduler.

use std::sync::Arc;

use dasc::program::parse_program;
use dasc::rdg::RdgPrime;
use dasc::runtime::{place, CoordEvent, Distribution, Scheduler, Simulation};

fn main() -> anyhow::Result<()> {
    let program = parse_program(
        "a :- not b. b :- not a.
         c :- a, not d. d :- not c.
         :- d, b.",
    )?;
    let g = Arc::new(RdgPrime::build(&program));
    let placement = place(&g, 3, Distribution::Greedy)?;
    let mut sim = Simulation::new(
        g.clone(),
        Arc::new(placement.partition),
        None,
        Scheduler::Random { seed: 42 },
    )
    .record_transcript();

    sim.run_observed(None, &mut |ev, s| match ev {
        CoordEvent::Closure { path, conflict } => {
            let path: Vec<String> = path.iter().map(|(r, c)| format!("{r}{c}")).collect();
            println!(
                "closure [{}]{} after {} actions, {} in flight",
                path.join(" "),
                if *conflict { " conflict" } else { "" },
                s.stats().actions,
                s.in_flight()
            );
        }
        CoordEvent::Model(m) => println!("model {}", m.display(&program)),
    })?;

    let st = sim.stats();
    let coord = sim.workers()[0].coordinator_stats().unwrap_or_default();
    println!(
        "{} actions, {} deliveries, {} detections, {} token rounds, worst {} rounds to detect, {} early detections",
        st.actions, st.delivered, st.detections, coord.token_rounds, st.max_rounds_to_detect, st.quiescence_violations
    );
    println!("transcript: {} bytes", sim.transcript().map_or(0, <[u8]>::len));
    Ok(())
}
