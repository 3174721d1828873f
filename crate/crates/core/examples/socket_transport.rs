//! Same search, but each worker is a thread talking over Unix socket pairs
//! with length-prefixed frames.

use dasc::runtime::message::{encode, read_frame};
use dasc::runtime::{distributed_solve, Body, Distribution, RuntimeConfig, Transport};
use dasc::toy::toy_program;

fn main() -> anyhow::Result<()> {
    let frame = encode(&Body::StartFounding { epoch: 3 });
    println!("StartFounding frame: {frame:02x?}");
    println!("decoded back: {:?}", read_frame(&frame[..])?);

    let program = toy_program(3, 6)?;
    for k in [2, 4] {
        let cfg = RuntimeConfig {
            transport: Transport::Proc,
            ..RuntimeConfig::new(k, Distribution::Greedy)
        };
        let out = distributed_solve(&program, &cfg)?;
        println!(
            "k={k}: {} models in {:.1?}, {} propagation / {} control / {} token messages",
            out.models.len(),
            out.stats.wall_time,
            out.stats.propagation_messages,
            out.stats.coordination_messages,
            out.stats.token_messages
        );
    }
    Ok(())
}
