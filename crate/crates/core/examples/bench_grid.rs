//! The benchmark grid as CSV, with wall time.
//!
//! cargo run --release --example bench_grid [-- 1,2,3]

use dasc::toy::{bench_csv, run_bench, BenchConfig};

fn main() -> anyhow::Result<()> {
    let sizes = match std::env::args().nth(1) {
        Some(s) => s.split(',').map(str::parse).collect::<Result<_, _>>()?,
        None => vec![1, 2, 3],
    };
    let cfg = BenchConfig {
        sizes,
        ..BenchConfig::default()
    };
    print!("{}", bench_csv(&run_bench(&cfg)?, true));
    Ok(())
}
