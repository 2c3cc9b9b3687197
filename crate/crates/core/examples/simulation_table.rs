//! Runs the LCSM vs LCM comparison for a small random-network scenario and
//! prints the summary table.
//!
//! ```text
//! cargo run --release --example simulation_table -- 20 50 100
//! ```

use lcsm::simulate::{format_summary, run_replications, AdjacencyType, SimConfig};

fn main() -> lcsm::Result<()> {
    let args: Vec<usize> = std::env::args().skip(1).filter_map(|a| a.parse().ok()).collect();
    let d = args.first().copied().unwrap_or(20);
    let n = args.get(1).copied().unwrap_or(50);
    let reps = args.get(2).copied().unwrap_or(20);

    let mut cfg = SimConfig::new(AdjacencyType::Random, d, 2, n);
    cfg.reps = reps;
    cfg.seed = 7;
    let result = run_replications(&cfg, 0)?;
    print!("{}", format_summary(&result));
    Ok(())
}
