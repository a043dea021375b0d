//! Simulate the Bartlett `b = 1` fixed-b critical values and write them as
//! JSON.
//!
//! ```text
//! cargo run --release --example fixedb_critical_values -- [out.json] [replications] [seed]
//! ```

use dkhac::baselines::fixedb::{FixedBCriticalValues, DEFAULT_GRID, DEFAULT_REPLICATIONS, DEFAULT_SEED};
use std::path::PathBuf;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let mut args = std::env::args().skip(1);
    let out = PathBuf::from(args.next().unwrap_or_else(|| "fixedb_bartlett_b1.json".into()));
    let reps = args.next().map(|s| s.parse()).transpose()?.unwrap_or(DEFAULT_REPLICATIONS);
    let seed = args.next().map(|s| s.parse()).transpose()?.unwrap_or(DEFAULT_SEED);

    let table = FixedBCriticalValues::simulate(DEFAULT_GRID, reps, seed)?;
    for (level, q) in table.levels.iter().zip(&table.quantiles) {
        println!("{level:.2}  {q:.4}");
    }
    table.save(&out)?;
    eprintln!("wrote {}", out.display());
    Ok(())
}
