//! Regenerate selected size/power tables and report cells that differ from
//! the stored reference values.
//!
//! ```text
//! cargo run --release --example regenerate_tables -- [out_dir] [replications] [table,...]
//! ```

use dkhac::baselines::FixedBCriticalValues;
use dkhac::montecarlo::{default_estimators, run_tables, TablesOptions};
use std::path::PathBuf;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let mut args = std::env::args().skip(1);
    let out_dir = PathBuf::from(args.next().unwrap_or_else(|| "tables".into()));
    let replications = args.next().map(|s| s.parse()).transpose()?.unwrap_or(1000);
    let tables = args.next().map(|s| s.split(',').map(String::from).collect());
    let opts = TablesOptions {
        out_dir,
        replications,
        seed: 1,
        workers: std::thread::available_parallelism().map_or(1, |n| n.get()),
        estimators: default_estimators(),
        nobs: Some(vec![200]),
        tables: tables.or_else(|| Some(vec!["size_m1_m2".into()])),
    };
    let summary = run_tables(&opts, &FixedBCriticalValues::embedded(), |label, reused| {
        eprintln!("{} {label}", if reused { "reusing" } else { "running" });
    })?;
    for t in &summary.tables {
        println!("{:<24} {} flagged of {}", t.label, t.flagged, t.cells);
    }
    Ok(())
}
