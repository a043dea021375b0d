//! Run one size/power experiment and print its rejection rates.
//!
//! Usage: monte_carlo_experiment [model] [T] [replications] [seed] [deltas,comma,separated]

use dkhac::baselines::FixedBCriticalValues;
use dkhac::montecarlo::{run_experiment, ExperimentConfig, ModelId};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let args: Vec<String> = std::env::args().skip(1).collect();
    let model: ModelId = args.first().map_or("M1", String::as_str).parse()?;
    let nobs: usize = args.get(1).map_or(Ok(200), |s| s.parse())?;
    let reps: usize = args.get(2).map_or(Ok(1000), |s| s.parse())?;
    let seed: u64 = args.get(3).map_or(Ok(1), |s| s.parse())?;
    let deltas: Vec<f64> = match args.get(4) {
        Some(s) => s.split(',').map(str::parse).collect::<Result<_, _>>()?,
        None => vec![0.0],
    };
    let mut cfg = ExperimentConfig::new(model, nobs, deltas, reps, seed);
    cfg.workers = std::thread::available_parallelism().map_or(1, |n| n.get());
    let report = run_experiment(&cfg, &FixedBCriticalValues::embedded())?;
    println!("{} T={} test={} R={} ({:.1}s)", report.model, report.nobs, report.test.label(), reps, report.wall_clock_secs);
    for c in &report.cells {
        println!("  delta={:<5} {:<11} rate={:.3} se={:.3} failures={}", c.delta, c.estimator, c.rate, c.mc_se, c.failures);
    }
    Ok(())
}
