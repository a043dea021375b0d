//! Simulate a segmented locally stationary process from a TOML spec and
//! compare local sample variances with the model's local variance.

use dkhac::sls::{self, SlsSpec};

const SPEC: &str = r#"
break_fractions = [0.4]

[[regimes]]
a1 = { kind = "cosine", level = 0.3, amplitude = 0.3, cycles = 1.0, phase = 0.0 }
sigma = { kind = "constant", value = 1.0 }

[[regimes]]
a1 = { kind = "constant", value = -0.4 }
sigma = { kind = "linear", start = 1.0, end = 2.0 }
"#;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let spec: SlsSpec = toml::from_str(SPEC)?;
    spec.validate()?;
    let t = 5000;
    let v = sls::simulate(&spec, t, 3)?;
    println!("  u     sample var   c(u, 0)");
    for k in 0..10 {
        let (lo, hi) = (k * t / 10, (k + 1) * t / 10);
        let seg = v.slice_rows(lo, hi).column(0);
        let var = seg.iter().map(|x| x * x).sum::<f64>() / seg.len() as f64;
        let u = (lo + hi) as f64 / (2 * t) as f64;
        println!("{u:.2}    {var:>9.3}   {:>8.3}", sls::local_autocov(&spec, u, 0));
    }
    println!("population LRV {:.3}", sls::population_lrv(&spec));
    Ok(())
}
