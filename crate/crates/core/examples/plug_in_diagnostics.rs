//! Intermediate quantities of the plug-in bandwidth rule on a series with a
//! smoothly rising autoregressive coefficient.

use dkhac::bandwidths::plug_in_plan;
use dkhac::kernels::{LagKernel, TimeKernel};
use dkhac::sls::{self, CoefPath, Regime, SlsSpec};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let spec = SlsSpec {
        break_fractions: vec![],
        regimes: vec![Regime {
            a1: CoefPath::Linear { start: 0.1, end: 0.7 },
            sigma: CoefPath::constant(1.0),
            mu: CoefPath::constant(0.0),
        }],
        innovation: Default::default(),
    };
    let v = sls::simulate(&spec, 800, 4)?;
    let (plan, diag) = plug_in_plan(&v, LagKernel::QuadraticSpectral, TimeKernel::EpanechnikovOpt, &[1.0])?;
    println!("block length {}, blocks {}", plan.block_len, plan.blocks());
    println!("phi2 {:.4} (raw {:.4}), b1 {:.4}, mean b2 {:.4}", diag.phi2_hat, diag.phi2_raw, diag.b1, diag.b2_bar);
    println!("block  anchor  D1        D2        b2");
    for r in 0..plan.blocks() {
        println!("{r:>5}  {:>6}  {:<8.4}  {:<8.4}  {:.4}", plan.anchor(r), diag.d1[r], diag.d2[r], diag.b2_schedule[r]);
    }
    println!("flags {:?}", diag.flags);
    println!("population LRV {:.4}", sls::population_lrv(&spec));
    Ok(())
}
