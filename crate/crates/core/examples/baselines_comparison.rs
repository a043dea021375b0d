//! All long-run variance estimators on one regime-switching series.

use dkhac::hartests::LrvMethod;
use dkhac::sls::{self, Regime, SlsSpec};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let spec = SlsSpec {
        break_fractions: vec![0.5],
        regimes: vec![Regime::ar1(0.2, 1.0), Regime::ar1(0.7, 1.5)],
        innovation: Default::default(),
    };
    let v = sls::simulate(&spec, 600, 11)?.demeaned();
    println!("population LRV {:.3}", sls::population_lrv(&spec));
    for label in ["dk_hac", "nw", "nw_pw", "andrews", "andrews_pw", "kvb"] {
        let method: LrvMethod = label.parse()?;
        let est = method.estimate(&v, None, false, 0)?;
        println!("{label:<11} {:.3}", est.scalar());
    }
    Ok(())
}
