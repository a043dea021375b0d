//! Equal-accuracy and forecast-breakdown tests on simulated forecasts.

use dkhac::baselines::FixedBCriticalValues;
use dkhac::hartests::{dm_test, gr_test, LrvMethod};
use dkhac::montecarlo::{Dataset, DgpSpec, ModelId};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let table = FixedBCriticalValues::embedded();
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let methods = [LrvMethod::DK_DEFAULT, LrvMethod::Andrews { prewhiten: false }, LrvMethod::FixedB];

    if let Dataset::DieboldMariano { loss1, loss2 } = DgpSpec::new(ModelId::M7, 400, 1.0)?.generate(&mut rng)? {
        for m in &methods {
            let r = dm_test(&loss1, &loss2, m, &table, 0.05)?;
            println!("DM {:<8} stat {:>7.3} reject {}", m.label(), r.statistic, r.reject);
        }
    }
    if let Dataset::GiacominiRossi { in_sample, out_sample } = DgpSpec::new(ModelId::M8, 800, 0.4)?.generate(&mut rng)? {
        for m in &methods {
            let r = gr_test(&in_sample, &out_sample, m, &table, 0.05)?;
            println!("GR {:<8} stat {:>7.3} reject {}", m.label(), r.statistic, r.reject);
        }
    }
    Ok(())
}
