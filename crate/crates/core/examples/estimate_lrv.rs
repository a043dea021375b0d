//! Double-kernel HAC estimate of a CSV file's columns, or of a simulated
//! AR(1) path when no file is given.
//!
//! ```text
//! cargo run --release --example estimate_lrv -- [data.csv]
//! ```

use dkhac::cli::read_series_csv;
use dkhac::dkhac::dk_hac_auto;
use dkhac::kernels::{LagKernel, TimeKernel};
use dkhac::sls::{self, SlsSpec};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let v = match std::env::args().nth(1) {
        Some(path) => read_series_csv(path.as_ref()).map_err(|e| e.message)?.1,
        None => sls::simulate(&SlsSpec::stationary_ar1(0.5, 1.0), 500, 1)?,
    };
    let est = dk_hac_auto(&v.demeaned(), LagKernel::QuadraticSpectral, TimeKernel::EpanechnikovOpt, 0)?;
    println!("T = {}, p = {}", v.nobs(), v.dim());
    println!("J = {:.4}", est.j);
    println!("min eigenvalue {:.4e}, psd warning {}", est.min_eigenvalue, est.psd_warning);
    Ok(())
}
