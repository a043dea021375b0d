//! Just-identified IV with a HAC sandwich, and the same covariance through
//! the general GMM formula.

use dkhac::hartests::{gmm_sandwich, iv_sandwich, LrvMethod};
use dkhac::series::SeriesMatrix;
use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let t = 400;
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let (mut z_rows, mut x_rows, mut y) = (vec![], vec![], vec![]);
    let (mut z, mut u) = (0.0, 0.0);
    for _ in 0..t {
        z = 0.5 * z + rng.sample::<f64, _>(StandardNormal);
        u = 0.6 * u + rng.sample::<f64, _>(StandardNormal);
        let x = 0.8 * z + 0.5 * u + rng.sample::<f64, _>(StandardNormal);
        z_rows.push(vec![1.0, z]);
        x_rows.push(vec![1.0, x]);
        y.push(1.0 + 2.0 * x + u);
    }
    let (xm, zm) = (SeriesMatrix::from_rows(&x_rows)?, SeriesMatrix::from_rows(&z_rows)?);
    let method = LrvMethod::DK_DEFAULT;
    let fit = iv_sandwich(&y, &xm, &zm, &method)?;
    println!("beta_hat {:?}", fit.beta_hat);
    println!("IV sandwich {:.4}", fit.sandwich);

    // Moments z_t(y_t − x_t'β̂); Jacobian −Q_ZX enters only through its inverse.
    let qzx = zm.to_dmatrix().transpose() * xm.to_dmatrix() / t as f64;
    let gmm = gmm_sandwich(&fit.scores, &qzx, &DMatrix::identity(2, 2), &method)?;
    println!("GMM sandwich {:.4}", gmm);
    Ok(())
}
