//! Data-generating processes M1–M8.
//!
//! M1–M6 are regressions `y_t = β1 + β2 x_t + e_t` with AR(1) errors whose
//! coefficient and innovation scale may change over time; a t-test on one
//! coefficient is run. M7 produces two competing out-of-sample loss series
//! (Diebold–Mariano) and M8 in- and out-of-sample losses of one forecast
//! model (Giacomini–Rossi). Sample positions are 1-based `t = 1..T` and
//! fractional thresholds such as `4T/5` are compared as reals.

use rand::Rng;
use rand_distr::{Distribution, Normal, StandardNormal};
use serde::{Deserialize, Serialize};
use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::hartests::ols_fit;
use crate::series::SeriesMatrix;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum ModelId {
    M1,
    M2,
    M3,
    M4,
    M5,
    M6,
    M7,
    M8,
}

impl ModelId {
    pub const ALL: [ModelId; 8] =
        [ModelId::M1, ModelId::M2, ModelId::M3, ModelId::M4, ModelId::M5, ModelId::M6, ModelId::M7, ModelId::M8];

    /// Which hypothesis the model's test examines.
    pub fn test(self) -> TestKind {
        match self {
            ModelId::M1 | ModelId::M5 => TestKind::Intercept,
            ModelId::M2 | ModelId::M3 | ModelId::M4 | ModelId::M6 => TestKind::Slope,
            ModelId::M7 => TestKind::DieboldMariano,
            ModelId::M8 => TestKind::GiacominiRossi,
        }
    }
}

impl fmt::Display for ModelId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self:?}")
    }
}

impl FromStr for ModelId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        ModelId::ALL
            .into_iter()
            .find(|m| m.to_string().eq_ignore_ascii_case(s.trim()))
            .ok_or_else(|| Error::UnknownModel(s.to_string()))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TestKind {
    /// `t1`, coefficient on the intercept.
    Intercept,
    /// `t2`, coefficient on the stochastic regressor.
    Slope,
    DieboldMariano,
    GiacominiRossi,
}

impl TestKind {
    pub fn label(self) -> &'static str {
        match self {
            TestKind::Intercept => "t1",
            TestKind::Slope => "t2",
            TestKind::DieboldMariano => "dm",
            TestKind::GiacominiRossi => "gr",
        }
    }
}

/// One model at one sample size and alternative magnitude.
///
/// `nobs` is the regression sample for M1–M6, the number of out-of-sample
/// losses `T_n` for M7 (the full sample is `2 T_n`), and the full sample
/// for M8 (in-sample `⌊0.4 T⌋`, out-of-sample the rest).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DgpSpec {
    pub model: ModelId,
    pub nobs: usize,
    pub delta: f64,
}

/// Generated sample, shaped for the model's test.
#[derive(Debug, Clone, PartialEq)]
pub enum Dataset {
    Regression {
        y: Vec<f64>,
        /// Columns: intercept, regressor.
        x: SeriesMatrix,
        coef: usize,
        beta0: f64,
    },
    DieboldMariano {
        loss1: Vec<f64>,
        loss2: Vec<f64>,
    },
    GiacominiRossi {
        in_sample: Vec<f64>,
        out_sample: Vec<f64>,
    },
}

/// Time-varying AR(1) error `e_t = ρ_t e_{t−1} + σ_t u_t` started from the
/// stationary law of the first-period parameters.
fn ar_errors<R: Rng + ?Sized>(rng: &mut R, n: usize, law: impl Fn(usize) -> (f64, f64)) -> Vec<f64> {
    let (rho1, sigma1) = law(1);
    let z: f64 = StandardNormal.sample(rng);
    let mut e = z * sigma1 / (1.0 - rho1 * rho1).sqrt();
    (1..=n)
        .map(|t| {
            let (rho, sigma) = law(t);
            let u: f64 = StandardNormal.sample(rng);
            e = rho * e + sigma * u;
            e
        })
        .collect()
}

fn normals<R: Rng + ?Sized>(rng: &mut R, n: usize, mean: f64, sd: f64) -> Vec<f64> {
    let d = Normal::new(mean, sd).expect("valid normal");
    (0..n).map(|_| d.sample(rng)).collect()
}

/// `x_t = c + a x_{t−1} + u_t`, `u ~ N(0, 1)`, started at the stationary law.
fn ar_regressor<R: Rng + ?Sized>(rng: &mut R, n: usize, c: f64, a: f64) -> Vec<f64> {
    let z: f64 = StandardNormal.sample(rng);
    let mut x = c / (1.0 - a) + z / (1.0 - a * a).sqrt();
    (0..n)
        .map(|_| {
            let u: f64 = StandardNormal.sample(rng);
            x = c + a * x + u;
            x
        })
        .collect()
}

/// `max{0, −cos(1.5 − cos(5t/T))}` before `4T/5`, `0.9` afterwards.
pub fn rho_m3(t: usize, n: usize) -> f64 {
    let (t, n) = (t as f64, n as f64);
    if t < 0.8 * n {
        (-(1.5 - (5.0 * t / n).cos()).cos()).max(0.0)
    } else {
        0.9
    }
}

/// `(ρ_t, σ_t)` of M5: smooth `0.8 cos(1.5 − cos(t/(2T)))` outside the
/// middle segment `T/2 ≤ t ≤ 3T/4`, where `ρ = 0.2` and `σ = 2`.
pub fn law_m5(t: usize, n: usize) -> (f64, f64) {
    let (tf, nf) = (t as f64, n as f64);
    if tf >= nf / 2.0 && tf <= 0.75 * nf {
        (0.2, 2.0)
    } else {
        (0.8 * (1.5 - (tf / (2.0 * nf)).cos()).cos(), 1.0)
    }
}

/// `(ρ_t, σ_t)` of M6: `max{0, 0.3 cos(1.5 − cos(t/(5T)))}` with two
/// persistent bursts, `ρ = 0.99` on `T/2 ≤ t ≤ T/2 + 3` and `ρ = 0.9` on
/// `T − 15 ≤ t ≤ T`, both with `σ = 2`.
pub fn law_m6(t: usize, n: usize) -> (f64, f64) {
    let (tf, nf) = (t as f64, n as f64);
    if tf >= nf / 2.0 && tf <= nf / 2.0 + 3.0 {
        (0.99, 2.0)
    } else if tf >= nf - 15.0 {
        (0.9, 2.0)
    } else {
        ((0.3 * (1.5 - (tf / (5.0 * nf)).cos()).cos()).max(0.0), 1.0)
    }
}

fn regression(y: Vec<f64>, x: Vec<f64>, coef: usize, beta0: f64) -> Dataset {
    let rows: Vec<f64> = x.iter().flat_map(|v| [1.0, *v]).collect();
    let x = SeriesMatrix::from_row_major(y.len(), 2, rows).expect("finite design");
    Dataset::Regression { y, x, coef, beta0 }
}

/// Fit `y_t = a + b z_{t}` on `0..split` and return squared forecast errors
/// on `split..n` plus the in-sample squared residuals.
fn forecast_losses(y: &[f64], z: &[f64], split: usize) -> Result<(Vec<f64>, Vec<f64>)> {
    let rows: Vec<f64> = z[..split].iter().flat_map(|v| [1.0, *v]).collect();
    let x = SeriesMatrix::from_row_major(split, 2, rows)?;
    let fit = ols_fit(&y[..split], &x)?;
    let (a, b) = (fit.beta_hat[0], fit.beta_hat[1]);
    let in_sample = fit.residuals.iter().map(|e| e * e).collect();
    let out = (split..y.len()).map(|t| (y[t] - a - b * z[t]).powi(2)).collect();
    Ok((in_sample, out))
}

impl DgpSpec {
    pub fn new(model: ModelId, nobs: usize, delta: f64) -> Result<Self> {
        let min = match model {
            ModelId::M7 => 16,
            ModelId::M8 => 40,
            _ => 32,
        };
        if nobs < min {
            return Err(Error::InvalidInput(format!("{model} needs T >= {min}, got {nobs}")));
        }
        if !delta.is_finite() {
            return Err(Error::InvalidInput("delta must be finite".into()));
        }
        Ok(Self { model, nobs, delta })
    }

    /// In-sample size of the forecasting models.
    pub fn in_sample_len(&self) -> Option<usize> {
        match self.model {
            ModelId::M7 => Some(self.nobs),
            ModelId::M8 => Some((0.4 * self.nobs as f64).floor() as usize),
            _ => None,
        }
    }

    /// Number of observations entering the test statistic.
    pub fn test_len(&self) -> usize {
        match self.model {
            ModelId::M8 => self.nobs - self.in_sample_len().unwrap_or(0),
            _ => self.nobs,
        }
    }

    /// Draw one dataset. Draws happen in a fixed order so a seeded
    /// generator reproduces the sample exactly.
    pub fn generate<R: Rng + ?Sized>(&self, rng: &mut R) -> Result<Dataset> {
        let n = self.nobs;
        let d = self.delta;
        Ok(match self.model {
            ModelId::M1 => {
                let e = ar_errors(rng, n, |_| (0.5, 0.5f64.sqrt()));
                let x = normals(rng, n, 1.0, 1.0);
                let y = (0..n).map(|t| d + x[t] + e[t]).collect();
                regression(y, x, 0, 0.0)
            }
            ModelId::M2 => {
                let e = ar_errors(rng, n, |_| (0.8, 1.0));
                let x = normals(rng, n, 1.0, 1.0);
                let y = (0..n).map(|t| d * x[t] + e[t]).collect();
                regression(y, x, 1, 0.0)
            }
            ModelId::M3 => {
                let e = ar_errors(rng, n, |t| (rho_m3(t, n), 1.0));
                let x = ar_regressor(rng, n, 0.0, 0.4);
                let y = (0..n).map(|t| d * x[t] + e[t]).collect();
                regression(y, x, 1, 0.0)
            }
            ModelId::M4 => {
                let e = ar_errors(rng, n, |t| (rho_m3(t, n), 1.0));
                let x = normals(rng, n, 1.0, 1.0);
                let w = normals(rng, n, 2.0, 1.0);
                let y = (0..n)
                    .map(|i| {
                        let contaminated = (i + 1) as f64 >= 0.8 * n as f64;
                        d * x[i] + if contaminated { w[i] } else { 0.0 } + e[i]
                    })
                    .collect();
                regression(y, x, 1, 0.0)
            }
            ModelId::M5 => {
                let e = ar_errors(rng, n, |t| law_m5(t, n));
                let x = ar_regressor(rng, n, 2.0, 0.5);
                let nf = n as f64;
                let y = (0..n)
                    .map(|i| {
                        let t = (i + 1) as f64;
                        let drift = if t >= 0.9 * nf { 1.5 * d * (t - 0.9 * nf) / nf } else { 0.0 };
                        d + drift * x[i] + e[i]
                    })
                    .collect();
                regression(y, x, 0, 0.0)
            }
            ModelId::M6 => {
                let e = ar_errors(rng, n, |t| law_m6(t, n));
                let x = normals(rng, n, 1.0, 1.0);
                let y = (0..n).map(|t| d * x[t] + e[t]).collect();
                regression(y, x, 1, 0.0)
            }
            ModelId::M7 => self.generate_m7(rng)?,
            ModelId::M8 => self.generate_m8(rng)?,
        })
    }

    /// Full sample `2 T_n`. Position `i` (0-based) pairs `y_i` with the
    /// predictor known one period earlier, drawn alongside it.
    fn generate_m7<R: Rng + ?Sized>(&self, rng: &mut R) -> Result<Dataset> {
        let tn = self.nobs;
        let n = 2 * tn;
        let e = ar_errors(rng, n, |_| (0.3, 1.0));
        let x0 = normals(rng, n, 1.0, 1.0);
        let y: Vec<f64> = (0..n).map(|i| 1.0 + x0[i] + e[i]).collect();
        let (z1, z2) = if self.delta == 0.0 {
            (normals(rng, n, 1.0, 1.0), normals(rng, n, 1.0, 1.0))
        } else {
            let u = normals(rng, n, 0.0, 1.0);
            let z2 = (0..n)
                .map(|i| {
                    let shift = if (i + 1) as f64 > 0.75 * n as f64 { self.delta } else { 0.0 };
                    shift + x0[i] + u[i]
                })
                .collect();
            (x0.clone(), z2)
        };
        let (_, loss1) = forecast_losses(&y, &z1, tn)?;
        let (_, loss2) = forecast_losses(&y, &z2, tn)?;
        Ok(Dataset::DieboldMariano { loss1, loss2 })
    }

    /// Null: `x ~ N(1, 1.5)`, `y = 1 + x + e`. Alternative (`δ > 0`):
    /// `x ~ N(1.5, 1)` and the slope rises by `δ` after `0.8 T`.
    fn generate_m8<R: Rng + ?Sized>(&self, rng: &mut R) -> Result<Dataset> {
        let n = self.nobs;
        let split = self.in_sample_len().expect("forecast model");
        let e = ar_errors(rng, n, |_| (0.3, 1.0));
        let x = if self.delta == 0.0 { normals(rng, n, 1.0, 1.5f64.sqrt()) } else { normals(rng, n, 1.5, 1.0) };
        let y: Vec<f64> = (0..n)
            .map(|i| {
                let slope = if (i + 1) as f64 > 0.8 * n as f64 { 1.0 + self.delta } else { 1.0 };
                1.0 + slope * x[i] + e[i]
            })
            .collect();
        let (in_sample, out_sample) = forecast_losses(&y, &x, split)?;
        Ok(Dataset::GiacominiRossi { in_sample, out_sample })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn model_ids_parse() {
        assert_eq!("m3".parse::<ModelId>().unwrap(), ModelId::M3);
        assert!(matches!("M9".parse::<ModelId>(), Err(Error::UnknownModel(_))));
    }

    #[test]
    fn coefficient_paths_match_their_formulas() {
        let n = 200;
        let max3 = (1..=n).filter(|t| (*t as f64) < 160.0).map(|t| rho_m3(t, n)).fold(0.0, f64::max);
        assert!((max3 - (-(2.5f64).cos())).abs() < 1e-3);
        assert_eq!(rho_m3(160, n), 0.9);
        let max5 = (1..=n).map(|t| law_m5(t, n).0).fold(0.0, f64::max);
        assert!((max5 - 0.7021).abs() < 5e-4, "{max5}");
        assert_eq!(law_m5(100, n), (0.2, 2.0));
        assert_eq!(law_m5(150, n), (0.2, 2.0));
        assert_ne!(law_m5(151, n).0, 0.2);
        let max6 = (1..=n).map(|t| law_m6(t, n).0).filter(|r| *r < 0.5).fold(0.0, f64::max);
        assert!((max6 - 0.2633).abs() < 5e-4, "{max6}");
        assert_eq!(law_m6(103, n), (0.99, 2.0));
        assert_eq!(law_m6(104, n).1, 1.0);
        assert_eq!(law_m6(185, n), (0.9, 2.0));
        assert_eq!(law_m6(184, n).1, 1.0);
    }

    #[test]
    fn shapes_and_determinism() {
        for model in ModelId::ALL {
            let n = if model == ModelId::M8 { 400 } else { 200 };
            let spec = DgpSpec::new(model, n, 0.0).unwrap();
            let a = spec.generate(&mut ChaCha8Rng::seed_from_u64(5)).unwrap();
            let b = spec.generate(&mut ChaCha8Rng::seed_from_u64(5)).unwrap();
            assert_eq!(a, b);
            match a {
                Dataset::Regression { y, x, .. } => {
                    assert_eq!(y.len(), 200);
                    assert_eq!(x.dim(), 2);
                }
                Dataset::DieboldMariano { loss1, loss2 } => {
                    assert_eq!(loss1.len(), 200);
                    assert_eq!(loss2.len(), 200);
                }
                Dataset::GiacominiRossi { in_sample, out_sample } => {
                    assert_eq!(in_sample.len(), 160);
                    assert_eq!(out_sample.len(), 240);
                }
            }
        }
        assert_eq!(DgpSpec::new(ModelId::M8, 633, 0.0).unwrap().test_len(), 380);
    }

    #[test]
    fn m1_alternative_shifts_the_intercept() {
        let spec0 = DgpSpec::new(ModelId::M1, 100, 0.0).unwrap();
        let spec1 = DgpSpec::new(ModelId::M1, 100, 0.7).unwrap();
        let (Dataset::Regression { y: y0, .. }, Dataset::Regression { y: y1, .. }) = (
            spec0.generate(&mut ChaCha8Rng::seed_from_u64(9)).unwrap(),
            spec1.generate(&mut ChaCha8Rng::seed_from_u64(9)).unwrap(),
        ) else {
            panic!("regression expected")
        };
        for (a, b) in y0.iter().zip(&y1) {
            assert!((b - a - 0.7).abs() < 1e-12);
        }
    }
}
