//! HAR test statistics built on a long-run variance estimate: regression
//! t-tests, the Diebold–Mariano test, the Giacomini–Rossi forecast
//! breakdown test, and GMM / IV sandwich covariances.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, Normal};

use crate::baselines::{self, AutoHacOptions, FixedBCriticalValues, NwLag};
use crate::dkhac::{self, AutoOptions, BandwidthPlan, LrvEstimate, Provenance};
use crate::error::{Error, Result};
use crate::kernels::{LagKernel, TimeKernel};
use crate::series::SeriesMatrix;

/// Designs with `cond(XᵀX)` at or above this are rejected.
pub const MAX_CONDITION: f64 = 1e12;

/// Least-squares fit with its score series `x_t ê_t`.
#[derive(Debug, Clone, PartialEq)]
pub struct RegressionFit {
    pub x: SeriesMatrix,
    pub y: Vec<f64>,
    pub beta_hat: Vec<f64>,
    pub residuals: Vec<f64>,
    pub scores: SeriesMatrix,
    /// `XᵀX / T`.
    pub qxx: DMatrix<f64>,
}

impl RegressionFit {
    pub fn nobs(&self) -> usize {
        self.y.len()
    }

    /// Plug-in weights: zero for constant regressors (the intercept), one
    /// otherwise.
    pub fn score_weights(&self) -> Vec<f64> {
        (0..self.x.dim())
            .map(|c| {
                let col = self.x.column(c);
                if col.iter().all(|v| *v == col[0]) {
                    0.0
                } else {
                    1.0
                }
            })
            .collect()
    }
}

pub fn ols_fit(y: &[f64], x: &SeriesMatrix) -> Result<RegressionFit> {
    let t = x.nobs();
    if y.len() != t {
        return Err(Error::InvalidInput(format!("y has {} rows, X has {t}", y.len())));
    }
    if t <= x.dim() {
        return Err(Error::InvalidInput(format!("need more observations ({t}) than regressors ({})", x.dim())));
    }
    let xm = x.to_dmatrix();
    let xtx = xm.transpose() * &xm;
    let sv = xtx.clone().singular_values();
    let cond = sv.max() / sv.min();
    if !(cond < MAX_CONDITION) {
        return Err(Error::SingularDesign(cond));
    }
    let yv = DVector::from_column_slice(y);
    let beta = xtx
        .clone()
        .cholesky()
        .map(|c| c.solve(&(xm.transpose() * &yv)))
        .ok_or(Error::SingularDesign(cond))?;
    let resid = &yv - &xm * &beta;
    let p = x.dim();
    let mut scores = Vec::with_capacity(t * p);
    for s in 0..t {
        scores.extend(x.row(s).iter().map(|v| v * resid[s]));
    }
    Ok(RegressionFit {
        x: x.clone(),
        y: y.to_vec(),
        beta_hat: beta.iter().copied().collect(),
        residuals: resid.iter().copied().collect(),
        scores: SeriesMatrix::from_row_major(t, p, scores)?,
        qxx: xtx / t as f64,
    })
}

/// Where a test takes its critical value from.
#[derive(Debug, Clone, PartialEq)]
pub enum CriticalValueSource {
    Normal,
    FixedB(FixedBCriticalValues),
}

impl CriticalValueSource {
    /// Two-sided critical value at significance `alpha`.
    pub fn critical_value(&self, alpha: f64) -> Result<f64> {
        if !(alpha > 0.0 && alpha < 1.0) {
            return Err(Error::InvalidInput(format!("significance level {alpha} outside (0, 1)")));
        }
        match self {
            CriticalValueSource::Normal => Ok(Normal::standard().inverse_cdf(1.0 - alpha / 2.0)),
            CriticalValueSource::FixedB(table) => table.critical_value(alpha),
        }
    }
}

/// Outcome of a two-sided test.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TestResult {
    pub statistic: f64,
    pub critical_value: f64,
    pub nominal_level: f64,
    pub reject: bool,
    pub lrv_provenance: Provenance,
}

impl TestResult {
    fn new(statistic: f64, critical_value: f64, nominal_level: f64, lrv: &LrvEstimate) -> Self {
        Self {
            statistic,
            critical_value,
            nominal_level,
            reject: statistic.abs() > critical_value,
            lrv_provenance: lrv.provenance.clone(),
        }
    }
}

/// Long-run variance estimator selection.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "method", rename_all = "snake_case")]
pub enum LrvMethod {
    /// Double-kernel HAC with plug-in bandwidths.
    DkHacAuto { lag_kernel: LagKernel, time_kernel: TimeKernel },
    /// Double-kernel HAC with fixed `b1`, `b2` and default blocks.
    DkHacFixed { lag_kernel: LagKernel, time_kernel: TimeKernel, b1: f64, b2: f64 },
    NeweyWest { prewhiten: bool },
    Andrews { prewhiten: bool },
    /// Bartlett, `b = 1`, with fixed-b critical values.
    FixedB,
}

impl LrvMethod {
    pub const DK_DEFAULT: LrvMethod =
        LrvMethod::DkHacAuto { lag_kernel: LagKernel::QuadraticSpectral, time_kernel: TimeKernel::EpanechnikovOpt };

    /// Short label used in reports.
    pub fn label(&self) -> String {
        match self {
            LrvMethod::DkHacAuto { .. } => "dk_hac".into(),
            LrvMethod::DkHacFixed { b1, b2, .. } => format!("dk_hac_b1_{b1}_b2_{b2}"),
            LrvMethod::NeweyWest { prewhiten: false } => "nw".into(),
            LrvMethod::NeweyWest { prewhiten: true } => "nw_pw".into(),
            LrvMethod::Andrews { prewhiten: false } => "andrews".into(),
            LrvMethod::Andrews { prewhiten: true } => "andrews_pw".into(),
            LrvMethod::FixedB => "kvb".into(),
        }
    }

    /// Estimate the LRV of `v`. `weights` enter the automatic bandwidth
    /// rules; the dof factor `T/(T − p_model)` is applied when `dof_adjust`
    /// is set, except for the fixed-b estimator.
    pub fn estimate(&self, v: &SeriesMatrix, weights: Option<&[f64]>, dof_adjust: bool, p_model: usize) -> Result<LrvEstimate> {
        let weights = weights.map(<[f64]>::to_vec);
        match *self {
            LrvMethod::DkHacAuto { lag_kernel, time_kernel } => dkhac::dk_hac_auto_with(
                v,
                lag_kernel,
                time_kernel,
                p_model,
                &AutoOptions { weights, dof_adjust: Some(dof_adjust) },
            ),
            LrvMethod::DkHacFixed { lag_kernel, time_kernel, b1, b2 } => {
                let plan = BandwidthPlan::predetermined_default_blocks(b1, b2, v.nobs())?;
                dkhac::dk_hac(v, lag_kernel, time_kernel, &plan, dof_adjust, p_model)
            }
            LrvMethod::NeweyWest { prewhiten } => baselines::nw_hac_with(
                v,
                NwLag::Auto,
                &AutoHacOptions { prewhiten, weights, dof_adjust, p_model },
            ),
            LrvMethod::Andrews { prewhiten } => {
                baselines::andrews_hac_with(v, &AutoHacOptions { prewhiten, weights, dof_adjust, p_model })
            }
            LrvMethod::FixedB => baselines::kvb_fixed_b(v),
        }
    }

    /// Normal critical values, or the fixed-b table for [`LrvMethod::FixedB`].
    pub fn critical_values(&self, fixed_b: &FixedBCriticalValues) -> CriticalValueSource {
        match self {
            LrvMethod::FixedB => CriticalValueSource::FixedB(fixed_b.clone()),
            _ => CriticalValueSource::Normal,
        }
    }
}

impl std::str::FromStr for LrvMethod {
    type Err = Error;

    /// Parses the report labels; `-` and `_` are interchangeable.
    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().replace('-', "_").as_str() {
            "dk_hac" | "dk" => Ok(LrvMethod::DK_DEFAULT),
            "nw" => Ok(LrvMethod::NeweyWest { prewhiten: false }),
            "nw_pw" => Ok(LrvMethod::NeweyWest { prewhiten: true }),
            "andrews" => Ok(LrvMethod::Andrews { prewhiten: false }),
            "andrews_pw" => Ok(LrvMethod::Andrews { prewhiten: true }),
            "kvb" | "fixed_b" => Ok(LrvMethod::FixedB),
            other => Err(Error::InvalidInput(format!(
                "unknown estimator `{other}`; expected one of dk_hac, nw, nw_pw, andrews, andrews_pw, kvb"
            ))),
        }
    }
}

/// Sandwich `Q⁻¹ J Q⁻¹` of a regression fit given the scores' LRV.
pub fn ols_sandwich(fit: &RegressionFit, lrv: &LrvEstimate) -> Result<DMatrix<f64>> {
    let qinv = fit.qxx.clone().try_inverse().ok_or(Error::SingularDesign(f64::INFINITY))?;
    Ok(&qinv * &lrv.j * &qinv)
}

/// `√T (β̂_r − β0_r) / sqrt(Σ̂_rr)`.
pub fn t_test(
    fit: &RegressionFit,
    r: usize,
    beta0_r: f64,
    lrv_of_scores: &LrvEstimate,
    cv_source: &CriticalValueSource,
    alpha: f64,
) -> Result<TestResult> {
    if r >= fit.beta_hat.len() {
        return Err(Error::InvalidInput(format!("coefficient index {r} out of range")));
    }
    let cv = cv_source.critical_value(alpha)?;
    let diff = fit.beta_hat[r] - beta0_r;
    if diff == 0.0 {
        return Ok(TestResult::new(0.0, cv, alpha, lrv_of_scores));
    }
    let sigma = ols_sandwich(fit, lrv_of_scores)?[(r, r)];
    if !(sigma > 0.0) {
        return Err(Error::NonPositiveVariance(sigma));
    }
    let stat = (fit.nobs() as f64).sqrt() * diff / sigma.sqrt();
    Ok(TestResult::new(stat, cv, alpha, lrv_of_scores))
}

/// Regression t-test with the LRV of the scores computed by `method`:
/// intercept weight zero, dof factor with `p_model = p` except for fixed-b.
pub fn t_test_with(
    fit: &RegressionFit,
    r: usize,
    beta0_r: f64,
    method: &LrvMethod,
    fixed_b: &FixedBCriticalValues,
    alpha: f64,
) -> Result<TestResult> {
    let weights = fit.score_weights();
    let lrv = method.estimate(&fit.scores, Some(&weights), true, fit.x.dim())?;
    t_test(fit, r, beta0_r, &lrv, &method.critical_values(fixed_b), alpha)
}

/// `√n · mean(s) / sqrt(Ĵ(s − s̄))` for a scalar series.
fn location_test(
    s: &[f64],
    method: &LrvMethod,
    fixed_b: &FixedBCriticalValues,
    alpha: f64,
) -> Result<TestResult> {
    let n = s.len();
    if n < 16 {
        return Err(Error::InvalidInput(format!("need at least 16 observations, got {n}")));
    }
    let mean = s.iter().sum::<f64>() / n as f64;
    let centered = SeriesMatrix::from_column(s)?.demeaned();
    let lrv = method.estimate(&centered, Some(&[1.0]), false, 0)?;
    let cv = method.critical_values(fixed_b).critical_value(alpha)?;
    if mean == 0.0 {
        return Ok(TestResult::new(0.0, cv, alpha, &lrv));
    }
    let j = lrv.scalar();
    if !(j > 0.0) {
        return Err(Error::NonPositiveVariance(j));
    }
    Ok(TestResult::new((n as f64).sqrt() * mean / j.sqrt(), cv, alpha, &lrv))
}

/// Diebold–Mariano test on `d_t = L²_t − L¹_t`.
pub fn dm_test(
    loss1: &[f64],
    loss2: &[f64],
    method: &LrvMethod,
    fixed_b: &FixedBCriticalValues,
    alpha: f64,
) -> Result<TestResult> {
    if loss1.len() != loss2.len() {
        return Err(Error::InvalidInput("loss series differ in length".into()));
    }
    let d: Vec<f64> = loss2.iter().zip(loss1).map(|(b, a)| b - a).collect();
    location_test(&d, method, fixed_b, alpha)
}

/// Giacomini–Rossi test on surprise losses `L_oos − mean(L_in)`.
pub fn gr_test(
    in_sample_losses: &[f64],
    out_sample_losses: &[f64],
    method: &LrvMethod,
    fixed_b: &FixedBCriticalValues,
    alpha: f64,
) -> Result<TestResult> {
    if in_sample_losses.is_empty() {
        return Err(Error::InvalidInput("empty in-sample losses".into()));
    }
    let base = in_sample_losses.iter().sum::<f64>() / in_sample_losses.len() as f64;
    let sl: Vec<f64> = out_sample_losses.iter().map(|l| l - base).collect();
    location_test(&sl, method, fixed_b, alpha)
}

/// `(LᵀWL)⁻¹ LᵀW J W L (LᵀWL)⁻¹` for `m` moments and `k` parameters
/// (`L` is `m×k`, `W` and `J` are `m×m`).
pub fn gmm_sandwich_from_lrv(l: &DMatrix<f64>, w: &DMatrix<f64>, j: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    let m = l.nrows();
    if w.shape() != (m, m) || j.shape() != (m, m) {
        return Err(Error::InvalidInput("GMM sandwich dimensions do not conform".into()));
    }
    let bread = (l.transpose() * w * l).try_inverse().ok_or(Error::SingularBread)?;
    let lw = l.transpose() * w;
    Ok(&bread * &lw * j * lw.transpose() * &bread)
}

/// GMM sandwich with `J` the LRV of the moment series.
pub fn gmm_sandwich(
    moments: &SeriesMatrix,
    l: &DMatrix<f64>,
    w: &DMatrix<f64>,
    method: &LrvMethod,
) -> Result<DMatrix<f64>> {
    if l.nrows() != moments.dim() {
        return Err(Error::InvalidInput("Jacobian rows must match the number of moments".into()));
    }
    let lrv = method.estimate(moments, None, false, 0)?;
    gmm_sandwich_from_lrv(l, w, &lrv.j)
}

/// Just-identified IV estimate and its sandwich `Q_ZX⁻¹ Ĵ Q_ZX⁻ᵀ`.
#[derive(Debug, Clone, PartialEq)]
pub struct IvFit {
    pub beta_hat: Vec<f64>,
    pub scores: SeriesMatrix,
    pub sandwich: DMatrix<f64>,
}

pub fn iv_sandwich(y: &[f64], x: &SeriesMatrix, z: &SeriesMatrix, method: &LrvMethod) -> Result<IvFit> {
    let t = x.nobs();
    if z.nobs() != t || y.len() != t || z.dim() != x.dim() {
        return Err(Error::InvalidInput("IV needs y, X, Z with equal rows and dim Z = dim X".into()));
    }
    let xm = x.to_dmatrix();
    let zm = z.to_dmatrix();
    let qzx = zm.transpose() * &xm / t as f64;
    let qinv = qzx.try_inverse().ok_or(Error::SingularZX)?;
    let yv = DVector::from_column_slice(y);
    let beta = &qinv * (zm.transpose() * &yv / t as f64);
    let resid = &yv - &xm * &beta;
    let p = z.dim();
    let mut scores = Vec::with_capacity(t * p);
    for s in 0..t {
        scores.extend(z.row(s).iter().map(|v| v * resid[s]));
    }
    let scores = SeriesMatrix::from_row_major(t, p, scores)?;
    let lrv = method.estimate(&scores, None, false, 0)?;
    let sandwich = &qinv * &lrv.j * qinv.transpose();
    Ok(IvFit { beta_hat: beta.iter().copied().collect(), scores, sandwich })
}
