//! Classical single-kernel HAC estimators used as comparison baselines.
//!
//! * [`kernel_hac`]: `Σ_k K(k/S_T) Γ̂(k)` with `Γ̂(k) = T^{-1} Σ V_t V_{t−k}ᵀ`.
//! * [`nw_hac`]: Bartlett kernel, lag chosen by the Newey–West (1994) rule.
//! * [`andrews_hac`]: QS kernel, bandwidth from the Andrews (1991) AR(1) plug-in.
//! * [`kvb_fixed_b`]: Bartlett kernel with bandwidth `T`, paired with
//!   simulated fixed-b critical values from [`fixedb`].
//!
//! Either automatic estimator can be prewhitened by a VAR(1) filter
//! (Andrews–Monahan 1992) and recolored afterwards.

pub mod fixedb;

use nalgebra::DMatrix;

use crate::dkhac::{lag_weight, LrvEstimate, Provenance};
use crate::error::{Error, Result};
use crate::kernels::LagKernel;
use crate::series::{lag_cross_product, SeriesMatrix};

pub use fixedb::{FixedBCriticalValues, FixedBFamily};

/// Prewhitening coefficients are capped at this singular value.
pub const PREWHITEN_CAP: f64 = 0.97;
/// Shortest series accepted by the baselines.
pub const MIN_BASELINE_NOBS: usize = 16;

/// Classical kernel HAC: lag `k` gets weight `K(k/S_T)`.
pub fn kernel_hac(
    v: &SeriesMatrix,
    kernel: LagKernel,
    bandwidth: f64,
    dof_adjust: bool,
    p_model: usize,
) -> Result<LrvEstimate> {
    let j = kernel_sum(v, kernel, bandwidth)?;
    let provenance = Provenance::Classical {
        kernel,
        bandwidth,
        rule: "fixed".into(),
        prewhitened: false,
        prewhiten_clamped: false,
    };
    finish(v.nobs(), j, provenance, dof_adjust, p_model)
}

/// `Σ_k K(k/S) Γ̂(k)` without any adjustment.
fn kernel_sum(v: &SeriesMatrix, kernel: LagKernel, bandwidth: f64) -> Result<DMatrix<f64>> {
    if !(bandwidth > 0.0 && bandwidth.is_finite()) {
        return Err(Error::InvalidInput(format!("bandwidth must be positive, got {bandwidth}")));
    }
    let t = v.nobs();
    if t < 2 {
        return Err(Error::InvalidInput(format!("need T >= 2, got {t}")));
    }
    let b1 = 1.0 / bandwidth;
    let mut j = lag_cross_product(v, 0);
    for k in 1..t {
        if let Some(w) = lag_weight(kernel, b1, k) {
            let g = lag_cross_product(v, k);
            j += (&g + g.transpose()) * w;
        }
    }
    Ok(j / t as f64)
}

fn finish(t: usize, j: DMatrix<f64>, provenance: Provenance, dof_adjust: bool, p_model: usize) -> Result<LrvEstimate> {
    if p_model >= t {
        return Err(Error::InvalidInput(format!("p_model = {p_model} must be below T = {t}")));
    }
    let dof = if dof_adjust { t as f64 / (t - p_model) as f64 } else { 1.0 };
    Ok(LrvEstimate::finalize(j * dof, provenance, dof_adjust))
}

/// VAR(1) prewhitening filter `V_t = A V_{t−1} + ê_t`.
#[derive(Debug, Clone, PartialEq)]
pub struct Prewhitener {
    pub coef: DMatrix<f64>,
    /// A singular value of the fitted `A` exceeded [`PREWHITEN_CAP`].
    pub clamped: bool,
}

impl Prewhitener {
    /// Least-squares VAR(1) without intercept; singular values of `A` above
    /// the cap are pulled down to it. A singular regressor moment gives `A = 0`.
    pub fn fit(v: &SeriesMatrix) -> Self {
        let p = v.dim();
        let t = v.nobs();
        let mut sxy = DMatrix::<f64>::zeros(p, p);
        let mut sxx = DMatrix::<f64>::zeros(p, p);
        for s in 1..t {
            let cur = v.row(s);
            let prev = v.row(s - 1);
            for i in 0..p {
                for k in 0..p {
                    sxy[(i, k)] += cur[i] * prev[k];
                    sxx[(i, k)] += prev[i] * prev[k];
                }
            }
        }
        let Some(inv) = sxx.clone().try_inverse().filter(|_| sxx.trace() > 0.0) else {
            return Self { coef: DMatrix::zeros(p, p), clamped: false };
        };
        let a = sxy * inv;
        let mut svd = a.clone().svd(true, true);
        let clamped = svd.singular_values.iter().any(|s| *s > PREWHITEN_CAP);
        if !clamped {
            return Self { coef: a, clamped };
        }
        svd.singular_values.iter_mut().for_each(|s| *s = s.min(PREWHITEN_CAP));
        let coef = svd.recompose().unwrap_or(a);
        Self { coef, clamped }
    }

    /// Residuals `ê_t = V_t − A V_{t−1}` for `t = 2..T`.
    pub fn filter(&self, v: &SeriesMatrix) -> SeriesMatrix {
        let p = v.dim();
        let mut data = Vec::with_capacity((v.nobs() - 1) * p);
        for s in 1..v.nobs() {
            let cur = v.row(s);
            let prev = v.row(s - 1);
            for (i, x) in cur.iter().enumerate() {
                let fitted: f64 = (0..p).map(|k| self.coef[(i, k)] * prev[k]).sum();
                data.push(x - fitted);
            }
        }
        SeriesMatrix::from_row_major(v.nobs() - 1, p, data).expect("finite residuals")
    }

    /// `(I − A)^{-1} J (I − A)^{-ᵀ}`.
    pub fn recolor(&self, j: &DMatrix<f64>) -> Result<DMatrix<f64>> {
        let p = j.nrows();
        let inv = (DMatrix::identity(p, p) - &self.coef)
            .try_inverse()
            .ok_or_else(|| Error::InvalidInput("prewhitening filter I − A is singular".into()))?;
        Ok(&inv * j * inv.transpose())
    }
}

/// Options shared by the automatic baselines.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct AutoHacOptions {
    pub prewhiten: bool,
    /// Component weights of the bandwidth rule; `None` weights all by one.
    pub weights: Option<Vec<f64>>,
    pub dof_adjust: bool,
    pub p_model: usize,
}

/// Lag selection for [`nw_hac_with`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NwLag {
    /// Newey–West (1994) plug-in.
    Auto,
    /// The pilot truncation `⌊4(T/100)^{2/9}⌋`.
    Pilot,
    Fixed(usize),
}

/// Newey–West pilot truncation `⌊4(T/100)^{2/9}⌋`.
pub fn nw_pilot_lag(nobs: usize) -> usize {
    (4.0 * (nobs as f64 / 100.0).powf(2.0 / 9.0)).floor() as usize
}

/// Newey–West (1994) lag `⌊1.1447 (s1/s0)^{2/3} T^{1/3}⌋` from the weighted
/// aggregate `f_t = wᵀV_t`. A vanishing `s0` selects lag 0.
pub fn nw_auto_lag(v: &SeriesMatrix, weights: &[f64]) -> usize {
    let t = v.nobs();
    let f: Vec<f64> = (0..t).map(|s| v.row(s).iter().zip(weights).map(|(x, w)| x * w).sum()).collect();
    let n = nw_pilot_lag(t).min(t - 1);
    let sigma = |j: usize| (j..t).map(|s| f[s] * f[s - j]).sum::<f64>() / t as f64;
    let (mut s0, mut s1) = (sigma(0), 0.0);
    for j in 1..=n {
        let sj = sigma(j);
        s0 += 2.0 * sj;
        s1 += 2.0 * j as f64 * sj;
    }
    if !(s0 > 0.0) {
        return 0;
    }
    let gamma = 1.1447 * ((s1 / s0).powi(2)).powf(1.0 / 3.0);
    let lag = (gamma * (t as f64).powf(1.0 / 3.0)).floor();
    (lag as usize).min(t - 1)
}

/// Newey–West HAC with automatic (`auto = true`) or pilot lag.
pub fn nw_hac(v: &SeriesMatrix, auto: bool, prewhiten: bool) -> Result<LrvEstimate> {
    let opts = AutoHacOptions { prewhiten, ..Default::default() };
    nw_hac_with(v, if auto { NwLag::Auto } else { NwLag::Pilot }, &opts)
}

pub fn nw_hac_with(v: &SeriesMatrix, lag: NwLag, opts: &AutoHacOptions) -> Result<LrvEstimate> {
    check_len(v)?;
    let weights = resolve_weights(v, &opts.weights)?;
    let (series, filter) = maybe_prewhiten(v, opts.prewhiten);
    let (lags, rule) = match lag {
        NwLag::Auto => (nw_auto_lag(&series, &weights), "newey_west_1994"),
        NwLag::Pilot => (nw_pilot_lag(series.nobs()).min(series.nobs() - 1), "newey_west_pilot"),
        NwLag::Fixed(l) => (l.min(series.nobs() - 1), "fixed_lag"),
    };
    // Weights 1 − j/(L + 1): Bartlett with bandwidth L + 1.
    let bandwidth = lags as f64 + 1.0;
    let j = kernel_sum(&series, LagKernel::Bartlett, bandwidth)?;
    let j = recolor(j, &filter)?;
    let provenance = Provenance::Classical {
        kernel: LagKernel::Bartlett,
        bandwidth,
        rule: rule.into(),
        prewhitened: opts.prewhiten,
        prewhiten_clamped: filter.as_ref().is_some_and(|f| f.clamped),
    };
    finish(v.nobs(), j, provenance, opts.dof_adjust, opts.p_model)
}

/// Andrews (1991) AR(1) plug-in `α̂(2)` over weighted components. AR
/// coefficients are capped at `±0.97`.
pub fn andrews_alpha2(v: &SeriesMatrix, weights: &[f64]) -> f64 {
    let (mut num, mut den) = (0.0, 0.0);
    for (c, &w) in weights.iter().enumerate() {
        if w == 0.0 {
            continue;
        }
        let x = v.column(c);
        let sxy: f64 = x.windows(2).map(|p| p[1] * p[0]).sum();
        let sxx: f64 = x.windows(2).map(|p| p[0] * p[0]).sum();
        if sxx == 0.0 {
            continue;
        }
        let rho = (sxy / sxx).clamp(-PREWHITEN_CAP, PREWHITEN_CAP);
        let s2 = x.windows(2).map(|p| (p[1] - rho * p[0]).powi(2)).sum::<f64>() / (x.len() - 1) as f64;
        num += w * 4.0 * rho * rho * s2 * s2 / (1.0 - rho).powi(8);
        den += w * s2 * s2 / (1.0 - rho).powi(4);
    }
    if den > 0.0 {
        num / den
    } else {
        0.0
    }
}

/// Andrews QS bandwidth `1.3221 (α̂(2) T)^{1/5}`, at least `1e−6`.
pub fn andrews_bandwidth(v: &SeriesMatrix, weights: &[f64]) -> f64 {
    (1.3221 * (andrews_alpha2(v, weights) * v.nobs() as f64).powf(0.2)).max(1e-6)
}

pub fn andrews_hac(v: &SeriesMatrix, prewhiten: bool) -> Result<LrvEstimate> {
    andrews_hac_with(v, &AutoHacOptions { prewhiten, ..Default::default() })
}

pub fn andrews_hac_with(v: &SeriesMatrix, opts: &AutoHacOptions) -> Result<LrvEstimate> {
    check_len(v)?;
    let weights = resolve_weights(v, &opts.weights)?;
    let (series, filter) = maybe_prewhiten(v, opts.prewhiten);
    let bandwidth = andrews_bandwidth(&series, &weights);
    let j = kernel_sum(&series, LagKernel::QuadraticSpectral, bandwidth)?;
    let j = recolor(j, &filter)?;
    let provenance = Provenance::Classical {
        kernel: LagKernel::QuadraticSpectral,
        bandwidth,
        rule: "andrews_1991_ar1".into(),
        prewhitened: opts.prewhiten,
        prewhiten_clamped: filter.as_ref().is_some_and(|f| f.clamped),
    };
    finish(v.nobs(), j, provenance, opts.dof_adjust, opts.p_model)
}

/// Bartlett HAC with bandwidth `M = T` (`b = 1`), no dof adjustment.
///
/// For series summing to zero this equals `2T^{-2} Σ_{t<T} S_t S_tᵀ` with
/// `S_t` the partial sums.
pub fn kvb_fixed_b(v: &SeriesMatrix) -> Result<LrvEstimate> {
    check_len(v)?;
    let t = v.nobs();
    let j = kernel_sum(v, LagKernel::Bartlett, t as f64)?;
    Ok(LrvEstimate::finalize(j, Provenance::FixedB { kernel: LagKernel::Bartlett, b: 1.0 }, false))
}

fn check_len(v: &SeriesMatrix) -> Result<()> {
    if v.nobs() < MIN_BASELINE_NOBS {
        return Err(Error::InvalidInput(format!(
            "baseline estimators need T >= {MIN_BASELINE_NOBS}, got {}",
            v.nobs()
        )));
    }
    Ok(())
}

fn resolve_weights(v: &SeriesMatrix, weights: &Option<Vec<f64>>) -> Result<Vec<f64>> {
    match weights {
        None => Ok(vec![1.0; v.dim()]),
        Some(w) if w.len() == v.dim() => Ok(w.clone()),
        Some(w) => Err(Error::InvalidInput(format!("{} weights for {} components", w.len(), v.dim()))),
    }
}

fn maybe_prewhiten(v: &SeriesMatrix, on: bool) -> (SeriesMatrix, Option<Prewhitener>) {
    if !on {
        return (v.clone(), None);
    }
    let filter = Prewhitener::fit(v);
    (filter.filter(v), Some(filter))
}

fn recolor(j: DMatrix<f64>, filter: &Option<Prewhitener>) -> Result<DMatrix<f64>> {
    match filter {
        Some(f) => f.recolor(&j),
        None => Ok(j),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn wavy(t: usize, p: usize) -> SeriesMatrix {
        let rows: Vec<Vec<f64>> = (0..t)
            .map(|i| (0..p).map(|c| ((i * (c + 3)) as f64 * 0.37).sin() + 0.2 * (i as f64 * 0.05).cos()).collect())
            .collect();
        SeriesMatrix::from_rows(&rows).unwrap()
    }

    #[test]
    fn zero_series_gives_zero_for_every_baseline() {
        let v = SeriesMatrix::zeros(50, 2);
        for est in [
            nw_hac(&v, true, false).unwrap(),
            nw_hac(&v, true, true).unwrap(),
            andrews_hac(&v, false).unwrap(),
            andrews_hac(&v, true).unwrap(),
            kvb_fixed_b(&v).unwrap(),
        ] {
            assert_eq!(est.j, DMatrix::zeros(2, 2));
        }
    }

    #[test]
    fn lag_zero_is_the_second_moment() {
        let v = wavy(40, 1);
        let est = nw_hac_with(&v, NwLag::Fixed(0), &AutoHacOptions::default()).unwrap();
        let x = v.column(0);
        let want = x.iter().map(|a| a * a).sum::<f64>() / 40.0;
        assert_abs_diff_eq!(est.scalar(), want, epsilon = 1e-14);
    }

    #[test]
    fn kvb_matches_partial_sum_identity() {
        let v = wavy(60, 2).demeaned();
        let est = kvb_fixed_b(&v).unwrap();
        let mut s = [0.0, 0.0];
        let mut want = DMatrix::<f64>::zeros(2, 2);
        for t in 0..59 {
            s[0] += v.get(t, 0);
            s[1] += v.get(t, 1);
            for i in 0..2 {
                for k in 0..2 {
                    want[(i, k)] += s[i] * s[k];
                }
            }
        }
        want *= 2.0 / (60.0 * 60.0);
        assert!((est.j - want).amax() < 1e-13);
    }

    #[test]
    fn prewhitening_recolors_exactly_for_a_var1_fit() {
        // With the fitted A, recolor(J(ê)) reproduces (I−A)^{-1}J(I−A)^{-T}.
        let v = wavy(80, 2);
        let f = Prewhitener::fit(&v);
        let e = f.filter(&v);
        assert_eq!(e.nobs(), 79);
        let je = kernel_sum(&e, LagKernel::Bartlett, 3.0).unwrap();
        let ia = DMatrix::identity(2, 2) - &f.coef;
        let back = &ia * f.recolor(&je).unwrap() * ia.transpose();
        assert!((back - je).amax() < 1e-12);
    }

    #[test]
    fn prewhitening_caps_near_unit_roots() {
        let x: Vec<f64> = (0..100).map(|i| i as f64).collect();
        let f = Prewhitener::fit(&SeriesMatrix::from_column(&x).unwrap());
        assert!(f.clamped);
        assert_abs_diff_eq!(f.coef[(0, 0)], PREWHITEN_CAP, epsilon = 1e-12);
    }

    #[test]
    fn pilot_lag_values() {
        assert_eq!(nw_pilot_lag(100), 4);
        assert_eq!(nw_pilot_lag(200), 4);
        assert_eq!(nw_pilot_lag(800), 6);
    }

    #[test]
    fn andrews_alpha_univariate_ratio() {
        // The residual variance cancels in the univariate ratio.
        let v = wavy(200, 1);
        let x = v.column(0);
        let sxy: f64 = x.windows(2).map(|p| p[1] * p[0]).sum();
        let sxx: f64 = x.windows(2).map(|p| p[0] * p[0]).sum();
        let rho = sxy / sxx;
        let want = 4.0 * rho * rho / (1.0 - rho).powi(4);
        assert_abs_diff_eq!(andrews_alpha2(&v, &[1.0]), want, epsilon = 1e-10 * want);
    }

    #[test]
    fn short_series_rejected() {
        assert!(nw_hac(&wavy(10, 1), true, false).is_err());
    }
}
