//! Double-kernel HAC estimation.
//!
//! The sample is cut into blocks of length `n_T`. Block `r` is anchored at
//! observation `(r + 1)·n_T` and carries a time-kernel taper over the
//! `T·b2(u_r)` observations to the left of the anchor. Each block yields
//! local autocovariances `ĉ_T(u_r, k)`; their block average `Γ̂(k)` is then
//! smoothed over lags by `K1(b1·k)`:
//!
//! ```text
//! Ĵ = [T/(T − p)] Σ_k K1(b1 k) Γ̂(k),
//! Γ̂(k) = n_T/(T − n_T) Σ_{r=0}^{⌊(T−n_T)/n_T⌋} ĉ_T(r n_T / T, k),
//! ĉ_T(u_r, k) = (T b2)^{-1} Σ_s K2*(anchor_r, s, k) V_s V_{s−k}ᵀ.
//! ```
//!
//! Setting `n_T = T` selects a single block anchored at `T` with unit block
//! weight; with the uniform time kernel and `b2 = 1` this is exactly the
//! classical kernel estimator.

use nalgebra::{DMatrix, SymmetricEigen};
use serde::{Deserialize, Serialize};

use crate::bandwidths::{self, PlugInDiagnostics};
use crate::error::{Error, Result};
use crate::kernels::{k2_star_weight, LagKernel, TimeKernel};
use crate::series::SeriesMatrix;

/// Lags whose weight `|K1(b1 k)|` falls below this are skipped.
pub const LAG_WEIGHT_FLOOR: f64 = 1e-8;

/// Exponent of the default block length `n_T = ⌊T^0.66⌋`.
pub const BLOCK_EXPONENT: f64 = 0.66;

/// Smallest sample accepted by the automatic estimator.
pub const MIN_AUTO_NOBS: usize = 32;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PlanSource {
    Predetermined,
    PlugIn,
}

/// Bandwidths and blocking for one double-kernel estimate.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BandwidthPlan {
    /// Lag bandwidth `b1`.
    pub b1: f64,
    /// Time bandwidth per block; entry `r` belongs to `u_r = r·n_T/T`.
    pub b2: Vec<f64>,
    /// `(n_T/T) Σ_{r≥1} b2(u_r)` for plug-in plans, the common value for
    /// predetermined ones.
    pub b2_bar: f64,
    /// Block length `n_T`.
    pub block_len: usize,
    pub source: PlanSource,
}

/// Default block length `⌊T^0.66⌋`.
pub fn default_block_len(nobs: usize) -> usize {
    ((nobs as f64).powf(BLOCK_EXPONENT).floor() as usize).max(1)
}

/// Number of blocks `⌊(T − n_T)/n_T⌋ + 1` (one when `n_T = T`).
pub fn block_count(nobs: usize, block_len: usize) -> usize {
    if block_len >= nobs {
        1
    } else {
        (nobs - block_len) / block_len + 1
    }
}

/// Block-averaging weight `n_T/(T − n_T)` (one when `n_T = T`).
pub fn block_weight(nobs: usize, block_len: usize) -> f64 {
    if block_len >= nobs {
        1.0
    } else {
        block_len as f64 / (nobs - block_len) as f64
    }
}

impl BandwidthPlan {
    /// Constant `b2` across blocks.
    pub fn predetermined(b1: f64, b2: f64, block_len: usize, nobs: usize) -> Result<Self> {
        let plan = Self {
            b1,
            b2: vec![b2; block_count(nobs, block_len)],
            b2_bar: b2,
            block_len,
            source: PlanSource::Predetermined,
        };
        plan.validate(nobs)?;
        Ok(plan)
    }

    /// Predetermined bandwidths with the default block length.
    pub fn predetermined_default_blocks(b1: f64, b2: f64, nobs: usize) -> Result<Self> {
        Self::predetermined(b1, b2, default_block_len(nobs), nobs)
    }

    /// One block anchored at the last observation with unit weight.
    pub fn single_block(b1: f64, b2: f64, nobs: usize) -> Result<Self> {
        Self::predetermined(b1, b2, nobs, nobs)
    }

    pub fn blocks(&self) -> usize {
        self.b2.len()
    }

    /// Anchor (1-based observation index) of block `r`.
    pub fn anchor(&self, r: usize) -> usize {
        (r + 1) * self.block_len
    }

    pub fn validate(&self, nobs: usize) -> Result<()> {
        if nobs < 2 {
            return Err(Error::InvalidInput(format!("need T >= 2, got {nobs}")));
        }
        if !(self.b1 > 0.0 && self.b1 <= 1.0) {
            return Err(Error::InvalidInput(format!("b1 must lie in (0, 1], got {}", self.b1)));
        }
        if self.block_len == 0 || self.block_len > nobs {
            return Err(Error::InvalidInput(format!("block length {} not in [1, T = {nobs}]", self.block_len)));
        }
        let expected = block_count(nobs, self.block_len);
        if self.b2.len() != expected {
            return Err(Error::InvalidInput(format!(
                "b2 schedule has {} entries, {expected} blocks expected",
                self.b2.len()
            )));
        }
        if let Some(b) = self.b2.iter().find(|b| !(**b > 0.0 && **b <= 1.0)) {
            return Err(Error::InvalidInput(format!("b2 must lie in (0, 1], got {b}")));
        }
        Ok(())
    }
}

/// Provenance of a long-run variance estimate.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "estimator", rename_all = "snake_case")]
pub enum Provenance {
    DoubleKernel {
        lag_kernel: LagKernel,
        time_kernel: TimeKernel,
        plan: BandwidthPlan,
        diagnostics: Option<PlugInDiagnostics>,
    },
    Classical {
        kernel: LagKernel,
        /// Bandwidth `S_T`; lag `k` gets weight `K1(k/S_T)`.
        bandwidth: f64,
        rule: String,
        prewhitened: bool,
        /// Largest prewhitening coefficient clamped to the stationarity cap.
        prewhiten_clamped: bool,
    },
    FixedB {
        kernel: LagKernel,
        b: f64,
    },
}

/// A `p×p` long-run variance estimate.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LrvEstimate {
    #[serde(with = "matrix_rows")]
    pub j: DMatrix<f64>,
    pub provenance: Provenance,
    pub dof_adjusted: bool,
    pub min_eigenvalue: f64,
    /// Set when the smallest eigenvalue is below `−1e−10·trace`.
    pub psd_warning: bool,
}

impl LrvEstimate {
    /// Symmetrize `j`, record its smallest eigenvalue and the PSD flag.
    pub fn finalize(j: DMatrix<f64>, provenance: Provenance, dof_adjusted: bool) -> Self {
        let j = (&j + j.transpose()) * 0.5;
        let min_eigenvalue = min_eigenvalue(&j);
        let tol = 1e-10 * j.trace().abs();
        let psd_warning = min_eigenvalue < -tol;
        Self { j, provenance, dof_adjusted, min_eigenvalue, psd_warning }
    }

    pub fn dim(&self) -> usize {
        self.j.nrows()
    }

    /// The scalar estimate of a univariate series.
    pub fn scalar(&self) -> f64 {
        self.j[(0, 0)]
    }

    pub fn plan(&self) -> Option<&BandwidthPlan> {
        match &self.provenance {
            Provenance::DoubleKernel { plan, .. } => Some(plan),
            _ => None,
        }
    }
}

pub(crate) fn min_eigenvalue(m: &DMatrix<f64>) -> f64 {
    if m.nrows() == 1 {
        return m[(0, 0)];
    }
    SymmetricEigen::new(m.clone()).eigenvalues.min()
}

pub(crate) mod matrix_rows {
    use nalgebra::DMatrix;
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    pub fn serialize<S: Serializer>(m: &DMatrix<f64>, s: S) -> Result<S::Ok, S::Error> {
        let rows: Vec<Vec<f64>> = (0..m.nrows()).map(|i| m.row(i).iter().copied().collect()).collect();
        rows.serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<DMatrix<f64>, D::Error> {
        let rows = Vec::<Vec<f64>>::deserialize(d)?;
        let n = rows.len();
        let p = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != p) {
            return Err(serde::de::Error::custom("ragged matrix rows"));
        }
        Ok(DMatrix::from_row_iterator(n, p, rows.into_iter().flatten()))
    }
}

/// Weight `K1(b1 k)`, or `None` when it is below [`LAG_WEIGHT_FLOOR`].
pub(crate) fn lag_weight(kernel: LagKernel, b1: f64, k: usize) -> Option<f64> {
    let w = kernel.eval(b1 * k as f64);
    (w.abs() >= LAG_WEIGHT_FLOOR).then_some(w)
}

/// Local autocovariance `ĉ_T(u_r, k)` of block `r`, evaluated pair by pair
/// through [`k2_star_weight`].
pub fn local_autocov_hat(
    v: &SeriesMatrix,
    r: usize,
    k: i64,
    b2: f64,
    time_kernel: TimeKernel,
    block_len: usize,
) -> Result<DMatrix<f64>> {
    let t = v.nobs();
    let p = v.dim();
    if k.unsigned_abs() as usize >= t {
        return Err(Error::InvalidInput(format!("|k| = {} exceeds T − 1", k.abs())));
    }
    if !(b2 > 0.0 && b2 <= 1.0) {
        return Err(Error::InvalidInput(format!("b2 must lie in (0, 1], got {b2}")));
    }
    let anchor = (r + 1) * block_len;
    if block_len == 0 || anchor > t {
        return Err(Error::InvalidInput(format!("block {r} anchored at {anchor} exceeds T = {t}")));
    }
    let anchor = anchor as i64;
    let lag = k.unsigned_abs() as usize;
    let mut out = DMatrix::zeros(p, p);
    let mut any_weight = false;
    for s in (lag + 1)..=t {
        let w = k2_star_weight(time_kernel, anchor, s as i64, k, t, b2);
        if w == 0.0 {
            continue;
        }
        any_weight = true;
        // k ≥ 0: V_s V_{s−k}ᵀ ; k < 0: V_{s+k} V_sᵀ = V_{s−|k|} V_sᵀ.
        let (lead, trail) = if k >= 0 { (s - 1, s - 1 - lag) } else { (s - 1 - lag, s - 1) };
        let a = v.row(lead);
        let b = v.row(trail);
        for i in 0..p {
            for j in 0..p {
                out[(i, j)] += w * a[i] * b[j];
            }
        }
    }
    if !any_weight && degenerate_taper(t, anchor as usize, b2, time_kernel) {
        return Err(Error::DegenerateWindow { block: r, b2, t });
    }
    Ok(out / (t as f64 * b2))
}

/// True when every observation of the block has zero taper weight.
fn degenerate_taper(t: usize, anchor: usize, b2: f64, kernel: TimeKernel) -> bool {
    block_taper(t, anchor, b2, kernel).is_none()
}

/// Square-root taper `sqrt(K2((anchor − s)/(T b2)))` on its nonzero span.
/// Returns the 0-based first index and the weights.
fn block_taper(t: usize, anchor: usize, b2: f64, kernel: TimeKernel) -> Option<(usize, Vec<f64>)> {
    let scale = t as f64 * b2;
    let lo_s = ((anchor as f64 - scale).ceil().max(1.0)) as usize;
    let hi_s = anchor.min(t);
    if lo_s > hi_s {
        return None;
    }
    let weights: Vec<f64> =
        (lo_s..=hi_s).map(|s| kernel.eval((anchor - s) as f64 / scale).sqrt()).collect();
    let first = weights.iter().position(|&w| w > 0.0)?;
    let last = weights.iter().rposition(|&w| w > 0.0)?;
    Some((lo_s - 1 + first, weights[first..=last].to_vec()))
}

/// Tapered lag sums of one block: entry `k` is
/// `Σ_s w_s w_{s−k} V_s V_{s−k}ᵀ` for `k = 0..=max_lag`, where lags with
/// `skip(k)` are left as `None`.
fn block_lag_sums(
    v: &SeriesMatrix,
    anchor: usize,
    b2: f64,
    kernel: TimeKernel,
    max_lag: usize,
    skip: impl Fn(usize) -> bool,
) -> Option<Vec<Option<DMatrix<f64>>>> {
    let (start, taper) = block_taper(v.nobs(), anchor, b2, kernel)?;
    let p = v.dim();
    let len = taper.len();
    let mut tapered = Vec::with_capacity(len * p);
    for (i, w) in taper.iter().enumerate() {
        tapered.extend(v.row(start + i).iter().map(|x| w * x));
    }
    let upto = max_lag.min(len - 1);
    let mut sums = Vec::with_capacity(upto + 1);
    for k in 0..=upto {
        if skip(k) {
            sums.push(None);
            continue;
        }
        let mut g = DMatrix::zeros(p, p);
        for i in k..len {
            let a = &tapered[i * p..(i + 1) * p];
            let b = &tapered[(i - k) * p..(i - k + 1) * p];
            for x in 0..p {
                for y in 0..p {
                    g[(x, y)] += a[x] * b[y];
                }
            }
        }
        sums.push(Some(g));
    }
    Some(sums)
}

/// Block-averaged local autocovariance `Γ̂(k)`.
pub fn gamma_hat(v: &SeriesMatrix, k: i64, plan: &BandwidthPlan, time_kernel: TimeKernel) -> Result<DMatrix<f64>> {
    plan.validate(v.nobs())?;
    let t = v.nobs();
    let mut out = DMatrix::zeros(v.dim(), v.dim());
    for (r, &b2) in plan.b2.iter().enumerate() {
        out += local_autocov_hat(v, r, k, b2, time_kernel, plan.block_len)?;
    }
    Ok(out * block_weight(t, plan.block_len))
}

/// Double-kernel HAC estimate with the bandwidths of `plan`.
///
/// `dof_adjust` multiplies by `T/(T − p_model)`. The result is
/// symmetrized; a negative eigenvalue beyond `−1e−10·trace` only sets
/// [`LrvEstimate::psd_warning`].
pub fn dk_hac(
    v: &SeriesMatrix,
    lag_kernel: LagKernel,
    time_kernel: TimeKernel,
    plan: &BandwidthPlan,
    dof_adjust: bool,
    p_model: usize,
) -> Result<LrvEstimate> {
    dk_hac_inner(v, lag_kernel, time_kernel, plan, dof_adjust, p_model, None)
}

fn dk_hac_inner(
    v: &SeriesMatrix,
    lag_kernel: LagKernel,
    time_kernel: TimeKernel,
    plan: &BandwidthPlan,
    dof_adjust: bool,
    p_model: usize,
    diagnostics: Option<PlugInDiagnostics>,
) -> Result<LrvEstimate> {
    let t = v.nobs();
    plan.validate(t)?;
    if p_model >= t {
        return Err(Error::InvalidInput(format!("p_model = {p_model} must be below T = {t}")));
    }
    let p = v.dim();
    let weight = block_weight(t, plan.block_len);
    let mut j = DMatrix::zeros(p, p);
    for (r, &b2) in plan.b2.iter().enumerate() {
        let sums = block_lag_sums(v, plan.anchor(r), b2, time_kernel, t - 1, |k| {
            lag_weight(lag_kernel, plan.b1, k).is_none()
        })
        .ok_or(Error::DegenerateWindow { block: r, b2, t })?;
        let mut block = DMatrix::zeros(p, p);
        for (k, g) in sums.iter().enumerate() {
            let Some(g) = g else { continue };
            let w = lag_kernel.eval(plan.b1 * k as f64);
            if k == 0 {
                block += g * w;
            } else {
                block += (g + g.transpose()) * w;
            }
        }
        j += block * (weight / (t as f64 * b2));
    }
    let dof = if dof_adjust { t as f64 / (t - p_model) as f64 } else { 1.0 };
    let provenance = Provenance::DoubleKernel { lag_kernel, time_kernel, plan: plan.clone(), diagnostics };
    Ok(LrvEstimate::finalize(j * dof, provenance, dof_adjust))
}

/// Options for [`dk_hac_auto_with`].
#[derive(Debug, Clone, PartialEq, Default)]
pub struct AutoOptions {
    /// Diagonal weights of the plug-in criterion, one per component;
    /// `None` weights every component by one. An intercept score is
    /// usually given weight zero.
    pub weights: Option<Vec<f64>>,
    /// Apply `T/(T − p_model)`. `None` turns it on exactly when
    /// `p_model > 0`.
    pub dof_adjust: Option<bool>,
}

/// Double-kernel HAC with plug-in bandwidths and `n_T = ⌊T^0.66⌋`.
pub fn dk_hac_auto(v: &SeriesMatrix, lag_kernel: LagKernel, time_kernel: TimeKernel, p_model: usize) -> Result<LrvEstimate> {
    dk_hac_auto_with(v, lag_kernel, time_kernel, p_model, &AutoOptions::default())
}

pub fn dk_hac_auto_with(
    v: &SeriesMatrix,
    lag_kernel: LagKernel,
    time_kernel: TimeKernel,
    p_model: usize,
    opts: &AutoOptions,
) -> Result<LrvEstimate> {
    if v.nobs() < MIN_AUTO_NOBS {
        return Err(Error::InvalidInput(format!(
            "automatic bandwidths need T >= {MIN_AUTO_NOBS}, got {}",
            v.nobs()
        )));
    }
    let weights = opts.weights.clone().unwrap_or_else(|| vec![1.0; v.dim()]);
    let (plan, diag) = bandwidths::plug_in_plan(v, lag_kernel, time_kernel, &weights)?;
    let dof = opts.dof_adjust.unwrap_or(p_model > 0);
    dk_hac_inner(v, lag_kernel, time_kernel, &plan, dof, p_model, Some(diag))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn series(values: &[f64]) -> SeriesMatrix {
        SeriesMatrix::from_column(values).unwrap()
    }

    /// Independent brute force: `K2*` written out from the kernel formula.
    fn chat_oracle(v: &[f64], anchor: f64, k: i64, b2: f64) -> f64 {
        let t = v.len();
        let k2 = |x: f64| if (0.0..=1.0).contains(&x) { 6.0 * x * (1.0 - x) } else { 0.0 };
        let scale = t as f64 * b2;
        let mut acc = 0.0;
        for s in 1..=t as i64 {
            let partner = s - k.abs();
            if partner < 1 {
                continue;
            }
            let w = (k2((anchor - s as f64) / scale) * k2((anchor - partner as f64) / scale)).sqrt();
            acc += w * v[(s - 1) as usize] * v[(partner - 1) as usize];
        }
        acc / scale
    }

    #[test]
    fn local_autocov_matches_direct_summation() {
        let v = [1.0, -1.0, 2.0, 0.0, 1.0, 1.0, -2.0, 1.0];
        let s = series(&v);
        let got = local_autocov_hat(&s, 1, 1, 0.5, TimeKernel::EpanechnikovOpt, 4).unwrap();
        // anchor 8, taper over s in [4, 8]
        let want = chat_oracle(&v, 8.0, 1, 0.5);
        assert_abs_diff_eq!(got[(0, 0)], want, epsilon = 1e-14);
        for k in -5..=5 {
            let got = local_autocov_hat(&s, 1, k, 0.5, TimeKernel::EpanechnikovOpt, 4).unwrap();
            assert_abs_diff_eq!(got[(0, 0)], chat_oracle(&v, 8.0, k, 0.5), epsilon = 1e-14);
        }
    }

    #[test]
    fn local_autocov_of_zero_series_is_zero() {
        let s = SeriesMatrix::zeros(20, 2);
        let c = local_autocov_hat(&s, 0, 2, 0.5, TimeKernel::EpanechnikovOpt, 10).unwrap();
        assert_eq!(c, DMatrix::zeros(2, 2));
    }

    #[test]
    fn uniform_full_window_is_sample_second_moment() {
        let rows: Vec<Vec<f64>> = (0..30).map(|i| vec![(i as f64 * 0.7).sin(), (i as f64).cos()]).collect();
        let s = SeriesMatrix::from_rows(&rows).unwrap();
        let c = local_autocov_hat(&s, 0, 0, 1.0, TimeKernel::Uniform, 30).unwrap();
        let m = s.to_dmatrix();
        let want = m.transpose() * &m / 30.0;
        assert!((c - want).amax() < 1e-14);
    }

    #[test]
    fn negative_lag_is_the_transpose() {
        let rows: Vec<Vec<f64>> = (0..40).map(|i| vec![(i as f64 * 0.3).sin(), (i as f64 * 1.1).cos()]).collect();
        let s = SeriesMatrix::from_rows(&rows).unwrap();
        let pos = local_autocov_hat(&s, 1, 3, 0.4, TimeKernel::EpanechnikovOpt, 13).unwrap();
        let neg = local_autocov_hat(&s, 1, -3, 0.4, TimeKernel::EpanechnikovOpt, 13).unwrap();
        assert!((pos.transpose() - neg).amax() < 1e-15);
    }

    #[test]
    fn tiny_bandwidth_is_a_degenerate_window() {
        let s = series(&[1.0; 100]);
        let err = local_autocov_hat(&s, 0, 0, 0.005, TimeKernel::EpanechnikovOpt, 10).unwrap_err();
        assert!(matches!(err, Error::DegenerateWindow { .. }));
        let plan = BandwidthPlan::predetermined(0.5, 0.005, 10, 100).unwrap();
        assert!(matches!(
            dk_hac(&s, LagKernel::QuadraticSpectral, TimeKernel::EpanechnikovOpt, &plan, false, 0),
            Err(Error::DegenerateWindow { .. })
        ));
    }

    #[test]
    fn fast_path_agrees_with_pairwise_definition() {
        let vals: Vec<f64> = (0..90).map(|i| ((i * 37 % 11) as f64 - 5.0) * 0.3 + (i as f64 * 0.2).sin()).collect();
        let s = series(&vals);
        let plan = BandwidthPlan::predetermined(0.2, 0.3, 20, 90).unwrap();
        let est = dk_hac(&s, LagKernel::QuadraticSpectral, TimeKernel::EpanechnikovOpt, &plan, false, 0).unwrap();
        let mut want = gamma_hat(&s, 0, &plan, TimeKernel::EpanechnikovOpt).unwrap()[(0, 0)];
        for k in 1..90_i64 {
            let w = LagKernel::QuadraticSpectral.eval(0.2 * k as f64);
            let g = gamma_hat(&s, k, &plan, TimeKernel::EpanechnikovOpt).unwrap()[(0, 0)];
            want += 2.0 * w * g;
        }
        assert_abs_diff_eq!(est.scalar(), want, epsilon = 1e-12);
    }

    #[test]
    fn zero_series_gives_zero_estimate() {
        let s = SeriesMatrix::zeros(64, 2);
        let plan = BandwidthPlan::predetermined_default_blocks(0.1, 0.3, 64).unwrap();
        let est = dk_hac(&s, LagKernel::QuadraticSpectral, TimeKernel::EpanechnikovOpt, &plan, true, 2).unwrap();
        assert_eq!(est.j, DMatrix::zeros(2, 2));
        assert!(!est.psd_warning);
    }

    #[test]
    fn block_bookkeeping() {
        assert_eq!(default_block_len(200), 33);
        assert_eq!(block_count(200, 33), 6);
        assert_eq!(block_count(64, 64), 1);
        assert_abs_diff_eq!(block_weight(200, 33), 33.0 / 167.0, epsilon = 1e-15);
        assert_eq!(block_weight(64, 64), 1.0);
    }

    #[test]
    fn plan_validation() {
        assert!(BandwidthPlan::predetermined(0.0, 0.5, 10, 100).is_err());
        assert!(BandwidthPlan::predetermined(0.5, 1.5, 10, 100).is_err());
        assert!(BandwidthPlan::predetermined(0.5, 0.5, 101, 100).is_err());
        let mut plan = BandwidthPlan::predetermined(0.5, 0.5, 10, 100).unwrap();
        plan.b2.pop();
        assert!(plan.validate(100).is_err());
    }

    #[test]
    fn estimate_json_round_trip() {
        let vals: Vec<f64> = (0..64).map(|i| (i as f64 * 0.37).sin()).collect();
        let est = dk_hac_auto(&series(&vals), LagKernel::QuadraticSpectral, TimeKernel::EpanechnikovOpt, 0).unwrap();
        let text = serde_json::to_string(&est).unwrap();
        let back: LrvEstimate = serde_json::from_str(&text).unwrap();
        assert_eq!(back, est);
    }
}
