//! Plug-in bandwidths for the double-kernel estimator.
//!
//! The lag bandwidth `b1` comes from local AR(1) fits summarized in
//! `φ̂(2)`. The time bandwidth `b2(u_r)` of each block combines a
//! data-free second-derivative proxy `D̂1(u)` with a local curvature
//! measure `D̂2(u)` built from the block's own autocovariances.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

use crate::dkhac::{block_count, default_block_len, local_autocov_hat, BandwidthPlan, PlanSource};
use crate::error::{Error, Result};
use crate::kernels::{KernelConstants, LagKernel, TimeKernel};
use crate::series::SeriesMatrix;

/// Cap on `|â₁|` before the `(1 − â₁)` powers.
pub const AR_CLAMP: f64 = 0.97;
pub const PHI_FLOOR: f64 = 1e-6;
pub const D_FLOOR: f64 = 1e-8;
/// Default frequency grid for `D̂1`.
pub const DEFAULT_OMEGA_GRID: [f64; 9] = [-PI, -3.0, -2.0, -1.0, 0.0, 1.0, 2.0, 3.0, PI];
/// Shortest local AR(1) window accepted by the automatic procedure.
pub const MIN_WINDOW: usize = 8;

/// Least-squares AR(1) fit on the window `[t − n2 + 1, t]` (0-based).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LocalAr1Fit {
    pub a1_hat: f64,
    /// Root sum of squared residuals (not normalized by the window length).
    pub sigma_hat: f64,
    pub window: (usize, usize),
    /// The lagged values in the window were all zero.
    pub zero_denominator: bool,
}

/// Fit `v_j = a v_{j−1} + e_j` on the `n2` pairs ending at index `t`.
/// Indices `t < n2` fall back to the earliest window, ending at `n2`.
pub fn local_ar1_fit(v: &[f64], t: usize, n2: usize) -> Result<LocalAr1Fit> {
    if n2 < 2 {
        return Err(Error::InvalidInput(format!("AR(1) window needs at least 2 pairs, got {n2}")));
    }
    if v.len() <= n2 {
        return Err(Error::InvalidInput(format!("series of length {} too short for window {n2}", v.len())));
    }
    let t = t.max(n2);
    if t >= v.len() {
        return Err(Error::InvalidInput(format!("window end {t} beyond series length {}", v.len())));
    }
    let lo = t + 1 - n2;
    let (mut num, mut den) = (0.0, 0.0);
    for j in lo..=t {
        num += v[j] * v[j - 1];
        den += v[j - 1] * v[j - 1];
    }
    if den == 0.0 {
        return Ok(LocalAr1Fit { a1_hat: 0.0, sigma_hat: 0.0, window: (lo, t), zero_denominator: true });
    }
    let a = num / den;
    let ssr: f64 = (lo..=t).map(|j| (v[j] - a * v[j - 1]).powi(2)).sum();
    Ok(LocalAr1Fit { a1_hat: a, sigma_hat: ssr.sqrt(), window: (lo, t), zero_denominator: false })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Phi2Estimate {
    /// Value after flooring at [`PHI_FLOOR`].
    pub value: f64,
    /// Ratio before flooring; NaN when the denominator vanished.
    pub raw: f64,
    pub floored: bool,
    /// Number of local fits with `|â₁|` clamped.
    pub clamped_fits: usize,
    pub zero_denominator_fits: usize,
}

/// `φ̂(2)` from local AR(1) fits on blocks anchored at `j·n3` (0-based end
/// index), `j = 0..⌊T/n3⌋ − 1`.
pub fn phi2_hat(v: &SeriesMatrix, weights: &[f64], n3: usize) -> Result<Phi2Estimate> {
    let t = v.nobs();
    if weights.len() != v.dim() {
        return Err(Error::InvalidInput(format!("{} weights for {} components", weights.len(), v.dim())));
    }
    if weights.iter().any(|w| !(w.is_finite() && *w >= 0.0)) || !weights.iter().any(|w| *w > 0.0) {
        return Err(Error::InvalidInput("weights must be nonnegative with at least one positive".into()));
    }
    if n3 == 0 || t < 2 * n3 {
        return Err(Error::InvalidInput(format!("need T >= 2 n3 (T = {t}, n3 = {n3})")));
    }
    let blocks = t / n3;
    let scale = n3 as f64 / t as f64;
    let (mut num, mut den) = (0.0, 0.0);
    let (mut clamped_fits, mut zero_denominator_fits) = (0, 0);
    for (c, &w) in weights.iter().enumerate() {
        if w == 0.0 {
            continue;
        }
        let col = v.column(c);
        let (mut top, mut bottom) = (0.0, 0.0);
        for j in 0..blocks {
            let fit = local_ar1_fit(&col, j * n3, n3)?;
            zero_denominator_fits += usize::from(fit.zero_denominator);
            if fit.a1_hat.abs() > AR_CLAMP {
                clamped_fits += 1;
            }
            let a = fit.a1_hat.clamp(-AR_CLAMP, AR_CLAMP);
            let s2 = fit.sigma_hat * fit.sigma_hat;
            top += s2 * a / (1.0 - a).powi(4);
            bottom += s2 / (1.0 - a).powi(2);
        }
        num += w * 18.0 * (scale * top).powi(2);
        den += w * (scale * bottom).powi(2);
    }
    let raw = if den > 0.0 { num / den } else { f64::NAN };
    let floored = !(raw >= PHI_FLOOR);
    let value = if floored { PHI_FLOOR } else { raw };
    Ok(Phi2Estimate { value, raw, floored, clamped_fits, zero_denominator_fits })
}

/// Reference coefficient path `0.8(cos 1.5 + cos 4πu)` behind `D̂1`.
pub fn reference_a1(u: f64) -> f64 {
    0.8 * (1.5f64.cos() + (4.0 * PI * u).cos())
}

/// Data-free curvature proxy `D̂1(u)`: squared modulus of the grid average
/// of the two complex derivative terms.
pub fn d1_hat(u: f64, grid: &[f64]) -> f64 {
    let a = reference_a1(u);
    let da = 0.8 * (-4.0 * PI * (4.0 * PI * u).sin());
    let d2a = 0.8 * (-16.0 * PI * PI * (4.0 * PI * u).cos());
    let mut acc = Complex64::new(0.0, 0.0);
    for &w in grid {
        let e = Complex64::from_polar(1.0, -w);
        let base = Complex64::new(1.0, 0.0) + a * e;
        let first = (3.0 / PI) * base.powi(-4) * da * e;
        let second = (1.0 / PI) * base.norm().powi(-3) * d2a * e;
        acc += first - second;
    }
    (acc / grid.len() as f64).norm_sqr()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct D2Estimate {
    pub value: f64,
    pub floored: bool,
}

/// Local curvature `D̂2(u_r)` at block `r`:
/// `p^{-1} Σ_c Σ_{|l|≤L} 2 ĉ_cc(u_r, l)²` with `L = ⌊T^{4/25}⌋`.
pub fn d2_hat(v: &SeriesMatrix, r: usize, time_kernel: TimeKernel, b2_pilot: f64, block_len: usize) -> Result<D2Estimate> {
    let t = v.nobs();
    let lags = ((t as f64).powf(4.0 / 25.0).floor() as i64).min(t as i64 - 1);
    let p = v.dim();
    let mut acc = 0.0;
    for l in -lags..=lags {
        let c = local_autocov_hat(v, r, l, b2_pilot, time_kernel, block_len)?;
        acc += (0..p).map(|i| 2.0 * c[(i, i)] * c[(i, i)]).sum::<f64>();
    }
    let raw = acc / p as f64;
    let floored = !(raw >= D_FLOOR);
    Ok(D2Estimate { value: if floored { D_FLOOR } else { raw }, floored })
}

/// `b̂2 = C2 D̂1^{-1/5} D̂2^{1/5} T^{-1/5}` clipped to `[8/T, 1]`; the flag
/// reports whether clipping bit.
pub fn b2_hat(d1: f64, d2: f64, nobs: usize, constants: &KernelConstants) -> (f64, bool) {
    let raw = constants.time_bandwidth_constant() * d1.powf(-0.2) * d2.powf(0.2) * (nobs as f64).powf(-0.2);
    clip(raw, 8.0 / nobs as f64)
}

/// `(n_T/T) Σ_{r=1}^{R} b2(u_r)`, skipping block 0.
pub fn b2_bar(schedule: &[f64], block_len: usize, nobs: usize) -> f64 {
    block_len as f64 / nobs as f64 * schedule.iter().skip(1).sum::<f64>()
}

/// `b̂1 = (2q K_{1,q}² φ̂ T b̄2 / (∫K1² ∫K2²))^{-1/(2q+1)}` clipped to `[1/T, 1]`.
pub fn b1_hat(phi: f64, b2_bar: f64, nobs: usize, lag_kernel: LagKernel, time_kernel: TimeKernel) -> Result<(f64, bool)> {
    let c = KernelConstants::new(lag_kernel, time_kernel);
    let q = c.plug_in_q(lag_kernel)?;
    let inner = 2.0 * q * c.k1q * c.k1q * phi * nobs as f64 * b2_bar / (c.int_k1_sq * c.f);
    Ok(clip(inner.powf(-1.0 / (2.0 * q + 1.0)), 1.0 / nobs as f64))
}

fn clip(x: f64, lower: f64) -> (f64, bool) {
    if !x.is_finite() || x > 1.0 {
        (1.0, true)
    } else if x < lower {
        (lower, true)
    } else {
        (x, false)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PlugInFlag {
    PhiFloored,
    AutoregressionClamped,
    ZeroDenominatorFit,
    D2Floored,
    B2Clipped,
    B1Clipped,
}

/// Intermediate quantities of one plug-in bandwidth computation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlugInDiagnostics {
    pub phi2_hat: f64,
    pub phi2_raw: f64,
    pub d1: Vec<f64>,
    pub d2: Vec<f64>,
    pub b2_pilot: Vec<f64>,
    pub b2_schedule: Vec<f64>,
    pub b2_bar: f64,
    pub b1: f64,
    pub block_len: usize,
    pub flags: Vec<PlugInFlag>,
}

/// Plug-in bandwidth plan with `n_T = n2 = n3 = ⌊T^0.66⌋`.
///
/// Each block gets a pilot `b2` from the white-noise proxy `D2 = 2`, then
/// one refinement with the estimated `D̂2`.
pub fn plug_in_plan(
    v: &SeriesMatrix,
    lag_kernel: LagKernel,
    time_kernel: TimeKernel,
    weights: &[f64],
) -> Result<(BandwidthPlan, PlugInDiagnostics)> {
    if !time_kernel.conforming() {
        return Err(Error::NonConformingTimeKernel(time_kernel.to_string()));
    }
    let constants = KernelConstants::new(lag_kernel, time_kernel);
    let q = constants.plug_in_q(lag_kernel)?;
    if q != 2.0 {
        return Err(Error::UnsupportedKernel(format!("{lag_kernel} (plug-in rule needs q = 2)")));
    }
    let t = v.nobs();
    let n = default_block_len(t);
    if n < MIN_WINDOW {
        return Err(Error::InvalidInput(format!("block length {n} below {MIN_WINDOW}; sample too short")));
    }
    let mut flags = Vec::new();
    let mut flag = |f: PlugInFlag| {
        if !flags.contains(&f) {
            flags.push(f);
        }
    };
    let phi = phi2_hat(v, weights, n)?;
    if phi.floored {
        flag(PlugInFlag::PhiFloored);
    }
    if phi.clamped_fits > 0 {
        flag(PlugInFlag::AutoregressionClamped);
    }
    if phi.zero_denominator_fits > 0 {
        flag(PlugInFlag::ZeroDenominatorFit);
    }

    let blocks = block_count(t, n);
    let (mut d1s, mut d2s, mut pilots, mut schedule) = (vec![], vec![], vec![], vec![]);
    for r in 0..blocks {
        let u = (r * n) as f64 / t as f64;
        let d1 = d1_hat(u, &DEFAULT_OMEGA_GRID).max(D_FLOOR);
        let (pilot, _) = b2_hat(d1, 2.0, t, &constants);
        let d2_pilot = d2_hat(v, r, time_kernel, pilot, n)?;
        let (first, _) = b2_hat(d1, d2_pilot.value, t, &constants);
        let d2 = d2_hat(v, r, time_kernel, first, n)?;
        let (b2, clipped) = b2_hat(d1, d2.value, t, &constants);
        if d2.floored {
            flag(PlugInFlag::D2Floored);
        }
        if clipped {
            flag(PlugInFlag::B2Clipped);
        }
        d1s.push(d1);
        d2s.push(d2.value);
        pilots.push(pilot);
        schedule.push(b2);
    }
    let bar = b2_bar(&schedule, n, t);
    let (b1, clipped) = b1_hat(phi.value, bar, t, lag_kernel, time_kernel)?;
    if clipped {
        flag(PlugInFlag::B1Clipped);
    }
    let plan = BandwidthPlan { b1, b2: schedule.clone(), b2_bar: bar, block_len: n, source: PlanSource::PlugIn };
    plan.validate(t)?;
    let diag = PlugInDiagnostics {
        phi2_hat: phi.value,
        phi2_raw: phi.raw,
        d1: d1s,
        d2: d2s,
        b2_pilot: pilots,
        b2_schedule: schedule,
        b2_bar: bar,
        b1,
        block_len: n,
        flags,
    };
    Ok((plan, diag))
}
