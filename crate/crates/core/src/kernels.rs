//! Lag kernels (smoothing over autocovariance lags) and time kernels
//! (smoothing over rescaled time), with the analytic constants the
//! plug-in bandwidth formulas need.

use std::f64::consts::PI;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Below this |x| the quadratic-spectral kernel is evaluated by its Taylor
/// series; the closed form is 0/0 at the origin.
const QS_SERIES_CUTOFF: f64 = 1e-2;

/// Kernel applied to lagged autocovariances, `K1(b1 · k)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LagKernel {
    QuadraticSpectral,
    Bartlett,
    Parzen,
    TukeyHanning,
    Truncated,
}

impl LagKernel {
    pub const ALL: [LagKernel; 5] = [
        LagKernel::QuadraticSpectral,
        LagKernel::Bartlett,
        LagKernel::Parzen,
        LagKernel::TukeyHanning,
        LagKernel::Truncated,
    ];

    /// Kernel weight at `x`. Total, even, bounded by one.
    pub fn eval(self, x: f64) -> f64 {
        let a = x.abs();
        match self {
            LagKernel::QuadraticSpectral => {
                let z = 6.0 * PI * a / 5.0;
                if a < QS_SERIES_CUTOFF {
                    let z2 = z * z;
                    1.0 - z2 / 10.0 + z2 * z2 / 280.0
                } else {
                    25.0 / (12.0 * PI * PI * a * a) * (z.sin() / z - z.cos())
                }
            }
            LagKernel::Bartlett => {
                if a <= 1.0 {
                    1.0 - a
                } else {
                    0.0
                }
            }
            LagKernel::Parzen => {
                if a <= 0.5 {
                    1.0 - 6.0 * a * a + 6.0 * a * a * a
                } else if a <= 1.0 {
                    2.0 * (1.0 - a).powi(3)
                } else {
                    0.0
                }
            }
            LagKernel::TukeyHanning => {
                if a <= 1.0 {
                    0.5 * (1.0 + (PI * a).cos())
                } else {
                    0.0
                }
            }
            LagKernel::Truncated => {
                if a <= 1.0 {
                    1.0
                } else {
                    0.0
                }
            }
        }
    }

    /// Characteristic exponent `q`; `None` when no `q` gives a finite
    /// nonzero `K_{1,q}` (truncated kernel).
    pub fn q(self) -> Option<f64> {
        match self {
            LagKernel::QuadraticSpectral | LagKernel::Parzen | LagKernel::TukeyHanning => Some(2.0),
            LagKernel::Bartlett => Some(1.0),
            LagKernel::Truncated => None,
        }
    }

    /// `K_{1,q} = lim_{x→0} (1 − K1(x)) / |x|^q`.
    pub fn k1q(self) -> f64 {
        match self {
            LagKernel::QuadraticSpectral => 18.0 * PI * PI / 125.0,
            LagKernel::Bartlett => 1.0,
            LagKernel::Parzen => 6.0,
            LagKernel::TukeyHanning => PI * PI / 4.0,
            LagKernel::Truncated => 0.0,
        }
    }

    /// `∫ K1(x)² dx` over the real line.
    pub fn integral_sq(self) -> f64 {
        match self {
            LagKernel::QuadraticSpectral => 1.0,
            LagKernel::Bartlett => 2.0 / 3.0,
            LagKernel::Parzen => 151.0 / 280.0,
            LagKernel::TukeyHanning => 0.75,
            LagKernel::Truncated => 2.0,
        }
    }

    /// Whether the kernel has a nonnegative spectral window, so that the
    /// weighted sum of sample autocovariances is positive semidefinite.
    pub fn psd_generating(self) -> bool {
        matches!(
            self,
            LagKernel::QuadraticSpectral | LagKernel::Bartlett | LagKernel::Parzen
        )
    }

    /// Largest |x| with nonzero weight; `None` for unbounded support.
    pub fn support(self) -> Option<f64> {
        match self {
            LagKernel::QuadraticSpectral => None,
            _ => Some(1.0),
        }
    }
}

impl fmt::Display for LagKernel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            LagKernel::QuadraticSpectral => "qs",
            LagKernel::Bartlett => "bartlett",
            LagKernel::Parzen => "parzen",
            LagKernel::TukeyHanning => "tukey_hanning",
            LagKernel::Truncated => "truncated",
        };
        f.write_str(s)
    }
}

impl std::str::FromStr for LagKernel {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "qs" | "quadratic_spectral" => Ok(LagKernel::QuadraticSpectral),
            "bartlett" => Ok(LagKernel::Bartlett),
            "parzen" => Ok(LagKernel::Parzen),
            "tukey_hanning" | "th" => Ok(LagKernel::TukeyHanning),
            "truncated" => Ok(LagKernel::Truncated),
            other => Err(Error::InvalidInput(format!("unknown lag kernel `{other}`"))),
        }
    }
}

/// Kernel applied over rescaled time, supported on `[0, 1]`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TimeKernel {
    /// `6x(1 − x)` on `[0, 1]`, the MSE-optimal time kernel.
    EpanechnikovOpt,
    /// Constant one on `[0, 1]`. Discontinuous at the support edges, so it
    /// is only admitted for fixed-bandwidth runs (with `b2 = 1` it reduces
    /// the double-kernel estimator to a classical one).
    Uniform,
}

impl TimeKernel {
    pub fn eval(self, x: f64) -> f64 {
        if !(0.0..=1.0).contains(&x) {
            return 0.0;
        }
        match self {
            TimeKernel::EpanechnikovOpt => 6.0 * x * (1.0 - x),
            TimeKernel::Uniform => 1.0,
        }
    }

    /// `F = ∫₀¹ K2(x)² dx`.
    pub fn integral_sq(self) -> f64 {
        match self {
            TimeKernel::EpanechnikovOpt => 6.0 / 5.0,
            TimeKernel::Uniform => 1.0,
        }
    }

    /// `H = (∫₀¹ x² K2(x) dx)²`.
    pub fn h_constant(self) -> f64 {
        match self {
            TimeKernel::EpanechnikovOpt => 9.0 / 100.0,
            TimeKernel::Uniform => 1.0 / 9.0,
        }
    }

    /// Members of the admissible time-kernel class (continuous on the real
    /// line). Only these may drive plug-in bandwidths.
    pub fn conforming(self) -> bool {
        matches!(self, TimeKernel::EpanechnikovOpt)
    }
}

impl fmt::Display for TimeKernel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            TimeKernel::EpanechnikovOpt => "epanechnikov_opt",
            TimeKernel::Uniform => "uniform",
        })
    }
}

impl std::str::FromStr for TimeKernel {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "epanechnikov_opt" | "epanechnikov" | "opt" => Ok(TimeKernel::EpanechnikovOpt),
            "uniform" => Ok(TimeKernel::Uniform),
            other => Err(Error::InvalidInput(format!("unknown time kernel `{other}`"))),
        }
    }
}

/// Product-form weight `K2*` for the pair `(s, s − k)` relative to a block
/// anchor: `sqrt(K2((anchor − s)/(T b2)) · K2((anchor − (s − k))/(T b2)))`.
///
/// Each observation receives the same taper across lags, which keeps the
/// blockwise autocovariance sequence positive semidefinite. For `k < 0`
/// the pair is `(s, s + k)`, mirroring the negative-lag form.
pub fn k2_star_weight(kernel: TimeKernel, anchor: i64, s: i64, k: i64, t: usize, b2: f64) -> f64 {
    let scale = t as f64 * b2;
    let first = kernel.eval((anchor - s) as f64 / scale);
    if k == 0 {
        return first;
    }
    let partner = if k > 0 { s - k } else { s + k };
    let second = kernel.eval((anchor - partner) as f64 / scale);
    (first * second).sqrt()
}

/// Analytic constants entering the optimal-bandwidth formulas.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KernelConstants {
    pub q: Option<f64>,
    pub k1q: f64,
    pub int_k1_sq: f64,
    pub f: f64,
    pub h: f64,
}

impl KernelConstants {
    pub fn new(lag: LagKernel, time: TimeKernel) -> Self {
        Self {
            q: lag.q(),
            k1q: lag.k1q(),
            int_k1_sq: lag.integral_sq(),
            f: time.integral_sq(),
            h: time.h_constant(),
        }
    }

    /// `q`, failing for kernels barred from plug-in bandwidths.
    pub fn plug_in_q(&self, lag: LagKernel) -> Result<f64> {
        match self.q {
            Some(q) if self.k1q > 0.0 && self.k1q.is_finite() => Ok(q),
            _ => Err(Error::UnsupportedKernel(lag.to_string())),
        }
    }

    /// Multiplier `(2 q K_{1,q}² / ∫K1²)^{-1/(2q+1)}` of the lag bandwidth
    /// before the time-kernel factor; `0.6584` for the QS kernel.
    pub fn lag_bandwidth_constant(&self) -> Option<f64> {
        let q = self.q?;
        Some((2.0 * q * self.k1q * self.k1q / self.int_k1_sq).powf(-1.0 / (2.0 * q + 1.0)))
    }

    /// `H^{-1/5} F^{1/5}`; `1.6786` for the optimal time kernel.
    pub fn time_bandwidth_constant(&self) -> f64 {
        self.h.powf(-0.2) * self.f.powf(0.2)
    }
}

/// Convenience wrapper matching the operation name used across the crate.
pub fn kernel_constants(lag: LagKernel, time: TimeKernel) -> KernelConstants {
    KernelConstants::new(lag, time)
}
