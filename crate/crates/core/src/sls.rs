//! Segmented locally stationary processes generated by time-varying AR(1)
//! recursions with breaks, and the frozen-coefficient local covariance and
//! local spectrum used as population oracles.
//!
//! A process has `m + 1` regimes separated by break fractions
//! `0 < λ₁ < … < λ_m < 1`. Within regime `j` the coefficient `a₁(u)`, the
//! innovation scale `σ(u)` and the trend `μ(u)` are smooth functions of
//! rescaled time `u = t/T`:
//!
//! ```text
//! V_t = μ(t/T) + a₁(t/T)·(V_{t−1} − μ((t−1)/T)) + σ(t/T)·u_t
//! ```
//!
//! At a break fraction `u = λ_j` the left regime applies.

use std::f64::consts::PI;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal, StudentT};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::series::SeriesMatrix;

/// Number of frozen-parameter draws discarded before `t = 1`.
pub const BURN_IN: usize = 200;

const VALIDATION_GRID: usize = 2000;
const LIPSCHITZ_BOUND: f64 = 1e4;

/// A scalar function of rescaled time.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum CoefPath {
    Constant { value: f64 },
    /// `start + (end − start)·u`.
    Linear { start: f64, end: f64 },
    /// `level + amplitude·cos(2π·cycles·u + phase)`.
    Cosine { level: f64, amplitude: f64, cycles: f64, phase: f64 },
    /// `max{floor, scale·cos(shift − cos(rate·u))}`; without a floor the
    /// maximum is dropped.
    NestedCosine { scale: f64, shift: f64, rate: f64, floor: Option<f64> },
}

impl CoefPath {
    pub fn constant(value: f64) -> Self {
        CoefPath::Constant { value }
    }

    pub fn eval(&self, u: f64) -> f64 {
        match *self {
            CoefPath::Constant { value } => value,
            CoefPath::Linear { start, end } => start + (end - start) * u,
            CoefPath::Cosine { level, amplitude, cycles, phase } => {
                level + amplitude * (2.0 * PI * cycles * u + phase).cos()
            }
            CoefPath::NestedCosine { scale, shift, rate, floor } => {
                let v = scale * (shift - (rate * u).cos()).cos();
                floor.map_or(v, |f| v.max(f))
            }
        }
    }
}

/// Parameter functions of one regime.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Regime {
    pub a1: CoefPath,
    pub sigma: CoefPath,
    #[serde(default = "zero_path")]
    pub mu: CoefPath,
}

fn zero_path() -> CoefPath {
    CoefPath::constant(0.0)
}

impl Regime {
    pub fn ar1(a1: f64, sigma: f64) -> Self {
        Self { a1: CoefPath::constant(a1), sigma: CoefPath::constant(sigma), mu: zero_path() }
    }
}

/// Innovation distribution, standardized to unit variance.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize, Default)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum InnovationLaw {
    #[default]
    Gaussian,
    /// Student-t with `dof > 2`, rescaled to unit variance.
    StudentT { dof: f64 },
}

/// Specification of a segmented locally stationary TVAR(1) process.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SlsSpec {
    #[serde(default)]
    pub break_fractions: Vec<f64>,
    pub regimes: Vec<Regime>,
    #[serde(default)]
    pub innovation: InnovationLaw,
}

impl SlsSpec {
    /// A stationary AR(1) with constant coefficient and innovation scale.
    pub fn stationary_ar1(a1: f64, sigma: f64) -> Self {
        Self { break_fractions: vec![], regimes: vec![Regime::ar1(a1, sigma)], innovation: InnovationLaw::Gaussian }
    }

    /// Regime active at rescaled time `u` (left regime at a break).
    pub fn regime_index(&self, u: f64) -> usize {
        self.break_fractions.iter().filter(|&&l| l < u).count()
    }

    pub fn regime_at(&self, u: f64) -> &Regime {
        &self.regimes[self.regime_index(u)]
    }

    pub fn a1(&self, u: f64) -> f64 {
        self.regime_at(u).a1.eval(u)
    }

    pub fn sigma(&self, u: f64) -> f64 {
        self.regime_at(u).sigma.eval(u)
    }

    pub fn mu(&self, u: f64) -> f64 {
        self.regime_at(u).mu.eval(u)
    }

    /// Checks ordering of breaks, regime count, the strict bound
    /// `|a₁(u)| < 1`, positivity of `σ(u)`, and a finite-difference
    /// Lipschitz bound within each regime.
    pub fn validate(&self) -> Result<()> {
        if self.regimes.len() != self.break_fractions.len() + 1 {
            return Err(Error::InvalidInput(format!(
                "{} break fractions require {} regimes, got {}",
                self.break_fractions.len(),
                self.break_fractions.len() + 1,
                self.regimes.len()
            )));
        }
        let mut prev = 0.0;
        for &l in &self.break_fractions {
            if !(l > prev && l < 1.0) {
                return Err(Error::InvalidInput(format!("break fractions must increase strictly inside (0,1): {l}")));
            }
            prev = l;
        }
        if let InnovationLaw::StudentT { dof } = self.innovation {
            if !(dof > 2.0) {
                return Err(Error::InvalidInput(format!("student-t innovations need dof > 2, got {dof}")));
            }
        }
        let h = 1.0 / VALIDATION_GRID as f64;
        let mut last: Option<(usize, f64, f64, f64)> = None;
        for i in 0..=VALIDATION_GRID {
            let u = i as f64 * h;
            let a = self.a1(u);
            let s = self.sigma(u);
            let m = self.mu(u);
            if !(a.abs() < 1.0) {
                return Err(Error::NonStationary { u, value: a.abs() });
            }
            if !(s > 0.0) || !m.is_finite() {
                return Err(Error::InvalidInput(format!("sigma(u) must be positive and mu(u) finite at u = {u}")));
            }
            let j = self.regime_index(u);
            if let Some((pj, pa, ps, pm)) = last {
                if pj == j {
                    let slope = ((a - pa).abs()).max((s - ps).abs()).max((m - pm).abs()) / h;
                    if slope > LIPSCHITZ_BOUND {
                        return Err(Error::InvalidInput(format!(
                            "parameter paths are not Lipschitz within regime {j} near u = {u}"
                        )));
                    }
                }
            }
            last = Some((j, a, s, m));
        }
        Ok(())
    }
}

fn draw_innovation<R: Rng>(law: InnovationLaw, rng: &mut R) -> f64 {
    match law {
        InnovationLaw::Gaussian => rng.sample(StandardNormal),
        InnovationLaw::StudentT { dof } => {
            let t: f64 = StudentT::new(dof).expect("validated dof").sample(rng);
            t * ((dof - 2.0) / dof).sqrt()
        }
    }
}

/// Simulate `T` observations with the innovation law of `spec`.
/// Deterministic in `(spec, T, seed)`.
pub fn simulate(spec: &SlsSpec, t: usize, seed: u64) -> Result<SeriesMatrix> {
    simulate_replication(spec, t, seed, 0)
}

/// Replication `rep` of a simulation study: the RNG is the ChaCha stream
/// `rep` under `seed`, so replications can be generated in any order.
pub fn simulate_replication(spec: &SlsSpec, t: usize, seed: u64, rep: u64) -> Result<SeriesMatrix> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(rep);
    let law = spec.innovation;
    simulate_with(spec, t, || draw_innovation(law, &mut rng))
}

/// Simulate with a caller-supplied innovation sampler (unit variance
/// expected). The sampler is called `BURN_IN + T` times.
pub fn simulate_with(spec: &SlsSpec, t: usize, mut innovation: impl FnMut() -> f64) -> Result<SeriesMatrix> {
    if t < 2 {
        return Err(Error::InvalidInput(format!("need T >= 2, got {t}")));
    }
    spec.validate()?;
    let tf = t as f64;
    let (a0, s0, m0) = (spec.a1(0.0), spec.sigma(0.0), spec.mu(0.0));
    let mut dev = 0.0;
    for _ in 0..BURN_IN {
        dev = a0 * dev + s0 * innovation();
    }
    let mut prev = m0 + dev;
    let mut prev_mu = m0;
    let mut out = Vec::with_capacity(t);
    for step in 1..=t {
        let u = step as f64 / tf;
        let r = spec.regime_at(u);
        let mu = r.mu.eval(u);
        let v = mu + r.a1.eval(u) * (prev - prev_mu) + r.sigma.eval(u) * innovation();
        out.push(v);
        prev = v;
        prev_mu = mu;
    }
    SeriesMatrix::from_column(&out)
}

/// Frozen-coefficient local autocovariance `σ²(u)·a₁(u)^{|k|}/(1 − a₁(u)²)`.
pub fn local_autocov(spec: &SlsSpec, u: f64, k: i64) -> f64 {
    let a = spec.a1(u);
    let s = spec.sigma(u);
    s * s * a.powi(k.unsigned_abs() as i32) / (1.0 - a * a)
}

/// Local spectral density `(σ²(u)/2π)·|1 − a₁(u)e^{−iω}|^{−2}`.
pub fn local_spectrum(spec: &SlsSpec, u: f64, omega: f64) -> f64 {
    let a = spec.a1(u);
    let s = spec.sigma(u);
    let transfer = Complex64::new(1.0, 0.0) - a * Complex64::from_polar(1.0, -omega);
    s * s / (2.0 * PI) / transfer.norm_sqr()
}

/// Population long-run variance `2π ∫₀¹ f(u, 0) du`, by composite Simpson.
pub fn population_lrv(spec: &SlsSpec) -> f64 {
    // Integrate regime by regime so that breaks fall on panel edges.
    let mut edges = vec![0.0];
    edges.extend(&spec.break_fractions);
    edges.push(1.0);
    let n = 2000;
    let mut total = 0.0;
    for w in edges.windows(2) {
        let (lo, hi) = (w[0], w[1]);
        let j = spec.regime_index(hi);
        let r = &spec.regimes[j];
        let f = |u: f64| {
            let a = r.a1.eval(u);
            let s = r.sigma.eval(u);
            s * s / ((1.0 - a) * (1.0 - a))
        };
        let h = (hi - lo) / n as f64;
        let mut s = f(lo) + f(hi);
        for i in 1..n {
            s += if i % 2 == 1 { 4.0 } else { 2.0 } * f(lo + i as f64 * h);
        }
        total += s * h / 3.0;
    }
    total
}
