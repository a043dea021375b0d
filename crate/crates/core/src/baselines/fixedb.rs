//! Simulated fixed-b critical values for the Bartlett kernel at `b = 1`.
//!
//! Under the null the studentized mean with a Bartlett `b = 1` normalizer
//! converges to `W(1) / sqrt(2 ∫₀¹ B(r)² dr)` with `B` a Brownian bridge.
//! The functional is simulated on a discrete grid: each replication draws
//! `n` iid normals `e_t` and records
//! `|√n ē| / sqrt(2 n^{-2} Σ_{t<n} Ŝ_t²)`, where `Ŝ_t` are partial sums of
//! `e − ē`. Regression t-tests and mean (location) tests share this limit.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::path::Path;

use crate::error::{Error, Result};

/// Grid size of the shipped table.
pub const DEFAULT_GRID: usize = 2000;
/// Replications of the shipped table.
pub const DEFAULT_REPLICATIONS: usize = 200_000;
pub const DEFAULT_SEED: u64 = 20_240_601;
pub const LEVELS: [f64; 3] = [0.90, 0.95, 0.99];
const CACHE_VERSION: u32 = 1;

static EMBEDDED: &str = include_str!("../../data/fixedb_bartlett_b1.json");

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FixedBFamily {
    /// Studentized regression coefficient.
    TStatistic,
    /// Studentized mean of a loss series (DM and GR tests).
    Location,
}

/// Two-sided quantiles of `|t|` with the metadata needed to regenerate them.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FixedBCriticalValues {
    pub version: u32,
    pub kernel: String,
    pub b: f64,
    /// Both families share the simulated functional.
    pub families: Vec<FixedBFamily>,
    pub levels: Vec<f64>,
    pub quantiles: Vec<f64>,
    pub grid: usize,
    pub replications: usize,
    pub seed: u64,
}

impl FixedBCriticalValues {
    /// Simulate the table. Replication `i` uses stream `i` of a ChaCha8
    /// generator seeded with `seed`, so the result does not depend on the
    /// thread count.
    pub fn simulate(grid: usize, replications: usize, seed: u64) -> Result<Self> {
        if grid < 16 || replications < 100 {
            return Err(Error::InvalidInput(format!(
                "fixed-b simulation needs grid >= 16 and >= 100 replications (got {grid}, {replications})"
            )));
        }
        let mut draws: Vec<f64> = (0..replications)
            .into_par_iter()
            .map_init(
                || vec![0.0; grid],
                |buf, rep| {
                    let mut rng = ChaCha8Rng::seed_from_u64(seed);
                    rng.set_stream(rep as u64);
                    buf.iter_mut().for_each(|x| *x = StandardNormal.sample(&mut rng));
                    studentized_mean(buf)
                },
            )
            .collect();
        draws.sort_by(f64::total_cmp);
        let quantiles = LEVELS.iter().map(|&p| quantile_sorted(&draws, p)).collect();
        Ok(Self {
            version: CACHE_VERSION,
            kernel: "bartlett".into(),
            b: 1.0,
            families: vec![FixedBFamily::TStatistic, FixedBFamily::Location],
            levels: LEVELS.to_vec(),
            quantiles,
            grid,
            replications,
            seed,
        })
    }

    /// The table shipped with the crate.
    pub fn embedded() -> Self {
        serde_json::from_str(EMBEDDED).expect("embedded fixed-b table is valid")
    }

    pub fn load(path: &Path) -> Result<Self> {
        let table: Self = serde_json::from_str(&std::fs::read_to_string(path)?)?;
        table.validate()?;
        Ok(table)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        let mut text = serde_json::to_string_pretty(self)?;
        text.push('\n');
        std::fs::write(path, text)?;
        Ok(())
    }

    /// Load `path` if it holds a table with the requested metadata,
    /// otherwise simulate and write it.
    pub fn load_or_simulate(path: &Path, grid: usize, replications: usize, seed: u64) -> Result<Self> {
        if let Ok(table) = Self::load(path) {
            if table.grid == grid && table.replications == replications && table.seed == seed {
                return Ok(table);
            }
        }
        let table = Self::simulate(grid, replications, seed)?;
        if let Some(dir) = path.parent() {
            std::fs::create_dir_all(dir)?;
        }
        table.save(path)?;
        Ok(table)
    }

    pub fn validate(&self) -> Result<()> {
        if self.levels.len() != self.quantiles.len() || self.levels.is_empty() {
            return Err(Error::Parse("fixed-b table: levels and quantiles differ in length".into()));
        }
        if self.quantiles.windows(2).any(|w| w[1] <= w[0]) || self.levels.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::Parse("fixed-b table: quantiles must increase with level".into()));
        }
        Ok(())
    }

    /// Two-sided critical value at significance `alpha` (e.g. 0.05).
    pub fn critical_value(&self, alpha: f64) -> Result<f64> {
        self.levels
            .iter()
            .position(|l| (l - (1.0 - alpha)).abs() < 1e-9)
            .map(|i| self.quantiles[i])
            .ok_or_else(|| Error::InvalidInput(format!("no fixed-b critical value stored for alpha = {alpha}")))
    }
}

/// `|√n ē| / sqrt(2 n^{-2} Σ_{t<n} Ŝ_t²)` for one simulated path.
pub fn studentized_mean(e: &[f64]) -> f64 {
    let n = e.len() as f64;
    let mean = e.iter().sum::<f64>() / n;
    let mut partial = 0.0;
    let mut ss = 0.0;
    for x in &e[..e.len() - 1] {
        partial += x - mean;
        ss += partial * partial;
    }
    let omega = 2.0 * ss / (n * n);
    (n.sqrt() * mean).abs() / omega.sqrt()
}

/// Linear-interpolation sample quantile of sorted data.
fn quantile_sorted(sorted: &[f64], p: f64) -> f64 {
    let h = (sorted.len() - 1) as f64 * p;
    let lo = h.floor() as usize;
    let hi = (lo + 1).min(sorted.len() - 1);
    sorted[lo] + (h - lo as f64) * (sorted[hi] - sorted[lo])
}
