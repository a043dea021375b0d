//! Size and power experiments.
//!
//! Replication `i` draws its data from stream `i` of a ChaCha8 generator
//! seeded with the base seed; every value of `δ` reuses that stream, so
//! power curves use common random numbers. Rejections are reduced as
//! integer counts, which makes the report independent of the worker count.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::path::Path;
use std::time::Instant;

use super::dgp::{Dataset, DgpSpec, ModelId, TestKind};
use crate::baselines::FixedBCriticalValues;
use crate::error::{Error, Result};
use crate::hartests::{dm_test, gr_test, ols_fit, t_test_with, LrvMethod};

/// The estimators compared in every table.
pub fn default_estimators() -> Vec<LrvMethod> {
    vec![
        LrvMethod::DK_DEFAULT,
        LrvMethod::Andrews { prewhiten: false },
        LrvMethod::Andrews { prewhiten: true },
        LrvMethod::NeweyWest { prewhiten: false },
        LrvMethod::NeweyWest { prewhiten: true },
        LrvMethod::FixedB,
    ]
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub model: ModelId,
    pub nobs: usize,
    pub deltas: Vec<f64>,
    pub estimators: Vec<LrvMethod>,
    pub replications: usize,
    pub base_seed: u64,
    #[serde(skip)]
    pub workers: usize,
    pub alpha: f64,
}

impl ExperimentConfig {
    pub fn new(model: ModelId, nobs: usize, deltas: Vec<f64>, replications: usize, base_seed: u64) -> Self {
        Self {
            model,
            nobs,
            deltas,
            estimators: default_estimators(),
            replications,
            base_seed,
            workers: 1,
            alpha: 0.05,
        }
    }

    fn validate(&self) -> Result<()> {
        if self.replications < 100 {
            return Err(Error::InvalidInput(format!("need at least 100 replications, got {}", self.replications)));
        }
        if self.deltas.is_empty() || self.estimators.is_empty() {
            return Err(Error::InvalidInput("empty delta grid or estimator list".into()));
        }
        for &d in &self.deltas {
            DgpSpec::new(self.model, self.nobs, d)?;
        }
        Ok(())
    }
}

/// Rejection rate of one estimator at one `δ`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Cell {
    pub delta: f64,
    pub estimator: String,
    pub rejections: usize,
    /// Replications where the test was computed.
    pub valid: usize,
    pub failures: usize,
    pub rate: f64,
    /// `sqrt(p(1 − p)/valid)`.
    pub mc_se: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimulationReport {
    pub model: ModelId,
    pub nobs: usize,
    /// Observations entering the statistic (`T_n` for forecast tests).
    pub test_len: usize,
    pub test: TestKind,
    pub alpha: f64,
    pub replications: usize,
    pub base_seed: u64,
    pub estimators: Vec<LrvMethod>,
    pub deltas: Vec<f64>,
    pub cells: Vec<Cell>,
    #[serde(skip)]
    pub wall_clock_secs: f64,
}

impl SimulationReport {
    pub fn cell(&self, delta: f64, estimator: &str) -> Option<&Cell> {
        self.cells.iter().find(|c| c.delta == delta && c.estimator == estimator)
    }

    /// One CSV row per cell.
    pub fn to_csv(&self) -> Result<String> {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(["model", "T", "T_test", "test", "delta", "estimator", "rate", "mc_se", "rejections", "valid", "failures"])
            .map_err(csv_err)?;
        for c in &self.cells {
            w.write_record([
                self.model.to_string(),
                self.nobs.to_string(),
                self.test_len.to_string(),
                self.test.label().to_string(),
                c.delta.to_string(),
                c.estimator.clone(),
                format!("{:.6}", c.rate),
                format!("{:.6}", c.mc_se),
                c.rejections.to_string(),
                c.valid.to_string(),
                c.failures.to_string(),
            ])
            .map_err(csv_err)?;
        }
        let bytes = w.into_inner().map_err(|e| Error::Io(e.to_string()))?;
        String::from_utf8(bytes).map_err(|e| Error::Io(e.to_string()))
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)? + "\n")
    }

    /// Write `<stem>.csv` and `<stem>.json` into `dir`.
    pub fn write(&self, dir: &Path, stem: &str) -> Result<()> {
        std::fs::create_dir_all(dir)?;
        std::fs::write(dir.join(format!("{stem}.csv")), self.to_csv()?)?;
        std::fs::write(dir.join(format!("{stem}.json")), self.to_json()?)?;
        Ok(())
    }
}

fn csv_err(e: csv::Error) -> Error {
    Error::Io(e.to_string())
}

/// Outcome of one test in one replication.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Outcome {
    Reject,
    Accept,
    Failed,
}

/// Run every test of one dataset.
fn evaluate(
    data: &Dataset,
    estimators: &[LrvMethod],
    table: &FixedBCriticalValues,
    alpha: f64,
) -> Vec<Outcome> {
    let outcome = |r: Result<crate::hartests::TestResult>| match r {
        Ok(t) if t.reject => Outcome::Reject,
        Ok(_) => Outcome::Accept,
        Err(_) => Outcome::Failed,
    };
    match data {
        Dataset::Regression { y, x, coef, beta0 } => match ols_fit(y, x) {
            Ok(fit) => estimators.iter().map(|m| outcome(t_test_with(&fit, *coef, *beta0, m, table, alpha))).collect(),
            Err(_) => vec![Outcome::Failed; estimators.len()],
        },
        Dataset::DieboldMariano { loss1, loss2 } => {
            estimators.iter().map(|m| outcome(dm_test(loss1, loss2, m, table, alpha))).collect()
        }
        Dataset::GiacominiRossi { in_sample, out_sample } => {
            estimators.iter().map(|m| outcome(gr_test(in_sample, out_sample, m, table, alpha))).collect()
        }
    }
}

/// Outcomes of replication `rep` for every `δ` (outer) and estimator.
fn replicate(cfg: &ExperimentConfig, table: &FixedBCriticalValues, rep: usize) -> Vec<Outcome> {
    let mut out = Vec::with_capacity(cfg.deltas.len() * cfg.estimators.len());
    for &delta in &cfg.deltas {
        let mut rng = ChaCha8Rng::seed_from_u64(cfg.base_seed);
        rng.set_stream(rep as u64);
        let spec = DgpSpec { model: cfg.model, nobs: cfg.nobs, delta };
        match spec.generate(&mut rng) {
            Ok(data) => out.extend(evaluate(&data, &cfg.estimators, table, cfg.alpha)),
            Err(_) => out.extend(std::iter::repeat_n(Outcome::Failed, cfg.estimators.len())),
        }
    }
    out
}

/// Run the experiment on `cfg.workers` threads.
pub fn run_experiment(cfg: &ExperimentConfig, table: &FixedBCriticalValues) -> Result<SimulationReport> {
    cfg.validate()?;
    let started = Instant::now();
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cfg.workers.max(1))
        .build()
        .map_err(|e| Error::InvalidInput(format!("thread pool: {e}")))?;
    let ncells = cfg.deltas.len() * cfg.estimators.len();
    let counts = pool.install(|| {
        (0..cfg.replications)
            .into_par_iter()
            .map(|rep| replicate(cfg, table, rep))
            .fold(
                || vec![[0usize; 3]; ncells],
                |mut acc, outcomes| {
                    for (slot, o) in acc.iter_mut().zip(outcomes) {
                        slot[o as usize] += 1;
                    }
                    acc
                },
            )
            .reduce(
                || vec![[0usize; 3]; ncells],
                |mut a, b| {
                    for (x, y) in a.iter_mut().zip(b) {
                        for k in 0..3 {
                            x[k] += y[k];
                        }
                    }
                    a
                },
            )
    });
    let mut cells = Vec::with_capacity(ncells);
    for (i, &delta) in cfg.deltas.iter().enumerate() {
        for (j, method) in cfg.estimators.iter().enumerate() {
            let [rejections, accepts, failures] = counts[i * cfg.estimators.len() + j];
            let valid = rejections + accepts;
            let rate = if valid > 0 { rejections as f64 / valid as f64 } else { f64::NAN };
            let mc_se = if valid > 0 { (rate * (1.0 - rate) / valid as f64).sqrt() } else { f64::NAN };
            cells.push(Cell { delta, estimator: method.label(), rejections, valid, failures, rate, mc_se });
        }
    }
    let spec = DgpSpec { model: cfg.model, nobs: cfg.nobs, delta: 0.0 };
    Ok(SimulationReport {
        model: cfg.model,
        nobs: cfg.nobs,
        test_len: spec.test_len(),
        test: cfg.model.test(),
        alpha: cfg.alpha,
        replications: cfg.replications,
        base_seed: cfg.base_seed,
        estimators: cfg.estimators.clone(),
        deltas: cfg.deltas.clone(),
        cells,
        wall_clock_secs: started.elapsed().as_secs_f64(),
    })
}
