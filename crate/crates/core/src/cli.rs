//! Command-line front end.
//!
//! Exit codes: 0 success, 2 usage or malformed input, 3 estimation failure,
//! 4 fixed-b cache failure. Data goes to files; stdout carries data only
//! with `--stdout`, and progress goes to stderr.

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};
use std::ffi::OsString;
use std::path::{Path, PathBuf};

use crate::baselines::fixedb::{DEFAULT_GRID, DEFAULT_REPLICATIONS, DEFAULT_SEED};
use crate::baselines::FixedBCriticalValues;
use crate::bandwidths::PlugInDiagnostics;
use crate::dkhac::{LrvEstimate, Provenance};
use crate::hartests::LrvMethod;
use crate::kernels::{LagKernel, TimeKernel};
use crate::montecarlo::{run_experiment, run_tables, ExperimentConfig, ModelId, TablesOptions};
use crate::series::SeriesMatrix;

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_ESTIMATION: i32 = 3;
pub const EXIT_CACHE: i32 = 4;

/// Rows required in an `estimate` input file.
pub const MIN_INPUT_ROWS: usize = 32;

#[derive(Debug, Parser)]
#[command(name = "dkhac", version, about = "Long-run variance estimation and HAR test simulations")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Estimate the long-run variance of the columns of a CSV file.
    Estimate(EstimateArgs),
    /// Run one size/power experiment.
    Simulate(SimulateArgs),
    /// Regenerate the size and power tables.
    Tables(TablesArgs),
    /// Simulate or check the fixed-b critical-value cache.
    FixedbCache(CacheArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Json,
    Csv,
}

#[derive(Debug, Args)]
pub struct EstimateArgs {
    /// CSV with a header row and one column per component.
    pub input: Option<PathBuf>,
    /// TOML file supplying any of the options below.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// dk_hac, nw, nw_pw, andrews, andrews_pw or kvb.
    #[arg(long)]
    pub estimator: Option<String>,
    #[arg(long)]
    pub lag_kernel: Option<String>,
    #[arg(long)]
    pub time_kernel: Option<String>,
    /// Lag bandwidth override; requires `--b2`.
    #[arg(long)]
    pub b1: Option<f64>,
    /// Time bandwidth override; requires `--b1`.
    #[arg(long)]
    pub b2: Option<f64>,
    /// Plug-in weights, one per column.
    #[arg(long, value_delimiter = ',')]
    pub weights: Option<Vec<f64>>,
    /// Parameters of the model that produced the series; enables the dof factor.
    #[arg(long)]
    pub p_model: Option<usize>,
    /// Subtract column means before estimation.
    #[arg(long)]
    pub demean: bool,
    /// Output file; defaults to the input path with a `.lrv.json` or `.lrv.csv` suffix.
    #[arg(long, short)]
    pub output: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub format: Option<Format>,
    /// Also write the plug-in diagnostics as JSON to this path.
    #[arg(long)]
    pub diagnostics: Option<PathBuf>,
    /// Write the report to stdout instead of a file.
    #[arg(long)]
    pub stdout: bool,
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// M1 … M8.
    #[arg(long)]
    pub model: Option<String>,
    /// Sample size (out-of-sample length for M7).
    #[arg(long = "T")]
    pub nobs: Option<usize>,
    /// Replications.
    #[arg(long = "R")]
    pub replications: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub workers: Option<usize>,
    #[arg(long, value_delimiter = ',')]
    pub deltas: Option<Vec<f64>>,
    #[arg(long, value_delimiter = ',')]
    pub estimators: Option<Vec<String>>,
    #[arg(long)]
    pub out_dir: Option<PathBuf>,
    /// File stem; defaults to `<model>_T<T>`.
    #[arg(long)]
    pub stem: Option<String>,
    /// Write the CSV report to stdout instead of files.
    #[arg(long)]
    pub stdout: bool,
}

#[derive(Debug, Args)]
pub struct TablesArgs {
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub out_dir: Option<PathBuf>,
    #[arg(long = "R")]
    pub replications: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub workers: Option<usize>,
    /// Keep only columns with these sample sizes.
    #[arg(long = "T", value_delimiter = ',')]
    pub nobs: Option<Vec<usize>>,
    /// Keep only these tables (labels or file stems).
    #[arg(long, value_delimiter = ',')]
    pub tables: Option<Vec<String>>,
    #[arg(long, value_delimiter = ',')]
    pub estimators: Option<Vec<String>>,
    /// Fixed-b cache file; simulated at the default size when missing.
    #[arg(long)]
    pub cache: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct CacheArgs {
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Cache file to create or check.
    #[arg(long)]
    pub cache: Option<PathBuf>,
    #[arg(long)]
    pub grid: Option<usize>,
    #[arg(long = "R")]
    pub replications: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub workers: Option<usize>,
    /// Validate an existing file instead of simulating.
    #[arg(long)]
    pub check: bool,
    /// Resimulate even when the file matches.
    #[arg(long)]
    pub force: bool,
}

/// Keys accepted in a `--config` TOML file. Unknown keys are rejected.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub input: Option<PathBuf>,
    pub estimator: Option<String>,
    pub lag_kernel: Option<String>,
    pub time_kernel: Option<String>,
    pub b1: Option<f64>,
    pub b2: Option<f64>,
    pub weights: Option<Vec<f64>>,
    pub p_model: Option<usize>,
    pub demean: Option<bool>,
    pub output: Option<PathBuf>,
    pub format: Option<Format>,
    pub diagnostics: Option<PathBuf>,
    pub model: Option<String>,
    #[serde(rename = "T")]
    pub nobs: Option<usize>,
    #[serde(rename = "R")]
    pub replications: Option<usize>,
    pub seed: Option<u64>,
    pub workers: Option<usize>,
    pub deltas: Option<Vec<f64>>,
    pub estimators: Option<Vec<String>>,
    pub out_dir: Option<PathBuf>,
    pub stem: Option<String>,
    pub tables: Option<Vec<String>>,
    #[serde(rename = "T_subset")]
    pub nobs_subset: Option<Vec<usize>>,
    pub cache: Option<PathBuf>,
    pub grid: Option<usize>,
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::usage(format!("cannot read config {}: {e}", path.display())))?;
        toml::from_str(&text).map_err(|e| CliError::usage(format!("config {}: {e}", path.display())))
    }

    fn from_option(path: Option<&Path>) -> Result<Self, CliError> {
        path.map_or(Ok(Self::default()), Self::load)
    }
}

/// A failure with its exit code.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CliError {
    pub code: i32,
    pub message: String,
}

impl CliError {
    fn usage(message: impl Into<String>) -> Self {
        Self { code: EXIT_USAGE, message: message.into() }
    }

    fn estimation(stage: &str, err: impl std::fmt::Display) -> Self {
        Self { code: EXIT_ESTIMATION, message: format!("{stage} failed: {err}") }
    }

    fn cache(err: impl std::fmt::Display) -> Self {
        Self { code: EXIT_CACHE, message: format!("fixed-b cache: {err}") }
    }
}

/// Report written by `estimate`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EstimateReport {
    pub input: PathBuf,
    pub columns: Vec<String>,
    pub nobs: usize,
    pub demeaned: bool,
    pub estimate: LrvEstimate,
}

/// Parse arguments and run; returns the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = e.exit_code();
            let _ = e.print();
            return code;
        }
    };
    match dispatch(cli.command) {
        Ok(()) => EXIT_OK,
        Err(e) => {
            eprintln!("error: {}", e.message);
            e.code
        }
    }
}

fn dispatch(command: Command) -> Result<(), CliError> {
    match command {
        Command::Estimate(a) => estimate(a),
        Command::Simulate(a) => simulate(a),
        Command::Tables(a) => tables(a),
        Command::FixedbCache(a) => fixedb_cache(a),
    }
}

fn default_workers() -> usize {
    std::thread::available_parallelism().map_or(1, |n| n.get())
}

fn parse_estimators(labels: &[String]) -> Result<Vec<LrvMethod>, CliError> {
    let methods = labels
        .iter()
        .filter(|s| !s.trim().is_empty())
        .map(|s| s.parse::<LrvMethod>().map_err(|e| CliError::usage(e.to_string())))
        .collect::<Result<Vec<_>, _>>()?;
    if methods.is_empty() {
        return Err(CliError::usage("empty estimator selection"));
    }
    Ok(methods)
}

/// Read a numeric CSV with a header row.
pub fn read_series_csv(path: &Path) -> Result<(Vec<String>, SeriesMatrix), CliError> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::All)
        .from_path(path)
        .map_err(|e| CliError::usage(format!("cannot read {}: {e}", path.display())))?;
    let headers: Vec<String> = reader
        .headers()
        .map_err(|e| CliError::usage(format!("malformed CSV header: {e}")))?
        .iter()
        .map(str::to_string)
        .collect();
    if headers.is_empty() || headers.iter().all(String::is_empty) {
        return Err(CliError::usage("CSV has no columns"));
    }
    let mut data = Vec::new();
    let mut rows = 0;
    for (i, record) in reader.records().enumerate() {
        let record = record.map_err(|e| CliError::usage(format!("malformed CSV: {e}")))?;
        if record.len() != headers.len() {
            return Err(CliError::usage(format!("row {} has {} fields, expected {}", i + 2, record.len(), headers.len())));
        }
        for field in &record {
            let v: f64 = field
                .parse()
                .map_err(|_| CliError::usage(format!("row {}: `{field}` is not a number", i + 2)))?;
            if !v.is_finite() {
                return Err(CliError::usage(format!("row {}: non-finite value", i + 2)));
            }
            data.push(v);
        }
        rows += 1;
    }
    if rows < MIN_INPUT_ROWS {
        return Err(CliError::usage(format!("need at least {MIN_INPUT_ROWS} rows, got {rows}")));
    }
    let m = SeriesMatrix::from_row_major(rows, headers.len(), data).map_err(|e| CliError::usage(e.to_string()))?;
    Ok((headers, m))
}

fn estimate_method(a: &EstimateArgs, cfg: &RunConfig) -> Result<LrvMethod, CliError> {
    let name = a.estimator.clone().or(cfg.estimator.clone()).unwrap_or_else(|| "dk_hac".into());
    let method: LrvMethod = name.parse().map_err(|e: crate::Error| CliError::usage(e.to_string()))?;
    let lag_kernel: LagKernel = a
        .lag_kernel
        .clone()
        .or(cfg.lag_kernel.clone())
        .map_or(Ok(LagKernel::QuadraticSpectral), |s| s.parse())
        .map_err(|e: crate::Error| CliError::usage(e.to_string()))?;
    let time_kernel: TimeKernel = a
        .time_kernel
        .clone()
        .or(cfg.time_kernel.clone())
        .map_or(Ok(TimeKernel::EpanechnikovOpt), |s| s.parse())
        .map_err(|e: crate::Error| CliError::usage(e.to_string()))?;
    let b1 = a.b1.or(cfg.b1);
    let b2 = a.b2.or(cfg.b2);
    for (name, b) in [("b1", b1), ("b2", b2)] {
        if let Some(b) = b {
            if !(b > 0.0 && b <= 1.0) {
                return Err(CliError::usage(format!("--{name} must lie in (0, 1], got {b}")));
            }
        }
    }
    match (method, b1, b2) {
        (LrvMethod::DkHacAuto { .. }, None, None) => Ok(LrvMethod::DkHacAuto { lag_kernel, time_kernel }),
        (LrvMethod::DkHacAuto { .. }, Some(b1), Some(b2)) => {
            Ok(LrvMethod::DkHacFixed { lag_kernel, time_kernel, b1, b2 })
        }
        (LrvMethod::DkHacAuto { .. }, _, _) => Err(CliError::usage("--b1 and --b2 must be given together")),
        (_, None, None) => Ok(method),
        _ => Err(CliError::usage("bandwidth overrides apply to dk_hac only")),
    }
}

fn estimate(a: EstimateArgs) -> Result<(), CliError> {
    let cfg = RunConfig::from_option(a.config.as_deref())?;
    let input = a.input.clone().or(cfg.input.clone()).ok_or_else(|| CliError::usage("missing input CSV"))?;
    let method = estimate_method(&a, &cfg)?;
    let (columns, mut v) = read_series_csv(&input)?;
    let demean = a.demean || cfg.demean.unwrap_or(false);
    if demean {
        v = v.demeaned();
    }
    let weights = a.weights.clone().or(cfg.weights.clone());
    if let Some(w) = &weights {
        if w.len() != v.dim() {
            return Err(CliError::usage(format!("{} weights for {} columns", w.len(), v.dim())));
        }
    }
    let p_model = a.p_model.or(cfg.p_model).unwrap_or(0);
    let est = method
        .estimate(&v, weights.as_deref(), p_model > 0, p_model)
        .map_err(|e| CliError::estimation(&format!("{} estimation", method.label()), e))?;
    let report = EstimateReport { input: input.clone(), columns, nobs: v.nobs(), demeaned: demean, estimate: est };
    let format = a.format.or(cfg.format).unwrap_or(Format::Json);
    let text = match format {
        Format::Json => serde_json::to_string_pretty(&report).map_err(|e| CliError::estimation("serialization", e))? + "\n",
        Format::Csv => matrix_csv(&report.columns, &report.estimate)?,
    };
    if let Some(path) = a.diagnostics.clone().or(cfg.diagnostics.clone()) {
        let diag: Option<&PlugInDiagnostics> = match &report.estimate.provenance {
            Provenance::DoubleKernel { diagnostics, .. } => diagnostics.as_ref(),
            _ => None,
        };
        let text = serde_json::to_string_pretty(&diag).map_err(|e| CliError::estimation("serialization", e))? + "\n";
        std::fs::write(&path, text).map_err(|e| CliError::estimation("writing diagnostics", e))?;
    }
    if a.stdout {
        print!("{text}");
        return Ok(());
    }
    let out = a.output.clone().or(cfg.output.clone()).unwrap_or_else(|| {
        let suffix = match format {
            Format::Json => "lrv.json",
            Format::Csv => "lrv.csv",
        };
        input.with_extension(suffix)
    });
    std::fs::write(&out, text).map_err(|e| CliError::estimation("writing output", e))?;
    eprintln!("wrote {}", out.display());
    Ok(())
}

fn matrix_csv(columns: &[String], est: &LrvEstimate) -> Result<String, CliError> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let err = |e: csv::Error| CliError::estimation("writing CSV", e);
    w.write_record(columns).map_err(err)?;
    for i in 0..est.j.nrows() {
        w.write_record((0..est.j.ncols()).map(|k| format!("{:e}", est.j[(i, k)]))).map_err(err)?;
    }
    let bytes = w.into_inner().map_err(|e| CliError::estimation("writing CSV", e))?;
    String::from_utf8(bytes).map_err(|e| CliError::estimation("writing CSV", e))
}

fn simulate(a: SimulateArgs) -> Result<(), CliError> {
    let cfg = RunConfig::from_option(a.config.as_deref())?;
    let model: ModelId = a
        .model
        .clone()
        .or(cfg.model.clone())
        .ok_or_else(|| CliError::usage("missing --model"))?
        .parse()
        .map_err(|e: crate::Error| CliError::usage(e.to_string()))?;
    let nobs = a.nobs.or(cfg.nobs).unwrap_or(200);
    let replications = a.replications.or(cfg.replications).unwrap_or(5000);
    let seed = a.seed.or(cfg.seed).unwrap_or(1);
    let deltas = a.deltas.clone().or(cfg.deltas.clone()).unwrap_or_else(|| vec![0.0]);
    let mut ecfg = ExperimentConfig::new(model, nobs, deltas, replications, seed);
    if let Some(labels) = a.estimators.clone().or(cfg.estimators.clone()) {
        ecfg.estimators = parse_estimators(&labels)?;
    }
    ecfg.workers = a.workers.or(cfg.workers).unwrap_or_else(default_workers);
    let table = FixedBCriticalValues::embedded();
    eprintln!("simulating {model}, T = {nobs}, R = {replications}, seed = {seed}");
    let report = run_experiment(&ecfg, &table).map_err(|e| match e {
        crate::Error::InvalidInput(_) => CliError::usage(e.to_string()),
        other => CliError::estimation("experiment", other),
    })?;
    if a.stdout {
        print!("{}", report.to_csv().map_err(|e| CliError::estimation("writing CSV", e))?);
        return Ok(());
    }
    let dir = a.out_dir.clone().or(cfg.out_dir.clone()).unwrap_or_else(|| PathBuf::from("."));
    let stem = a.stem.clone().or(cfg.stem.clone()).unwrap_or_else(|| format!("{model}_T{nobs}"));
    report.write(&dir, &stem).map_err(|e| CliError::estimation("writing report", e))?;
    eprintln!("wrote {}/{stem}.csv and .json ({:.1}s)", dir.display(), report.wall_clock_secs);
    Ok(())
}

fn tables(a: TablesArgs) -> Result<(), CliError> {
    let cfg = RunConfig::from_option(a.config.as_deref())?;
    let labels = a
        .estimators
        .clone()
        .or(cfg.estimators.clone())
        .unwrap_or_else(|| crate::montecarlo::default_estimators().iter().map(LrvMethod::label).collect());
    let estimators = parse_estimators(&labels)?;
    let table = match a.cache.clone().or(cfg.cache.clone()) {
        Some(path) => FixedBCriticalValues::load_or_simulate(&path, DEFAULT_GRID, DEFAULT_REPLICATIONS, DEFAULT_SEED)
            .map_err(CliError::cache)?,
        None => FixedBCriticalValues::embedded(),
    };
    let opts = TablesOptions {
        out_dir: a.out_dir.clone().or(cfg.out_dir.clone()).unwrap_or_else(|| PathBuf::from("tables")),
        replications: a.replications.or(cfg.replications).unwrap_or(5000),
        seed: a.seed.or(cfg.seed).unwrap_or(1),
        workers: a.workers.or(cfg.workers).unwrap_or_else(default_workers),
        estimators,
        nobs: a.nobs.clone().or(cfg.nobs_subset.clone()),
        tables: a.tables.clone().or(cfg.tables.clone()),
    };
    let summary = run_tables(&opts, &table, |label, reused| {
        eprintln!("{} {label}", if reused { "reusing" } else { "running" });
    })
    .map_err(|e| match e {
        crate::Error::InvalidInput(_) => CliError::usage(e.to_string()),
        other => CliError::estimation("table regeneration", other),
    })?;
    let flagged: usize = summary.tables.iter().map(|t| t.flagged).sum();
    eprintln!(
        "wrote {} tables to {}; {flagged} cells differ from the reference by more than 3 standard errors",
        summary.tables.len(),
        opts.out_dir.display()
    );
    Ok(())
}

fn fixedb_cache(a: CacheArgs) -> Result<(), CliError> {
    let cfg = RunConfig::from_option(a.config.as_deref())?;
    let path = a
        .cache
        .clone()
        .or(cfg.cache.clone())
        .ok_or_else(|| CliError::usage("missing --cache path"))?;
    let table = if a.check {
        FixedBCriticalValues::load(&path).map_err(CliError::cache)?
    } else {
        let grid = a.grid.or(cfg.grid).unwrap_or(DEFAULT_GRID);
        let reps = a.replications.or(cfg.replications).unwrap_or(DEFAULT_REPLICATIONS);
        let seed = a.seed.or(cfg.seed).unwrap_or(DEFAULT_SEED);
        let workers = a.workers.or(cfg.workers).unwrap_or_else(default_workers);
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(workers.max(1))
            .build()
            .map_err(CliError::cache)?;
        pool.install(|| {
            if a.force {
                let t = FixedBCriticalValues::simulate(grid, reps, seed)?;
                t.save(&path)?;
                Ok(t)
            } else {
                FixedBCriticalValues::load_or_simulate(&path, grid, reps, seed)
            }
        })
        .map_err(CliError::cache)?
    };
    for (l, q) in table.levels.iter().zip(&table.quantiles) {
        eprintln!("level {l:.2}: {q:.4}");
    }
    Ok(())
}
