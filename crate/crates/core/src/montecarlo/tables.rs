//! Regeneration of the published size and power tables.
//!
//! Reference rejection rates are embedded as data, keyed by table label, and
//! are used only to annotate the regenerated cells. A table whose JSON file
//! already exists with an identical configuration is reused, so an
//! interrupted run resumes to the same bundle.

use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use super::dgp::ModelId;
use super::experiment::{run_experiment, ExperimentConfig};
use crate::baselines::FixedBCriticalValues;
use crate::error::{Error, Result};
use crate::hartests::LrvMethod;

static REFERENCE: &str = include_str!("../../data/reference_tables.json");

/// Cells whose distance to the reference exceeds this many standard errors are flagged.
pub const FLAG_SE_MULTIPLE: f64 = 3.0;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ColumnSpec {
    pub model: ModelId,
    pub nobs: usize,
    pub delta: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TableSpec {
    pub label: String,
    pub stem: String,
    pub title: String,
    pub columns: Vec<ColumnSpec>,
    /// Published rejection rates per estimator label, aligned with `columns`.
    pub reference: BTreeMap<String, Vec<f64>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
struct ReferenceFile {
    version: u32,
    tables: Vec<TableSpec>,
}

/// The embedded table layouts with their reference values.
pub fn reference_tables() -> Vec<TableSpec> {
    let file: ReferenceFile = serde_json::from_str(REFERENCE).expect("embedded reference tables are valid");
    file.tables
}

#[derive(Debug, Clone, PartialEq)]
pub struct TablesOptions {
    pub out_dir: PathBuf,
    pub replications: usize,
    pub seed: u64,
    pub workers: usize,
    pub estimators: Vec<LrvMethod>,
    /// Keep only columns with these sample sizes.
    pub nobs: Option<Vec<usize>>,
    /// Keep only tables with these labels or stems.
    pub tables: Option<Vec<String>>,
}

/// Everything that determines a table's numbers.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TableRunConfig {
    pub replications: usize,
    pub seed: u64,
    pub alpha: f64,
    pub estimators: Vec<LrvMethod>,
    pub columns: Vec<ColumnSpec>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TableCell {
    pub model: ModelId,
    pub nobs: usize,
    pub test_len: usize,
    pub delta: f64,
    pub estimator: String,
    pub rate: f64,
    pub mc_se: f64,
    pub rejections: usize,
    pub valid: usize,
    pub failures: usize,
    pub reference: Option<f64>,
    pub abs_diff: Option<f64>,
    /// Standard error used for flagging.
    pub flag_se: Option<f64>,
    pub flagged: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TableResult {
    pub label: String,
    pub stem: String,
    pub title: String,
    pub config: TableRunConfig,
    pub cells: Vec<TableCell>,
}

impl TableResult {
    pub fn to_csv(&self) -> Result<String> {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record([
            "table", "model", "T", "T_test", "delta", "estimator", "rate", "mc_se", "reference", "abs_diff", "flagged",
        ])
        .map_err(csv_err)?;
        let opt = |v: Option<f64>| v.map(|x| format!("{x:.6}")).unwrap_or_default();
        for c in &self.cells {
            w.write_record([
                self.label.clone(),
                c.model.to_string(),
                c.nobs.to_string(),
                c.test_len.to_string(),
                c.delta.to_string(),
                c.estimator.clone(),
                format!("{:.6}", c.rate),
                format!("{:.6}", c.mc_se),
                opt(c.reference),
                opt(c.abs_diff),
                c.flagged.to_string(),
            ])
            .map_err(csv_err)?;
        }
        let bytes = w.into_inner().map_err(|e| Error::Io(e.to_string()))?;
        String::from_utf8(bytes).map_err(|e| Error::Io(e.to_string()))
    }
}

fn csv_err(e: csv::Error) -> Error {
    Error::Io(e.to_string())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TableSummary {
    pub label: String,
    pub stem: String,
    pub cells: usize,
    pub compared: usize,
    pub flagged: usize,
    pub max_abs_diff: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TablesSummary {
    pub replications: usize,
    pub seed: u64,
    pub flag_rule: String,
    pub tables: Vec<TableSummary>,
    /// Every flagged cell, tagged with its table label.
    pub flagged_cells: Vec<(String, TableCell)>,
}

/// Flag when `|rate − ref| > 3·se` with `se` the larger of the cell's MC-SE
/// and the binomial SE at the reference rate, so cells at 0 or 1 still get
/// a nonzero allowance when the reference is interior.
fn flag(rate: f64, mc_se: f64, valid: usize, reference: f64) -> (f64, f64, bool) {
    let diff = (rate - reference).abs();
    let ref_se = if valid > 0 { (reference * (1.0 - reference) / valid as f64).sqrt() } else { f64::NAN };
    let se = mc_se.max(ref_se);
    (diff, se, !(diff <= FLAG_SE_MULTIPLE * se))
}

/// Regenerate one table.
pub fn run_table(
    spec: &TableSpec,
    config: &TableRunConfig,
    workers: usize,
    table: &FixedBCriticalValues,
) -> Result<TableResult> {
    let mut cells = Vec::new();
    // One experiment per (model, T); columns sharing it differ only in δ.
    let mut groups: Vec<(ModelId, usize, Vec<f64>)> = Vec::new();
    for c in &config.columns {
        match groups.iter_mut().find(|g| g.0 == c.model && g.1 == c.nobs) {
            Some(g) => g.2.push(c.delta),
            None => groups.push((c.model, c.nobs, vec![c.delta])),
        }
    }
    let mut reports = Vec::new();
    for (model, nobs, deltas) in groups {
        let mut cfg = ExperimentConfig::new(model, nobs, deltas, config.replications, config.seed);
        cfg.estimators = config.estimators.clone();
        cfg.alpha = config.alpha;
        cfg.workers = workers;
        reports.push(run_experiment(&cfg, table)?);
    }
    for c in &config.columns {
        let report = reports
            .iter()
            .find(|r| r.model == c.model && r.nobs == c.nobs)
            .expect("every column has a report");
        let col_index = spec.columns.iter().position(|s| s == c);
        for method in &config.estimators {
            let label = method.label();
            let cell = report.cell(c.delta, &label).expect("every estimator has a cell");
            let reference = col_index.and_then(|i| spec.reference.get(&label).map(|v| v[i]));
            let (abs_diff, flag_se, flagged) = match reference {
                Some(r) => {
                    let (d, se, f) = flag(cell.rate, cell.mc_se, cell.valid, r);
                    (Some(d), Some(se), f)
                }
                None => (None, None, false),
            };
            cells.push(TableCell {
                model: c.model,
                nobs: c.nobs,
                test_len: report.test_len,
                delta: c.delta,
                estimator: label,
                rate: cell.rate,
                mc_se: cell.mc_se,
                rejections: cell.rejections,
                valid: cell.valid,
                failures: cell.failures,
                reference,
                abs_diff,
                flag_se,
                flagged,
            });
        }
    }
    Ok(TableResult {
        label: spec.label.clone(),
        stem: spec.stem.clone(),
        title: spec.title.clone(),
        config: config.clone(),
        cells,
    })
}

fn selected(spec: &TableSpec, opts: &TablesOptions) -> bool {
    opts.tables
        .as_ref()
        .is_none_or(|names| names.iter().any(|n| n.eq_ignore_ascii_case(&spec.label) || n.eq_ignore_ascii_case(&spec.stem)))
}

fn load_existing(path: &Path, config: &TableRunConfig) -> Option<TableResult> {
    let text = std::fs::read_to_string(path).ok()?;
    let result: TableResult = serde_json::from_str(&text).ok()?;
    (result.config == *config).then_some(result)
}

/// Regenerate the selected tables into `opts.out_dir`: `<stem>.csv` and
/// `<stem>.json` per table plus `summary.json`. `progress` receives the
/// label of each table as it starts and whether it was reused.
pub fn run_tables(
    opts: &TablesOptions,
    table: &FixedBCriticalValues,
    mut progress: impl FnMut(&str, bool),
) -> Result<TablesSummary> {
    if opts.estimators.is_empty() {
        return Err(Error::InvalidInput("empty estimator selection".into()));
    }
    let specs: Vec<TableSpec> = reference_tables().into_iter().filter(|s| selected(s, opts)).collect();
    if specs.is_empty() {
        return Err(Error::InvalidInput("no table matches the selection".into()));
    }
    std::fs::create_dir_all(&opts.out_dir)?;
    let mut summaries = Vec::new();
    let mut flagged_cells = Vec::new();
    for spec in &specs {
        let columns: Vec<ColumnSpec> = spec
            .columns
            .iter()
            .filter(|c| opts.nobs.as_ref().is_none_or(|ns| ns.contains(&c.nobs)))
            .cloned()
            .collect();
        if columns.is_empty() {
            continue;
        }
        let config = TableRunConfig {
            replications: opts.replications,
            seed: opts.seed,
            alpha: 0.05,
            estimators: opts.estimators.clone(),
            columns,
        };
        let json_path = opts.out_dir.join(format!("{}.json", spec.stem));
        let result = match load_existing(&json_path, &config) {
            Some(r) => {
                progress(&spec.label, true);
                r
            }
            None => {
                progress(&spec.label, false);
                let r = run_table(spec, &config, opts.workers, table)?;
                std::fs::write(opts.out_dir.join(format!("{}.csv", spec.stem)), r.to_csv()?)?;
                // JSON last: its presence marks the table as complete.
                std::fs::write(&json_path, serde_json::to_string_pretty(&r)? + "\n")?;
                r
            }
        };
        let compared: Vec<&TableCell> = result.cells.iter().filter(|c| c.reference.is_some()).collect();
        summaries.push(TableSummary {
            label: result.label.clone(),
            stem: result.stem.clone(),
            cells: result.cells.len(),
            compared: compared.len(),
            flagged: compared.iter().filter(|c| c.flagged).count(),
            max_abs_diff: compared.iter().filter_map(|c| c.abs_diff).reduce(f64::max),
        });
        flagged_cells.extend(result.cells.iter().filter(|c| c.flagged).map(|c| (result.label.clone(), c.clone())));
    }
    let summary = TablesSummary {
        replications: opts.replications,
        seed: opts.seed,
        flag_rule: format!(
            "|rate - reference| > {FLAG_SE_MULTIPLE} * max(mc_se, sqrt(reference*(1-reference)/valid))"
        ),
        tables: summaries,
        flagged_cells,
    };
    std::fs::write(opts.out_dir.join("summary.json"), serde_json::to_string_pretty(&summary)? + "\n")?;
    Ok(summary)
}
