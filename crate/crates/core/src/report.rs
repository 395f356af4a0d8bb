//! Experiment runner: sweeps algorithms, skews, utilizations and seeds,
//! simulates every combination and aggregates job completion times.
//!
//! Outputs are a per-job CSV and a JSON summary. Each
//! (algorithm, alpha, utilization) triple is summarized over all of its
//! seeds. Cells run one after another so that overhead timings do not
//! compete for cores.

use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::model::{JobId, Slot};
use crate::sim::{run, Algorithm, JctRecord, SimConfig, SimError};
use crate::workload::{
    build_workload, parse_trace, ColumnMap, PermutationScope, SyntheticSpec, UnplacedJob,
    WorkloadConfig, WorkloadError,
};

pub const JOBS_CSV: &str = "jobs.csv";
pub const SUMMARY_JSON: &str = "summary.json";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum WorkloadSource {
    /// Fresh synthetic jobs for every seed.
    Synthetic(SyntheticSpec),
    /// One trace replayed under every seed; `limit` keeps the first jobs.
    Trace {
        path: PathBuf,
        columns: ColumnMap,
        limit: Option<usize>,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub algorithms: Vec<Algorithm>,
    pub servers: usize,
    pub alphas: Vec<f64>,
    pub utilizations: Vec<f64>,
    pub p_min: usize,
    pub p_max: usize,
    pub mu_min: u32,
    pub mu_max: u32,
    pub seeds: Vec<u64>,
    pub scope: PermutationScope,
    pub source: WorkloadSource,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        let w = WorkloadConfig::default();
        ExperimentConfig {
            algorithms: vec![Algorithm::Wf],
            servers: w.servers,
            alphas: vec![w.alpha],
            utilizations: vec![w.utilization],
            p_min: w.p_min,
            p_max: w.p_max,
            mu_min: w.mu_min,
            mu_max: w.mu_max,
            seeds: vec![0],
            scope: w.scope,
            source: WorkloadSource::Synthetic(SyntheticSpec::default()),
        }
    }
}

impl ExperimentConfig {
    pub fn cells(&self) -> Vec<Cell> {
        let mut cells = Vec::new();
        for &algorithm in &self.algorithms {
            for &alpha in &self.alphas {
                for &utilization in &self.utilizations {
                    for &seed in &self.seeds {
                        cells.push(Cell {
                            algorithm,
                            alpha,
                            utilization,
                            seed,
                        });
                    }
                }
            }
        }
        cells
    }

    pub fn workload(&self, cell: &Cell) -> WorkloadConfig {
        WorkloadConfig {
            servers: self.servers,
            alpha: cell.alpha,
            utilization: cell.utilization,
            p_min: self.p_min,
            p_max: self.p_max,
            mu_min: self.mu_min,
            mu_max: self.mu_max,
            scope: self.scope,
            seed: cell.seed,
        }
    }

    pub fn validate(&self) -> Result<(), ReportError> {
        let missing = |what: &str| {
            Err(ReportError::Config(format!(
                "invalid configuration: at least one {what} is required"
            )))
        };
        if self.algorithms.is_empty() {
            return missing("algorithm");
        }
        if self.alphas.is_empty() {
            return missing("alpha");
        }
        if self.utilizations.is_empty() {
            return missing("utilization");
        }
        if self.seeds.is_empty() {
            return missing("seed");
        }
        for cell in self.cells() {
            self.workload(&cell)
                .validate()
                .map_err(|e| ReportError::Config(e.to_string()))?;
        }
        if let WorkloadSource::Synthetic(spec) = &self.source {
            spec.validate()
                .map_err(|e| ReportError::Config(e.to_string()))?;
        }
        Ok(())
    }
}

/// One simulation: an algorithm on the workload of one skew, utilization
/// and seed.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Cell {
    pub algorithm: Algorithm,
    pub alpha: f64,
    pub utilization: f64,
    pub seed: u64,
}

impl fmt::Display for Cell {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{} alpha={} util={} seed={}",
            self.algorithm, self.alpha, self.utilization, self.seed
        )
    }
}

#[derive(Debug, Error)]
pub enum CellFailure {
    #[error(transparent)]
    Workload(#[from] WorkloadError),
    #[error(transparent)]
    Sim(#[from] SimError),
}

#[derive(Debug, Error)]
pub enum ReportError {
    #[error("{0}")]
    Config(String),
    #[error("cannot load workload: {0}")]
    Load(#[source] WorkloadError),
    #[error("cell {cell}: {source}")]
    Cell {
        cell: Cell,
        #[source]
        source: CellFailure,
    },
    #[error("cannot compute a CDF of no values")]
    EmptyInput,
    #[error("cannot write {path}: {source}")]
    Write {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("CSV output: {0}")]
    Csv(#[from] csv::Error),
    #[error("JSON output: {0}")]
    Json(#[from] serde_json::Error),
}

impl ReportError {
    /// Whether the error comes from the configuration rather than from
    /// running it.
    pub fn is_config(&self) -> bool {
        matches!(self, ReportError::Config(_))
    }
}

/// One row of the per-job CSV.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct JobRow {
    pub job_id: JobId,
    pub algorithm: Algorithm,
    pub alpha: f64,
    pub utilization: f64,
    pub seed: u64,
    pub arrival_slot: Slot,
    pub completion_slot: Slot,
    pub jct_slots: Slot,
    pub decision_overhead_us: f64,
}

impl JobRow {
    fn new(cell: &Cell, record: &JctRecord) -> Self {
        JobRow {
            job_id: record.job,
            algorithm: cell.algorithm,
            alpha: cell.alpha,
            utilization: cell.utilization,
            seed: cell.seed,
            arrival_slot: record.arrival,
            completion_slot: record.completion,
            jct_slots: record.jct,
            decision_overhead_us: record.decision_overhead_us,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CdfPoint {
    pub jct: Slot,
    pub fraction: f64,
}

/// Aggregates for one (algorithm, alpha, utilization) over all seeds.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CellSummary {
    pub algorithm: Algorithm,
    pub alpha: f64,
    pub utilization: f64,
    pub seeds: Vec<u64>,
    pub jobs: usize,
    pub average_jct: f64,
    pub p50_jct: Slot,
    pub p90_jct: Slot,
    pub p99_jct: Slot,
    pub cdf: Vec<CdfPoint>,
    pub mean_overhead_us: f64,
    pub total_overhead_us: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub cells: Vec<CellSummary>,
}

impl Summary {
    pub fn find(&self, algorithm: Algorithm, alpha: f64, utilization: f64) -> Option<&CellSummary> {
        self.cells
            .iter()
            .find(|c| c.algorithm == algorithm && c.alpha == alpha && c.utilization == utilization)
    }
}

/// Empirical CDF at the sorted distinct values. The last fraction is
/// exactly 1.
pub fn cdf(values: &[Slot]) -> Result<Vec<(Slot, f64)>, ReportError> {
    if values.is_empty() {
        return Err(ReportError::EmptyInput);
    }
    let mut sorted = values.to_vec();
    sorted.sort_unstable();
    let n = sorted.len();
    let mut points = Vec::new();
    for (i, &v) in sorted.iter().enumerate() {
        if sorted.get(i + 1) != Some(&v) {
            let fraction = if i + 1 == n {
                1.0
            } else {
                (i + 1) as f64 / n as f64
            };
            points.push((v, fraction));
        }
    }
    Ok(points)
}

/// Nearest-rank percentile of sorted values, `q` in (0, 100].
pub fn percentile(sorted: &[Slot], q: f64) -> Option<Slot> {
    if sorted.is_empty() || !(q > 0.0 && q <= 100.0) {
        return None;
    }
    let rank = ((q / 100.0) * sorted.len() as f64).ceil() as usize;
    Some(sorted[rank.clamp(1, sorted.len()) - 1])
}

/// Summarizes rows, grouped by (algorithm, alpha, utilization) in order of
/// first appearance.
pub fn summarize(rows: &[JobRow]) -> Result<Summary, ReportError> {
    let mut keys: Vec<(Algorithm, f64, f64)> = Vec::new();
    for r in rows {
        let key = (r.algorithm, r.alpha, r.utilization);
        if !keys.contains(&key) {
            keys.push(key);
        }
    }
    let cells = keys
        .into_iter()
        .map(|(algorithm, alpha, utilization)| {
            let mine: Vec<&JobRow> = rows
                .iter()
                .filter(|r| {
                    r.algorithm == algorithm && r.alpha == alpha && r.utilization == utilization
                })
                .collect();
            let mut seeds: Vec<u64> = mine.iter().map(|r| r.seed).collect();
            seeds.sort_unstable();
            seeds.dedup();
            let mut jcts: Vec<Slot> = mine.iter().map(|r| r.jct_slots).collect();
            jcts.sort_unstable();
            let n = jcts.len();
            let total_overhead_us: f64 = mine.iter().map(|r| r.decision_overhead_us).sum();
            Ok(CellSummary {
                algorithm,
                alpha,
                utilization,
                seeds,
                jobs: n,
                average_jct: jcts.iter().sum::<Slot>() as f64 / n as f64,
                p50_jct: percentile(&jcts, 50.0).unwrap_or(0),
                p90_jct: percentile(&jcts, 90.0).unwrap_or(0),
                p99_jct: percentile(&jcts, 99.0).unwrap_or(0),
                cdf: cdf(&jcts)?
                    .into_iter()
                    .map(|(jct, fraction)| CdfPoint { jct, fraction })
                    .collect(),
                mean_overhead_us: total_overhead_us / n as f64,
                total_overhead_us,
            })
        })
        .collect::<Result<_, ReportError>>()?;
    Ok(Summary { cells })
}

/// Jobs of one seed before placement.
fn unplaced(
    cfg: &ExperimentConfig,
    trace: Option<&[UnplacedJob]>,
    seed: u64,
) -> Result<Vec<UnplacedJob>, WorkloadError> {
    match (&cfg.source, trace) {
        (_, Some(jobs)) => Ok(jobs.to_vec()),
        (WorkloadSource::Synthetic(spec), None) => spec.generate(seed),
        (WorkloadSource::Trace { .. }, None) => unreachable!("trace is loaded up front"),
    }
}

/// Runs every cell and returns the per-job rows in cell order.
pub fn run_cells(cfg: &ExperimentConfig) -> Result<Vec<JobRow>, ReportError> {
    cfg.validate()?;
    let trace = match &cfg.source {
        WorkloadSource::Trace {
            path,
            columns,
            limit,
        } => Some(
            parse_trace(path, *columns, *limit)
                .map_err(ReportError::Load)?
                .jobs,
        ),
        WorkloadSource::Synthetic(_) => None,
    };
    let mut rows = Vec::new();
    for cell in cfg.cells() {
        let fail = |source: CellFailure| ReportError::Cell { cell, source };
        let jobs = unplaced(cfg, trace.as_deref(), cell.seed).map_err(|e| fail(e.into()))?;
        let (jobs, capacity) =
            build_workload(&jobs, &cfg.workload(&cell)).map_err(|e| fail(e.into()))?;
        let records = run(
            &SimConfig {
                algorithm: cell.algorithm,
                seed: cell.seed,
            },
            &jobs,
            &capacity,
        )
        .map_err(|e| fail(e.into()))?;
        rows.extend(records.iter().map(|r| JobRow::new(&cell, r)));
    }
    Ok(rows)
}

/// Runs the experiment and writes [`JOBS_CSV`] and [`SUMMARY_JSON`] into
/// `out_dir`, creating it if needed.
pub fn run_experiment(cfg: &ExperimentConfig, out_dir: &Path) -> Result<Summary, ReportError> {
    let rows = run_cells(cfg)?;
    let summary = summarize(&rows)?;
    let write_err = |path: &Path| {
        let path = path.to_path_buf();
        move |source| ReportError::Write { path, source }
    };
    fs::create_dir_all(out_dir).map_err(write_err(out_dir))?;

    let csv_path = out_dir.join(JOBS_CSV);
    let mut writer = csv::Writer::from_path(&csv_path)?;
    for row in &rows {
        writer.serialize(row)?;
    }
    writer.flush().map_err(write_err(&csv_path))?;

    let json_path = out_dir.join(SUMMARY_JSON);
    let json = serde_json::to_string_pretty(&summary)?;
    fs::write(&json_path, json + "\n").map_err(write_err(&json_path))?;
    Ok(summary)
}
