//! Workloads: batch-task trace ingestion, synthetic jobs, arrival scaling to a
//! target utilization, skewed data placement and capacity profiles.

use std::collections::HashMap;
use std::fs::File;
use std::io::Read;
use std::path::Path;

use rand::distributions::{Distribution, WeightedIndex};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Exp, LogNormal};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::model::{CapacityProfile, Job, JobId, ServerId, Slot};

/// A job before its groups are given available servers.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UnplacedJob {
    pub id: JobId,
    /// Job key from the trace, or a generated one.
    pub key: String,
    /// Arrival time in trace seconds.
    pub arrival: f64,
    /// Task count of each group.
    pub groups: Vec<u64>,
}

impl UnplacedJob {
    pub fn total_tasks(&self) -> u64 {
        self.groups.iter().sum()
    }
}

/// Zero-based indices of the columns `parse_trace` reads.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ColumnMap {
    pub timestamp: usize,
    pub job: usize,
    pub instances: usize,
    pub has_header: bool,
}

impl Default for ColumnMap {
    /// Layout of the 2017 batch task table: `create_timestamp`,
    /// `modify_timestamp`, `job_id`, `task_id`, `instance_num`, ...
    fn default() -> Self {
        ColumnMap {
            timestamp: 0,
            job: 2,
            instances: 4,
            has_header: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RejectedRow {
    /// 1-based line number in the file.
    pub line: u64,
    pub reason: String,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct ParsedTrace {
    pub jobs: Vec<UnplacedJob>,
    pub rejected: Vec<RejectedRow>,
}

#[derive(Debug, Error)]
pub enum WorkloadError {
    #[error("cannot read trace {path}: {source}")]
    Unreadable {
        path: String,
        source: std::io::Error,
    },
    #[error("malformed CSV: {0}")]
    Csv(#[from] csv::Error),
    #[error("cannot scale arrivals: {0}")]
    Scale(String),
    #[error("invalid configuration: {0}")]
    Config(String),
}

/// Reads a trace file; see [`parse_trace_from`].
pub fn parse_trace(
    path: impl AsRef<Path>,
    columns: ColumnMap,
    job_limit: Option<usize>,
) -> Result<ParsedTrace, WorkloadError> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|source| WorkloadError::Unreadable {
        path: path.display().to_string(),
        source,
    })?;
    parse_trace_from(file, columns, job_limit)
}

/// Groups rows by job key in order of first appearance. Every accepted row
/// becomes one task group, and a job arrives with its earliest row. Rows with
/// a missing column, a non-numeric field or zero instances are skipped and
/// reported.
pub fn parse_trace_from(
    input: impl Read,
    columns: ColumnMap,
    job_limit: Option<usize>,
) -> Result<ParsedTrace, WorkloadError> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(columns.has_header)
        .flexible(true)
        .from_reader(input);
    let mut out = ParsedTrace::default();
    let mut index: HashMap<String, usize> = HashMap::new();
    let limit = job_limit.unwrap_or(usize::MAX);

    for record in reader.records() {
        let record = record?;
        let line = record.position().map_or(0, |p| p.line());
        let field = |i: usize, name: &str| {
            record
                .get(i)
                .map(str::trim)
                .filter(|s| !s.is_empty())
                .ok_or_else(|| format!("missing {name} column {i}"))
        };
        let parsed = (|| {
            let ts = field(columns.timestamp, "timestamp")?;
            let ts: f64 = ts
                .parse()
                .ok()
                .filter(|t: &f64| t.is_finite())
                .ok_or_else(|| format!("timestamp `{ts}` is not a number"))?;
            let key = field(columns.job, "job")?.to_string();
            let n = field(columns.instances, "instance count")?;
            let n: u64 = n
                .parse()
                .ok()
                .or_else(|| {
                    n.parse::<f64>()
                        .ok()
                        .filter(|f| f.fract() == 0.0 && *f >= 0.0)
                        .map(|f| f as u64)
                })
                .ok_or_else(|| format!("instance count `{n}` is not a non-negative integer"))?;
            if n == 0 {
                return Err("instance count is zero".to_string());
            }
            Ok((ts, key, n))
        })();
        let (ts, key, n) = match parsed {
            Ok(row) => row,
            Err(reason) => {
                out.rejected.push(RejectedRow { line, reason });
                continue;
            }
        };
        match index.get(&key) {
            Some(&i) => {
                let job = &mut out.jobs[i];
                job.arrival = job.arrival.min(ts);
                job.groups.push(n);
            }
            None if out.jobs.len() < limit => {
                index.insert(key.clone(), out.jobs.len());
                out.jobs.push(UnplacedJob {
                    id: out.jobs.len() as JobId + 1,
                    key,
                    arrival: ts,
                    groups: vec![n],
                });
            }
            None => {}
        }
    }
    out.jobs
        .sort_by(|a, b| a.arrival.total_cmp(&b.arrival).then(a.id.cmp(&b.id)));
    Ok(out)
}

/// Parameters of generated jobs.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SyntheticSpec {
    pub jobs: usize,
    /// Groups per job are uniform in `1..=max_groups`.
    pub max_groups: usize,
    /// Tasks per group are log-normal with this median and log-scale
    /// spread, rounded and clamped to `1..=max_tasks`.
    pub median_tasks: f64,
    pub sigma: f64,
    pub max_tasks: u64,
    /// Mean gap between arrivals before scaling, in seconds.
    pub mean_gap: f64,
}

impl Default for SyntheticSpec {
    fn default() -> Self {
        SyntheticSpec {
            jobs: 100,
            max_groups: 10,
            median_tasks: 11.0,
            sigma: 2.0,
            max_tasks: 20_000,
            mean_gap: 10.0,
        }
    }
}

impl SyntheticSpec {
    pub fn validate(&self) -> Result<(), WorkloadError> {
        let ok = self.jobs >= 1
            && self.max_groups >= 1
            && self.median_tasks >= 1.0
            && self.median_tasks.is_finite()
            && self.sigma >= 0.0
            && self.sigma.is_finite()
            && self.max_tasks >= 1
            && self.mean_gap > 0.0
            && self.mean_gap.is_finite();
        ok.then_some(()).ok_or_else(|| {
            WorkloadError::Config(format!(
                "synthetic workload parameters out of range: {self:?}"
            ))
        })
    }

    pub fn generate(&self, seed: u64) -> Result<Vec<UnplacedJob>, WorkloadError> {
        self.validate()?;
        let mut rng = stream(seed, 1);
        let gaps = Exp::new(1.0 / self.mean_gap).expect("positive rate");
        let sizes = LogNormal::new(self.median_tasks.ln(), self.sigma).expect("finite spread");
        let mut clock = 0.0;
        Ok((0..self.jobs)
            .map(|i| {
                if i > 0 {
                    clock += gaps.sample(&mut rng);
                }
                let groups = rng.gen_range(1..=self.max_groups);
                UnplacedJob {
                    id: i as JobId + 1,
                    key: format!("job-{}", i + 1),
                    arrival: clock,
                    groups: (0..groups)
                        .map(|_| (sizes.sample(&mut rng).round() as u64).clamp(1, self.max_tasks))
                        .collect(),
                }
            })
            .collect())
    }
}

/// Work of a job in server-slots at the mean rate.
fn work_slots(job: &UnplacedJob, mean_mu: f64) -> f64 {
    (job.total_tasks() as f64 / mean_mu).ceil()
}

/// Rescales inter-arrival gaps by one factor so that total work over the
/// arrival horizon matches `target` utilization of `servers` servers, then
/// rounds arrivals down to whole slots measured from the first arrival.
pub fn scale_to_utilization(
    jobs: &[UnplacedJob],
    target: f64,
    servers: usize,
    mean_mu: f64,
) -> Result<Vec<(UnplacedJob, Slot)>, WorkloadError> {
    if !(target > 0.0 && target <= 1.0) {
        return Err(WorkloadError::Scale(format!(
            "utilization {target} is outside (0, 1]"
        )));
    }
    if jobs.is_empty() {
        return Err(WorkloadError::Scale("no jobs to scale".into()));
    }
    if servers == 0 || !(mean_mu > 0.0) {
        return Err(WorkloadError::Scale("need servers and a positive rate".into()));
    }
    let first = jobs.iter().map(|j| j.arrival).fold(f64::INFINITY, f64::min);
    let last = jobs.iter().map(|j| j.arrival).fold(f64::NEG_INFINITY, f64::max);
    let span = last - first;
    // Simultaneous arrivals have no gaps to stretch.
    if span <= 0.0 {
        return Ok(jobs.iter().map(|j| (j.clone(), 0)).collect());
    }
    let work: f64 = jobs.iter().map(|j| work_slots(j, mean_mu)).sum();
    let horizon = work / (servers as f64 * target);
    let factor = horizon / span;
    Ok(jobs
        .iter()
        .map(|j| (j.clone(), ((j.arrival - first) * factor).floor() as Slot))
        .collect())
}

/// How often the server permutation behind the skewed anchor choice is
/// redrawn.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PermutationScope {
    /// A fresh permutation for every group. Anchors are then uniform over
    /// servers whatever the skew, only the rank distribution is skewed.
    PerGroup,
    PerJob,
    /// One permutation for the whole run, so the same servers stay hot.
    #[default]
    PerRun,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PlacementConfig {
    pub servers: usize,
    /// Skew of the anchor rank distribution; 0 is uniform.
    pub alpha: f64,
    pub p_min: usize,
    pub p_max: usize,
    pub scope: PermutationScope,
    pub seed: u64,
}

impl PlacementConfig {
    pub fn validate(&self) -> Result<(), WorkloadError> {
        if !(self.alpha >= 0.0 && self.alpha.is_finite()) {
            return Err(WorkloadError::Config(format!(
                "alpha must be a finite non-negative number, got {}",
                self.alpha
            )));
        }
        if !(1 <= self.p_min && self.p_min <= self.p_max && self.p_max <= self.servers) {
            return Err(WorkloadError::Config(format!(
                "need 1 <= p_min <= p_max <= servers, got p in [{}, {}] with {} servers",
                self.p_min, self.p_max, self.servers
            )));
        }
        Ok(())
    }
}

/// Draws available-server sets: an anchor server picked by skewed rank in a
/// random permutation, followed by the next `p - 1` servers with wrap-around.
pub struct Placer {
    cfg: PlacementConfig,
    rng: ChaCha8Rng,
    ranks: WeightedIndex<f64>,
    permutation: Vec<ServerId>,
}

impl Placer {
    pub fn new(cfg: PlacementConfig) -> Result<Self, WorkloadError> {
        cfg.validate()?;
        let weights = (1..=cfg.servers).map(|i| (i as f64).powf(-cfg.alpha));
        let ranks = WeightedIndex::new(weights)
            .map_err(|e| WorkloadError::Config(format!("rank weights: {e}")))?;
        let mut rng = stream(cfg.seed, 2);
        let mut permutation: Vec<ServerId> = (1..=cfg.servers).collect();
        permutation.shuffle(&mut rng);
        Ok(Placer {
            cfg,
            rng,
            ranks,
            permutation,
        })
    }

    /// Zero-based rank of the next anchor in the current permutation.
    pub fn draw_rank(&mut self) -> usize {
        self.ranks.sample(&mut self.rng)
    }

    /// Starts a new job; redraws the permutation under per-job scope.
    pub fn next_job(&mut self) {
        if self.cfg.scope == PermutationScope::PerJob {
            self.permutation.shuffle(&mut self.rng);
        }
    }

    /// Available servers of the next group, sorted.
    pub fn next_group(&mut self) -> Vec<ServerId> {
        if self.cfg.scope == PermutationScope::PerGroup {
            self.permutation.shuffle(&mut self.rng);
        }
        let rank = self.draw_rank();
        let anchor = self.permutation[rank];
        let p = self.rng.gen_range(self.cfg.p_min..=self.cfg.p_max);
        let mut set = consecutive(anchor, p, self.cfg.servers);
        set.sort_unstable();
        set
    }
}

/// `p` consecutive servers starting at `anchor`, wrapping past `servers`.
pub fn consecutive(anchor: ServerId, p: usize, servers: usize) -> Vec<ServerId> {
    (0..p).map(|d| (anchor - 1 + d) % servers + 1).collect()
}

/// Gives every group of every job its available servers.
pub fn gen_placement(
    jobs: &[(UnplacedJob, Slot)],
    cfg: PlacementConfig,
) -> Result<Vec<Job>, WorkloadError> {
    let mut placer = Placer::new(cfg)?;
    Ok(jobs
        .iter()
        .map(|(job, arrival)| {
            placer.next_job();
            let groups: Vec<(u64, Vec<ServerId>)> = job
                .groups
                .iter()
                .map(|&tasks| (tasks, placer.next_group()))
                .collect();
            Job::new(job.id, *arrival, groups).expect("generated groups are well-formed")
        })
        .collect())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct CapacityConfig {
    pub mu_min: u32,
    pub mu_max: u32,
    pub seed: u64,
}

impl CapacityConfig {
    pub fn validate(&self) -> Result<(), WorkloadError> {
        (1 <= self.mu_min && self.mu_min <= self.mu_max)
            .then_some(())
            .ok_or_else(|| {
                WorkloadError::Config(format!(
                    "need 1 <= mu_min <= mu_max, got [{}, {}]",
                    self.mu_min, self.mu_max
                ))
            })
    }

    pub fn mean(&self) -> f64 {
        (f64::from(self.mu_min) + f64::from(self.mu_max)) / 2.0
    }
}

/// Independent uniform rates per (server, job).
pub fn gen_capacity(
    servers: usize,
    jobs: impl IntoIterator<Item = JobId>,
    cfg: CapacityConfig,
) -> Result<CapacityProfile, WorkloadError> {
    cfg.validate()?;
    if cfg.mu_min == cfg.mu_max {
        return Ok(CapacityProfile::uniform(servers, cfg.mu_min));
    }
    let mut rng = stream(cfg.seed, 3);
    let mut profile = CapacityProfile::new(servers);
    for job in jobs {
        let rates = (0..servers)
            .map(|_| rng.gen_range(cfg.mu_min..=cfg.mu_max))
            .collect();
        profile.insert(job, rates);
    }
    Ok(profile)
}

/// Everything needed to turn unplaced jobs into a simulation input.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WorkloadConfig {
    pub servers: usize,
    pub alpha: f64,
    pub utilization: f64,
    pub p_min: usize,
    pub p_max: usize,
    pub mu_min: u32,
    pub mu_max: u32,
    pub scope: PermutationScope,
    pub seed: u64,
}

impl Default for WorkloadConfig {
    fn default() -> Self {
        WorkloadConfig {
            servers: 100,
            alpha: 0.0,
            utilization: 0.5,
            p_min: 8,
            p_max: 12,
            mu_min: 3,
            mu_max: 5,
            scope: PermutationScope::default(),
            seed: 0,
        }
    }
}

impl WorkloadConfig {
    pub fn placement(&self) -> PlacementConfig {
        PlacementConfig {
            servers: self.servers,
            alpha: self.alpha,
            p_min: self.p_min,
            p_max: self.p_max,
            scope: self.scope,
            seed: self.seed,
        }
    }

    pub fn capacity(&self) -> CapacityConfig {
        CapacityConfig {
            mu_min: self.mu_min,
            mu_max: self.mu_max,
            seed: self.seed,
        }
    }

    /// Checks every parameter that does not depend on the jobs.
    pub fn validate(&self) -> Result<(), WorkloadError> {
        if !(self.utilization > 0.0 && self.utilization <= 1.0) {
            return Err(WorkloadError::Config(format!(
                "utilization {} is outside (0, 1]",
                self.utilization
            )));
        }
        self.placement().validate()?;
        self.capacity().validate()
    }
}

/// Scales arrivals, places groups and draws rates.
pub fn build_workload(
    jobs: &[UnplacedJob],
    cfg: &WorkloadConfig,
) -> Result<(Vec<Job>, CapacityProfile), WorkloadError> {
    let capacity_cfg = cfg.capacity();
    capacity_cfg.validate()?;
    let scaled = scale_to_utilization(jobs, cfg.utilization, cfg.servers, capacity_cfg.mean())?;
    let placed = gen_placement(&scaled, cfg.placement())?;
    let capacity = gen_capacity(cfg.servers, placed.iter().map(|j| j.id), capacity_cfg)?;
    Ok((placed, capacity))
}

fn stream(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}
