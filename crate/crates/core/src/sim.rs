//! Slot-granular cluster simulator.
//!
//! Arrivals take effect at slot boundaries. Within a slot every server works
//! for the job at the head of its queue only, processing up to `mu` of that
//! job's tasks from any of its entries in the queue. This is the drain rule
//! under which the busy-time estimate equals the number of slots a queue
//! needs.

use std::collections::HashMap;
use std::fmt;
use std::str::FromStr;
use std::time::Instant;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::assign::{Assigner, Nlip, Obta, ReplicaDeletion, WaterFilling};
use crate::estimation::BusyVector;
use crate::model::{
    Assignment, CapacityProfile, ClusterSnapshot, Job, JobId, ModelError, QueueEntry, ServerId,
    Slot,
};
use crate::reorder::ocwf_reorder;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Algorithm {
    Nlip,
    Obta,
    Wf,
    Rd,
    Ocwf,
    OcwfAcc,
}

impl Algorithm {
    pub const ALL: [Algorithm; 6] = [
        Algorithm::Nlip,
        Algorithm::Obta,
        Algorithm::Wf,
        Algorithm::Rd,
        Algorithm::Ocwf,
        Algorithm::OcwfAcc,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Algorithm::Nlip => "nlip",
            Algorithm::Obta => "obta",
            Algorithm::Wf => "wf",
            Algorithm::Rd => "rd",
            Algorithm::Ocwf => "ocwf",
            Algorithm::OcwfAcc => "ocwf-acc",
        }
    }

    /// Whether arrivals rebuild the order of all outstanding jobs.
    pub fn reorders(self) -> bool {
        matches!(self, Algorithm::Ocwf | Algorithm::OcwfAcc)
    }
}

impl fmt::Display for Algorithm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("unknown algorithm `{0}` (expected one of nlip, obta, wf, rd, ocwf, ocwf-acc)")]
pub struct UnknownAlgorithm(pub String);

impl FromStr for Algorithm {
    type Err = UnknownAlgorithm;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Algorithm::ALL
            .into_iter()
            .find(|a| a.name().eq_ignore_ascii_case(s))
            .ok_or_else(|| UnknownAlgorithm(s.to_string()))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SimConfig {
    pub algorithm: Algorithm,
    /// Seed for randomized tie-breaking (replica deletion).
    pub seed: u64,
}

impl SimConfig {
    pub fn new(algorithm: Algorithm) -> Self {
        SimConfig { algorithm, seed: 0 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct JctRecord {
    pub job: JobId,
    pub tasks: u64,
    pub arrival: Slot,
    pub completion: Slot,
    pub jct: Slot,
    /// Completion time estimated when the job arrived, relative to arrival.
    pub estimated_phi: Slot,
    /// Wall-clock time of the assignment or reordering call at arrival.
    pub decision_overhead_us: f64,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SimError {
    #[error("malformed job: {0}")]
    InvalidJob(#[from] ModelError),
    #[error("job {job} has no capacity profile")]
    MissingCapacity { job: JobId },
    #[error("job {job} arrives at slot {arrival}, before the previous job")]
    Unsorted { job: JobId, arrival: Slot },
    #[error("job id {job} appears twice")]
    DuplicateJob { job: JobId },
}

#[derive(Debug, Clone)]
struct Progress {
    /// Processed tasks per original group index.
    processed: Vec<u64>,
    left: u64,
    completion: Option<Slot>,
}

/// Mutable state of a running simulation.
#[derive(Debug, Clone)]
pub struct SimState {
    clock: Slot,
    cluster: ClusterSnapshot,
    progress: HashMap<JobId, Progress>,
    processed_total: u64,
}

impl SimState {
    pub fn new(capacity: CapacityProfile) -> Self {
        SimState {
            clock: 0,
            cluster: ClusterSnapshot::idle(capacity),
            progress: HashMap::new(),
            processed_total: 0,
        }
    }

    pub fn clock(&self) -> Slot {
        self.clock
    }

    pub fn cluster(&self) -> &ClusterSnapshot {
        &self.cluster
    }

    /// Tasks processed since the start.
    pub fn processed(&self) -> u64 {
        self.processed_total
    }

    /// Appends an entry to the tail of a server's queue. Entries of jobs not
    /// registered with [`SimState::track`] are drained but not accounted.
    pub fn enqueue(&mut self, server: ServerId, entry: QueueEntry) {
        if entry.remaining > 0 {
            self.cluster.queues[server - 1].push_back(entry);
        }
    }

    /// Starts tracking completion of `job`.
    pub fn track(&mut self, job: &Job) {
        let width = job.groups.iter().map(|g| g.index + 1).max().unwrap_or(0);
        self.progress.insert(
            job.id,
            Progress {
                processed: vec![0; width],
                left: job.total_tasks(),
                completion: None,
            },
        );
    }

    /// Processed tasks of a tracked job, indexed by original group index.
    pub fn processed_by_group(&self, job: JobId) -> Option<&[u64]> {
        self.progress.get(&job).map(|p| p.processed.as_slice())
    }

    pub fn completion(&self, job: JobId) -> Option<Slot> {
        self.progress.get(&job).and_then(|p| p.completion)
    }

    pub fn is_idle(&self) -> bool {
        self.cluster.queues.iter().all(|q| q.is_empty())
    }

    fn unprocessed(&self, job: &Job) -> Option<Job> {
        job.remaining(&self.progress[&job.id].processed)
    }

    fn place(&mut self, job: &Job, assignment: &Assignment) {
        for (group, shares) in job.groups.iter().zip(&assignment.groups) {
            for share in shares {
                self.enqueue(
                    share.server,
                    QueueEntry {
                        job: job.id,
                        group: group.index,
                        remaining: share.tasks,
                    },
                );
            }
        }
    }
}

/// Processes one slot on every server and advances the clock.
pub fn advance_slot(state: &mut SimState) {
    let SimState {
        clock,
        cluster,
        progress,
        processed_total,
    } = state;
    for (i, queue) in cluster.queues.iter_mut().enumerate() {
        let Some(head) = queue.front().map(|e| e.job) else {
            continue;
        };
        let mut budget = u64::from(cluster.capacity.mu(i + 1, head));
        for entry in queue.iter_mut().filter(|e| e.job == head) {
            if budget == 0 {
                break;
            }
            let take = budget.min(entry.remaining);
            entry.remaining -= take;
            budget -= take;
            *processed_total += take;
            if let Some(p) = progress.get_mut(&head) {
                p.processed[entry.group] += take;
                p.left -= take;
                if p.left == 0 {
                    p.completion = Some(*clock + 1);
                }
            }
        }
        queue.retain(|e| e.remaining > 0);
    }
    *clock += 1;
}

/// Runs `decide` and returns its result with the elapsed wall-clock time in
/// microseconds.
pub fn measure_overhead<T>(decide: impl FnOnce() -> T) -> (T, f64) {
    let start = Instant::now();
    let value = decide();
    (value, start.elapsed().as_secs_f64() * 1e6)
}

fn fifo_assigner(config: &SimConfig) -> Box<dyn Assigner> {
    match config.algorithm {
        Algorithm::Nlip => Box::new(Nlip),
        Algorithm::Obta => Box::new(Obta),
        Algorithm::Wf => Box::new(WaterFilling::default()),
        Algorithm::Rd => Box::new(ReplicaDeletion::new(config.seed)),
        Algorithm::Ocwf | Algorithm::OcwfAcc => {
            unreachable!("reordering modes have no FIFO assigner")
        }
    }
}

fn check_jobs(jobs: &[Job], capacity: &CapacityProfile) -> Result<(), SimError> {
    let mut seen = std::collections::HashSet::new();
    let mut last = 0;
    for job in jobs {
        if job.arrival < last {
            return Err(SimError::Unsorted {
                job: job.id,
                arrival: job.arrival,
            });
        }
        last = job.arrival;
        if !seen.insert(job.id) {
            return Err(SimError::DuplicateJob { job: job.id });
        }
        if job.groups.is_empty() {
            return Err(ModelError::NoGroups { job: job.id }.into());
        }
        for g in &job.groups {
            if g.tasks == 0 {
                return Err(ModelError::ZeroTasks {
                    job: job.id,
                    group: g.index,
                }
                .into());
            }
            if g.servers.is_empty() {
                return Err(ModelError::EmptyGroup {
                    job: job.id,
                    group: g.index,
                }
                .into());
            }
        }
        job.check_servers(capacity.servers())?;
        if !capacity.covers(job.id) {
            return Err(SimError::MissingCapacity { job: job.id });
        }
    }
    Ok(())
}

/// Simulates `jobs` (sorted by arrival) to completion and returns one record
/// per job in input order.
pub fn run(
    config: &SimConfig,
    jobs: &[Job],
    capacity: &CapacityProfile,
) -> Result<Vec<JctRecord>, SimError> {
    run_to_end(config, jobs, capacity).map(|(records, _)| records)
}

/// [`run`], also returning the final state.
pub fn run_to_end(
    config: &SimConfig,
    jobs: &[Job],
    capacity: &CapacityProfile,
) -> Result<(Vec<JctRecord>, SimState), SimError> {
    check_jobs(jobs, capacity)?;
    let mut state = SimState::new(capacity.clone());
    let fifo = (!config.algorithm.reorders()).then(|| fifo_assigner(config));
    let accelerate = config.algorithm == Algorithm::OcwfAcc;
    let mut estimates = Vec::with_capacity(jobs.len());
    let mut next = 0;

    while next < jobs.len() || !state.is_idle() {
        if state.is_idle() && jobs[next].arrival > state.clock {
            state.clock = jobs[next].arrival;
        }
        while next < jobs.len() && jobs[next].arrival <= state.clock {
            let job = &jobs[next];
            state.track(job);
            let (phi, overhead) = match &fifo {
                Some(assigner) => {
                    let busy = BusyVector::from_snapshot(&state.cluster);
                    let (assignment, us) =
                        measure_overhead(|| assigner.assign(job, &busy, capacity));
                    debug_assert!(
                        crate::model::validate_assignment(job, capacity, &assignment).is_ok()
                    );
                    state.place(job, &assignment);
                    (assignment.phi, us)
                }
                None => {
                    let outstanding: Vec<Job> = jobs[..=next]
                        .iter()
                        .filter(|j| state.completion(j.id).is_none())
                        .filter_map(|j| state.unprocessed(j))
                        .collect();
                    let (result, us) =
                        measure_overhead(|| ocwf_reorder(&outstanding, capacity, accelerate));
                    for queue in &mut state.cluster.queues {
                        queue.clear();
                    }
                    let by_id: HashMap<JobId, &Job> =
                        outstanding.iter().map(|j| (j.id, j)).collect();
                    for (id, assignment) in result.order.iter().zip(&result.assignments) {
                        state.place(by_id[id], assignment);
                    }
                    let at = result.order.iter().position(|&id| id == job.id).unwrap();
                    (result.phis[at], us)
                }
            };
            estimates.push((phi, overhead));
            next += 1;
        }
        if !state.is_idle() {
            advance_slot(&mut state);
        }
    }

    let records = jobs
        .iter()
        .zip(estimates)
        .map(|(job, (estimated_phi, decision_overhead_us))| {
            let completion = state.completion(job.id).expect("all jobs finish");
            JctRecord {
                job: job.id,
                tasks: job.total_tasks(),
                arrival: job.arrival,
                completion,
                jct: completion - job.arrival,
                estimated_phi,
                decision_overhead_us,
            }
        })
        .collect();
    Ok((records, state))
}
