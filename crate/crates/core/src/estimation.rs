//! Busy-time estimation and the search window for a job's completion time.
//!
//! A server's busy time is the number of slots it needs to drain its queue.
//! Each job in the queue occupies whole slots, so its tasks are aggregated
//! and rounded up once per job.
//!
//! For an arriving job the optimal completion time lies in `[lo, hi]`:
//! `hi` assumes every available server takes all of the job's tasks it
//! could run, `lo` is the largest time any single group needs when it has
//! its servers to itself. The window is cut at the busy times of the
//! available servers; inside each piece the set of servers with spare slots
//! is fixed, which makes the assignment problem linear there.

use std::collections::HashMap;
use std::ops::Range;

use serde::{Deserialize, Serialize};

use crate::model::{CapacityProfile, ClusterSnapshot, Job, QueueEntry, ServerId, Slot};

/// Busy time per server; index `m - 1` holds server `m`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BusyVector(Vec<Slot>);

impl BusyVector {
    pub fn zeros(servers: usize) -> Self {
        BusyVector(vec![0; servers])
    }

    pub fn from_slots(slots: Vec<Slot>) -> Self {
        BusyVector(slots)
    }

    /// Estimates every server of the snapshot with [`busy_time`].
    pub fn from_snapshot(snapshot: &ClusterSnapshot) -> Self {
        BusyVector(
            snapshot
                .queues
                .iter()
                .enumerate()
                .map(|(i, q)| busy_time(q, &snapshot.capacity, i + 1))
                .collect(),
        )
    }

    pub fn servers(&self) -> usize {
        self.0.len()
    }

    pub fn get(&self, server: ServerId) -> Slot {
        self.0[server - 1]
    }

    pub fn set(&mut self, server: ServerId, value: Slot) {
        self.0[server - 1] = value;
    }

    pub fn as_slice(&self) -> &[Slot] {
        &self.0
    }
}

/// Slots `server` needs to drain `queue`: the sum over distinct jobs of
/// `ceil(outstanding tasks of the job / rate of the job on this server)`.
pub fn busy_time<'a>(
    queue: impl IntoIterator<Item = &'a QueueEntry>,
    capacity: &CapacityProfile,
    server: ServerId,
) -> Slot {
    let mut per_job: HashMap<u64, u64> = HashMap::new();
    for entry in queue {
        *per_job.entry(entry.job).or_insert(0) += entry.remaining;
    }
    per_job
        .into_iter()
        .filter(|&(_, tasks)| tasks > 0)
        .map(|(job, tasks)| tasks.div_ceil(u64::from(capacity.mu(server, job))))
        .sum()
}

/// Smallest `x` with `sum_m max(x - busy_m, 0) * mu_m >= demand`.
///
/// `servers` holds `(busy, mu)` pairs and must not be empty.
pub fn min_slots(demand: u64, servers: &[(Slot, u32)]) -> Slot {
    assert!(!servers.is_empty(), "min_slots needs at least one server");
    let supply = |x: Slot| -> u64 {
        servers
            .iter()
            .map(|&(b, mu)| x.saturating_sub(b) * u64::from(mu))
            .sum()
    };
    let total_mu: u64 = servers.iter().map(|&(_, mu)| u64::from(mu)).sum();
    let tallest = servers.iter().map(|&(b, _)| b).max().unwrap_or(0);
    let (mut lo, mut hi) = (0, tallest + demand.div_ceil(total_mu));
    while lo < hi {
        let mid = lo + (hi - lo) / 2;
        if supply(mid) >= demand {
            hi = mid;
        } else {
            lo = mid + 1;
        }
    }
    lo
}

/// Search window `[phi_lo, phi_hi]` and the busy times that cut it.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BoundsRange {
    pub phi_lo: Slot,
    pub phi_hi: Slot,
    /// Distinct busy times of available servers inside `[phi_lo, phi_hi]`,
    /// ascending.
    pub breakpoints: Vec<Slot>,
}

impl BoundsRange {
    /// Window `[lo, hi]` cut at every distinct busy time of `servers` that
    /// falls inside it.
    pub fn with_breakpoints(lo: Slot, hi: Slot, servers: &[ServerId], busy: &BusyVector) -> Self {
        let mut breakpoints: Vec<Slot> = servers
            .iter()
            .map(|&m| busy.get(m))
            .filter(|&b| b >= lo && b <= hi)
            .collect();
        breakpoints.sort_unstable();
        breakpoints.dedup();
        BoundsRange {
            phi_lo: lo,
            phi_hi: hi,
            breakpoints,
        }
    }
}

/// Slots group `k` of `job` needs on its own servers given `busy`
/// (the `x_k` of the lower bound).
pub fn group_lower_bound(
    job: &Job,
    group: usize,
    busy: &BusyVector,
    capacity: &CapacityProfile,
) -> Slot {
    let g = &job.groups[group];
    let servers: Vec<(Slot, u32)> = g
        .servers
        .iter()
        .map(|&m| (busy.get(m), capacity.mu(m, job.id)))
        .collect();
    min_slots(g.tasks, &servers)
}

/// Largest per-group lower bound of the job.
pub fn phi_lower(job: &Job, busy: &BusyVector, capacity: &CapacityProfile) -> Slot {
    (0..job.groups.len())
        .map(|k| group_lower_bound(job, k, busy, capacity))
        .max()
        .unwrap_or(0)
}

/// Completion time if every available server had to run all of the job's
/// tasks it is eligible for.
pub fn phi_upper(job: &Job, busy: &BusyVector, capacity: &CapacityProfile) -> Slot {
    job.servers()
        .into_iter()
        .map(|m| {
            let tasks: u64 = job
                .groups
                .iter()
                .filter(|g| g.contains(m))
                .map(|g| g.tasks)
                .sum();
            tasks.div_ceil(u64::from(capacity.mu(m, job.id))) + busy.get(m)
        })
        .max()
        .unwrap_or(0)
}

pub fn phi_bounds(job: &Job, busy: &BusyVector, capacity: &CapacityProfile) -> BoundsRange {
    let lo = phi_lower(job, busy, capacity);
    let hi = phi_upper(job, busy, capacity);
    BoundsRange::with_breakpoints(lo, hi, &job.servers(), busy)
}

/// Splits `[phi_lo, phi_hi]` into half-open intervals at the breakpoints.
/// Empty pieces are skipped; the pieces cover the window exactly once.
pub fn subranges(bounds: &BoundsRange) -> Vec<Range<Slot>> {
    let end = bounds.phi_hi + 1;
    let mut cuts: Vec<Slot> = vec![bounds.phi_lo];
    cuts.extend(
        bounds
            .breakpoints
            .iter()
            .copied()
            .filter(|&b| b > bounds.phi_lo && b < end),
    );
    cuts.push(end);
    cuts.dedup();
    cuts.windows(2)
        .filter(|w| w[0] < w[1])
        .map(|w| w[0]..w[1])
        .collect()
}
