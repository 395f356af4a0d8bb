//! Domain types shared by every assigner: jobs split into task groups,
//! per-server FIFO queues, capacity profiles and the assignments the
//! algorithms produce.

use std::collections::{BTreeMap, HashMap, VecDeque};
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Time measured in whole slots.
pub type Slot = u64;
/// Servers are numbered densely from 1 to M.
pub type ServerId = usize;
pub type JobId = u64;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ModelError {
    #[error("task {task} has no available server")]
    EmptyServerSet { task: usize },
    #[error("job {job}: group {group} has no available server")]
    EmptyGroup { job: JobId, group: usize },
    #[error("job {job}: group {group} has zero tasks")]
    ZeroTasks { job: JobId, group: usize },
    #[error("job {job} has no task groups")]
    NoGroups { job: JobId },
    #[error("job {job}: server {server} is outside 1..={servers}")]
    UnknownServer {
        job: JobId,
        server: ServerId,
        servers: usize,
    },
}

/// Tasks of one job that share an identical set of available servers.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TaskGroup {
    /// Position of the group inside its job (0-based). Preserved when a job is
    /// reduced to its unprocessed tasks.
    pub index: usize,
    pub tasks: u64,
    /// Sorted, deduplicated.
    pub servers: Vec<ServerId>,
}

impl TaskGroup {
    pub fn contains(&self, server: ServerId) -> bool {
        self.servers.binary_search(&server).is_ok()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Job {
    pub id: JobId,
    pub arrival: Slot,
    pub groups: Vec<TaskGroup>,
}

impl Job {
    /// Builds a job from `(task count, available servers)` pairs.
    ///
    /// Server sets are sorted and deduplicated. Pairs with identical server
    /// sets are merged into the first occurrence, so every group of the
    /// resulting job has a distinct set.
    pub fn new(
        id: JobId,
        arrival: Slot,
        groups: impl IntoIterator<Item = (u64, Vec<ServerId>)>,
    ) -> Result<Self, ModelError> {
        let mut merged: Vec<TaskGroup> = Vec::new();
        let mut by_set: HashMap<Vec<ServerId>, usize> = HashMap::new();
        for (position, (tasks, mut servers)) in groups.into_iter().enumerate() {
            if tasks == 0 {
                return Err(ModelError::ZeroTasks {
                    job: id,
                    group: position,
                });
            }
            if servers.is_empty() {
                return Err(ModelError::EmptyGroup {
                    job: id,
                    group: position,
                });
            }
            servers.sort_unstable();
            servers.dedup();
            match by_set.get(&servers) {
                Some(&at) => merged[at].tasks += tasks,
                None => {
                    by_set.insert(servers.clone(), merged.len());
                    merged.push(TaskGroup {
                        index: merged.len(),
                        tasks,
                        servers,
                    });
                }
            }
        }
        if merged.is_empty() {
            return Err(ModelError::NoGroups { job: id });
        }
        Ok(Job {
            id,
            arrival,
            groups: merged,
        })
    }

    pub fn total_tasks(&self) -> u64 {
        self.groups.iter().map(|g| g.tasks).sum()
    }

    /// Servers appearing in any group, ascending.
    pub fn servers(&self) -> Vec<ServerId> {
        let mut all: Vec<ServerId> = self
            .groups
            .iter()
            .flat_map(|g| g.servers.iter().copied())
            .collect();
        all.sort_unstable();
        all.dedup();
        all
    }

    /// Checks that every server lies in `1..=servers`.
    pub fn check_servers(&self, servers: usize) -> Result<(), ModelError> {
        for group in &self.groups {
            if let Some(&bad) = group.servers.iter().find(|&&m| m == 0 || m > servers) {
                return Err(ModelError::UnknownServer {
                    job: self.id,
                    server: bad,
                    servers,
                });
            }
        }
        Ok(())
    }

    /// The unprocessed part of the job, given how many tasks of each group
    /// (indexed by `TaskGroup::index`) are already done. Groups with nothing
    /// left are dropped; `None` when the whole job is finished.
    pub fn remaining(&self, processed: &[u64]) -> Option<Job> {
        let groups: Vec<TaskGroup> = self
            .groups
            .iter()
            .filter_map(|g| {
                let done = processed.get(g.index).copied().unwrap_or(0);
                let left = g.tasks.saturating_sub(done);
                (left > 0).then(|| TaskGroup {
                    tasks: left,
                    ..g.clone()
                })
            })
            .collect();
        (!groups.is_empty()).then_some(Job {
            id: self.id,
            arrival: self.arrival,
            groups,
        })
    }
}

/// Partitions tasks by identical available-server sets, in order of first
/// appearance. Tasks are given as `(task id, available servers)`.
pub fn group_tasks<T>(tasks: &[(T, Vec<ServerId>)]) -> Result<Vec<TaskGroup>, ModelError> {
    let mut groups: Vec<TaskGroup> = Vec::new();
    let mut by_set: HashMap<Vec<ServerId>, usize> = HashMap::new();
    for (position, (_, servers)) in tasks.iter().enumerate() {
        if servers.is_empty() {
            return Err(ModelError::EmptyServerSet { task: position });
        }
        let mut key = servers.clone();
        key.sort_unstable();
        key.dedup();
        match by_set.get(&key) {
            Some(&at) => groups[at].tasks += 1,
            None => {
                by_set.insert(key.clone(), groups.len());
                groups.push(TaskGroup {
                    index: groups.len(),
                    tasks: 1,
                    servers: key,
                });
            }
        }
    }
    Ok(groups)
}

/// Profiled tasks-per-slot rate of every (server, job) pair.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CapacityProfile {
    servers: usize,
    rates: HashMap<JobId, Vec<u32>>,
    uniform: Option<u32>,
}

impl CapacityProfile {
    /// Empty profile; rates must be inserted per job.
    pub fn new(servers: usize) -> Self {
        CapacityProfile {
            servers,
            rates: HashMap::new(),
            uniform: None,
        }
    }

    /// Every server processes `mu` tasks of any job per slot.
    pub fn uniform(servers: usize, mu: u32) -> Self {
        assert!(mu >= 1, "capacity must be positive");
        CapacityProfile {
            servers,
            rates: HashMap::new(),
            uniform: Some(mu),
        }
    }

    /// Sets the rates of one job; `rates[m - 1]` is server `m`'s rate.
    pub fn insert(&mut self, job: JobId, rates: Vec<u32>) {
        assert_eq!(rates.len(), self.servers, "one rate per server");
        assert!(rates.iter().all(|&r| r >= 1), "capacity must be positive");
        self.rates.insert(job, rates);
    }

    pub fn servers(&self) -> usize {
        self.servers
    }

    pub fn get(&self, server: ServerId, job: JobId) -> Option<u32> {
        if server == 0 || server > self.servers {
            return None;
        }
        match self.rates.get(&job) {
            Some(rates) => Some(rates[server - 1]),
            None => self.uniform,
        }
    }

    /// Like [`get`](Self::get) but panics when the pair was never profiled.
    pub fn mu(&self, server: ServerId, job: JobId) -> u32 {
        self.get(server, job)
            .unwrap_or_else(|| panic!("no capacity profiled for server {server}, job {job}"))
    }

    pub fn covers(&self, job: JobId) -> bool {
        self.uniform.is_some() || self.rates.contains_key(&job)
    }
}

/// Outstanding tasks of one group waiting in a server queue.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct QueueEntry {
    pub job: JobId,
    pub group: usize,
    pub remaining: u64,
}

/// Per-server queues plus the capacity profile, as seen when a job arrives.
#[derive(Debug, Clone)]
pub struct ClusterSnapshot {
    /// `queues[m - 1]` is the queue of server `m`, head first.
    pub queues: Vec<VecDeque<QueueEntry>>,
    pub capacity: CapacityProfile,
}

impl ClusterSnapshot {
    /// A cluster with all queues empty.
    pub fn idle(capacity: CapacityProfile) -> Self {
        ClusterSnapshot {
            queues: vec![VecDeque::new(); capacity.servers()],
            capacity,
        }
    }

    pub fn servers(&self) -> usize {
        self.queues.len()
    }

    pub fn queue(&self, server: ServerId) -> &VecDeque<QueueEntry> {
        &self.queues[server - 1]
    }
}

/// Tasks of one group placed on one server, with the slots reserved for them.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Share {
    pub server: ServerId,
    pub slots: Slot,
    pub tasks: u64,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Assignment {
    pub job: JobId,
    /// One entry per group of the assigned job, in the job's group order.
    /// Shares are sorted by server.
    pub groups: Vec<Vec<Share>>,
    /// Estimated completion time, in slots from the job's arrival.
    pub phi: Slot,
}

impl Assignment {
    /// Total tasks per server over all groups.
    pub fn server_loads(&self) -> BTreeMap<ServerId, u64> {
        let mut loads = BTreeMap::new();
        for share in self.groups.iter().flatten() {
            if share.tasks > 0 {
                *loads.entry(share.server).or_insert(0) += share.tasks;
            }
        }
        loads
    }

    /// Completion time the queues will actually realize: the latest
    /// `b_m + ceil(load_m / mu_m)` over servers receiving tasks, where the
    /// load of a server aggregates all groups of the job.
    pub fn realized_completion(
        &self,
        busy: &crate::estimation::BusyVector,
        capacity: &CapacityProfile,
    ) -> Slot {
        self.server_loads()
            .into_iter()
            .map(|(m, load)| busy.get(m) + load.div_ceil(u64::from(capacity.mu(m, self.job))))
            .max()
            .unwrap_or(0)
    }
}

/// First broken invariant found by [`validate_assignment`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Violation {
    GroupCount {
        expected: usize,
        found: usize,
    },
    Coverage {
        group: usize,
        expected: u64,
        found: u64,
    },
    Locality {
        group: usize,
        server: ServerId,
    },
    Capacity {
        group: usize,
        server: ServerId,
    },
    NoSlots {
        group: usize,
        server: ServerId,
    },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::GroupCount { expected, found } => {
                write!(f, "group count: expected {expected}, found {found}")
            }
            Violation::Coverage {
                group,
                expected,
                found,
            } => write!(
                f,
                "group coverage: group {group} needs {expected} tasks, {found} assigned"
            ),
            Violation::Locality { group, server } => {
                write!(
                    f,
                    "locality: group {group} placed on unavailable server {server}"
                )
            }
            Violation::Capacity { group, server } => write!(
                f,
                "capacity: group {group} exceeds slots x rate on server {server}"
            ),
            Violation::NoSlots { group, server } => {
                write!(
                    f,
                    "slots: group {group} has tasks but no slots on server {server}"
                )
            }
        }
    }
}

impl std::error::Error for Violation {}

/// Checks an assignment of `job` against the structural invariants:
/// every task placed exactly once, only on available servers, and never more
/// tasks on a server than its reserved slots can process.
pub fn validate_assignment(
    job: &Job,
    capacity: &CapacityProfile,
    assignment: &Assignment,
) -> Result<(), Violation> {
    if assignment.groups.len() != job.groups.len() {
        return Err(Violation::GroupCount {
            expected: job.groups.len(),
            found: assignment.groups.len(),
        });
    }
    for (group, shares) in job.groups.iter().zip(&assignment.groups) {
        let mut placed = 0;
        for share in shares {
            if !group.contains(share.server) {
                return Err(Violation::Locality {
                    group: group.index,
                    server: share.server,
                });
            }
            if share.tasks > 0 && share.slots == 0 {
                return Err(Violation::NoSlots {
                    group: group.index,
                    server: share.server,
                });
            }
            let mu = u64::from(capacity.mu(share.server, job.id));
            if share.tasks > share.slots * mu {
                return Err(Violation::Capacity {
                    group: group.index,
                    server: share.server,
                });
            }
            placed += share.tasks;
        }
        if placed != group.tasks {
            return Err(Violation::Coverage {
                group: group.index,
                expected: group.tasks,
                found: placed,
            });
        }
    }
    Ok(())
}
