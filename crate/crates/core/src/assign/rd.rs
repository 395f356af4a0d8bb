use std::cmp::Reverse;
use std::collections::BTreeSet;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::estimation::BusyVector;
use crate::model::{Assignment, CapacityProfile, ClusterSnapshot, Job, ServerId, Share, Slot};

use super::Assigner;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum RdPhase {
    /// Pruning the most loaded server while that can still lower the
    /// completion time.
    Deletion,
    /// Removing the redundancy left on the other servers.
    Final,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Deletion {
    pub server: ServerId,
    pub group: usize,
    /// Task number within its group.
    pub task: u64,
    pub phase: RdPhase,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RdOutcome {
    pub assignment: Assignment,
    pub deletions: Vec<Deletion>,
}

/// Replica deletion with a seeded tie-break among equally replicated tasks.
///
/// The estimated busy time of a server is its initial busy time plus the
/// slots its remaining replicas need, all of the job's replicas sharing
/// slots.
#[derive(Debug, Clone, Copy, Default)]
pub struct ReplicaDeletion {
    pub seed: u64,
}

impl ReplicaDeletion {
    pub fn new(seed: u64) -> Self {
        ReplicaDeletion { seed }
    }

    pub fn run(&self, job: &Job, busy: &BusyVector, capacity: &CapacityProfile) -> RdOutcome {
        let job_seed = self.seed ^ job.id.wrapping_mul(0x9E37_79B9_7F4A_7C15);
        let mut rng = ChaCha8Rng::seed_from_u64(job_seed);
        let mut state = Replicas::new(job, busy, capacity, &mut rng);

        while let Some(&(Reverse(top), _, _)) = state.order.first() {
            // Among the servers tied for the largest busy time, prune the one
            // holding the most replicated task; larger initial busy time and
            // then lower id break ties.
            let target = state
                .order
                .iter()
                .take_while(|entry| entry.0 .0 == top)
                .filter_map(|&(_, Reverse(initial), j)| {
                    state
                        .top_copies(j)
                        .filter(|&c| c >= 2)
                        .map(|c| (c, initial, Reverse(j)))
                })
                .max();
            let Some((_, _, Reverse(j))) = target else {
                break;
            };
            state.trim(j, RdPhase::Deletion);
        }

        while let Some(j) = state
            .order
            .iter()
            .map(|&(_, _, j)| j)
            .find(|&j| state.top_copies(j).is_some_and(|c| c >= 2))
        {
            state.trim(j, RdPhase::Final);
        }

        state.finish()
    }
}

impl Assigner for ReplicaDeletion {
    fn name(&self) -> &'static str {
        "rd"
    }

    fn assign(&self, job: &Job, busy: &BusyVector, capacity: &CapacityProfile) -> Assignment {
        self.run(job, busy, capacity).assignment
    }
}

pub fn rd_assign(job: &Job, snapshot: &ClusterSnapshot, seed: u64) -> Assignment {
    ReplicaDeletion::new(seed).assign(
        job,
        &BusyVector::from_snapshot(snapshot),
        &snapshot.capacity,
    )
}

type Resident = (Reverse<u32>, u64, usize);

struct Replicas<'a> {
    job: &'a Job,
    servers: Vec<ServerId>,
    mu: Vec<u64>,
    initial: Vec<Slot>,
    load: Vec<u64>,
    /// Per server: replicas ordered by copy count (desc), then random key.
    resident: Vec<BTreeSet<Resident>>,
    /// Servers holding replicas: busy time desc, initial busy desc, id asc.
    order: BTreeSet<(Reverse<Slot>, Reverse<Slot>, usize)>,
    copies: Vec<u32>,
    key: Vec<u64>,
    holders: Vec<Vec<usize>>,
    group_of: Vec<usize>,
    number_in_group: Vec<u64>,
    deletions: Vec<Deletion>,
}

impl<'a> Replicas<'a> {
    fn new(
        job: &'a Job,
        busy: &BusyVector,
        capacity: &CapacityProfile,
        rng: &mut impl Rng,
    ) -> Self {
        let servers = job.servers();
        let local = |m: ServerId| servers.binary_search(&m).unwrap();
        let mut state = Replicas {
            job,
            mu: servers
                .iter()
                .map(|&m| u64::from(capacity.mu(m, job.id)))
                .collect(),
            initial: servers.iter().map(|&m| busy.get(m)).collect(),
            load: vec![0; servers.len()],
            resident: vec![BTreeSet::new(); servers.len()],
            order: BTreeSet::new(),
            copies: Vec::new(),
            key: Vec::new(),
            holders: Vec::new(),
            group_of: Vec::new(),
            number_in_group: Vec::new(),
            deletions: Vec::new(),
            servers: servers.clone(),
        };
        for (k, group) in job.groups.iter().enumerate() {
            let places: Vec<usize> = group.servers.iter().map(|&m| local(m)).collect();
            let copies = places.len() as u32;
            for n in 0..group.tasks {
                let t = state.copies.len();
                let key = rng.gen();
                state.copies.push(copies);
                state.key.push(key);
                state.group_of.push(k);
                state.number_in_group.push(n);
                for &j in &places {
                    state.resident[j].insert((Reverse(copies), key, t));
                    state.load[j] += 1;
                }
                state.holders.push(places.clone());
            }
        }
        for j in 0..servers.len() {
            if state.load[j] > 0 {
                state.order.insert(state.order_key(j));
            }
        }
        state
    }

    fn busy(&self, j: usize) -> Slot {
        self.initial[j] + self.load[j].div_ceil(self.mu[j])
    }

    fn order_key(&self, j: usize) -> (Reverse<Slot>, Reverse<Slot>, usize) {
        (Reverse(self.busy(j)), Reverse(self.initial[j]), j)
    }

    fn top_copies(&self, j: usize) -> Option<u32> {
        self.resident[j].first().map(|r| r.0 .0)
    }

    /// Removes up to `mu` redundant replicas from server `j`, stopping once
    /// its busy time has dropped by a slot.
    fn trim(&mut self, j: usize, phase: RdPhase) {
        let start = self.busy(j);
        let mut removed = 0;
        while removed < self.mu[j] && self.busy(j) == start {
            match self.resident[j].first() {
                Some(&(Reverse(c), _, t)) if c >= 2 => self.remove(j, t, phase),
                _ => break,
            }
            removed += 1;
        }
    }

    fn remove(&mut self, j: usize, t: usize, phase: RdPhase) {
        let old = self.copies[t];
        let key = self.key[t];
        self.resident[j].remove(&(Reverse(old), key, t));
        self.order.remove(&self.order_key(j));
        self.load[j] -= 1;
        if self.load[j] > 0 {
            self.order.insert(self.order_key(j));
        }
        self.holders[t].retain(|&h| h != j);
        self.copies[t] = old - 1;
        for &h in &self.holders[t] {
            self.resident[h].remove(&(Reverse(old), key, t));
            self.resident[h].insert((Reverse(old - 1), key, t));
        }
        self.deletions.push(Deletion {
            server: self.servers[j],
            group: self.job.groups[self.group_of[t]].index,
            task: self.number_in_group[t],
            phase,
        });
    }

    fn finish(self) -> RdOutcome {
        let groups_len = self.job.groups.len();
        let mut counts = vec![vec![0u64; self.servers.len()]; groups_len];
        for (t, places) in self.holders.iter().enumerate() {
            debug_assert_eq!(places.len(), 1);
            counts[self.group_of[t]][places[0]] += 1;
        }
        let groups = counts
            .iter()
            .map(|per_server| {
                per_server
                    .iter()
                    .enumerate()
                    .filter(|&(_, &n)| n > 0)
                    .map(|(j, &n)| Share {
                        server: self.servers[j],
                        slots: n.div_ceil(self.mu[j]),
                        tasks: n,
                    })
                    .collect()
            })
            .collect();
        let phi = self.order.first().map_or(0, |e| e.0 .0);
        RdOutcome {
            assignment: Assignment {
                job: self.job.id,
                groups,
                phi,
            },
            deletions: self.deletions,
        }
    }
}
