//! Order-conscious assignment: rebuild the execution order of every
//! outstanding job whenever a new one arrives.
//!
//! Busy times start from zero and jobs are placed one position at a time.
//! For each position, every unplaced job is assigned against the current
//! busy times and the one finishing soonest goes next, which emulates
//! shortest-remaining-time-first across the cluster.
//!
//! With early exit, candidates are visited in ascending order of their
//! lower bound. Once that bound exceeds the best completion time found,
//! no later candidate can win and the scan stops.

use std::cmp::Ordering;

use serde::{Deserialize, Serialize};

use crate::assign::{Assigner, WaterFilling};
use crate::estimation::{phi_lower, BusyVector};
use crate::model::{Assignment, CapacityProfile, Job, JobId, Slot};

/// An outstanding job reduced to its unprocessed tasks; group indices refer
/// to the original job.
pub type OutstandingJob = Job;

/// Unprocessed part of `job` given per-group processed counts, or `None`
/// when the job is finished.
pub fn remaining_tasks(job: &Job, processed: &[u64]) -> Option<OutstandingJob> {
    job.remaining(processed)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ReorderResult {
    pub order: Vec<JobId>,
    /// Assignment of each job's remaining tasks, in `order`.
    pub assignments: Vec<Assignment>,
    /// Estimated completion of each job, in `order`.
    pub phis: Vec<Slot>,
    /// Number of inner assigner evaluations.
    pub wf_calls: usize,
    /// Busy times after placing every job.
    pub busy: BusyVector,
}

/// Reorders with water-filling as the inner assigner.
pub fn ocwf_reorder(
    outstanding: &[OutstandingJob],
    capacity: &CapacityProfile,
    accelerate: bool,
) -> ReorderResult {
    reorder_with(outstanding, capacity, accelerate, &WaterFilling::default())
}

fn tie_key(job: &Job) -> (Slot, JobId) {
    (job.arrival, job.id)
}

/// Greedy reordering with any inner assigner. The inner assigner's
/// completion estimate must never fall below the per-group lower bound for
/// early exit to be exact.
pub fn reorder_with(
    outstanding: &[OutstandingJob],
    capacity: &CapacityProfile,
    accelerate: bool,
    inner: &dyn Assigner,
) -> ReorderResult {
    let mut busy = BusyVector::zeros(capacity.servers());
    let mut left: Vec<&Job> = outstanding.iter().collect();
    let mut result = ReorderResult {
        order: Vec::with_capacity(left.len()),
        assignments: Vec::with_capacity(left.len()),
        phis: Vec::with_capacity(left.len()),
        wf_calls: 0,
        busy: busy.clone(),
    };

    while !left.is_empty() {
        let mut best: Option<(usize, Assignment)> = None;
        let better =
            |phi: Slot, job: &Job, best: &Option<(usize, Assignment)>, left: &[&Job]| match best {
                None => true,
                Some((at, a)) => match phi.cmp(&a.phi) {
                    Ordering::Less => true,
                    Ordering::Equal => tie_key(job) < tie_key(left[*at]),
                    Ordering::Greater => false,
                },
            };

        if accelerate {
            let mut bounds: Vec<(Slot, usize)> = left
                .iter()
                .enumerate()
                .map(|(i, job)| (phi_lower(job, &busy, capacity), i))
                .collect();
            bounds.sort_by_key(|&(lb, i)| (lb, tie_key(left[i])));
            for (lb, i) in bounds {
                if let Some((at, a)) = &best {
                    if lb > a.phi {
                        break;
                    }
                    // Equal bound: this job can at best tie, and ties go to
                    // the earlier arrival.
                    if lb == a.phi && tie_key(left[i]) > tie_key(left[*at]) {
                        continue;
                    }
                }
                result.wf_calls += 1;
                let a = inner.assign(left[i], &busy, capacity);
                if better(a.phi, left[i], &best, &left) {
                    best = Some((i, a));
                }
            }
        } else {
            for (i, job) in left.iter().enumerate() {
                result.wf_calls += 1;
                let a = inner.assign(job, &busy, capacity);
                if better(a.phi, job, &best, &left) {
                    best = Some((i, a));
                }
            }
        }

        let (at, assignment) = best.expect("at least one candidate");
        let job = left.remove(at);
        for (m, load) in assignment.server_loads() {
            let mu = u64::from(capacity.mu(m, job.id));
            busy.set(m, busy.get(m) + load.div_ceil(mu));
        }
        result.order.push(job.id);
        result.phis.push(assignment.phi);
        result.assignments.push(assignment);
    }
    result.busy = busy;
    result
}
