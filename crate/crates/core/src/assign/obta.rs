use std::ops::Range;

use crate::estimation::{phi_bounds, phi_upper, subranges, BoundsRange, BusyVector};
use crate::ilp::{solve_subrange, LinearSubproblem, SlotPlan};
use crate::model::{Assignment, CapacityProfile, Job, Slot};

use super::Assigner;

/// How much of the window a program solve had to look at.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct SearchStats {
    /// Intervals handed to the exact solver.
    pub subranges: usize,
    /// The interval holding the optimum.
    pub solved_in: Option<Range<Slot>>,
}

/// Scans the intervals of `bounds` in ascending order and returns the first
/// solution; it is optimal because later intervals only hold larger values.
///
/// The window's upper end assumes a server can pool the slots of different
/// groups, which the program does not allow, so when nothing below it is
/// feasible the scan continues up to a value where each group fits on any
/// single one of its servers.
pub fn solve_program(
    job: &Job,
    busy: &BusyVector,
    capacity: &CapacityProfile,
    bounds: &BoundsRange,
) -> (SlotPlan, LinearSubproblem, SearchStats) {
    let mut stats = SearchStats::default();
    let servers = job.servers();
    let safe_hi = servers
        .iter()
        .map(|&m| {
            let mu = u64::from(capacity.mu(m, job.id));
            busy.get(m)
                + job
                    .groups
                    .iter()
                    .filter(|g| g.contains(m))
                    .map(|g| g.tasks.div_ceil(mu))
                    .sum::<u64>()
        })
        .max()
        .unwrap_or(0);
    let tail = (bounds.phi_hi < safe_hi)
        .then(|| BoundsRange::with_breakpoints(bounds.phi_hi + 1, safe_hi, &servers, busy));
    let pieces = subranges(bounds)
        .into_iter()
        .chain(tail.iter().flat_map(subranges));
    for range in pieces {
        stats.subranges += 1;
        let problem = LinearSubproblem::for_job(job, busy, capacity, range.clone());
        if let Some(plan) = solve_subrange(&problem) {
            stats.solved_in = Some(range);
            return (plan, problem, stats);
        }
    }
    unreachable!("every group fits on any one of its servers at the safe upper bound")
}

/// Optimal balanced task assignment.
#[derive(Debug, Clone, Copy, Default)]
pub struct Obta;

impl Obta {
    pub fn solve(
        &self,
        job: &Job,
        busy: &BusyVector,
        capacity: &CapacityProfile,
    ) -> (Assignment, SearchStats) {
        let bounds = phi_bounds(job, busy, capacity);
        let (plan, problem, stats) = solve_program(job, busy, capacity, &bounds);
        (plan.to_assignment(job, &problem), stats)
    }
}

impl Assigner for Obta {
    fn name(&self) -> &'static str {
        "obta"
    }

    fn assign(&self, job: &Job, busy: &BusyVector, capacity: &CapacityProfile) -> Assignment {
        self.solve(job, busy, capacity).0
    }
}

/// The same program without the lower bound: the window starts at slot 1
/// and is cut at every busy time below the upper bound.
#[derive(Debug, Clone, Copy, Default)]
pub struct Nlip;

impl Nlip {
    pub fn solve(
        &self,
        job: &Job,
        busy: &BusyVector,
        capacity: &CapacityProfile,
    ) -> (Assignment, SearchStats) {
        let hi = phi_upper(job, busy, capacity);
        let bounds = BoundsRange::with_breakpoints(1, hi.max(1), &job.servers(), busy);
        let (plan, problem, stats) = solve_program(job, busy, capacity, &bounds);
        (plan.to_assignment(job, &problem), stats)
    }
}

impl Assigner for Nlip {
    fn name(&self) -> &'static str {
        "nlip"
    }

    fn assign(&self, job: &Job, busy: &BusyVector, capacity: &CapacityProfile) -> Assignment {
        self.solve(job, busy, capacity).0
    }
}
