//! Task assignment for FIFO queues.
//!
//! Every assigner maps an arriving job plus the current busy times to an
//! [`Assignment`]: how many of each group's tasks go to each available
//! server, and the job's estimated completion time `phi`.
//!
//! * [`Obta`] solves the slot-allocation program exactly, searching only the
//!   narrowed window `[lo, hi]` piece by piece.
//! * [`Nlip`] solves the same program over `[1, hi]` without the lower bound.
//! * [`WaterFilling`] levels one group at a time; at most `K` times the
//!   optimum for a job with `K` groups.
//! * [`ReplicaDeletion`] replicates every task on all its servers and prunes
//!   replicas from the most loaded server.

mod obta;
mod rd;
mod wf;
mod worst_case;

pub use obta::{solve_program, Nlip, Obta, SearchStats};
pub use rd::{rd_assign, Deletion, RdOutcome, RdPhase, ReplicaDeletion};
pub use wf::{wf_assign, GroupOrder, GroupParticipation, ParticipationTrace, WaterFilling};
pub use worst_case::WorstCaseInstance;

use crate::estimation::BusyVector;
use crate::model::{Assignment, CapacityProfile, ClusterSnapshot, Job};

pub trait Assigner: Send + Sync {
    fn name(&self) -> &'static str;

    fn assign(&self, job: &Job, busy: &BusyVector, capacity: &CapacityProfile) -> Assignment;
}

impl<A: Assigner + ?Sized> Assigner for &A {
    fn name(&self) -> &'static str {
        (**self).name()
    }

    fn assign(&self, job: &Job, busy: &BusyVector, capacity: &CapacityProfile) -> Assignment {
        (**self).assign(job, busy, capacity)
    }
}

impl<A: Assigner + ?Sized> Assigner for Box<A> {
    fn name(&self) -> &'static str {
        (**self).name()
    }

    fn assign(&self, job: &Job, busy: &BusyVector, capacity: &CapacityProfile) -> Assignment {
        (**self).assign(job, busy, capacity)
    }
}

pub fn obta_assign(job: &Job, snapshot: &ClusterSnapshot) -> Assignment {
    Obta.assign(
        job,
        &BusyVector::from_snapshot(snapshot),
        &snapshot.capacity,
    )
}

pub fn nlip_assign(job: &Job, snapshot: &ClusterSnapshot) -> Assignment {
    Nlip.assign(
        job,
        &BusyVector::from_snapshot(snapshot),
        &snapshot.capacity,
    )
}
