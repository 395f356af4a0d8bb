//! Data-locality-aware task assignment and job reordering.
//!
//! A job is a set of task groups; each group may only run on the servers
//! holding its input. When a job arrives, an [`assign::Assigner`] spreads its
//! tasks over those servers given how long every server's queue already is,
//! minimizing the estimated completion time of the job. [`reorder`] goes one
//! step further and reschedules all outstanding jobs shortest first.
//!
//! [`sim`] replays a workload slot by slot under any of the algorithms, and
//! [`report`] runs grids of simulations and writes per-job and summary
//! results.
//!
//! ```
//! use locsched::assign::{Assigner, Obta, WaterFilling};
//! use locsched::estimation::BusyVector;
//! use locsched::model::{CapacityProfile, Job};
//!
//! let job = Job::new(1, 0, [(5, vec![1, 2]), (3, vec![2, 3])]).unwrap();
//! let busy = BusyVector::from_slots(vec![2, 0, 1]);
//! let capacity = CapacityProfile::uniform(3, 2);
//!
//! let best = Obta.assign(&job, &busy, &capacity);
//! let quick = WaterFilling::default().assign(&job, &busy, &capacity);
//! assert!(best.phi <= quick.phi);
//! ```

pub mod assign;
pub mod estimation;
mod flow;
pub mod ilp;
pub mod model;
pub mod reorder;
pub mod report;
pub mod sim;
pub mod workload;

#[cfg(doctest)]
#[doc = include_str!("../../../book/src/introduction.md")]
mod book_introduction {}

#[cfg(doctest)]
#[doc = include_str!("../../../book/src/model.md")]
mod book_model {}

#[cfg(doctest)]
#[doc = include_str!("../../../book/src/assignment.md")]
mod book_assignment {}

#[cfg(doctest)]
#[doc = include_str!("../../../book/src/reordering.md")]
mod book_reordering {}

#[cfg(doctest)]
#[doc = include_str!("../../../book/src/simulation.md")]
mod book_simulation {}

#[cfg(doctest)]
#[doc = include_str!("../../../book/src/experiments.md")]
mod book_experiments {}
