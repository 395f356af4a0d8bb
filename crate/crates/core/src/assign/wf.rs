use serde::{Deserialize, Serialize};

use crate::estimation::{min_slots, BusyVector};
use crate::model::{Assignment, CapacityProfile, ClusterSnapshot, Job, ServerId, Share, Slot};

use super::Assigner;

/// Order in which water-filling visits the groups of a job.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub enum GroupOrder {
    /// Group index order.
    #[default]
    Index,
    MostTasksFirst,
    FewestServersFirst,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GroupParticipation {
    pub group: usize,
    /// Common level the participating servers are raised to.
    pub xi: Slot,
    /// Servers whose busy time was below `xi`, ascending.
    pub servers: Vec<ServerId>,
}

/// What water-filling did, group by group.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ParticipationTrace {
    /// In visiting order.
    pub groups: Vec<GroupParticipation>,
    /// Busy times before the first group and after each group.
    pub levels: Vec<BusyVector>,
}

#[derive(Debug, Clone, Copy, Default)]
pub struct WaterFilling {
    pub order: GroupOrder,
}

impl WaterFilling {
    pub fn run(
        &self,
        job: &Job,
        busy: &BusyVector,
        capacity: &CapacityProfile,
    ) -> (Assignment, ParticipationTrace) {
        let mut order: Vec<usize> = (0..job.groups.len()).collect();
        match self.order {
            GroupOrder::Index => {}
            GroupOrder::MostTasksFirst => {
                order.sort_by_key(|&k| std::cmp::Reverse(job.groups[k].tasks))
            }
            GroupOrder::FewestServersFirst => order.sort_by_key(|&k| job.groups[k].servers.len()),
        }

        let mut level = busy.clone();
        let mut levels = vec![level.clone()];
        let mut shares: Vec<Vec<Share>> = vec![Vec::new(); job.groups.len()];
        let mut trace = Vec::with_capacity(job.groups.len());
        let mut phi = 0;

        for k in order {
            let group = &job.groups[k];
            let rated: Vec<(Slot, u32)> = group
                .servers
                .iter()
                .map(|&m| (level.get(m), capacity.mu(m, job.id)))
                .collect();
            let xi = min_slots(group.tasks, &rated);
            let participants: Vec<(ServerId, Slot, u64)> = group
                .servers
                .iter()
                .zip(&rated)
                .filter(|(_, &(b, _))| b < xi)
                .map(|(&m, &(b, mu))| (m, xi - b, u64::from(mu)))
                .collect();

            let mut left = group.tasks;
            let last = participants.len() - 1;
            for (i, &(m, slots, mu)) in participants.iter().enumerate() {
                let tasks = if i == last {
                    left
                } else {
                    left.min(slots * mu)
                };
                left -= tasks;
                shares[k].push(Share {
                    server: m,
                    slots,
                    tasks,
                });
            }
            for &m in &group.servers {
                level.set(m, level.get(m).max(xi));
            }
            phi = phi.max(xi);
            trace.push(GroupParticipation {
                group: group.index,
                xi,
                servers: participants.iter().map(|p| p.0).collect(),
            });
            levels.push(level.clone());
        }

        (
            Assignment {
                job: job.id,
                groups: shares,
                phi,
            },
            ParticipationTrace {
                groups: trace,
                levels,
            },
        )
    }
}

impl Assigner for WaterFilling {
    fn name(&self) -> &'static str {
        "wf"
    }

    fn assign(&self, job: &Job, busy: &BusyVector, capacity: &CapacityProfile) -> Assignment {
        self.run(job, busy, capacity).0
    }
}

pub fn wf_assign(job: &Job, snapshot: &ClusterSnapshot) -> (Assignment, ParticipationTrace) {
    WaterFilling::default().run(
        job,
        &BusyVector::from_snapshot(snapshot),
        &snapshot.capacity,
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::assign::WorstCaseInstance;
    use crate::model::validate_assignment;

    #[test]
    fn instance_a() {
        let job = Job::new(1, 0, vec![(3, vec![1, 2]), (2, vec![2, 3])]).unwrap();
        let cap = CapacityProfile::uniform(3, 1);
        let busy = BusyVector::from_slots(vec![0, 1, 0]);
        let (a, trace) = WaterFilling::default().run(&job, &busy, &cap);
        assert_eq!(trace.groups[0].xi, 2);
        assert_eq!(trace.groups[0].servers, vec![1, 2]);
        assert_eq!(trace.groups[1].xi, 2);
        assert_eq!(trace.groups[1].servers, vec![3]);
        assert_eq!(a.phi, 2);
        validate_assignment(&job, &cap, &a).unwrap();
    }

    #[test]
    fn worst_case_k3() {
        let t = WorstCaseInstance::new(2, 3);
        let (a, trace) = WaterFilling::default().run(&t.job, &t.busy, &t.capacity);
        assert_eq!(a.phi, 6);
        assert_eq!(
            trace.groups.iter().map(|g| g.xi).collect::<Vec<_>>(),
            vec![2, 4, 6]
        );
    }

    #[test]
    fn tall_column_stays_dry() {
        let job = Job::new(1, 0, vec![(3, vec![1, 2])]).unwrap();
        let cap = CapacityProfile::uniform(2, 1);
        let busy = BusyVector::from_slots(vec![0, 5]);
        let (a, trace) = WaterFilling::default().run(&job, &busy, &cap);
        assert_eq!(trace.groups[0].xi, 3);
        assert_eq!(trace.groups[0].servers, vec![1]);
        assert_eq!(
            a.groups[0],
            vec![Share {
                server: 1,
                slots: 3,
                tasks: 3
            }]
        );
        assert_eq!(trace.levels[1].get(2), 5);
    }

    #[test]
    fn remainder_lands_on_last_participant() {
        let job = Job::new(1, 0, vec![(4, vec![1, 2, 3])]).unwrap();
        let cap = CapacityProfile::uniform(3, 1);
        let (a, _) = WaterFilling::default().run(&job, &BusyVector::zeros(3), &cap);
        let tasks: Vec<u64> = a.groups[0].iter().map(|s| s.tasks).collect();
        assert_eq!(tasks, vec![2, 2, 0]);
        assert_eq!(a.phi, 2);
        validate_assignment(&job, &cap, &a).unwrap();
    }

    #[test]
    fn group_order_knob() {
        let job = Job::new(1, 0, vec![(1, vec![1, 2]), (4, vec![2])]).unwrap();
        let cap = CapacityProfile::uniform(2, 1);
        let busy = BusyVector::zeros(2);
        let index = WaterFilling::default().assign(&job, &busy, &cap);
        let largest = WaterFilling {
            order: GroupOrder::MostTasksFirst,
        }
        .assign(&job, &busy, &cap);
        assert_eq!(index.phi, 5);
        assert_eq!(largest.phi, 4);
        validate_assignment(&job, &cap, &largest).unwrap();
    }
}
