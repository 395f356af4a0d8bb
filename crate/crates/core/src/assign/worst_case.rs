use crate::estimation::BusyVector;
use crate::model::{CapacityProfile, Job};

/// Worst case for water-filling: `K` groups on nested server sets, unit
/// rates and idle servers.
///
/// Group `k` (1-based) is available on servers `1..=s_k` with
/// `s_k = theta + theta^2 + ... + theta^(K-k+1)` and holds `theta * s_k`
/// tasks. Water-filling spreads each group over all of its servers and ends
/// at `K * theta`.
#[derive(Debug, Clone)]
pub struct WorstCaseInstance {
    pub theta: u64,
    pub groups: usize,
    pub job: Job,
    pub busy: BusyVector,
    pub capacity: CapacityProfile,
}

impl WorstCaseInstance {
    pub fn new(theta: u64, groups: usize) -> Self {
        assert!(theta >= 2, "theta must be at least 2");
        assert!(groups >= 1, "at least one group");
        let sizes: Vec<u64> = (1..=groups)
            .map(|k| (1..=(groups - k + 1) as u32).map(|e| theta.pow(e)).sum())
            .collect();
        let servers = sizes[0] as usize;
        let job = Job::new(
            0,
            0,
            sizes
                .iter()
                .map(|&s| (theta * s, (1..=s as usize).collect())),
        )
        .expect("well-formed construction");
        WorstCaseInstance {
            theta,
            groups,
            job,
            busy: BusyVector::zeros(servers),
            capacity: CapacityProfile::uniform(servers, 1),
        }
    }

    pub fn servers(&self) -> usize {
        self.busy.servers()
    }

    /// Completion time water-filling reaches on this instance.
    pub fn water_filling_phi(&self) -> u64 {
        self.groups as u64 * self.theta
    }
}
