//! Random instances shared by the integration tests.
#![allow(dead_code)]

use locsched::estimation::BusyVector;
use locsched::model::{CapacityProfile, Job, ServerId};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

#[derive(Debug, Clone)]
pub struct Instance {
    pub job: Job,
    pub busy: BusyVector,
    pub capacity: CapacityProfile,
}

#[derive(Debug, Clone, Copy)]
pub struct Shape {
    pub max_servers: usize,
    pub max_groups: usize,
    pub max_tasks: u64,
    pub max_mu: u32,
    pub max_busy: u64,
}

/// Up to 4 servers, 3 groups, 10 tasks per group, rates 1..=3, busy 0..=4.
pub const SMALL: Shape = Shape {
    max_servers: 4,
    max_groups: 3,
    max_tasks: 10,
    max_mu: 3,
    max_busy: 4,
};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn server_set(rng: &mut impl Rng, servers: usize) -> Vec<ServerId> {
    let size = rng.gen_range(1..=servers);
    let mut all: Vec<ServerId> = (1..=servers).collect();
    all.shuffle(rng);
    all.truncate(size);
    all
}

pub fn random_instance(rng: &mut impl Rng, shape: Shape) -> Instance {
    let servers = rng.gen_range(1..=shape.max_servers);
    let groups = rng.gen_range(1..=shape.max_groups);
    let job = Job::new(
        1,
        0,
        (0..groups).map(|_| (rng.gen_range(1..=shape.max_tasks), server_set(rng, servers))),
    )
    .expect("non-empty groups");
    let busy = BusyVector::from_slots((0..servers).map(|_| rng.gen_range(0..=shape.max_busy)).collect());
    let mut capacity = CapacityProfile::new(servers);
    capacity.insert(1, (0..servers).map(|_| rng.gen_range(1..=shape.max_mu)).collect());
    Instance { job, busy, capacity }
}

pub fn small_instance(seed: u64) -> Instance {
    random_instance(&mut rng(seed), SMALL)
}

/// A job on `servers` servers whose groups each sit on `p_min..=p_max`
/// consecutive servers, rates in `mu`, and random busy times.
pub fn cluster_instance(
    rng: &mut impl Rng,
    servers: usize,
    p: (usize, usize),
    mu: (u32, u32),
    id: u64,
) -> Instance {
    let groups = rng.gen_range(1..=6);
    let job = Job::new(
        id,
        0,
        (0..groups).map(|_| {
            let width = rng.gen_range(p.0..=p.1);
            let anchor = rng.gen_range(0..servers);
            let set = (0..width).map(|i| (anchor + i) % servers + 1).collect();
            (rng.gen_range(1..=60), set)
        }),
    )
    .expect("non-empty groups");
    let busy = BusyVector::from_slots((0..servers).map(|_| rng.gen_range(0..=20)).collect());
    let mut capacity = CapacityProfile::new(servers);
    capacity.insert(id, (0..servers).map(|_| rng.gen_range(mu.0..=mu.1)).collect());
    Instance { job, busy, capacity }
}

/// Several jobs with distinct ids arriving at slot 0 on `servers` servers.
pub fn random_jobs(rng: &mut impl Rng, servers: usize, jobs: usize, max_mu: u32) -> (Vec<Job>, CapacityProfile) {
    let mut capacity = CapacityProfile::new(servers);
    let list = (1..=jobs as u64)
        .map(|id| {
            let groups = rng.gen_range(1..=3);
            let job = Job::new(
                id,
                0,
                (0..groups).map(|_| (rng.gen_range(1..=12), server_set(rng, servers))),
            )
            .expect("non-empty groups");
            capacity.insert(id, (0..servers).map(|_| rng.gen_range(1..=max_mu)).collect());
            job
        })
        .collect();
    (list, capacity)
}
