//! Exact solver for the slot-allocation program of one job.
//!
//! For a fixed completion time `phi`, server `m` can give the job
//! `max(phi - b_m, 0)` slots, and each slot it gives to group `k` processes
//! `mu_m` of that group's tasks. The question is whether integer slot counts
//! `n[k][m]` exist that cover every group. Within one interval produced by
//! [`crate::estimation::subranges`] the set of servers with spare slots is
//! fixed, so capacity is linear in `phi` and feasibility is monotone.
//!
//! Feasibility at a fixed `phi` is decided by branch-and-bound. Servers
//! sharing a rate are interchangeable, so the search branches on how many
//! slots of each rate class a group receives and leaves the choice of
//! individual servers to a max-flow, which is exact once every class count
//! is fixed. Each branch is pruned by the task-unit max-flow relaxation.
//! With a single rate there is nothing to branch on and the check is one
//! flow.

use std::cell::Cell;
use std::collections::{HashMap, VecDeque};
use std::ops::Range;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::estimation::BusyVector;
use crate::flow::FlowNetwork;
use crate::model::{Assignment, CapacityProfile, Job, ServerId, Share, Slot};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SubServer {
    pub id: ServerId,
    pub busy: Slot,
    pub mu: u32,
    /// Whether the server has `phi - busy` spare slots throughout the range;
    /// inactive servers contribute nothing.
    pub active: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SubGroup {
    pub demand: u64,
    /// Indices into [`LinearSubproblem::servers`], ascending by server id.
    pub eligible: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LinearSubproblem {
    pub groups: Vec<SubGroup>,
    pub servers: Vec<SubServer>,
    pub phi_range: Range<Slot>,
}

impl LinearSubproblem {
    /// The program of `job` restricted to `phi_range`. A server is active
    /// when its busy time does not exceed the start of the range.
    pub fn for_job(
        job: &Job,
        busy: &BusyVector,
        capacity: &CapacityProfile,
        phi_range: Range<Slot>,
    ) -> Self {
        let ids = job.servers();
        let servers: Vec<SubServer> = ids
            .iter()
            .map(|&m| SubServer {
                id: m,
                busy: busy.get(m),
                mu: capacity.mu(m, job.id),
                active: busy.get(m) <= phi_range.start,
            })
            .collect();
        let groups = job
            .groups
            .iter()
            .map(|g| SubGroup {
                demand: g.tasks,
                eligible: g
                    .servers
                    .iter()
                    .map(|m| ids.binary_search(m).expect("server of the job"))
                    .collect(),
            })
            .collect();
        LinearSubproblem {
            groups,
            servers,
            phi_range,
        }
    }

    fn capacities(&self, phi: Slot) -> Vec<u64> {
        self.servers
            .iter()
            .map(|s| {
                if s.active {
                    phi.saturating_sub(s.busy)
                } else {
                    0
                }
            })
            .collect()
    }
}

/// Slot and task counts per group, aligned with each group's `eligible`
/// list.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SlotPlan {
    pub phi: Slot,
    pub slots: Vec<Vec<Slot>>,
    pub tasks: Vec<Vec<u64>>,
}

impl SlotPlan {
    pub fn to_assignment(&self, job: &Job, problem: &LinearSubproblem) -> Assignment {
        let groups = problem
            .groups
            .iter()
            .zip(self.slots.iter().zip(&self.tasks))
            .map(|(group, (slots, tasks))| {
                group
                    .eligible
                    .iter()
                    .zip(slots.iter().zip(tasks))
                    .filter(|&(_, (&n, &t))| n > 0 || t > 0)
                    .map(|(&j, (&n, &t))| Share {
                        server: problem.servers[j].id,
                        slots: n,
                        tasks: t,
                    })
                    .collect()
            })
            .collect();
        Assignment {
            job: job.id,
            groups,
            phi: self.phi,
        }
    }
}

/// Exact feasibility of the program at `phi` with a witness.
///
/// Of all witnesses, this prefers one that leaves the servers' busy times
/// as level as possible, which matters to the jobs queued after this one.
pub fn feasible_at(problem: &LinearSubproblem, phi: Slot) -> Option<Vec<Vec<Slot>>> {
    witness(problem, phi).map(|plan| plan.slots)
}

fn witness(problem: &LinearSubproblem, phi: Slot) -> Option<SlotPlan> {
    let state = Residual::new(problem, phi);
    let mu: Vec<u64> = problem.servers.iter().map(|s| u64::from(s.mu)).collect();
    let busy: Vec<Slot> = problem.servers.iter().map(|s| s.busy).collect();
    let mut commits = exact(&mu, &state)?;

    // First choice: level the job's tasks over all its servers at once,
    // which is valid whenever rounding each group's share up to whole slots
    // still fits every server.
    let unit_caps: Vec<u64> = state.caps.iter().zip(&mu).map(|(c, m)| c * m).collect();
    let tasks = level_fill(&busy, &mu, &unit_caps, &state.rem, &state.open);
    let mut used = vec![0u64; mu.len()];
    for row in &tasks {
        for &(j, t) in row {
            used[j] += t.div_ceil(mu[j]);
        }
    }
    if used.iter().zip(&state.caps).all(|(u, c)| u <= c) {
        return Some(plan_from(problem, phi, &tasks, |j, t| t.div_ceil(mu[j])));
    }

    // Otherwise level each rate's committed slots separately.
    trim_cover(&state, &mut commits);
    let mut rates: Vec<u64> = commits.iter().map(|c| c.rate).collect();
    rates.sort_unstable();
    rates.dedup();
    let ones = vec![1; mu.len()];
    let mut placed: Vec<Vec<(usize, u64)>> = vec![Vec::new(); problem.groups.len()];
    for rate in rates {
        let owed: Vec<u64> = (0..problem.groups.len())
            .map(|k| {
                commits
                    .iter()
                    .filter(|c| c.group == k && c.rate == rate)
                    .map(|c| c.slots)
                    .sum()
            })
            .collect();
        let edges: Vec<Vec<usize>> = state
            .open
            .iter()
            .map(|servers| servers.iter().copied().filter(|&j| mu[j] == rate).collect())
            .collect();
        for (k, row) in level_fill(&busy, &ones, &state.caps, &owed, &edges)
            .into_iter()
            .enumerate()
        {
            placed[k].extend(row);
        }
    }
    // Hand out tasks slot by slot, one slot per server at a time, so a
    // group's partial slot lands where it was least needed.
    let mut plan = plan_from(problem, phi, &placed, |_, n| n);
    for (k, group) in problem.groups.iter().enumerate() {
        let mut left = group.demand;
        let mut given: Vec<u64> = vec![0; group.eligible.len()];
        let mut round = 0;
        while left > 0 {
            for (i, &j) in group.eligible.iter().enumerate() {
                if plan.slots[k][i] > round && left > 0 {
                    let t = mu[j].min(left);
                    given[i] += t;
                    left -= t;
                }
            }
            round += 1;
        }
        plan.tasks[k] = given;
    }
    Some(plan)
}

/// Builds a plan from per-group `(server, amount)` lists, where `slots`
/// maps a server and amount to slot counts.
fn plan_from(
    problem: &LinearSubproblem,
    phi: Slot,
    placed: &[Vec<(usize, u64)>],
    slots: impl Fn(usize, u64) -> u64,
) -> SlotPlan {
    let mut plan = SlotPlan {
        phi,
        slots: problem
            .groups
            .iter()
            .map(|g| vec![0; g.eligible.len()])
            .collect(),
        tasks: problem
            .groups
            .iter()
            .map(|g| vec![0; g.eligible.len()])
            .collect(),
    };
    for (k, row) in placed.iter().enumerate() {
        for &(j, amount) in row {
            let pos = problem.groups[k]
                .eligible
                .iter()
                .position(|&e| e == j)
                .expect("placed along an eligible edge");
            plan.slots[k][pos] += slots(j, amount);
            plan.tasks[k][pos] += amount;
        }
    }
    plan
}

/// Places `owed[k]` units of every group on the servers in `edges[k]`,
/// always on the reachable server whose level would be lowest, where
/// reachable allows shifting earlier units between servers. A server at
/// `busy` holding `x` units at `rate` per slot sits at level
/// `busy + ceil(x / rate)`. Cheapest-first placement keeps the levels
/// lexicographically smallest from the top. `caps` are in units.
fn level_fill(
    busy: &[Slot],
    rate: &[u64],
    caps: &[u64],
    owed: &[u64],
    edges: &[Vec<usize>],
) -> Vec<Vec<(usize, u64)>> {
    let groups = owed.len();
    let servers = caps.len();
    let mut flow: Vec<HashMap<usize, u64>> = vec![HashMap::new(); groups];
    let mut load = vec![0u64; servers];
    let mut left = owed.to_vec();
    // Groups currently holding units on each server.
    let mut holders: Vec<Vec<usize>> = vec![Vec::new(); servers];

    while left.iter().any(|&l| l > 0) {
        // Breadth-first over group -> server -> holder group -> server ...
        let mut from_group: Vec<Option<usize>> = vec![None; servers];
        let mut from_server: Vec<Option<usize>> = vec![None; groups];
        let mut seen_group = vec![false; groups];
        let mut queue: VecDeque<usize> = (0..groups)
            .filter(|&k| left[k] > 0)
            .inspect(|&k| seen_group[k] = true)
            .collect();
        let mut best: Option<(Slot, usize)> = None;
        while let Some(k) = queue.pop_front() {
            for &j in &edges[k] {
                if from_group[j].is_some() {
                    continue;
                }
                from_group[j] = Some(k);
                if load[j] < caps[j] {
                    let level = (busy[j] + (load[j] + 1).div_ceil(rate[j]), j);
                    if best.is_none_or(|b| level < b) {
                        best = Some(level);
                    }
                }
                for &h in &holders[j] {
                    if !seen_group[h] {
                        seen_group[h] = true;
                        from_server[h] = Some(j);
                        queue.push_back(h);
                    }
                }
            }
        }
        let (_, end) = best.expect("owed units fit under the capacities");

        // Push as much as fits before the end server's level rises.
        let used = load[end] % rate[end];
        let mut amount = (if used == 0 {
            rate[end]
        } else {
            rate[end] - used
        })
        .min(caps[end] - load[end]);
        let mut j = end;
        let start = loop {
            let k = from_group[j].expect("reached server has a parent");
            match from_server[k] {
                None => break k,
                Some(prev) => {
                    amount = amount.min(flow[k][&prev]);
                    j = prev;
                }
            }
        };
        amount = amount.min(left[start]);

        load[end] += amount;
        let mut j = end;
        loop {
            let k = from_group[j].expect("reached server has a parent");
            *flow[k].entry(j).or_insert(0) += amount;
            if !holders[j].contains(&k) {
                holders[j].push(k);
            }
            match from_server[k] {
                None => {
                    left[k] -= amount;
                    break;
                }
                Some(prev) => {
                    let f = flow[k].get_mut(&prev).expect("shifted units exist");
                    *f -= amount;
                    if *f == 0 {
                        flow[k].remove(&prev);
                        holders[prev].retain(|&h| h != k);
                    }
                    j = prev;
                }
            }
        }
    }
    flow.into_iter()
        .map(|row| {
            let mut row: Vec<(usize, u64)> = row.into_iter().collect();
            row.sort_unstable();
            row
        })
        .collect()
}

/// Drops slots a group does not need to cover its tasks, larger rates
/// first.
fn trim_cover(state: &Residual, commits: &mut [Commit]) {
    let groups = state.rem.len();
    for k in 0..groups {
        let mut mine: Vec<usize> = (0..commits.len())
            .filter(|&i| commits[i].group == k)
            .collect();
        mine.sort_by_key(|&i| std::cmp::Reverse(commits[i].rate));
        let mut covered: u64 = mine
            .iter()
            .map(|&i| commits[i].slots * commits[i].rate)
            .sum();
        for &i in &mine {
            let rate = commits[i].rate;
            let spare = (covered - state.rem[k].min(covered)) / rate;
            let cut = spare.min(commits[i].slots);
            commits[i].slots -= cut;
            covered -= cut * rate;
        }
    }
}

/// Decision-only variant of [`feasible_at`].
pub fn is_feasible(problem: &LinearSubproblem, phi: Slot) -> bool {
    let mu: Vec<u64> = problem.servers.iter().map(|s| u64::from(s.mu)).collect();
    exact(&mu, &Residual::new(problem, phi)).is_some()
}

/// Smallest feasible `phi` in the problem's range with its witness, or
/// `None` when nothing in the range is feasible.
///
/// Probes at doubling distances from the start of the range, then bisects
/// between the last infeasible and the first feasible probe.
pub fn solve_subrange(problem: &LinearSubproblem) -> Option<SlotPlan> {
    let Range { start, end } = problem.phi_range.clone();
    if start >= end {
        return None;
    }
    let mut below = None;
    let mut step = 0;
    let mut hi = loop {
        let probe = (start + step).min(end - 1);
        if is_feasible(problem, probe) {
            break probe;
        }
        if probe == end - 1 {
            return None;
        }
        below = Some(probe);
        step = step * 2 + 1;
    };
    let mut lo = below.map_or(start, |b| b + 1);
    while lo < hi {
        let mid = lo + (hi - lo) / 2;
        if is_feasible(problem, mid) {
            hi = mid;
        } else {
            lo = mid + 1;
        }
    }
    Some(witness(problem, lo).expect("feasibility checked"))
}

/// What is left to decide: spare slots per server, uncovered tasks per group
/// and the servers each group may still use.
#[derive(Debug, Clone)]
struct Residual {
    caps: Vec<u64>,
    rem: Vec<u64>,
    open: Vec<Vec<usize>>,
}

impl Residual {
    fn new(problem: &LinearSubproblem, phi: Slot) -> Self {
        Residual {
            caps: problem.capacities(phi),
            rem: problem.groups.iter().map(|g| g.demand).collect(),
            open: problem.groups.iter().map(|g| g.eligible.clone()).collect(),
        }
    }
}

/// Slots of one rate class committed to one group.
#[derive(Debug, Clone, Copy)]
struct Commit {
    group: usize,
    rate: u64,
    slots: u64,
}

/// Task-unit max flow: every group sends its uncovered tasks to open
/// servers, except that committed rate classes receive exactly their
/// committed slots and nothing more. Returns, for each group and rate, the
/// tasks routed to that rate's servers.
///
/// Servers of one rate are interchangeable, and with every group committed
/// each class is a separate network whose capacities are multiples of its
/// rate, so the flow is then exact in whole slots.
fn relax(mu: &[u64], state: &Residual, commits: &[Commit]) -> Option<Vec<HashMap<u64, u64>>> {
    let groups = state.rem.len();
    let servers = state.caps.len();
    let source = groups + servers + commits.len();
    let sink = source + 1;
    let mut net = FlowNetwork::new(sink + 1);
    let mut wanted = 0;
    for (j, &c) in state.caps.iter().enumerate() {
        if c > 0 {
            net.add_edge(groups + j, sink, c * mu[j]);
        }
    }
    let mut handles = Vec::new();
    for (k, open) in state.open.iter().enumerate() {
        let committed: u64 = commits
            .iter()
            .filter(|c| c.group == k)
            .map(|c| c.slots * c.rate)
            .sum();
        let free = state.rem[k].saturating_sub(committed);
        if free == 0 {
            continue;
        }
        net.add_edge(source, k, free);
        wanted += free;
        for &j in open {
            let closed = commits.iter().any(|c| c.group == k && c.rate == mu[j]);
            if !closed && state.caps[j] > 0 {
                handles.push((k, mu[j], net.add_edge(k, groups + j, free)));
            }
        }
    }
    for (i, c) in commits.iter().enumerate() {
        let tasks = c.slots * c.rate;
        if tasks == 0 {
            continue;
        }
        let node = groups + servers + i;
        net.add_edge(source, node, tasks);
        wanted += tasks;
        for &j in &state.open[c.group] {
            if mu[j] == c.rate && state.caps[j] > 0 {
                net.add_edge(node, groups + j, tasks);
            }
        }
    }
    if net.max_flow(source, sink) < wanted {
        return None;
    }
    let mut flows = vec![HashMap::new(); groups];
    for (k, rate, h) in handles {
        *flows[k].entry(rate).or_insert(0) += net.flow(h);
    }
    Some(flows)
}

/// Branch nodes one feasibility check may visit. Problems small enough to
/// check exhaustively never come close; on large ones a check that runs out
/// reports infeasible, so the solver may settle on a slightly larger `phi`
/// but never returns an invalid plan.
pub const BRANCH_LIMIT: usize = 2_000;

/// Exact feasibility of a residual problem.
///
/// Branches on how many slots of each rate class every group receives; only
/// the last class of a group is derived, as the fewest slots covering what
/// the other classes leave. Each branch is pruned with [`relax`].
fn exact(mu: &[u64], state: &Residual) -> Option<Vec<Commit>> {
    let flows = relax(mu, state, &[])?;
    let budget = Cell::new(BRANCH_LIMIT);
    let mut vars = Vec::new();
    for (k, open) in state.open.iter().enumerate() {
        if state.rem[k] == 0 {
            continue;
        }
        let mut rates: Vec<u64> = open
            .iter()
            .filter(|&&j| state.caps[j] > 0)
            .map(|&j| mu[j])
            .collect();
        rates.sort_unstable();
        rates.dedup();
        if rates.is_empty() {
            return None;
        }
        let last = rates.len() - 1;
        vars.extend(
            rates
                .into_iter()
                .enumerate()
                .map(|(i, rate)| (k, rate, i == last)),
        );
    }

    // Rounding the relaxed flow up to whole slots often fits already.
    let rounded: Vec<Commit> = vars
        .iter()
        .map(|&(k, rate, _)| Commit {
            group: k,
            rate,
            slots: flows[k].get(&rate).copied().unwrap_or(0).div_ceil(rate),
        })
        .collect();
    if relax(mu, state, &rounded).is_some() {
        return Some(rounded);
    }

    let mut commits = Vec::with_capacity(vars.len());
    let found = branch(mu, state, &vars, &mut commits, &budget);
    found.then_some(commits)
}

fn branch(
    mu: &[u64],
    state: &Residual,
    vars: &[(usize, u64, bool)],
    commits: &mut Vec<Commit>,
    budget: &Cell<usize>,
) -> bool {
    let Some(&(k, rate, last)) = vars.get(commits.len()) else {
        return true;
    };
    if budget.get() == 0 {
        return false;
    }
    budget.set(budget.get() - 1);
    let covered: u64 = commits
        .iter()
        .filter(|c| c.group == k)
        .map(|c| c.slots * c.rate)
        .sum();
    let needed = state.rem[k].saturating_sub(covered).div_ceil(rate);
    let room: u64 = state.open[k]
        .iter()
        .filter(|&&j| mu[j] == rate)
        .map(|&j| state.caps[j])
        .sum();

    let attempt = |commits: &mut Vec<Commit>, slots: u64| -> (bool, bool) {
        commits.push(Commit {
            group: k,
            rate,
            slots,
        });
        let relaxable = relax(mu, state, commits);
        let found = match relaxable {
            Some(_) => branch(mu, state, vars, commits, budget),
            None => false,
        };
        if !found {
            commits.pop();
        }
        (relaxable.is_some(), found)
    };

    if last {
        return needed <= room && attempt(commits, needed).1;
    }
    let top = needed.min(room);
    // Relaxable counts form an interval; find it around the relaxed flow.
    let Some(flows) = relax(mu, state, commits) else {
        return false;
    };
    let guess = flows[k].get(&rate).copied().unwrap_or(0);
    let mut anchor = None;
    for n in [guess / rate, guess.div_ceil(rate)] {
        let n = n.min(top);
        commits.push(Commit {
            group: k,
            rate,
            slots: n,
        });
        let ok = relax(mu, state, commits).is_some();
        commits.pop();
        if ok {
            anchor = Some(n);
            break;
        }
    }
    let Some(anchor) = anchor else {
        return false;
    };
    // Walk outwards from the anchor, nearest counts first.
    let (mut down, mut up) = (Some(anchor), anchor + 1);
    let (mut down_open, mut up_open) = (true, true);
    loop {
        if down_open {
            match down {
                Some(n) => {
                    let (relaxable, found) = attempt(commits, n);
                    if found {
                        return true;
                    }
                    down_open = relaxable;
                    down = n.checked_sub(1);
                }
                None => down_open = false,
            }
        }
        if up_open {
            if up > top {
                up_open = false;
            } else {
                let (relaxable, found) = attempt(commits, up);
                if found {
                    return true;
                }
                up_open = relaxable;
                up += 1;
            }
        }
        if !down_open && !up_open {
            return false;
        }
    }
}

/// How the cost of a concrete task placement is measured.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum CostModel {
    /// Each group on a server rounds up to whole slots on its own, as in the
    /// slot-allocation program.
    PerGroupSlots,
    /// All of the job's tasks on a server share slots, as the queues drain.
    Aggregated,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum OracleError {
    #[error("instance too large for exhaustive search ({placements} placements > {limit})")]
    TooLarge { placements: u128, limit: u128 },
}

/// Upper limit on the number of task placements [`brute_force_opt`] will
/// enumerate.
pub const BRUTE_FORCE_LIMIT: u128 = 5_000_000;

fn binomial(n: u64, k: u64) -> u128 {
    let k = k.min(n - k);
    (0..k).fold(1u128, |acc, i| acc * u128::from(n - i) / u128::from(i + 1))
}

/// Exact minimum makespan over every way of distributing each group's tasks
/// among its available servers, measured with `model`.
///
/// Ties keep the first placement in enumeration order (servers ascending,
/// earlier servers taking as many tasks as possible).
pub fn brute_force_opt(
    job: &Job,
    busy: &BusyVector,
    capacity: &CapacityProfile,
    model: CostModel,
) -> Result<(Slot, Assignment), OracleError> {
    let placements = job.groups.iter().fold(1u128, |acc, g| {
        let s = g.servers.len() as u64;
        acc.saturating_mul(binomial(g.tasks + s - 1, s - 1))
    });
    if placements > BRUTE_FORCE_LIMIT {
        return Err(OracleError::TooLarge {
            placements,
            limit: BRUTE_FORCE_LIMIT,
        });
    }
    let servers = job.servers();
    let index = |m: ServerId| servers.binary_search(&m).unwrap();
    let mut enumerator = Enumerator {
        job,
        busy: servers.iter().map(|&m| busy.get(m)).collect(),
        mu: servers
            .iter()
            .map(|&m| u64::from(capacity.mu(m, job.id)))
            .collect(),
        eligible: job
            .groups
            .iter()
            .map(|g| g.servers.iter().map(|&m| index(m)).collect())
            .collect(),
        counts: job.groups.iter().map(|_| vec![0; servers.len()]).collect(),
        model,
        best: Slot::MAX,
        best_counts: Vec::new(),
    };
    enumerator.group(0);

    let groups = enumerator
        .best_counts
        .iter()
        .map(|per_server| {
            per_server
                .iter()
                .enumerate()
                .filter(|&(_, &t)| t > 0)
                .map(|(j, &t)| Share {
                    server: servers[j],
                    slots: t.div_ceil(enumerator.mu[j]),
                    tasks: t,
                })
                .collect()
        })
        .collect();
    let phi = enumerator.best;
    Ok((
        phi,
        Assignment {
            job: job.id,
            groups,
            phi,
        },
    ))
}

struct Enumerator<'a> {
    job: &'a Job,
    busy: Vec<Slot>,
    mu: Vec<u64>,
    eligible: Vec<Vec<usize>>,
    counts: Vec<Vec<u64>>,
    model: CostModel,
    best: Slot,
    best_counts: Vec<Vec<u64>>,
}

impl Enumerator<'_> {
    fn cost(&self) -> Slot {
        (0..self.busy.len())
            .filter_map(|j| {
                let used = match self.model {
                    CostModel::PerGroupSlots => {
                        self.counts.iter().map(|c| c[j].div_ceil(self.mu[j])).sum()
                    }
                    CostModel::Aggregated => {
                        let tasks: u64 = self.counts.iter().map(|c| c[j]).sum();
                        tasks.div_ceil(self.mu[j])
                    }
                };
                (used > 0).then(|| self.busy[j] + used)
            })
            .max()
            .unwrap_or(0)
    }

    fn group(&mut self, k: usize) {
        if k == self.job.groups.len() {
            let cost = self.cost();
            if cost < self.best {
                self.best = cost;
                self.best_counts = self.counts.clone();
            }
            return;
        }
        self.spread(k, 0, self.job.groups[k].tasks);
    }

    fn spread(&mut self, k: usize, pos: usize, left: u64) {
        // Costs only grow as tasks are added.
        if self.cost() >= self.best {
            return;
        }
        let j = self.eligible[k][pos];
        if pos + 1 == self.eligible[k].len() {
            self.counts[k][j] = left;
            self.group(k + 1);
            self.counts[k][j] = 0;
            return;
        }
        for t in (0..=left).rev() {
            self.counts[k][j] = t;
            self.spread(k, pos + 1, left - t);
        }
        self.counts[k][j] = 0;
    }
}
