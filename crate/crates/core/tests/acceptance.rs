//! End-to-end acceptance run. Prints one PASS/FAIL line per criterion and
//! fails if any criterion fails. Run with `-- --nocapture` to see the lines
//! when everything passes.

mod common;

use std::time::Instant;

use common::{cluster_instance, random_jobs, rng, small_instance};
use locsched::assign::{Assigner, Nlip, Obta, ReplicaDeletion, WorstCaseInstance, WaterFilling};
use locsched::estimation::{busy_time, phi_bounds};
use locsched::ilp::{brute_force_opt, CostModel};
use locsched::model::{CapacityProfile, QueueEntry, Slot};
use locsched::reorder::ocwf_reorder;
use locsched::report::{run_cells, summarize, ExperimentConfig, Summary};
use locsched::sim::{advance_slot, Algorithm, SimState};
use rand::Rng;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome {
        pass,
        detail: detail.into(),
    }
}

const SMALL_INSTANCES: u64 = 1000;

/// Optimal completion of the small oracle instances, with their bounds and
/// the exact assigners' answers.
struct SmallRun {
    obta: Vec<Slot>,
    nlip: Vec<Slot>,
    wf: Vec<Slot>,
    opt: Vec<Slot>,
    lo: Vec<Slot>,
    hi: Vec<Slot>,
    groups: Vec<u64>,
}

fn small_run() -> SmallRun {
    let mut run = SmallRun {
        obta: vec![],
        nlip: vec![],
        wf: vec![],
        opt: vec![],
        lo: vec![],
        hi: vec![],
        groups: vec![],
    };
    for seed in 0..SMALL_INSTANCES {
        let i = small_instance(seed);
        let (opt, _) = brute_force_opt(&i.job, &i.busy, &i.capacity, CostModel::PerGroupSlots)
            .expect("small enough for exhaustive search");
        let bounds = phi_bounds(&i.job, &i.busy, &i.capacity);
        run.obta.push(Obta.assign(&i.job, &i.busy, &i.capacity).phi);
        run.nlip.push(Nlip.assign(&i.job, &i.busy, &i.capacity).phi);
        run.wf.push(WaterFilling::default().assign(&i.job, &i.busy, &i.capacity).phi);
        run.opt.push(opt);
        run.lo.push(bounds.phi_lo);
        run.hi.push(bounds.phi_hi);
        run.groups.push(i.job.groups.len() as u64);
    }
    run
}

fn exact_optimality(run: &SmallRun) -> Outcome {
    let bad = (0..run.opt.len())
        .filter(|&i| run.obta[i] != run.opt[i] || run.nlip[i] != run.opt[i])
        .count();
    outcome(bad == 0, format!("{bad} of {} instances disagree with brute force", run.opt.len()))
}

fn bounds_soundness(run: &SmallRun) -> Outcome {
    let bad = (0..run.opt.len())
        .filter(|&i| !(run.lo[i] <= run.opt[i] && run.opt[i] <= run.hi[i]))
        .count();
    outcome(bad == 0, format!("{bad} of {} instances outside [lo, hi]", run.opt.len()))
}

fn worst_case_tightness() -> Outcome {
    let mut pass = true;
    let mut parts = Vec::new();
    for groups in [2, 3] {
        for theta in [2, 3, 4] {
            let t = WorstCaseInstance::new(theta, groups);
            let wf = WaterFilling::default().assign(&t.job, &t.busy, &t.capacity).phi;
            let opt = Obta.assign(&t.job, &t.busy, &t.capacity).phi;
            let ok = wf == groups as u64 * theta && opt == theta + 2;
            pass &= ok;
            parts.push(format!(
                "K={groups} theta={theta}: wf {wf} (want {}), opt {opt} (want {}){}",
                groups as u64 * theta,
                theta + 2,
                if ok { "" } else { " MISMATCH" }
            ));
        }
    }
    outcome(pass, parts.join("; "))
}

fn approximation_bound(run: &SmallRun) -> Outcome {
    let bad = (0..run.opt.len())
        .filter(|&i| run.wf[i] > run.groups[i] * run.opt[i])
        .count();
    let worst = (0..run.opt.len())
        .filter(|&i| run.opt[i] > 0)
        .map(|i| run.wf[i] as f64 / run.opt[i] as f64)
        .fold(1.0, f64::max);
    outcome(bad == 0, format!("{bad} violations, worst wf/opt ratio {worst:.2}"))
}

fn early_exit_equivalence() -> Outcome {
    let scenarios = 200;
    let (mut differ, mut more_calls, mut reduced) = (0, 0, 0);
    for seed in 0..scenarios {
        let mut r = rng(10_000 + seed);
        let servers = r.gen_range(2..=8);
        let count = r.gen_range(2..=10);
        let (jobs, capacity) = random_jobs(&mut r, servers, count, 3);
        let fast = ocwf_reorder(&jobs, &capacity, true);
        let slow = ocwf_reorder(&jobs, &capacity, false);
        if fast.order != slow.order || fast.assignments != slow.assignments {
            differ += 1;
        }
        if fast.wf_calls > slow.wf_calls {
            more_calls += 1;
        }
        if fast.wf_calls < slow.wf_calls {
            reduced += 1;
        }
    }
    let pass = differ == 0 && more_calls == 0 && 2 * reduced >= scenarios;
    outcome(
        pass,
        format!(
            "{differ} differing, {more_calls} with more calls, {reduced} of {scenarios} with fewer calls"
        ),
    )
}

fn deletion_vs_water_filling() -> Outcome {
    let instances = 500;
    let (mut rd, mut wf) = (0.0, 0.0);
    for seed in 0..instances {
        let mut r = rng(20_000 + seed);
        let i = cluster_instance(&mut r, 20, (8, 12), (3, 5), 1);
        rd += ReplicaDeletion::new(seed).assign(&i.job, &i.busy, &i.capacity).phi as f64;
        wf += WaterFilling::default().assign(&i.job, &i.busy, &i.capacity).phi as f64;
    }
    let (rd, wf) = (rd / instances as f64, wf / instances as f64);
    outcome(rd <= wf, format!("mean phi rd {rd:.3}, wf {wf:.3} over {instances} instances"))
}

fn desk(algorithms: &[Algorithm], alpha: f64, utilization: f64) -> ExperimentConfig {
    ExperimentConfig {
        algorithms: algorithms.to_vec(),
        servers: 20,
        alphas: vec![alpha],
        utilizations: vec![utilization],
        seeds: (0..5).collect(),
        ..Default::default()
    }
}

fn simulate(cfg: &ExperimentConfig) -> Summary {
    summarize(&run_cells(cfg).expect("experiment runs")).expect("non-empty")
}

fn reordering_benefit(desk_run: &Summary) -> Outcome {
    let avg = |a| desk_run.find(a, 2.0, 0.75).unwrap().average_jct;
    let (fast, obta) = (avg(Algorithm::OcwfAcc), avg(Algorithm::Obta));
    outcome(
        fast < 0.5 * obta,
        format!("ocwf-acc {fast:.2} vs obta {obta:.2} (ratio {:.3})", fast / obta),
    )
}

fn skew_robustness() -> Outcome {
    let algorithms = [Algorithm::Wf, Algorithm::Obta, Algorithm::Rd, Algorithm::OcwfAcc];
    let runs: Vec<Summary> = [0.0, 1.0, 2.0]
        .iter()
        .map(|&alpha| simulate(&desk(&algorithms, alpha, 0.5)))
        .collect();
    let avg = |i: usize, a: Algorithm| runs[i].cells.iter().find(|c| c.algorithm == a).unwrap().average_jct;
    let mut pass = true;
    let mut parts = Vec::new();
    for a in [Algorithm::Wf, Algorithm::Obta, Algorithm::Rd] {
        let series = [avg(0, a), avg(1, a), avg(2, a)];
        let rising = series.windows(2).all(|w| w[1] >= 0.95 * w[0]);
        pass &= rising;
        parts.push(format!("{a} {:.1}/{:.1}/{:.1}", series[0], series[1], series[2]));
    }
    let wf_rise = avg(2, Algorithm::Wf) - avg(0, Algorithm::Wf);
    let acc_rise = avg(2, Algorithm::OcwfAcc) - avg(0, Algorithm::OcwfAcc);
    pass &= acc_rise < wf_rise;
    parts.push(format!("rise ocwf-acc {acc_rise:.1} vs wf {wf_rise:.1}"));
    outcome(pass, parts.join(", "))
}

fn overhead_ordering(desk_run: &Summary) -> Outcome {
    let us = |a| desk_run.find(a, 2.0, 0.75).unwrap().mean_overhead_us;
    let (wf, obta, nlip) = (us(Algorithm::Wf), us(Algorithm::Obta), us(Algorithm::Nlip));
    outcome(
        wf < obta && obta < nlip && wf * 10.0 <= obta,
        format!("mean us per arrival: wf {wf:.1}, obta {obta:.1}, nlip {nlip:.1}"),
    )
}

fn drain_ground_truth() -> Outcome {
    let queues = 1000;
    let mut bad = 0;
    for seed in 0..queues {
        let mut r = rng(30_000 + seed);
        let jobs = r.gen_range(1..=5u64);
        let mut capacity = CapacityProfile::new(1);
        for job in 1..=jobs {
            capacity.insert(job, vec![r.gen_range(1..=5)]);
        }
        let mut state = SimState::new(capacity.clone());
        for _ in 0..r.gen_range(1..=10) {
            state.enqueue(
                1,
                QueueEntry {
                    job: r.gen_range(1..=jobs),
                    group: r.gen_range(0..3),
                    remaining: r.gen_range(1..=20),
                },
            );
        }
        let expected = busy_time(state.cluster().queue(1), &capacity, 1);
        while !state.is_idle() {
            advance_slot(&mut state);
        }
        if state.clock() != expected {
            bad += 1;
        }
    }
    outcome(bad == 0, format!("{bad} of {queues} queues drain off their busy time"))
}

fn monotone_sweeps() -> Outcome {
    let all = Algorithm::ALL;
    let p_runs: Vec<Summary> = [4, 8, 12]
        .iter()
        .map(|&p| {
            simulate(&ExperimentConfig {
                p_min: p,
                p_max: p,
                ..desk(&all, 2.0, 0.75)
            })
        })
        .collect();
    let mu_runs: Vec<Summary> = [(1, 1), (2, 4), (4, 6)]
        .iter()
        .map(|&(lo, hi)| {
            simulate(&ExperimentConfig {
                mu_min: lo,
                mu_max: hi,
                ..desk(&all, 2.0, 0.75)
            })
        })
        .collect();
    let mut pass = true;
    let mut parts = Vec::new();
    for (label, runs) in [("p 4/8/12", &p_runs), ("mu 1/3/5", &mu_runs)] {
        for a in all {
            let series: Vec<f64> = runs.iter().map(|s| s.find(a, 2.0, 0.75).unwrap().average_jct).collect();
            let ok = series.windows(2).all(|w| w[1] <= w[0]);
            pass &= ok;
            parts.push(format!(
                "{label} {a} {}",
                series.iter().map(|v| format!("{v:.1}")).collect::<Vec<_>>().join("/")
            ));
        }
    }
    outcome(pass, parts.join(", "))
}

#[test]
fn acceptance_criteria() {
    let mut results: Vec<(u32, &str, Outcome, f64)> = Vec::new();
    let mut timed = |n: u32, name: &'static str, f: &mut dyn FnMut() -> Outcome| {
        let start = Instant::now();
        let o = f();
        let secs = start.elapsed().as_secs_f64();
        println!(
            "criterion {n:>2} {} {name}: {} ({secs:.1}s)",
            if o.pass { "PASS" } else { "FAIL" },
            o.detail
        );
        results.push((n, name, o, secs));
    };

    let start = Instant::now();
    let small = small_run();
    let small_secs = start.elapsed().as_secs_f64();
    println!("oracle instances solved in {small_secs:.1}s");
    timed(1, "exact assignment optimality", &mut || {
        let mut o = exact_optimality(&small);
        o.pass &= small_secs < 60.0;
        o
    });
    timed(2, "bounds soundness", &mut || bounds_soundness(&small));
    timed(3, "water-filling worst case is tight", &mut worst_case_tightness);
    timed(4, "water-filling within K of optimum", &mut || approximation_bound(&small));
    timed(5, "early exit is exact and cheaper", &mut early_exit_equivalence);
    timed(6, "replica deletion vs water-filling", &mut deletion_vs_water_filling);

    let algorithms = [Algorithm::Wf, Algorithm::Obta, Algorithm::Nlip, Algorithm::OcwfAcc];
    let desk_run = simulate(&desk(&algorithms, 2.0, 0.75));
    timed(7, "reordering halves completion time", &mut || reordering_benefit(&desk_run));
    timed(8, "skew hurts FIFO more than reordering", &mut skew_robustness);
    timed(9, "decision overhead ordering", &mut || overhead_ordering(&desk_run));
    timed(10, "busy time equals drain time", &mut drain_ground_truth);
    timed(11, "more replicas and faster servers help", &mut monotone_sweeps);

    let failed: Vec<String> = results
        .iter()
        .filter(|r| !r.2.pass)
        .map(|r| format!("{} ({})", r.0, r.1))
        .collect();
    assert!(failed.is_empty(), "failed criteria: {}", failed.join(", "));
}
