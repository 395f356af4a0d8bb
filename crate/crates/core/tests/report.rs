use std::fs;

use locsched::report::{run_cells, run_experiment, summarize, ExperimentConfig, JobRow, Summary};
use locsched::sim::Algorithm;
use locsched::workload::SyntheticSpec;

fn desk(algorithms: Vec<Algorithm>) -> ExperimentConfig {
    ExperimentConfig {
        algorithms,
        servers: 20,
        alphas: vec![2.0],
        utilizations: vec![0.75],
        seeds: (0..5).collect(),
        ..Default::default()
    }
}

#[test]
fn csv_and_json_agree() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = ExperimentConfig {
        algorithms: vec![Algorithm::Wf, Algorithm::Rd],
        servers: 12,
        alphas: vec![0.0, 1.0],
        utilizations: vec![0.5, 0.9],
        seeds: vec![7, 8],
        source: locsched::report::WorkloadSource::Synthetic(SyntheticSpec {
            jobs: 15,
            ..Default::default()
        }),
        ..Default::default()
    };
    let summary = run_experiment(&cfg, dir.path()).unwrap();

    let mut reader = csv::Reader::from_path(dir.path().join("jobs.csv")).unwrap();
    let rows: Vec<JobRow> = reader.deserialize().map(Result::unwrap).collect();
    assert_eq!(rows.len(), 15 * cfg.cells().len());

    let from_json: Summary =
        serde_json::from_str(&fs::read_to_string(dir.path().join("summary.json")).unwrap()).unwrap();
    assert_eq!(from_json, summary);
    let recomputed = summarize(&rows).unwrap();
    for (a, b) in recomputed.cells.iter().zip(&from_json.cells) {
        assert_eq!(a.average_jct.to_bits(), b.average_jct.to_bits());
        assert_eq!(a.mean_overhead_us.to_bits(), b.mean_overhead_us.to_bits());
        assert_eq!(a.cdf, b.cdf);
        assert!(a.cdf.windows(2).all(|w| w[0].fraction < w[1].fraction));
    }
}

#[test]
fn exact_assignment_beats_water_filling_on_average() {
    let rows = run_cells(&desk(vec![Algorithm::Obta, Algorithm::Wf])).unwrap();
    let summary = summarize(&rows).unwrap();
    let avg = |a| summary.find(a, 2.0, 0.75).unwrap().average_jct;
    println!("obta {:.2} wf {:.2}", avg(Algorithm::Obta), avg(Algorithm::Wf));
    assert!(avg(Algorithm::Wf) >= avg(Algorithm::Obta));
}

#[test]
fn more_replicas_shorten_jobs() {
    let mut previous: Option<Summary> = None;
    for p in [4, 6, 8, 10, 12] {
        let cfg = ExperimentConfig {
            p_min: p,
            p_max: p,
            ..desk(Algorithm::ALL.to_vec())
        };
        let summary = summarize(&run_cells(&cfg).unwrap()).unwrap();
        if let Some(prev) = &previous {
            for cell in &summary.cells {
                let before = prev.find(cell.algorithm, 2.0, 0.75).unwrap().average_jct;
                println!("{} p={p}: {before:.1} -> {:.1}", cell.algorithm, cell.average_jct);
                assert!(cell.average_jct < before, "{} at p={p}", cell.algorithm);
            }
        }
        previous = Some(summary);
    }
}
