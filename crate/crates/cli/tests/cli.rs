use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn locsched(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_locsched"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn jct_column(csv: &str) -> Vec<String> {
    csv.lines()
        .skip(1)
        .map(|line| line.split(',').nth(7).unwrap().to_string())
        .collect()
}

#[test]
fn one_job_on_one_server() {
    let dir = tempfile::tempdir().unwrap();
    let trace = dir.path().join("trace.csv");
    fs::write(&trace, "5,x,only,x,7\n").unwrap();
    let out = dir.path().join("out");
    let result = locsched(&[
        "--algo", "obta",
        "--servers", "1",
        "--p-min", "1",
        "--p-max", "1",
        "--mu-min", "2",
        "--mu-max", "2",
        "--trace", trace.to_str().unwrap(),
        "--out", out.to_str().unwrap(),
    ]);
    assert!(result.status.success(), "{}", String::from_utf8_lossy(&result.stderr));

    let csv = fs::read_to_string(out.join("jobs.csv")).unwrap();
    let mut lines = csv.lines();
    assert_eq!(
        lines.next().unwrap(),
        "job_id,algorithm,alpha,utilization,seed,arrival_slot,completion_slot,jct_slots,decision_overhead_us"
    );
    assert_eq!(lines.clone().count(), 1);
    // 7 tasks at 2 per slot.
    assert_eq!(jct_column(&csv), vec!["4"]);
}

fn sweep(out: &Path) -> Output {
    locsched(&[
        "--algo", "wf",
        "--algo", "ocwf-acc",
        "--servers", "20",
        "--alpha", "0",
        "--alpha", "1.5",
        "--util", "0.5",
        "--seed", "3",
        "--seed", "4",
        "--synthetic",
        "--jobs", "25",
        "--out", out.to_str().unwrap(),
    ])
}

#[test]
fn rows_per_cell_and_reproducible_jcts() {
    let dir = tempfile::tempdir().unwrap();
    let (a, b) = (dir.path().join("a"), dir.path().join("b"));
    assert!(sweep(&a).status.success());
    assert!(sweep(&b).status.success());
    let first = fs::read_to_string(a.join("jobs.csv")).unwrap();
    let second = fs::read_to_string(b.join("jobs.csv")).unwrap();
    // 2 algorithms x 2 alphas x 2 seeds, 25 jobs each.
    assert_eq!(first.lines().count(), 1 + 8 * 25);
    assert_eq!(jct_column(&first), jct_column(&second));

    let summary: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(a.join("summary.json")).unwrap()).unwrap();
    let cells = summary["cells"].as_array().unwrap();
    assert_eq!(cells.len(), 4);
    for cell in cells {
        assert_eq!(cell["jobs"], 50);
        let cdf = cell["cdf"].as_array().unwrap();
        assert_eq!(cdf.last().unwrap()["fraction"], 1.0);
    }
}

#[test]
fn config_errors_exit_with_2() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("out");
    let out = out.to_str().unwrap();
    for args in [
        vec!["--algo", "fifo", "--out", out],
        vec!["--out", out],
        vec!["--algo", "wf", "--p-min", "9", "--p-max", "4", "--out", out],
        vec!["--algo", "wf", "--util", "1.5", "--out", out],
        vec!["--algo", "wf", "--mu-min", "0", "--out", out],
        vec!["--algo", "wf", "--trace", "t.csv", "--synthetic", "--out", out],
    ] {
        let result = locsched(&args);
        assert_eq!(result.status.code(), Some(2), "{args:?}");
    }
}

#[test]
fn runtime_errors_exit_with_1() {
    let dir = tempfile::tempdir().unwrap();
    let missing = dir.path().join("missing.csv");
    let result = locsched(&[
        "--algo", "wf",
        "--trace", missing.to_str().unwrap(),
        "--out", dir.path().join("out").to_str().unwrap(),
    ]);
    assert_eq!(result.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&result.stderr).contains("missing.csv"));
}
