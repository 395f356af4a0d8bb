use std::path::PathBuf;
use std::process::ExitCode;

use clap::{ArgGroup, Parser, ValueEnum};
use locsched::report::{run_experiment, ExperimentConfig, WorkloadSource};
use locsched::sim::Algorithm;
use locsched::workload::{ColumnMap, PermutationScope, SyntheticSpec};

/// Simulates task assignment algorithms on a synthetic or trace workload and
/// writes per-job completion times and a summary.
#[derive(Debug, Parser)]
#[command(name = "locsched", version)]
#[command(group(ArgGroup::new("source").args(["trace", "synthetic"])))]
struct Args {
    /// Algorithm to run: nlip, obta, wf, rd, ocwf or ocwf-acc. Repeatable.
    #[arg(long = "algo", required = true)]
    algorithms: Vec<Algorithm>,

    #[arg(long, default_value_t = 100)]
    servers: usize,

    /// Skew of data placement; 0 is uniform. Repeatable.
    #[arg(long = "alpha", default_values_t = [0.0])]
    alphas: Vec<f64>,

    /// Target cluster utilization in (0, 1]. Repeatable.
    #[arg(long = "util", default_values_t = [0.5])]
    utilizations: Vec<f64>,

    /// Fewest servers holding a group's data.
    #[arg(long, default_value_t = 8)]
    p_min: usize,

    /// Most servers holding a group's data.
    #[arg(long, default_value_t = 12)]
    p_max: usize,

    /// Slowest per-slot processing rate.
    #[arg(long, default_value_t = 3)]
    mu_min: u32,

    /// Fastest per-slot processing rate.
    #[arg(long, default_value_t = 5)]
    mu_max: u32,

    /// Repeatable.
    #[arg(long = "seed", default_values_t = [0])]
    seeds: Vec<u64>,

    /// Replay a CSV trace: one row per task group.
    #[arg(long)]
    trace: Option<PathBuf>,

    /// Generate jobs (the default).
    #[arg(long)]
    synthetic: bool,

    /// Number of synthetic jobs, or how many trace jobs to keep.
    #[arg(long)]
    jobs: Option<usize>,

    /// Trace column holding the arrival time.
    #[arg(long, default_value_t = 0)]
    col_ts: usize,

    /// Trace column holding the job key.
    #[arg(long, default_value_t = 2)]
    col_job: usize,

    /// Trace column holding the group's task count.
    #[arg(long, default_value_t = 4)]
    col_instances: usize,

    /// The trace starts with a header row.
    #[arg(long)]
    header: bool,

    /// How often the skewed server ranking is redrawn.
    #[arg(long, value_enum, default_value_t = Scope::PerRun)]
    scope: Scope,

    #[arg(long, default_value = "out")]
    out: PathBuf,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Scope {
    PerGroup,
    PerJob,
    PerRun,
}

impl From<Scope> for PermutationScope {
    fn from(s: Scope) -> Self {
        match s {
            Scope::PerGroup => PermutationScope::PerGroup,
            Scope::PerJob => PermutationScope::PerJob,
            Scope::PerRun => PermutationScope::PerRun,
        }
    }
}

impl Args {
    fn config(&self) -> ExperimentConfig {
        let source = match &self.trace {
            Some(path) => WorkloadSource::Trace {
                path: path.clone(),
                columns: ColumnMap {
                    timestamp: self.col_ts,
                    job: self.col_job,
                    instances: self.col_instances,
                    has_header: self.header,
                },
                limit: self.jobs,
            },
            None => {
                let defaults = SyntheticSpec::default();
                WorkloadSource::Synthetic(SyntheticSpec {
                    jobs: self.jobs.unwrap_or(defaults.jobs),
                    ..defaults
                })
            }
        };
        ExperimentConfig {
            algorithms: self.algorithms.clone(),
            servers: self.servers,
            alphas: self.alphas.clone(),
            utilizations: self.utilizations.clone(),
            p_min: self.p_min,
            p_max: self.p_max,
            mu_min: self.mu_min,
            mu_max: self.mu_max,
            seeds: self.seeds.clone(),
            scope: self.scope.into(),
            source,
        }
    }
}

fn main() -> ExitCode {
    let args = Args::parse();
    let cfg = args.config();
    if let Err(e) = cfg.validate() {
        eprintln!("error: {e}");
        return ExitCode::from(2);
    }
    match run_experiment(&cfg, &args.out) {
        Ok(summary) => {
            println!(
                "{:<9} {:>6} {:>6} {:>5} {:>10} {:>6} {:>6} {:>6} {:>14}",
                "algorithm", "alpha", "util", "jobs", "avg_jct", "p50", "p90", "p99", "overhead_us"
            );
            for c in &summary.cells {
                println!(
                    "{:<9} {:>6} {:>6} {:>5} {:>10.2} {:>6} {:>6} {:>6} {:>14.1}",
                    c.algorithm.name(),
                    c.alpha,
                    c.utilization,
                    c.jobs,
                    c.average_jct,
                    c.p50_jct,
                    c.p90_jct,
                    c.p99_jct,
                    c.mean_overhead_us
                );
            }
            println!("wrote {}", args.out.display());
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(if e.is_config() { 2 } else { 1 })
        }
    }
}
