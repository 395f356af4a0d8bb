use locsched::workload::{PermutationScope, PlacementConfig, Placer};
use statrs::distribution::{ChiSquared, ContinuousCDF};

const DRAWS: usize = 100_000;
const SERVERS: usize = 20;

fn config(alpha: f64, scope: PermutationScope) -> PlacementConfig {
    PlacementConfig {
        servers: SERVERS,
        alpha,
        p_min: 1,
        p_max: 1,
        scope,
        seed: 2024,
    }
}

/// p-value of Pearson's test of `counts` against `weights`.
fn chi_square_p(counts: &[u64], weights: &[f64]) -> f64 {
    let total: f64 = weights.iter().sum();
    let n = counts.iter().sum::<u64>() as f64;
    let stat: f64 = counts
        .iter()
        .zip(weights)
        .map(|(&c, &w)| {
            let expected = n * w / total;
            (c as f64 - expected).powi(2) / expected
        })
        .sum();
    let dist = ChiSquared::new((counts.len() - 1) as f64).unwrap();
    1.0 - dist.cdf(stat)
}

fn zipf(alpha: f64) -> Vec<f64> {
    (1..=SERVERS).map(|i| 1.0 / (i as f64).powf(alpha)).collect()
}

#[test]
fn anchor_ranks_follow_zipf() {
    for alpha in [0.0, 1.0, 2.0] {
        let mut placer = Placer::new(config(alpha, PermutationScope::PerRun)).unwrap();
        let mut counts = vec![0u64; SERVERS];
        for _ in 0..DRAWS {
            counts[placer.draw_rank()] += 1;
        }
        let p = chi_square_p(&counts, &zipf(alpha));
        println!("alpha {alpha}: p = {p:.4}");
        assert!(p > 0.01, "alpha {alpha}: p = {p}");
    }
}

#[test]
fn fixed_permutation_keeps_the_skew_on_servers() {
    let mut placer = Placer::new(config(2.0, PermutationScope::PerRun)).unwrap();
    let mut counts = vec![0u64; SERVERS];
    for _ in 0..DRAWS {
        counts[placer.next_group()[0] - 1] += 1;
    }
    // The permutation is unknown, so compare sorted frequencies.
    counts.sort_unstable_by(|a, b| b.cmp(a));
    let p = chi_square_p(&counts, &zipf(2.0));
    assert!(p > 0.01, "p = {p}");
}

#[test]
fn per_group_permutation_spreads_anchors_evenly() {
    let mut placer = Placer::new(config(2.0, PermutationScope::PerGroup)).unwrap();
    let mut counts = vec![0u64; SERVERS];
    for _ in 0..DRAWS {
        counts[placer.next_group()[0] - 1] += 1;
    }
    let p = chi_square_p(&counts, &[1.0; SERVERS]);
    assert!(p > 0.01, "p = {p}");
}
