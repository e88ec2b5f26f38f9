//! Cross-checks between the partition probability evaluator and the seating
//! sampler: normalization by brute-force enumeration, Monte Carlo agreement,
//! and the cluster-count growth rate.

use std::collections::BTreeMap;

use plcut_core::datagen::sample_pycrp;
use plcut_core::{log_eppf, PYParams, Partition};

/// Visits every set partition of n elements (restricted growth strings).
fn for_each_set_partition(n: usize, f: &mut impl FnMut(&[usize])) {
    fn rec(labels: &mut Vec<usize>, next: usize, n: usize, f: &mut impl FnMut(&[usize])) {
        if labels.len() == n {
            f(labels);
            return;
        }
        for c in 0..=next {
            labels.push(c);
            rec(labels, next.max(c + 1), n, f);
            labels.pop();
        }
    }
    rec(&mut Vec::new(), 0, n, f);
}

fn sorted_sizes(p: &Partition) -> Vec<usize> {
    let mut s = p.sizes().to_vec();
    s.sort_unstable();
    s
}

#[test]
fn probabilities_sum_to_one_over_all_set_partitions() {
    for n in 1..=6 {
        for &(alpha, theta) in &[(1.0, 0.5), (0.3, 0.0), (2.0, 0.8), (0.05, 0.9)] {
            let params = PYParams::new(alpha, theta, 0.0).unwrap();
            let mut total = 0.0;
            for_each_set_partition(n, &mut |labels| {
                let p = Partition::from_assignments(labels).unwrap();
                total += log_eppf(&p, &params).exp();
            });
            assert!(
                (total - 1.0).abs() < 1e-8,
                "n={n} alpha={alpha} theta={theta}: sum {total}"
            );
        }
    }
}

#[test]
fn sampler_frequencies_match_eppf() {
    // bucket both the sampler draws and the exact probabilities by the
    // multiset of cluster sizes
    let n = 5;
    let (alpha, theta) = (1.0, 0.5);
    let params = PYParams::new(alpha, theta, 0.0).unwrap();

    let mut exact: BTreeMap<Vec<usize>, f64> = BTreeMap::new();
    for_each_set_partition(n, &mut |labels| {
        let p = Partition::from_assignments(labels).unwrap();
        *exact.entry(sorted_sizes(&p)).or_insert(0.0) += log_eppf(&p, &params).exp();
    });

    let draws = 50_000;
    let mut observed: BTreeMap<Vec<usize>, usize> = BTreeMap::new();
    for i in 0..draws {
        let p = sample_pycrp(n, alpha, theta, 1_000 + i).unwrap();
        *observed.entry(sorted_sizes(&p)).or_insert(0) += 1;
    }

    for (sizes, prob) in &exact {
        let count = *observed.get(sizes).unwrap_or(&0) as f64;
        let expected = draws as f64 * prob;
        let sigma = (draws as f64 * prob * (1.0 - prob)).sqrt();
        assert!(
            (count - expected).abs() <= 3.0 * sigma,
            "sizes {sizes:?}: observed {count}, expected {expected:.1} ± {sigma:.1}"
        );
    }
}

#[test]
fn cluster_count_grows_like_n_to_the_theta() {
    // theta = 0.5: quadrupling n should double the typical cluster count
    let (alpha, theta) = (1.0, 0.5);
    let draws = 100;
    let mean_k = |n: usize, base: u64| -> f64 {
        (0..draws)
            .map(|i| sample_pycrp(n, alpha, theta, base + i).unwrap().k() as f64)
            .sum::<f64>()
            / draws as f64
    };
    let ratio = mean_k(2000, 500) / mean_k(500, 900);
    assert!(
        (1.7..=2.3).contains(&ratio),
        "growth ratio {ratio} outside [1.7, 2.3]"
    );
}
