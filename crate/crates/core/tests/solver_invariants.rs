//! Whole-run solver properties: monotone descent, bounded incremental drift,
//! termination, brute-force optimality on small instances, and agreement
//! between the vector and kernel code paths.

use plcut_core::baselines::{weighted_kernel_kmeans, kmeans, Init};
use plcut_core::datagen::{sample_power_law_blobs, SbmSpec};
use plcut_core::graphcuts::RhoMode;
use plcut_core::solver::vector_objective;
use plcut_core::{
    build_kernel, cut_objective, power_law_cut, power_law_means, CutObjective, KernelProblem,
    PYParams, Partition, PointOrder, SolverConfig, VectorDataset, WeightedGraph,
};
use rand::prelude::*;
use rand_chacha::ChaCha8Rng;

fn assert_monotone(trace: &[f64], label: &str) {
    for (i, w) in trace.windows(2).enumerate() {
        assert!(
            w[1] <= w[0] + 1e-9 * (1.0 + w[0].abs()),
            "{label}: trace rose at sweep {}: {} -> {}",
            i + 1,
            w[0],
            w[1]
        );
    }
}

#[test]
fn vector_runs_descend_monotonically() {
    let mut rng = ChaCha8Rng::seed_from_u64(101);
    for trial in 0..40 {
        let n = rng.random_range(10..60);
        let d = rng.random_range(1..4);
        let coords: Vec<f64> = (0..n * d).map(|_| rng.random_range(-3.0..3.0)).collect();
        let data = VectorDataset::new(coords, n, d).unwrap();
        let params = PYParams::new(
            rng.random_range(0.2..2.0),
            rng.random_range(0.0..0.9),
            rng.random_range(0.0..2.0),
        )
        .unwrap();
        let config = SolverConfig {
            max_sweeps: 60,
            point_order: if trial % 2 == 0 { PointOrder::Fixed } else { PointOrder::Shuffled },
            seed: trial,
            ..SolverConfig::new(params)
        };
        let result = power_law_means(&data, &config).unwrap();
        assert_monotone(&result.objective_trace, &format!("vector trial {trial}"));
        let audit = result.audit.as_ref().unwrap();
        assert!(audit.max_drift < 1e-7, "drift {}", audit.max_drift);
        assert!(audit.max_phase_increase < 1e-9, "phase increase {}", audit.max_phase_increase);
        result.partition.validate().unwrap();
        // final objective equals a full recomputation
        let scratch = vector_objective(&data, &result.partition, &params);
        assert!((result.final_objective - scratch).abs() < 1e-7);
    }
}

fn random_sbm(n: usize, seed: u64) -> (WeightedGraph, Partition) {
    let spec = SbmSpec {
        n,
        alpha: 1.0,
        theta: 0.3,
        diag: (0.6, 0.01),
        offdiag: (0.08, 0.001),
        seed,
    };
    loop {
        let labels = plcut_core::datagen::sample_pycrp(n, spec.alpha, spec.theta, spec.seed).unwrap();
        let g = plcut_core::datagen::sample_sbm(&spec, &labels).unwrap();
        if (0..n).all(|i| g.degree(i) > 0.0) {
            return (g, labels);
        }
    }
}

#[test]
fn kernel_runs_descend_monotonically() {
    for trial in 0..25u64 {
        let (g, _) = random_sbm(40, 7000 + trial);
        let params = PYParams::new(1.0, 0.3, 0.01 + 0.01 * trial as f64).unwrap();
        let config = SolverConfig {
            max_sweeps: 60,
            point_order: PointOrder::Shuffled,
            seed: trial,
            ..SolverConfig::new(params)
        };
        let kind = match trial % 3 {
            0 => CutObjective::Ncut,
            1 => CutObjective::Rcut,
            _ => CutObjective::Rassoc,
        };
        let result = power_law_cut(&g, kind, params, &config).unwrap();
        assert_monotone(&result.objective_trace, &format!("kernel trial {trial}"));
        let audit = result.audit.as_ref().unwrap();
        assert!(audit.max_drift < 1e-7, "drift {}", audit.max_drift);
        assert!(audit.max_phase_increase < 1e-9);
        assert!(result.rho.is_some());
        // the aux trace carries the pure cut objective, recomputable exactly
        let aux = result.aux_trace.as_ref().unwrap();
        let recomputed = cut_objective(&g, &result.partition, kind).unwrap();
        assert!((aux.last().unwrap() - recomputed).abs() < 1e-9);
    }
}

#[test]
fn fixed_order_terminates_well_before_the_guard() {
    let mut rng = ChaCha8Rng::seed_from_u64(55);
    for trial in 0..10 {
        let n = 30;
        let coords: Vec<f64> = (0..n * 2).map(|_| rng.random_range(0.0..4.0)).collect();
        let data = VectorDataset::new(coords, n, 2).unwrap();
        let params = PYParams::new(1.0, 0.4, 0.5).unwrap();
        let config = SolverConfig {
            max_sweeps: 10 * n,
            seed: trial,
            ..SolverConfig::new(params)
        };
        let result = power_law_means(&data, &config).unwrap();
        assert!(result.converged, "trial {trial} hit the sweep guard");
        assert!(result.sweeps_used < 10 * n);
    }
}

/// Two tight separated blobs: brute force over all 203 partitions of six
/// points confirms the blob split is the global optimum; the solver reaches
/// it from the single-cluster start.
#[test]
fn two_blob_optimum_found() {
    let data =
        VectorDataset::new(vec![-0.1, 0.0, 0.1, 9.9, 10.0, 10.1], 6, 1).unwrap();
    let params = PYParams::new(0.3, 0.1, 1.0).unwrap();

    let mut best = f64::INFINITY;
    let mut best_labels = Vec::new();
    for_each_set_partition(6, &mut |labels| {
        let p = Partition::from_assignments(labels).unwrap();
        let obj = vector_objective(&data, &p, &params);
        if obj < best {
            best = obj;
            best_labels = labels.to_vec();
        }
    });
    assert_eq!(best_labels, vec![0, 0, 0, 1, 1, 1], "unexpected global optimum");

    let config = SolverConfig {
        max_sweeps: 50,
        restarts: 4,
        point_order: PointOrder::Shuffled,
        seed: 9,
        ..SolverConfig::new(params)
    };
    let result = power_law_means(&data, &config).unwrap();
    assert!((result.final_objective - best).abs() < 1e-9);
    assert_eq!(result.partition.assign(), &[0, 0, 0, 1, 1, 1]);
}

/// Two disconnected cliques: brute force confirms the component split is
/// globally optimal for the kernel objective, and the solver recovers it.
#[test]
fn disconnected_cliques_recovered() {
    let mut edges = Vec::new();
    for i in 0..4 {
        for j in (i + 1)..4 {
            edges.push((i, j, 1.0));
            edges.push((i + 4, j + 4, 1.0));
        }
    }
    let g = WeightedGraph::from_edges(8, &edges).unwrap();
    let params = PYParams::new(1.0, 0.3, 0.05).unwrap();

    let kp = build_kernel(&g, CutObjective::Ncut, RhoMode::Auto).unwrap();
    let mut best = f64::INFINITY;
    let mut best_labels = Vec::new();
    for_each_set_partition(8, &mut |labels| {
        let p = Partition::from_assignments(labels).unwrap();
        let obj = plcut_core::kernel_fit_objective(&kp, &p)
            - params.lambda() * plcut_core::log_eppf(&p, &params);
        if obj < best {
            best = obj;
            best_labels = labels.to_vec();
        }
    });
    assert_eq!(best_labels, vec![0, 0, 0, 0, 1, 1, 1, 1]);

    let config = SolverConfig {
        max_sweeps: 50,
        restarts: 4,
        point_order: PointOrder::Shuffled,
        seed: 3,
        ..SolverConfig::new(params)
    };
    let result = power_law_cut(&g, CutObjective::Ncut, params, &config).unwrap();
    assert_eq!(result.partition.assign(), &[0, 0, 0, 0, 1, 1, 1, 1]);
    // NCut of the exact component split is zero
    assert!(result.aux_trace.unwrap().last().unwrap().abs() < 1e-12);
}

/// Lloyd iterations on explicit vectors and kernel k-means on the Gram
/// matrix are the same algorithm; with identical inits they agree.
#[test]
fn kmeans_and_kernel_kmeans_agree_on_gram_matrix() {
    let mut rng = ChaCha8Rng::seed_from_u64(31);
    for trial in 0..10 {
        let n = 14;
        let d = 3;
        let coords: Vec<f64> = (0..n * d).map(|_| rng.random_range(-2.0..2.0)).collect();
        let data = VectorDataset::new(coords.clone(), n, d).unwrap();
        // gram matrix of the raw coordinates
        let mut gram = vec![0.0; n * n];
        for i in 0..n {
            for j in 0..n {
                gram[i * n + j] = (0..d).map(|r| coords[i * d + r] * coords[j * d + r]).sum();
            }
        }
        let kp = KernelProblem::dense(n, gram, vec![1.0; n], 0.0).unwrap();
        let init: Vec<usize> = (0..n).map(|i| i % 3).collect();
        let a = kmeans(&data, 3, Init::Assignment(init.clone()), 40).unwrap();
        let b = weighted_kernel_kmeans(&kp, 3, Init::Assignment(init), 40).unwrap();
        assert_eq!(a.partition.assign(), b.partition.assign(), "trial {trial}");
        assert_eq!(a.k_trace, b.k_trace);
    }
}

/// Same config and seed give byte-identical assignments, restarts included.
#[test]
fn runs_are_deterministic() {
    let (data, _) = sample_power_law_blobs(80, 2, 1.0, 0.4, 0.1, (0.0, 8.0), 5).unwrap();
    let params = PYParams::new(1.0, 0.4, 0.3).unwrap();
    let config = SolverConfig {
        max_sweeps: 40,
        restarts: 3,
        point_order: PointOrder::Shuffled,
        seed: 77,
        ..SolverConfig::new(params)
    };
    let a = power_law_means(&data, &config).unwrap();
    let b = power_law_means(&data, &config).unwrap();
    assert_eq!(a.partition, b.partition);
    assert_eq!(a.objective_trace, b.objective_trace);
    assert_eq!(a.restart_used, b.restart_used);
}

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
