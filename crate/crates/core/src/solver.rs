//! Iterative regularized assignment with dynamic cluster count.
//!
//! One run alternates an assignment sweep (each point moves to the candidate
//! cluster, existing or new, with the smallest regularized distance) and a
//! mean-update phase. Existing cluster means are frozen during a sweep; a
//! cluster founded mid-sweep starts with its founding point as mean, and a
//! cluster emptied mid-sweep is removed immediately. The regularized
//! distances are exact objective deltas against the current partition sizes,
//! so the full objective (fit + λ·r) never increases across phases.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::eppf::{log_eppf, move_delta, EppfState, PYParams, TargetSize};
use crate::error::{Error, Result};
use crate::geometry::{GeometryOracle, VectorGeometry};
use crate::partition::{MoveTarget, Partition};
use crate::dataset::VectorDataset;

/// Visit order for assignment sweeps.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum PointOrder {
    /// Input order every sweep; makes runs exactly reproducible with no RNG.
    Fixed,
    /// Fresh seeded permutation per sweep; restarts differ through this.
    Shuffled,
}

#[derive(Debug, Clone, Copy)]
pub struct SolverConfig {
    pub params: PYParams,
    pub max_sweeps: usize,
    pub point_order: PointOrder,
    pub restarts: usize,
    pub seed: u64,
    /// Cross-check incremental bookkeeping against from-scratch values each
    /// sweep (one extra evaluation pass per sweep).
    pub audit: bool,
}

impl SolverConfig {
    pub fn new(params: PYParams) -> Self {
        Self { params, max_sweeps: 100, point_order: PointOrder::Fixed, restarts: 1, seed: 0, audit: true }
    }

    pub fn validate(&self) -> Result<()> {
        if self.max_sweeps < 1 {
            return Err(Error::InvalidInput("max_sweeps must be ≥ 1".into()));
        }
        if self.restarts < 1 {
            return Err(Error::InvalidInput("restarts must be ≥ 1".into()));
        }
        Ok(())
    }
}

/// Incremental-vs-from-scratch bookkeeping collected when `audit` is on.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct AuditInfo {
    /// Largest |predicted − recomputed| objective discrepancy seen.
    pub max_drift: f64,
    /// Largest objective increase between consecutive phases (≤ 0 means the
    /// descent was strictly monotone).
    pub max_phase_increase: f64,
}

/// Outcome of one solver run (best restart).
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RunResult {
    pub partition: Partition,
    /// Full objective (fit + λ·r) after each sweep; entry 0 is the
    /// initialization value.
    pub objective_trace: Vec<f64>,
    /// Auxiliary per-sweep values (the pure graph-cut objective for kernel
    /// runs), aligned with `objective_trace`.
    pub aux_trace: Option<Vec<f64>>,
    pub k_trace: Vec<usize>,
    pub sweeps_used: usize,
    pub converged: bool,
    pub seed: u64,
    pub restart_used: usize,
    /// PSD shift of the kernel, when the run was in kernel space.
    pub rho: Option<f64>,
    /// Empty-cluster reseeds performed (fixed-k runs only).
    pub reseeds: usize,
    pub audit: Option<AuditInfo>,
    pub final_objective: f64,
}

/// The five-case regularized distance from point `i` to `target`.
///
/// With `c` the current cluster of `i` (size n_c) and k live clusters:
///
/// - target = c, n_c > 1:  w_i‖x_i − μ_c‖²
/// - target = c, n_c = 1:  0
/// - existing c′ ≠ c, n_c > 1:  w_i‖x_i − μ_c′‖² + λ·ln((n_c−1−θ)/(n_c′−θ))
/// - existing c′ ≠ c, n_c = 1:  w_i‖x_i − μ_c′‖² + λ·ln((α+(k−1)θ)/(n_c′−θ))
/// - new, n_c > 1:  λ·ln((n_c−1−θ)/(α+kθ));  new, n_c = 1:  +∞
///
/// Staying put is the baseline: the difference of two candidate values is the
/// exact change in fit + λ·r for that move (constants drop out). Values may
/// be negative; the argmin is still well defined.
pub fn regularized_distance<G: GeometryOracle>(
    geom: &mut G,
    p: &Partition,
    params: &PYParams,
    i: usize,
    target: MoveTarget,
) -> f64 {
    let current = p.cluster_of(i);
    let src_size = p.size_of(current);
    match target {
        MoveTarget::Existing(c) if c == current => {
            if src_size == 1 {
                0.0
            } else {
                geom.point_to_mean_sq(i, c)
            }
        }
        MoveTarget::Existing(c) => {
            let fit = geom.point_to_mean_sq(i, c);
            let delta = move_delta(params, src_size, TargetSize::Existing(p.size_of(c)), p.k());
            fit + params.lambda() * delta
        }
        MoveTarget::New => {
            if src_size == 1 {
                f64::INFINITY
            } else {
                params.lambda() * move_delta(params, src_size, TargetSize::New, p.k())
            }
        }
    }
}

struct SweepOutcome {
    moved: usize,
    /// Σ over accepted moves of (chosen distance − stay distance): the
    /// predicted objective change of the assignment phase.
    predicted_delta: f64,
}

fn sweep_once<G: GeometryOracle>(
    geom: &mut G,
    p: &mut Partition,
    eppf: &mut EppfState,
    params: &PYParams,
    order: &[usize],
    allow_new: bool,
) -> SweepOutcome {
    let mut moved = 0;
    let mut predicted_delta = 0.0;
    for &i in order {
        let current = p.cluster_of(i);
        let mut best = MoveTarget::Existing(0);
        let mut best_d = f64::INFINITY;
        let mut stay_d = 0.0;
        for c in 0..p.k() {
            let d = regularized_distance(geom, p, params, i, MoveTarget::Existing(c));
            if c == current {
                stay_d = d;
            }
            // strict inequality: lowest cluster id wins ties
            if d < best_d {
                best_d = d;
                best = MoveTarget::Existing(c);
            }
        }
        if allow_new {
            let d = regularized_distance(geom, p, params, i, MoveTarget::New);
            // strict inequality: NEW loses all ties
            if d < best_d {
                best_d = d;
                best = MoveTarget::New;
            }
        }
        if best == MoveTarget::Existing(current) {
            continue;
        }
        let src_size = p.size_of(current);
        match best {
            MoveTarget::New => eppf.apply_move(src_size, TargetSize::New),
            MoveTarget::Existing(c) => {
                eppf.apply_move(src_size, TargetSize::Existing(p.size_of(c)))
            }
        }
        let outcome = p.move_point(i, best);
        geom.note_move(i, &outcome);
        eppf.maybe_rebuild(p);
        predicted_delta += best_d - stay_d;
        moved += 1;
    }
    SweepOutcome { moved, predicted_delta }
}

pub(crate) struct DriverOptions<'a> {
    pub allow_new: bool,
    /// Reseed emptied clusters back up to this count after each sweep.
    pub fixed_k: Option<usize>,
    pub aux: Option<&'a (dyn Fn(&Partition) -> f64 + Sync)>,
}

impl Default for DriverOptions<'_> {
    fn default() -> Self {
        Self { allow_new: true, fixed_k: None, aux: None }
    }
}

fn scratch_objective<G: GeometryOracle>(geom: &mut G, p: &Partition, params: &PYParams) -> f64 {
    geom.fit_snapshot(p) - params.lambda() * log_eppf(p, params)
}

pub(crate) fn run_single<G: GeometryOracle>(
    geom: &mut G,
    mut p: Partition,
    params: &PYParams,
    max_sweeps: usize,
    point_order: PointOrder,
    order_seed: u64,
    audit: bool,
    opts: &DriverOptions,
) -> RunResult {
    let n = p.n();
    let mut eppf = EppfState::new(&p, *params);
    geom.refresh(&p);

    let objective =
        |geom: &mut G, p: &Partition, eppf: &EppfState| geom.fit_snapshot(p) + params.lambda() * eppf.regularizer();
    let obj0 = objective(geom, &mut p, &eppf);
    let mut trace = vec![obj0];
    let mut k_trace = vec![p.k()];
    let mut aux_trace = opts.aux.map(|f| vec![f(&p)]);
    let mut max_drift: f64 = 0.0;
    let mut max_phase_increase = f64::NEG_INFINITY;
    let mut reseeds = 0;
    let mut rng = ChaCha8Rng::seed_from_u64(order_seed);
    let mut order: Vec<usize> = (0..n).collect();
    let mut converged = false;
    let mut sweeps_used = 0;
    let mut prev_phase = obj0;

    for _ in 0..max_sweeps {
        if point_order == PointOrder::Shuffled {
            order.shuffle(&mut rng);
        }
        let outcome = sweep_once(geom, &mut p, &mut eppf, params, &order, opts.allow_new);
        sweeps_used += 1;

        if audit {
            // post-assignment value against the still-stale snapshot means
            let predicted = prev_phase + outcome.predicted_delta;
            let actual = scratch_objective(geom, &p, params);
            max_drift = max_drift.max((predicted - actual).abs());
            max_phase_increase = max_phase_increase.max(actual - prev_phase);
            prev_phase = actual;
        }

        let mut reseeded = 0;
        if let Some(k_target) = opts.fixed_k {
            while p.k() < k_target {
                geom.refresh(&p);
                let far = farthest_splittable_point(geom, &p);
                let src_size = p.size_of(p.cluster_of(far));
                eppf.apply_move(src_size, TargetSize::New);
                let out = p.move_point(far, MoveTarget::New);
                geom.note_move(far, &out);
                reseeded += 1;
            }
            reseeds += reseeded;
        }

        geom.refresh(&p);
        let obj = objective(geom, &mut p, &eppf);
        if audit {
            max_drift = max_drift
                .max(params.lambda() * (eppf.regularizer() + log_eppf(&p, params)).abs());
            if reseeded == 0 {
                max_phase_increase = max_phase_increase.max(obj - prev_phase);
            }
            prev_phase = obj;
        }
        trace.push(obj);
        k_trace.push(p.k());
        if let Some(tr) = aux_trace.as_mut() {
            tr.push(opts.aux.unwrap()(&p));
        }
        if outcome.moved == 0 && reseeded == 0 {
            converged = true;
            break;
        }
    }

    let final_objective = *trace.last().unwrap();
    RunResult {
        partition: p,
        objective_trace: trace,
        aux_trace,
        k_trace,
        sweeps_used,
        converged,
        seed: order_seed,
        restart_used: 0,
        rho: None,
        reseeds,
        audit: audit.then_some(AuditInfo {
            max_drift,
            max_phase_increase: if max_phase_increase.is_finite() { max_phase_increase } else { 0.0 },
        }),
        final_objective,
    }
}

fn farthest_splittable_point<G: GeometryOracle>(geom: &mut G, p: &Partition) -> usize {
    let mut best = usize::MAX;
    let mut best_d = f64::NEG_INFINITY;
    for i in 0..p.n() {
        if p.size_of(p.cluster_of(i)) <= 1 {
            continue;
        }
        let d = geom.point_to_mean_sq(i, p.cluster_of(i));
        if d > best_d {
            best_d = d;
            best = i;
        }
    }
    best
}

/// Runs the regularized solver from the single-cluster initialization,
/// keeping the best of `config.restarts` restarts by final objective.
/// Restarts differ only in their sweep-order seed.
pub fn run<G, F>(make_geom: F, n: usize, config: &SolverConfig) -> Result<RunResult>
where
    G: GeometryOracle,
    F: Fn() -> G + Sync,
{
    run_with_options(make_geom, n, config, &DriverOptions::default())
}

pub(crate) fn run_with_options<G, F>(
    make_geom: F,
    n: usize,
    config: &SolverConfig,
    opts: &DriverOptions,
) -> Result<RunResult>
where
    G: GeometryOracle,
    F: Fn() -> G + Sync,
{
    config.validate()?;
    let init = Partition::single_cluster(n)?;
    let mut seed_rng = ChaCha8Rng::seed_from_u64(config.seed);
    let order_seeds: Vec<u64> = (0..config.restarts).map(|_| seed_rng.random()).collect();

    let run_one = |r: usize| {
        let mut geom = make_geom();
        let mut result = run_single(
            &mut geom,
            init.clone(),
            &config.params,
            config.max_sweeps,
            config.point_order,
            order_seeds[r],
            config.audit,
            opts,
        );
        result.restart_used = r;
        result
    };

    let mut results: Vec<RunResult> = if config.restarts > 1 {
        (0..config.restarts).into_par_iter().map(run_one).collect()
    } else {
        vec![run_one(0)]
    };
    // deterministic best-of: objective first, restart index breaks ties
    results.sort_by(|a, b| {
        a.final_objective
            .partial_cmp(&b.final_objective)
            .unwrap()
            .then(a.restart_used.cmp(&b.restart_used))
    });
    let mut best = results.into_iter().next().unwrap();
    best.seed = config.seed;
    Ok(best)
}

/// Regularized clustering of raw vectors (the vector-space driver).
pub fn power_law_means(data: &VectorDataset, config: &SolverConfig) -> Result<RunResult> {
    run(|| VectorGeometry::new(data), data.n(), config)
}

/// Full objective fit + λ·r for a partition of `data` with means derived
/// from the partition itself. Used by tests and audits.
pub fn vector_objective(data: &VectorDataset, p: &Partition, params: &PYParams) -> f64 {
    let mut geom = VectorGeometry::new(data);
    geom.refresh(p);
    geom.fit_snapshot(p) - params.lambda() * log_eppf(p, params)
}
