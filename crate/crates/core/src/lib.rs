//! Power-law graph cuts: graph and vector clustering that trades a spectral
//! cut objective (normalized cut, ratio cut, ratio association) against a
//! Pitman-Yor partition-probability regularizer, inferring the number of
//! clusters and favoring power-law cluster sizes.

pub mod baselines;
pub mod dataset;
pub mod datagen;
pub mod eppf;
pub mod error;
pub mod geometry;
pub mod graph;
pub mod graphcuts;
pub mod kernel;
pub mod metrics;
pub mod partition;
pub mod solver;

pub use dataset::VectorDataset;
pub use eppf::{log_eppf, log_rising_factorial, move_delta, EppfState, PYParams, TargetSize};
pub use error::{Error, Result};
pub use geometry::{GeometryOracle, VectorGeometry};
pub use graph::WeightedGraph;
pub use graphcuts::{
    build_kernel, cut, cut_objective, degree, power_law_cut, psd_shift, CutObjective, RhoMode,
};
pub use kernel::{kernel_fit_objective, kernel_point_to_mean_sq, KernelGeometry, KernelProblem};
pub use partition::{MoveOutcome, MoveTarget, Partition};
pub use solver::{
    power_law_means, regularized_distance, run, vector_objective, AuditInfo, PointOrder,
    RunResult, SolverConfig,
};
