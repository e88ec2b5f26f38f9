//! Geometry abstraction shared by the vector-space and kernel-space solvers.

use crate::dataset::VectorDataset;
use crate::partition::{MoveOutcome, Partition};

/// The solver's only view of geometry: weighted squared distances from a
/// point to a cluster mean, against a mean snapshot that is frozen for the
/// duration of an assignment sweep.
///
/// Snapshot semantics mirror the batch update schedule: existing cluster
/// means do not change mid-sweep; a cluster created mid-sweep has its
/// founding point as mean; a cluster removed mid-sweep drops out of the
/// snapshot. [`GeometryOracle::refresh`] re-derives all means from the
/// current membership (the mean-update phase).
pub trait GeometryOracle {
    fn len(&self) -> usize;

    fn is_empty(&self) -> bool {
        self.len() == 0
    }

    fn weight(&self, i: usize) -> f64;

    /// w_i · ‖x_i − μ_c‖² against the snapshot mean of cluster `c`.
    fn point_to_mean_sq(&mut self, i: usize, c: usize) -> f64;

    /// Mirrors an accepted move so snapshot bookkeeping (founded clusters,
    /// removals and id shifts) stays aligned with the partition.
    fn note_move(&mut self, i: usize, outcome: &MoveOutcome);

    /// Mean-update phase: recompute all means from current membership.
    fn refresh(&mut self, p: &Partition);

    /// Σ_i w_i‖x_i − μ_{z_i}‖² against the *snapshot* means. Right after
    /// [`GeometryOracle::refresh`] this is the exact fit term of the
    /// objective for `p`.
    fn fit_snapshot(&mut self, p: &Partition) -> f64;
}

/// Explicit coordinates: means are cached d-vectors.
pub struct VectorGeometry<'a> {
    data: &'a VectorDataset,
    means: Vec<Vec<f64>>,
}

impl<'a> VectorGeometry<'a> {
    pub fn new(data: &'a VectorDataset) -> Self {
        Self { data, means: Vec::new() }
    }

    #[cfg(test)]
    pub(crate) fn means_mut(&mut self) -> &mut Vec<Vec<f64>> {
        &mut self.means
    }

    fn weighted_mean(&self, members: &[usize]) -> Vec<f64> {
        let d = self.data.dim();
        let mut mean = vec![0.0; d];
        let mut total = 0.0;
        for &i in members {
            let w = self.data.weight(i);
            total += w;
            for (m, x) in mean.iter_mut().zip(self.data.point(i)) {
                *m += w * x;
            }
        }
        for m in &mut mean {
            *m /= total;
        }
        mean
    }
}

impl GeometryOracle for VectorGeometry<'_> {
    fn len(&self) -> usize {
        self.data.n()
    }

    fn weight(&self, i: usize) -> f64 {
        self.data.weight(i)
    }

    fn point_to_mean_sq(&mut self, i: usize, c: usize) -> f64 {
        let mean = &self.means[c];
        let sq: f64 = self
            .data
            .point(i)
            .iter()
            .zip(mean)
            .map(|(x, m)| (x - m) * (x - m))
            .sum();
        self.data.weight(i) * sq
    }

    fn note_move(&mut self, i: usize, outcome: &MoveOutcome) {
        if let MoveOutcome::Moved { removed, created, .. } = outcome {
            if *created {
                self.means.push(self.data.point(i).to_vec());
            }
            if let Some(c) = removed {
                self.means.remove(*c);
            }
        }
    }

    fn refresh(&mut self, p: &Partition) {
        let mut buckets: Vec<Vec<usize>> = vec![Vec::new(); p.k()];
        for i in 0..p.n() {
            buckets[p.cluster_of(i)].push(i);
        }
        self.means = buckets.iter().map(|b| self.weighted_mean(b)).collect();
    }

    fn fit_snapshot(&mut self, p: &Partition) -> f64 {
        (0..p.n()).map(|i| self.point_to_mean_sq(i, p.cluster_of(i))).sum()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::partition::MoveTarget;
    use approx::assert_abs_diff_eq;

    #[test]
    fn means_are_weighted() {
        let data =
            VectorDataset::with_weights(vec![0.0, 3.0], 2, 1, vec![1.0, 2.0]).unwrap();
        let p = Partition::single_cluster(2).unwrap();
        let mut geom = VectorGeometry::new(&data);
        geom.refresh(&p);
        // mean = (0·1 + 3·2)/3 = 2
        assert_abs_diff_eq!(geom.point_to_mean_sq(0, 0), 4.0, epsilon = 1e-12);
        assert_abs_diff_eq!(geom.point_to_mean_sq(1, 0), 2.0, epsilon = 1e-12);
    }

    #[test]
    fn founded_cluster_mean_is_founding_point() {
        let data = VectorDataset::new(vec![0.0, 1.0, 5.0], 3, 1).unwrap();
        let mut p = Partition::single_cluster(3).unwrap();
        let mut geom = VectorGeometry::new(&data);
        geom.refresh(&p);
        let out = p.move_point(2, MoveTarget::New);
        geom.note_move(2, &out);
        assert_abs_diff_eq!(geom.point_to_mean_sq(2, 1), 0.0);
        // old cluster's mean is unchanged (still the global mean 2)
        assert_abs_diff_eq!(geom.point_to_mean_sq(0, 0), 4.0, epsilon = 1e-12);
    }
}
