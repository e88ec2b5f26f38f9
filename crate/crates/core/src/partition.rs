//! Cluster assignments with dense ids and eagerly maintained sizes.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Destination of a single-point move.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MoveTarget {
    Existing(usize),
    New,
}

/// What a [`Partition::move_point`] call actually did.
///
/// Cluster ids are reported *after* any shift-down renumbering, so callers
/// keeping per-cluster caches can mirror the change directly.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MoveOutcome {
    /// Target equals the current cluster; nothing changed.
    NoOp,
    Moved {
        /// Cluster the point left (id before any renumbering).
        from: usize,
        /// Cluster the point now belongs to (id after any renumbering).
        to: usize,
        /// Set when the source cluster emptied and was removed; ids above
        /// it shifted down by one.
        removed: Option<usize>,
        /// True when the move created a fresh cluster.
        created: bool,
    },
}

/// A partition of `n` points into `k` nonempty clusters with dense ids `0..k`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Partition {
    assign: Vec<usize>,
    sizes: Vec<usize>,
}

impl Partition {
    /// All points in a single cluster.
    pub fn single_cluster(n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidInput("partition needs at least one point".into()));
        }
        Ok(Self { assign: vec![0; n], sizes: vec![n] })
    }

    /// Builds a partition from raw labels, compacting cluster ids to dense
    /// `0..k` in order of first appearance.
    pub fn from_assignments(raw: &[usize]) -> Result<Self> {
        if raw.is_empty() {
            return Err(Error::InvalidInput("empty assignment vector".into()));
        }
        let mut remap: Vec<(usize, usize)> = Vec::new(); // (raw id, dense id), insertion order
        let mut assign = Vec::with_capacity(raw.len());
        let mut sizes = Vec::new();
        for &label in raw {
            let dense = match remap.iter().find(|(r, _)| *r == label) {
                Some(&(_, d)) => d,
                None => {
                    let d = sizes.len();
                    remap.push((label, d));
                    sizes.push(0);
                    d
                }
            };
            assign.push(dense);
            sizes[dense] += 1;
        }
        Ok(Self { assign, sizes })
    }

    pub fn n(&self) -> usize {
        self.assign.len()
    }

    pub fn k(&self) -> usize {
        self.sizes.len()
    }

    pub fn assign(&self) -> &[usize] {
        &self.assign
    }

    pub fn sizes(&self) -> &[usize] {
        &self.sizes
    }

    pub fn cluster_of(&self, i: usize) -> usize {
        self.assign[i]
    }

    pub fn size_of(&self, c: usize) -> usize {
        self.sizes[c]
    }

    /// Members of cluster `c` in point order. O(n); used by evaluators, not
    /// the solver inner loop.
    pub fn members(&self, c: usize) -> Vec<usize> {
        (0..self.n()).filter(|&i| self.assign[i] == c).collect()
    }

    /// Moves point `i` to `target`, removing the source cluster if it empties.
    /// On removal, ids above the removed cluster shift down by one (stable
    /// renumbering).
    pub fn move_point(&mut self, i: usize, target: MoveTarget) -> MoveOutcome {
        let from = self.assign[i];
        let (mut to, created) = match target {
            MoveTarget::Existing(c) => {
                if c == from {
                    return MoveOutcome::NoOp;
                }
                (c, false)
            }
            MoveTarget::New => {
                self.sizes.push(0);
                (self.sizes.len() - 1, true)
            }
        };
        self.assign[i] = to;
        self.sizes[to] += 1;
        self.sizes[from] -= 1;
        let mut removed = None;
        if self.sizes[from] == 0 {
            self.sizes.remove(from);
            for a in &mut self.assign {
                if *a > from {
                    *a -= 1;
                }
            }
            if to > from {
                to -= 1;
            }
            removed = Some(from);
        }
        MoveOutcome::Moved { from, to, removed, created }
    }

    /// Checks the structural invariants; used by tests and the audit path.
    pub fn validate(&self) -> Result<()> {
        let n: usize = self.sizes.iter().sum();
        if n != self.n() {
            return Err(Error::InvalidInput(format!(
                "sizes sum to {} but partition has {} points",
                n,
                self.n()
            )));
        }
        if self.sizes.iter().any(|&s| s == 0) {
            return Err(Error::InvalidInput("empty cluster retained".into()));
        }
        let mut counts = vec![0usize; self.k()];
        for &a in &self.assign {
            if a >= self.k() {
                return Err(Error::InvalidInput(format!("assignment {a} out of range")));
            }
            counts[a] += 1;
        }
        if counts != self.sizes {
            return Err(Error::InvalidInput("sizes inconsistent with assignments".into()));
        }
        Ok(())
    }
}
