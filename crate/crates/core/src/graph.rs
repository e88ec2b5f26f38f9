//! Sparse symmetric weighted graphs in compressed-sparse-row form.

use std::collections::BTreeMap;

use crate::error::{Error, Result};

/// Undirected nonnegatively weighted graph. Both (i,j) and (j,i) are stored;
/// rows are sorted by column. Self-loops are permitted.
#[derive(Debug, Clone)]
pub struct WeightedGraph {
    n: usize,
    row_ptr: Vec<usize>,
    col: Vec<usize>,
    val: Vec<f64>,
    degrees: Vec<f64>,
}

impl WeightedGraph {
    /// Builds a graph from an edge list. Near-symmetric input is tolerated:
    /// duplicate and reversed entries are merged with `max(A_ij, A_ji)`.
    pub fn from_edges(n: usize, edges: &[(usize, usize, f64)]) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidInput("graph needs at least one node".into()));
        }
        let mut merged: BTreeMap<(usize, usize), f64> = BTreeMap::new();
        for &(u, v, w) in edges {
            if u >= n || v >= n {
                return Err(Error::InvalidInput(format!(
                    "edge ({u}, {v}) references a node outside 0..{n}"
                )));
            }
            if !w.is_finite() || w < 0.0 {
                return Err(Error::InvalidInput(format!(
                    "edge ({u}, {v}) has invalid weight {w}"
                )));
            }
            let key = (u.min(v), u.max(v));
            let slot = merged.entry(key).or_insert(w);
            if w > *slot {
                *slot = w;
            }
        }

        let mut rows: Vec<BTreeMap<usize, f64>> = vec![BTreeMap::new(); n];
        for (&(u, v), &w) in &merged {
            if w == 0.0 {
                continue;
            }
            rows[u].insert(v, w);
            rows[v].insert(u, w);
        }

        let mut row_ptr = Vec::with_capacity(n + 1);
        let mut col = Vec::new();
        let mut val = Vec::new();
        let mut degrees = Vec::with_capacity(n);
        row_ptr.push(0);
        for row in &rows {
            let mut deg = 0.0;
            for (&j, &w) in row {
                col.push(j);
                val.push(w);
                deg += w;
            }
            row_ptr.push(col.len());
            degrees.push(deg);
        }
        Ok(Self { n, row_ptr, col, val, degrees })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Stored entry count (each undirected edge counts twice).
    pub fn nnz(&self) -> usize {
        self.col.len()
    }

    pub fn degrees(&self) -> &[f64] {
        &self.degrees
    }

    pub fn degree(&self, i: usize) -> f64 {
        self.degrees[i]
    }

    /// Row of the adjacency matrix as (neighbor, weight) pairs, sorted by id.
    pub fn neighbors(&self, i: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        let lo = self.row_ptr[i];
        let hi = self.row_ptr[i + 1];
        self.col[lo..hi].iter().copied().zip(self.val[lo..hi].iter().copied())
    }

    /// A_ij lookup by binary search within the row.
    pub fn weight(&self, i: usize, j: usize) -> f64 {
        let lo = self.row_ptr[i];
        let hi = self.row_ptr[i + 1];
        match self.col[lo..hi].binary_search(&j) {
            Ok(pos) => self.val[lo + pos],
            Err(_) => 0.0,
        }
    }

    /// All undirected edges, each once, as (u, v, w) with u ≤ v.
    pub fn undirected_edges(&self) -> Vec<(usize, usize, f64)> {
        let mut out = Vec::new();
        for i in 0..self.n {
            for (j, w) in self.neighbors(i) {
                if j >= i {
                    out.push((i, j, w));
                }
            }
        }
        out
    }

    /// Induced subgraph on `nodes` (ids relabeled to 0..len in slice order).
    pub fn induced_subgraph(&self, nodes: &[usize]) -> Result<Self> {
        let mut index = vec![usize::MAX; self.n];
        for (new, &old) in nodes.iter().enumerate() {
            if old >= self.n {
                return Err(Error::InvalidInput(format!("node {old} out of range")));
            }
            index[old] = new;
        }
        let mut edges = Vec::new();
        for (new_u, &old_u) in nodes.iter().enumerate() {
            for (old_v, w) in self.neighbors(old_u) {
                let new_v = index[old_v];
                if new_v != usize::MAX && new_v >= new_u {
                    edges.push((new_u, new_v, w));
                }
            }
        }
        Self::from_edges(nodes.len(), &edges)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn symmetrize_by_max() {
        let g = WeightedGraph::from_edges(2, &[(0, 1, 1.0), (1, 0, 3.0)]).unwrap();
        assert_eq!(g.weight(0, 1), 3.0);
        assert_eq!(g.weight(1, 0), 3.0);
        assert_eq!(g.degree(0), 3.0);
    }

    #[test]
    fn degrees_are_row_sums_with_self_loops_once() {
        let g = WeightedGraph::from_edges(3, &[(0, 1, 2.0), (0, 0, 0.5), (1, 2, 1.0)]).unwrap();
        assert!((g.degree(0) - 2.5).abs() < 1e-12);
        assert!((g.degree(1) - 3.0).abs() < 1e-12);
        assert!((g.degree(2) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn zero_weight_edges_dropped() {
        let g = WeightedGraph::from_edges(2, &[(0, 1, 0.0)]).unwrap();
        assert_eq!(g.nnz(), 0);
    }

    #[test]
    fn negative_weight_rejected() {
        assert!(WeightedGraph::from_edges(2, &[(0, 1, -1.0)]).is_err());
    }

    #[test]
    fn induced_subgraph_relabels() {
        let g =
            WeightedGraph::from_edges(4, &[(0, 1, 1.0), (1, 2, 2.0), (2, 3, 3.0)]).unwrap();
        let sub = g.induced_subgraph(&[1, 2]).unwrap();
        assert_eq!(sub.n(), 2);
        assert_eq!(sub.weight(0, 1), 2.0);
        assert_eq!(sub.nnz(), 2);
    }
}
