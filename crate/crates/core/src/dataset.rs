//! Dense vector datasets with optional per-point weights.

use crate::error::{Error, Result};

/// n points in R^d, row-major, with strictly positive weights.
#[derive(Debug, Clone)]
pub struct VectorDataset {
    points: Vec<f64>,
    n: usize,
    d: usize,
    weights: Vec<f64>,
}

impl VectorDataset {
    pub fn new(points: Vec<f64>, n: usize, d: usize) -> Result<Self> {
        Self::with_weights(points, n, d, vec![1.0; n])
    }

    pub fn with_weights(points: Vec<f64>, n: usize, d: usize, weights: Vec<f64>) -> Result<Self> {
        if n == 0 || d == 0 {
            return Err(Error::InvalidInput("dataset must have n ≥ 1 and d ≥ 1".into()));
        }
        if points.len() != n * d {
            return Err(Error::InvalidInput(format!(
                "expected {} coordinates, got {}",
                n * d,
                points.len()
            )));
        }
        if points.iter().any(|x| !x.is_finite()) {
            return Err(Error::InvalidInput("non-finite coordinate".into()));
        }
        if weights.len() != n {
            return Err(Error::InvalidInput("weights length must equal n".into()));
        }
        if weights.iter().any(|w| !w.is_finite() || *w <= 0.0) {
            return Err(Error::InvalidInput("weights must be finite and positive".into()));
        }
        Ok(Self { points, n, d, weights })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn dim(&self) -> usize {
        self.d
    }

    pub fn point(&self, i: usize) -> &[f64] {
        &self.points[i * self.d..(i + 1) * self.d]
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn weight(&self, i: usize) -> f64 {
        self.weights[i]
    }

    /// Per-feature min-max rescaling to [0,1]; constant columns map to 0.
    pub fn normalized(&self) -> Self {
        let mut lo = vec![f64::INFINITY; self.d];
        let mut hi = vec![f64::NEG_INFINITY; self.d];
        for i in 0..self.n {
            for (j, &x) in self.point(i).iter().enumerate() {
                lo[j] = lo[j].min(x);
                hi[j] = hi[j].max(x);
            }
        }
        let mut points = Vec::with_capacity(self.points.len());
        for i in 0..self.n {
            for (j, &x) in self.point(i).iter().enumerate() {
                let range = hi[j] - lo[j];
                points.push(if range > 0.0 { (x - lo[j]) / range } else { 0.0 });
            }
        }
        Self { points, n: self.n, d: self.d, weights: self.weights.clone() }
    }

    pub fn squared_distance(&self, i: usize, j: usize) -> f64 {
        self.point(i)
            .iter()
            .zip(self.point(j))
            .map(|(a, b)| (a - b) * (a - b))
            .sum()
    }

    /// Subset of rows in slice order; weights carried along.
    pub fn subset(&self, rows: &[usize]) -> Result<Self> {
        let mut points = Vec::with_capacity(rows.len() * self.d);
        let mut weights = Vec::with_capacity(rows.len());
        for &r in rows {
            if r >= self.n {
                return Err(Error::InvalidInput(format!("row {r} out of range")));
            }
            points.extend_from_slice(self.point(r));
            weights.push(self.weights[r]);
        }
        Self::with_weights(points, rows.len(), self.d, weights)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn normalize_maps_constant_column_to_zero() {
        let d = VectorDataset::new(vec![1.0, 5.0, 1.0, 7.0, 1.0, 9.0], 3, 2).unwrap();
        let norm = d.normalized();
        assert_eq!(norm.point(0), &[0.0, 0.0]);
        assert_eq!(norm.point(1), &[0.0, 0.5]);
        assert_eq!(norm.point(2), &[0.0, 1.0]);
    }

    #[test]
    fn rejects_nonpositive_weights() {
        assert!(VectorDataset::with_weights(vec![0.0], 1, 1, vec![0.0]).is_err());
    }

    #[test]
    fn rejects_non_finite() {
        assert!(VectorDataset::new(vec![f64::NAN], 1, 1).is_err());
    }
}
