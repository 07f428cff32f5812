//! Sparse vectors and the row container shared by every model.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Sparse real vector with strictly increasing indices and non-zero values.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct SparseVector {
    pub dim: usize,
    pub indices: Vec<usize>,
    pub values: Vec<f64>,
}

impl SparseVector {
    pub fn zeros(dim: usize) -> Self {
        SparseVector {
            dim,
            indices: Vec::new(),
            values: Vec::new(),
        }
    }

    /// Builds from `(index, value)` pairs in any order; duplicate indices are
    /// summed and zeros dropped.
    pub fn from_pairs(dim: usize, mut pairs: Vec<(usize, f64)>) -> Self {
        pairs.sort_by_key(|&(i, _)| i);
        let mut indices: Vec<usize> = Vec::with_capacity(pairs.len());
        let mut values: Vec<f64> = Vec::with_capacity(pairs.len());
        for (i, v) in pairs {
            debug_assert!(i < dim);
            if indices.last() == Some(&i) {
                *values.last_mut().unwrap() += v;
            } else {
                indices.push(i);
                values.push(v);
            }
        }
        let mut out = SparseVector::zeros(dim);
        for (i, v) in indices.into_iter().zip(values) {
            if v != 0.0 {
                out.indices.push(i);
                out.values.push(v);
            }
        }
        out
    }

    pub fn from_dense(dense: &[f64]) -> Self {
        let mut out = SparseVector::zeros(dense.len());
        for (i, &v) in dense.iter().enumerate() {
            if v != 0.0 {
                out.indices.push(i);
                out.values.push(v);
            }
        }
        out
    }

    pub fn to_dense(&self) -> Vec<f64> {
        let mut d = vec![0.0; self.dim];
        for (&i, &v) in self.indices.iter().zip(&self.values) {
            d[i] = v;
        }
        d
    }

    pub fn nnz(&self) -> usize {
        self.indices.len()
    }

    pub fn get(&self, index: usize) -> f64 {
        match self.indices.binary_search(&index) {
            Ok(p) => self.values[p],
            Err(_) => 0.0,
        }
    }

    pub fn iter(&self) -> impl Iterator<Item = (usize, f64)> + '_ {
        self.indices
            .iter()
            .copied()
            .zip(self.values.iter().copied())
    }

    pub fn norm(&self) -> f64 {
        self.values.iter().map(|v| v * v).sum::<f64>().sqrt()
    }

    pub fn is_valid(&self) -> bool {
        self.indices.windows(2).all(|w| w[0] < w[1])
            && self.indices.last().is_none_or(|&i| i < self.dim)
            && self.values.iter().all(|&v| v != 0.0)
            && self.indices.len() == self.values.len()
    }
}

/// Borrowed view of one row.
#[derive(Debug, Clone, Copy)]
pub enum RowView<'a> {
    Sparse(&'a SparseVector),
    Dense(&'a [f64]),
}

impl<'a> RowView<'a> {
    /// Non-zero entries in increasing column order.
    pub fn for_each_nonzero(&self, mut f: impl FnMut(usize, f64)) {
        match self {
            RowView::Sparse(s) => s.iter().for_each(|(i, v)| f(i, v)),
            RowView::Dense(d) => d
                .iter()
                .enumerate()
                .filter(|(_, &v)| v != 0.0)
                .for_each(|(i, &v)| f(i, v)),
        }
    }

    pub fn dot_dense(&self, w: &[f64]) -> f64 {
        match self {
            RowView::Sparse(s) => s.iter().map(|(i, v)| v * w[i]).sum(),
            RowView::Dense(d) => d.iter().zip(w).map(|(a, b)| a * b).sum(),
        }
    }

    pub fn squared_norm(&self) -> f64 {
        match self {
            RowView::Sparse(s) => s.values.iter().map(|v| v * v).sum(),
            RowView::Dense(d) => d.iter().map(|v| v * v).sum(),
        }
    }

    pub fn to_sparse(&self) -> SparseVector {
        match self {
            RowView::Sparse(s) => (*s).clone(),
            RowView::Dense(d) => SparseVector::from_dense(d),
        }
    }
}

/// Dot product of two rows of the same dimension.
pub fn dot(a: RowView<'_>, b: RowView<'_>) -> f64 {
    match (a, b) {
        (RowView::Dense(x), RowView::Dense(y)) => x.iter().zip(y).map(|(p, q)| p * q).sum(),
        (RowView::Sparse(s), RowView::Dense(d)) | (RowView::Dense(d), RowView::Sparse(s)) => {
            s.iter().map(|(i, v)| v * d[i]).sum()
        }
        (RowView::Sparse(x), RowView::Sparse(y)) => {
            let (mut p, mut q, mut acc) = (0, 0, 0.0);
            while p < x.indices.len() && q < y.indices.len() {
                match x.indices[p].cmp(&y.indices[q]) {
                    std::cmp::Ordering::Less => p += 1,
                    std::cmp::Ordering::Greater => q += 1,
                    std::cmp::Ordering::Equal => {
                        acc += x.values[p] * y.values[q];
                        p += 1;
                        q += 1;
                    }
                }
            }
            acc
        }
    }
}

/// Squared Euclidean distance, summing `(a_j - b_j)^2` in increasing column
/// order over the union of non-zero columns.
pub fn squared_distance(a: RowView<'_>, b: RowView<'_>) -> f64 {
    match (a, b) {
        (RowView::Dense(x), RowView::Dense(y)) => {
            x.iter().zip(y).map(|(p, q)| (p - q) * (p - q)).sum()
        }
        (RowView::Sparse(s), RowView::Dense(d)) | (RowView::Dense(d), RowView::Sparse(s)) => {
            let mut acc = 0.0;
            let mut p = 0;
            for (j, &dv) in d.iter().enumerate() {
                let sv = if p < s.indices.len() && s.indices[p] == j {
                    p += 1;
                    s.values[p - 1]
                } else {
                    0.0
                };
                acc += (sv - dv) * (sv - dv);
            }
            acc
        }
        (RowView::Sparse(x), RowView::Sparse(y)) => {
            let (mut p, mut q, mut acc) = (0, 0, 0.0);
            loop {
                let xi = x.indices.get(p).copied();
                let yi = y.indices.get(q).copied();
                let diff = match (xi, yi) {
                    (None, None) => break,
                    (Some(i), Some(j)) if i == j => {
                        p += 1;
                        q += 1;
                        x.values[p - 1] - y.values[q - 1]
                    }
                    (Some(i), Some(j)) if i < j => {
                        p += 1;
                        x.values[p - 1]
                    }
                    (Some(_), None) => {
                        p += 1;
                        x.values[p - 1]
                    }
                    _ => {
                        q += 1;
                        -y.values[q - 1]
                    }
                };
                acc += diff * diff;
            }
            acc
        }
    }
}

/// Rows of equal dimension, stored sparse or dense.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "layout", rename_all = "snake_case")]
pub enum FeatureMatrix {
    Sparse { dim: usize, rows: Vec<SparseVector> },
    Dense { dim: usize, rows: Vec<Vec<f64>> },
}

impl FeatureMatrix {
    pub fn sparse(dim: usize, rows: Vec<SparseVector>) -> Result<Self> {
        for r in &rows {
            if r.dim != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    got: r.dim,
                });
            }
        }
        Ok(FeatureMatrix::Sparse { dim, rows })
    }

    pub fn dense(dim: usize, rows: Vec<Vec<f64>>) -> Result<Self> {
        for r in &rows {
            if r.len() != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    got: r.len(),
                });
            }
        }
        Ok(FeatureMatrix::Dense { dim, rows })
    }

    /// Dense matrix whose dimension is taken from the first row.
    pub fn from_dense_rows(rows: Vec<Vec<f64>>) -> Result<Self> {
        let dim = rows.first().map_or(0, Vec::len);
        Self::dense(dim, rows)
    }

    pub fn dim(&self) -> usize {
        match self {
            FeatureMatrix::Sparse { dim, .. } | FeatureMatrix::Dense { dim, .. } => *dim,
        }
    }

    pub fn n_rows(&self) -> usize {
        match self {
            FeatureMatrix::Sparse { rows, .. } => rows.len(),
            FeatureMatrix::Dense { rows, .. } => rows.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.n_rows() == 0
    }

    pub fn row(&self, i: usize) -> RowView<'_> {
        match self {
            FeatureMatrix::Sparse { rows, .. } => RowView::Sparse(&rows[i]),
            FeatureMatrix::Dense { rows, .. } => RowView::Dense(&rows[i]),
        }
    }

    pub fn rows(&self) -> impl Iterator<Item = RowView<'_>> + '_ {
        (0..self.n_rows()).map(move |i| self.row(i))
    }

    pub fn is_dense(&self) -> bool {
        matches!(self, FeatureMatrix::Dense { .. })
    }

    pub fn subset(&self, indices: &[usize]) -> FeatureMatrix {
        match self {
            FeatureMatrix::Sparse { dim, rows } => FeatureMatrix::Sparse {
                dim: *dim,
                rows: indices.iter().map(|&i| rows[i].clone()).collect(),
            },
            FeatureMatrix::Dense { dim, rows } => FeatureMatrix::Dense {
                dim: *dim,
                rows: indices.iter().map(|&i| rows[i].clone()).collect(),
            },
        }
    }

    pub fn all_finite(&self) -> bool {
        match self {
            FeatureMatrix::Sparse { rows, .. } => {
                rows.iter().all(|r| r.values.iter().all(|v| v.is_finite()))
            }
            FeatureMatrix::Dense { rows, .. } => {
                rows.iter().all(|r| r.iter().all(|v| v.is_finite()))
            }
        }
    }

    /// Fails unless `other` has `expected` columns.
    pub fn check_dim(&self, expected: usize) -> Result<()> {
        if self.dim() != expected {
            return Err(Error::DimensionMismatch {
                expected,
                got: self.dim(),
            });
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn from_pairs_merges_and_drops_zeros() {
        let v = SparseVector::from_pairs(5, vec![(3, 1.0), (1, 2.0), (3, -1.0), (0, 0.5)]);
        assert_eq!(v.indices, vec![0, 1]);
        assert_eq!(v.values, vec![0.5, 2.0]);
        assert!(v.is_valid());
    }

    fn arb_pair() -> impl Strategy<Value = (Vec<f64>, Vec<f64>)> {
        (1usize..12).prop_flat_map(|n| {
            let cell = prop_oneof![Just(0.0), -3.0..3.0f64];
            (
                proptest::collection::vec(cell.clone(), n),
                proptest::collection::vec(cell, n),
            )
        })
    }

    proptest! {
        #[test]
        fn sparse_and_dense_views_agree((a, b) in arb_pair()) {
            let (sa, sb) = (SparseVector::from_dense(&a), SparseVector::from_dense(&b));
            let dense = squared_distance(RowView::Dense(&a), RowView::Dense(&b));
            prop_assert_eq!(squared_distance(RowView::Sparse(&sa), RowView::Sparse(&sb)), dense);
            prop_assert_eq!(squared_distance(RowView::Sparse(&sa), RowView::Dense(&b)), dense);
            prop_assert_eq!(squared_distance(RowView::Dense(&a), RowView::Sparse(&sb)), dense);
            let d = dot(RowView::Dense(&a), RowView::Dense(&b));
            prop_assert!((dot(RowView::Sparse(&sa), RowView::Sparse(&sb)) - d).abs() < 1e-12);
            prop_assert_eq!(sa.to_dense(), a);
        }
    }
}
