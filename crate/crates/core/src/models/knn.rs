use std::sync::OnceLock;

use serde::{Deserialize, Serialize};

use super::check_training_set;
use crate::corpus::Label;
use crate::error::{Error, Result};
use crate::sparse::{squared_distance, FeatureMatrix, RowView};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct KnnConfig {
    pub k: usize,
}

impl Default for KnnConfig {
    fn default() -> Self {
        KnnConfig { k: 5 }
    }
}

/// Column-major copy of sparse training rows for fast dot products.
#[derive(Debug, Clone, Default)]
struct Postings {
    columns: Vec<Vec<(u32, f64)>>,
    squared_norms: Vec<f64>,
}

/// k-nearest neighbours under Euclidean distance.
///
/// Neighbours are ordered by `(distance, training index)`. The vote is a
/// majority; a tied vote goes to the class with the smaller summed distance,
/// then to INFORMATIVE.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct KNearest {
    pub config: KnnConfig,
    pub train: FeatureMatrix,
    pub labels: Vec<Label>,
    #[serde(skip)]
    postings: OnceLock<Postings>,
}

impl PartialEq for KNearest {
    fn eq(&self, other: &Self) -> bool {
        self.config == other.config && self.train == other.train && self.labels == other.labels
    }
}

impl KNearest {
    pub fn fit(x: &FeatureMatrix, labels: &[Label], config: KnnConfig) -> Result<Self> {
        check_training_set(x, labels)?;
        if config.k == 0 || config.k > labels.len() {
            return Err(Error::Config(format!(
                "k={} must be between 1 and the training size {}",
                config.k,
                labels.len()
            )));
        }
        Ok(KNearest {
            config,
            train: x.clone(),
            labels: labels.to_vec(),
            postings: OnceLock::new(),
        })
    }

    fn postings(&self) -> Option<&Postings> {
        let FeatureMatrix::Sparse { dim, rows } = &self.train else {
            return None;
        };
        Some(self.postings.get_or_init(|| {
            let mut columns = vec![Vec::new(); *dim];
            for (i, r) in rows.iter().enumerate() {
                for (j, v) in r.iter() {
                    columns[j].push((i as u32, v));
                }
            }
            Postings {
                columns,
                squared_norms: rows
                    .iter()
                    .map(|r| r.values.iter().map(|v| v * v).sum())
                    .collect(),
            }
        }))
    }

    /// Indices and squared distances of the `k` nearest training rows.
    pub fn neighbours(&self, query: RowView<'_>) -> Vec<(usize, f64)> {
        let k = self.config.k;
        let n = self.train.n_rows();
        let mut exact: Vec<(usize, f64)> = match (self.postings(), query) {
            (Some(post), RowView::Sparse(q)) => {
                // Screen with |q|^2 + |x|^2 - 2 q.x, then rank candidates by
                // exact distance.
                let mut dots = vec![0.0; n];
                for (j, qv) in q.iter() {
                    for &(i, xv) in &post.columns[j] {
                        dots[i as usize] += qv * xv;
                    }
                }
                let qn: f64 = q.values.iter().map(|v| v * v).sum();
                let approx: Vec<f64> = (0..n)
                    .map(|i| qn + post.squared_norms[i] - 2.0 * dots[i])
                    .collect();
                let mut sorted = approx.clone();
                let (_, kth, _) = sorted.select_nth_unstable_by(k - 1, |a, b| a.total_cmp(b));
                let scale = qn + post.squared_norms.iter().cloned().fold(0.0, f64::max) + 1.0;
                let cutoff = *kth + 1e-9 * scale;
                (0..n)
                    .filter(|&i| approx[i] <= cutoff)
                    .map(|i| (i, squared_distance(query, self.train.row(i))))
                    .collect()
            }
            _ => (0..n)
                .map(|i| (i, squared_distance(query, self.train.row(i))))
                .collect(),
        };
        exact.sort_by(|a, b| a.1.total_cmp(&b.1).then(a.0.cmp(&b.0)));
        exact.truncate(k);
        exact
    }

    pub fn predict_row(&self, query: RowView<'_>) -> Label {
        let mut votes = [0usize; 2];
        let mut dist = [0.0f64; 2];
        for (i, d2) in self.neighbours(query) {
            let c = super::class_index(self.labels[i]);
            votes[c] += 1;
            dist[c] += d2.sqrt();
        }
        if votes[0] != votes[1] {
            return if votes[0] > votes[1] {
                Label::Informative
            } else {
                Label::Uninformative
            };
        }
        if dist[1] < dist[0] {
            Label::Uninformative
        } else {
            Label::Informative
        }
    }

    pub fn predict(&self, x: &FeatureMatrix) -> Result<Vec<Label>> {
        x.check_dim(self.train.dim())?;
        Ok(x.rows().map(|r| self.predict_row(r)).collect())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn k1_returns_the_stored_label() {
        let x = FeatureMatrix::from_dense_rows(vec![vec![0.0, 0.0], vec![5.0, 5.0]]).unwrap();
        let y = [Label::Uninformative, Label::Informative];
        let m = KNearest::fit(&x, &y, KnnConfig { k: 1 }).unwrap();
        assert_eq!(m.predict(&x).unwrap(), y);
    }

    #[test]
    fn tied_vote_uses_summed_distance() {
        let x = FeatureMatrix::from_dense_rows(vec![vec![0.0], vec![3.0]]).unwrap();
        let y = [Label::Uninformative, Label::Informative];
        let m = KNearest::fit(&x, &y, KnnConfig { k: 2 }).unwrap();
        let q = FeatureMatrix::from_dense_rows(vec![vec![1.0], vec![2.0], vec![1.5]]).unwrap();
        assert_eq!(
            m.predict(&q).unwrap(),
            vec![Label::Uninformative, Label::Informative, Label::Informative]
        );
    }

    #[test]
    fn k_larger_than_training_set() {
        let x = FeatureMatrix::from_dense_rows(vec![vec![0.0], vec![1.0]]).unwrap();
        let y = [Label::Uninformative, Label::Informative];
        assert!(matches!(
            KNearest::fit(&x, &y, KnnConfig { k: 3 }),
            Err(Error::Config(_))
        ));
    }
}
