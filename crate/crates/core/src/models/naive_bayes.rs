use serde::{Deserialize, Serialize};

use super::{check_training_set, class_index};
use crate::corpus::Label;
use crate::error::{Error, Result};
use crate::sparse::FeatureMatrix;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct NbConfig {
    pub alpha: f64,
}

impl Default for NbConfig {
    fn default() -> Self {
        NbConfig { alpha: 1.0 }
    }
}

/// Multinomial naive Bayes with additive smoothing. Per-class arrays are
/// indexed in [`Label::ALL`] order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MultinomialNb {
    pub config: NbConfig,
    pub class_log_prior: [f64; 2],
    pub feature_log_prob: [Vec<f64>; 2],
}

impl MultinomialNb {
    pub fn fit(x: &FeatureMatrix, labels: &[Label], config: NbConfig) -> Result<Self> {
        check_training_set(x, labels)?;
        if config.alpha.is_nan() || config.alpha <= 0.0 {
            return Err(Error::Config("alpha must be positive".into()));
        }
        let d = x.dim();
        let mut feature_count = [vec![0.0; d], vec![0.0; d]];
        let mut class_count = [0usize; 2];
        let mut negative = false;
        for (row, &label) in x.rows().zip(labels) {
            let c = class_index(label);
            class_count[c] += 1;
            row.for_each_nonzero(|j, v| {
                negative |= v < 0.0;
                feature_count[c][j] += v;
            });
        }
        if negative {
            return Err(Error::InvalidData(
                "multinomial naive Bayes needs non-negative features".into(),
            ));
        }
        let n = labels.len() as f64;
        let class_log_prior = class_count.map(|k| (k as f64 / n).ln());
        let feature_log_prob = feature_count.map(|counts| {
            let total: f64 = counts.iter().sum::<f64>() + config.alpha * d as f64;
            counts
                .iter()
                .map(|&k| ((k + config.alpha) / total).ln())
                .collect()
        });
        Ok(MultinomialNb {
            config,
            class_log_prior,
            feature_log_prob,
        })
    }

    /// Unnormalized `ln P(c) + sum_j x_j ln P(j | c)` per class.
    pub fn joint_log_likelihood(&self, x: &FeatureMatrix) -> Result<Vec<[f64; 2]>> {
        x.check_dim(self.feature_log_prob[0].len())?;
        Ok(x.rows()
            .map(|row| {
                let mut jll = self.class_log_prior;
                row.for_each_nonzero(|j, v| {
                    jll[0] += v * self.feature_log_prob[0][j];
                    jll[1] += v * self.feature_log_prob[1][j];
                });
                jll
            })
            .collect())
    }

    /// Normalized class posteriors.
    pub fn predict_proba(&self, x: &FeatureMatrix) -> Result<Vec<[f64; 2]>> {
        Ok(self
            .joint_log_likelihood(x)?
            .into_iter()
            .map(|[a, b]| {
                let m = a.max(b);
                let z = m + ((a - m).exp() + (b - m).exp()).ln();
                [(a - z).exp(), (b - z).exp()]
            })
            .collect())
    }

    /// Argmax of the joint log-likelihood; ties go to INFORMATIVE.
    pub fn predict(&self, x: &FeatureMatrix) -> Result<Vec<Label>> {
        Ok(self
            .joint_log_likelihood(x)?
            .into_iter()
            .map(|[pos, neg]| {
                if pos >= neg {
                    Label::Informative
                } else {
                    Label::Uninformative
                }
            })
            .collect())
    }
}
