use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::corpus::Label;
use crate::error::{Error, Result};
use crate::sparse::FeatureMatrix;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(default)]
pub struct DummyConfig {
    pub seed: u64,
}

/// Stratified random guessing: each prediction is an independent draw from
/// the training label distribution.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StratifiedDummy {
    pub config: DummyConfig,
    /// Probability of predicting INFORMATIVE.
    pub positive_rate: f64,
}

impl StratifiedDummy {
    pub fn fit(labels: &[Label], config: DummyConfig) -> Result<Self> {
        if labels.is_empty() {
            return Err(Error::EmptyDataset);
        }
        let pos = labels.iter().filter(|l| l.is_positive()).count();
        Ok(StratifiedDummy {
            config,
            positive_rate: pos as f64 / labels.len() as f64,
        })
    }

    /// Draws one label per row from a generator seeded with the model seed,
    /// so repeated calls give the same sequence.
    pub fn predict(&self, x: &FeatureMatrix) -> Vec<Label> {
        let mut rng = ChaCha8Rng::seed_from_u64(self.config.seed);
        (0..x.n_rows())
            .map(|_| {
                if rng.gen::<f64>() < self.positive_rate {
                    Label::Informative
                } else {
                    Label::Uninformative
                }
            })
            .collect()
    }
}
