use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::tree::{DecisionTree, MaxFeatures, TreeBuilder, TreeConfig};
use super::{check_training_set, class_index};
use crate::corpus::Label;
use crate::error::{Error, Result};
use crate::sparse::FeatureMatrix;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ForestConfig {
    pub n_trees: usize,
    pub max_features: MaxFeatures,
    pub bootstrap: bool,
    pub seed: u64,
}

impl Default for ForestConfig {
    fn default() -> Self {
        ForestConfig {
            n_trees: 100,
            max_features: MaxFeatures::Sqrt,
            bootstrap: true,
            seed: 0,
        }
    }
}

/// Bagged CART trees. Tree `i` draws its bootstrap sample and its per-split
/// candidate columns from ChaCha8 seeded with `seed ^ i`, so the result does
/// not depend on how trees are scheduled across threads.
///
/// Each split considers `max_features` columns drawn without replacement from
/// the columns that are not constant within the node.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RandomForest {
    pub config: ForestConfig,
    pub trees: Vec<DecisionTree>,
}

impl RandomForest {
    pub fn fit(x: &FeatureMatrix, labels: &[Label], config: ForestConfig) -> Result<Self> {
        check_training_set(x, labels)?;
        if config.n_trees == 0 {
            return Err(Error::Config("forest needs at least one tree".into()));
        }
        let classes: Vec<usize> = labels.iter().map(|&l| class_index(l)).collect();
        let n = labels.len();
        let tree_config = TreeConfig {
            max_features: config.max_features,
            ..TreeConfig::default()
        };
        let trees = (0..config.n_trees)
            .into_par_iter()
            .map(|i| {
                let mut rng = ChaCha8Rng::seed_from_u64(config.seed ^ i as u64);
                let samples: Vec<usize> = if config.bootstrap {
                    (0..n).map(|_| rng.gen_range(0..n)).collect()
                } else {
                    (0..n).collect()
                };
                TreeBuilder {
                    x,
                    classes: classes.clone(),
                    config: tree_config,
                    rng: Some(&mut rng),
                }
                .build(samples)
            })
            .collect();
        Ok(RandomForest { config, trees })
    }

    /// Majority vote over trees; ties go to INFORMATIVE.
    pub fn predict(&self, x: &FeatureMatrix) -> Result<Vec<Label>> {
        x.check_dim(self.trees[0].dim)?;
        Ok(x.rows()
            .map(|row| {
                let pos = self
                    .trees
                    .iter()
                    .filter(|t| t.predict_row(row).is_positive())
                    .count();
                if 2 * pos >= self.trees.len() {
                    Label::Informative
                } else {
                    Label::Uninformative
                }
            })
            .collect())
    }
}
