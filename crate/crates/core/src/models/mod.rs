//! Classifiers with a shared fit/predict surface.
//!
//! INFORMATIVE is the positive class everywhere, and every tie (decision
//! score exactly zero, equal votes, equal likelihoods) resolves to it.

pub mod dummy;
pub mod forest;
pub mod knn;
pub mod logreg;
pub mod naive_bayes;
pub mod svm;
pub mod tree;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

pub use dummy::{DummyConfig, StratifiedDummy};
pub use forest::{ForestConfig, RandomForest};
pub use knn::{KNearest, KnnConfig};
pub use logreg::{LogRegConfig, LogisticRegression};
pub use naive_bayes::{MultinomialNb, NbConfig};
pub use svm::{Gamma, KernelSvm, SvmConfig};
pub use tree::{DecisionTree, MaxFeatures, TreeConfig};

use crate::corpus::Label;
use crate::error::{Error, Result};
use crate::sparse::FeatureMatrix;

/// Index into per-class arrays, [`Label::ALL`] order.
pub(crate) fn class_index(label: Label) -> usize {
    match label {
        Label::Informative => 0,
        Label::Uninformative => 1,
    }
}

pub(crate) fn check_training_set(x: &FeatureMatrix, labels: &[Label]) -> Result<()> {
    if x.n_rows() != labels.len() {
        return Err(Error::DimensionMismatch {
            expected: labels.len(),
            got: x.n_rows(),
        });
    }
    if labels.is_empty() {
        return Err(Error::EmptyDataset);
    }
    if labels.iter().all(|&l| l == labels[0]) {
        return Err(Error::SingleClass);
    }
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ModelKind {
    Logreg,
    Nb,
    Tree,
    Forest,
    Knn,
    Svm,
    Dummy,
}

impl ModelKind {
    pub const ALL: [ModelKind; 7] = [
        ModelKind::Logreg,
        ModelKind::Nb,
        ModelKind::Tree,
        ModelKind::Forest,
        ModelKind::Knn,
        ModelKind::Svm,
        ModelKind::Dummy,
    ];

    pub fn name(self) -> &'static str {
        match self {
            ModelKind::Logreg => "logreg",
            ModelKind::Nb => "nb",
            ModelKind::Tree => "tree",
            ModelKind::Forest => "forest",
            ModelKind::Knn => "knn",
            ModelKind::Svm => "svm",
            ModelKind::Dummy => "dummy",
        }
    }

    /// Row label used in text reports.
    pub fn display_name(self) -> &'static str {
        match self {
            ModelKind::Logreg => "Logistic Regression",
            ModelKind::Nb => "Multinomial Naive-Bayes",
            ModelKind::Tree => "Decision Tree",
            ModelKind::Forest => "Random Forest",
            ModelKind::Knn => "K-Neighbors",
            ModelKind::Svm => "SVM (RBF)",
            ModelKind::Dummy => "Baseline Stratified Dummy",
        }
    }

    pub fn default_config(self) -> ModelConfig {
        match self {
            ModelKind::Logreg => ModelConfig::Logreg(LogRegConfig::default()),
            ModelKind::Nb => ModelConfig::Nb(NbConfig::default()),
            ModelKind::Tree => ModelConfig::Tree(TreeConfig::default()),
            ModelKind::Forest => ModelConfig::Forest(ForestConfig::default()),
            ModelKind::Knn => ModelConfig::Knn(KnnConfig::default()),
            ModelKind::Svm => ModelConfig::Svm(SvmConfig::default()),
            ModelKind::Dummy => ModelConfig::Dummy(DummyConfig::default()),
        }
    }
}

impl fmt::Display for ModelKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ModelKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        ModelKind::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| Error::Config(format!("unknown model `{s}`")))
    }
}

/// Hyper-parameters for one classifier family.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "params", rename_all = "snake_case")]
pub enum ModelConfig {
    Logreg(LogRegConfig),
    Nb(NbConfig),
    Tree(TreeConfig),
    Forest(ForestConfig),
    Knn(KnnConfig),
    Svm(SvmConfig),
    Dummy(DummyConfig),
}

impl ModelConfig {
    pub fn kind(&self) -> ModelKind {
        match self {
            ModelConfig::Logreg(_) => ModelKind::Logreg,
            ModelConfig::Nb(_) => ModelKind::Nb,
            ModelConfig::Tree(_) => ModelKind::Tree,
            ModelConfig::Forest(_) => ModelKind::Forest,
            ModelConfig::Knn(_) => ModelKind::Knn,
            ModelConfig::Svm(_) => ModelKind::Svm,
            ModelConfig::Dummy(_) => ModelKind::Dummy,
        }
    }

    /// Copy with the random seed replaced, for the seeded families.
    pub fn with_seed(self, seed: u64) -> Self {
        match self {
            ModelConfig::Forest(c) => ModelConfig::Forest(ForestConfig { seed, ..c }),
            ModelConfig::Dummy(_) => ModelConfig::Dummy(DummyConfig { seed }),
            other => other,
        }
    }

    pub fn fit(&self, x: &FeatureMatrix, labels: &[Label]) -> Result<TrainedModel> {
        Ok(match *self {
            ModelConfig::Logreg(c) => TrainedModel::Logreg(LogisticRegression::fit(x, labels, c)?),
            ModelConfig::Nb(c) => TrainedModel::Nb(MultinomialNb::fit(x, labels, c)?),
            ModelConfig::Tree(c) => TrainedModel::Tree(DecisionTree::fit(x, labels, c)?),
            ModelConfig::Forest(c) => TrainedModel::Forest(RandomForest::fit(x, labels, c)?),
            ModelConfig::Knn(c) => TrainedModel::Knn(KNearest::fit(x, labels, c)?),
            ModelConfig::Svm(c) => TrainedModel::Svm(KernelSvm::fit(x, labels, c)?),
            ModelConfig::Dummy(c) => {
                x.check_dim(x.dim())?;
                if x.n_rows() != labels.len() {
                    return Err(Error::DimensionMismatch {
                        expected: labels.len(),
                        got: x.n_rows(),
                    });
                }
                TrainedModel::Dummy(StratifiedDummy::fit(labels, c)?, x.dim())
            }
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "model", rename_all = "snake_case")]
pub enum TrainedModel {
    Logreg(LogisticRegression),
    Nb(MultinomialNb),
    Tree(DecisionTree),
    Forest(RandomForest),
    Knn(KNearest),
    Svm(KernelSvm),
    /// Dummy model plus the feature dimension it was trained with.
    Dummy(StratifiedDummy, usize),
}

impl TrainedModel {
    pub fn kind(&self) -> ModelKind {
        match self {
            TrainedModel::Logreg(_) => ModelKind::Logreg,
            TrainedModel::Nb(_) => ModelKind::Nb,
            TrainedModel::Tree(_) => ModelKind::Tree,
            TrainedModel::Forest(_) => ModelKind::Forest,
            TrainedModel::Knn(_) => ModelKind::Knn,
            TrainedModel::Svm(_) => ModelKind::Svm,
            TrainedModel::Dummy(..) => ModelKind::Dummy,
        }
    }

    pub fn predict(&self, x: &FeatureMatrix) -> Result<Vec<Label>> {
        match self {
            TrainedModel::Logreg(m) => m.predict(x),
            TrainedModel::Nb(m) => m.predict(x),
            TrainedModel::Tree(m) => m.predict(x),
            TrainedModel::Forest(m) => m.predict(x),
            TrainedModel::Knn(m) => m.predict(x),
            TrainedModel::Svm(m) => m.predict(x),
            TrainedModel::Dummy(m, dim) => {
                x.check_dim(*dim)?;
                Ok(m.predict(x))
            }
        }
    }
}
