//! Sentence embeddings concatenated with engineered tweet features, classified
//! by the kernel SVM.
//!
//! Embeddings arrive in the EMB1 text format:
//!
//! ```text
//! #emb v1 dim=4
//! t1<TAB>0.1 0.2 0.3 0.4
//! ```

use std::collections::HashMap;
use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::corpus::Dataset;
use crate::error::{Error, Result};
use crate::eval::Evaluation;
use crate::features::{tweet_features, TWEET_FEATURE_NAMES};
use crate::models::{KernelSvm, SvmConfig};
use crate::resources::Resources;
use crate::sparse::FeatureMatrix;

const HEADER_PREFIX: &str = "#emb v1 dim=";
const N_ENGINEERED: usize = TWEET_FEATURE_NAMES.len();

#[derive(Debug, Clone, PartialEq)]
pub struct EmbeddingTable {
    pub dim: usize,
    map: HashMap<String, Vec<f64>>,
}

impl EmbeddingTable {
    pub fn new(dim: usize) -> Self {
        EmbeddingTable {
            dim,
            map: HashMap::new(),
        }
    }

    pub fn insert(&mut self, id: impl Into<String>, vector: Vec<f64>) -> Result<()> {
        let id = id.into();
        if vector.len() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                got: vector.len(),
            });
        }
        if vector.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidData(format!("non-finite value for `{id}`")));
        }
        if self.map.contains_key(&id) {
            return Err(Error::InvalidData(format!("duplicate id `{id}`")));
        }
        self.map.insert(id, vector);
        Ok(())
    }

    pub fn get(&self, id: &str) -> Option<&[f64]> {
        self.map.get(id).map(Vec::as_slice)
    }

    pub fn len(&self) -> usize {
        self.map.len()
    }

    pub fn is_empty(&self) -> bool {
        self.map.is_empty()
    }

    /// EMB1 text with rows sorted by id.
    pub fn to_emb1(&self) -> String {
        let mut ids: Vec<&String> = self.map.keys().collect();
        ids.sort();
        let mut out = format!("{HEADER_PREFIX}{}\n", self.dim);
        for id in ids {
            out.push_str(id);
            out.push('\t');
            for (j, v) in self.map[id].iter().enumerate() {
                if j > 0 {
                    out.push(' ');
                }
                write!(out, "{v:e}").unwrap();
            }
            out.push('\n');
        }
        out
    }
}

pub fn parse_embeddings(text: &str) -> Result<EmbeddingTable> {
    let mut lines = text.split('\n').enumerate();
    let parse_err = |line: usize, msg: String| Error::Parse { line, msg };
    let header = lines
        .next()
        .map(|(_, l)| l.strip_suffix('\r').unwrap_or(l))
        .unwrap_or("");
    let dim: usize = header
        .strip_prefix(HEADER_PREFIX)
        .and_then(|d| d.parse().ok())
        .filter(|&d| d > 0)
        .ok_or_else(|| {
            parse_err(
                1,
                format!("expected header `{HEADER_PREFIX}<D>`, found `{header}`"),
            )
        })?;
    let mut table = EmbeddingTable::new(dim);
    for (i, raw) in lines {
        let line_no = i + 1;
        let line = raw.strip_suffix('\r').unwrap_or(raw);
        if line.is_empty() {
            continue;
        }
        let (id, body) = line
            .split_once('\t')
            .ok_or_else(|| parse_err(line_no, "expected `<id><TAB><values>`".into()))?;
        if id.is_empty() {
            return Err(parse_err(line_no, "empty id".into()));
        }
        let values = body
            .split(' ')
            .filter(|t| !t.is_empty())
            .map(|t| {
                t.parse::<f64>()
                    .map_err(|_| parse_err(line_no, format!("invalid number `{t}`")))
            })
            .collect::<Result<Vec<f64>>>()?;
        if values.len() != dim {
            return Err(parse_err(
                line_no,
                format!("expected {dim} values, found {}", values.len()),
            ));
        }
        if let Some(v) = values.iter().find(|v| !v.is_finite()) {
            return Err(parse_err(line_no, format!("non-finite value `{v}`")));
        }
        if table.map.contains_key(id) {
            return Err(Error::DuplicateId {
                id: id.to_string(),
                line: line_no,
            });
        }
        table.map.insert(id.to_string(), values);
    }
    Ok(table)
}

pub fn load_embeddings(path: impl AsRef<Path>) -> Result<EmbeddingTable> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_embeddings(&text)
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct FusionConfig {
    /// Z-score the engineered slots with training statistics.
    pub standardize_engineered: bool,
    pub svm: SvmConfig,
}

/// Per-column mean and population standard deviation of the engineered
/// slots. Constant columns map to 0.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Standardizer {
    pub mean: Vec<f64>,
    pub std: Vec<f64>,
}

impl Standardizer {
    pub fn fit(rows: &[[f64; N_ENGINEERED]]) -> Result<Self> {
        if rows.is_empty() {
            return Err(Error::EmptyDataset);
        }
        let n = rows.len() as f64;
        let mut mean = vec![0.0; N_ENGINEERED];
        for r in rows {
            for (m, v) in mean.iter_mut().zip(r) {
                *m += v;
            }
        }
        mean.iter_mut().for_each(|m| *m /= n);
        let mut std = vec![0.0; N_ENGINEERED];
        for r in rows {
            for j in 0..N_ENGINEERED {
                std[j] += (r[j] - mean[j]) * (r[j] - mean[j]);
            }
        }
        std.iter_mut().for_each(|s| *s = (*s / n).sqrt());
        Ok(Standardizer { mean, std })
    }

    pub fn apply(&self, row: &mut [f64]) {
        for ((v, m), s) in row.iter_mut().zip(&self.mean).zip(&self.std) {
            *v = if *s > 0.0 { (*v - m) / s } else { 0.0 };
        }
    }
}

fn engineered(ds: &Dataset, resources: &Resources) -> Vec<[f64; N_ENGINEERED]> {
    ds.records
        .par_iter()
        .map(|r| tweet_features(r.text(), resources).to_array())
        .collect()
}

/// Rows of `embedding ++ engineered features`, in dataset order, with the
/// engineered slots optionally standardized.
pub fn fuse_with(
    table: &EmbeddingTable,
    ds: &Dataset,
    standardizer: Option<&Standardizer>,
) -> Result<FeatureMatrix> {
    let resources = Resources::builtin();
    let feats = engineered(ds, &resources);
    let rows = ds
        .records
        .iter()
        .zip(feats)
        .map(|(r, f)| {
            let emb = table
                .get(r.id())
                .ok_or_else(|| Error::MissingEmbedding(r.id().to_string()))?;
            let mut extra = f.to_vec();
            if let Some(s) = standardizer {
                s.apply(&mut extra);
            }
            let mut row = Vec::with_capacity(table.dim + N_ENGINEERED);
            row.extend_from_slice(emb);
            row.extend(extra);
            Ok(row)
        })
        .collect::<Result<Vec<_>>>()?;
    FeatureMatrix::dense(table.dim + N_ENGINEERED, rows)
}

/// Fused rows for `ds`; when standardizing, statistics come from `ds` itself.
pub fn fuse(table: &EmbeddingTable, ds: &Dataset, cfg: &FusionConfig) -> Result<FeatureMatrix> {
    let standardizer = if cfg.standardize_engineered {
        Some(Standardizer::fit(&engineered(ds, &Resources::builtin()))?)
    } else {
        None
    };
    fuse_with(table, ds, standardizer.as_ref())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FusionModel {
    pub config: FusionConfig,
    pub embedding_dim: usize,
    pub standardizer: Option<Standardizer>,
    pub svm: KernelSvm,
}

pub fn train_fusion(
    table: &EmbeddingTable,
    train: &Dataset,
    cfg: &FusionConfig,
) -> Result<FusionModel> {
    let labels = train.labels()?;
    let standardizer = if cfg.standardize_engineered {
        Some(Standardizer::fit(&engineered(
            train,
            &Resources::builtin(),
        ))?)
    } else {
        None
    };
    let x = fuse_with(table, train, standardizer.as_ref())?;
    let svm = KernelSvm::fit(&x, &labels, cfg.svm)?;
    Ok(FusionModel {
        config: *cfg,
        embedding_dim: table.dim,
        standardizer,
        svm,
    })
}

impl FusionModel {
    pub fn predict(&self, table: &EmbeddingTable, ds: &Dataset) -> Result<Vec<crate::Label>> {
        if table.dim != self.embedding_dim {
            return Err(Error::DimensionMismatch {
                expected: self.embedding_dim,
                got: table.dim,
            });
        }
        let x = fuse_with(table, ds, self.standardizer.as_ref())?;
        self.svm.predict(&x)
    }
}

pub fn eval_fusion(
    model: &FusionModel,
    table: &EmbeddingTable,
    eval: &Dataset,
) -> Result<Evaluation> {
    let gold = eval.labels()?;
    let pred = model.predict(table, eval)?;
    Evaluation::new(&pred, &gold)
}
