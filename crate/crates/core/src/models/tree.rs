//! CART classification tree with Gini impurity.
//!
//! Splits are exhaustive over `(column, threshold)` where thresholds are
//! midpoints between consecutive distinct values present in the node
//! (implicit zeros of sparse rows included). Rows with `x[column] <=
//! threshold` go left. Among equally good splits the lowest column wins,
//! then the lowest threshold.

use rand::seq::index::sample;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{check_training_set, class_index};
use crate::corpus::Label;
use crate::error::{Error, Result};
use crate::sparse::{FeatureMatrix, RowView};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MaxFeatures {
    All,
    /// `ceil(sqrt(d))` candidate columns per split.
    Sqrt,
    Count(usize),
}

impl MaxFeatures {
    pub fn resolve(self, d: usize) -> usize {
        match self {
            MaxFeatures::All => d,
            MaxFeatures::Sqrt => (d as f64).sqrt().ceil() as usize,
            MaxFeatures::Count(n) => n.min(d),
        }
        .max(1)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct TreeConfig {
    pub max_depth: Option<usize>,
    pub min_samples_split: usize,
    pub max_features: MaxFeatures,
}

impl Default for TreeConfig {
    fn default() -> Self {
        TreeConfig {
            max_depth: None,
            min_samples_split: 2,
            max_features: MaxFeatures::All,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum Node {
    Split {
        column: usize,
        threshold: f64,
        left: usize,
        right: usize,
        /// Weighted class counts reaching this node, [`Label::ALL`] order.
        counts: [f64; 2],
    },
    Leaf {
        counts: [f64; 2],
    },
}

impl Node {
    pub fn counts(&self) -> [f64; 2] {
        match self {
            Node::Split { counts, .. } | Node::Leaf { counts } => *counts,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecisionTree {
    pub config: TreeConfig,
    pub dim: usize,
    /// Node 0 is the root.
    pub nodes: Vec<Node>,
}

pub fn gini(counts: [f64; 2]) -> f64 {
    let n = counts[0] + counts[1];
    if n == 0.0 {
        return 0.0;
    }
    let (p, q) = (counts[0] / n, counts[1] / n);
    1.0 - p * p - q * q
}

/// Sample-count-weighted Gini impurity of a two-way split.
pub fn weighted_gini(left: [f64; 2], right: [f64; 2]) -> f64 {
    let nl = left[0] + left[1];
    let nr = right[0] + right[1];
    (nl * gini(left) + nr * gini(right)) / (nl + nr)
}

fn row_value(row: RowView<'_>, column: usize) -> f64 {
    match row {
        RowView::Sparse(s) => s.get(column),
        RowView::Dense(d) => d[column],
    }
}

#[derive(Debug, Clone, Copy)]
struct Entry {
    column: usize,
    value: f64,
    class: usize,
}

struct Candidate {
    impurity: f64,
    column: usize,
    threshold: f64,
}

/// Best threshold on one column. `entries` are the node's non-zero values
/// for this column sorted by value; the remaining rows sit at zero.
fn best_threshold(entries: &[Entry], node_counts: [f64; 2]) -> Option<(f64, f64)> {
    let mut zero = node_counts;
    for e in entries {
        zero[e.class] -= 1.0;
    }
    // Distinct values with their class counts, zero block merged in order.
    let mut groups: Vec<(f64, [f64; 2])> = Vec::new();
    let mut zero_pending = zero[0] + zero[1] > 0.0;
    for e in entries {
        if zero_pending && e.value > 0.0 {
            groups.push((0.0, zero));
            zero_pending = false;
        }
        match groups.last_mut() {
            Some((v, c)) if *v == e.value => c[e.class] += 1.0,
            _ => {
                let mut c = [0.0; 2];
                c[e.class] = 1.0;
                groups.push((e.value, c));
            }
        }
    }
    if zero_pending {
        groups.push((0.0, zero));
    }
    if groups.len() < 2 {
        return None;
    }
    let mut best: Option<(f64, f64)> = None;
    let mut left = [0.0; 2];
    for k in 0..groups.len() - 1 {
        left[0] += groups[k].1[0];
        left[1] += groups[k].1[1];
        let right = [node_counts[0] - left[0], node_counts[1] - left[1]];
        let imp = weighted_gini(left, right);
        if best.is_none_or(|(b, _)| imp < b) {
            let (lo, hi) = (groups[k].0, groups[k + 1].0);
            let mut thr = lo + (hi - lo) / 2.0;
            if thr >= hi {
                thr = lo;
            }
            best = Some((imp, thr));
        }
    }
    best
}

pub(crate) struct TreeBuilder<'a> {
    pub x: &'a FeatureMatrix,
    pub classes: Vec<usize>,
    pub config: TreeConfig,
    pub rng: Option<&'a mut ChaCha8Rng>,
}

/// Per-column scratch reused across nodes.
#[derive(Debug, Clone, Copy)]
struct ColumnStat {
    count: usize,
    min: f64,
    max: f64,
    chosen: bool,
}

const EMPTY_STAT: ColumnStat = ColumnStat {
    count: 0,
    min: f64::INFINITY,
    max: f64::NEG_INFINITY,
    chosen: false,
};

impl TreeBuilder<'_> {
    /// Grows a tree over `samples` (row indices, repeats allowed).
    pub fn build(mut self, samples: Vec<usize>) -> DecisionTree {
        let d = self.x.dim();
        let n_candidates = self.config.max_features.resolve(d);
        let mut stats = vec![EMPTY_STAT; d];
        let mut nodes: Vec<Node> = Vec::new();
        // (node slot, samples, depth)
        let mut stack = vec![(0usize, samples, 0usize)];
        nodes.push(Node::Leaf { counts: [0.0; 2] });
        while let Some((slot, samples, depth)) = stack.pop() {
            let mut counts = [0.0; 2];
            for &s in &samples {
                counts[self.classes[s]] += 1.0;
            }
            let splittable = counts[0] > 0.0
                && counts[1] > 0.0
                && samples.len() >= self.config.min_samples_split
                && self.config.max_depth.is_none_or(|m| depth < m);
            let split = if splittable {
                self.find_split(&samples, counts, n_candidates, &mut stats)
            } else {
                None
            };
            let Some(best) = split else {
                nodes[slot] = Node::Leaf { counts };
                continue;
            };
            let (left, right): (Vec<usize>, Vec<usize>) = samples
                .iter()
                .partition(|&&s| row_value(self.x.row(s), best.column) <= best.threshold);
            let (l, r) = (nodes.len(), nodes.len() + 1);
            nodes.push(Node::Leaf { counts: [0.0; 2] });
            nodes.push(Node::Leaf { counts: [0.0; 2] });
            nodes[slot] = Node::Split {
                column: best.column,
                threshold: best.threshold,
                left: l,
                right: r,
                counts,
            };
            stack.push((r, right, depth + 1));
            stack.push((l, left, depth + 1));
        }
        DecisionTree {
            config: self.config,
            dim: d,
            nodes,
        }
    }

    /// Ascending columns whose values are not all equal within the node.
    fn varying_columns(&self, samples: &[usize], stats: &mut [ColumnStat]) -> Vec<usize> {
        let mut touched = Vec::new();
        for &s in samples {
            self.x.row(s).for_each_nonzero(|column, value| {
                let st = &mut stats[column];
                if st.count == 0 {
                    touched.push(column);
                }
                st.count += 1;
                st.min = st.min.min(value);
                st.max = st.max.max(value);
            });
        }
        let n = samples.len();
        let mut varying: Vec<usize> = touched
            .into_iter()
            .filter(|&c| {
                let st = stats[c];
                stats[c] = EMPTY_STAT;
                !(st.count == n && st.min == st.max)
            })
            .collect();
        varying.sort_unstable();
        varying
    }

    fn find_split(
        &mut self,
        samples: &[usize],
        counts: [f64; 2],
        n_candidates: usize,
        stats: &mut [ColumnStat],
    ) -> Option<Candidate> {
        let varying = self.varying_columns(samples, stats);
        if varying.is_empty() {
            return None;
        }
        let chosen: Vec<usize> = match self.rng.as_deref_mut() {
            Some(rng) if n_candidates < varying.len() => {
                let mut picked = sample(rng, varying.len(), n_candidates).into_vec();
                picked.sort_unstable();
                picked.into_iter().map(|i| varying[i]).collect()
            }
            _ => varying,
        };
        for &c in &chosen {
            stats[c].chosen = true;
        }
        let mut entries = Vec::new();
        for &s in samples {
            let class = self.classes[s];
            self.x.row(s).for_each_nonzero(|column, value| {
                if stats[column].chosen {
                    entries.push(Entry {
                        column,
                        value,
                        class,
                    })
                }
            });
        }
        for &c in &chosen {
            stats[c].chosen = false;
        }
        entries.sort_unstable_by(|a, b| {
            a.column
                .cmp(&b.column)
                .then_with(|| a.value.total_cmp(&b.value))
        });
        let mut best: Option<Candidate> = None;
        for run in entries.chunk_by(|a, b| a.column == b.column) {
            if let Some((impurity, threshold)) = best_threshold(run, counts) {
                if best.as_ref().is_none_or(|b| impurity < b.impurity) {
                    best = Some(Candidate {
                        impurity,
                        column: run[0].column,
                        threshold,
                    });
                }
            }
        }
        best
    }
}

impl DecisionTree {
    pub fn fit(x: &FeatureMatrix, labels: &[Label], config: TreeConfig) -> Result<Self> {
        check_training_set(x, labels)?;
        if config.min_samples_split < 2 {
            return Err(Error::Config("min_samples_split must be at least 2".into()));
        }
        Ok(TreeBuilder {
            x,
            classes: labels.iter().map(|&l| class_index(l)).collect(),
            config: TreeConfig {
                max_features: MaxFeatures::All,
                ..config
            },
            rng: None,
        }
        .build((0..labels.len()).collect()))
    }

    pub fn leaf_counts(&self, row: RowView<'_>) -> [f64; 2] {
        let mut at = 0;
        loop {
            match &self.nodes[at] {
                Node::Leaf { counts } => return *counts,
                Node::Split {
                    column,
                    threshold,
                    left,
                    right,
                    ..
                } => {
                    at = if row_value(row, *column) <= *threshold {
                        *left
                    } else {
                        *right
                    };
                }
            }
        }
    }

    /// Majority class of the reached leaf; ties go to INFORMATIVE.
    pub fn predict_row(&self, row: RowView<'_>) -> Label {
        let c = self.leaf_counts(row);
        if c[0] >= c[1] {
            Label::Informative
        } else {
            Label::Uninformative
        }
    }

    pub fn predict(&self, x: &FeatureMatrix) -> Result<Vec<Label>> {
        x.check_dim(self.dim)?;
        Ok(x.rows().map(|r| self.predict_row(r)).collect())
    }

    pub fn depth(&self) -> usize {
        fn walk(nodes: &[Node], at: usize) -> usize {
            match &nodes[at] {
                Node::Leaf { .. } => 0,
                Node::Split { left, right, .. } => 1 + walk(nodes, *left).max(walk(nodes, *right)),
            }
        }
        walk(&self.nodes, 0)
    }
}
