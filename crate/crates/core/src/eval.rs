//! Metrics, the cross-validation harness and report formatting.
//!
//! F1 is reported for the INFORMATIVE class; macro F1 over both classes is
//! carried alongside for comparison.

use std::collections::HashSet;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::corpus::{Dataset, FoldPlan, Label};
use crate::error::{Error, Result};
use crate::features::{FeaturizerKind, FittedFeaturizer, Vocabulary};
use crate::json;
use crate::models::{LogisticRegression, ModelConfig, TrainedModel};
use crate::preprocess::{PipelineConfig, PipelineSpec};
use crate::resources::ResourceManifest;

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConfusionCounts {
    pub tp: usize,
    pub fp: usize,
    #[serde(rename = "fn")]
    pub fn_: usize,
    pub tn: usize,
}

impl ConfusionCounts {
    /// Tallies predictions against gold labels with `positive` as the target
    /// class.
    pub fn tally(pred: &[Label], gold: &[Label], positive: Label) -> Result<Self> {
        if pred.len() != gold.len() {
            return Err(Error::DimensionMismatch {
                expected: gold.len(),
                got: pred.len(),
            });
        }
        let mut c = ConfusionCounts::default();
        for (&p, &g) in pred.iter().zip(gold) {
            match (p == positive, g == positive) {
                (true, true) => c.tp += 1,
                (true, false) => c.fp += 1,
                (false, true) => c.fn_ += 1,
                (false, false) => c.tn += 1,
            }
        }
        Ok(c)
    }

    pub fn total(&self) -> usize {
        self.tp + self.fp + self.fn_ + self.tn
    }

    /// Counts with the roles of the two classes exchanged.
    pub fn swapped(&self) -> Self {
        ConfusionCounts {
            tp: self.tn,
            fp: self.fn_,
            fn_: self.fp,
            tn: self.tp,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Metrics {
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
}

fn ratio(num: usize, den: usize) -> f64 {
    if den == 0 {
        0.0
    } else {
        num as f64 / den as f64
    }
}

impl Metrics {
    /// Precision, recall and F1; any 0/0 is taken as 0.
    pub fn from_counts(c: &ConfusionCounts) -> Self {
        let precision = ratio(c.tp, c.tp + c.fp);
        let recall = ratio(c.tp, c.tp + c.fn_);
        let f1 = if precision + recall > 0.0 {
            2.0 * precision * recall / (precision + recall)
        } else {
            0.0
        };
        Metrics {
            precision,
            recall,
            f1,
        }
    }
}

/// Binary metrics with INFORMATIVE as the positive class.
pub fn score(pred: &[Label], gold: &[Label]) -> Result<Metrics> {
    if gold.is_empty() {
        return Err(Error::EmptyDataset);
    }
    Ok(Metrics::from_counts(&ConfusionCounts::tally(
        pred,
        gold,
        Label::Informative,
    )?))
}

/// Full scoring of one prediction run.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Evaluation {
    pub counts: ConfusionCounts,
    pub metrics: Metrics,
    pub macro_f1: f64,
}

impl Evaluation {
    pub fn new(pred: &[Label], gold: &[Label]) -> Result<Self> {
        if gold.is_empty() {
            return Err(Error::EmptyDataset);
        }
        let counts = ConfusionCounts::tally(pred, gold, Label::Informative)?;
        let metrics = Metrics::from_counts(&counts);
        let negative = Metrics::from_counts(&counts.swapped());
        Ok(Evaluation {
            counts,
            metrics,
            macro_f1: 0.5 * (metrics.f1 + negative.f1),
        })
    }
}

/// Everything that determines a text-classification run apart from the data
/// and the seed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub pipeline: PipelineSpec,
    pub featurizer: FeaturizerKind,
    pub model: ModelConfig,
}

/// Preprocessing, fitted featurizer and fitted model, applied together.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TextClassifier {
    pub pipeline: PipelineSpec,
    pub featurizer: FittedFeaturizer,
    pub model: TrainedModel,
}

impl TextClassifier {
    /// Fits on every record of `ds`. `cfg.model` is used as given, including
    /// its seed.
    pub fn train(ds: &Dataset, cfg: &ExperimentConfig) -> Result<Self> {
        let pipeline = PipelineConfig::from_spec(&cfg.pipeline)?;
        let labels = ds.labels()?;
        let cleaned = clean_texts(&pipeline, ds);
        let (featurizer, model) = fit_on(&cleaned, &labels, cfg.featurizer, &cfg.model)?;
        Ok(TextClassifier {
            pipeline: cfg.pipeline.clone(),
            featurizer,
            model,
        })
    }

    pub fn predict<S: AsRef<str> + Sync>(&self, raw_texts: &[S]) -> Result<Vec<Label>> {
        let pipeline = PipelineConfig::from_spec(&self.pipeline)?;
        let cleaned: Vec<String> = raw_texts
            .par_iter()
            .map(|t| pipeline.apply(t.as_ref()))
            .collect();
        self.model.predict(&self.featurizer.transform_all(&cleaned))
    }
}

fn clean_texts(pipeline: &PipelineConfig, ds: &Dataset) -> Vec<String> {
    ds.records
        .par_iter()
        .map(|r| pipeline.apply(r.text()))
        .collect()
}

fn fit_on(
    cleaned: &[String],
    labels: &[Label],
    kind: FeaturizerKind,
    model: &ModelConfig,
) -> Result<(FittedFeaturizer, TrainedModel)> {
    let featurizer = kind.fit(cleaned)?;
    let x = featurizer.transform_all(cleaned);
    let model = model.fit(&x, labels)?;
    Ok((featurizer, model))
}

/// Model seed for fold `fold` of a run seeded with `seed`.
pub fn fold_model_seed(seed: u64, fold: usize) -> u64 {
    seed.wrapping_add(1).wrapping_add(fold as u64)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FoldResult {
    pub fold: usize,
    pub model_seed: u64,
    pub train_size: usize,
    pub test_size: usize,
    pub evaluation: Evaluation,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CvReport {
    pub experiment: ExperimentConfig,
    pub k: usize,
    pub seed: u64,
    pub folds: Vec<FoldResult>,
    pub mean_f1: f64,
    /// Sample standard deviation of the per-fold F1.
    pub std_f1: f64,
    pub mean_macro_f1: f64,
    pub fingerprint: String,
    pub resources: ResourceManifest,
}

impl CvReport {
    pub fn fold_f1(&self) -> Vec<f64> {
        self.folds.iter().map(|f| f.evaluation.metrics.f1).collect()
    }
}

pub fn mean(xs: &[f64]) -> f64 {
    if xs.is_empty() {
        return 0.0;
    }
    xs.iter().sum::<f64>() / xs.len() as f64
}

pub fn sample_std(xs: &[f64]) -> f64 {
    if xs.len() < 2 {
        return 0.0;
    }
    let m = mean(xs);
    (xs.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / (xs.len() - 1) as f64).sqrt()
}

#[derive(Serialize)]
struct CvFingerprint<'a> {
    experiment: &'a ExperimentConfig,
    k: usize,
    seed: u64,
    resources: &'a ResourceManifest,
}

/// Stratified k-fold evaluation.
///
/// Preprocessing is per record and stateless, so texts are cleaned once.
/// The featurizer and the model are fitted on the training folds only. The
/// model of fold `f` is seeded with [`fold_model_seed`]`(plan.seed, f)`.
pub fn cross_validate(
    ds: &Dataset,
    plan: &FoldPlan,
    pipeline: &PipelineConfig,
    featurizer: FeaturizerKind,
    model: &ModelConfig,
) -> Result<CvReport> {
    if plan.assignment.len() != ds.len() {
        return Err(Error::Config(format!(
            "fold plan covers {} records but the dataset has {}",
            plan.assignment.len(),
            ds.len()
        )));
    }
    let labels = ds.labels()?;
    let cleaned = clean_texts(pipeline, ds);
    let folds = (0..plan.k)
        .into_par_iter()
        .map(|f| {
            let (train, test) = plan.split(f);
            let pick = |idx: &[usize]| -> (Vec<String>, Vec<Label>) {
                idx.iter().map(|&i| (cleaned[i].clone(), labels[i])).unzip()
            };
            let (train_texts, train_labels) = pick(&train);
            let (test_texts, test_labels) = pick(&test);
            let model_seed = fold_model_seed(plan.seed, f);
            let (feat, fitted) = fit_on(
                &train_texts,
                &train_labels,
                featurizer,
                &model.with_seed(model_seed),
            )?;
            let pred = fitted.predict(&feat.transform_all(&test_texts))?;
            Ok(FoldResult {
                fold: f,
                model_seed,
                train_size: train.len(),
                test_size: test.len(),
                evaluation: Evaluation::new(&pred, &test_labels)?,
            })
        })
        .collect::<Result<Vec<_>>>()?;

    let experiment = ExperimentConfig {
        pipeline: pipeline.spec(),
        featurizer,
        model: *model,
    };
    let resources = pipeline.resources().manifest.clone();
    let fingerprint = json::fingerprint(&CvFingerprint {
        experiment: &experiment,
        k: plan.k,
        seed: plan.seed,
        resources: &resources,
    })?;
    let f1: Vec<f64> = folds.iter().map(|f| f.evaluation.metrics.f1).collect();
    let macro_f1: Vec<f64> = folds.iter().map(|f| f.evaluation.macro_f1).collect();
    Ok(CvReport {
        experiment,
        k: plan.k,
        seed: plan.seed,
        mean_f1: mean(&f1),
        std_f1: sample_std(&f1),
        mean_macro_f1: mean(&macro_f1),
        folds,
        fingerprint,
        resources,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HoldoutReport {
    pub experiment: ExperimentConfig,
    pub seed: u64,
    pub train_size: usize,
    pub valid_size: usize,
    pub evaluation: Evaluation,
    pub fingerprint: String,
    pub resources: ResourceManifest,
}

/// Fails when the two datasets share an id.
pub fn check_disjoint(a: &Dataset, b: &Dataset) -> Result<()> {
    let ids: HashSet<&str> = a.records.iter().map(|r| r.id()).collect();
    match b.records.iter().find(|r| ids.contains(r.id())) {
        Some(r) => Err(Error::InvalidData(format!(
            "id `{}` appears in both `{}` and `{}`",
            r.id(),
            a.name,
            b.name
        ))),
        None => Ok(()),
    }
}

/// One fit on `train`, scored on `valid`. The model is seeded with `seed`.
pub fn holdout_eval(
    train: &Dataset,
    valid: &Dataset,
    pipeline: &PipelineConfig,
    featurizer: FeaturizerKind,
    model: &ModelConfig,
    seed: u64,
) -> Result<HoldoutReport> {
    check_disjoint(train, valid)?;
    let gold = valid.labels()?;
    let experiment = ExperimentConfig {
        pipeline: pipeline.spec(),
        featurizer,
        model: model.with_seed(seed),
    };
    let clf = TextClassifier::train(train, &experiment)?;
    let pred = clf.predict(&valid.texts())?;
    let resources = pipeline.resources().manifest.clone();
    let fingerprint = json::fingerprint(&(&experiment, seed, &resources))?;
    Ok(HoldoutReport {
        experiment,
        seed,
        train_size: train.len(),
        valid_size: valid.len(),
        evaluation: Evaluation::new(&pred, &gold)?,
        fingerprint,
        resources,
    })
}

/// The `n` non-zero weights of largest magnitude, ties broken by term.
pub fn top_weights(
    model: &LogisticRegression,
    vocab: &Vocabulary,
    n: usize,
) -> Result<Vec<(String, f64)>> {
    if model.weights.len() != vocab.len() {
        return Err(Error::DimensionMismatch {
            expected: vocab.len(),
            got: model.weights.len(),
        });
    }
    let mut ranked: Vec<(&str, f64)> = model
        .weights
        .iter()
        .enumerate()
        .filter(|(_, &w)| w != 0.0)
        .map(|(j, &w)| (vocab.term(j), w))
        .collect();
    ranked.sort_by(|a, b| b.1.abs().total_cmp(&a.1.abs()).then_with(|| a.0.cmp(b.0)));
    Ok(ranked
        .into_iter()
        .take(n)
        .map(|(t, w)| (t.to_string(), w))
        .collect())
}

/// Four decimals without the leading zero, e.g. `.8422`.
pub fn format_score(x: f64) -> String {
    let s = format!("{x:.4}");
    match s.strip_prefix("0.") {
        Some(rest) => format!(".{rest}"),
        None => s,
    }
}

/// Left-aligned first column, right-aligned others.
pub fn render_table(header: &[&str], rows: &[Vec<String>]) -> String {
    let cols = header.len();
    let mut widths: Vec<usize> = header.iter().map(|h| h.chars().count()).collect();
    for r in rows {
        for (w, cell) in widths.iter_mut().zip(r) {
            *w = (*w).max(cell.chars().count());
        }
    }
    let line = |cells: Vec<&str>| -> String {
        let mut out = String::new();
        for (c, cell) in cells.iter().enumerate() {
            let pad = widths[c] - cell.chars().count();
            if c == 0 {
                out.push_str(cell);
                out.extend(std::iter::repeat_n(' ', pad));
            } else {
                out.push_str("  ");
                out.extend(std::iter::repeat_n(' ', pad));
                out.push_str(cell);
            }
        }
        out.truncate(out.trim_end().len());
        out.push('\n');
        out
    };
    let mut out = line(header.to_vec());
    let rule: usize = widths.iter().sum::<usize>() + 2 * (cols - 1);
    out.push_str(&"-".repeat(rule));
    out.push('\n');
    for r in rows {
        out.push_str(&line(r.iter().map(String::as_str).collect()));
    }
    out
}

/// One row per labelled report: mean F1, its spread and macro F1.
pub fn cv_table(rows: &[(String, &CvReport)]) -> String {
    let body: Vec<Vec<String>> = rows
        .iter()
        .map(|(name, r)| {
            vec![
                name.clone(),
                format_score(r.mean_f1),
                format_score(r.std_f1),
                format_score(r.mean_macro_f1),
            ]
        })
        .collect();
    render_table(&["Model", "Average F1-score", "Std", "Macro F1"], &body)
}

pub fn weights_table(weights: &[(String, f64)]) -> String {
    let body: Vec<Vec<String>> = weights
        .iter()
        .enumerate()
        .map(|(i, (t, w))| vec![(i + 1).to_string(), t.clone(), format!("{w:.4}")])
        .collect();
    render_table(&["Rank", "Feature", "Weight"], &body)
}
