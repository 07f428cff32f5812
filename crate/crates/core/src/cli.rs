//! The `tweetclf` command line.
//!
//! Every option can also come from a JSON file passed with `--config`;
//! flags given on the command line win. Exit status is 0 on success, 2 for
//! configuration errors and 3 for data errors.

use std::collections::BTreeMap;
use std::ffi::OsString;
use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use serde::{Deserialize, Serialize};

use crate::corpus::{detect_labels, parse_tsv, stratified_folds, Dataset, TsvOptions};
use crate::error::{Error, Result};
use crate::eval::{self, CvReport, Evaluation, ExperimentConfig, TextClassifier};
use crate::features::FeaturizerKind;
use crate::fusion::{self, FusionConfig, FusionModel};
use crate::json;
use crate::models::{ModelConfig, ModelKind, SvmConfig, TrainedModel};
use crate::preprocess::{PipelineConfig, PipelineSpec, Stage};
use crate::resources::{sha256_hex, ResourceManifest, Resources};

const CV_REPORT: &str = "cv-report";
const TEXT_CLASSIFIER: &str = "text-classifier";
const FUSION_MODEL: &str = "fusion-model";
const FUSION_EVAL: &str = "fusion-eval";

#[derive(Debug, Parser)]
#[command(
    name = "tweetclf",
    version,
    about = "Tweet informativeness classification"
)]
struct Cli {
    /// JSON file with default values for any option.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Maximum number of worker threads.
    #[arg(long, global = true)]
    jobs: Option<usize>,
    /// Input TSV files start with a header line.
    #[arg(long, global = true)]
    header: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Args, Default)]
struct ExperimentArgs {
    /// Named pipeline: op, none, op+stopwords, op+alnum, op+lowercase, op+lemma.
    #[arg(long)]
    pipeline: Option<String>,
    /// Comma-separated stage list; overrides --pipeline.
    #[arg(long)]
    stages: Option<String>,
    /// counts or tfidf.
    #[arg(long)]
    features: Option<String>,
    /// logreg, nb, tree, forest, knn, svm or dummy.
    #[arg(long)]
    model: Option<String>,
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Apply a preprocessing pipeline to the text column of a TSV file.
    Clean {
        #[arg(long = "in")]
        input: Option<PathBuf>,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        pipeline: Option<String>,
        #[arg(long)]
        stages: Option<String>,
    },
    /// Stratified k-fold cross-validation on train (plus valid, if given).
    Cv {
        #[arg(long)]
        train: Option<PathBuf>,
        #[arg(long)]
        valid: Option<PathBuf>,
        #[command(flatten)]
        exp: ExperimentArgs,
        #[arg(long)]
        k: Option<usize>,
        /// Output directory.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Fit preprocessing, featurizer and model on a labeled file.
    Train {
        #[arg(long)]
        train: Option<PathBuf>,
        #[command(flatten)]
        exp: ExperimentArgs,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Label a TSV file with a trained model.
    Predict {
        #[arg(long)]
        model_file: Option<PathBuf>,
        #[arg(long = "in")]
        input: Option<PathBuf>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Print the largest-magnitude weights of a trained logistic regression.
    Weights {
        #[arg(long)]
        model_file: Option<PathBuf>,
        #[arg(long)]
        n: Option<usize>,
    },
    /// Train the embedding fusion SVM.
    FuseTrain {
        #[arg(long)]
        train: Option<PathBuf>,
        #[arg(long)]
        emb: Option<PathBuf>,
        /// Z-score the engineered feature slots.
        #[arg(long)]
        standardize: bool,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Evaluate a fusion model on a labeled file.
    FuseEval {
        #[arg(long)]
        model_file: Option<PathBuf>,
        #[arg(long)]
        valid: Option<PathBuf>,
        #[arg(long)]
        emb: Option<PathBuf>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Debug, Deserialize)]
#[serde(untagged)]
enum PipelineChoice {
    Name(String),
    Stages(Vec<Stage>),
    Spec(PipelineSpec),
}

#[derive(Debug, Deserialize)]
#[serde(untagged)]
enum ModelChoice {
    Name(ModelKind),
    Full(ModelConfig),
}

/// Contents of a `--config` file. Every field is optional.
#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct FileConfig {
    train: Option<PathBuf>,
    valid: Option<PathBuf>,
    #[serde(rename = "in")]
    input: Option<PathBuf>,
    out: Option<PathBuf>,
    emb: Option<PathBuf>,
    model_file: Option<PathBuf>,
    pipeline: Option<PipelineChoice>,
    features: Option<FeaturizerKind>,
    model: Option<ModelChoice>,
    k: Option<usize>,
    seed: Option<u64>,
    n: Option<usize>,
    header: Option<bool>,
    jobs: Option<usize>,
    standardize_engineered: Option<bool>,
    svm: Option<SvmConfig>,
}

impl FileConfig {
    fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        serde_json::from_str(&text).map_err(|e| Error::Config(format!("{}: {e}", path.display())))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct InputInfo {
    pub path: String,
    pub sha256: String,
}

/// Resolved settings of one invocation. Output locations are left out so
/// that the same run written to two places produces identical artifacts.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub command: String,
    pub inputs: BTreeMap<String, InputInfo>,
    pub header: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub pipeline: Option<PipelineSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub featurizer: Option<FeaturizerKind>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub model: Option<ModelConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub fusion: Option<FusionConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub k: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
}

impl RunConfig {
    fn new(command: &str, header: bool) -> Self {
        RunConfig {
            command: command.to_string(),
            inputs: BTreeMap::new(),
            header,
            pipeline: None,
            featurizer: None,
            model: None,
            fusion: None,
            k: None,
            seed: None,
        }
    }

    /// Reads an input file and records its checksum.
    fn read_input(&mut self, role: &str, path: &Path) -> Result<String> {
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        self.inputs.insert(
            role.to_string(),
            InputInfo {
                path: path.display().to_string(),
                sha256: sha256_hex(&text),
            },
        );
        Ok(text)
    }

    fn read_dataset(&mut self, role: &str, path: &Path, require_labels: bool) -> Result<Dataset> {
        let text = self.read_input(role, path)?;
        let has_labels = require_labels || detect_labels(&text, self.header);
        let name = path
            .file_stem()
            .map(|s| s.to_string_lossy().into_owned())
            .unwrap_or_default();
        parse_tsv(
            &name,
            &text,
            TsvOptions {
                has_labels,
                header: self.header,
            },
        )
    }

    fn fingerprint(&self, resources: &ResourceManifest) -> Result<String> {
        json::fingerprint(&(self, resources))
    }
}

#[derive(Debug, Serialize, Deserialize)]
struct CvArtifact {
    run: RunConfig,
    fingerprint: String,
    report: CvReport,
}

#[derive(Debug, Serialize, Deserialize)]
struct ClassifierArtifact {
    run: RunConfig,
    fingerprint: String,
    resources: ResourceManifest,
    classifier: TextClassifier,
}

#[derive(Debug, Serialize, Deserialize)]
struct FusionArtifact {
    run: RunConfig,
    fingerprint: String,
    resources: ResourceManifest,
    model: FusionModel,
}

#[derive(Debug, Serialize, Deserialize)]
struct FusionEvalArtifact {
    run: RunConfig,
    fingerprint: String,
    model_fingerprint: String,
    evaluation: Evaluation,
}

fn required<T>(value: Option<T>, flag: &str) -> Result<T> {
    value.ok_or_else(|| Error::Config(format!("--{flag} is required")))
}

fn resolve_pipeline(
    stages: Option<String>,
    name: Option<String>,
    file: Option<PipelineChoice>,
) -> Result<PipelineConfig> {
    if let Some(list) = stages {
        let parsed = list
            .split(',')
            .map(str::trim)
            .filter(|s| !s.is_empty())
            .map(str::parse::<Stage>)
            .collect::<Result<Vec<_>>>()?;
        return PipelineConfig::new(parsed);
    }
    if let Some(name) = name {
        return PipelineConfig::named(&name);
    }
    match file {
        Some(PipelineChoice::Name(n)) => PipelineConfig::named(&n),
        Some(PipelineChoice::Stages(s)) => PipelineConfig::new(s),
        Some(PipelineChoice::Spec(spec)) => PipelineConfig::from_spec(&spec),
        None => Ok(PipelineConfig::optimal()),
    }
}

fn resolve_model(flag: Option<String>, file: Option<ModelChoice>) -> Result<ModelConfig> {
    let from_file = match file {
        Some(ModelChoice::Name(k)) => Some(k.default_config()),
        Some(ModelChoice::Full(c)) => Some(c),
        None => None,
    };
    match flag {
        Some(name) => {
            let kind: ModelKind = name.parse()?;
            Ok(match from_file {
                Some(c) if c.kind() == kind => c,
                _ => kind.default_config(),
            })
        }
        None => Ok(from_file.unwrap_or_else(|| ModelKind::Logreg.default_config())),
    }
}

fn resolve_experiment(
    exp: ExperimentArgs,
    file: &mut FileConfig,
) -> Result<(PipelineConfig, FeaturizerKind, ModelConfig, u64)> {
    let pipeline = resolve_pipeline(exp.stages, exp.pipeline, file.pipeline.take())?;
    let featurizer = match exp.features {
        Some(f) => f.parse()?,
        None => file.features.unwrap_or(FeaturizerKind::Tfidf),
    };
    let model = resolve_model(exp.model, file.model.take())?;
    let seed = exp.seed.or(file.seed).unwrap_or(0);
    Ok((pipeline, featurizer, model, seed))
}

fn write_file(path: &Path, text: &str) -> Result<()> {
    if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
        fs::create_dir_all(parent).map_err(|e| Error::io(parent, e))?;
    }
    fs::write(path, text).map_err(|e| Error::io(path, e))
}

fn execute(cli: Cli) -> Result<()> {
    let mut file = match &cli.config {
        Some(p) => FileConfig::load(p)?,
        None => FileConfig::default(),
    };
    let header = cli.header || file.header.unwrap_or(false);
    let jobs = cli.jobs.or(file.jobs);
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(j) = jobs {
        if j == 0 {
            return Err(Error::Config("--jobs must be at least 1".into()));
        }
        builder = builder.num_threads(j);
    }
    let pool = builder
        .build()
        .map_err(|e| Error::Config(format!("thread pool: {e}")))?;
    pool.install(|| dispatch(cli.command, &mut file, header))
}

fn dispatch(command: Command, file: &mut FileConfig, header: bool) -> Result<()> {
    match command {
        Command::Clean {
            input,
            out,
            pipeline,
            stages,
        } => {
            let pipeline = resolve_pipeline(stages, pipeline, file.pipeline.take())?;
            let input = required(input.or(file.input.take()), "in")?;
            let out = required(out.or(file.out.take()), "out")?;
            let mut run = RunConfig::new("clean", header);
            let text = run.read_input("in", &input)?;
            let has_labels = detect_labels(&text, header);
            let mut ds = parse_tsv("in", &text, TsvOptions { has_labels, header })?;
            for r in &mut ds.records {
                r.tweet.text = pipeline.apply(&r.tweet.text);
            }
            let mut body = String::new();
            if header {
                if let Some(first) = text.split('\n').next() {
                    body.push_str(first.trim_end_matches('\r'));
                    body.push('\n');
                }
            }
            body.push_str(&ds.to_tsv());
            write_file(&out, &body)
        }
        Command::Cv {
            train,
            valid,
            exp,
            k,
            out,
        } => {
            let (pipeline, featurizer, model, seed) = resolve_experiment(exp, file)?;
            let k = k.or(file.k).unwrap_or(8);
            let train = required(train.or(file.train.take()), "train")?;
            let out = required(out.or(file.out.take()), "out")?;
            let mut run = RunConfig::new("cv", header);
            let mut ds = run.read_dataset("train", &train, true)?;
            if let Some(valid) = valid.or(file.valid.take()) {
                let v = run.read_dataset("valid", &valid, true)?;
                ds = ds.concat(&v, "train+valid")?;
            }
            run.pipeline = Some(pipeline.spec());
            run.featurizer = Some(featurizer);
            run.model = Some(model);
            run.k = Some(k);
            run.seed = Some(seed);
            let plan = stratified_folds(&ds, k, seed)?;
            let report = eval::cross_validate(&ds, &plan, &pipeline, featurizer, &model)?;
            let fingerprint = run.fingerprint(&report.resources)?;
            let mut table = eval::cv_table(&[(model.kind().display_name().to_string(), &report)]);
            table.push('\n');
            for f in &report.folds {
                table.push_str(&format!(
                    "fold {}  n={}  f1={}\n",
                    f.fold,
                    f.test_size,
                    eval::format_score(f.evaluation.metrics.f1)
                ));
            }
            table.push_str(&format!("fingerprint {fingerprint}\n"));
            let mean_line = format!(
                "mean F1 {} (std {})",
                eval::format_score(report.mean_f1),
                eval::format_score(report.std_f1)
            );
            let artifact = CvArtifact {
                run,
                fingerprint,
                report,
            };
            write_file(
                &out.join("cv_report.json"),
                &json::artifact_string(CV_REPORT, &artifact)?,
            )?;
            write_file(&out.join("cv_report.txt"), &table)?;
            println!("{mean_line}");
            Ok(())
        }
        Command::Train { train, exp, out } => {
            let (pipeline, featurizer, model, seed) = resolve_experiment(exp, file)?;
            let train = required(train.or(file.train.take()), "train")?;
            let out = required(out.or(file.out.take()), "out")?;
            let mut run = RunConfig::new("train", header);
            let ds = run.read_dataset("train", &train, true)?;
            let model = model.with_seed(seed);
            run.pipeline = Some(pipeline.spec());
            run.featurizer = Some(featurizer);
            run.model = Some(model);
            run.seed = Some(seed);
            let experiment = ExperimentConfig {
                pipeline: pipeline.spec(),
                featurizer,
                model,
            };
            let classifier = TextClassifier::train(&ds, &experiment)?;
            let resources = pipeline.resources().manifest.clone();
            let artifact = ClassifierArtifact {
                fingerprint: run.fingerprint(&resources)?,
                run,
                resources,
                classifier,
            };
            write_file(&out, &json::artifact_string(TEXT_CLASSIFIER, &artifact)?)
        }
        Command::Predict {
            model_file,
            input,
            out,
        } => {
            let model_file = required(model_file.or(file.model_file.take()), "model-file")?;
            let input = required(input.or(file.input.take()), "in")?;
            let out = required(out.or(file.out.take()), "out")?;
            let artifact: ClassifierArtifact = json::read_artifact(&model_file, TEXT_CLASSIFIER)?;
            let mut run = RunConfig::new("predict", header);
            let ds = run.read_dataset("in", &input, false)?;
            let pred = artifact.classifier.predict(&ds.texts())?;
            let mut body = String::new();
            for (r, p) in ds.records.iter().zip(&pred) {
                body.push_str(r.id());
                body.push('\t');
                body.push_str(p.as_str());
                body.push('\n');
            }
            write_file(&out, &body)?;
            if ds.is_labeled() && !ds.is_empty() {
                let e = Evaluation::new(&pred, &ds.labels()?)?;
                println!(
                    "F1 {}  precision {}  recall {}",
                    eval::format_score(e.metrics.f1),
                    eval::format_score(e.metrics.precision),
                    eval::format_score(e.metrics.recall)
                );
            }
            Ok(())
        }
        Command::Weights { model_file, n } => {
            let model_file = required(model_file.or(file.model_file.take()), "model-file")?;
            let n = n.or(file.n).unwrap_or(10);
            let artifact: ClassifierArtifact = json::read_artifact(&model_file, TEXT_CLASSIFIER)?;
            let TrainedModel::Logreg(lr) = &artifact.classifier.model else {
                return Err(Error::Config(format!(
                    "weights needs a logreg model, found {}",
                    artifact.classifier.model.kind()
                )));
            };
            let top = eval::top_weights(lr, artifact.classifier.featurizer.vocab(), n)?;
            print!("{}", eval::weights_table(&top));
            Ok(())
        }
        Command::FuseTrain {
            train,
            emb,
            standardize,
            out,
        } => {
            let train = required(train.or(file.train.take()), "train")?;
            let emb = required(emb.or(file.emb.take()), "emb")?;
            let out = required(out.or(file.out.take()), "out")?;
            let cfg = FusionConfig {
                standardize_engineered: standardize || file.standardize_engineered.unwrap_or(false),
                svm: file.svm.unwrap_or_default(),
            };
            let mut run = RunConfig::new("fuse-train", header);
            let ds = run.read_dataset("train", &train, true)?;
            let table = fusion::parse_embeddings(&run.read_input("emb", &emb)?)?;
            run.fusion = Some(cfg);
            let model = fusion::train_fusion(&table, &ds, &cfg)?;
            let resources = Resources::builtin().manifest.clone();
            let artifact = FusionArtifact {
                fingerprint: run.fingerprint(&resources)?,
                run,
                resources,
                model,
            };
            write_file(&out, &json::artifact_string(FUSION_MODEL, &artifact)?)
        }
        Command::FuseEval {
            model_file,
            valid,
            emb,
            out,
        } => {
            let model_file = required(model_file.or(file.model_file.take()), "model-file")?;
            let valid = required(valid.or(file.valid.take()), "valid")?;
            let emb = required(emb.or(file.emb.take()), "emb")?;
            let mut run = RunConfig::new("fuse-eval", header);
            let model_text = run.read_input("model", &model_file)?;
            let model: FusionArtifact = json::parse_artifact(&model_text, FUSION_MODEL)?;
            let ds = run.read_dataset("valid", &valid, true)?;
            let table = fusion::parse_embeddings(&run.read_input("emb", &emb)?)?;
            run.fusion = Some(model.model.config);
            let evaluation = fusion::eval_fusion(&model.model, &table, &ds)?;
            let artifact = FusionEvalArtifact {
                fingerprint: run.fingerprint(&model.resources)?,
                run,
                model_fingerprint: model.fingerprint,
                evaluation,
            };
            let text = json::artifact_string(FUSION_EVAL, &artifact)?;
            match out.or(file.out.take()) {
                Some(p) => write_file(&p, &text),
                None => {
                    print!("{text}");
                    Ok(())
                }
            }
        }
    }
}

/// Parses `args` (including the program name), runs the command and returns
/// the process exit status.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return e.exit_code();
        }
    };
    match execute(cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            if e.is_config() {
                2
            } else {
                3
            }
        }
    }
}

pub fn main() -> i32 {
    run(std::env::args_os())
}
