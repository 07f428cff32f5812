//! Seeded synthetic corpora shared by the integration tests.
#![allow(dead_code)]

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const KEY_WORDS: &[&str] = &["cases", "positive", "deaths", "died", "confirmed", "tested"];
const REPORT_WORDS: &[&str] = &[
    "new",
    "total",
    "hospital",
    "county",
    "reported",
    "recovered",
];
const CHAT_WORDS: &[&str] = &[
    "lol",
    "feel",
    "love",
    "stay",
    "safe",
    "think",
    "hate",
    "bored",
    "quarantine",
    "mood",
    "pray",
    "everyone",
    "hope",
    "vibes",
];
const SHARED_WORDS: &[&str] = &[
    "coronavirus",
    "covid",
    "today",
    "people",
    "state",
    "week",
    "update",
    "home",
    "news",
    "health",
    "virus",
    "world",
];
const EMOJI: &[&str] = &["😷", "😂", "🙏", "❤️", "😭", "👍🏽"];

fn tweet(rng: &mut ChaCha8Rng, informative: bool) -> String {
    let mut words: Vec<String> = Vec::new();
    if rng.gen_bool(0.5) {
        words.push("@USER".into());
    }
    let (main, other) = if informative {
        (REPORT_WORDS, CHAT_WORDS)
    } else {
        (CHAT_WORDS, REPORT_WORDS)
    };
    for _ in 0..rng.gen_range(3..7) {
        let pool = if informative && rng.gen_bool(0.7) {
            KEY_WORDS
        } else {
            main
        };
        words.push(pool.choose(rng).unwrap().to_string());
    }
    for _ in 0..rng.gen_range(2..6) {
        words.push(SHARED_WORDS.choose(rng).unwrap().to_string());
    }
    if rng.gen_bool(0.3) {
        words.push(other.choose(rng).unwrap().to_string());
    }
    if informative || rng.gen_bool(0.2) {
        words.push(format!("{}", rng.gen_range(1..5000)));
    }
    words.shuffle(rng);
    if rng.gen_bool(0.4) {
        words.push(format!("#{}", SHARED_WORDS.choose(rng).unwrap()));
    }
    if rng.gen_bool(0.3) {
        words.push(EMOJI.choose(rng).unwrap().to_string());
    }
    if rng.gen_bool(0.4) {
        words.push("HTTPURL".into());
    }
    words.join(" ")
}

/// Labeled TSV with `n` rows. About 15% of labels are flipped so that
/// classifiers cannot reach a perfect score.
pub fn corpus_tsv(n: usize, seed: u64, id_offset: usize) -> String {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = String::new();
    for i in 0..n {
        let informative = rng.gen_bool(0.47);
        let text = tweet(&mut rng, informative);
        let label = if rng.gen_bool(0.15) {
            !informative
        } else {
            informative
        };
        let label = if label {
            "INFORMATIVE"
        } else {
            "UNINFORMATIVE"
        };
        writeln!(out, "{}\t{text}\t{label}", id_offset + i).unwrap();
    }
    out
}

/// EMB1 file whose vectors sit in two well separated clusters keyed by the
/// label of each row of `tsv`.
pub fn separable_embeddings(tsvs: &[&str], dim: usize, seed: u64) -> String {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = format!("#emb v1 dim={dim}\n");
    for tsv in tsvs {
        for line in tsv.lines() {
            let cols: Vec<&str> = line.split('\t').collect();
            let centre = if cols[2] == "INFORMATIVE" { 1.0 } else { -1.0 };
            let v: Vec<String> = (0..dim)
                .map(|_| format!("{}", centre + rng.gen_range(-0.3..0.3)))
                .collect();
            writeln!(out, "{}\t{}", cols[0], v.join(" ")).unwrap();
        }
    }
    out
}

pub fn write(dir: &Path, name: &str, content: &str) -> PathBuf {
    let p = dir.join(name);
    fs::write(&p, content).unwrap();
    p
}

pub fn tweetclf(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_tweetclf"))
        .args(args)
        .output()
        .unwrap()
}

pub fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

pub fn stderr(o: &std::process::Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

pub fn stdout(o: &std::process::Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

pub struct Fixture {
    pub dir: tempfile::TempDir,
    pub train: String,
    pub valid: String,
}

impl Fixture {
    pub fn new() -> Self {
        let dir = tempfile::tempdir().unwrap();
        let train_tsv = corpus_tsv(240, 1, 0);
        let valid_tsv = corpus_tsv(80, 2, 10_000);
        let train = s(&write(dir.path(), "train.tsv", &train_tsv)).to_string();
        let valid = s(&write(dir.path(), "valid.tsv", &valid_tsv)).to_string();
        write(
            dir.path(),
            "emb.txt",
            &separable_embeddings(&[&train_tsv, &valid_tsv], 6, 3),
        );
        Fixture { dir, train, valid }
    }

    pub fn path(&self, name: &str) -> String {
        s(&self.dir.path().join(name)).to_string()
    }
}

pub fn run_ok(args: &[&str]) -> String {
    let o = tweetclf(args);
    assert!(o.status.success(), "{args:?}: {}", stderr(&o));
    stdout(&o)
}

/// Runs the whole command sequence into `dir` and returns every produced
/// file plus the captured stdout of each step.
pub fn full_run(f: &Fixture, dir: &str) -> Vec<(String, Vec<u8>)> {
    fs::create_dir_all(dir).unwrap();
    let p = |n: &str| format!("{dir}/{n}");
    let emb = f.path("emb.txt");
    let mut outputs = Vec::new();
    let mut log = |name: &str, text: String| outputs.push((name.to_string(), text.into_bytes()));
    log(
        "clean.stdout",
        run_ok(&[
            "clean",
            "--in",
            &f.train,
            "--out",
            &p("clean.tsv"),
            "--pipeline",
            "op",
        ]),
    );
    log(
        "cv.stdout",
        run_ok(&[
            "cv",
            "--train",
            &f.train,
            "--valid",
            &f.valid,
            "--k",
            "4",
            "--model",
            "forest",
            "--seed",
            "9",
            "--out",
            &p("cv"),
        ]),
    );
    log(
        "train.stdout",
        run_ok(&[
            "train",
            "--train",
            &f.train,
            "--features",
            "tfidf",
            "--out",
            &p("model.json"),
        ]),
    );
    log(
        "predict.stdout",
        run_ok(&[
            "predict",
            "--model-file",
            &p("model.json"),
            "--in",
            &f.valid,
            "--out",
            &p("pred.tsv"),
        ]),
    );
    log(
        "weights.stdout",
        run_ok(&["weights", "--model-file", &p("model.json"), "--n", "10"]),
    );
    log(
        "fuse-train.stdout",
        run_ok(&[
            "fuse-train",
            "--train",
            &f.train,
            "--emb",
            &emb,
            "--standardize",
            "--out",
            &p("fm.json"),
        ]),
    );
    log(
        "fuse-eval.stdout",
        run_ok(&[
            "fuse-eval",
            "--model-file",
            &p("fm.json"),
            "--valid",
            &f.valid,
            "--emb",
            &emb,
        ]),
    );
    for name in [
        "clean.tsv",
        "cv/cv_report.json",
        "cv/cv_report.txt",
        "model.json",
        "pred.tsv",
        "fm.json",
    ] {
        outputs.push((name.to_string(), fs::read(p(name)).unwrap()));
    }
    outputs
}
