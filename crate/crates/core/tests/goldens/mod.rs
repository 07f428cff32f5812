//! Checked-in raw tweets and their expected cleaned forms, produced by the
//! standalone reference script in `tests/fixtures/gen_golden.py`.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::Command;

use tweetclf::corpus::load_tsv;
use tweetclf::preprocess::{PipelineConfig, Stage};

pub const ROWS: usize = 50;

pub fn dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures/golden")
}

pub fn render(pipeline: &PipelineConfig) -> String {
    let mut ds = load_tsv(dir().join("raw.tsv"), true).unwrap();
    assert_eq!(ds.len(), ROWS);
    for r in &mut ds.records {
        r.tweet.text = pipeline.apply(&r.tweet.text);
    }
    ds.to_tsv()
}

pub fn expected(name: &str) -> String {
    fs::read_to_string(dir().join(format!("{name}.tsv"))).unwrap()
}

/// `op` plus one entry per single stage, with the pipeline to run.
pub fn cases() -> Vec<(String, PipelineConfig)> {
    let mut out = vec![("op".to_string(), PipelineConfig::optimal())];
    for stage in Stage::ALL {
        out.push((
            stage.name().to_string(),
            PipelineConfig::new(vec![stage]).unwrap(),
        ));
    }
    out
}

/// First differing line of `got` against the golden file, if any.
pub fn first_difference(name: &str, got: &str) -> Option<String> {
    let want = expected(name);
    if got == want {
        return None;
    }
    for (i, (g, w)) in got.lines().zip(want.lines()).enumerate() {
        if g != w {
            return Some(format!("{name}: line {}: got {g:?}, want {w:?}", i + 1));
        }
    }
    Some(format!("{name}: outputs differ in length or line endings"))
}

/// Differences between the library output and each golden file.
pub fn library_differences() -> Vec<String> {
    cases()
        .iter()
        .filter_map(|(name, p)| first_difference(name, &render(p)))
        .collect()
}

/// Same comparison through the `clean` command.
pub fn cli_differences() -> Vec<String> {
    let tmp = tempfile::tempdir().unwrap();
    let raw = dir().join("raw.tsv");
    let mut out = Vec::new();
    for (name, _) in cases() {
        let flag = if name == "op" {
            "--pipeline"
        } else {
            "--stages"
        };
        let path = tmp.path().join(format!("{name}.tsv"));
        let status = Command::new(env!("CARGO_BIN_EXE_tweetclf"))
            .arg("clean")
            .arg("--in")
            .arg(&raw)
            .arg("--out")
            .arg(&path)
            .args([flag, &name])
            .status()
            .unwrap();
        if !status.success() {
            out.push(format!("{name}: clean exited with {status}"));
            continue;
        }
        let got = String::from_utf8(fs::read(&path).unwrap()).unwrap();
        out.extend(first_difference(&name, &got));
    }
    out
}
