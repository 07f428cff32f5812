//! Tweet datasets in the shared-task TSV layout and stratified fold plans.
//!
//! Records are `id<TAB>text<TAB>label`, one per line, without a header
//! unless [`TsvOptions::header`] is set. Text is kept exactly as read; the
//! only byte ever dropped is a trailing `\r` of a CRLF line ending.

use std::collections::HashSet;
use std::fmt;
use std::fs;
use std::path::Path;
use std::str::FromStr;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Label {
    Informative,
    Uninformative,
}

impl Label {
    pub const ALL: [Label; 2] = [Label::Informative, Label::Uninformative];

    pub fn as_str(self) -> &'static str {
        match self {
            Label::Informative => "INFORMATIVE",
            Label::Uninformative => "UNINFORMATIVE",
        }
    }

    /// +1 for the positive class (INFORMATIVE), -1 otherwise.
    pub fn sign(self) -> f64 {
        match self {
            Label::Informative => 1.0,
            Label::Uninformative => -1.0,
        }
    }

    pub fn from_sign(score: f64) -> Label {
        if score >= 0.0 {
            Label::Informative
        } else {
            Label::Uninformative
        }
    }

    pub fn is_positive(self) -> bool {
        self == Label::Informative
    }

    pub fn other(self) -> Label {
        match self {
            Label::Informative => Label::Uninformative,
            Label::Uninformative => Label::Informative,
        }
    }
}

impl fmt::Display for Label {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Label {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "INFORMATIVE" => Ok(Label::Informative),
            "UNINFORMATIVE" => Ok(Label::Uninformative),
            other => Err(Error::UnknownLabel(other.to_string())),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Tweet {
    pub id: String,
    pub text: String,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LabeledTweet {
    pub tweet: Tweet,
    pub label: Option<Label>,
}

impl LabeledTweet {
    pub fn new(id: impl Into<String>, text: impl Into<String>, label: Option<Label>) -> Self {
        LabeledTweet {
            tweet: Tweet {
                id: id.into(),
                text: text.into(),
            },
            label,
        }
    }

    pub fn id(&self) -> &str {
        &self.tweet.id
    }

    pub fn text(&self) -> &str {
        &self.tweet.text
    }
}

#[derive(Debug, Clone, Copy, Default)]
pub struct TsvOptions {
    pub has_labels: bool,
    /// Skip the first line.
    pub header: bool,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Dataset {
    pub name: String,
    pub records: Vec<LabeledTweet>,
}

impl Dataset {
    /// Builds a dataset, rejecting empty or duplicate ids.
    pub fn new(name: impl Into<String>, records: Vec<LabeledTweet>) -> Result<Self> {
        let mut seen = HashSet::with_capacity(records.len());
        for (i, r) in records.iter().enumerate() {
            if r.id().is_empty() {
                return Err(Error::Parse {
                    line: i + 1,
                    msg: "empty id".into(),
                });
            }
            if !seen.insert(r.id()) {
                return Err(Error::DuplicateId {
                    id: r.id().to_string(),
                    line: i + 1,
                });
            }
        }
        Ok(Dataset {
            name: name.into(),
            records,
        })
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn texts(&self) -> Vec<&str> {
        self.records.iter().map(|r| r.text()).collect()
    }

    /// Labels of every record; fails on the first unlabeled one.
    pub fn labels(&self) -> Result<Vec<Label>> {
        self.records
            .iter()
            .map(|r| r.label.ok_or_else(|| Error::Unlabeled(r.id().to_string())))
            .collect()
    }

    pub fn is_labeled(&self) -> bool {
        self.records.iter().all(|r| r.label.is_some())
    }

    pub fn subset(&self, indices: &[usize]) -> Dataset {
        Dataset {
            name: self.name.clone(),
            records: indices.iter().map(|&i| self.records[i].clone()).collect(),
        }
    }

    /// Concatenates two datasets; ids must stay unique.
    pub fn concat(&self, other: &Dataset, name: impl Into<String>) -> Result<Dataset> {
        let mut records = self.records.clone();
        records.extend(other.records.iter().cloned());
        Dataset::new(name, records)
    }

    pub fn to_tsv(&self) -> String {
        let mut out = String::new();
        for r in &self.records {
            out.push_str(r.id());
            out.push('\t');
            out.push_str(r.text());
            if let Some(label) = r.label {
                out.push('\t');
                out.push_str(label.as_str());
            }
            out.push('\n');
        }
        out
    }
}

pub fn load_tsv(path: impl AsRef<Path>, has_labels: bool) -> Result<Dataset> {
    load_tsv_with(
        path,
        TsvOptions {
            has_labels,
            header: false,
        },
    )
}

pub fn load_tsv_with(path: impl AsRef<Path>, opts: TsvOptions) -> Result<Dataset> {
    let path = path.as_ref();
    let content = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let name = path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default();
    parse_tsv(&name, &content, opts)
}

/// True when the first data line has a label column.
pub fn detect_labels(content: &str, header: bool) -> bool {
    content
        .split('\n')
        .skip(usize::from(header))
        .find(|l| !l.trim_end_matches('\r').is_empty())
        .is_some_and(|l| l.split('\t').count() == 3)
}

pub fn parse_tsv(name: &str, content: &str, opts: TsvOptions) -> Result<Dataset> {
    let expected_cols = if opts.has_labels { 3 } else { 2 };
    let mut records = Vec::new();
    let mut seen = HashSet::new();
    let mut lines = content.split('\n').enumerate().peekable();
    if opts.header {
        lines.next();
    }
    while let Some((i, raw)) = lines.next() {
        let line_no = i + 1;
        // Final empty fragment after a terminating newline.
        if raw.is_empty() && lines.peek().is_none() {
            break;
        }
        let line = raw.strip_suffix('\r').unwrap_or(raw);
        let cols: Vec<&str> = line.split('\t').collect();
        if cols.len() != expected_cols {
            return Err(Error::Parse {
                line: line_no,
                msg: format!("expected {expected_cols} columns, found {}", cols.len()),
            });
        }
        let id = cols[0];
        if id.is_empty() {
            return Err(Error::Parse {
                line: line_no,
                msg: "empty id".into(),
            });
        }
        let label = if opts.has_labels {
            Some(cols[2].parse::<Label>().map_err(|e| Error::Parse {
                line: line_no,
                msg: e.to_string(),
            })?)
        } else {
            None
        };
        if !seen.insert(id.to_string()) {
            return Err(Error::DuplicateId {
                id: id.to_string(),
                line: line_no,
            });
        }
        records.push(LabeledTweet::new(id, cols[1], label));
    }
    Ok(Dataset {
        name: name.to_string(),
        records,
    })
}

/// Fraction of records labeled INFORMATIVE.
pub fn class_prevalence(ds: &Dataset) -> Result<f64> {
    if ds.is_empty() {
        return Err(Error::EmptyDataset);
    }
    let labels = ds.labels()?;
    let pos = labels.iter().filter(|l| l.is_positive()).count();
    Ok(pos as f64 / labels.len() as f64)
}

/// Assignment of every record to one of `k` folds.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FoldPlan {
    pub k: usize,
    pub seed: u64,
    pub assignment: Vec<usize>,
}

impl FoldPlan {
    /// `(train, test)` record indices for fold `f`, both in dataset order.
    pub fn split(&self, f: usize) -> (Vec<usize>, Vec<usize>) {
        let mut train = Vec::new();
        let mut test = Vec::new();
        for (i, &a) in self.assignment.iter().enumerate() {
            if a == f {
                test.push(i);
            } else {
                train.push(i);
            }
        }
        (train, test)
    }

    pub fn fold_sizes(&self) -> Vec<usize> {
        let mut sizes = vec![0; self.k];
        for &a in &self.assignment {
            sizes[a] += 1;
        }
        sizes
    }
}

/// Stratified k-fold assignment.
///
/// Records are grouped by label (INFORMATIVE first), each group is shuffled
/// with a ChaCha8 generator seeded from `seed`, and the groups are dealt
/// round-robin into folds. The dealing position carries over from one group
/// to the next, so fold sizes also differ by at most one.
pub fn stratified_folds(ds: &Dataset, k: usize, seed: u64) -> Result<FoldPlan> {
    let labels = ds.labels()?;
    if k < 2 {
        return Err(Error::Config(format!("k must be at least 2, got {k}")));
    }
    let mut groups: Vec<Vec<usize>> = Label::ALL
        .iter()
        .map(|&c| (0..labels.len()).filter(|&i| labels[i] == c).collect())
        .collect();
    let min_class = groups.iter().map(Vec::len).min().unwrap_or(0);
    if k > min_class {
        return Err(Error::Config(format!(
            "k={k} exceeds the smallest class count ({min_class})"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut assignment = vec![0; labels.len()];
    let mut next = 0;
    for group in &mut groups {
        group.shuffle(&mut rng);
        for &i in group.iter() {
            assignment[i] = next;
            next = (next + 1) % k;
        }
    }
    Ok(FoldPlan {
        k,
        seed,
        assignment,
    })
}
