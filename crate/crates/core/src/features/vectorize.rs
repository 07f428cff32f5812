use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::sparse::{FeatureMatrix, SparseVector};

/// Maximal runs of word characters (letters, digits, underscore) at least two
/// scalars long. No case folding.
pub fn tokenize_for_ngrams(text: &str) -> Vec<&str> {
    let mut tokens = Vec::new();
    let mut start = None;
    let mut len = 0;
    for (pos, c) in text.char_indices() {
        if c.is_alphanumeric() || c == '_' {
            if start.is_none() {
                start = Some(pos);
                len = 0;
            }
            len += 1;
        } else if let Some(s) = start.take() {
            if len >= 2 {
                tokens.push(&text[s..pos]);
            }
        }
    }
    if let Some(s) = start {
        if len >= 2 {
            tokens.push(&text[s..]);
        }
    }
    tokens
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(into = "[usize; 2]", try_from = "[usize; 2]")]
pub struct NgramRange {
    pub min: usize,
    pub max: usize,
}

impl NgramRange {
    pub const UNIGRAMS: NgramRange = NgramRange { min: 1, max: 1 };
    pub const UP_TO_TRIGRAMS: NgramRange = NgramRange { min: 1, max: 3 };

    pub fn new(min: usize, max: usize) -> Result<Self> {
        if min == 0 || min > max {
            return Err(Error::Config(format!(
                "invalid n-gram range ({min}, {max})"
            )));
        }
        Ok(NgramRange { min, max })
    }
}

impl From<NgramRange> for [usize; 2] {
    fn from(r: NgramRange) -> Self {
        [r.min, r.max]
    }
}

impl TryFrom<[usize; 2]> for NgramRange {
    type Error = Error;

    fn try_from(v: [usize; 2]) -> Result<Self> {
        NgramRange::new(v[0], v[1])
    }
}

/// Contiguous n-grams for every `n` in the range, joined by single spaces,
/// shorter n-grams first.
pub fn extract_ngrams(tokens: &[&str], range: NgramRange) -> Vec<String> {
    let mut out = Vec::new();
    for n in range.min..=range.max {
        if n > tokens.len() {
            break;
        }
        out.extend(tokens.windows(n).map(|w| w.join(" ")));
    }
    out
}

fn ngram_counts(text: &str, range: NgramRange) -> BTreeMap<String, usize> {
    let tokens = tokenize_for_ngrams(text);
    let mut counts = BTreeMap::new();
    for g in extract_ngrams(&tokens, range) {
        *counts.entry(g).or_insert(0) += 1;
    }
    counts
}

/// N-gram to column mapping; columns follow lexicographic n-gram order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(from = "VocabularyRepr", into = "VocabularyRepr")]
pub struct Vocabulary {
    ngram_range: NgramRange,
    terms: Vec<String>,
    index: HashMap<String, usize>,
}

#[derive(Serialize, Deserialize)]
struct VocabularyRepr {
    ngram_range: NgramRange,
    terms: Vec<String>,
}

impl From<VocabularyRepr> for Vocabulary {
    fn from(r: VocabularyRepr) -> Self {
        Vocabulary::from_terms(r.ngram_range, r.terms.into_iter().collect())
    }
}

impl From<Vocabulary> for VocabularyRepr {
    fn from(v: Vocabulary) -> Self {
        VocabularyRepr {
            ngram_range: v.ngram_range,
            terms: v.terms,
        }
    }
}

impl Vocabulary {
    pub fn from_terms(ngram_range: NgramRange, terms: BTreeSet<String>) -> Self {
        let terms: Vec<String> = terms.into_iter().collect();
        let index = terms
            .iter()
            .enumerate()
            .map(|(i, t)| (t.clone(), i))
            .collect();
        Vocabulary {
            ngram_range,
            terms,
            index,
        }
    }

    pub fn fit<S: AsRef<str>>(corpus: &[S], ngram_range: NgramRange) -> Self {
        let mut terms = BTreeSet::new();
        for doc in corpus {
            let tokens = tokenize_for_ngrams(doc.as_ref());
            terms.extend(extract_ngrams(&tokens, ngram_range));
        }
        Vocabulary::from_terms(ngram_range, terms)
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn ngram_range(&self) -> NgramRange {
        self.ngram_range
    }

    pub fn get(&self, term: &str) -> Option<usize> {
        self.index.get(term).copied()
    }

    pub fn term(&self, column: usize) -> &str {
        &self.terms[column]
    }

    pub fn terms(&self) -> &[String] {
        &self.terms
    }

    /// In-vocabulary n-gram counts of `text` as `(column, count)` pairs.
    fn column_counts(&self, text: &str) -> Vec<(usize, f64)> {
        let mut pairs: Vec<(usize, f64)> = ngram_counts(text, self.ngram_range)
            .into_iter()
            .filter_map(|(g, c)| self.get(&g).map(|col| (col, c as f64)))
            .collect();
        pairs.sort_by_key(|&(c, _)| c);
        pairs
    }
}

/// Unigram vocabulary for raw counts.
pub fn fit_counts<S: AsRef<str>>(corpus: &[S]) -> Vocabulary {
    Vocabulary::fit(corpus, NgramRange::UNIGRAMS)
}

pub fn transform_counts(vocab: &Vocabulary, text: &str) -> SparseVector {
    SparseVector::from_pairs(vocab.len(), vocab.column_counts(text))
}

/// Fitted TF-IDF weights: `idf = ln((1 + N) / (1 + df)) + 1`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TfidfModel {
    pub vocab: Vocabulary,
    pub idf: Vec<f64>,
    pub document_count: usize,
}

pub fn fit_tfidf<S: AsRef<str>>(corpus: &[S], ngram_range: NgramRange) -> Result<TfidfModel> {
    if corpus.is_empty() {
        return Err(Error::EmptyDataset);
    }
    let per_doc: Vec<BTreeMap<String, usize>> = corpus
        .iter()
        .map(|d| ngram_counts(d.as_ref(), ngram_range))
        .collect();
    let mut df: BTreeMap<&str, usize> = BTreeMap::new();
    for counts in &per_doc {
        for g in counts.keys() {
            *df.entry(g.as_str()).or_insert(0) += 1;
        }
    }
    let n = corpus.len() as f64;
    let idf = df
        .values()
        .map(|&d| ((1.0 + n) / (1.0 + d as f64)).ln() + 1.0)
        .collect();
    let vocab = Vocabulary::from_terms(ngram_range, df.keys().map(|s| s.to_string()).collect());
    Ok(TfidfModel {
        vocab,
        idf,
        document_count: corpus.len(),
    })
}

/// Raw count times idf, then L2-normalized; documents without known terms
/// map to the zero vector.
pub fn transform_tfidf(model: &TfidfModel, text: &str) -> SparseVector {
    let mut pairs = model.vocab.column_counts(text);
    for (col, v) in &mut pairs {
        *v *= model.idf[*col];
    }
    let norm = pairs.iter().map(|(_, v)| v * v).sum::<f64>().sqrt();
    if norm > 0.0 {
        for (_, v) in &mut pairs {
            *v /= norm;
        }
    }
    SparseVector::from_pairs(model.vocab.len(), pairs)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FeaturizerKind {
    /// Raw unigram counts.
    Counts,
    /// TF-IDF over unigrams, bigrams and trigrams.
    Tfidf,
}

impl FeaturizerKind {
    pub fn name(self) -> &'static str {
        match self {
            FeaturizerKind::Counts => "counts",
            FeaturizerKind::Tfidf => "tfidf",
        }
    }

    pub fn fit<S: AsRef<str>>(self, corpus: &[S]) -> Result<FittedFeaturizer> {
        match self {
            FeaturizerKind::Counts => {
                if corpus.is_empty() {
                    return Err(Error::EmptyDataset);
                }
                Ok(FittedFeaturizer::Counts(fit_counts(corpus)))
            }
            FeaturizerKind::Tfidf => Ok(FittedFeaturizer::Tfidf(fit_tfidf(
                corpus,
                NgramRange::UP_TO_TRIGRAMS,
            )?)),
        }
    }
}

impl fmt::Display for FeaturizerKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for FeaturizerKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "counts" => Ok(FeaturizerKind::Counts),
            "tfidf" => Ok(FeaturizerKind::Tfidf),
            other => Err(Error::Config(format!("unknown featurizer `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum FittedFeaturizer {
    Counts(Vocabulary),
    Tfidf(TfidfModel),
}

impl FittedFeaturizer {
    pub fn vocab(&self) -> &Vocabulary {
        match self {
            FittedFeaturizer::Counts(v) => v,
            FittedFeaturizer::Tfidf(m) => &m.vocab,
        }
    }

    pub fn transform(&self, text: &str) -> SparseVector {
        match self {
            FittedFeaturizer::Counts(v) => transform_counts(v, text),
            FittedFeaturizer::Tfidf(m) => transform_tfidf(m, text),
        }
    }

    pub fn transform_all<S: AsRef<str>>(&self, texts: &[S]) -> FeatureMatrix {
        let rows = texts.iter().map(|t| self.transform(t.as_ref())).collect();
        FeatureMatrix::Sparse {
            dim: self.vocab().len(),
            rows,
        }
    }
}
