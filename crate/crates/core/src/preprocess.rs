//! Tweet cleaning stages and their composition into pipelines.
//!
//! Every stage is a total `&str -> String` function whose output has no
//! leading or trailing whitespace and no runs of more than one space.

use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::resources::{EmojiLexicon, LemmaTable, ResourcePaths, Resources, StopwordList};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Stage {
    RemoveUserTokens,
    RemoveUrlTokens,
    RemoveHashChar,
    CompressRepeats,
    EmojiToWords,
    RemoveNonAlnum,
    RemoveStopwords,
    Lemmatize,
    Lowercase,
}

impl Stage {
    pub const ALL: [Stage; 9] = [
        Stage::RemoveUserTokens,
        Stage::RemoveUrlTokens,
        Stage::RemoveHashChar,
        Stage::CompressRepeats,
        Stage::EmojiToWords,
        Stage::RemoveNonAlnum,
        Stage::RemoveStopwords,
        Stage::Lemmatize,
        Stage::Lowercase,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Stage::RemoveUserTokens => "remove_user_tokens",
            Stage::RemoveUrlTokens => "remove_url_tokens",
            Stage::RemoveHashChar => "remove_hash_char",
            Stage::CompressRepeats => "compress_repeats",
            Stage::EmojiToWords => "emoji_to_words",
            Stage::RemoveNonAlnum => "remove_non_alnum",
            Stage::RemoveStopwords => "remove_stopwords",
            Stage::Lemmatize => "lemmatize",
            Stage::Lowercase => "lowercase",
        }
    }
}

impl fmt::Display for Stage {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Stage {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Stage::ALL
            .into_iter()
            .find(|st| st.name() == s)
            .ok_or_else(|| Error::Config(format!("unknown stage `{s}`")))
    }
}

/// The best-performing cleaning configuration, in application order.
pub const OPTIMAL_PREPROCESSOR: [Stage; 5] = [
    Stage::RemoveUserTokens,
    Stage::RemoveUrlTokens,
    Stage::RemoveHashChar,
    Stage::EmojiToWords,
    Stage::CompressRepeats,
];

/// Named pipelines: the optimal preprocessor, no cleaning, and the optimal
/// preprocessor followed by one generic stage.
pub const NAMED_PIPELINES: [&str; 6] = [
    "op",
    "none",
    "op+stopwords",
    "op+alnum",
    "op+lowercase",
    "op+lemma",
];

pub fn named_stages(name: &str) -> Result<Vec<Stage>> {
    let mut stages = OPTIMAL_PREPROCESSOR.to_vec();
    let extra = match name {
        "op" => None,
        "none" => return Ok(Vec::new()),
        "op+stopwords" => Some(Stage::RemoveStopwords),
        "op+alnum" => Some(Stage::RemoveNonAlnum),
        "op+lowercase" => Some(Stage::Lowercase),
        "op+lemma" => Some(Stage::Lemmatize),
        other => return Err(Error::Config(format!("unknown pipeline `{other}`"))),
    };
    stages.extend(extra);
    Ok(stages)
}

/// Serialized form of a pipeline.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PipelineSpec {
    pub stages: Vec<Stage>,
    #[serde(default, skip_serializing_if = "ResourcePaths::is_builtin")]
    pub resources: ResourcePaths,
}

#[derive(Debug, Clone)]
pub struct PipelineConfig {
    stages: Vec<Stage>,
    resource_paths: ResourcePaths,
    resources: Arc<Resources>,
}

impl PipelineConfig {
    /// Pipeline over the bundled resources.
    pub fn new(stages: Vec<Stage>) -> Result<Self> {
        Self::with_resources(stages, ResourcePaths::default())
    }

    pub fn with_resources(stages: Vec<Stage>, paths: ResourcePaths) -> Result<Self> {
        for (i, s) in stages.iter().enumerate() {
            if stages[..i].contains(s) {
                return Err(Error::Config(format!("stage `{s}` listed twice")));
            }
        }
        let resources = if paths.is_builtin() {
            Resources::builtin()
        } else {
            Arc::new(Resources::load(&paths)?)
        };
        Ok(PipelineConfig {
            stages,
            resource_paths: paths,
            resources,
        })
    }

    pub fn optimal() -> Self {
        Self::new(OPTIMAL_PREPROCESSOR.to_vec()).expect("OP has no duplicate stages")
    }

    pub fn named(name: &str) -> Result<Self> {
        Self::new(named_stages(name)?)
    }

    pub fn from_spec(spec: &PipelineSpec) -> Result<Self> {
        Self::with_resources(spec.stages.clone(), spec.resources.clone())
    }

    pub fn spec(&self) -> PipelineSpec {
        PipelineSpec {
            stages: self.stages.clone(),
            resources: self.resource_paths.clone(),
        }
    }

    pub fn stages(&self) -> &[Stage] {
        &self.stages
    }

    pub fn resources(&self) -> &Resources {
        &self.resources
    }

    pub fn shared_resources(&self) -> Arc<Resources> {
        self.resources.clone()
    }

    pub fn apply(&self, text: &str) -> String {
        apply_pipeline(self, text)
    }
}

fn squash_whitespace(text: &str) -> String {
    let mut out = String::with_capacity(text.len());
    for tok in text.split_whitespace() {
        if !out.is_empty() {
            out.push(' ');
        }
        out.push_str(tok);
    }
    out
}

/// Replaces every occurrence of `token` with a space. A space cannot be part
/// of the placeholder, so removal never assembles a new occurrence.
fn remove_substring(text: &str, token: &str) -> String {
    squash_whitespace(&text.replace(token, " "))
}

pub fn compress_repeats(text: &str) -> String {
    let mut out = String::with_capacity(text.len());
    let mut prev = None;
    let mut run = 0;
    for c in text.chars() {
        if Some(c) == prev {
            run += 1;
        } else {
            prev = Some(c);
            run = 1;
        }
        if run <= 2 {
            out.push(c);
        }
    }
    squash_whitespace(&out)
}

pub fn emoji_to_words(text: &str, lexicon: &EmojiLexicon) -> String {
    let mut out = String::with_capacity(text.len() + 16);
    for piece in lexicon.scan(text) {
        match piece {
            Ok(c) => out.push(c),
            Err(name) => {
                out.push(' ');
                out.push_str(name);
                out.push(' ');
            }
        }
    }
    squash_whitespace(&out)
}

pub fn remove_non_alnum(text: &str) -> String {
    let kept: String = text
        .chars()
        .filter_map(|c| {
            if c.is_alphanumeric() {
                Some(c)
            } else if c.is_whitespace() {
                Some(' ')
            } else {
                None
            }
        })
        .collect();
    squash_whitespace(&kept)
}

pub fn remove_stopwords(text: &str, list: &StopwordList) -> String {
    text.split_whitespace()
        .filter(|t| !list.contains(t))
        .collect::<Vec<_>>()
        .join(" ")
}

/// Suffix rules tried in order; the first that applies wins.
fn strip_suffix_rule(token: &str) -> Option<String> {
    let n = token.chars().count();
    if let Some(stem) = token.strip_suffix("ies") {
        return Some(format!("{stem}y"));
    }
    if let Some(stem) = token.strip_suffix("sses") {
        return Some(format!("{stem}ss"));
    }
    if n > 3 && token.ends_with('s') && !["ss", "us", "is"].iter().any(|e| token.ends_with(e)) {
        return Some(token[..token.len() - 1].to_string());
    }
    if let Some(stem) = token.strip_suffix("ing") {
        if stem.chars().count() >= 3 {
            return Some(stem.to_string());
        }
    }
    if let Some(stem) = token.strip_suffix("ed") {
        if stem.chars().count() >= 3 {
            return Some(stem.to_string());
        }
    }
    None
}

fn lemma_step(token: &str, table: &LemmaTable) -> Option<String> {
    match table.exception(token) {
        Some(lemma) if lemma != token => Some(lemma.to_string()),
        Some(_) => None,
        None => strip_suffix_rule(token),
    }
}

/// Lemma of a single token. The exception table is consulted first, then
/// the suffix rules; the step repeats until the token stops changing so the
/// stage is idempotent (`runnings` -> `running` -> `run`).
pub fn lemmatize_token(token: &str, table: &LemmaTable) -> String {
    const MAX_STEPS: usize = 32;
    let mut current = token.to_string();
    for _ in 0..MAX_STEPS {
        match lemma_step(&current, table) {
            Some(next) => current = next,
            None => break,
        }
    }
    current
}

pub fn lemmatize(text: &str, table: &LemmaTable) -> String {
    text.split_whitespace()
        .map(|t| lemmatize_token(t, table))
        .filter(|t| !t.is_empty())
        .collect::<Vec<_>>()
        .join(" ")
}

pub fn apply_stage(stage: Stage, text: &str, resources: &Resources) -> String {
    match stage {
        Stage::RemoveUserTokens => remove_substring(text, "@USER"),
        Stage::RemoveUrlTokens => remove_substring(text, "HTTPURL"),
        Stage::RemoveHashChar => remove_substring(text, "#"),
        Stage::CompressRepeats => compress_repeats(text),
        Stage::EmojiToWords => emoji_to_words(text, &resources.emoji),
        Stage::RemoveNonAlnum => remove_non_alnum(text),
        Stage::RemoveStopwords => remove_stopwords(text, &resources.stopwords),
        Stage::Lemmatize => lemmatize(text, &resources.lemmas),
        Stage::Lowercase => squash_whitespace(&text.to_lowercase()),
    }
}

/// Left-to-right composition of the configured stages. An empty pipeline is
/// the identity.
pub fn apply_pipeline(cfg: &PipelineConfig, text: &str) -> String {
    cfg.stages.iter().fold(text.to_string(), |acc, &s| {
        apply_stage(s, &acc, &cfg.resources)
    })
}
