//! Word lists and lookup tables shipped with the crate.
//!
//! Every table can also be loaded from a file in the same plain-text format:
//! stopwords and profanity are one word per line, lemma exceptions are
//! `surface<TAB>lemma`, and the emoji lexicon is
//! `<hex codepoints separated by spaces><TAB><name words>`.

use std::collections::{HashMap, HashSet};
use std::fs;
use std::path::Path;
use std::sync::{Arc, OnceLock};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};

const STOPWORDS_EN: &str = include_str!("../resources/stopwords_en.txt");
const LEMMA_EXCEPTIONS: &str = include_str!("../resources/lemma_exceptions.tsv");
const EMOJI_LEXICON: &str = include_str!("../resources/emoji_lexicon.tsv");
const PROFANITY_EN: &str = include_str!("../resources/profanity_en.txt");

pub const BUILTIN: &str = "builtin";

pub fn sha256_hex(text: &str) -> String {
    hex::encode(Sha256::digest(text.as_bytes()))
}

fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| Error::io(path, e))
}

fn data_lines(text: &str) -> impl Iterator<Item = (usize, &str)> {
    text.lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim_end_matches('\r')))
        .filter(|(_, l)| !l.trim().is_empty())
}

fn parse_word_list(text: &str) -> Result<HashSet<String>> {
    let mut words = HashSet::new();
    for (line, w) in data_lines(text) {
        let w = w.trim();
        if w.chars().any(char::is_whitespace) || w.to_lowercase() != w {
            return Err(Error::Parse {
                line,
                msg: format!("word list entry `{w}` must be lowercase without whitespace"),
            });
        }
        words.insert(w.to_string());
    }
    Ok(words)
}

#[derive(Debug, Clone)]
pub struct StopwordList {
    words: HashSet<String>,
}

impl StopwordList {
    pub fn parse(text: &str) -> Result<Self> {
        Ok(StopwordList {
            words: parse_word_list(text)?,
        })
    }

    /// Case-insensitive membership.
    pub fn contains(&self, token: &str) -> bool {
        self.words.contains(&token.to_lowercase())
    }

    pub fn len(&self) -> usize {
        self.words.len()
    }

    pub fn is_empty(&self) -> bool {
        self.words.is_empty()
    }
}

#[derive(Debug, Clone)]
pub struct ProfanityList {
    words: HashSet<String>,
}

impl ProfanityList {
    pub fn parse(text: &str) -> Result<Self> {
        Ok(ProfanityList {
            words: parse_word_list(text)?,
        })
    }

    pub fn contains(&self, lowercase_token: &str) -> bool {
        self.words.contains(lowercase_token)
    }
}

#[derive(Debug, Clone, Default)]
pub struct LemmaTable {
    exceptions: HashMap<String, String>,
}

impl LemmaTable {
    pub fn parse(text: &str) -> Result<Self> {
        let mut exceptions = HashMap::new();
        for (line, l) in data_lines(text) {
            let mut cols = l.split('\t');
            match (cols.next(), cols.next(), cols.next()) {
                (Some(surface), Some(lemma), None) if !surface.is_empty() && !lemma.is_empty() => {
                    exceptions.insert(surface.to_string(), lemma.to_string());
                }
                _ => {
                    return Err(Error::Parse {
                        line,
                        msg: "expected `surface<TAB>lemma`".into(),
                    })
                }
            }
        }
        Ok(LemmaTable { exceptions })
    }

    pub fn exception(&self, surface: &str) -> Option<&str> {
        self.exceptions.get(surface).map(String::as_str)
    }
}

#[derive(Debug, Clone, Default)]
pub struct EmojiLexicon {
    names: HashMap<String, String>,
    first_chars: HashSet<char>,
    max_len: usize,
}

impl EmojiLexicon {
    pub fn parse(text: &str) -> Result<Self> {
        let mut lex = EmojiLexicon::default();
        for (line, l) in data_lines(text) {
            let err = |msg: &str| Error::Parse {
                line,
                msg: msg.to_string(),
            };
            let (codes, name) = l.split_once('\t').ok_or_else(|| err("missing tab"))?;
            let mut key = String::new();
            for hexcode in codes.split(' ') {
                let cp = u32::from_str_radix(hexcode, 16)
                    .ok()
                    .and_then(char::from_u32)
                    .ok_or_else(|| err("invalid codepoint"))?;
                key.push(cp);
            }
            if key.is_empty() || key.is_ascii() {
                return Err(err("emoji key must contain a non-ASCII codepoint"));
            }
            let name = name.trim();
            if name.is_empty() || !name.chars().all(|c| c.is_ascii_lowercase() || c == ' ') {
                return Err(err("emoji name must be lowercase ASCII letters and spaces"));
            }
            lex.max_len = lex.max_len.max(key.chars().count());
            lex.first_chars.insert(key.chars().next().unwrap());
            lex.names.insert(key, name.to_string());
        }
        Ok(lex)
    }

    pub fn insert(&mut self, emoji: &str, name: &str) {
        let Some(first) = emoji.chars().next() else {
            return;
        };
        self.max_len = self.max_len.max(emoji.chars().count());
        self.first_chars.insert(first);
        self.names.insert(emoji.to_string(), name.to_string());
    }

    pub fn len(&self) -> usize {
        self.names.len()
    }

    pub fn is_empty(&self) -> bool {
        self.names.is_empty()
    }

    /// Longest lexicon entry starting at `chars[start]`: `(length in chars, name)`.
    pub fn longest_match(&self, chars: &[char], start: usize) -> Option<(usize, &str)> {
        if !self.first_chars.contains(&chars[start]) {
            return None;
        }
        let longest = self.max_len.min(chars.len() - start);
        let mut key = String::with_capacity(longest * 4);
        (1..=longest).rev().find_map(|len| {
            key.clear();
            key.extend(&chars[start..start + len]);
            self.names.get(&key).map(|n| (len, n.as_str()))
        })
    }

    /// Splits text into `Ok(non-emoji char)` / `Err(emoji name)` pieces using
    /// greedy longest matching.
    pub fn scan<'a>(&'a self, text: &str) -> Vec<std::result::Result<char, &'a str>> {
        let chars: Vec<char> = text.chars().collect();
        let mut out = Vec::with_capacity(chars.len());
        let mut i = 0;
        while i < chars.len() {
            match self.longest_match(&chars, i) {
                Some((len, name)) => {
                    out.push(Err(name));
                    i += len;
                }
                None => {
                    out.push(Ok(chars[i]));
                    i += 1;
                }
            }
        }
        out
    }

    pub fn count(&self, text: &str) -> usize {
        self.scan(text).iter().filter(|p| p.is_err()).count()
    }
}

/// Where each table came from, plus a checksum of its contents.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ResourceInfo {
    pub source: String,
    pub sha256: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ResourceManifest {
    pub stopwords: ResourceInfo,
    pub lemma_exceptions: ResourceInfo,
    pub emoji_lexicon: ResourceInfo,
    pub profanity: ResourceInfo,
}

/// Paths to override individual bundled tables. `None` keeps the builtin.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ResourcePaths {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub stopwords: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lemma_exceptions: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub emoji_lexicon: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub profanity: Option<String>,
}

impl ResourcePaths {
    pub fn is_builtin(&self) -> bool {
        *self == ResourcePaths::default()
    }
}

#[derive(Debug, Clone)]
pub struct Resources {
    pub stopwords: StopwordList,
    pub lemmas: LemmaTable,
    pub emoji: EmojiLexicon,
    pub profanity: ProfanityList,
    pub manifest: ResourceManifest,
}

impl Resources {
    /// The bundled tables, parsed once per process.
    pub fn builtin() -> Arc<Resources> {
        static BUILTIN_RESOURCES: OnceLock<Arc<Resources>> = OnceLock::new();
        BUILTIN_RESOURCES
            .get_or_init(|| {
                Arc::new(
                    Resources::load(&ResourcePaths::default())
                        .expect("bundled resource files are valid"),
                )
            })
            .clone()
    }

    pub fn load(paths: &ResourcePaths) -> Result<Resources> {
        fn fetch(path: &Option<String>, builtin: &str) -> Result<(String, ResourceInfo)> {
            let (text, source) = match path {
                Some(p) => (read(Path::new(p))?, p.clone()),
                None => (builtin.to_string(), BUILTIN.to_string()),
            };
            let sha256 = sha256_hex(&text);
            Ok((text, ResourceInfo { source, sha256 }))
        }
        let (sw, sw_info) = fetch(&paths.stopwords, STOPWORDS_EN)?;
        let (lm, lm_info) = fetch(&paths.lemma_exceptions, LEMMA_EXCEPTIONS)?;
        let (em, em_info) = fetch(&paths.emoji_lexicon, EMOJI_LEXICON)?;
        let (pf, pf_info) = fetch(&paths.profanity, PROFANITY_EN)?;
        Ok(Resources {
            stopwords: StopwordList::parse(&sw)?,
            lemmas: LemmaTable::parse(&lm)?,
            emoji: EmojiLexicon::parse(&em)?,
            profanity: ProfanityList::parse(&pf)?,
            manifest: ResourceManifest {
                stopwords: sw_info,
                lemma_exceptions: lm_info,
                emoji_lexicon: em_info,
                profanity: pf_info,
            },
        })
    }
}
