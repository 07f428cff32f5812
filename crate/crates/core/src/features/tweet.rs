use serde::{Deserialize, Serialize};

use crate::resources::Resources;

pub const TWEET_FEATURE_NAMES: [&str; 7] = [
    "url_count",
    "hash_count",
    "user_count",
    "emoji_count",
    "word_count",
    "syllable_count",
    "has_profanity",
];

/// Seven counts computed on the raw tweet text.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct TweetFeatures {
    pub url_count: u32,
    pub hash_count: u32,
    pub user_count: u32,
    pub emoji_count: u32,
    pub word_count: u32,
    pub syllable_count: u32,
    pub has_profanity: u32,
}

impl TweetFeatures {
    /// Slots in [`TWEET_FEATURE_NAMES`] order.
    pub fn to_array(&self) -> [f64; 7] {
        [
            self.url_count as f64,
            self.hash_count as f64,
            self.user_count as f64,
            self.emoji_count as f64,
            self.word_count as f64,
            self.syllable_count as f64,
            self.has_profanity as f64,
        ]
    }
}

fn is_vowel(c: char) -> bool {
    matches!(c, 'a' | 'e' | 'i' | 'o' | 'u' | 'y')
}

/// Vowel-group syllable estimate for a lowercase alphabetic word.
pub fn word_syllables(word: &str) -> u32 {
    let chars: Vec<char> = word.chars().collect();
    let mut groups = 0u32;
    let mut in_group = false;
    for &c in &chars {
        let v = is_vowel(c);
        if v && !in_group {
            groups += 1;
        }
        in_group = v;
    }
    let n = chars.len();
    if n > 2 && chars[n - 1] == 'e' && !is_vowel(chars[n - 2]) {
        groups = groups.saturating_sub(1);
    }
    groups.max(1)
}

/// Sum over whitespace tokens. Leading and trailing punctuation is trimmed
/// first; tokens that are not then purely alphabetic count zero.
pub fn syllable_count(text: &str) -> u32 {
    text.split_whitespace()
        .map(|tok| {
            let core = tok.trim_matches(|c: char| !c.is_alphanumeric());
            if !core.is_empty() && core.chars().all(char::is_alphabetic) {
                word_syllables(&core.to_lowercase())
            } else {
                0
            }
        })
        .sum()
}

pub fn tweet_features(raw_text: &str, resources: &Resources) -> TweetFeatures {
    let tokens: Vec<&str> = raw_text.split_whitespace().collect();
    TweetFeatures {
        url_count: raw_text.matches("HTTPURL").count() as u32,
        hash_count: raw_text.chars().filter(|&c| c == '#').count() as u32,
        user_count: raw_text.matches("@USER").count() as u32,
        emoji_count: resources.emoji.count(raw_text) as u32,
        word_count: tokens.len() as u32,
        syllable_count: syllable_count(raw_text),
        has_profanity: tokens
            .iter()
            .any(|t| resources.profanity.contains(&t.to_lowercase())) as u32,
    }
}
