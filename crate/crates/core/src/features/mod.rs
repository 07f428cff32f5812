//! Word n-gram vectorizers and engineered tweet features.

mod tweet;
mod vectorize;

pub use tweet::{
    syllable_count, tweet_features, word_syllables, TweetFeatures, TWEET_FEATURE_NAMES,
};
pub use vectorize::{
    extract_ngrams, fit_counts, fit_tfidf, tokenize_for_ngrams, transform_counts, transform_tfidf,
    FeaturizerKind, FittedFeaturizer, NgramRange, TfidfModel, Vocabulary,
};
