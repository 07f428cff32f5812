//! Tweet informativeness classification.
//!
//! The crate covers the whole experiment path: loading shared-task TSV
//! files ([`corpus`]), Twitter-aware cleaning ([`preprocess`]), n-gram and
//! engineered features ([`features`]), six classifiers plus a stratified
//! dummy baseline ([`models`]), embedding fusion ([`fusion`]) and the
//! cross-validation harness with its reports ([`eval`]). The `tweetclf`
//! binary in [`cli`] binds them into reproducible commands.

pub mod cli;
pub mod corpus;
pub mod error;
pub mod eval;
pub mod features;
pub mod fusion;
pub mod json;
pub mod models;
pub mod preprocess;
pub mod resources;
pub mod sparse;

pub use corpus::{Dataset, Label, LabeledTweet, Tweet};
pub use error::{Error, Result};
