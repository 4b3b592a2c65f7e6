//! Hierarchical word classes ("structured tags") induced by greedy top-down
//! binary splitting that maximizes average class mutual information over a
//! class bigram matrix.
//!
//! The pipeline is:
//!
//! 1. [`corpus`]: tokenize text, keep the top-K frequent words and fold
//!    everything rarer into morphological pseudo-words.
//! 2. [`bigram`]: count word bigrams and derive the dense class bigram matrix
//!    plus per-word class context vectors.
//! 3. [`objective`]: evaluate the mutual information of the matrix and the
//!    exact change caused by moving one word between two classes.
//! 4. [`splitter`]: split every class in two, level after level, using one of
//!    three strategies (random start, empty-sibling start, and empty-sibling
//!    start with one move per parent class per iteration).
//! 5. [`elman`]: a synthetic toy grammar and a gold-standard scorer for the
//!    resulting tag trees.

pub mod bigram;
pub mod corpus;
pub mod elman;
mod error;
pub mod objective;
pub mod splitter;

pub use error::{Error, Result};

/// Dense index of a vocabulary entry.
pub type WordId = u32;

/// Class index at one level: the integer value of the bit-path so far.
pub type ClassId = u32;

/// Maximum number of splitting levels; bounds the class matrix at 1024x1024.
pub const MAX_LEVELS: u8 = 10;
