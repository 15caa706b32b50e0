//! Grouping words by the statistics of their contexts.
//!
//! Each target word is represented by the probability that a position in a
//! moving window around it holds a given context word. Those vectors are
//! compared with Euclidean distance or Spearman rank correlation and grouped
//! by agglomerative clustering. A competitive network clusters individual
//! occurrences (word plus context) online, so one word can land in several
//! clusters. An artificial noun/verb corpus provides ground truth.
//!
//! ```
//! use wordgroup::{cooccur, corpus, hcluster, metrics};
//!
//! let tokens = corpus::tokenize("the cat saw the dog . the dog saw the cat");
//! let vocab = corpus::build_vocabulary(&tokens);
//! let words = corpus::select_top(&vocab, 4).unwrap();
//! let table = cooccur::count(&tokens, &words, &words, cooccur::WindowConfig::default());
//! let vectors = cooccur::to_vectors(&table);
//! let d = metrics::pairwise(&vectors, metrics::Metric::Euclidean).unwrap();
//! let tree = hcluster::agglomerate(&d, hcluster::Linkage::Average).unwrap();
//! assert_eq!(tree.merges().len(), 3);
//! ```

pub mod cli;
pub mod compnet;
pub mod cooccur;
pub mod corpus;
pub mod elman;
mod error;
pub mod evaluate;
pub mod hcluster;
pub mod metrics;
pub mod numfmt;

pub use error::{Error, Result};
