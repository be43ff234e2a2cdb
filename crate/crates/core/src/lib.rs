//! Dense vector representations of free-text radiology reports.
//!
//! The crate covers the whole path from raw report text to a classified
//! document vector:
//!
//! * [`corpus`]: report records, line-delimited JSON storage and size statistics.
//! * [`condenser`]: section extraction, cleaning, negation encoding, rare-term
//!   pruning and collocation merging.
//! * [`semdict`]: common-term and ontology-derived dictionaries applied by a
//!   token-trie scanner.
//! * [`embedding`]: vocabulary, CBOW / skip-gram training with negative sampling
//!   or hierarchical softmax, similarity queries and document averaging.
//! * [`tsne`]: exact t-SNE for 2-D projections.
//! * [`classify`]: label regrouping, splitting, KNN, random forests, unigram
//!   baseline, weighted metrics and grid search.
//! * [`syncorpus`]: a synthetic labeled report generator with recorded ground truth.
//! * [`pipeline`]: glue that runs the stages in their fixed order.

pub mod classify;
pub mod condenser;
pub mod corpus;
pub mod embedding;
mod error;
pub mod pipeline;
pub mod semdict;
pub mod syncorpus;
pub mod tsne;

pub use error::{Error, Result};
