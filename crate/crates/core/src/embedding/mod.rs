//! Word embeddings: vocabulary, CBOW and skip-gram training with negative
//! sampling or hierarchical softmax, similarity queries and document vectors.

mod config;
mod docvec;
mod huffman;
mod model;
mod sampler;
mod similarity;
mod train;
mod vocab;

pub use config::{Architecture, Objective, TrainConfig};
pub use docvec::{
    embed_corpus, embed_document, embed_report, load_document_vectors, save_document_vectors, DocumentVector,
};
pub use huffman::{HuffmanTree, PathStep};
pub use model::{load_model, parse_header, save_model, EmbeddingModel, Matrix, BINARY_MAGIC};
pub use sampler::{AliasSampler, UNIGRAM_POWER};
pub use similarity::{cosine, most_similar, word_similarity};
pub use train::{
    example_gradient, example_loss, hierarchical_probability, random_model, sigmoid, softplus, train,
    train_with_report, Example, ExampleGradient, TrainReport,
};
pub use vocab::{build_vocabulary, Vocabulary};
