use super::model::EmbeddingModel;
use crate::{Error, Result};

pub fn cosine(a: &[f64], b: &[f64]) -> Result<f64> {
    if a.len() != b.len() {
        return Err(Error::Validation(format!(
            "vector lengths differ ({} vs {})",
            a.len(),
            b.len()
        )));
    }
    let na = norm(a);
    let nb = norm(b);
    if na == 0.0 || nb == 0.0 {
        return Err(Error::ZeroVector);
    }
    let dot: f64 = a.iter().zip(b).map(|(x, y)| x * y).sum();
    Ok((dot / (na * nb)).clamp(-1.0, 1.0))
}

fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

/// Cosine similarity of two vocabulary words.
pub fn word_similarity(model: &EmbeddingModel, a: &str, b: &str) -> Result<f64> {
    let va = model.vector(a).ok_or_else(|| Error::NotInVocabulary(a.to_string()))?;
    let vb = model.vector(b).ok_or_else(|| Error::NotInVocabulary(b.to_string()))?;
    cosine(va, vb)
}

/// The `k` words closest to `word` by cosine over input vectors, best first;
/// equal scores keep vocabulary order. Zero vectors are skipped.
pub fn most_similar(model: &EmbeddingModel, word: &str, k: usize) -> Result<Vec<(String, f64)>> {
    if k == 0 {
        return Err(Error::Validation("k must be >= 1".into()));
    }
    let q = model
        .vocab
        .index_of(word)
        .ok_or_else(|| Error::NotInVocabulary(word.to_string()))?;
    let qv = model.input.row(q);
    if norm(qv) == 0.0 {
        return Err(Error::ZeroVector);
    }
    let mut scored: Vec<(usize, f64)> = (0..model.len())
        .filter(|&i| i != q)
        .filter_map(|i| cosine(qv, model.input.row(i)).ok().map(|s| (i, s)))
        .collect();
    scored.sort_by(|a, b| b.1.total_cmp(&a.1).then(a.0.cmp(&b.0)));
    scored.truncate(k);
    Ok(scored
        .into_iter()
        .map(|(i, s)| (model.vocab.word(i).to_string(), s))
        .collect())
}
