use std::collections::{BTreeSet, HashMap};

/// Term index for bag-of-words features, fixed from the training split.
#[derive(Debug, Clone, PartialEq)]
pub struct UnigramVocabulary {
    words: Vec<String>,
    index: HashMap<String, usize>,
}

impl UnigramVocabulary {
    /// Every distinct token of the given documents, in sorted order.
    pub fn build<S: AsRef<str>>(docs: &[Vec<S>]) -> Self {
        let set: BTreeSet<&str> = docs.iter().flatten().map(|t| t.as_ref()).collect();
        Self::from_words(set.into_iter().map(String::from).collect())
    }

    pub fn from_words(words: Vec<String>) -> Self {
        let index = words.iter().enumerate().map(|(i, w)| (w.clone(), i)).collect();
        UnigramVocabulary { words, index }
    }

    pub fn len(&self) -> usize {
        self.words.len()
    }

    pub fn is_empty(&self) -> bool {
        self.words.is_empty()
    }

    pub fn words(&self) -> &[String] {
        &self.words
    }

    pub fn index_of(&self, w: &str) -> Option<usize> {
        self.index.get(w).copied()
    }
}

/// Sparse `(column, count)` pairs in column order; unknown tokens are ignored.
pub fn unigram_counts<S: AsRef<str>>(tokens: &[S], vocab: &UnigramVocabulary) -> Vec<(usize, u32)> {
    let mut counts: HashMap<usize, u32> = HashMap::new();
    for t in tokens {
        if let Some(i) = vocab.index_of(t.as_ref()) {
            *counts.entry(i).or_default() += 1;
        }
    }
    let mut out: Vec<(usize, u32)> = counts.into_iter().collect();
    out.sort_unstable();
    out
}

/// Dense count vectors, one per document.
pub fn unigram_features<S: AsRef<str>>(docs: &[Vec<S>], vocab: &UnigramVocabulary) -> Vec<Vec<f64>> {
    docs.iter()
        .map(|d| {
            let mut row = vec![0.0; vocab.len()];
            for (i, c) in unigram_counts(d, vocab) {
                row[i] = c as f64;
            }
            row
        })
        .collect()
}

/// Smoothed inverse document frequency `ln((1 + n) / (1 + df)) + 1` from
/// count rows (normally the training split).
pub fn idf_weights(rows: &[Vec<f64>]) -> Vec<f64> {
    let d = rows.first().map_or(0, Vec::len);
    let n = rows.len() as f64;
    (0..d)
        .map(|j| {
            let df = rows.iter().filter(|r| r[j] > 0.0).count() as f64;
            ((1.0 + n) / (1.0 + df)).ln() + 1.0
        })
        .collect()
}

/// Scales counts by `idf` and L2-normalizes each row in place.
pub fn apply_tfidf(rows: &mut [Vec<f64>], idf: &[f64]) {
    for r in rows {
        for (x, w) in r.iter_mut().zip(idf) {
            *x *= w;
        }
        let norm = r.iter().map(|x| x * x).sum::<f64>().sqrt();
        if norm > 0.0 {
            for x in r.iter_mut() {
                *x /= norm;
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn direct_count() {
        let vocab = UnigramVocabulary::from_words(vec!["a".into(), "b".into(), "c".into()]);
        assert_eq!(unigram_features(&[vec!["a", "a", "b"]], &vocab), [vec![2.0, 1.0, 0.0]]);
    }

    #[test]
    fn test_only_words_are_ignored() {
        let vocab = UnigramVocabulary::build(&[vec!["x", "y"]]);
        assert_eq!(unigram_counts(&["y", "zzz", "y"], &vocab), [(1, 2)]);
    }

    #[test]
    fn tfidf_rows_are_unit_length() {
        let mut rows = vec![vec![1.0, 0.0, 2.0], vec![0.0, 3.0, 1.0]];
        let idf = idf_weights(&rows);
        assert!((idf[2] - 1.0).abs() < 1e-12);
        apply_tfidf(&mut rows, &idf);
        for r in &rows {
            assert!((r.iter().map(|x| x * x).sum::<f64>() - 1.0).abs() < 1e-12);
        }
    }
}
