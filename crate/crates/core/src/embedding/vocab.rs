use std::collections::HashMap;

use crate::{Error, Result};

/// Word index with corpus counts. Indices are dense and ordered by
/// descending count, ties broken by first occurrence.
#[derive(Debug, Clone, PartialEq)]
pub struct Vocabulary {
    words: Vec<String>,
    counts: Vec<u64>,
    index: HashMap<String, usize>,
    min_count: u64,
}

impl Vocabulary {
    /// Builds a vocabulary from words and counts already in index order.
    pub fn from_parts(words: Vec<String>, counts: Vec<u64>, min_count: u64) -> Result<Self> {
        if words.len() != counts.len() {
            return Err(Error::Validation("words and counts differ in length".into()));
        }
        let mut index = HashMap::with_capacity(words.len());
        for (i, w) in words.iter().enumerate() {
            if w.is_empty() || w.chars().any(char::is_whitespace) {
                return Err(Error::Validation(format!("invalid vocabulary word {w:?}")));
            }
            if index.insert(w.clone(), i).is_some() {
                return Err(Error::Validation(format!("duplicate vocabulary word {w:?}")));
            }
        }
        Ok(Vocabulary {
            words,
            counts,
            index,
            min_count,
        })
    }

    pub fn len(&self) -> usize {
        self.words.len()
    }

    pub fn is_empty(&self) -> bool {
        self.words.is_empty()
    }

    pub fn index_of(&self, word: &str) -> Option<usize> {
        self.index.get(word).copied()
    }

    pub fn word(&self, idx: usize) -> &str {
        &self.words[idx]
    }

    pub fn words(&self) -> &[String] {
        &self.words
    }

    pub fn count(&self, idx: usize) -> u64 {
        self.counts[idx]
    }

    pub fn counts(&self) -> &[u64] {
        &self.counts
    }

    pub fn min_count(&self) -> u64 {
        self.min_count
    }

    pub fn total_count(&self) -> u64 {
        self.counts.iter().sum()
    }

    /// Index sequence of a report with out-of-vocabulary tokens dropped.
    pub fn encode<S: AsRef<str>>(&self, tokens: &[S]) -> Vec<usize> {
        tokens.iter().filter_map(|t| self.index_of(t.as_ref())).collect()
    }
}

/// Keeps words seen at least `min_count` times.
pub fn build_vocabulary<S: AsRef<str>>(corpus: &[Vec<S>], min_count: u64) -> Result<Vocabulary> {
    if min_count < 1 {
        return Err(Error::Config("min_count must be >= 1".into()));
    }
    let mut first_seen: HashMap<&str, (u64, usize)> = HashMap::new();
    let mut order = 0usize;
    for doc in corpus {
        for t in doc {
            let e = first_seen.entry(t.as_ref()).or_insert_with(|| {
                order += 1;
                (0, order)
            });
            e.0 += 1;
        }
    }
    let mut kept: Vec<(&str, u64, usize)> = first_seen
        .into_iter()
        .filter(|(_, (c, _))| *c >= min_count)
        .map(|(w, (c, o))| (w, c, o))
        .collect();
    if kept.is_empty() {
        return Err(Error::Validation(format!("no word occurs at least {min_count} times")));
    }
    kept.sort_by(|a, b| b.1.cmp(&a.1).then(a.2.cmp(&b.2)));
    Vocabulary::from_parts(
        kept.iter().map(|k| k.0.to_string()).collect(),
        kept.iter().map(|k| k.1).collect(),
        min_count,
    )
}
