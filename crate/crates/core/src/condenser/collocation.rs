use std::collections::{BTreeMap, HashMap};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

/// Corpus-wide token counts. Per-report counts are merged by addition, so
/// the result does not depend on how reports are split across threads.
pub fn term_counts<S: AsRef<str> + Sync>(corpus: &[Vec<S>]) -> HashMap<String, usize> {
    corpus
        .par_iter()
        .fold(HashMap::new, |mut acc: HashMap<String, usize>, doc| {
            for t in doc {
                *acc.entry(t.as_ref().to_string()).or_default() += 1;
            }
            acc
        })
        .reduce(HashMap::new, merge_counts)
}

fn merge_counts<K: std::hash::Hash + Eq>(mut a: HashMap<K, usize>, b: HashMap<K, usize>) -> HashMap<K, usize> {
    if a.len() < b.len() {
        return merge_counts(b, a);
    }
    for (k, v) in b {
        *a.entry(k).or_default() += v;
    }
    a
}

/// Removes every token whose corpus-wide count is below `min_freq`.
/// All counting happens before any removal.
pub fn prune_rare_terms(corpus: Vec<Vec<String>>, min_freq: usize) -> Vec<Vec<String>> {
    if min_freq <= 1 {
        return corpus;
    }
    let counts = term_counts(&corpus);
    corpus
        .into_par_iter()
        .map(|doc| {
            doc.into_iter()
                .filter(|t| counts.get(t).is_some_and(|&c| c >= min_freq))
                .collect()
        })
        .collect()
}

/// Adjacent token pairs frequent enough to be fused into one token.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(into = "TableFile", from = "TableFile")]
pub struct CollocationTable {
    /// Threshold the table was mined with; every stored count exceeds it.
    pub min_count: usize,
    pairs: BTreeMap<(String, String), usize>,
}

impl CollocationTable {
    pub fn new(min_count: usize) -> Self {
        CollocationTable {
            min_count,
            pairs: BTreeMap::new(),
        }
    }

    /// Adds a pair by hand. Pairs at or below the threshold are ignored.
    pub fn insert(&mut self, first: &str, second: &str, count: usize) -> bool {
        if count <= self.min_count {
            return false;
        }
        self.pairs.insert((first.to_string(), second.to_string()), count);
        true
    }

    pub fn contains(&self, first: &str, second: &str) -> bool {
        self.count(first, second).is_some()
    }

    pub fn count(&self, first: &str, second: &str) -> Option<usize> {
        self.pairs.get(&(first.to_string(), second.to_string())).copied()
    }

    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, &str, usize)> {
        self.pairs.iter().map(|((a, b), c)| (a.as_str(), b.as_str(), *c))
    }

    fn lookup(&self) -> HashMap<(&str, &str), ()> {
        self.pairs.keys().map(|(a, b)| ((a.as_str(), b.as_str()), ())).collect()
    }
}

#[derive(Serialize, Deserialize)]
struct TableFile {
    min_count: usize,
    pairs: Vec<(String, String, usize)>,
}

impl From<CollocationTable> for TableFile {
    fn from(t: CollocationTable) -> Self {
        TableFile {
            min_count: t.min_count,
            pairs: t.pairs.into_iter().map(|((a, b), c)| (a, b, c)).collect(),
        }
    }
}

impl From<TableFile> for CollocationTable {
    fn from(f: TableFile) -> Self {
        let mut t = CollocationTable::new(f.min_count);
        for (a, b, c) in f.pairs {
            t.insert(&a, &b, c);
        }
        t
    }
}

/// Collects every adjacent ordered pair seen strictly more than `min_count`
/// times. Pairs never span two reports.
pub fn mine_collocations<S: AsRef<str> + Sync>(corpus: &[Vec<S>], min_count: usize) -> CollocationTable {
    let counts = corpus
        .par_iter()
        .fold(HashMap::new, |mut acc: HashMap<(&str, &str), usize>, doc| {
            for w in doc.windows(2) {
                *acc.entry((w[0].as_ref(), w[1].as_ref())).or_default() += 1;
            }
            acc
        })
        .reduce(HashMap::new, merge_counts);
    let mut table = CollocationTable::new(min_count);
    for ((a, b), c) in counts {
        table.insert(a, b, c);
    }
    table
}

/// Single left-to-right pass fusing table pairs as `first_second`; a fused
/// pair consumes both tokens, so matches never overlap.
pub fn apply_collocations<S: AsRef<str>>(tokens: &[S], table: &CollocationTable) -> Vec<String> {
    apply_with(tokens, &table.lookup())
}

fn apply_with<S: AsRef<str>>(tokens: &[S], lookup: &HashMap<(&str, &str), ()>) -> Vec<String> {
    let mut out = Vec::with_capacity(tokens.len());
    let mut i = 0;
    while i < tokens.len() {
        let a = tokens[i].as_ref();
        if let Some(b) = tokens.get(i + 1).map(|t| t.as_ref()) {
            if lookup.contains_key(&(a, b)) {
                out.push(format!("{a}_{b}"));
                i += 2;
                continue;
            }
        }
        out.push(a.to_string());
        i += 1;
    }
    out
}

/// Applies the table to every report in parallel.
pub fn apply_collocations_corpus(corpus: Vec<Vec<String>>, table: &CollocationTable) -> Vec<Vec<String>> {
    if table.is_empty() {
        return corpus;
    }
    let lookup = table.lookup();
    corpus.into_par_iter().map(|doc| apply_with(&doc, &lookup)).collect()
}
