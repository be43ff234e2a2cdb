//! Huffman coding of the vocabulary for hierarchical softmax.

use std::cmp::Reverse;
use std::collections::BinaryHeap;

/// One step down the tree: the inner node visited and the branch taken
/// (`false` = code bit 0, the branch whose probability is `σ(v'·h)`).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PathStep {
    pub node: usize,
    pub code: bool,
}

#[derive(Debug, Clone)]
pub struct HuffmanTree {
    paths: Vec<Vec<PathStep>>,
    inner_nodes: usize,
}

impl HuffmanTree {
    /// Builds the tree from word counts. Inner nodes are numbered in creation
    /// order, so the root is `counts.len() - 2`.
    pub fn build(counts: &[u64]) -> Self {
        let v = counts.len();
        if v <= 1 {
            return HuffmanTree {
                paths: vec![Vec::new(); v],
                inner_nodes: 0,
            };
        }
        // node ids: 0..v are leaves, v.. are inner nodes
        let mut parent = vec![0usize; 2 * v - 1];
        let mut bit = vec![false; 2 * v - 1];
        let mut heap: BinaryHeap<Reverse<(u64, usize)>> =
            counts.iter().enumerate().map(|(i, &c)| Reverse((c, i))).collect();
        let mut next = v;
        while heap.len() > 1 {
            let Reverse((c1, a)) = heap.pop().unwrap();
            let Reverse((c2, b)) = heap.pop().unwrap();
            parent[a] = next;
            parent[b] = next;
            bit[a] = false;
            bit[b] = true;
            heap.push(Reverse((c1 + c2, next)));
            next += 1;
        }
        let root = next - 1;
        let paths = (0..v)
            .map(|leaf| {
                let mut path = Vec::new();
                let mut cur = leaf;
                while cur != root {
                    path.push(PathStep {
                        node: parent[cur] - v,
                        code: bit[cur],
                    });
                    cur = parent[cur];
                }
                path.reverse();
                path
            })
            .collect();
        HuffmanTree {
            paths,
            inner_nodes: v - 1,
        }
    }

    pub fn path(&self, word: usize) -> &[PathStep] {
        &self.paths[word]
    }

    pub fn inner_nodes(&self) -> usize {
        self.inner_nodes
    }

    pub fn leaves(&self) -> usize {
        self.paths.len()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn inner_node_count_and_kraft_equality() {
        let counts = [50, 30, 10, 5, 3, 1, 1];
        let t = HuffmanTree::build(&counts);
        assert_eq!(t.inner_nodes(), counts.len() - 1);
        let kraft: f64 = (0..counts.len()).map(|w| 0.5f64.powi(t.path(w).len() as i32)).sum();
        assert!((kraft - 1.0).abs() < 1e-12);
    }

    #[test]
    fn frequent_words_get_shorter_codes() {
        let counts = [100, 10, 5, 1];
        let t = HuffmanTree::build(&counts);
        assert!(t.path(0).len() <= t.path(3).len());
        assert_eq!(t.path(0).len(), 1);
    }

    #[test]
    fn codes_are_prefix_free() {
        let counts = [9, 8, 7, 6, 5, 4, 3, 2, 1];
        let t = HuffmanTree::build(&counts);
        let codes: Vec<Vec<bool>> = (0..counts.len())
            .map(|w| t.path(w).iter().map(|s| s.code).collect())
            .collect();
        for (i, a) in codes.iter().enumerate() {
            for (j, b) in codes.iter().enumerate() {
                if i != j {
                    assert!(!b.starts_with(a), "{a:?} prefixes {b:?}");
                }
            }
        }
    }

    #[test]
    fn single_word_has_empty_path() {
        let t = HuffmanTree::build(&[4]);
        assert_eq!(t.inner_nodes(), 0);
        assert!(t.path(0).is_empty());
    }
}
