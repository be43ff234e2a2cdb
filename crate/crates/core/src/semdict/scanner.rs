//! Token-level trie scanner: leftmost, longest-match-first rewriting.

use std::collections::HashMap;

#[derive(Debug, Clone, Default)]
struct Node {
    children: HashMap<u32, u32>,
    output: Option<u32>,
}

#[derive(Debug, Clone)]
pub(crate) struct Scanner {
    symbols: HashMap<String, u32>,
    nodes: Vec<Node>,
    canonicals: Vec<String>,
    max_depth: usize,
}

impl Scanner {
    pub(crate) fn build<'a>(entries: impl Iterator<Item = (&'a [String], &'a str)>) -> Self {
        let mut symbols: HashMap<String, u32> = HashMap::new();
        let mut nodes = vec![Node::default()];
        let mut canonicals: Vec<String> = Vec::new();
        let mut canonical_ids: HashMap<String, u32> = HashMap::new();
        let mut max_depth = 0;
        for (variant, canonical) in entries {
            max_depth = max_depth.max(variant.len());
            let mut node = 0usize;
            for tok in variant {
                let next_sym = symbols.len() as u32;
                let sym = *symbols.entry(tok.clone()).or_insert(next_sym);
                node = match nodes[node].children.get(&sym) {
                    Some(&child) => child as usize,
                    None => {
                        let child = nodes.len();
                        nodes.push(Node::default());
                        nodes[node].children.insert(sym, child as u32);
                        child
                    }
                };
            }
            let next_id = canonicals.len() as u32;
            let cid = *canonical_ids.entry(canonical.to_string()).or_insert_with(|| {
                canonicals.push(canonical.to_string());
                next_id
            });
            nodes[node].output = Some(cid);
        }
        Scanner {
            symbols,
            nodes,
            canonicals,
            max_depth,
        }
    }

    /// Longest variant starting at `start`: (tokens consumed, canonical).
    fn longest_at(&self, syms: &[Option<u32>], start: usize) -> Option<(usize, &str)> {
        let mut node = 0usize;
        let mut best = None;
        for (depth, sym) in syms[start..].iter().take(self.max_depth).enumerate() {
            let Some(sym) = sym else { break };
            match self.nodes[node].children.get(sym) {
                Some(&child) => node = child as usize,
                None => break,
            }
            if let Some(c) = self.nodes[node].output {
                best = Some((depth + 1, self.canonicals[c as usize].as_str()));
            }
        }
        best
    }

    /// Rewrites a plain token sequence (no compound handling).
    fn rewrite_plain<S: AsRef<str>>(&self, tokens: &[S], out: &mut Vec<String>) {
        let syms: Vec<Option<u32>> = tokens.iter().map(|t| self.symbols.get(t.as_ref()).copied()).collect();
        let mut i = 0;
        while i < tokens.len() {
            if syms[i].is_some() {
                if let Some((len, canonical)) = self.longest_at(&syms, i) {
                    out.push(canonical.to_string());
                    i += len;
                    continue;
                }
            }
            out.push(tokens[i].as_ref().to_string());
            i += 1;
        }
    }

    /// Rewrites a token sequence. Underscore compounds (negation scopes,
    /// collocations) are split into parts, rewritten, and re-joined, so
    /// `no_hematoma` can become `NEGEX_hemorrhage` across two dictionaries.
    pub(crate) fn rewrite<S: AsRef<str>>(&self, tokens: &[S]) -> Vec<String> {
        if self.nodes.len() == 1 {
            return tokens.iter().map(|t| t.as_ref().to_string()).collect();
        }
        let mut out = Vec::with_capacity(tokens.len());
        let mut run_start = 0;
        let mut parts_buf = Vec::new();
        for (i, t) in tokens.iter().enumerate() {
            let t = t.as_ref();
            if t.contains('_') {
                self.rewrite_plain(&tokens[run_start..i], &mut out);
                run_start = i + 1;
                let parts: Vec<&str> = t.split('_').filter(|p| !p.is_empty()).collect();
                parts_buf.clear();
                self.rewrite_plain(&parts, &mut parts_buf);
                out.push(parts_buf.join("_"));
            }
        }
        self.rewrite_plain(&tokens[run_start..], &mut out);
        out
    }
}
