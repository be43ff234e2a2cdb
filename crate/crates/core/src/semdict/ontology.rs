//! Offline ontology exports and the domain dictionaries compiled from them.

use std::collections::{BTreeMap, HashMap};
use std::path::Path;

use super::dictionary::{Entry, SemanticDictionary, Tag, MAX_VARIANT_TOKENS};
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OntologyTerm {
    pub id: String,
    pub label: String,
    pub parent: Option<String>,
    pub synonyms: Vec<String>,
}

/// A flat ontology fragment: one row per term with its single parent.
#[derive(Debug, Clone, Default)]
pub struct OntologyExport {
    terms: Vec<OntologyTerm>,
    index: HashMap<String, usize>,
}

impl OntologyExport {
    /// Checks that ids are unique, labels non-empty, parents known and the
    /// parent relation acyclic.
    pub fn new(terms: Vec<OntologyTerm>) -> Result<Self> {
        let mut index = HashMap::new();
        for (i, t) in terms.iter().enumerate() {
            if t.label.trim().is_empty() {
                return Err(Error::Validation(format!("term {} has an empty label", t.id)));
            }
            if index.insert(t.id.clone(), i).is_some() {
                return Err(Error::Validation(format!("duplicate term id {}", t.id)));
            }
        }
        for t in &terms {
            if let Some(p) = &t.parent {
                if !index.contains_key(p) {
                    return Err(Error::Validation(format!("term {} has unknown parent {p}", t.id)));
                }
            }
        }
        let export = OntologyExport { terms, index };
        export.check_acyclic()?;
        Ok(export)
    }

    fn check_acyclic(&self) -> Result<()> {
        // 0 = unvisited, 1 = on current path, 2 = done
        let mut state = vec![0u8; self.terms.len()];
        for start in 0..self.terms.len() {
            let mut path = Vec::new();
            let mut cur = Some(start);
            while let Some(i) = cur {
                match state[i] {
                    2 => break,
                    1 => {
                        return Err(Error::Validation(format!(
                            "cycle in parent relation through term {}",
                            self.terms[i].id
                        )))
                    }
                    _ => {}
                }
                state[i] = 1;
                path.push(i);
                cur = self.terms[i].parent.as_ref().map(|p| self.index[p]);
            }
            for i in path {
                state[i] = 2;
            }
        }
        Ok(())
    }

    /// Parses `term_id<TAB>label<TAB>parent_id<TAB>syn1|syn2|...` rows.
    pub fn parse(text: &str) -> Result<Self> {
        let mut terms = Vec::new();
        for (i, line) in text.lines().enumerate() {
            if line.trim().is_empty() || line.trim_start().starts_with('#') {
                continue;
            }
            let cols: Vec<&str> = line.split('\t').collect();
            if !(2..=4).contains(&cols.len()) {
                return Err(Error::Parse {
                    line: i + 1,
                    message: format!("expected 4 tab-separated columns, found {}", cols.len()),
                });
            }
            let parent = cols.get(2).map(|s| s.trim()).filter(|s| !s.is_empty());
            let synonyms = cols
                .get(3)
                .map(|s| {
                    s.split('|')
                        .map(str::trim)
                        .filter(|s| !s.is_empty())
                        .map(String::from)
                        .collect()
                })
                .unwrap_or_default();
            terms.push(OntologyTerm {
                id: cols[0].trim().to_string(),
                label: cols[1].trim().to_string(),
                parent: parent.map(String::from),
                synonyms,
            });
        }
        Self::new(terms)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse(&text)
    }

    pub fn terms(&self) -> &[OntologyTerm] {
        &self.terms
    }

    pub fn get(&self, id: &str) -> Option<&OntologyTerm> {
        self.index.get(id).map(|&i| &self.terms[i])
    }

    /// The term itself plus every transitive subclass, in breadth-first order.
    pub fn descendants(&self, id: &str) -> Vec<&OntologyTerm> {
        let mut children: BTreeMap<&str, Vec<usize>> = BTreeMap::new();
        for (i, t) in self.terms.iter().enumerate() {
            if let Some(p) = &t.parent {
                children.entry(p.as_str()).or_default().push(i);
            }
        }
        let Some(&root) = self.index.get(id) else {
            return Vec::new();
        };
        let mut out = vec![root];
        let mut head = 0;
        while head < out.len() {
            let cur = &self.terms[out[head]].id;
            if let Some(kids) = children.get(cur.as_str()) {
                out.extend(kids);
            }
            head += 1;
        }
        out.into_iter().map(|i| &self.terms[i]).collect()
    }
}

pub const BUILTIN_HEMORRHAGE_ONTOLOGY: &str = include_str!("../../data/ontology_hemorrhage.tsv");

/// Canonical token for a root: its label, lowercased, words joined by `_`.
pub fn canonical_token(label: &str) -> String {
    label
        .split_whitespace()
        .map(str::to_lowercase)
        .collect::<Vec<_>>()
        .join("_")
}

/// Maps every label and synonym under each root to the root's canonical token.
///
/// Phrases longer than the scanner's n-gram limit, phrases that contain a
/// canonical token, and the root's own single-token label are skipped, so the
/// result never rewrites its own output.
pub fn compile_domain_dictionary<S: AsRef<str>>(export: &OntologyExport, roots: &[S]) -> Result<SemanticDictionary> {
    let mut canonical_parts = std::collections::HashSet::new();
    let mut root_terms = Vec::new();
    for r in roots {
        let term = export
            .get(r.as_ref())
            .ok_or_else(|| Error::Dictionary(format!("unknown root term id {}", r.as_ref())))?;
        let canonical = canonical_token(&term.label);
        canonical_parts.extend(canonical.split('_').map(String::from));
        canonical_parts.insert(canonical.clone());
        root_terms.push((term, canonical));
    }

    let mut entries = Vec::new();
    let mut seen: HashMap<Vec<String>, String> = HashMap::new();
    for (root, canonical) in &root_terms {
        for term in export.descendants(&root.id) {
            for phrase in std::iter::once(&term.label).chain(&term.synonyms) {
                let variant: Vec<String> = phrase.split_whitespace().map(str::to_lowercase).collect();
                if variant.is_empty()
                    || variant.len() > MAX_VARIANT_TOKENS
                    || variant.iter().any(|t| canonical_parts.contains(t))
                {
                    log::debug!("skipping domain variant {phrase:?}");
                    continue;
                }
                if let Some(prev) = seen.get(&variant) {
                    if prev != canonical {
                        return Err(Error::Dictionary(format!(
                            "variant {phrase:?} falls under both {prev:?} and {canonical:?}"
                        )));
                    }
                    continue;
                }
                seen.insert(variant.clone(), canonical.clone());
                entries.push(Entry {
                    variant,
                    canonical: canonical.clone(),
                    tag: Tag::Domain,
                });
            }
        }
    }
    SemanticDictionary::from_entries("domain", entries)
}
