use std::collections::{BTreeMap, HashSet};
use std::fmt;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::scanner::Scanner;
use crate::{Error, Result};

/// Longest variant, in tokens, the scanner matches.
pub const MAX_VARIANT_TOKENS: usize = 4;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum Tag {
    Family,
    Negex,
    Risk,
    Qual,
    Progress,
    Domain,
}

impl fmt::Display for Tag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Tag::Family => "FAMILY",
            Tag::Negex => "NEGEX",
            Tag::Risk => "RISK",
            Tag::Qual => "QUAL",
            Tag::Progress => "PROGRESS",
            Tag::Domain => "DOMAIN",
        };
        f.write_str(s)
    }
}

impl FromStr for Tag {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s.trim().to_uppercase().as_str() {
            "FAMILY" => Tag::Family,
            "NEGEX" => Tag::Negex,
            "RISK" => Tag::Risk,
            "QUAL" => Tag::Qual,
            "PROGRESS" => Tag::Progress,
            "DOMAIN" => Tag::Domain,
            other => return Err(Error::Dictionary(format!("unknown tag {other:?}"))),
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Entry {
    pub variant: Vec<String>,
    pub canonical: String,
    pub tag: Tag,
}

impl Entry {
    pub fn new(variant: &str, canonical: &str, tag: Tag) -> Self {
        Entry {
            variant: variant.split_whitespace().map(str::to_lowercase).collect(),
            canonical: canonical.to_string(),
            tag,
        }
    }
}

/// An immutable variant-to-canonical rewrite table with its compiled scanner.
#[derive(Debug, Clone)]
pub struct SemanticDictionary {
    name: String,
    base: Vec<Entry>,
    entries: BTreeMap<Vec<String>, (String, Tag)>,
    scanner: Scanner,
}

/// Plural, -ing and -ed forms of a word.
pub fn inflections(word: &str) -> Vec<String> {
    if word.chars().count() < 3 || !word.chars().all(|c| c.is_alphabetic()) {
        return Vec::new();
    }
    let vowel = |c: char| "aeiou".contains(c);
    let mut chars = word.chars().rev();
    let last = chars.next().unwrap();
    let before_last = chars.next().unwrap();
    let stem = &word[..word.len() - last.len_utf8()];

    let plural = if last == 'y' && !vowel(before_last) {
        format!("{stem}ies")
    } else if word.ends_with('s')
        || word.ends_with('x')
        || word.ends_with('z')
        || word.ends_with("ch")
        || word.ends_with("sh")
    {
        format!("{word}es")
    } else {
        format!("{word}s")
    };
    let ing = if last == 'e' && before_last != 'e' {
        format!("{stem}ing")
    } else {
        format!("{word}ing")
    };
    let ed = if last == 'e' {
        format!("{word}d")
    } else if last == 'y' && !vowel(before_last) {
        format!("{stem}ied")
    } else {
        format!("{word}ed")
    };
    vec![plural, ing, ed]
}

impl SemanticDictionary {
    /// Validates the explicit entries and adds their inflected forms.
    ///
    /// Explicit entries must be lowercase, at most [`MAX_VARIANT_TOKENS`] long,
    /// must not contain any canonical token, and must agree with each other.
    /// Inflected forms that would break one of those rules are dropped.
    pub fn from_entries(name: impl Into<String>, base: Vec<Entry>) -> Result<Self> {
        let mut canonical_parts: HashSet<String> = HashSet::new();
        for e in &base {
            if e.canonical.is_empty() || e.canonical.chars().any(char::is_whitespace) {
                return Err(Error::Dictionary(format!(
                    "canonical {:?} must be a single non-empty token",
                    e.canonical
                )));
            }
            canonical_parts.insert(e.canonical.clone());
            canonical_parts.extend(e.canonical.split('_').map(String::from));
        }

        let mut entries: BTreeMap<Vec<String>, (String, Tag)> = BTreeMap::new();
        for e in &base {
            let shown = e.variant.join(" ");
            if e.variant.is_empty() || e.variant.len() > MAX_VARIANT_TOKENS {
                return Err(Error::Dictionary(format!(
                    "variant {shown:?} must have 1..={MAX_VARIANT_TOKENS} tokens"
                )));
            }
            if e.variant
                .iter()
                .any(|t| t.chars().any(char::is_uppercase) || t.contains('_'))
            {
                return Err(Error::Dictionary(format!("variant {shown:?} must be lowercase words")));
            }
            if let Some(t) = e.variant.iter().find(|t| canonical_parts.contains(*t)) {
                return Err(Error::Dictionary(format!(
                    "variant {shown:?} contains canonical token {t:?}"
                )));
            }
            match entries.get(&e.variant) {
                Some((c, _)) if c != &e.canonical => {
                    return Err(Error::Dictionary(format!(
                        "variant {shown:?} maps to both {c:?} and {:?}",
                        e.canonical
                    )))
                }
                Some(_) => {}
                None => {
                    entries.insert(e.variant.clone(), (e.canonical.clone(), e.tag));
                }
            }
        }

        for e in &base {
            let (head, last) = e.variant.split_at(e.variant.len() - 1);
            for form in inflections(&last[0]) {
                if canonical_parts.contains(&form) {
                    continue;
                }
                let mut v = head.to_vec();
                v.push(form);
                entries.entry(v).or_insert_with(|| (e.canonical.clone(), e.tag));
            }
        }

        let scanner = Scanner::build(entries.iter().map(|(v, (c, _))| (v.as_slice(), c.as_str())));
        Ok(SemanticDictionary {
            name: name.into(),
            base,
            entries,
            scanner,
        })
    }

    pub fn empty(name: impl Into<String>) -> Self {
        Self::from_entries(name, Vec::new()).expect("empty dictionary is valid")
    }

    /// Parses `variant<TAB>canonical<TAB>tag` rows; `#` starts a comment line.
    pub fn parse_tsv(text: &str) -> Result<Vec<Entry>> {
        let mut out = Vec::new();
        for (i, line) in text.lines().enumerate() {
            if line.trim().is_empty() || line.trim_start().starts_with('#') {
                continue;
            }
            let cols: Vec<&str> = line.split('\t').collect();
            if cols.len() != 3 {
                return Err(Error::Parse {
                    line: i + 1,
                    message: format!("expected 3 tab-separated columns, found {}", cols.len()),
                });
            }
            let tag: Tag = cols[2].parse().map_err(|e: Error| Error::Parse {
                line: i + 1,
                message: e.to_string(),
            })?;
            out.push(Entry::new(cols[0], cols[1].trim(), tag));
        }
        Ok(out)
    }

    pub fn from_tsv(name: impl Into<String>, text: &str) -> Result<Self> {
        Self::from_entries(name, Self::parse_tsv(text)?)
    }

    /// Explicit entries in TSV form (inflections are regenerated on load).
    pub fn to_tsv(&self) -> String {
        let mut s = String::new();
        for e in &self.base {
            s.push_str(&format!("{}\t{}\t{}\n", e.variant.join(" "), e.canonical, e.tag));
        }
        s
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let header = format!("# {}: variant<TAB>canonical<TAB>tag\n", self.name);
        std::fs::write(path, header + &self.to_tsv()).map_err(|e| Error::io(path, e))
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    /// Number of variants including inflected forms.
    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn base_entries(&self) -> &[Entry] {
        &self.base
    }

    /// All variants, including inflected forms, in sorted order.
    pub fn entries(&self) -> impl Iterator<Item = (&[String], &str, Tag)> {
        self.entries.iter().map(|(v, (c, t))| (v.as_slice(), c.as_str(), *t))
    }

    pub fn lookup<S: AsRef<str>>(&self, variant: &[S]) -> Option<(&str, Tag)> {
        let key: Vec<String> = variant.iter().map(|s| s.as_ref().to_string()).collect();
        self.entries.get(&key).map(|(c, t)| (c.as_str(), *t))
    }

    pub(crate) fn scanner(&self) -> &Scanner {
        &self.scanner
    }
}

/// Loads the common-term dictionary (family, progress, risk, negation, qualifiers).
pub fn load_common_dictionary(path: impl AsRef<Path>) -> Result<SemanticDictionary> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    SemanticDictionary::from_tsv("common", &text)
}

pub const BUILTIN_COMMON_DICTIONARY: &str = include_str!("../../data/common_dictionary.tsv");

/// The bundled seed common-term dictionary.
pub fn builtin_common_dictionary() -> SemanticDictionary {
    SemanticDictionary::from_tsv("common", BUILTIN_COMMON_DICTIONARY).expect("builtin dictionary is valid")
}
