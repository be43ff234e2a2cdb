use std::collections::HashSet;

use regex::{Regex, RegexBuilder};

use super::negation::{CueMatcher, BOUNDARY, COMMA};
use super::CondenserConfig;
use crate::{Error, Result};

/// Phrases and patterns stripped from text before tokenization.
#[derive(Debug, Clone)]
pub struct Boilerplate {
    phrases: Vec<Regex>,
    patterns: Vec<Regex>,
}

pub const BUILTIN_BOILERPLATE: &str = include_str!("../../data/boilerplate.txt");

fn ci(pattern: &str) -> std::result::Result<Regex, regex::Error> {
    RegexBuilder::new(pattern).case_insensitive(true).build()
}

impl Boilerplate {
    /// Parses the boilerplate file format: literal phrases one per line,
    /// `re:` lines as regexes, `#` comments.
    pub fn parse(text: &str) -> Result<Self> {
        let mut phrases = Vec::new();
        let mut patterns = Vec::new();
        for (i, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            if let Some(re) = line.strip_prefix("re:") {
                let re = ci(re).map_err(|e| Error::Parse {
                    line: i + 1,
                    message: format!("bad boilerplate regex: {e}"),
                })?;
                patterns.push(re);
            } else {
                let body = line.trim_end_matches('.');
                let words: Vec<String> = body.split_whitespace().map(regex::escape).collect();
                let mut pat = format!(r"{}\.?", words.join(r"\s+"));
                if body.starts_with(|c: char| c.is_alphanumeric()) {
                    pat.insert_str(0, r"\b");
                }
                phrases.push(ci(&pat).map_err(|e| Error::Parse {
                    line: i + 1,
                    message: e.to_string(),
                })?);
            }
        }
        Ok(Boilerplate { phrases, patterns })
    }

    pub fn builtin() -> Self {
        Self::parse(BUILTIN_BOILERPLATE).expect("builtin boilerplate parses")
    }

    pub fn empty() -> Self {
        Boilerplate {
            phrases: Vec::new(),
            patterns: Vec::new(),
        }
    }

    /// Phrases become sentence boundaries; pattern matches become spaces.
    pub fn strip(&self, text: &str) -> String {
        let mut s = text.to_string();
        for re in &self.phrases {
            if re.is_match(&s) {
                s = re.replace_all(&s, " . ").into_owned();
            }
        }
        for re in &self.patterns {
            if re.is_match(&s) {
                s = re.replace_all(&s, " ").into_owned();
            }
        }
        s
    }
}

#[derive(Debug, PartialEq)]
enum Item {
    Word(String),
    Comma,
    Boundary,
}

fn split_items(text: &str) -> Vec<Item> {
    let chars: Vec<char> = text.chars().collect();
    let mut items = Vec::new();
    let mut word = String::new();
    let flush = |word: &mut String, items: &mut Vec<Item>| {
        let w = word.trim_matches('_');
        if w.chars().any(char::is_alphanumeric) {
            items.push(Item::Word(w.to_string()));
        }
        word.clear();
    };
    for (i, &c) in chars.iter().enumerate() {
        match c {
            '\'' | '\u{2019}' => {}
            ',' => {
                flush(&mut word, &mut items);
                items.push(Item::Comma);
            }
            '.' => {
                let between_digits =
                    i > 0 && chars[i - 1].is_ascii_digit() && chars.get(i + 1).is_some_and(|d| d.is_ascii_digit());
                flush(&mut word, &mut items);
                if !between_digits {
                    items.push(Item::Boundary);
                }
            }
            ';' | ':' | '!' | '?' => {
                flush(&mut word, &mut items);
                items.push(Item::Boundary);
            }
            c if c.is_alphanumeric() || c == '_' => {
                for l in c.to_lowercase() {
                    if (l.is_alphanumeric() && !l.is_uppercase()) || l == '_' {
                        word.push(l);
                    }
                }
            }
            _ => flush(&mut word, &mut items),
        }
    }
    flush(&mut word, &mut items);
    items
}

/// Normalizes a stop word the same way the lexer normalizes text.
pub(crate) fn normalize_stopword(w: &str) -> String {
    w.trim()
        .to_lowercase()
        .chars()
        .filter(|c| *c != '\'' && *c != '\u{2019}')
        .collect()
}

/// Lowercases, strips boilerplate, removes stop words and splits into tokens,
/// keeping the markers negation encoding needs: `,` and `.` tokens, the
/// conjunctions `or`/`and`, and every word that belongs to a negation cue.
pub fn lex(text: &str, config: &CondenserConfig) -> Vec<String> {
    lex_with(text, config, &CueMatcher::new(&config.negation_cues))
}

pub(crate) fn lex_with(text: &str, config: &CondenserConfig, cues: &CueMatcher) -> Vec<String> {
    let stripped = config.boilerplate.strip(&text.to_lowercase());
    let items = split_items(&stripped);

    let mut protected = vec![false; items.len()];
    let word_at = |j: usize| match items.get(j) {
        Some(Item::Word(w)) => Some(w.as_str()),
        _ => None,
    };
    let mut i = 0;
    while i < items.len() {
        if let Some(len) = cues.match_with(i, word_at) {
            protected[i..i + len].iter_mut().for_each(|p| *p = true);
            i += len;
        } else {
            i += 1;
        }
    }

    let mut out: Vec<String> = Vec::with_capacity(items.len());
    for (item, keep) in items.iter().zip(protected) {
        match item {
            Item::Comma => out.push(COMMA.to_string()),
            Item::Boundary => {
                if out.last().is_some_and(|t| t != BOUNDARY) {
                    out.push(BOUNDARY.to_string());
                }
            }
            Item::Word(w) => {
                if keep || w == "or" || w == "and" || !config.stopwords.contains(w) {
                    out.push(w.clone());
                }
            }
        }
    }
    out
}

/// Cleaned tokens of a section: lowercase, punctuation-free, with stop words,
/// boilerplate, dates, times and clinician details removed.
pub fn clean_text(section_text: &str, config: &CondenserConfig) -> Vec<String> {
    lex(section_text, config)
        .into_iter()
        .filter(|t| t != COMMA && t != BOUNDARY && !config.stopwords.contains(t))
        .collect()
}

pub(crate) fn parse_stopwords(text: &str) -> HashSet<String> {
    text.lines()
        .map(str::trim)
        .filter(|l| !l.is_empty() && !l.starts_with('#'))
        .map(normalize_stopword)
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfg_with_stopwords(words: &[&str]) -> CondenserConfig {
        CondenserConfig {
            stopwords: words.iter().map(|s| s.to_string()).collect(),
            ..CondenserConfig::default()
        }
    }

    #[test]
    fn lowercases_and_drops_stopwords() {
        let cfg = cfg_with_stopwords(&["the", "is"]);
        assert_eq!(clean_text("The scan is NORMAL.", &cfg), ["scan", "normal"]);
    }

    #[test]
    fn medicolegal_sentence_removed() {
        let cfg = CondenserConfig::default();
        let s =
            "I have personally reviewed the images for this examination and agreed with the report transcribed above.";
        assert!(clean_text(s, &cfg).is_empty());
    }

    #[test]
    fn dates_and_times_removed() {
        let cfg = CondenserConfig::default();
        assert_eq!(clean_text("seen 01/02/2015 at 10:45", &cfg), ["seen"]);
    }

    #[test]
    fn clinician_names_removed() {
        let cfg = CondenserConfig::default();
        let out = clean_text("Electronically signed by Dr. Jane Smith on 2015-03-04.", &cfg);
        assert!(out.is_empty(), "{out:?}");
    }

    #[test]
    fn underscores_survive_and_punctuation_splits() {
        let cfg = cfg_with_stopwords(&[]);
        assert_eq!(
            clean_text("gray-white mass_effect (stable)", &cfg),
            ["gray", "white", "mass_effect", "stable"]
        );
    }

    #[test]
    fn decimal_point_is_not_a_boundary() {
        let cfg = cfg_with_stopwords(&[]);
        assert_eq!(lex("no 2.5 cm mass.", &cfg), ["no", "2", "5", "cm", "mass", "."]);
    }

    #[test]
    fn lex_keeps_negation_markers() {
        let cfg = CondenserConfig::default();
        assert_eq!(
            lex("No acute hemorrhage, infarction, or mass.", &cfg),
            ["no", "acute", "hemorrhage", ",", "infarction", ",", "or", "mass", "."]
        );
    }

    #[test]
    fn multi_word_cue_words_survive_stoplist() {
        let cfg = CondenserConfig::default();
        assert_eq!(
            lex("Negative for fracture. Used for this.", &cfg),
            ["negative", "for", "fracture", ".", "used", "."]
        );
    }
}
