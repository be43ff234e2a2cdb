//! Two-stage semantic dictionary mapping.
//!
//! A common-term dictionary (family, progress, risk, negation, qualifiers)
//! runs first, then a domain dictionary compiled from an ontology export.
//! Each stage is a single leftmost-longest pass over token n-grams (n <= 4)
//! and never rescans its own output.

mod dictionary;
mod ontology;
mod scanner;

use std::time::Instant;

use rayon::prelude::*;

pub use dictionary::{
    builtin_common_dictionary, inflections, load_common_dictionary, Entry, SemanticDictionary, Tag,
    BUILTIN_COMMON_DICTIONARY, MAX_VARIANT_TOKENS,
};
pub use ontology::{
    canonical_token, compile_domain_dictionary, OntologyExport, OntologyTerm, BUILTIN_HEMORRHAGE_ONTOLOGY,
};

/// Applies each dictionary in order.
pub fn map_tokens<S: AsRef<str>>(tokens: &[S], dictionaries: &[SemanticDictionary]) -> Vec<String> {
    let mut current: Vec<String> = tokens.iter().map(|t| t.as_ref().to_string()).collect();
    for d in dictionaries {
        current = d.scanner().rewrite(&current);
    }
    current
}

/// Maps every report; reports are independent so order does not matter.
pub fn map_corpus(corpus: &[Vec<String>], dictionaries: &[SemanticDictionary]) -> Vec<Vec<String>> {
    corpus.par_iter().map(|doc| map_tokens(doc, dictionaries)).collect()
}

/// Text size of a token corpus as space-joined lines.
pub fn corpus_bytes(corpus: &[Vec<String>]) -> usize {
    corpus
        .iter()
        .map(|d| d.iter().map(|t| t.len() + 1).sum::<usize>().max(1))
        .sum()
}

/// Single-threaded mapping throughput in bytes per millisecond.
pub fn scan_throughput(corpus: &[Vec<String>], dictionaries: &[SemanticDictionary]) -> f64 {
    let bytes = corpus_bytes(corpus);
    let start = Instant::now();
    let mut sink = 0usize;
    for doc in corpus {
        sink += map_tokens(doc, dictionaries).len();
    }
    let elapsed_ms = start.elapsed().as_secs_f64() * 1e3;
    std::hint::black_box(sink);
    bytes as f64 / elapsed_ms.max(1e-9)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn domain() -> SemanticDictionary {
        let export = OntologyExport::parse(BUILTIN_HEMORRHAGE_ONTOLOGY).unwrap();
        compile_domain_dictionary(&export, &["H0001"]).unwrap()
    }

    fn toks(s: &str) -> Vec<String> {
        s.split_whitespace().map(String::from).collect()
    }

    #[test]
    fn quoted_common_mappings() {
        let dicts = [builtin_common_dictionary()];
        for (input, expected) in [
            ("mother", "FAMILY"),
            ("brother", "FAMILY"),
            ("wife", "FAMILY"),
            ("no", "NEGEX"),
            ("absent", "NEGEX"),
            ("adequate rule", "NEGEX"),
            ("suspicion", "RISK"),
            ("probable", "RISK"),
            ("possible", "RISK"),
            ("increase", "QUAL"),
            ("invasive", "QUAL"),
            ("diffuse", "QUAL"),
        ] {
            assert_eq!(map_tokens(&toks(input), &dicts), [expected], "{input}");
        }
    }

    #[test]
    fn negated_compound_maps_through_both_stages() {
        let dicts = [builtin_common_dictionary(), domain()];
        assert_eq!(map_tokens(&["no_hematoma"], &dicts), ["NEGEX_hemorrhage"]);
        assert_eq!(map_tokens(&["no_acute_hemorrhage"], &dicts), ["NEGEX_QUAL_hemorrhage"]);
        assert_eq!(
            map_tokens(&["negative_for_subdural_hematoma"], &dicts),
            ["NEGEX_hemorrhage"]
        );
    }

    #[test]
    fn risk_then_domain() {
        let dicts = [builtin_common_dictionary(), domain()];
        assert_eq!(map_tokens(&toks("probable hemorrhage"), &dicts), ["RISK", "hemorrhage"]);
        assert_eq!(map_tokens(&toks("possible apoplexy"), &dicts), ["RISK", "hemorrhage"]);
    }

    #[test]
    fn longest_match_wins() {
        let d = SemanticDictionary::from_tsv("t", "a\tX\tQUAL\na b\tY\tQUAL\na b c\tZ\tQUAL\n").unwrap();
        assert_eq!(map_tokens(&toks("a b c a b a"), &[d]), ["Z", "Y", "X"]);
    }

    #[test]
    fn output_not_rescanned() {
        // "x" -> "y" and "y" -> ... is impossible (canonicals are not variants),
        // but a rewritten token must not join a following token into a match.
        let d = SemanticDictionary::from_tsv("t", "p\tQ\tQUAL\nq r\tS\tQUAL\n").unwrap();
        assert_eq!(map_tokens(&toks("p r"), &[d]), ["Q", "r"]);
    }

    #[test]
    fn empty_dictionary_is_identity() {
        let d = SemanticDictionary::empty("e");
        assert_eq!(map_tokens(&toks("a b_c d"), &[d]), ["a", "b_c", "d"]);
    }
}
