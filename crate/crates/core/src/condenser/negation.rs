//! Negation encoding by cue matching.
//!
//! A cue opens a scope that runs to the next sentence boundary (`.`). Inside
//! the scope the tokens are segmented on `,`, `or` and `and`; each segment is
//! emitted as one token prefixed with the cue, e.g.
//! `no acute hemorrhage , infarction , or mass .` becomes
//! `no_acute_hemorrhage no_infarction no_mass`.

/// Sentence boundary marker produced by the lexer.
pub const BOUNDARY: &str = ".";
/// Comma marker produced by the lexer.
pub const COMMA: &str = ",";

pub(crate) fn is_separator(token: &str) -> bool {
    matches!(token, COMMA | "or" | "and")
}

pub(crate) fn is_marker(token: &str) -> bool {
    token == BOUNDARY || is_separator(token)
}

/// Multi-token cue matcher, longest cue first.
#[derive(Debug, Clone)]
pub struct CueMatcher {
    cues: Vec<Vec<String>>,
}

impl CueMatcher {
    pub fn new<S: AsRef<str>>(cues: &[S]) -> Self {
        let mut cues: Vec<Vec<String>> = cues
            .iter()
            .map(|c| c.as_ref().split_whitespace().map(str::to_lowercase).collect::<Vec<_>>())
            .filter(|c: &Vec<String>| !c.is_empty())
            .collect();
        cues.sort_by_key(|c| std::cmp::Reverse(c.len()));
        CueMatcher { cues }
    }

    /// Length of the longest cue starting at `i`, reading tokens through `get`.
    pub fn match_with<'a>(&self, i: usize, get: impl Fn(usize) -> Option<&'a str>) -> Option<usize> {
        self.cues
            .iter()
            .find(|cue| cue.iter().enumerate().all(|(k, w)| get(i + k) == Some(w.as_str())))
            .map(Vec::len)
    }

    pub fn match_at<S: AsRef<str>>(&self, tokens: &[S], i: usize) -> Option<usize> {
        self.match_with(i, |j| tokens.get(j).map(|t| t.as_ref()))
    }
}

/// Rewrites negated noun phrases into cue-prefixed compounds and drops all
/// separator and boundary markers.
pub fn encode_negation<S: AsRef<str>, C: AsRef<str>>(tokens: &[S], cues: &[C]) -> Vec<String> {
    encode_with(tokens, &CueMatcher::new(cues))
}

pub(crate) fn encode_with<S: AsRef<str>>(tokens: &[S], matcher: &CueMatcher) -> Vec<String> {
    let tok = |i: usize| tokens[i].as_ref();
    let n = tokens.len();
    let mut out = Vec::with_capacity(n);
    let mut i = 0;
    while i < n {
        if let Some(len) = matcher.match_at(tokens, i) {
            let prefix = (i..i + len).map(tok).collect::<Vec<_>>().join("_");
            i += len;
            let mut segment: Vec<&str> = Vec::new();
            while i < n && tok(i) != BOUNDARY {
                if is_separator(tok(i)) {
                    flush(&prefix, &mut segment, &mut out);
                    i += 1;
                } else if matcher.match_at(tokens, i).is_some() {
                    // a new cue closes this scope and opens its own
                    break;
                } else {
                    segment.push(tok(i));
                    i += 1;
                }
            }
            flush(&prefix, &mut segment, &mut out);
        } else {
            let t = tok(i);
            if !is_marker(t) {
                out.push(t.to_string());
            }
            i += 1;
        }
    }
    out
}

fn flush(prefix: &str, segment: &mut Vec<&str>, out: &mut Vec<String>) {
    if segment.is_empty() {
        return;
    }
    let mut s = String::from(prefix);
    for part in segment.drain(..) {
        s.push('_');
        s.push_str(part);
    }
    out.push(s);
}

#[cfg(test)]
mod tests {
    use super::*;

    fn toks(s: &str) -> Vec<String> {
        s.split_whitespace().map(String::from).collect()
    }

    const CUES: [&str; 4] = ["no", "without", "negative for", "absent"];

    #[test]
    fn golden_phrase() {
        let out = encode_negation(&toks("no acute hemorrhage , infarction , or mass ."), &CUES);
        assert_eq!(out, ["no_acute_hemorrhage", "no_infarction", "no_mass"]);
    }

    #[test]
    fn no_cue_drops_separators_only() {
        let out = encode_negation(&toks("mass , effect and shift or edema ."), &CUES);
        assert_eq!(out, ["mass", "effect", "shift", "edema"]);
    }

    #[test]
    fn scope_ends_at_boundary() {
        let out = encode_negation(&toks("no edema . mass present ."), &CUES);
        assert_eq!(out, ["no_edema", "mass", "present"]);
    }

    #[test]
    fn multi_word_cue() {
        let out = encode_negation(&toks("negative for fracture and hemorrhage ."), &CUES);
        assert_eq!(out, ["negative_for_fracture", "negative_for_hemorrhage"]);
    }

    #[test]
    fn bare_cue_emits_nothing() {
        let out = encode_negation(&toks("stable . no . edema"), &CUES);
        assert_eq!(out, ["stable", "edema"]);
    }

    #[test]
    fn second_cue_restarts_scope() {
        let out = encode_negation(&toks("no mass without edema ."), &CUES);
        assert_eq!(out, ["no_mass", "without_edema"]);
    }
}
