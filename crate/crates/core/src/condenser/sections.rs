use std::sync::OnceLock;

use regex::Regex;

/// Text pulled out of the FINDINGS and IMPRESSION sections of a report.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SectionExtract {
    pub text: String,
    /// Neither header was present and `text` is the whole report.
    pub fallback: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum HeaderKind {
    Findings,
    Impression,
    Other,
}

fn header_regex() -> &'static Regex {
    static RE: OnceLock<Regex> = OnceLock::new();
    RE.get_or_init(|| {
        Regex::new(
            r"(?i:\b(findings?|impressions?|additional comments?|clinical history|history|indications?|technique|comparisons?|examination|exam|procedure|reason for exam|conclusions?))\s*:|\b([A-Z][A-Z/ ]*[A-Z])\s*:",
        )
        .expect("header regex compiles")
    })
}

fn classify(name: &str) -> HeaderKind {
    let name = name.trim().to_lowercase();
    if name.starts_with("finding") {
        HeaderKind::Findings
    } else if name.starts_with("impression") {
        HeaderKind::Impression
    } else {
        HeaderKind::Other
    }
}

/// Returns the findings text followed by the impression text, with the header
/// tokens removed. Each section runs until the next recognised header.
pub fn extract_sections(raw_text: &str) -> SectionExtract {
    let headers: Vec<(usize, usize, HeaderKind)> = header_regex()
        .captures_iter(raw_text)
        .map(|c| {
            let whole = c.get(0).unwrap();
            let name = c.get(1).or_else(|| c.get(2)).unwrap().as_str();
            (whole.start(), whole.end(), classify(name))
        })
        .collect();

    let mut findings = Vec::new();
    let mut impression = Vec::new();
    for (i, &(_, body_start, kind)) in headers.iter().enumerate() {
        let body_end = headers.get(i + 1).map_or(raw_text.len(), |h| h.0);
        let body = raw_text[body_start..body_end].trim();
        match kind {
            HeaderKind::Findings if !body.is_empty() => findings.push(body),
            HeaderKind::Impression if !body.is_empty() => impression.push(body),
            _ => {}
        }
    }

    let found = headers
        .iter()
        .any(|h| matches!(h.2, HeaderKind::Findings | HeaderKind::Impression));
    if !found {
        return SectionExtract {
            text: raw_text.to_string(),
            fallback: true,
        };
    }
    let text = findings.into_iter().chain(impression).collect::<Vec<_>>().join(" ");
    SectionExtract { text, fallback: false }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn direct_header_split() {
        let e = extract_sections("HISTORY: x FINDINGS: a b IMPRESSION: c");
        assert_eq!(e.text, "a b c");
        assert!(!e.fallback);
    }

    #[test]
    fn no_headers_falls_back() {
        let e = extract_sections("just some text here");
        assert_eq!(e.text, "just some text here");
        assert!(e.fallback);
    }

    #[test]
    fn impression_before_findings_keeps_findings_first() {
        let e = extract_sections("IMPRESSION: c FINDINGS: a b");
        assert_eq!(e.text, "a b c");
    }

    #[test]
    fn additional_comment_ends_impression() {
        let e = extract_sections("FINDINGS:\nnormal study.\nIMPRESSION: negative.\nAdditional comment: call placed");
        assert_eq!(e.text, "normal study. negative.");
    }

    #[test]
    fn times_are_not_headers() {
        let e = extract_sections("FINDINGS: seen at 10:45 today IMPRESSION: ok");
        assert_eq!(e.text, "seen at 10:45 today ok");
    }
}
