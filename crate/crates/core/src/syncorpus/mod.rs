//! Synthetic labeled report corpora with recorded ground truth.
//!
//! Reports follow a fixed layout: a discarded preamble (exam, history,
//! technique, comparison), a FINDINGS section, and an IMPRESSION section that
//! ends in boilerplate (attestation, dictation and signature lines with names,
//! dates and times). Sentences are drawn from a [`TemplateSet`]. The
//! [`GroundTruth`] written alongside the corpus lists everything a test needs
//! to check the pipeline against the text: synonym pairs, hapaxes, the planted
//! collocation, expected negation compounds and section boundaries.

mod oracle;
mod templates;

use std::collections::HashMap;
use std::path::Path;
use std::rc::Rc;

use rand::seq::{IteratorRandom, SliceRandom};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Zipf};
use serde::{Deserialize, Serialize};

pub use oracle::ClassOracle;
pub use templates::{
    ClassTemplates, CollocationTemplates, LexiconSpec, NegationTemplates, TemplateSet, BLEED_SLOT, BUILTIN_TEMPLATES,
    HEDGE_SLOT, SPECIAL_SLOTS,
};

use crate::classify::RiskClass;
use crate::corpus::{save_reports, Report};
use crate::{Error, Result};
use templates::{parse_template, words, Piece};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GenerationConfig {
    pub n_reports: usize,
    /// No, medium and high risk shares.
    pub proportions: [f64; 3],
    pub seed: u64,
    /// Chance that a `{~word}` placeholder yields another member of its group.
    pub synonym_swap_probability: f64,
    /// Chance of each optional negation sentence.
    pub negation_probability: f64,
    pub boilerplate_count: usize,
}

impl Default for GenerationConfig {
    fn default() -> Self {
        GenerationConfig {
            n_reports: 2000,
            proportions: [0.80, 0.04, 0.16],
            seed: 7,
            synonym_swap_probability: 0.5,
            negation_probability: 0.7,
            boilerplate_count: 2,
        }
    }
}

impl GenerationConfig {
    pub fn validate(&self) -> Result<()> {
        if self.n_reports == 0 {
            return Err(Error::Config("n_reports must be >= 1".into()));
        }
        if self.proportions.iter().any(|p| !p.is_finite() || *p < 0.0) {
            return Err(Error::Config("proportions must be non-negative".into()));
        }
        if (self.proportions.iter().sum::<f64>() - 1.0).abs() > 1e-9 {
            return Err(Error::Config("proportions must sum to 1".into()));
        }
        for (name, p) in [
            ("synonym_swap_probability", self.synonym_swap_probability),
            ("negation_probability", self.negation_probability),
        ] {
            if !(0.0..=1.0).contains(&p) {
                return Err(Error::Config(format!("{name} must lie in [0, 1]")));
            }
        }
        Ok(())
    }
}

/// Apportions `n` reports by largest remainder, ties to the lower class.
/// Fails when a class with a positive share would get no reports.
pub fn class_counts(n: usize, proportions: [f64; 3]) -> Result<[usize; 3]> {
    let quotas: Vec<f64> = proportions.iter().map(|p| p * n as f64).collect();
    let mut counts = [0usize; 3];
    for k in 0..3 {
        counts[k] = quotas[k].floor() as usize;
    }
    let mut order: Vec<usize> = (0..3).collect();
    order.sort_by(|&a, &b| {
        let ra = quotas[a] - quotas[a].floor();
        let rb = quotas[b] - quotas[b].floor();
        rb.total_cmp(&ra).then(a.cmp(&b))
    });
    let assigned: usize = counts.iter().sum();
    for &k in order.iter().take(n.saturating_sub(assigned)) {
        counts[k] += 1;
    }
    for k in 0..3 {
        if proportions[k] > 0.0 && counts[k] == 0 {
            return Err(Error::Validation(format!(
                "{} reports cannot represent class {} at share {}",
                n,
                RiskClass::ALL[k],
                proportions[k]
            )));
        }
    }
    Ok(counts)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PlantedCollocation {
    pub first: String,
    pub second: String,
    /// Adjacent occurrences in the corpus.
    pub count: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ReportTruth {
    pub id: String,
    pub class: RiskClass,
    pub label: u8,
    /// Byte range of the findings body (header excluded).
    pub findings: (usize, usize),
    /// Byte range of the impression body, boilerplate included.
    pub impression: (usize, usize),
    /// Whitespace tokens in findings plus impression.
    pub section_tokens: usize,
    /// Expected negation compounds, in text order, before dictionary mapping.
    pub negations: Vec<String>,
    pub hapax: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroundTruth {
    pub seed: u64,
    pub class_counts: [usize; 3],
    /// Every pair of words from the same synonym group.
    pub synonym_pairs: Vec<(String, String)>,
    /// `(X, cue_X)` for single-word negation targets, in condensed form.
    pub negation_pairs: Vec<(String, String)>,
    pub collocations: Vec<PlantedCollocation>,
    pub reports: Vec<ReportTruth>,
}

impl GroundTruth {
    pub fn hapaxes(&self) -> impl Iterator<Item = &str> {
        self.reports.iter().map(|r| r.hapax.as_str())
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let json = serde_json::to_string_pretty(self).map_err(|e| Error::Validation(e.to_string()))?;
        std::fs::write(path, json + "\n").map_err(|e| Error::io(path, e))
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        serde_json::from_str(&text).map_err(|e| Error::Parse {
            line: e.line(),
            message: e.to_string(),
        })
    }
}

/// Writes `reports.jsonl` and `groundtruth.json` into `dir`.
pub fn write_corpus(dir: impl AsRef<Path>, reports: &[Report], truth: &GroundTruth) -> Result<()> {
    let dir = dir.as_ref();
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    save_reports(dir.join("reports.jsonl"), reports)?;
    truth.save(dir.join("groundtruth.json"))
}

struct Sentence {
    text: String,
    negations: Vec<String>,
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum Negate {
    General,
    AllowBleed,
    RequireBleed,
}

struct Generator<'a> {
    t: &'a TemplateSet,
    cfg: &'a GenerationConfig,
    rng: ChaCha8Rng,
    parsed: HashMap<String, Rc<[Piece]>>,
    zipf: HashMap<String, Zipf<f64>>,
    /// Acute topic, chronic topic, neutral remainder.
    lexicon: [(Vec<String>, Zipf<f64>); 3],
    topic_mix: [f64; 2],
    groups: HashMap<String, usize>,
    cue_words: Vec<Vec<String>>,
}

fn capitalize(s: &str) -> String {
    let mut c = s.chars();
    match c.next() {
        Some(f) => f.to_uppercase().chain(c).collect(),
        None => String::new(),
    }
}

fn join_targets(targets: &[&str]) -> String {
    match targets {
        [] => String::new(),
        [a] => a.to_string(),
        [a, b] => format!("{a} or {b}"),
        [init @ .., last] => format!("{}, or {last}", init.join(", ")),
    }
}

impl<'a> Generator<'a> {
    fn new(t: &'a TemplateSet, cfg: &'a GenerationConfig) -> Result<Self> {
        let mut zipf = HashMap::new();
        for (slot, &s) in &t.slot_zipf {
            let n = t.slots[slot].len() as u64;
            zipf.insert(slot.clone(), Zipf::new(n, s).map_err(|e| Error::Config(e.to_string()))?);
        }
        let mut acute = t.lexicon_words();
        let k = (acute.len() as f64 * t.lexicon.topic_fraction) as usize;
        let neutral = acute.split_off(2 * k);
        let chronic = acute.split_off(k);
        let part = |w: Vec<String>| -> Result<(Vec<String>, Zipf<f64>)> {
            let z = Zipf::new(w.len().max(1) as u64, t.lexicon.zipf).map_err(|e| Error::Config(e.to_string()))?;
            Ok((w, z))
        };
        let lexicon = [part(acute)?, part(chronic)?, part(neutral)?];
        let groups = t
            .synonym_groups
            .iter()
            .enumerate()
            .flat_map(|(g, ws)| ws.iter().map(move |w| (w.clone(), g)))
            .collect();
        Ok(Generator {
            t,
            cfg,
            rng: ChaCha8Rng::seed_from_u64(cfg.seed),
            parsed: HashMap::new(),
            zipf,
            lexicon,
            topic_mix: [0.0; 2],
            groups,
            cue_words: t.negation.cues.iter().map(|c| words(c)).collect(),
        })
    }

    fn pieces(&mut self, template: &str) -> Rc<[Piece]> {
        if let Some(p) = self.parsed.get(template) {
            return p.clone();
        }
        let p: Rc<[Piece]> = parse_template(template).expect("validated template").into();
        self.parsed.insert(template.to_string(), p.clone());
        p
    }

    fn pick<'s>(&mut self, list: &'s [String]) -> &'s str {
        list.choose(&mut self.rng).expect("non-empty list")
    }

    fn range(&mut self, r: [usize; 2]) -> usize {
        self.rng.gen_range(r[0]..=r[1])
    }

    fn synonym(&mut self, word: &str) -> String {
        let t = self.t;
        let group = &t.synonym_groups[self.groups[word]];
        if self.rng.gen_bool(self.cfg.synonym_swap_probability) {
            let others: Vec<&String> = group.iter().filter(|w| *w != word).collect();
            others.choose(&mut self.rng).unwrap().to_string()
        } else {
            word.to_string()
        }
    }

    fn slot(&mut self, name: &str, negate: Negate, ctx: &mut Sentence, hapax: &str, out: &mut String) {
        let t = self.t;
        match name {
            "num" => out.push_str(&self.rng.gen_range(2..=30).to_string()),
            "size" => {
                let a = self.rng.gen_range(2..=45);
                let s = match self.rng.gen_range(0..3) {
                    0 => format!("{a} mm"),
                    1 => format!("{a} x {} mm", self.rng.gen_range(2..=45)),
                    _ => format!("{} cm", self.rng.gen_range(1..=6)),
                };
                out.push_str(&s);
            }
            "date" => {
                let s = format!(
                    "{:02}/{:02}/2015",
                    self.rng.gen_range(1..=12),
                    self.rng.gen_range(1..=28)
                );
                out.push_str(&s);
            }
            "time" => {
                let s = format!("{}:{:02}", self.rng.gen_range(1..=12), self.rng.gen_range(0..60));
                out.push_str(&s);
            }
            "doctor" => {
                let first = self.pick(&t.first_names);
                let last = self.pick(&t.last_names);
                out.push_str(&format!("Dr. {first} {last}"));
            }
            "lex" => {
                let u: f64 = self.rng.gen();
                let [a, c] = self.topic_mix;
                let part = if u < a {
                    0
                } else if u < a + c {
                    1
                } else {
                    2
                };
                let (words, zipf) = &self.lexicon[part];
                let r = zipf.sample(&mut self.rng) as usize;
                out.push_str(&words[r - 1]);
            }
            "hapax" => out.push_str(hapax),
            "pair" => {
                out.push_str(&t.collocation.first);
                out.push(' ');
                out.push_str(&t.collocation.second);
            }
            "negation" => {
                let mode = if negate == Negate::General {
                    Negate::General
                } else {
                    Negate::AllowBleed
                };
                self.negation_clause(mode, ctx, out);
            }
            "negbleed" => self.negation_clause(Negate::RequireBleed, ctx, out),
            _ => {
                let fillers = &t.slots[name];
                let filler = match self.zipf.get(name) {
                    Some(z) => &fillers[z.sample(&mut self.rng) as usize - 1],
                    None => self.pick(fillers),
                };
                self.expand(filler, negate, ctx, hapax, out);
            }
        }
    }

    fn expand(&mut self, template: &str, negate: Negate, ctx: &mut Sentence, hapax: &str, out: &mut String) {
        for p in self.pieces(template).iter() {
            match p {
                Piece::Text(s) => out.push_str(s),
                Piece::Synonym(w) => {
                    let s = self.synonym(w);
                    out.push_str(&s);
                }
                Piece::Slot(name) => self.slot(name, negate, ctx, hapax, out),
            }
        }
    }

    /// A cue followed by a list of targets; records one compound per target.
    fn negation_clause(&mut self, mode: Negate, ctx: &mut Sentence, out: &mut String) {
        let t = self.t;
        let neg = &t.negation;
        let frame = self.pick(&neg.frames).to_string();
        let mut head = String::new();
        for p in self.pieces(&frame).iter() {
            match p {
                Piece::Text(s) => head.push_str(s),
                Piece::Synonym(w) => {
                    let s = self.synonym(w);
                    head.push_str(&s);
                }
                Piece::Slot(s) if s == "cue" => {
                    let cue = self.pick(&neg.cues).to_string();
                    head.push_str(&cue);
                }
                Piece::Slot(_) => {}
            }
        }
        let head_words = words(&head);
        let cue = self
            .cue_words
            .iter()
            .filter(|c| head_words.ends_with(c))
            .max_by_key(|c| c.len())
            .expect("validated frame ends in a cue")
            .join("_");

        let k = self.rng.gen_range(1..=neg.max_targets);
        let mut pool: Vec<&str> = neg.general.iter().map(String::as_str).collect();
        if mode != Negate::General {
            pool.extend(neg.bleed.iter().map(String::as_str));
        }
        let mut targets: Vec<&str> = pool
            .choose_multiple(&mut self.rng, k.min(pool.len()))
            .copied()
            .collect();
        if mode == Negate::RequireBleed && !targets.iter().any(|t| neg.bleed.iter().any(|b| b == t)) {
            let b = self.pick(&neg.bleed);
            targets[0] = b;
            targets.dedup();
        }
        for t in &targets {
            ctx.negations.push(format!("{cue}_{}", t.replace(' ', "_")));
        }
        out.push_str(&head);
        out.push_str(&join_targets(&targets));
    }

    fn sentence(&mut self, template: &str, negate: Negate, hapax: &str) -> Sentence {
        let mut s = Sentence {
            text: String::new(),
            negations: Vec::new(),
        };
        let mut out = String::new();
        self.expand(template, negate, &mut s, hapax, &mut out);
        s.text = capitalize(out.trim());
        s
    }

    fn report(&mut self, index: usize, class: RiskClass, collocation: bool) -> (Report, ReportTruth) {
        let t = self.t;
        let seed = self.cfg.seed;
        let hapax = format!("hx{seed}q{index}");
        let ct = match class {
            RiskClass::NoRisk => &t.no_risk,
            RiskClass::MediumRisk => &t.medium_risk,
            RiskClass::HighRisk => &t.high_risk,
        };
        let negate = if class == RiskClass::NoRisk {
            Negate::AllowBleed
        } else {
            Negate::General
        };
        self.topic_mix = ct.topic_mix;

        let mut lines = Vec::new();
        for p in &t.preamble {
            lines.push(self.sentence(p, Negate::General, &hapax).text);
        }

        let mut findings = Vec::new();
        let k = self.range(t.normal_count);
        for n in t.normal.iter().choose_multiple(&mut self.rng, k) {
            findings.push(self.sentence(n, negate, &hapax));
        }
        for _ in 0..self.range(t.detail_count) {
            let d = self.pick(&t.detail).to_string();
            findings.push(self.sentence(&d, negate, &hapax));
        }
        for _ in 0..self.range(ct.key_count) {
            let d = self.pick(&ct.key).to_string();
            findings.push(self.sentence(&d, negate, &hapax));
        }
        let k = self.range(ct.extra_count);
        for e in ct.extra.iter().choose_multiple(&mut self.rng, k) {
            findings.push(self.sentence(e, negate, &hapax));
        }
        let optional = ct.negation_count[1] - ct.negation_count[0];
        let n_neg = ct.negation_count[0]
            + (0..optional)
                .filter(|_| self.rng.gen_bool(self.cfg.negation_probability))
                .count();
        for _ in 0..n_neg {
            findings.push(self.sentence("{negation}.", negate, &hapax));
        }
        let h = self.pick(&t.hapax).to_string();
        findings.push(self.sentence(&h, negate, &hapax));
        if collocation {
            let c = self.pick(&t.collocation.templates).to_string();
            findings.push(self.sentence(&c, negate, &hapax));
        }
        findings.shuffle(&mut self.rng);

        let mut impression = Vec::new();
        let k = self.range(ct.impression_count);
        for i in ct.impression.iter().choose_multiple(&mut self.rng, k) {
            impression.push(self.sentence(i, negate, &hapax));
        }
        let k = self.cfg.boilerplate_count.min(t.boilerplate.len());
        for b in t.boilerplate.iter().choose_multiple(&mut self.rng, k) {
            impression.push(self.sentence(b, negate, &hapax));
        }

        let join = |s: &[Sentence]| s.iter().map(|s| s.text.as_str()).collect::<Vec<_>>().join(" ");
        let findings_text = join(&findings);
        let impression_text = join(&impression);
        let mut text = lines.join("\n");
        text.push_str("\nFINDINGS: ");
        let f0 = text.len();
        text.push_str(&findings_text);
        let f1 = text.len();
        text.push_str("\nIMPRESSION: ");
        let i0 = text.len();
        text.push_str(&impression_text);
        let i1 = text.len();

        let label = match class {
            RiskClass::NoRisk => 1,
            RiskClass::MediumRisk => self.rng.gen_range(2..=4),
            RiskClass::HighRisk => 5,
        };
        let id = format!("syn{seed}-{index:05}");
        let truth = ReportTruth {
            id: id.clone(),
            class,
            label,
            findings: (f0, f1),
            impression: (i0, i1),
            section_tokens: findings_text.split_whitespace().count() + impression_text.split_whitespace().count(),
            negations: findings
                .iter()
                .chain(&impression)
                .flat_map(|s| s.negations.iter().cloned())
                .collect(),
            hapax,
        };
        (Report::new(id, text, Some(label)), truth)
    }
}

/// Generates `config.n_reports` labeled reports and their ground truth.
/// Identical inputs give identical output.
pub fn generate_corpus(templates: &TemplateSet, config: &GenerationConfig) -> Result<(Vec<Report>, GroundTruth)> {
    templates.validate()?;
    config.validate()?;
    let n = config.n_reports;
    let counts = class_counts(n, config.proportions)?;
    let mut gen = Generator::new(templates, config)?;

    let mut classes: Vec<RiskClass> = RiskClass::ALL
        .iter()
        .zip(counts)
        .flat_map(|(&c, k)| std::iter::repeat_n(c, k))
        .collect();
    classes.shuffle(&mut gen.rng);
    let n_pair = (templates.collocation.fraction * n as f64).round() as usize;
    let mut with_pair = vec![false; n];
    for i in (0..n).choose_multiple(&mut gen.rng, n_pair) {
        with_pair[i] = true;
    }

    let mut reports = Vec::with_capacity(n);
    let mut truths = Vec::with_capacity(n);
    for (i, &class) in classes.iter().enumerate() {
        let (r, t) = gen.report(i, class, with_pair[i]);
        reports.push(r);
        truths.push(t);
    }

    let mut synonym_pairs = Vec::new();
    for g in &templates.synonym_groups {
        for a in 0..g.len() {
            for b in a + 1..g.len() {
                synonym_pairs.push((g[a].clone(), g[b].clone()));
            }
        }
    }
    let cue = templates.negation.cues[0].replace(' ', "_");
    let negation_pairs = templates
        .negation
        .general
        .iter()
        .chain(&templates.negation.bleed)
        .filter(|t| !t.contains(' '))
        .map(|t| (t.clone(), format!("{cue}_{t}")))
        .collect();
    let truth = GroundTruth {
        seed: config.seed,
        class_counts: counts,
        synonym_pairs,
        negation_pairs,
        collocations: vec![PlantedCollocation {
            first: templates.collocation.first.clone(),
            second: templates.collocation.second.clone(),
            count: n_pair,
        }],
        reports: truths,
    };
    Ok((reports, truth))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small(n: usize, seed: u64) -> GenerationConfig {
        GenerationConfig {
            n_reports: n,
            proportions: [0.5, 0.2, 0.3],
            seed,
            ..Default::default()
        }
    }

    #[test]
    fn largest_remainder_counts() {
        assert_eq!(class_counts(1000, [0.8, 0.04, 0.16]).unwrap(), [800, 40, 160]);
        assert_eq!(class_counts(1188, [0.8, 0.04, 0.16]).unwrap(), [950, 48, 190]);
        assert_eq!(class_counts(7, [1.0 / 3.0; 3]).unwrap(), [3, 2, 2]);
        assert!(class_counts(10, [0.8, 0.04, 0.16]).is_err());
        assert_eq!(class_counts(10, [1.0, 0.0, 0.0]).unwrap(), [10, 0, 0]);
    }

    #[test]
    fn deterministic() {
        let t = TemplateSet::builtin();
        let a = generate_corpus(&t, &small(10, 3)).unwrap();
        let b = generate_corpus(&t, &small(10, 3)).unwrap();
        assert_eq!(a.0, b.0);
        assert_eq!(a.1, b.1);
        let c = generate_corpus(&t, &small(10, 4)).unwrap();
        assert_ne!(a.0, c.0);
    }

    #[test]
    fn config_validation() {
        let c = GenerationConfig {
            proportions: [0.5, 0.5, 0.5],
            ..GenerationConfig::default()
        };
        assert!(c.validate().is_err());
        let c = GenerationConfig {
            negation_probability: 1.5,
            ..GenerationConfig::default()
        };
        assert!(c.validate().is_err());
    }

    #[test]
    fn oracle_recovers_every_label() {
        let t = TemplateSet::builtin();
        let (reports, truth) = generate_corpus(&t, &small(300, 11)).unwrap();
        let oracle = ClassOracle::new(&t);
        for (r, rt) in reports.iter().zip(&truth.reports) {
            assert_eq!(oracle.classify(&r.text), rt.class, "{}", r.text);
        }
    }

    #[test]
    fn spans_cover_sections() {
        let t = TemplateSet::builtin();
        let (reports, truth) = generate_corpus(&t, &small(20, 5)).unwrap();
        for (r, rt) in reports.iter().zip(&truth.reports) {
            assert!(r.text[..rt.findings.0].ends_with("FINDINGS: "));
            assert!(r.text[..rt.impression.0].ends_with("IMPRESSION: "));
            assert_eq!(rt.impression.1, r.text.len());
        }
    }

    #[test]
    fn section_token_counts_match_extraction() {
        let t = TemplateSet::builtin();
        let (reports, truth) = generate_corpus(&t, &small(50, 21)).unwrap();
        for (r, rt) in reports.iter().zip(&truth.reports) {
            let s = crate::condenser::extract_sections(&r.text);
            assert!(!s.fallback);
            assert_eq!(s.text.split_whitespace().count(), rt.section_tokens, "{}", r.text);
        }
    }

    #[test]
    fn negation_compounds_match_condenser() {
        let t = TemplateSet::builtin();
        let cfg = crate::condenser::CondenserConfig::default();
        let (reports, truth) = generate_corpus(&t, &small(100, 22)).unwrap();
        for (r, rt) in reports.iter().zip(&truth.reports) {
            let (tokens, _) = crate::condenser::condense_text(&r.text, &cfg);
            let compounds: Vec<String> = tokens.into_iter().filter(|w| w.contains('_')).collect();
            assert_eq!(compounds, rt.negations, "{}", r.text);
        }
    }

    #[test]
    fn default_corpus_scale() {
        let t = TemplateSet::builtin();
        let (reports, truth) = generate_corpus(&t, &GenerationConfig::default()).unwrap();
        assert_eq!(truth.class_counts, [1600, 80, 320]);
        let terms: std::collections::HashSet<String> = reports
            .iter()
            .flat_map(|r| crate::syncorpus::templates::words(&r.text))
            .filter(|w| w.chars().all(char::is_alphabetic))
            .collect();
        assert!((3000..=5000).contains(&terms.len()), "{} terms", terms.len());

        let condensed = crate::condenser::condense(&reports, &Default::default()).unwrap();
        let hapaxes: std::collections::HashSet<&str> = truth.hapaxes().collect();
        assert_eq!(hapaxes.len(), reports.len());
        assert!(condensed
            .reports
            .iter()
            .all(|r| r.tokens.iter().all(|w| !hapaxes.contains(w.as_str()))));
        let c = &truth.collocations[0];
        assert_eq!(c.count, 600);
        assert!(condensed.collocations.contains(&c.first, &c.second));
    }
}
