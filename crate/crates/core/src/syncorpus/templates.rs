use std::collections::{BTreeMap, BTreeSet, HashSet};
use std::path::Path;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::condenser::CondenserConfig;
use crate::{Error, Result};

pub const BUILTIN_TEMPLATES: &str = include_str!("../../data/templates.toml");

/// Slot names with generated fillers.
pub const SPECIAL_SLOTS: [&str; 10] = [
    "num", "size", "date", "time", "doctor", "lex", "hapax", "pair", "negation", "negbleed",
];

/// Slot whose fillers mark a positive bleed mention.
pub const BLEED_SLOT: &str = "bleed";
/// Slot whose fillers hedge a bleed mention.
pub const HEDGE_SLOT: &str = "hedge";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ClassTemplates {
    pub key_count: [usize; 2],
    /// Sentences carrying the class-discriminative groups.
    pub key: Vec<String>,
    pub extra_count: [usize; 2],
    pub extra: Vec<String>,
    /// Negation sentences in the findings: the low end is always emitted,
    /// each further one with the configured negation probability.
    pub negation_count: [usize; 2],
    pub impression: Vec<String>,
    pub impression_count: [usize; 2],
    /// Chance that a `{lex}` draw comes from the acute or the chronic topic
    /// instead of the neutral part of the lexicon.
    #[serde(default)]
    pub topic_mix: [f64; 2],
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NegationTemplates {
    pub cues: Vec<String>,
    /// Each frame holds `{targets}` directly after a cue (literal or `{cue}`).
    pub frames: Vec<String>,
    pub max_targets: usize,
    /// Targets any class may negate.
    pub general: Vec<String>,
    /// Bleed targets, negated only in no-risk reports.
    pub bleed: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CollocationTemplates {
    pub first: String,
    pub second: String,
    /// Share of reports that contain the pair once.
    pub fraction: f64,
    pub templates: Vec<String>,
}

/// Pseudo-words built from morphemes, drawn Zipf-distributed as filler.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LexiconSpec {
    pub zipf: f64,
    /// Share of the lexicon given to each of the acute and chronic topics.
    #[serde(default)]
    pub topic_fraction: f64,
    pub prefixes: Vec<String>,
    pub roots: Vec<String>,
    pub suffixes: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TemplateSet {
    /// Interchangeable single-word groups, used through `{~word}`.
    pub synonym_groups: Vec<Vec<String>>,
    /// One line each before the findings, in order.
    pub preamble: Vec<String>,
    pub normal_count: [usize; 2],
    /// Normal-anatomy sentences shared by all classes.
    pub normal: Vec<String>,
    pub detail_count: [usize; 2],
    pub detail: Vec<String>,
    pub hapax: Vec<String>,
    pub boilerplate: Vec<String>,
    pub first_names: Vec<String>,
    pub last_names: Vec<String>,
    pub collocation: CollocationTemplates,
    pub lexicon: LexiconSpec,
    #[serde(default)]
    pub slot_zipf: BTreeMap<String, f64>,
    pub slots: BTreeMap<String, Vec<String>>,
    pub negation: NegationTemplates,
    pub no_risk: ClassTemplates,
    pub medium_risk: ClassTemplates,
    pub high_risk: ClassTemplates,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub(crate) enum Piece {
    Text(String),
    Slot(String),
    Synonym(String),
}

pub(crate) fn parse_template(t: &str) -> Result<Vec<Piece>> {
    let mut pieces = Vec::new();
    let mut rest = t;
    while let Some(open) = rest.find('{') {
        if open > 0 {
            pieces.push(Piece::Text(rest[..open].to_string()));
        }
        let close = rest[open..]
            .find('}')
            .ok_or_else(|| Error::Validation(format!("unclosed placeholder in {t:?}")))?
            + open;
        let name = &rest[open + 1..close];
        if name.is_empty() || name.contains('{') {
            return Err(Error::Validation(format!("bad placeholder in {t:?}")));
        }
        pieces.push(match name.strip_prefix('~') {
            Some(w) => Piece::Synonym(w.to_string()),
            None => Piece::Slot(name.to_string()),
        });
        rest = &rest[close + 1..];
    }
    if rest.contains('}') {
        return Err(Error::Validation(format!("stray '}}' in {t:?}")));
    }
    if !rest.is_empty() {
        pieces.push(Piece::Text(rest.to_string()));
    }
    Ok(pieces)
}

/// Lowercase alphanumeric words of a text.
pub(crate) fn words(text: &str) -> Vec<String> {
    text.split(|c: char| !c.is_alphanumeric())
        .filter(|w| !w.is_empty())
        .map(str::to_lowercase)
        .collect()
}

fn check_range(name: &str, r: [usize; 2], pool: usize, distinct: bool) -> Result<()> {
    if r[0] > r[1] {
        return Err(Error::Validation(format!("{name}: range {r:?} is reversed")));
    }
    if r[1] > 0 && pool == 0 {
        return Err(Error::Validation(format!("{name}: no templates to draw from")));
    }
    if distinct && r[1] > pool {
        return Err(Error::Validation(format!(
            "{name}: {} distinct sentences requested from {pool}",
            r[1]
        )));
    }
    Ok(())
}

impl TemplateSet {
    pub fn builtin() -> Self {
        toml::from_str(BUILTIN_TEMPLATES).expect("built-in templates parse")
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let t: TemplateSet = toml::from_str(&text).map_err(|e| Error::Config(e.to_string()))?;
        t.validate()?;
        Ok(t)
    }

    fn classes(&self) -> [(&'static str, &ClassTemplates); 3] {
        [
            ("no_risk", &self.no_risk),
            ("medium_risk", &self.medium_risk),
            ("high_risk", &self.high_risk),
        ]
    }

    /// Every template outside the preamble and negation frames.
    fn body_templates(&self) -> Vec<&String> {
        let mut all: Vec<&String> = Vec::new();
        all.extend(&self.normal);
        all.extend(&self.detail);
        all.extend(&self.hapax);
        all.extend(&self.boilerplate);
        all.extend(&self.collocation.templates);
        for (_, c) in self.classes() {
            all.extend(&c.key);
            all.extend(&c.extra);
            all.extend(&c.impression);
        }
        all
    }

    /// Named slots reachable from `template`, following fillers.
    fn reachable_slots(&self, template: &str) -> BTreeSet<String> {
        let mut seen = BTreeSet::new();
        let mut stack = vec![template.to_string()];
        while let Some(t) = stack.pop() {
            for p in parse_template(&t).unwrap_or_default() {
                if let Piece::Slot(name) = p {
                    if seen.insert(name.clone()) {
                        if let Some(fillers) = self.slots.get(&name) {
                            stack.extend(fillers.iter().cloned());
                        }
                    }
                }
            }
        }
        seen
    }

    fn literal_words(&self, template: &str) -> Vec<String> {
        parse_template(template)
            .unwrap_or_default()
            .into_iter()
            .filter_map(|p| match p {
                Piece::Text(t) => Some(words(&t)),
                _ => None,
            })
            .flatten()
            .collect()
    }

    /// Every word that templates, fillers and names can produce literally.
    pub(crate) fn template_words(&self) -> HashSet<String> {
        let mut texts: Vec<&String> = self.body_templates();
        texts.extend(&self.preamble);
        texts.extend(&self.negation.frames);
        texts.extend(&self.negation.cues);
        texts.extend(&self.negation.general);
        texts.extend(&self.negation.bleed);
        texts.extend(self.slots.values().flatten());
        texts.extend(self.synonym_groups.iter().flatten());
        texts.extend(&self.first_names);
        texts.extend(&self.last_names);
        let mut set: HashSet<String> = texts.iter().flat_map(|t| self.literal_words(t)).collect();
        set.insert(self.collocation.first.to_lowercase());
        set.insert(self.collocation.second.to_lowercase());
        set
    }

    /// Filler pseudo-words in a fixed shuffled order (rank order for Zipf draws).
    pub fn lexicon_words(&self) -> Vec<String> {
        let taken = self.template_words();
        let mut seen = HashSet::new();
        let mut out = Vec::new();
        for p in &self.lexicon.prefixes {
            for r in &self.lexicon.roots {
                for s in &self.lexicon.suffixes {
                    let w = format!("{p}{r}{s}").to_lowercase();
                    if !taken.contains(&w) && seen.insert(w.clone()) {
                        out.push(w);
                    }
                }
            }
        }
        out.shuffle(&mut ChaCha8Rng::seed_from_u64(0x1e71c0));
        out
    }

    /// Checks structure, slot references and the class-marker invariants.
    pub fn validate(&self) -> Result<()> {
        let err = |m: String| Err(Error::Validation(m));
        // placeholders resolve
        let mut all: Vec<&String> = self.body_templates();
        all.extend(&self.preamble);
        all.extend(self.slots.values().flatten());
        for t in &all {
            for p in parse_template(t)? {
                match p {
                    Piece::Slot(s) if s == "cue" || s == "targets" => {
                        return err(format!("{{{s}}} is only valid in negation frames: {t:?}"));
                    }
                    Piece::Slot(s) if !SPECIAL_SLOTS.contains(&s.as_str()) && !self.slots.contains_key(&s) => {
                        return err(format!("unknown slot {{{s}}} in {t:?}"));
                    }
                    _ => {}
                }
            }
        }
        for (name, fillers) in &self.slots {
            if fillers.is_empty() {
                return err(format!("slot {name} has no fillers"));
            }
            if SPECIAL_SLOTS.contains(&name.as_str()) {
                return err(format!("slot {name} shadows a generated slot"));
            }
            if fillers.iter().any(|f| self.reachable_slots(f).contains(name)) {
                return err(format!("slot {name} refers to itself"));
            }
        }
        for (name, s) in &self.slot_zipf {
            if !self.slots.contains_key(name) || !(s.is_finite() && *s > 0.0) {
                return err(format!("bad Zipf exponent for slot {name}"));
            }
        }
        for required in [BLEED_SLOT, HEDGE_SLOT] {
            if !self.slots.contains_key(required) {
                return err(format!("slot {required} is required"));
            }
        }

        // synonym groups: single words, disjoint, never used literally
        let mut members = HashSet::new();
        for g in &self.synonym_groups {
            if g.len() < 2 {
                return err(format!("synonym group {g:?} needs two or more words"));
            }
            for w in g {
                if words(w) != [w.clone()] {
                    return err(format!("synonym {w:?} must be one lowercase word"));
                }
                if !members.insert(w.clone()) {
                    return err(format!("synonym {w:?} is in two groups"));
                }
            }
        }
        let mut texts = all.clone();
        texts.extend(&self.negation.frames);
        texts.extend(&self.negation.general);
        texts.extend(&self.negation.bleed);
        for t in &texts {
            for p in parse_template(t)? {
                if let Piece::Synonym(w) = &p {
                    if !members.contains(w) {
                        return err(format!("{{~{w}}} names no synonym group"));
                    }
                }
            }
            if let Some(w) = self.literal_words(t).into_iter().find(|w| members.contains(w)) {
                return err(format!("synonym {w:?} used literally in {t:?}"));
            }
        }

        // negation cues only inside negation clauses
        let cue_words: Vec<Vec<String>> = self.negation.cues.iter().map(|c| words(c)).collect();
        if cue_words.iter().any(Vec::is_empty) || cue_words.is_empty() {
            return err("negation cues must be non-empty".into());
        }
        let has_cue = |ws: &[String]| (0..ws.len()).any(|i| cue_words.iter().any(|c| ws[i..].starts_with(c)));
        let mut body: Vec<String> = self.body_templates().into_iter().cloned().collect();
        let body_slots: BTreeSet<String> = body.iter().flat_map(|t| self.reachable_slots(t)).collect();
        for s in &body_slots {
            if let Some(f) = self.slots.get(s) {
                body.extend(f.iter().cloned());
            }
        }
        for t in body.iter().filter(|t| !self.boilerplate.contains(t)) {
            if has_cue(&self.literal_words(t)) {
                return err(format!("negation cue outside a negation clause: {t:?}"));
            }
        }

        // negation targets and frames
        let stopwords = CondenserConfig::default().stopwords;
        let neg = &self.negation;
        if neg.max_targets < 1 || neg.frames.is_empty() || neg.general.is_empty() || neg.bleed.is_empty() {
            return err("negation needs frames, general and bleed targets, max_targets >= 1".into());
        }
        for t in neg.general.iter().chain(&neg.bleed) {
            let ws = words(t);
            if ws.is_empty()
                || ws.join(" ") != t.as_str()
                || ws.iter().any(|w| stopwords.contains(w) || w == "or" || w == "and")
                || has_cue(&ws)
            {
                return err(format!("negation target {t:?} must be plain non-stop words"));
            }
        }
        for f in &neg.frames {
            let pieces = parse_template(f)?;
            let at = pieces
                .iter()
                .position(|p| *p == Piece::Slot("targets".into()))
                .ok_or_else(|| Error::Validation(format!("frame {f:?} lacks {{targets}}")))?;
            if at + 1 != pieces.len() {
                return err(format!("{{targets}} must end frame {f:?}"));
            }
            let before_cue = matches!(pieces.get(at.wrapping_sub(2)), Some(Piece::Slot(s)) if s == "cue");
            let head = self.literal_words(&f[..f.find("{targets}").unwrap()]);
            if !before_cue && !cue_words.iter().any(|c| head.ends_with(c)) {
                return err(format!("frame {f:?} has no cue before {{targets}}"));
            }
            for p in &pieces {
                if let Piece::Slot(s) = p {
                    if s != "cue" && s != "targets" {
                        return err(format!("frame {f:?} may only use {{cue}}, {{targets}} and synonyms"));
                    }
                }
            }
        }

        // class markers
        let mentions = |t: &str, slot: &str| self.reachable_slots(t).contains(slot);
        let neutral = |name: &str, list: &[String]| -> Result<()> {
            for t in list {
                if mentions(t, BLEED_SLOT) || mentions(t, HEDGE_SLOT) {
                    return err(format!("{name} template may not mention bleed or hedge: {t:?}"));
                }
            }
            Ok(())
        };
        neutral("normal", &self.normal)?;
        neutral("detail", &self.detail)?;
        neutral("hapax", &self.hapax)?;
        neutral("boilerplate", &self.boilerplate)?;
        neutral("collocation", &self.collocation.templates)?;
        neutral("preamble", &self.preamble)?;
        for (name, c) in self.classes() {
            check_range(&format!("{name}.key"), c.key_count, c.key.len(), false)?;
            check_range(&format!("{name}.extra"), c.extra_count, c.extra.len(), true)?;
            check_range(
                &format!("{name}.impression"),
                c.impression_count,
                c.impression.len(),
                true,
            )?;
            if c.negation_count[0] > c.negation_count[1] {
                return err(format!("{name}.negation_count is reversed"));
            }
            neutral(&format!("{name}.extra"), &c.extra)?;
            if name != "no_risk" && c.impression.iter().chain(&c.key).any(|t| t.contains("{negbleed}")) {
                return err(format!("{name} may not negate bleeding"));
            }
        }
        neutral("no_risk.key", &self.no_risk.key)?;
        neutral("no_risk.impression", &self.no_risk.impression)?;
        let hi = &self.high_risk;
        if hi.key_count[0] < 1
            || hi
                .key
                .iter()
                .any(|t| !mentions(t, BLEED_SLOT) || mentions(t, HEDGE_SLOT))
        {
            return err("every report of high_risk needs key sentences with {bleed} and no {hedge}".into());
        }
        if hi.impression.iter().any(|t| mentions(t, HEDGE_SLOT)) {
            return err("high_risk impressions may not hedge".into());
        }
        let med = &self.medium_risk;
        if med.key_count[0] < 1
            || med
                .key
                .iter()
                .any(|t| !mentions(t, BLEED_SLOT) || !mentions(t, HEDGE_SLOT))
        {
            return err("every report of medium_risk needs key sentences with {hedge} and {bleed}".into());
        }
        if med
            .impression
            .iter()
            .any(|t| mentions(t, BLEED_SLOT) && !mentions(t, HEDGE_SLOT))
        {
            return err("medium_risk impressions must hedge every bleed mention".into());
        }

        check_range("normal", self.normal_count, self.normal.len(), true)?;
        check_range("detail", self.detail_count, self.detail.len(), false)?;
        if self.hapax.is_empty() || self.first_names.is_empty() || self.last_names.is_empty() {
            return err("hapax templates and clinician names are required".into());
        }

        // collocation pair must be the only place its first word occurs
        let col = &self.collocation;
        if !(0.0..=1.0).contains(&col.fraction) || col.templates.is_empty() {
            return err("collocation fraction must lie in [0, 1] with templates".into());
        }
        if words(&col.first) != [col.first.clone()] || words(&col.second) != [col.second.clone()] {
            return err("collocation words must be single lowercase words".into());
        }
        if stopwords.contains(&col.first) || stopwords.contains(&col.second) {
            return err("collocation words may not be stop words".into());
        }
        let literal_first = all
            .iter()
            .copied()
            .chain(&neg.general)
            .chain(&neg.bleed)
            .any(|t| self.literal_words(t).contains(&col.first));
        if literal_first {
            return err(format!("{:?} may only appear in the planted pair", col.first));
        }
        for t in &col.templates {
            if !parse_template(t)?.contains(&Piece::Slot("pair".into())) {
                return err(format!("collocation template {t:?} lacks {{pair}}"));
            }
        }

        if !(self.lexicon.zipf.is_finite() && self.lexicon.zipf > 0.0) {
            return err("lexicon Zipf exponent must be positive".into());
        }
        if self.lexicon_words().is_empty() {
            return err("lexicon is empty".into());
        }
        let f = self.lexicon.topic_fraction;
        if !(0.0..0.5).contains(&f) {
            return err("lexicon topic fraction must lie in [0, 0.5)".into());
        }
        if f > 0.0 && (self.lexicon_words().len() as f64 * f) < 1.0 {
            return err("lexicon topics are empty".into());
        }
        for (name, ct) in self.classes() {
            let [a, c] = ct.topic_mix;
            if !(a >= 0.0 && c >= 0.0 && a + c <= 1.0) {
                return err(format!("{name}: topic mix must be non-negative and sum to at most 1"));
            }
            if f == 0.0 && a + c > 0.0 {
                return err(format!("{name}: topic mix needs a positive lexicon topic fraction"));
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn builtin_templates_validate() {
        TemplateSet::builtin().validate().unwrap();
    }

    #[test]
    fn placeholder_parsing() {
        assert_eq!(
            parse_template("A {x} b {~new}.").unwrap(),
            [
                Piece::Text("A ".into()),
                Piece::Slot("x".into()),
                Piece::Text(" b ".into()),
                Piece::Synonym("new".into()),
                Piece::Text(".".into()),
            ]
        );
        assert!(parse_template("open {x").is_err());
        assert!(parse_template("close x}").is_err());
    }

    #[test]
    fn literal_synonym_rejected() {
        let mut t = TemplateSet::builtin();
        t.normal.push("A new finding.".into());
        assert!(t.validate().is_err());
    }

    #[test]
    fn stray_cue_rejected() {
        let mut t = TemplateSet::builtin();
        t.normal.push("There is no change.".into());
        assert!(t.validate().is_err());
    }

    #[test]
    fn unhedged_medium_rejected() {
        let mut t = TemplateSet::builtin();
        t.medium_risk.key.push("{bleed} in the {location}.".into());
        assert!(t.validate().is_err());
    }

    #[test]
    fn lexicon_avoids_template_words() {
        let t = TemplateSet::builtin();
        let taken = t.template_words();
        let lex = t.lexicon_words();
        assert!(lex.len() > 1000);
        assert!(lex.iter().all(|w| !taken.contains(w)));
    }
}
