use crate::classify::RiskClass;

use super::templates::{words, TemplateSet, BLEED_SLOT, HEDGE_SLOT};

/// Rule-based class recovery from raw report text.
///
/// A sentence mentions bleeding positively when a bleed phrase occurs with no
/// negation cue before it. Any such sentence that also holds a hedge phrase
/// makes the report medium risk; otherwise any positive mention makes it high
/// risk; otherwise it is no risk.
#[derive(Debug, Clone)]
pub struct ClassOracle {
    bleed: Vec<Vec<String>>,
    hedge: Vec<Vec<String>>,
    cues: Vec<Vec<String>>,
}

fn find(ws: &[String], phrase: &[String]) -> Option<usize> {
    (0..ws.len()).find(|&i| ws[i..].starts_with(phrase))
}

impl ClassOracle {
    pub fn new(templates: &TemplateSet) -> Self {
        let phrases = |slot: &str| -> Vec<Vec<String>> {
            templates
                .slots
                .get(slot)
                .map(|f| f.iter().map(|p| words(p)).collect())
                .unwrap_or_default()
        };
        ClassOracle {
            bleed: phrases(BLEED_SLOT),
            hedge: phrases(HEDGE_SLOT),
            cues: templates.negation.cues.iter().map(|c| words(c)).collect(),
        }
    }

    pub fn classify(&self, text: &str) -> RiskClass {
        let mut high = false;
        for sentence in text.split(['.', '\n']) {
            let ws = words(sentence);
            let Some(at) = self.bleed.iter().filter_map(|b| find(&ws, b)).min() else {
                continue;
            };
            let negated = self.cues.iter().any(|c| find(&ws[..at], c).is_some());
            if negated {
                continue;
            }
            if self.hedge.iter().any(|h| find(&ws, h).is_some()) {
                return RiskClass::MediumRisk;
            }
            high = true;
        }
        if high {
            RiskClass::HighRisk
        } else {
            RiskClass::NoRisk
        }
    }
}
