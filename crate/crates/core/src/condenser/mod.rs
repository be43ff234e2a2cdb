//! Report condensing.
//!
//! Stage order is fixed: extract sections, clean, encode negation, prune rare
//! terms, then mine and apply collocations. Dictionary mapping
//! ([`crate::semdict`]) runs afterwards. Per-report steps are pure functions;
//! corpus-wide counting runs in parallel with order-independent merges.

mod clean;
mod collocation;
mod negation;
mod sections;

use std::collections::HashSet;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

pub use clean::{clean_text, lex, Boilerplate, BUILTIN_BOILERPLATE};
pub use collocation::{
    apply_collocations, apply_collocations_corpus, mine_collocations, prune_rare_terms, term_counts, CollocationTable,
};
pub use negation::{encode_negation, CueMatcher, BOUNDARY, COMMA};
pub use sections::{extract_sections, SectionExtract};

use crate::corpus::{CondensedReport, Report};
use crate::{Error, Result};

pub const BUILTIN_STOPWORDS: &str = include_str!("../../data/stopwords_en.txt");

pub const DEFAULT_NEGATION_CUES: [&str; 4] = ["no", "without", "negative for", "absent"];

#[derive(Debug, Clone)]
pub struct CondenserConfig {
    pub stopwords: HashSet<String>,
    pub boilerplate: Boilerplate,
    pub min_term_frequency: usize,
    pub collocation_min_count: usize,
    pub negation_cues: Vec<String>,
}

impl Default for CondenserConfig {
    fn default() -> Self {
        CondenserConfig {
            stopwords: clean::parse_stopwords(BUILTIN_STOPWORDS),
            boilerplate: Boilerplate::builtin(),
            min_term_frequency: 50,
            collocation_min_count: 500,
            negation_cues: DEFAULT_NEGATION_CUES.iter().map(|s| s.to_string()).collect(),
        }
    }
}

/// On-disk form of [`CondenserConfig`]. Missing keys take the defaults;
/// relative paths resolve against the config file's directory.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CondenserConfigFile {
    pub stopwords_path: Option<PathBuf>,
    pub min_term_frequency: Option<usize>,
    pub collocation_min_count: Option<usize>,
    pub negation_cues: Option<Vec<String>>,
    pub boilerplate_path: Option<PathBuf>,
}

fn read_to_string(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).map_err(|e| Error::io(path, e))
}

impl CondenserConfig {
    pub fn validate(&self) -> Result<()> {
        if self.min_term_frequency < 1 {
            return Err(Error::Config("min_term_frequency must be >= 1".into()));
        }
        if self.collocation_min_count < 1 {
            return Err(Error::Config("collocation_min_count must be >= 1".into()));
        }
        if let Some(c) = self
            .negation_cues
            .iter()
            .find(|c| c.trim().is_empty() || c.chars().any(char::is_uppercase))
        {
            return Err(Error::Config(format!("negation cue {c:?} must be non-empty lowercase")));
        }
        Ok(())
    }

    pub fn from_file_contents(file: CondenserConfigFile, base_dir: &Path) -> Result<Self> {
        let mut cfg = CondenserConfig::default();
        let resolve = |p: &PathBuf| {
            if p.is_absolute() {
                p.clone()
            } else {
                base_dir.join(p)
            }
        };
        if let Some(p) = &file.stopwords_path {
            cfg.stopwords = clean::parse_stopwords(&read_to_string(&resolve(p))?);
        }
        if let Some(p) = &file.boilerplate_path {
            cfg.boilerplate = Boilerplate::parse(&read_to_string(&resolve(p))?)?;
        }
        if let Some(v) = file.min_term_frequency {
            cfg.min_term_frequency = v;
        }
        if let Some(v) = file.collocation_min_count {
            cfg.collocation_min_count = v;
        }
        if let Some(v) = file.negation_cues {
            cfg.negation_cues = v;
        }
        cfg.validate()?;
        Ok(cfg)
    }

    /// Loads a TOML (or `.json`) config file.
    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = read_to_string(path)?;
        let file: CondenserConfigFile = if path.extension().is_some_and(|e| e == "json") {
            serde_json::from_str(&text).map_err(|e| Error::Config(e.to_string()))?
        } else {
            toml::from_str(&text).map_err(|e| Error::Config(e.to_string()))?
        };
        Self::from_file_contents(file, path.parent().unwrap_or(Path::new(".")))
    }
}

/// Per-report part of the pipeline: sections, cleaning and negation encoding.
pub fn condense_text(raw_text: &str, config: &CondenserConfig) -> (Vec<String>, bool) {
    let cues = CueMatcher::new(&config.negation_cues);
    condense_text_with(raw_text, config, &cues)
}

fn condense_text_with(raw_text: &str, config: &CondenserConfig, cues: &CueMatcher) -> (Vec<String>, bool) {
    let section = extract_sections(raw_text);
    let marked = clean::lex_with(&section.text, config, cues);
    let tokens = negation::encode_with(&marked, cues)
        .into_iter()
        .filter(|t| !config.stopwords.contains(t))
        .collect();
    (tokens, section.fallback)
}

/// Output of [`condense`].
#[derive(Debug, Clone)]
pub struct Condensed {
    pub reports: Vec<CondensedReport>,
    pub collocations: CollocationTable,
    /// Reports where neither FINDINGS nor IMPRESSION was found.
    pub fallback_ids: Vec<String>,
}

/// Runs the full condenser over a corpus. Output order follows input order.
pub fn condense(reports: &[Report], config: &CondenserConfig) -> Result<Condensed> {
    config.validate()?;
    let cues = CueMatcher::new(&config.negation_cues);
    let per_report: Vec<(Vec<String>, bool)> = reports
        .par_iter()
        .map(|r| condense_text_with(&r.text, config, &cues))
        .collect();

    let fallback_ids: Vec<String> = reports
        .iter()
        .zip(&per_report)
        .filter(|(_, (_, fb))| *fb)
        .map(|(r, _)| r.id.clone())
        .collect();
    for id in &fallback_ids {
        log::warn!("report {id}: no FINDINGS/IMPRESSION header, using full text");
    }

    let tokens: Vec<Vec<String>> = per_report.into_iter().map(|(t, _)| t).collect();
    let tokens = prune_rare_terms(tokens, config.min_term_frequency);
    let collocations = mine_collocations(&tokens, config.collocation_min_count);
    let tokens = apply_collocations_corpus(tokens, &collocations);

    let reports = reports
        .iter()
        .zip(tokens)
        .map(|(r, t)| CondensedReport::new(r.id.clone(), t, r.label))
        .collect();
    Ok(Condensed {
        reports,
        collocations,
        fallback_ids,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_config_validates() {
        CondenserConfig::default().validate().unwrap();
        // "it's" and "its" collapse once apostrophes are stripped
        assert_eq!(CondenserConfig::default().stopwords.len(), 178);
    }

    #[test]
    fn rejects_bad_config() {
        let cfg = CondenserConfig {
            min_term_frequency: 0,
            ..CondenserConfig::default()
        };
        assert!(cfg.validate().is_err());
        let cfg = CondenserConfig {
            negation_cues: vec!["No".into()],
            ..CondenserConfig::default()
        };
        assert!(cfg.validate().is_err());
    }

    #[test]
    fn condense_text_golden() {
        let cfg = CondenserConfig::default();
        let (tokens, fb) = condense_text(
            "HISTORY: fall. FINDINGS: No acute hemorrhage, infarction, or mass. IMPRESSION: Normal.",
            &cfg,
        );
        assert!(!fb);
        assert_eq!(tokens, ["no_acute_hemorrhage", "no_infarction", "no_mass", "normal"]);
    }

    #[test]
    fn config_file_overrides() {
        let dir = tempfile::tempdir().unwrap();
        std::fs::write(dir.path().join("stop.txt"), "the\nis\n").unwrap();
        let cfg_path = dir.path().join("condenser.toml");
        std::fs::write(
            &cfg_path,
            "stopwords_path = \"stop.txt\"\nmin_term_frequency = 3\nnegation_cues = [\"no\"]\n",
        )
        .unwrap();
        let cfg = CondenserConfig::load(&cfg_path).unwrap();
        assert_eq!(cfg.stopwords.len(), 2);
        assert_eq!(cfg.min_term_frequency, 3);
        assert_eq!(cfg.collocation_min_count, 500);
        assert_eq!(cfg.negation_cues, ["no"]);
    }

    #[test]
    fn unknown_config_key_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let cfg_path = dir.path().join("c.toml");
        std::fs::write(&cfg_path, "min_term_freq = 3\n").unwrap();
        assert!(matches!(CondenserConfig::load(&cfg_path), Err(Error::Config(_))));
    }
}
