use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Architecture {
    Cbow,
    SkipGram,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Objective {
    NegativeSampling,
    HierarchicalSoftmax,
}

impl fmt::Display for Architecture {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Architecture::Cbow => "cbow",
            Architecture::SkipGram => "skip-gram",
        })
    }
}

impl FromStr for Architecture {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "cbow" => Ok(Architecture::Cbow),
            "skip-gram" | "skipgram" | "sg" => Ok(Architecture::SkipGram),
            _ => Err(Error::Config(format!("unknown architecture {s:?}"))),
        }
    }
}

impl fmt::Display for Objective {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Objective::NegativeSampling => "ns",
            Objective::HierarchicalSoftmax => "hs",
        })
    }
}

impl FromStr for Objective {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "ns" | "negative-sampling" => Ok(Objective::NegativeSampling),
            "hs" | "hierarchical-softmax" => Ok(Objective::HierarchicalSoftmax),
            _ => Err(Error::Config(format!("unknown objective {s:?}"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TrainConfig {
    pub architecture: Architecture,
    pub objective: Objective,
    pub window: usize,
    pub dim: usize,
    pub negatives: usize,
    pub epochs: usize,
    pub initial_learning_rate: f64,
    pub seed: u64,
    pub threads: usize,
    pub min_count: u64,
    /// Frequent-word subsampling threshold; `None` disables it.
    pub subsample: Option<f64>,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            architecture: Architecture::Cbow,
            objective: Objective::NegativeSampling,
            window: 5,
            dim: 100,
            negatives: 5,
            epochs: 5,
            initial_learning_rate: 0.025,
            seed: 1,
            threads: 1,
            min_count: 1,
            subsample: None,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::Config(m.to_string()));
        if self.window < 1 {
            return bad("window must be >= 1");
        }
        if self.dim < 2 {
            return bad("dim must be >= 2");
        }
        if self.objective == Objective::NegativeSampling && self.negatives < 1 {
            return bad("negative sampling needs negatives >= 1");
        }
        if self.epochs < 1 {
            return bad("epochs must be >= 1");
        }
        if !(self.initial_learning_rate.is_finite() && self.initial_learning_rate > 0.0) {
            return bad("initial_learning_rate must be positive");
        }
        if self.threads < 1 {
            return bad("threads must be >= 1");
        }
        if self.min_count < 1 {
            return bad("min_count must be >= 1");
        }
        if let Some(t) = self.subsample {
            if !(t.is_finite() && t > 0.0) {
                return bad("subsample threshold must be positive");
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_are_valid() {
        TrainConfig::default().validate().unwrap();
    }

    #[test]
    fn invalid_fields_rejected() {
        for cfg in [
            TrainConfig {
                window: 0,
                ..Default::default()
            },
            TrainConfig {
                dim: 1,
                ..Default::default()
            },
            TrainConfig {
                negatives: 0,
                ..Default::default()
            },
        ] {
            assert!(cfg.validate().is_err());
        }
        let hs = TrainConfig {
            negatives: 0,
            objective: Objective::HierarchicalSoftmax,
            ..Default::default()
        };
        hs.validate().unwrap();
    }

    #[test]
    fn names_round_trip() {
        for a in [Architecture::Cbow, Architecture::SkipGram] {
            assert_eq!(a.to_string().parse::<Architecture>().unwrap(), a);
        }
        for o in [Objective::NegativeSampling, Objective::HierarchicalSoftmax] {
            assert_eq!(o.to_string().parse::<Objective>().unwrap(), o);
        }
    }
}
