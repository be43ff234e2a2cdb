//! Risk-class prediction from document vectors or unigram counts.

mod forest;
mod grid;
mod knn;
mod metrics;
mod split;
mod unigram;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

pub use forest::{rf_predict, rf_train, ForestConfig, ForestModel};
pub use grid::{cross_validate, grid_search, write_grid_tsv, GridCell, GridMode, GridResult, GridSearchSpec};
pub use knn::{knn_predict, Distance};
pub use metrics::{evaluate, from_confusion, ClassMetrics, Metrics};
pub use split::{split_sizes, train_test_split, Split};
pub use unigram::{apply_tfidf, idf_weights, unigram_counts, unigram_features, UnigramVocabulary};

use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum RiskClass {
    NoRisk,
    MediumRisk,
    HighRisk,
}

impl RiskClass {
    pub const ALL: [RiskClass; 3] = [RiskClass::NoRisk, RiskClass::MediumRisk, RiskClass::HighRisk];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn from_index(i: usize) -> Option<Self> {
        Self::ALL.get(i).copied()
    }

    pub fn name(self) -> &'static str {
        match self {
            RiskClass::NoRisk => "NoRisk",
            RiskClass::MediumRisk => "MediumRisk",
            RiskClass::HighRisk => "HighRisk",
        }
    }
}

impl fmt::Display for RiskClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for RiskClass {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        RiskClass::ALL
            .into_iter()
            .find(|c| c.name().eq_ignore_ascii_case(s))
            .ok_or_else(|| Error::Validation(format!("unknown class {s:?}")))
    }
}

/// Collapses the five-level annotation: 1 is no risk, 2 to 4 medium, 5 high.
pub fn regroup_labels(label: u8) -> Result<RiskClass> {
    match label {
        1 => Ok(RiskClass::NoRisk),
        2..=4 => Ok(RiskClass::MediumRisk),
        5 => Ok(RiskClass::HighRisk),
        _ => Err(Error::Validation(format!("label {label} outside 1..=5"))),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LabeledVector {
    pub id: String,
    pub features: Vec<f64>,
    pub class: RiskClass,
}

impl LabeledVector {
    pub fn new(id: impl Into<String>, features: Vec<f64>, class: RiskClass) -> Self {
        LabeledVector {
            id: id.into(),
            features,
            class,
        }
    }
}

pub(crate) fn check_features(data: &[LabeledVector]) -> Result<usize> {
    let d = data.first().map_or(0, |v| v.features.len());
    for v in data {
        if v.features.len() != d {
            return Err(Error::Validation(format!(
                "{} has {} features, expected {d}",
                v.id,
                v.features.len()
            )));
        }
        if v.features.iter().any(|x| !x.is_finite()) {
            return Err(Error::Validation(format!("{} has non-finite features", v.id)));
        }
    }
    Ok(d)
}

/// Per-class counts indexed by [`RiskClass::index`].
pub fn class_counts(classes: impl IntoIterator<Item = RiskClass>) -> [usize; 3] {
    let mut c = [0; 3];
    for k in classes {
        c[k.index()] += 1;
    }
    c
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Classifier {
    RandomForest(ForestConfig),
    Knn { k: usize, distance: Distance },
}

impl Classifier {
    pub fn name(&self) -> String {
        match self {
            Classifier::RandomForest(c) => format!("random-forest({} trees)", c.n_trees),
            Classifier::Knn { k, distance } => format!("knn(k={k}, {distance:?})"),
        }
    }

    /// Trains on `train` and predicts each row of `test`.
    pub fn fit_predict(&self, train: &[LabeledVector], test: &[Vec<f64>]) -> Result<Vec<RiskClass>> {
        match self {
            Classifier::RandomForest(cfg) => {
                let model = rf_train(train, cfg)?;
                test.iter().map(|x| rf_predict(&model, x)).collect()
            }
            Classifier::Knn { k, distance } => test.iter().map(|x| knn_predict(train, x, *k, *distance)).collect(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn regrouping() {
        assert_eq!(regroup_labels(1).unwrap(), RiskClass::NoRisk);
        for l in 2..=4 {
            assert_eq!(regroup_labels(l).unwrap(), RiskClass::MediumRisk);
        }
        assert_eq!(regroup_labels(5).unwrap(), RiskClass::HighRisk);
        assert!(regroup_labels(0).is_err());
        assert!(regroup_labels(6).is_err());
    }

    #[test]
    fn class_names_round_trip() {
        for c in RiskClass::ALL {
            assert_eq!(c.name().parse::<RiskClass>().unwrap(), c);
            assert_eq!(RiskClass::from_index(c.index()), Some(c));
        }
    }
}
