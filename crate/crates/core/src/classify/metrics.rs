use serde::Serialize;

use super::RiskClass;
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ClassMetrics {
    pub class: RiskClass,
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    pub support: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Metrics {
    pub per_class: Vec<ClassMetrics>,
    pub weighted_precision: f64,
    pub weighted_recall: f64,
    pub weighted_f1: f64,
    pub accuracy: f64,
    /// Rows are true classes, columns predicted classes.
    pub confusion: [[usize; 3]; 3],
    /// Set when some ratio had a zero denominator and was reported as 0.
    pub zero_division: bool,
}

fn ratio(num: usize, den: usize, flag: &mut bool) -> f64 {
    if den == 0 {
        *flag = true;
        0.0
    } else {
        num as f64 / den as f64
    }
}

pub fn evaluate(predictions: &[RiskClass], truth: &[RiskClass]) -> Result<Metrics> {
    if predictions.len() != truth.len() {
        return Err(Error::Validation(format!(
            "{} predictions for {} true labels",
            predictions.len(),
            truth.len()
        )));
    }
    if truth.is_empty() {
        return Err(Error::Validation("nothing to evaluate".into()));
    }
    let mut confusion = [[0usize; 3]; 3];
    for (p, t) in predictions.iter().zip(truth) {
        confusion[t.index()][p.index()] += 1;
    }
    Ok(from_confusion(confusion))
}

/// Metrics of a confusion matrix (rows true, columns predicted).
pub fn from_confusion(confusion: [[usize; 3]; 3]) -> Metrics {
    let mut zero_division = false;
    let total: usize = confusion.iter().flatten().sum();
    let mut per_class = Vec::with_capacity(3);
    for c in RiskClass::ALL {
        let k = c.index();
        let tp = confusion[k][k];
        let support: usize = confusion[k].iter().sum();
        let predicted: usize = confusion.iter().map(|r| r[k]).sum();
        if support == 0 && predicted == 0 {
            per_class.push(ClassMetrics {
                class: c,
                precision: 0.0,
                recall: 0.0,
                f1: 0.0,
                support,
            });
            continue;
        }
        let precision = ratio(tp, predicted, &mut zero_division);
        let recall = ratio(tp, support, &mut zero_division);
        let f1 = if precision + recall > 0.0 {
            2.0 * precision * recall / (precision + recall)
        } else {
            0.0
        };
        per_class.push(ClassMetrics {
            class: c,
            precision,
            recall,
            f1,
            support,
        });
    }
    let weighted =
        |f: fn(&ClassMetrics) -> f64| per_class.iter().map(|m| m.support as f64 * f(m)).sum::<f64>() / total as f64;
    let correct: usize = (0..3).map(|k| confusion[k][k]).sum();
    Metrics {
        weighted_precision: weighted(|m| m.precision),
        weighted_recall: weighted(|m| m.recall),
        weighted_f1: weighted(|m| m.f1),
        accuracy: correct as f64 / total as f64,
        per_class,
        confusion,
        zero_division,
    }
}
