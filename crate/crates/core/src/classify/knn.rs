use serde::{Deserialize, Serialize};

use super::{LabeledVector, RiskClass};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Distance {
    Euclidean,
    /// `1 - cos`, with zero vectors treated as orthogonal to everything.
    Cosine,
}

impl Distance {
    pub fn between(self, a: &[f64], b: &[f64]) -> f64 {
        match self {
            Distance::Euclidean => a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt(),
            Distance::Cosine => {
                let (mut dot, mut na, mut nb) = (0.0, 0.0, 0.0);
                for (x, y) in a.iter().zip(b) {
                    dot += x * y;
                    na += x * x;
                    nb += y * y;
                }
                if na == 0.0 || nb == 0.0 {
                    1.0
                } else {
                    1.0 - dot / (na.sqrt() * nb.sqrt())
                }
            }
        }
    }
}

/// Majority class among the `k` nearest training points. Distance ties go
/// to the earlier training point; vote ties go to the class of the nearest
/// neighbor among the tied classes.
pub fn knn_predict(train: &[LabeledVector], query: &[f64], k: usize, distance: Distance) -> Result<RiskClass> {
    if train.is_empty() {
        return Err(Error::Validation("KNN needs a non-empty training set".into()));
    }
    if k == 0 || k > train.len() {
        return Err(Error::Config(format!("k = {k} must lie in 1..={}", train.len())));
    }
    let mut d: Vec<(f64, usize)> = train
        .iter()
        .enumerate()
        .map(|(i, v)| (distance.between(&v.features, query), i))
        .collect();
    if k < d.len() {
        d.select_nth_unstable_by(k - 1, |a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
        d.truncate(k);
    }
    d.sort_unstable_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
    let mut votes = [0usize; 3];
    for &(_, i) in &d {
        votes[train[i].class.index()] += 1;
    }
    let best = *votes.iter().max().unwrap();
    let winner = d
        .iter()
        .map(|&(_, i)| train[i].class)
        .find(|c| votes[c.index()] == best)
        .unwrap();
    Ok(winner)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pts() -> Vec<LabeledVector> {
        vec![
            LabeledVector::new("a", vec![0.0, 0.0], RiskClass::NoRisk),
            LabeledVector::new("b", vec![1.0, 0.0], RiskClass::HighRisk),
            LabeledVector::new("c", vec![0.0, 3.0], RiskClass::HighRisk),
            LabeledVector::new("d", vec![5.0, 5.0], RiskClass::MediumRisk),
        ]
    }

    #[test]
    fn one_nearest_on_training_point() {
        for p in pts() {
            assert_eq!(
                knn_predict(&pts(), &p.features, 1, Distance::Euclidean).unwrap(),
                p.class
            );
        }
    }

    #[test]
    fn all_points_give_global_majority() {
        assert_eq!(
            knn_predict(&pts(), &[5.0, 5.0], 4, Distance::Euclidean).unwrap(),
            RiskClass::HighRisk
        );
    }

    #[test]
    fn vote_tie_goes_to_nearest() {
        // k = 2 near "a": one NoRisk, one HighRisk; "a" is nearer
        assert_eq!(
            knn_predict(&pts(), &[0.1, 0.0], 2, Distance::Euclidean).unwrap(),
            RiskClass::NoRisk
        );
    }

    #[test]
    fn bad_k_and_empty_train() {
        assert!(knn_predict(&pts(), &[0.0, 0.0], 0, Distance::Euclidean).is_err());
        assert!(knn_predict(&pts(), &[0.0, 0.0], 5, Distance::Euclidean).is_err());
        assert!(knn_predict(&[], &[0.0], 1, Distance::Euclidean).is_err());
    }

    #[test]
    fn cosine_distance() {
        assert!((Distance::Cosine.between(&[1.0, 0.0], &[0.0, 2.0]) - 1.0).abs() < 1e-15);
        assert!(Distance::Cosine.between(&[1.0, 1.0], &[2.0, 2.0]).abs() < 1e-15);
    }
}
