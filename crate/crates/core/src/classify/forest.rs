//! Random forest of CART trees with Gini impurity.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{check_features, class_counts, LabeledVector, RiskClass};
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ForestConfig {
    pub n_trees: usize,
    /// Features drawn per split; `None` means `floor(sqrt(d))`.
    pub max_features: Option<usize>,
    pub min_samples_leaf: usize,
    pub max_depth: Option<usize>,
    pub bootstrap: bool,
    pub seed: u64,
}

impl Default for ForestConfig {
    fn default() -> Self {
        ForestConfig {
            n_trees: 100,
            max_features: None,
            min_samples_leaf: 1,
            max_depth: None,
            bootstrap: true,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
enum Node {
    Leaf(RiskClass),
    Split {
        feature: usize,
        threshold: f64,
        left: usize,
        right: usize,
    },
}

#[derive(Debug, Clone, PartialEq)]
struct Tree {
    nodes: Vec<Node>,
}

impl Tree {
    fn predict(&self, x: &[f64]) -> RiskClass {
        let mut i = 0;
        loop {
            match self.nodes[i] {
                Node::Leaf(c) => return c,
                Node::Split {
                    feature,
                    threshold,
                    left,
                    right,
                } => i = if x[feature] <= threshold { left } else { right },
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ForestModel {
    trees: Vec<Tree>,
    n_features: usize,
    constant: Option<RiskClass>,
}

impl ForestModel {
    pub fn n_trees(&self) -> usize {
        self.trees.len()
    }

    pub fn n_features(&self) -> usize {
        self.n_features
    }

    /// Set when the training data held a single class.
    pub fn constant(&self) -> Option<RiskClass> {
        self.constant
    }
}

/// Trains `n_trees` trees in parallel. Tree `t` draws its bootstrap sample
/// and feature subsets from a stream derived from `(seed, t)`, and the
/// training rows are put in a canonical order first, so the forest does not
/// depend on input order or thread scheduling.
pub fn rf_train(train: &[LabeledVector], config: &ForestConfig) -> Result<ForestModel> {
    if config.n_trees < 1 {
        return Err(Error::Config("n_trees must be >= 1".into()));
    }
    if config.min_samples_leaf < 1 {
        return Err(Error::Config("min_samples_leaf must be >= 1".into()));
    }
    if train.is_empty() {
        return Err(Error::Validation("random forest needs training data".into()));
    }
    let d = check_features(train)?;
    let counts = class_counts(train.iter().map(|v| v.class));
    if counts.iter().filter(|&&c| c > 0).count() == 1 {
        let only = train[0].class;
        log::warn!("training data holds only class {only}; using a constant classifier");
        return Ok(ForestModel {
            trees: Vec::new(),
            n_features: d,
            constant: Some(only),
        });
    }

    let mut rows: Vec<&LabeledVector> = train.iter().collect();
    rows.sort_by(|a, b| {
        a.features
            .iter()
            .zip(&b.features)
            .map(|(x, y)| x.total_cmp(y))
            .find(|o| o.is_ne())
            .unwrap_or(std::cmp::Ordering::Equal)
            .then(a.class.cmp(&b.class))
    });
    let x: Vec<&[f64]> = rows.iter().map(|r| r.features.as_slice()).collect();
    let y: Vec<RiskClass> = rows.iter().map(|r| r.class).collect();
    let mtry = config
        .max_features
        .unwrap_or_else(|| (d as f64).sqrt().floor() as usize)
        .clamp(1, d.max(1));

    let trees = (0..config.n_trees)
        .into_par_iter()
        .map(|t| {
            let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
            rng.set_stream(t as u64);
            let n = x.len();
            let mut sample: Vec<usize> = if config.bootstrap {
                (0..n).map(|_| rng.gen_range(0..n)).collect()
            } else {
                (0..n).collect()
            };
            let mut builder = Builder {
                x: &x,
                y: &y,
                d,
                mtry,
                min_leaf: config.min_samples_leaf,
                max_depth: config.max_depth,
                rng,
                nodes: Vec::new(),
                feats: (0..d).collect(),
                pairs: Vec::new(),
            };
            builder.build(&mut sample, 0);
            Tree { nodes: builder.nodes }
        })
        .collect();
    Ok(ForestModel {
        trees,
        n_features: d,
        constant: None,
    })
}

/// Majority vote over trees; equal votes go to the lower class.
pub fn rf_predict(model: &ForestModel, x: &[f64]) -> Result<RiskClass> {
    if x.len() != model.n_features {
        return Err(Error::Validation(format!(
            "query has {} features, model expects {}",
            x.len(),
            model.n_features
        )));
    }
    if let Some(c) = model.constant {
        return Ok(c);
    }
    let votes = class_counts(model.trees.iter().map(|t| t.predict(x)));
    Ok(majority(&votes))
}

fn majority(counts: &[usize; 3]) -> RiskClass {
    let mut best = 0;
    for c in 1..3 {
        if counts[c] > counts[best] {
            best = c;
        }
    }
    RiskClass::ALL[best]
}

fn gini(counts: &[usize; 3], n: usize) -> f64 {
    if n == 0 {
        return 0.0;
    }
    let n = n as f64;
    1.0 - counts.iter().map(|&c| (c as f64 / n).powi(2)).sum::<f64>()
}

struct Builder<'a> {
    x: &'a [&'a [f64]],
    y: &'a [RiskClass],
    d: usize,
    mtry: usize,
    min_leaf: usize,
    max_depth: Option<usize>,
    rng: ChaCha8Rng,
    nodes: Vec<Node>,
    feats: Vec<usize>,
    pairs: Vec<(f64, RiskClass)>,
}

struct BestSplit {
    impurity: f64,
    feature: usize,
    threshold: f64,
}

impl Builder<'_> {
    fn build(&mut self, sample: &mut [usize], depth: usize) -> usize {
        let counts = class_counts(sample.iter().map(|&i| self.y[i]));
        let id = self.nodes.len();
        self.nodes.push(Node::Leaf(majority(&counts)));
        let n = sample.len();
        let pure = counts.iter().filter(|&&c| c > 0).count() <= 1;
        if pure || n < 2 * self.min_leaf || self.max_depth.is_some_and(|m| depth >= m) {
            return id;
        }
        let Some(best) = self.find_split(sample) else {
            return id;
        };
        // partition in place: rows going left first
        let mut mid = 0;
        for k in 0..n {
            if self.x[sample[k]][best.feature] <= best.threshold {
                sample.swap(k, mid);
                mid += 1;
            }
        }
        let (l, r) = sample.split_at_mut(mid);
        let left = self.build(l, depth + 1);
        let right = self.build(r, depth + 1);
        self.nodes[id] = Node::Split {
            feature: best.feature,
            threshold: best.threshold,
            left,
            right,
        };
        id
    }

    /// Examines random features until `mtry` have been tried and at least
    /// one valid split exists, or every feature has been tried.
    fn find_split(&mut self, sample: &[usize]) -> Option<BestSplit> {
        let mut best: Option<BestSplit> = None;
        for k in 0..self.d {
            let j = self.rng.gen_range(k..self.d);
            self.feats.swap(k, j);
            let f = self.feats[k];
            if let Some(s) = self.best_for_feature(sample, f) {
                if best.as_ref().is_none_or(|b| s.impurity < b.impurity) {
                    best = Some(s);
                }
            }
            if k + 1 >= self.mtry && best.is_some() {
                break;
            }
        }
        best
    }

    fn best_for_feature(&mut self, sample: &[usize], f: usize) -> Option<BestSplit> {
        self.pairs.clear();
        self.pairs.extend(sample.iter().map(|&i| (self.x[i][f], self.y[i])));
        self.pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
        let n = self.pairs.len();
        if self.pairs[0].0 == self.pairs[n - 1].0 {
            return None;
        }
        let total = class_counts(self.pairs.iter().map(|p| p.1));
        let mut left = [0usize; 3];
        let mut best: Option<(f64, usize)> = None;
        for p in 1..n {
            left[self.pairs[p - 1].1.index()] += 1;
            if self.pairs[p - 1].0 == self.pairs[p].0 || p < self.min_leaf || n - p < self.min_leaf {
                continue;
            }
            let right = [total[0] - left[0], total[1] - left[1], total[2] - left[2]];
            let imp = (p as f64 * gini(&left, p) + (n - p) as f64 * gini(&right, n - p)) / n as f64;
            if best.is_none_or(|(b, _)| imp < b) {
                best = Some((imp, p));
            }
        }
        best.map(|(impurity, p)| {
            let (a, b) = (self.pairs[p - 1].0, self.pairs[p].0);
            let mid = a + (b - a) / 2.0;
            BestSplit {
                impurity,
                feature: f,
                threshold: if mid < b { mid } else { a },
            }
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn lv(x: &[f64], c: RiskClass) -> LabeledVector {
        LabeledVector::new("", x.to_vec(), c)
    }

    #[test]
    fn single_tree_fits_separable_data() {
        let data: Vec<LabeledVector> = (0..20)
            .map(|i| {
                let c = if i < 10 { RiskClass::NoRisk } else { RiskClass::HighRisk };
                lv(&[i as f64, (i * 7 % 5) as f64], c)
            })
            .collect();
        let cfg = ForestConfig {
            n_trees: 1,
            bootstrap: false,
            ..Default::default()
        };
        let m = rf_train(&data, &cfg).unwrap();
        for v in &data {
            assert_eq!(rf_predict(&m, &v.features).unwrap(), v.class);
        }
    }

    #[test]
    fn xor_is_learned() {
        let data = vec![
            lv(&[0.0, 0.0], RiskClass::NoRisk),
            lv(&[1.0, 1.0], RiskClass::NoRisk),
            lv(&[0.0, 1.0], RiskClass::HighRisk),
            lv(&[1.0, 0.0], RiskClass::HighRisk),
        ];
        let m = rf_train(&data, &ForestConfig::default()).unwrap();
        for v in &data {
            assert_eq!(rf_predict(&m, &v.features).unwrap(), v.class);
        }
    }

    #[test]
    fn single_class_gives_constant_model() {
        let data = vec![lv(&[0.0], RiskClass::MediumRisk), lv(&[1.0], RiskClass::MediumRisk)];
        let m = rf_train(&data, &ForestConfig::default()).unwrap();
        assert_eq!(m.constant(), Some(RiskClass::MediumRisk));
        assert_eq!(rf_predict(&m, &[9.0]).unwrap(), RiskClass::MediumRisk);
    }

    #[test]
    fn wrong_width_query_is_error() {
        let data = vec![lv(&[0.0], RiskClass::NoRisk), lv(&[1.0], RiskClass::HighRisk)];
        let m = rf_train(&data, &ForestConfig::default()).unwrap();
        assert!(rf_predict(&m, &[0.0, 1.0]).is_err());
    }
}
