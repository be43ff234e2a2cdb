//! Cross-validated search over embedding window and dimension.

use std::fmt::Write as _;
use std::path::Path;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{evaluate, Classifier, LabeledVector, RiskClass};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum GridMode {
    /// Every (window, dim) pair.
    Cartesian,
    /// Windows at the first dimension, then dimensions at the first window.
    Independent,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridSearchSpec {
    pub windows: Vec<usize>,
    pub dims: Vec<usize>,
    pub folds: usize,
    pub classifier: Classifier,
    pub seed: u64,
    pub mode: GridMode,
}

impl GridSearchSpec {
    pub fn validate(&self) -> Result<()> {
        if self.windows.is_empty() || self.dims.is_empty() {
            return Err(Error::Config("grid candidate lists must be non-empty".into()));
        }
        if self.folds < 2 {
            return Err(Error::Config("folds must be >= 2".into()));
        }
        Ok(())
    }

    pub fn cells(&self) -> Vec<(usize, usize)> {
        let mut cells = Vec::new();
        match self.mode {
            GridMode::Cartesian => {
                for &w in &self.windows {
                    for &d in &self.dims {
                        cells.push((w, d));
                    }
                }
            }
            GridMode::Independent => {
                for &w in &self.windows {
                    cells.push((w, self.dims[0]));
                }
                for &d in &self.dims {
                    cells.push((self.windows[0], d));
                }
            }
        }
        let mut seen = std::collections::HashSet::new();
        cells.retain(|c| seen.insert(*c));
        cells
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GridCell {
    pub window: usize,
    pub dim: usize,
    pub mean_f1: f64,
    /// Sample standard deviation over folds.
    pub std_f1: f64,
    pub fold_f1: Vec<f64>,
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GridResult {
    pub best_window: usize,
    pub best_dim: usize,
    pub table: Vec<GridCell>,
}

/// Weighted F1 on each of `folds` seeded folds.
pub fn cross_validate(data: &[LabeledVector], folds: usize, classifier: &Classifier, seed: u64) -> Result<Vec<f64>> {
    if folds < 2 || folds > data.len() {
        return Err(Error::Config(format!("folds = {folds} must lie in 2..={}", data.len())));
    }
    let mut order: Vec<usize> = (0..data.len()).collect();
    order.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    let mut fold_of = vec![0usize; data.len()];
    for (pos, &i) in order.iter().enumerate() {
        fold_of[i] = pos % folds;
    }
    (0..folds)
        .map(|f| {
            let train: Vec<LabeledVector> = (0..data.len())
                .filter(|&i| fold_of[i] != f)
                .map(|i| data[i].clone())
                .collect();
            let held: Vec<usize> = (0..data.len()).filter(|&i| fold_of[i] == f).collect();
            let queries: Vec<Vec<f64>> = held.iter().map(|&i| data[i].features.clone()).collect();
            let truth: Vec<RiskClass> = held.iter().map(|&i| data[i].class).collect();
            let pred = classifier.fit_predict(&train, &queries)?;
            Ok(evaluate(&pred, &truth)?.weighted_f1)
        })
        .collect()
}

/// Runs every cell of the grid. `featurize(window, dim)` must return one
/// feature vector per entry of `labels`, in order. Cells run in parallel and
/// are reported in grid order; a failing cell is recorded and skipped.
pub fn grid_search<F>(ids: &[String], labels: &[RiskClass], spec: &GridSearchSpec, featurize: F) -> Result<GridResult>
where
    F: Fn(usize, usize) -> Result<Vec<Vec<f64>>> + Sync,
{
    spec.validate()?;
    if ids.len() != labels.len() {
        return Err(Error::Validation("ids and labels differ in length".into()));
    }
    let cells = spec.cells();
    let table: Vec<GridCell> = cells
        .par_iter()
        .map(|&(window, dim)| {
            let run = || -> Result<Vec<f64>> {
                let features = featurize(window, dim)?;
                if features.len() != labels.len() {
                    return Err(Error::Validation(format!(
                        "featurizer returned {} rows for {} labels",
                        features.len(),
                        labels.len()
                    )));
                }
                let data: Vec<LabeledVector> = features
                    .into_iter()
                    .zip(ids.iter().zip(labels))
                    .map(|(f, (id, &c))| LabeledVector::new(id.clone(), f, c))
                    .collect();
                cross_validate(&data, spec.folds, &spec.classifier, spec.seed)
            };
            match run() {
                Ok(fold_f1) => {
                    let (mean_f1, std_f1) = mean_std(&fold_f1);
                    GridCell {
                        window,
                        dim,
                        mean_f1,
                        std_f1,
                        fold_f1,
                        error: None,
                    }
                }
                Err(e) => {
                    log::warn!("grid cell window={window} dim={dim} failed: {e}");
                    GridCell {
                        window,
                        dim,
                        mean_f1: f64::NAN,
                        std_f1: f64::NAN,
                        fold_f1: Vec::new(),
                        error: Some(e.to_string()),
                    }
                }
            }
        })
        .collect();
    let best = table
        .iter()
        .filter(|c| c.error.is_none())
        .fold(None::<&GridCell>, |b, c| match b {
            Some(b) if b.mean_f1 >= c.mean_f1 => Some(b),
            _ => Some(c),
        })
        .ok_or_else(|| Error::Validation("every grid cell failed".into()))?;
    Ok(GridResult {
        best_window: best.window,
        best_dim: best.dim,
        table,
    })
}

fn mean_std(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    if xs.len() < 2 {
        return (mean, 0.0);
    }
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, var.sqrt())
}

/// `window<TAB>dim<TAB>mean_f1<TAB>std_f1`, failed cells omitted.
pub fn write_grid_tsv(result: &GridResult, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let mut out = String::from("window\tdim\tmean_f1\tstd_f1\n");
    for c in result.table.iter().filter(|c| c.error.is_none()) {
        let _ = writeln!(out, "{}\t{}\t{:.6}\t{:.6}", c.window, c.dim, c.mean_f1, c.std_f1);
    }
    std::fs::write(path, out).map_err(|e| Error::io(path, e))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::classify::Distance;

    fn spec(windows: Vec<usize>, dims: Vec<usize>, mode: GridMode) -> GridSearchSpec {
        GridSearchSpec {
            windows,
            dims,
            folds: 2,
            classifier: Classifier::Knn {
                k: 1,
                distance: Distance::Euclidean,
            },
            seed: 0,
            mode,
        }
    }

    #[test]
    fn cell_enumeration() {
        assert_eq!(
            spec(vec![1, 2], vec![10, 20], GridMode::Cartesian).cells(),
            [(1, 10), (1, 20), (2, 10), (2, 20)]
        );
        assert_eq!(
            spec(vec![1, 2], vec![10, 20], GridMode::Independent).cells(),
            [(1, 10), (2, 10), (1, 20)]
        );
    }

    #[test]
    fn single_cell_and_failures() {
        let ids: Vec<String> = (0..6).map(|i| i.to_string()).collect();
        let labels: Vec<RiskClass> = (0..6).map(|i| RiskClass::ALL[i % 2 * 2]).collect();
        let feats = |_w: usize, d: usize| -> Result<Vec<Vec<f64>>> {
            if d == 99 {
                return Err(Error::Validation("boom".into()));
            }
            Ok((0..6).map(|i| vec![(i % 2) as f64]).collect())
        };
        let r = grid_search(&ids, &labels, &spec(vec![3], vec![5], GridMode::Cartesian), feats).unwrap();
        assert_eq!((r.best_window, r.best_dim), (3, 5));
        assert_eq!(r.table[0].mean_f1, 1.0);
        let r = grid_search(&ids, &labels, &spec(vec![3], vec![99, 5], GridMode::Cartesian), feats).unwrap();
        assert!(r.table[0].error.is_some());
        assert_eq!(r.best_dim, 5);
    }
}
