//! Exact t-SNE: Gaussian affinities in the input space, a Student-t kernel
//! in 2-D, and momentum gradient descent on KL(P || Q) with early
//! exaggeration and per-coordinate gains.

mod affinity;
mod output;

use nalgebra::{DMatrix, SymmetricEigen};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

pub use affinity::{
    conditional_affinities, conditional_probabilities, jitter_duplicates, squared_distances, symmetrize,
    AffinityMatrix, Conditional, MAX_BISECTION_STEPS, PERPLEXITY_TOLERANCE,
};
pub use output::{read_projection_tsv, write_projection_svg, write_projection_tsv, ProjectedPoint};

use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ProjectionConfig {
    pub perplexity: f64,
    pub iterations: usize,
    pub learning_rate: f64,
    pub initial_momentum: f64,
    pub final_momentum: f64,
    /// Iteration at which momentum switches and exaggeration ends.
    pub exaggeration_iterations: usize,
    pub early_exaggeration: f64,
    pub min_gain: f64,
    pub seed: u64,
    /// Project inputs onto this many principal components first.
    pub pca_dims: Option<usize>,
}

impl Default for ProjectionConfig {
    fn default() -> Self {
        ProjectionConfig {
            perplexity: 30.0,
            iterations: 1000,
            learning_rate: 200.0,
            initial_momentum: 0.5,
            final_momentum: 0.8,
            exaggeration_iterations: 250,
            early_exaggeration: 12.0,
            min_gain: 0.01,
            seed: 1,
            pca_dims: None,
        }
    }
}

impl ProjectionConfig {
    pub fn validate(&self, n: usize) -> Result<()> {
        if n < 3 {
            return Err(Error::Validation(format!("t-SNE needs at least 3 points, got {n}")));
        }
        if !(self.perplexity > 1.0 && self.perplexity < (n - 1) as f64) {
            return Err(Error::Config(format!(
                "perplexity {} must lie strictly between 1 and N-1 = {}",
                self.perplexity,
                n - 1
            )));
        }
        if self.iterations < 250 {
            return Err(Error::Config("iterations must be >= 250".into()));
        }
        if !(self.learning_rate > 0.0 && self.early_exaggeration >= 1.0 && self.min_gain > 0.0) {
            return Err(Error::Config(
                "learning_rate and min_gain must be positive, early_exaggeration >= 1".into(),
            ));
        }
        if self.pca_dims == Some(0) {
            return Err(Error::Config("pca_dims must be >= 1".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Projection {
    pub coords: Vec<[f64; 2]>,
    /// KL(P || Q) at the start of each iteration, against the unexaggerated P.
    pub kl_trace: Vec<f64>,
}

/// Student-t numerators `1 / (1 + |y_i - y_j|²)` (zero diagonal) and their sum.
fn student_t(y: &[[f64; 2]]) -> (Vec<f64>, f64) {
    let n = y.len();
    let mut num = vec![0.0; n * n];
    num.par_chunks_mut(n).enumerate().for_each(|(i, row)| {
        for (j, out) in row.iter_mut().enumerate() {
            if i != j {
                let dx = y[i][0] - y[j][0];
                let dy = y[i][1] - y[j][1];
                *out = 1.0 / (1.0 + dx * dx + dy * dy);
            }
        }
    });
    let z = num.chunks(n).map(|r| r.iter().sum::<f64>()).sum();
    (num, z)
}

fn gradient_from(p: &AffinityMatrix, y: &[[f64; 2]], num: &[f64], z: f64, exaggeration: f64) -> Vec<[f64; 2]> {
    let n = y.len();
    (0..n)
        .into_par_iter()
        .map(|i| {
            let mut g = [0.0; 2];
            for j in 0..n {
                if i == j {
                    continue;
                }
                let w = num[i * n + j];
                let m = (exaggeration * p.get(i, j) - w / z) * w;
                g[0] += m * (y[i][0] - y[j][0]);
                g[1] += m * (y[i][1] - y[j][1]);
            }
            [4.0 * g[0], 4.0 * g[1]]
        })
        .collect()
}

fn kl_from(p: &AffinityMatrix, num: &[f64], z: f64) -> f64 {
    let n = p.len();
    (0..n)
        .map(|i| {
            let mut s = 0.0;
            for j in 0..n {
                let pij = p.get(i, j);
                if i != j && pij > 0.0 {
                    s += pij * (pij / (num[i * n + j] / z)).ln();
                }
            }
            s
        })
        .sum()
}

pub fn kl_divergence(p: &AffinityMatrix, y: &[[f64; 2]]) -> f64 {
    let (num, z) = student_t(y);
    kl_from(p, &num, z)
}

/// Gradient of KL(P || Q) with respect to each 2-D point.
pub fn kl_gradient(p: &AffinityMatrix, y: &[[f64; 2]]) -> Vec<[f64; 2]> {
    let (num, z) = student_t(y);
    gradient_from(p, y, &num, z, 1.0)
}

/// Projects rows of `x` onto their leading principal components.
pub fn pca(x: &[Vec<f64>], dims: usize) -> Result<Vec<Vec<f64>>> {
    let n = x.len();
    let d = x.first().map_or(0, Vec::len);
    if n == 0 || d == 0 {
        return Err(Error::Validation("PCA needs a non-empty matrix".into()));
    }
    if dims >= d {
        return Ok(x.to_vec());
    }
    let mut mean = vec![0.0; d];
    for row in x {
        for (m, v) in mean.iter_mut().zip(row) {
            *m += v / n as f64;
        }
    }
    let centered = DMatrix::from_fn(n, d, |i, j| x[i][j] - mean[j]);
    let cov = centered.transpose() * &centered / n as f64;
    let eig = SymmetricEigen::new(cov);
    let mut order: Vec<usize> = (0..d).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]).then(a.cmp(&b)));
    let basis = DMatrix::from_fn(d, dims, |r, c| eig.eigenvectors[(r, order[c])]);
    let projected = centered * basis;
    Ok((0..n).map(|i| (0..dims).map(|c| projected[(i, c)]).collect()).collect())
}

fn check_rows(x: &[Vec<f64>]) -> Result<()> {
    let d = x.first().map_or(0, Vec::len);
    if d == 0 {
        return Err(Error::Validation("input vectors are empty".into()));
    }
    for (i, row) in x.iter().enumerate() {
        if row.len() != d {
            return Err(Error::Validation(format!(
                "row {i} has {} values, expected {d}",
                row.len()
            )));
        }
        if row.iter().any(|v| !v.is_finite()) {
            return Err(Error::Validation(format!("row {i} is not finite")));
        }
    }
    Ok(())
}

pub fn run_tsne(x: &[Vec<f64>], config: &ProjectionConfig) -> Result<Projection> {
    config.validate(x.len())?;
    check_rows(x)?;
    let reduced;
    let input = match config.pca_dims {
        Some(k) => {
            reduced = pca(x, k)?;
            &reduced
        }
        None => x,
    };
    let p = conditional_affinities(input, config.perplexity)?;
    optimize(&p, config)
}

/// Gradient descent on a precomputed affinity matrix.
pub fn optimize(p: &AffinityMatrix, config: &ProjectionConfig) -> Result<Projection> {
    let n = p.len();
    config.validate(n)?;
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let normal = Normal::new(0.0, 1e-4).expect("valid normal");
    let mut y: Vec<[f64; 2]> = (0..n)
        .map(|_| [normal.sample(&mut rng), normal.sample(&mut rng)])
        .collect();
    center(&mut y);
    let mut update = vec![[0.0f64; 2]; n];
    let mut gains = vec![[1.0f64; 2]; n];
    let mut kl_trace = Vec::with_capacity(config.iterations);

    for it in 0..config.iterations {
        let early = it < config.exaggeration_iterations;
        let exaggeration = if early { config.early_exaggeration } else { 1.0 };
        let momentum = if early {
            config.initial_momentum
        } else {
            config.final_momentum
        };
        let (num, z) = student_t(&y);
        kl_trace.push(kl_from(p, &num, z));
        let grad = gradient_from(p, &y, &num, z, exaggeration);
        for i in 0..n {
            for c in 0..2 {
                let g = grad[i][c];
                gains[i][c] = if (g > 0.0) != (update[i][c] > 0.0) {
                    gains[i][c] + 0.2
                } else {
                    (gains[i][c] * 0.8).max(config.min_gain)
                };
                update[i][c] = momentum * update[i][c] - config.learning_rate * gains[i][c] * g;
                y[i][c] += update[i][c];
            }
        }
        center(&mut y);
        if y.iter().flatten().any(|v| !v.is_finite()) {
            return Err(Error::NonFiniteEmbedding(it));
        }
    }
    Ok(Projection { coords: y, kl_trace })
}

fn center(y: &mut [[f64; 2]]) {
    let n = y.len() as f64;
    let mut m = [0.0; 2];
    for p in y.iter() {
        m[0] += p[0];
        m[1] += p[1];
    }
    m[0] /= n;
    m[1] /= n;
    for p in y.iter_mut() {
        p[0] -= m[0];
        p[1] -= m[1];
    }
}

/// Mean silhouette coefficient of 2-D points under the given labels.
pub fn silhouette_score<L: PartialEq>(points: &[[f64; 2]], labels: &[L]) -> f64 {
    let n = points.len();
    let dist = |a: &[f64; 2], b: &[f64; 2]| ((a[0] - b[0]).powi(2) + (a[1] - b[1]).powi(2)).sqrt();
    let mut total = 0.0;
    for i in 0..n {
        let mut own = (0.0, 0usize);
        // per other label: (sum, count), keyed by first index carrying that label
        let mut others: Vec<(usize, f64, usize)> = Vec::new();
        for j in 0..n {
            if i == j {
                continue;
            }
            let d = dist(&points[i], &points[j]);
            if labels[j] == labels[i] {
                own.0 += d;
                own.1 += 1;
            } else if let Some(o) = others.iter_mut().find(|o| labels[o.0] == labels[j]) {
                o.1 += d;
                o.2 += 1;
            } else {
                others.push((j, d, 1));
            }
        }
        if own.1 == 0 || others.is_empty() {
            continue;
        }
        let a = own.0 / own.1 as f64;
        let b = others.iter().map(|o| o.1 / o.2 as f64).fold(f64::INFINITY, f64::min);
        total += (b - a) / a.max(b);
    }
    total / n as f64
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_match_reference_optimizer() {
        let c = ProjectionConfig::default();
        assert_eq!(
            (c.perplexity, c.iterations, c.learning_rate, c.early_exaggeration),
            (30.0, 1000, 200.0, 12.0)
        );
        assert!(c.validate(100).is_ok());
        assert!(c.validate(20).is_err());
        assert!(ProjectionConfig { iterations: 100, ..c }.validate(100).is_err());
    }

    #[test]
    fn silhouette_of_separated_clusters_is_high() {
        let pts = [[0.0, 0.0], [0.1, 0.0], [10.0, 0.0], [10.1, 0.0]];
        assert!(silhouette_score(&pts, &[0, 0, 1, 1]) > 0.9);
        assert!(silhouette_score(&pts, &[0, 1, 0, 1]) < 0.0);
    }

    #[test]
    fn pca_keeps_dominant_direction() {
        let x: Vec<Vec<f64>> = (0..10)
            .map(|i| vec![i as f64, 0.01 * ((i * 7) % 3) as f64, 0.0])
            .collect();
        let r = pca(&x, 1).unwrap();
        let spread = r.iter().map(|v| v[0]).fold(f64::NEG_INFINITY, f64::max)
            - r.iter().map(|v| v[0]).fold(f64::INFINITY, f64::min);
        assert!((spread - 9.0).abs() < 1e-3);
    }

    #[test]
    fn small_run_is_centered_and_finite() {
        let x: Vec<Vec<f64>> = (0..12).map(|i| vec![i as f64, (i % 3) as f64]).collect();
        let cfg = ProjectionConfig {
            perplexity: 3.0,
            iterations: 300,
            ..Default::default()
        };
        let r = run_tsne(&x, &cfg).unwrap();
        let mx: f64 = r.coords.iter().map(|p| p[0]).sum::<f64>() / 12.0;
        assert!(mx.abs() < 1e-8);
        assert!(r.kl_trace.iter().all(|k| k.is_finite() && *k >= 0.0));
    }
}
