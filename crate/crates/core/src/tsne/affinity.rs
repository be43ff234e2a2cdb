use std::collections::HashMap;

use rayon::prelude::*;

use crate::{Error, Result};

pub const MAX_BISECTION_STEPS: usize = 200;
/// Absolute tolerance on each row's perplexity.
pub const PERPLEXITY_TOLERANCE: f64 = 1e-5;
const DUPLICATE_JITTER: f64 = 1e-10;

/// Symmetric joint probabilities `p_ij`, stored densely.
#[derive(Debug, Clone, PartialEq)]
pub struct AffinityMatrix {
    n: usize,
    p: Vec<f64>,
}

impl AffinityMatrix {
    pub fn from_vec(n: usize, p: Vec<f64>) -> Result<Self> {
        if p.len() != n * n {
            return Err(Error::Validation("affinity matrix must be N x N".into()));
        }
        Ok(AffinityMatrix { n, p })
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.p[i * self.n + j]
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.p[i * self.n..(i + 1) * self.n]
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.p
    }
}

/// Row-normalized conditional probabilities `p_{j|i}` with their precisions.
#[derive(Debug, Clone)]
pub struct Conditional {
    pub n: usize,
    pub p: Vec<f64>,
    /// Gaussian precision `1 / (2 σ_i²)` per row.
    pub beta: Vec<f64>,
    /// Achieved `exp(H(P_i))` per row, entropy in nats.
    pub perplexity: Vec<f64>,
}

pub fn squared_distances(x: &[Vec<f64>]) -> Vec<f64> {
    let n = x.len();
    let mut d = vec![0.0; n * n];
    d.par_chunks_mut(n.max(1)).enumerate().for_each(|(i, row)| {
        for (j, out) in row.iter_mut().enumerate() {
            if i != j {
                *out = x[i].iter().zip(&x[j]).map(|(a, b)| (a - b) * (a - b)).sum();
            }
        }
    });
    d
}

/// Moves exact duplicate rows apart by a tiny deterministic offset so every
/// pairwise distance is positive.
pub fn jitter_duplicates(x: &[Vec<f64>]) -> Vec<Vec<f64>> {
    let mut seen: HashMap<Vec<u64>, usize> = HashMap::new();
    x.iter()
        .map(|row| {
            let key: Vec<u64> = row.iter().map(|v| v.to_bits()).collect();
            let k = seen.entry(key).or_insert(0);
            let mut out = row.clone();
            if *k > 0 {
                for (c, v) in out.iter_mut().enumerate() {
                    *v += DUPLICATE_JITTER * (*k as f64) * if c % 2 == 0 { 1.0 } else { -1.0 };
                }
            }
            *k += 1;
            out
        })
        .collect()
}

/// Per-row bisection on the Gaussian precision so each row's perplexity
/// (`exp` of its entropy in nats, equivalently `2^` entropy in bits) matches
/// the target.
pub fn conditional_probabilities(x: &[Vec<f64>], perplexity: f64) -> Result<Conditional> {
    let n = x.len();
    if n < 3 {
        return Err(Error::Validation(format!("t-SNE needs at least 3 points, got {n}")));
    }
    if !(perplexity > 1.0 && perplexity < (n - 1) as f64) {
        return Err(Error::Config(format!(
            "perplexity {perplexity} must lie strictly between 1 and N-1 = {}",
            n - 1
        )));
    }
    let d = squared_distances(&jitter_duplicates(x));
    let rows: Vec<Result<(Vec<f64>, f64, f64)>> = (0..n)
        .into_par_iter()
        .map(|i| row_search(&d[i * n..(i + 1) * n], i, perplexity))
        .collect();
    let mut p = Vec::with_capacity(n * n);
    let mut beta = Vec::with_capacity(n);
    let mut perp = Vec::with_capacity(n);
    for r in rows {
        let (row, b, h) = r?;
        p.extend(row);
        beta.push(b);
        perp.push(h);
    }
    Ok(Conditional {
        n,
        p,
        beta,
        perplexity: perp,
    })
}

fn row_search(dist: &[f64], i: usize, target: f64) -> Result<(Vec<f64>, f64, f64)> {
    let dmin = dist
        .iter()
        .enumerate()
        .filter(|&(j, _)| j != i)
        .map(|(_, &v)| v)
        .fold(f64::INFINITY, f64::min);
    let shifted: Vec<f64> = dist.iter().map(|v| v - dmin).collect();
    let mut row = vec![0.0; dist.len()];
    let eval = |beta: f64, row: &mut [f64]| -> f64 {
        let mut sum = 0.0;
        let mut weighted = 0.0;
        for (j, out) in row.iter_mut().enumerate() {
            if j == i {
                *out = 0.0;
                continue;
            }
            let e = (-beta * shifted[j]).exp();
            *out = e;
            sum += e;
            weighted += shifted[j] * e;
        }
        for out in row.iter_mut() {
            *out /= sum;
        }
        (sum.ln() + beta * weighted / sum).exp()
    };

    let spread = shifted.iter().fold(0.0f64, |m, &v| m.max(v));
    if spread <= 1e-9 * dmin {
        // all neighbors equidistant: every bandwidth gives the uniform row
        let achieved = eval(1.0, &mut row);
        log::warn!("row {i} is equidistant from all points; using a uniform row");
        return Ok((row, 1.0, achieved));
    }
    let mut beta = 1.0 / dist_scale(&shifted, i);
    let (mut lo, mut hi) = (0.0f64, f64::INFINITY);
    let mut achieved = eval(beta, &mut row);
    for _ in 0..MAX_BISECTION_STEPS {
        if (achieved - target).abs() <= PERPLEXITY_TOLERANCE {
            return Ok((row, beta, achieved));
        }
        if achieved > target {
            lo = beta;
            beta = if hi.is_finite() { (beta + hi) / 2.0 } else { beta * 2.0 };
        } else {
            hi = beta;
            beta = (beta + lo) / 2.0;
        }
        achieved = eval(beta, &mut row);
    }
    if (achieved - target).abs() <= PERPLEXITY_TOLERANCE {
        return Ok((row, beta, achieved));
    }
    Err(Error::Convergence {
        row: i,
        achieved,
        target,
    })
}

/// Mean shifted distance, used to start the search at a sensible scale.
fn dist_scale(shifted: &[f64], i: usize) -> f64 {
    let n = shifted.len() - 1;
    let mean = shifted
        .iter()
        .enumerate()
        .filter(|&(j, _)| j != i)
        .map(|(_, v)| v)
        .sum::<f64>()
        / n as f64;
    if mean > 0.0 && mean.is_finite() {
        mean
    } else {
        1.0
    }
}

/// Joint affinities `p_ij = (p_{j|i} + p_{i|j}) / 2N`.
pub fn conditional_affinities(x: &[Vec<f64>], perplexity: f64) -> Result<AffinityMatrix> {
    Ok(symmetrize(&conditional_probabilities(x, perplexity)?))
}

pub fn symmetrize(c: &Conditional) -> AffinityMatrix {
    let n = c.n;
    let mut p = vec![0.0; n * n];
    let denom = 2.0 * n as f64;
    for i in 0..n {
        for j in 0..n {
            if i != j {
                p[i * n + j] = (c.p[i * n + j] + c.p[j * n + i]) / denom;
            }
        }
    }
    AffinityMatrix { n, p }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn equidistant_points_have_equal_affinities() {
        let x = vec![vec![0.0, 0.0], vec![1.0, 0.0], vec![0.5, 3f64.sqrt() / 2.0]];
        let p = conditional_affinities(&x, 1.5).unwrap();
        let off: Vec<f64> = (0..3)
            .flat_map(|i| (0..3).filter(move |&j| j != i).map(move |j| (i, j)))
            .map(|(i, j)| p.get(i, j))
            .collect();
        for v in &off {
            assert!((v - 1.0 / 6.0).abs() < 1e-9);
        }
    }

    #[test]
    fn duplicates_get_separated() {
        let x = vec![vec![1.0, 2.0], vec![1.0, 2.0], vec![3.0, 4.0]];
        let j = jitter_duplicates(&x);
        assert_ne!(j[0], j[1]);
        assert_eq!(j[0], x[0]);
        assert!(squared_distances(&j)[1] > 0.0);
    }

    #[test]
    fn perplexity_out_of_range_rejected() {
        let x = vec![vec![0.0], vec![1.0], vec![2.0], vec![4.0]];
        assert!(conditional_affinities(&x, 3.0).is_err());
        assert!(conditional_affinities(&x, 1.0).is_err());
        assert!(conditional_affinities(&x[..2], 1.5).is_err());
    }
}
