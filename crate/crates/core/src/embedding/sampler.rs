use rand::Rng;

/// Walker alias table over `count^power`, for O(1) negative draws.
#[derive(Debug, Clone)]
pub struct AliasSampler {
    prob: Vec<f64>,
    alias: Vec<usize>,
    weights: Vec<f64>,
}

pub const UNIGRAM_POWER: f64 = 0.75;

impl AliasSampler {
    pub fn new(counts: &[u64], power: f64) -> Self {
        let weights: Vec<f64> = counts.iter().map(|&c| (c as f64).powf(power)).collect();
        Self::from_weights(weights)
    }

    pub fn unigram(counts: &[u64]) -> Self {
        Self::new(counts, UNIGRAM_POWER)
    }

    pub fn from_weights(weights: Vec<f64>) -> Self {
        let n = weights.len();
        let total: f64 = weights.iter().sum();
        let mut prob: Vec<f64> = weights.iter().map(|w| w * n as f64 / total).collect();
        let mut alias = vec![0usize; n];
        let mut small: Vec<usize> = Vec::new();
        let mut large: Vec<usize> = Vec::new();
        for (i, &p) in prob.iter().enumerate() {
            if p < 1.0 {
                small.push(i);
            } else {
                large.push(i);
            }
        }
        while let (Some(s), Some(&l)) = (small.pop(), large.last()) {
            alias[s] = l;
            prob[l] -= 1.0 - prob[s];
            if prob[l] < 1.0 {
                large.pop();
                small.push(l);
            }
        }
        // leftovers are 1 up to rounding
        for i in small.into_iter().chain(large) {
            prob[i] = 1.0;
        }
        let weights = weights.iter().map(|w| w / total).collect();
        AliasSampler { prob, alias, weights }
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> usize {
        let i = rng.gen_range(0..self.prob.len());
        if rng.gen::<f64>() < self.prob[i] {
            i
        } else {
            self.alias[i]
        }
    }

    /// Normalized target distribution.
    pub fn distribution(&self) -> &[f64] {
        &self.weights
    }

    pub fn len(&self) -> usize {
        self.prob.len()
    }

    pub fn is_empty(&self) -> bool {
        self.prob.is_empty()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn distribution_is_smoothed_unigram() {
        let s = AliasSampler::unigram(&[16, 1]);
        let d = s.distribution();
        assert!((d[0] - 8.0 / 9.0).abs() < 1e-12);
        assert!((d[1] - 1.0 / 9.0).abs() < 1e-12);
    }

    #[test]
    fn single_outcome() {
        let s = AliasSampler::unigram(&[7]);
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        assert!((0..100).all(|_| s.sample(&mut rng) == 0));
    }
}
