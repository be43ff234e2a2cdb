use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use super::{class_counts, RiskClass};
use crate::{Error, Result};

/// Index partition of a dataset. Both sides are in ascending index order.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Split {
    pub train: Vec<usize>,
    pub test: Vec<usize>,
    /// Classes present in the data but missing from the training side.
    pub missing_from_train: Vec<RiskClass>,
}

impl Split {
    pub fn select<T: Clone>(&self, items: &[T]) -> (Vec<T>, Vec<T>) {
        (
            self.train.iter().map(|&i| items[i].clone()).collect(),
            self.test.iter().map(|&i| items[i].clone()).collect(),
        )
    }
}

/// Train/test sizes: the test side gets `ceil((1 - fraction) * n)` items and
/// training takes the rest, so 1188 items at 0.8 split 950/238.
pub fn split_sizes(n: usize, fraction: f64) -> Result<(usize, usize)> {
    if !(fraction > 0.0 && fraction < 1.0) {
        return Err(Error::Config(format!("split fraction {fraction} outside (0, 1)")));
    }
    let raw = (1.0 - fraction) * n as f64;
    // absorb representation error such as 0.2 * 1000 = 199.99999999999997
    let n_test = ((raw - 1e-9).ceil().max(0.0) as usize).min(n);
    Ok((n - n_test, n_test))
}

/// Seeded random split. With `stratified`, each class is split separately
/// and the per-class test counts are apportioned by largest remainder so
/// the totals match [`split_sizes`].
pub fn train_test_split(classes: &[RiskClass], fraction: f64, seed: u64, stratified: bool) -> Result<Split> {
    let n = classes.len();
    let (_, n_test) = split_sizes(n, fraction)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut test = if stratified {
        let counts = class_counts(classes.iter().copied());
        let quotas = apportion(&counts, n_test, n);
        let mut out = Vec::with_capacity(n_test);
        for c in RiskClass::ALL {
            let mut members: Vec<usize> = (0..n).filter(|&i| classes[i] == c).collect();
            members.shuffle(&mut rng);
            out.extend_from_slice(&members[..quotas[c.index()]]);
        }
        out
    } else {
        let mut perm: Vec<usize> = (0..n).collect();
        perm.shuffle(&mut rng);
        perm.truncate(n_test);
        perm
    };
    test.sort_unstable();
    let mut is_test = vec![false; n];
    for &i in &test {
        is_test[i] = true;
    }
    let train: Vec<usize> = (0..n).filter(|&i| !is_test[i]).collect();
    let present = class_counts(classes.iter().copied());
    let in_train = class_counts(train.iter().map(|&i| classes[i]));
    let missing_from_train: Vec<RiskClass> = RiskClass::ALL
        .into_iter()
        .filter(|c| present[c.index()] > 0 && in_train[c.index()] == 0)
        .collect();
    for c in &missing_from_train {
        log::warn!("class {c} has no training examples after the split");
    }
    Ok(Split {
        train,
        test,
        missing_from_train,
    })
}

fn apportion(counts: &[usize; 3], total: usize, n: usize) -> [usize; 3] {
    let mut quota = [0usize; 3];
    let mut rem = [(0.0f64, 0usize); 3];
    for (c, &k) in counts.iter().enumerate() {
        let exact = total as f64 * k as f64 / n.max(1) as f64;
        quota[c] = exact.floor() as usize;
        rem[c] = (exact - exact.floor(), c);
    }
    let mut left = total - quota.iter().sum::<usize>();
    rem.sort_by(|a, b| b.0.total_cmp(&a.0).then(a.1.cmp(&b.1)));
    for &(_, c) in &rem {
        if left == 0 {
            break;
        }
        if quota[c] < counts[c] {
            quota[c] += 1;
            left -= 1;
        }
    }
    quota
}
