//! Naive reference implementations and fixtures shared by the integration tests.
#![allow(dead_code)]

use std::collections::HashMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use repvec::classify::{LabeledVector, RiskClass};
use repvec::embedding::{
    example_gradient, example_loss, random_model, Architecture, EmbeddingModel, Example, HuffmanTree, Objective,
    TrainConfig, Vocabulary,
};
use repvec::semdict::{SemanticDictionary, MAX_VARIANT_TOKENS};

/// Tries every n-gram length at every position through `lookup`, longest first.
fn naive_plain<S: AsRef<str>>(tokens: &[S], dict: &SemanticDictionary) -> Vec<String> {
    let mut out = Vec::new();
    let mut i = 0;
    'outer: while i < tokens.len() {
        for len in (1..=MAX_VARIANT_TOKENS.min(tokens.len() - i)).rev() {
            if let Some((canonical, _)) = dict.lookup(&tokens[i..i + len]) {
                out.push(canonical.to_string());
                i += len;
                continue 'outer;
            }
        }
        out.push(tokens[i].as_ref().to_string());
        i += 1;
    }
    out
}

/// Reference mapper: each dictionary in order, underscore compounds rewritten
/// part by part, plain runs between compounds rewritten as runs.
pub fn naive_map(tokens: &[String], dicts: &[SemanticDictionary]) -> Vec<String> {
    let mut cur = tokens.to_vec();
    for d in dicts {
        let mut out = Vec::new();
        let mut run: Vec<String> = Vec::new();
        for t in &cur {
            if t.contains('_') {
                out.extend(naive_plain(&run, d));
                run.clear();
                let parts: Vec<&str> = t.split('_').filter(|p| !p.is_empty()).collect();
                out.push(naive_plain(&parts, d).join("_"));
            } else {
                run.push(t.clone());
            }
        }
        out.extend(naive_plain(&run, d));
        cur = out;
    }
    cur
}

/// Counts adjacent pairs within each document with nested loops.
pub fn naive_pairs(corpus: &[Vec<String>], min_count: usize) -> Vec<(String, String, usize)> {
    let mut counts: HashMap<(String, String), usize> = HashMap::new();
    for doc in corpus {
        for i in 0..doc.len().saturating_sub(1) {
            *counts.entry((doc[i].clone(), doc[i + 1].clone())).or_default() += 1;
        }
    }
    let mut out: Vec<_> = counts
        .into_iter()
        .filter(|&(_, c)| c > min_count)
        .map(|((a, b), c)| (a, b, c))
        .collect();
    out.sort();
    out
}

/// Full sort by (distance, index), majority vote, ties to the nearest class.
pub fn brute_knn(train: &[LabeledVector], query: &[f64], k: usize, cosine: bool) -> RiskClass {
    let dist = |a: &[f64]| -> f64 {
        if cosine {
            let dot: f64 = a.iter().zip(query).map(|(x, y)| x * y).sum();
            let na: f64 = a.iter().map(|x| x * x).sum::<f64>().sqrt();
            let nb: f64 = query.iter().map(|x| x * x).sum::<f64>().sqrt();
            if na == 0.0 || nb == 0.0 {
                1.0
            } else {
                1.0 - dot / (na * nb)
            }
        } else {
            a.iter().zip(query).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt()
        }
    };
    let mut order: Vec<(f64, usize)> = train.iter().enumerate().map(|(i, v)| (dist(&v.features), i)).collect();
    order.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
    let nearest = &order[..k];
    let mut votes = [0usize; 3];
    for &(_, i) in nearest {
        votes[train[i].class.index()] += 1;
    }
    let best = *votes.iter().max().unwrap();
    nearest
        .iter()
        .map(|&(_, i)| train[i].class)
        .find(|c| votes[c.index()] == best)
        .unwrap()
}

/// Labeled points in `dims` dimensions clustered by class.
pub fn clustered_points(n: usize, dims: usize, spread: f64, seed: u64) -> Vec<LabeledVector> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let noise = Normal::new(0.0, spread).unwrap();
    (0..n)
        .map(|i| {
            let class = RiskClass::ALL[rng.gen_range(0..3)];
            let features = (0..dims)
                .map(|d| if d % 3 == class.index() { 1.0 } else { 0.0 } + noise.sample(&mut rng))
                .collect();
            LabeledVector::new(format!("p{i}"), features, class)
        })
        .collect()
}

/// Three isotropic Gaussians in `dims` dimensions, `n / 3` points each.
pub fn three_gaussians(n: usize, dims: usize, separation: f64, seed: u64) -> (Vec<Vec<f64>>, Vec<usize>) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let unit = Normal::new(0.0, 1.0).unwrap();
    let mut x = Vec::with_capacity(n);
    let mut labels = Vec::with_capacity(n);
    for i in 0..n {
        let c = i % 3;
        x.push(
            (0..dims)
                .map(|d| if d == c { separation } else { 0.0 } + unit.sample(&mut rng))
                .collect(),
        );
        labels.push(c);
    }
    (x, labels)
}

/// Random model and one example for the given training mode.
pub fn gradient_fixture(
    arch: Architecture,
    objective: Objective,
    v: usize,
    d: usize,
    seed: u64,
) -> (EmbeddingModel, Example) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let words: Vec<String> = (0..v).map(|i| format!("w{i}")).collect();
    let mut counts: Vec<u64> = (0..v).map(|_| rng.gen_range(1..100)).collect();
    counts.sort_unstable_by(|a, b| b.cmp(a));
    let vocab = Vocabulary::from_parts(words, counts.clone(), 1).unwrap();
    let cfg = TrainConfig {
        architecture: arch,
        objective,
        dim: d,
        ..TrainConfig::default()
    };
    let model = random_model(vocab, cfg, 0.5, seed);
    let target = rng.gen_range(0..v);
    let inputs: Vec<usize> = match arch {
        Architecture::Cbow => (0..rng.gen_range(2..6)).map(|_| rng.gen_range(0..v)).collect(),
        Architecture::SkipGram => vec![rng.gen_range(0..v)],
    };
    let ex = match objective {
        Objective::NegativeSampling => {
            let mut negatives = Vec::new();
            while negatives.len() < 5 {
                let n = rng.gen_range(0..v);
                if n != target && !negatives.contains(&n) {
                    negatives.push(n);
                }
            }
            Example::negative_sampling(inputs, target, &negatives)
        }
        Objective::HierarchicalSoftmax => Example::hierarchical(inputs, target, &HuffmanTree::build(&counts)),
    };
    (model, ex)
}

/// Relative error `|a - n| / (|a| + |n|)` between the analytic gradient and a
/// central finite difference over every parameter.
pub fn gradient_relative_error(model: &EmbeddingModel, ex: &Example) -> f64 {
    let g = example_gradient(model, ex);
    let h = 1e-5;
    let mut num = Vec::new();
    let mut ana = Vec::new();
    for which in 0..2 {
        let len = if which == 0 {
            model.input.as_slice().len()
        } else {
            model.output.as_slice().len()
        };
        for k in 0..len {
            let mut plus = model.clone();
            let mut minus = model.clone();
            if which == 0 {
                plus.input.as_mut_slice()[k] += h;
                minus.input.as_mut_slice()[k] -= h;
            } else {
                plus.output.as_mut_slice()[k] += h;
                minus.output.as_mut_slice()[k] -= h;
            }
            num.push((example_loss(&plus, ex) - example_loss(&minus, ex)) / (2.0 * h));
            ana.push(if which == 0 {
                g.input.as_slice()[k]
            } else {
                g.output.as_slice()[k]
            });
        }
    }
    let diff: f64 = num.iter().zip(&ana).map(|(a, b)| (a - b).powi(2)).sum::<f64>().sqrt();
    let scale: f64 = num.iter().map(|a| a * a).sum::<f64>().sqrt() + ana.iter().map(|a| a * a).sum::<f64>().sqrt();
    if scale == 0.0 {
        0.0
    } else {
        diff / scale
    }
}

/// `exp` of the Shannon entropy (nats) of one probability row.
pub fn row_perplexity(row: &[f64]) -> f64 {
    let h: f64 = row.iter().filter(|&&p| p > 0.0).map(|&p| -p * p.ln()).sum();
    h.exp()
}
