//! Stochastic gradient training for CBOW and skip-gram.
//!
//! Every update is one output-layer pass against a hidden vector `h`:
//! the positive word plus `k` sampled negatives (negative sampling) or the
//! inner nodes on the target's Huffman path (hierarchical softmax). For a
//! row `v'` with label `y` the loss is `-log σ(v'·h)` when `y = 1` and
//! `-log σ(-v'·h)` when `y = 0`, and `σ(v'·h) - y` is its derivative with
//! respect to `v'·h`. All coefficients are computed from the parameters as
//! they were before the step, then applied.
//!
//! With more than one thread, workers update the shared matrices without
//! locks (Hogwild style). Races only perturb the stochastic updates; a
//! single thread is bitwise deterministic for a given seed.

use std::sync::atomic::{AtomicBool, AtomicU64, Ordering};
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use super::config::{Architecture, Objective, TrainConfig};
use super::huffman::HuffmanTree;
use super::model::{EmbeddingModel, Matrix};
use super::sampler::AliasSampler;
use super::vocab::Vocabulary;
use crate::{Error, Result};

const MIN_LR_FRACTION: f64 = 1e-4;
const PROGRESS_FLUSH: u64 = 1024;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TrainReport {
    /// Mean output-layer loss per epoch.
    pub epoch_losses: Vec<f64>,
    pub examples_per_epoch: Vec<u64>,
    pub tokens_per_epoch: u64,
    pub seconds: f64,
}

pub fn sigmoid(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + (-x).exp())
    } else {
        let e = x.exp();
        e / (1.0 + e)
    }
}

/// `log(1 + e^x)` without overflow; `-log σ(x) = softplus(-x)`.
pub fn softplus(x: f64) -> f64 {
    if x > 0.0 {
        x + (-x).exp().ln_1p()
    } else {
        x.exp().ln_1p()
    }
}

/// Raw view of a matrix shared by training workers.
#[derive(Clone, Copy)]
struct Shared {
    ptr: *mut f64,
    cols: usize,
}

// SAFETY: workers only touch the matrix through the row helpers below, each
// of which builds a short-lived slice. Concurrent workers may race on the same
// row; that is the accepted lock-free update scheme and single-threaded runs
// never hold two slices of one row at once.
unsafe impl Send for Shared {}
unsafe impl Sync for Shared {}

impl Shared {
    fn new(m: &mut Matrix) -> Self {
        Shared {
            cols: m.cols(),
            ptr: m.as_mut_slice().as_mut_ptr(),
        }
    }

    #[inline]
    fn row(&self, i: usize) -> &[f64] {
        unsafe { std::slice::from_raw_parts(self.ptr.add(i * self.cols), self.cols) }
    }

    #[inline]
    #[allow(clippy::mut_from_ref)]
    fn row_mut(&self, i: usize) -> &mut [f64] {
        unsafe { std::slice::from_raw_parts_mut(self.ptr.add(i * self.cols), self.cols) }
    }

    #[inline]
    fn dot(&self, i: usize, v: &[f64]) -> f64 {
        self.row(i).iter().zip(v).map(|(a, b)| a * b).sum()
    }

    /// `acc += a * row_i`
    #[inline]
    fn add_scaled_to(&self, i: usize, a: f64, acc: &mut [f64]) {
        for (s, r) in acc.iter_mut().zip(self.row(i)) {
            *s += a * r;
        }
    }

    /// `row_i += a * x`
    #[inline]
    fn axpy(&self, i: usize, a: f64, x: &[f64]) {
        for (r, v) in self.row_mut(i).iter_mut().zip(x) {
            *r += a * v;
        }
    }
}

/// One SGD step: `h` is the mean of the `inputs` rows, the output layer is
/// scored against `outputs` (row, label), and both sides move by `-lr` times
/// their gradient. Returns the loss before the step.
struct Stepper {
    h: Vec<f64>,
    grad_h: Vec<f64>,
    coeffs: Vec<f64>,
}

impl Stepper {
    fn new(dim: usize) -> Self {
        Stepper {
            h: vec![0.0; dim],
            grad_h: vec![0.0; dim],
            coeffs: Vec::new(),
        }
    }

    fn step(&mut self, input: Shared, output: Shared, inputs: &[usize], outputs: &[(usize, f64)], lr: f64) -> f64 {
        let scale = 1.0 / inputs.len() as f64;
        self.h.fill(0.0);
        for &c in inputs {
            input.add_scaled_to(c, scale, &mut self.h);
        }
        self.grad_h.fill(0.0);
        self.coeffs.clear();
        let mut loss = 0.0;
        for &(row, label) in outputs {
            let f = output.dot(row, &self.h);
            loss += if label > 0.5 { softplus(-f) } else { softplus(f) };
            let g = sigmoid(f) - label;
            self.coeffs.push(g);
            output.add_scaled_to(row, g, &mut self.grad_h);
        }
        for (&(row, _), &g) in outputs.iter().zip(&self.coeffs) {
            output.axpy(row, -lr * g, &self.h);
        }
        for &c in inputs {
            input.axpy(c, -lr * scale, &self.grad_h);
        }
        loss
    }
}

/// A single training example in index form, for gradient inspection.
#[derive(Debug, Clone, PartialEq)]
pub struct Example {
    /// Input rows averaged into `h` (the context for CBOW, the center word
    /// for skip-gram).
    pub inputs: Vec<usize>,
    /// Output rows with labels: the positive word and negatives, or the
    /// Huffman path of the predicted word.
    pub outputs: Vec<(usize, bool)>,
}

impl Example {
    /// Negative-sampling outputs for `target` with the given negatives.
    pub fn negative_sampling(inputs: Vec<usize>, target: usize, negatives: &[usize]) -> Self {
        let mut outputs = vec![(target, true)];
        outputs.extend(negatives.iter().map(|&n| (n, false)));
        Example { inputs, outputs }
    }

    /// Hierarchical-softmax outputs: code bit 0 means label 1.
    pub fn hierarchical(inputs: Vec<usize>, target: usize, tree: &HuffmanTree) -> Self {
        let outputs = tree.path(target).iter().map(|s| (s.node, !s.code)).collect();
        Example { inputs, outputs }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExampleGradient {
    pub loss: f64,
    pub input: Matrix,
    pub output: Matrix,
}

/// Loss of one example under the model's current parameters.
pub fn example_loss(model: &EmbeddingModel, ex: &Example) -> f64 {
    let d = model.dim();
    let mut h = vec![0.0; d];
    for &c in &ex.inputs {
        for (s, x) in h.iter_mut().zip(model.input.row(c)) {
            *s += x / ex.inputs.len() as f64;
        }
    }
    ex.outputs
        .iter()
        .map(|&(row, label)| {
            let f: f64 = model.output.row(row).iter().zip(&h).map(|(a, b)| a * b).sum();
            if label {
                softplus(-f)
            } else {
                softplus(f)
            }
        })
        .sum()
}

/// Gradient of one example, read off a unit-rate step of the training update
/// applied to a copy of the parameters.
pub fn example_gradient(model: &EmbeddingModel, ex: &Example) -> ExampleGradient {
    let mut input = model.input.clone();
    let mut output = model.output.clone();
    let outputs: Vec<(usize, f64)> = ex
        .outputs
        .iter()
        .map(|&(r, l)| (r, if l { 1.0 } else { 0.0 }))
        .collect();
    let mut stepper = Stepper::new(model.dim());
    let loss = stepper.step(
        Shared::new(&mut input),
        Shared::new(&mut output),
        &ex.inputs,
        &outputs,
        1.0,
    );
    let diff = |before: &Matrix, after: &Matrix| {
        let data = before
            .as_slice()
            .iter()
            .zip(after.as_slice())
            .map(|(b, a)| b - a)
            .collect();
        Matrix::from_vec(before.rows(), before.cols(), data).unwrap()
    };
    ExampleGradient {
        loss,
        input: diff(&model.input, &input),
        output: diff(&model.output, &output),
    }
}

/// Probability of `word` under hierarchical softmax for hidden vector `h`.
pub fn hierarchical_probability(tree: &HuffmanTree, output: &Matrix, h: &[f64], word: usize) -> f64 {
    tree.path(word)
        .iter()
        .map(|s| {
            let f: f64 = output.row(s.node).iter().zip(h).map(|(a, b)| a * b).sum();
            if s.code {
                sigmoid(-f)
            } else {
                sigmoid(f)
            }
        })
        .product()
}

/// Random parameters for tests and gradient checks: both matrices drawn
/// uniformly from `[-scale, scale]`.
pub fn random_model(vocab: Vocabulary, config: TrainConfig, scale: f64, seed: u64) -> EmbeddingModel {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (v, d) = (vocab.len(), config.dim);
    let mut draw = |n| (0..n).map(|_| rng.gen_range(-scale..=scale)).collect::<Vec<_>>();
    let input = Matrix::from_vec(v, d, draw(v * d)).unwrap();
    let output = Matrix::from_vec(v, d, draw(v * d)).unwrap();
    EmbeddingModel::new(vocab, input, output, config).unwrap()
}

pub fn train<S: AsRef<str>>(corpus: &[Vec<S>], vocab: &Vocabulary, config: &TrainConfig) -> Result<EmbeddingModel> {
    train_with_report(corpus, vocab, config).map(|(m, _)| m)
}

pub fn train_with_report<S: AsRef<str>>(
    corpus: &[Vec<S>],
    vocab: &Vocabulary,
    config: &TrainConfig,
) -> Result<(EmbeddingModel, TrainReport)> {
    config.validate()?;
    let v = vocab.len();
    if v == 0 {
        return Err(Error::Validation("empty vocabulary".into()));
    }
    if config.objective == Objective::NegativeSampling && v < 2 {
        return Err(Error::Validation(
            "negative sampling needs at least two vocabulary words".into(),
        ));
    }
    let start = Instant::now();
    let d = config.dim;
    let docs: Vec<Vec<usize>> = corpus.iter().map(|doc| vocab.encode(doc)).collect();
    let tokens_per_epoch: u64 = docs.iter().map(|d| d.len() as u64).sum();
    if tokens_per_epoch == 0 {
        return Err(Error::Validation("corpus has no in-vocabulary tokens".into()));
    }

    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let bound = 0.5 / d as f64;
    let init: Vec<f64> = (0..v * d).map(|_| rng.gen_range(-bound..bound)).collect();
    let mut input = Matrix::from_vec(v, d, init)?;
    let mut output = Matrix::zeros(v, d);

    let sampler = (config.objective == Objective::NegativeSampling).then(|| AliasSampler::unigram(vocab.counts()));
    let tree = (config.objective == Objective::HierarchicalSoftmax).then(|| HuffmanTree::build(vocab.counts()));
    let keep_prob: Option<Vec<f64>> = config.subsample.map(|t| {
        let total = vocab.total_count() as f64;
        vocab
            .counts()
            .iter()
            .map(|&c| {
                let f = c as f64 / (t * total);
                ((f.sqrt() + 1.0) / f).min(1.0)
            })
            .collect()
    });

    let shared_in = Shared::new(&mut input);
    let shared_out = Shared::new(&mut output);
    let total_work = tokens_per_epoch * config.epochs as u64;
    let progress = AtomicU64::new(0);
    let failed = AtomicBool::new(false);

    let threads = config.threads.min(docs.len()).max(1);
    let chunk = docs.len().div_ceil(threads);
    let mut workers: Vec<Worker> = (0..threads)
        .map(|t| {
            let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
            rng.set_stream(t as u64 + 1);
            Worker {
                cfg: config,
                input: shared_in,
                output: shared_out,
                sampler: sampler.as_ref(),
                tree: tree.as_ref(),
                keep_prob: keep_prob.as_deref(),
                stepper: Stepper::new(d),
                targets: Vec::new(),
                context: Vec::new(),
                kept: Vec::new(),
                rng,
                total_work,
                progress: &progress,
                failed: &failed,
                local_done: 0,
                unflushed: 0,
                loss: 0.0,
                examples: 0,
            }
        })
        .collect();

    let mut report = TrainReport {
        epoch_losses: Vec::new(),
        examples_per_epoch: Vec::new(),
        tokens_per_epoch,
        seconds: 0.0,
    };
    for epoch in 0..config.epochs {
        for w in workers.iter_mut() {
            w.loss = 0.0;
            w.examples = 0;
        }
        if threads == 1 {
            workers[0].run(&docs);
        } else {
            std::thread::scope(|s| {
                for (w, part) in workers.iter_mut().zip(docs.chunks(chunk)) {
                    s.spawn(move || w.run(part));
                }
            });
        }
        let loss: f64 = workers.iter().map(|w| w.loss).sum();
        let examples: u64 = workers.iter().map(|w| w.examples).sum();
        if failed.load(Ordering::Relaxed) || !loss.is_finite() {
            return Err(Error::Diverged {
                epoch: epoch + 1,
                detail: format!(
                    "non-finite loss (lr {}, dim {d}); try a smaller initial_learning_rate",
                    config.initial_learning_rate
                ),
            });
        }
        let mean = if examples > 0 { loss / examples as f64 } else { 0.0 };
        log::debug!("epoch {} mean loss {mean:.6} over {examples} examples", epoch + 1);
        report.epoch_losses.push(mean);
        report.examples_per_epoch.push(examples);
    }
    drop(workers);

    for (m, name) in [(&input, "input"), (&output, "output")] {
        if let Some(r) = m.first_non_finite_row() {
            return Err(Error::Diverged {
                epoch: config.epochs,
                detail: format!("non-finite {name} vector in row {r}"),
            });
        }
    }
    report.seconds = start.elapsed().as_secs_f64();
    let model = EmbeddingModel::new(vocab.clone(), input, output, config.clone())?;
    Ok((model, report))
}

struct Worker<'a> {
    cfg: &'a TrainConfig,
    input: Shared,
    output: Shared,
    sampler: Option<&'a AliasSampler>,
    tree: Option<&'a HuffmanTree>,
    keep_prob: Option<&'a [f64]>,
    stepper: Stepper,
    targets: Vec<(usize, f64)>,
    context: Vec<usize>,
    kept: Vec<usize>,
    rng: ChaCha8Rng,
    total_work: u64,
    progress: &'a AtomicU64,
    failed: &'a AtomicBool,
    local_done: u64,
    unflushed: u64,
    loss: f64,
    examples: u64,
}

impl Worker<'_> {
    fn run(&mut self, docs: &[Vec<usize>]) {
        for doc in docs {
            if self.failed.load(Ordering::Relaxed) {
                return;
            }
            let seq: Vec<usize> = match self.keep_prob {
                None => doc.clone(),
                Some(p) => {
                    self.kept.clear();
                    for &w in doc {
                        if p[w] >= 1.0 || self.rng.gen::<f64>() < p[w] {
                            self.kept.push(w);
                        }
                    }
                    self.kept.clone()
                }
            };
            for t in 0..seq.len() {
                let lr = self.learning_rate();
                self.position(&seq, t, lr);
                if !self.loss.is_finite() {
                    self.failed.store(true, Ordering::Relaxed);
                    return;
                }
            }
            // skipped tokens still count as work done
            self.advance(doc.len() as u64);
        }
        self.flush();
    }

    fn learning_rate(&self) -> f64 {
        let done = if self.cfg.threads == 1 {
            self.local_done
        } else {
            self.progress.load(Ordering::Relaxed) + self.unflushed
        };
        let p = (done as f64 / self.total_work as f64).min(1.0);
        self.cfg.initial_learning_rate * (1.0 - (1.0 - MIN_LR_FRACTION) * p)
    }

    fn advance(&mut self, n: u64) {
        self.local_done += n;
        self.unflushed += n;
        if self.unflushed >= PROGRESS_FLUSH {
            self.flush();
        }
    }

    fn flush(&mut self) {
        self.progress.fetch_add(self.unflushed, Ordering::Relaxed);
        self.unflushed = 0;
    }

    fn position(&mut self, seq: &[usize], t: usize, lr: f64) {
        let lo = t.saturating_sub(self.cfg.window);
        let hi = (t + self.cfg.window + 1).min(seq.len());
        self.context.clear();
        self.context.extend((lo..hi).filter(|&j| j != t).map(|j| seq[j]));
        if self.context.is_empty() {
            return;
        }
        let center = seq[t];
        match self.cfg.architecture {
            Architecture::Cbow => {
                self.fill_targets(center);
                let l = self
                    .stepper
                    .step(self.input, self.output, &self.context, &self.targets, lr);
                self.loss += l;
                self.examples += 1;
            }
            Architecture::SkipGram => {
                for i in 0..self.context.len() {
                    let ctx = self.context[i];
                    self.fill_targets(ctx);
                    let l = self.stepper.step(
                        self.input,
                        self.output,
                        std::slice::from_ref(&center),
                        &self.targets,
                        lr,
                    );
                    self.loss += l;
                    self.examples += 1;
                }
            }
        }
    }

    fn fill_targets(&mut self, target: usize) {
        self.targets.clear();
        if let Some(sampler) = self.sampler {
            self.targets.push((target, 1.0));
            for _ in 0..self.cfg.negatives {
                let neg = loop {
                    let w = sampler.sample(&mut self.rng);
                    if w != target {
                        break w;
                    }
                };
                self.targets.push((neg, 0.0));
            }
        } else if let Some(tree) = self.tree {
            self.targets.extend(
                tree.path(target)
                    .iter()
                    .map(|s| (s.node, if s.code { 0.0 } else { 1.0 })),
            );
        }
    }
}
