mod common;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use common::*;
use repvec::classify::{evaluate, knn_predict, Distance, LabeledVector, RiskClass};
use repvec::condenser::{condense, mine_collocations, CondenserConfig};
use repvec::embedding::{hierarchical_probability, AliasSampler, Architecture, HuffmanTree, Matrix, Objective};
use repvec::pipeline::builtin_dictionaries;
use repvec::semdict::map_tokens;
use repvec::syncorpus::{generate_corpus, GenerationConfig, TemplateSet};
use repvec::tsne::{conditional_affinities, conditional_probabilities, kl_divergence, kl_gradient};

fn small_corpus(n: usize, seed: u64) -> Vec<Vec<String>> {
    let cfg = GenerationConfig {
        n_reports: n,
        seed,
        ..GenerationConfig::default()
    };
    let (reports, _) = generate_corpus(&TemplateSet::builtin(), &cfg).unwrap();
    let condenser = CondenserConfig {
        min_term_frequency: 1,
        ..CondenserConfig::default()
    };
    condense(&reports, &condenser)
        .unwrap()
        .reports
        .into_iter()
        .map(|r| r.tokens)
        .collect()
}

#[test]
fn gradients_match_finite_differences() {
    for arch in [Architecture::Cbow, Architecture::SkipGram] {
        for obj in [Objective::NegativeSampling, Objective::HierarchicalSoftmax] {
            for seed in 0..5 {
                let (model, ex) = gradient_fixture(arch, obj, 12 + 4 * seed as usize, 3 + seed as usize, seed);
                let err = gradient_relative_error(&model, &ex);
                assert!(err <= 1e-5, "{arch} {obj} seed {seed}: relative error {err:e}");
            }
        }
    }
}

#[test]
fn hierarchical_probabilities_sum_to_one() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for v in [2usize, 3, 7, 30] {
        let counts: Vec<u64> = (0..v).map(|_| rng.gen_range(1..50)).collect();
        let tree = HuffmanTree::build(&counts);
        let d = 4;
        let output = Matrix::from_vec(v, d, (0..v * d).map(|_| rng.gen_range(-1.0..1.0)).collect()).unwrap();
        let h: Vec<f64> = (0..d).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let total: f64 = (0..v).map(|w| hierarchical_probability(&tree, &output, &h, w)).sum();
        assert!((total - 1.0).abs() < 1e-12, "V = {v}: {total}");
    }
}

#[test]
fn alias_sampler_passes_chi_square() {
    let counts = [500u64, 120, 90, 60, 33, 20, 10, 5, 2, 1];
    let sampler = AliasSampler::unigram(&counts);
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let draws = 200_000;
    let mut seen = [0usize; 10];
    for _ in 0..draws {
        seen[sampler.sample(&mut rng)] += 1;
    }
    let chi2: f64 = sampler
        .distribution()
        .iter()
        .zip(&seen)
        .map(|(p, &o)| {
            let e = p * draws as f64;
            (o as f64 - e).powi(2) / e
        })
        .sum();
    // 9 degrees of freedom, p = 0.001
    assert!(chi2 < 27.88, "chi2 = {chi2}");
}

#[test]
fn mapping_matches_naive_rewriter() {
    let corpus = small_corpus(100, 5);
    for with_domain in [false, true] {
        let dicts = builtin_dictionaries(with_domain).unwrap();
        for doc in &corpus {
            assert_eq!(map_tokens(doc, &dicts), naive_map(doc, &dicts));
        }
    }
}

#[test]
fn collocations_match_naive_pair_counter() {
    let corpus = small_corpus(150, 9);
    for min_count in [0, 3, 20, 100] {
        let table = mine_collocations(&corpus, min_count);
        let mut got: Vec<(String, String, usize)> = table
            .iter()
            .map(|(a, b, c)| (a.to_string(), b.to_string(), c))
            .collect();
        got.sort();
        assert_eq!(got, naive_pairs(&corpus, min_count), "min_count {min_count}");
    }
}

#[test]
fn knn_matches_brute_force() {
    let mut train = clustered_points(200, 6, 0.6, 1);
    // Integer grid points create exact distance ties.
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    for (i, p) in train.iter_mut().enumerate().take(60) {
        *p = LabeledVector::new(
            format!("g{i}"),
            (0..6).map(|_| rng.gen_range(0..3) as f64).collect(),
            p.class,
        );
    }
    let queries = clustered_points(50, 6, 0.8, 3);
    for k in [1, 2, 3, 5, 10, 25] {
        for (dist, cosine) in [(Distance::Euclidean, false), (Distance::Cosine, true)] {
            for q in &queries {
                let grid_q: Vec<f64> = q.features.iter().map(|x| x.round().clamp(0.0, 2.0)).collect();
                for query in [&q.features, &grid_q] {
                    assert_eq!(
                        knn_predict(&train, query, k, dist).unwrap(),
                        brute_knn(&train, query, k, cosine),
                        "k {k} {dist:?}"
                    );
                }
            }
        }
    }
}

#[test]
fn metrics_match_hand_computation() {
    use RiskClass::*;
    // Confusion (rows true): [5 1 0] [2 1 0] [0 1 3]
    let mut truth = Vec::new();
    let mut pred = Vec::new();
    for (t, p, n) in [
        (NoRisk, NoRisk, 5),
        (NoRisk, MediumRisk, 1),
        (MediumRisk, NoRisk, 2),
        (MediumRisk, MediumRisk, 1),
        (HighRisk, MediumRisk, 1),
        (HighRisk, HighRisk, 3),
    ] {
        for _ in 0..n {
            truth.push(t);
            pred.push(p);
        }
    }
    let m = evaluate(&pred, &truth).unwrap();
    let close = |a: f64, b: f64| assert!((a - b).abs() < 1e-12, "{a} vs {b}");
    close(m.per_class[0].precision, 5.0 / 7.0);
    close(m.per_class[0].recall, 5.0 / 6.0);
    close(m.per_class[0].f1, 10.0 / 13.0);
    close(m.per_class[1].f1, 1.0 / 3.0);
    close(m.per_class[2].precision, 1.0);
    close(m.per_class[2].recall, 0.75);
    close(m.per_class[2].f1, 6.0 / 7.0);
    close(m.weighted_precision, 5.0 / 7.0);
    close(m.weighted_recall, 9.0 / 13.0);
    close(m.weighted_f1, (60.0 / 13.0 + 1.0 + 24.0 / 7.0) / 13.0);
    close(m.accuracy, 9.0 / 13.0);
    assert_eq!(m.confusion, [[5, 1, 0], [2, 1, 0], [0, 1, 3]]);
    assert!(!m.zero_division);
}

#[test]
fn tsne_gradient_matches_finite_differences() {
    let (x, _) = three_gaussians(30, 5, 4.0, 4);
    let p = conditional_affinities(&x, 8.0).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let y: Vec<[f64; 2]> = (0..30)
        .map(|_| [rng.gen_range(-2.0..2.0), rng.gen_range(-2.0..2.0)])
        .collect();
    let g = kl_gradient(&p, &y);
    let h = 1e-6;
    for i in 0..30 {
        for c in 0..2 {
            let mut plus = y.clone();
            let mut minus = y.clone();
            plus[i][c] += h;
            minus[i][c] -= h;
            let num = (kl_divergence(&p, &plus) - kl_divergence(&p, &minus)) / (2.0 * h);
            assert!(
                (num - g[i][c]).abs() <= 1e-6 * (1.0 + num.abs()),
                "{i},{c}: {num} vs {}",
                g[i][c]
            );
        }
    }
}

#[test]
fn perplexity_rows_match_target() {
    let (x, _) = three_gaussians(90, 10, 3.0, 6);
    for target in [5.0, 15.0, 30.0] {
        let c = conditional_probabilities(&x, target).unwrap();
        for i in 0..c.n {
            let row = &c.p[i * c.n..(i + 1) * c.n];
            assert!(row[i] == 0.0);
            assert!((row.iter().sum::<f64>() - 1.0).abs() < 1e-12);
            let perp = row_perplexity(row);
            assert!((perp - target).abs() < 1e-3, "row {i}: {perp} vs {target}");
        }
    }
}
