//! Stage glue: condense, map, train, embed and classify in the fixed order.

use std::time::Instant;

use serde::Serialize;

use crate::classify::{
    apply_tfidf, evaluate, idf_weights, regroup_labels, train_test_split, unigram_features, Classifier, LabeledVector,
    Metrics, RiskClass, UnigramVocabulary,
};
use crate::condenser::{condense, CollocationTable, CondenserConfig};
use crate::corpus::{CondensedReport, Report};
use crate::embedding::{build_vocabulary, embed_document, train_with_report, EmbeddingModel, TrainConfig};
use crate::semdict::{
    builtin_common_dictionary, compile_domain_dictionary, map_corpus, OntologyExport, SemanticDictionary,
    BUILTIN_HEMORRHAGE_ONTOLOGY,
};
use crate::{Error, Result};

/// Root of the bundled hemorrhage ontology.
pub const HEMORRHAGE_ROOT: &str = "H0001";

/// Domain dictionary compiled from the bundled ontology export.
pub fn builtin_domain_dictionary() -> Result<SemanticDictionary> {
    let export = OntologyExport::parse(BUILTIN_HEMORRHAGE_ONTOLOGY)?;
    compile_domain_dictionary(&export, &[HEMORRHAGE_ROOT])
}

/// The common dictionary, followed by the domain dictionary when asked.
pub fn builtin_dictionaries(with_domain: bool) -> Result<Vec<SemanticDictionary>> {
    let mut d = vec![builtin_common_dictionary()];
    if with_domain {
        d.push(builtin_domain_dictionary()?);
    }
    Ok(d)
}

#[derive(Debug, Clone)]
pub struct Processed {
    /// Condensed and mapped reports, in input order.
    pub reports: Vec<CondensedReport>,
    pub collocations: CollocationTable,
    pub fallback_ids: Vec<String>,
}

/// Condenses the corpus, then applies the dictionaries in order.
pub fn process_reports(
    reports: &[Report],
    condenser: &CondenserConfig,
    dictionaries: &[SemanticDictionary],
) -> Result<Processed> {
    let condensed = condense(reports, condenser)?;
    let tokens: Vec<Vec<String>> = condensed.reports.iter().map(|r| r.tokens.clone()).collect();
    let mapped = map_corpus(&tokens, dictionaries);
    let reports = condensed
        .reports
        .into_iter()
        .zip(mapped)
        .map(|(r, t)| CondensedReport::new(r.id, t, r.label))
        .collect();
    Ok(Processed {
        reports,
        collocations: condensed.collocations,
        fallback_ids: condensed.fallback_ids,
    })
}

/// Builds the vocabulary from `reports` and trains on their tokens.
pub fn train_on(reports: &[CondensedReport], config: &TrainConfig) -> Result<EmbeddingModel> {
    let corpus: Vec<&[String]> = reports.iter().map(|r| r.tokens.as_slice()).collect();
    let corpus: Vec<Vec<&str>> = corpus.iter().map(|d| d.iter().map(String::as_str).collect()).collect();
    let vocab = build_vocabulary(&corpus, config.min_count)?;
    let (model, report) = train_with_report(&corpus, &vocab, config)?;
    log::info!(
        "trained {} x {} in {:.1}s, epoch losses {:?}",
        model.len(),
        model.dim(),
        report.seconds,
        report.epoch_losses
    );
    Ok(model)
}

/// Document vectors as classifier features. A report without known tokens
/// gets the zero vector and a warning.
pub fn document_features(model: &EmbeddingModel, reports: &[CondensedReport]) -> Vec<Vec<f64>> {
    reports
        .iter()
        .map(|r| match embed_document(model, &r.tokens) {
            Ok(dv) => dv.vector,
            Err(_) => {
                log::warn!("report {} has no in-vocabulary tokens; using the zero vector", r.id);
                vec![0.0; model.dim()]
            }
        })
        .collect()
}

/// Risk classes of labeled reports.
pub fn report_classes(reports: &[CondensedReport]) -> Result<Vec<RiskClass>> {
    reports
        .iter()
        .map(|r| {
            let l = r
                .label
                .ok_or_else(|| Error::Validation(format!("report {} has no label", r.id)))?;
            regroup_labels(l)
        })
        .collect()
}

/// Fits on the training rows and scores the test rows.
pub fn fit_and_evaluate(
    classifier: &Classifier,
    features: &[Vec<f64>],
    classes: &[RiskClass],
    train: &[usize],
    test: &[usize],
) -> Result<Metrics> {
    let data: Vec<LabeledVector> = train
        .iter()
        .map(|&i| LabeledVector::new(i.to_string(), features[i].clone(), classes[i]))
        .collect();
    let queries: Vec<Vec<f64>> = test.iter().map(|&i| features[i].clone()).collect();
    let truth: Vec<RiskClass> = test.iter().map(|&i| classes[i]).collect();
    let pred = classifier.fit_predict(&data, &queries)?;
    evaluate(&pred, &truth)
}

/// Unigram count features, vocabulary from the training rows only.
pub fn unigram_matrix(reports: &[CondensedReport], train: &[usize], tfidf: bool) -> Vec<Vec<f64>> {
    let train_docs: Vec<&Vec<String>> = train.iter().map(|&i| &reports[i].tokens).collect();
    let train_docs: Vec<Vec<String>> = train_docs.into_iter().cloned().collect();
    let vocab = UnigramVocabulary::build(&train_docs);
    let docs: Vec<Vec<String>> = reports.iter().map(|r| r.tokens.clone()).collect();
    let mut rows = unigram_features(&docs, &vocab);
    if tfidf {
        let train_rows: Vec<Vec<f64>> = train.iter().map(|&i| rows[i].clone()).collect();
        let idf = idf_weights(&train_rows);
        apply_tfidf(&mut rows, &idf);
    }
    rows
}

#[derive(Debug, Clone)]
pub struct ExperimentConfig {
    pub condenser: CondenserConfig,
    pub train: TrainConfig,
    pub classifiers: Vec<Classifier>,
    pub train_fraction: f64,
    pub split_seed: u64,
    pub stratified: bool,
    pub tfidf: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct ExperimentRow {
    pub features: String,
    pub classifier: String,
    pub metrics: Metrics,
}

#[derive(Debug, Clone, Serialize)]
pub struct ExperimentReport {
    pub n_train: usize,
    pub n_test: usize,
    pub vocabulary_with_domain: usize,
    pub vocabulary_without_domain: usize,
    pub rows: Vec<ExperimentRow>,
    pub seconds: f64,
}

impl ExperimentReport {
    pub fn weighted_f1(&self, features: &str, classifier: &str) -> Option<f64> {
        self.rows
            .iter()
            .find(|r| r.features == features && r.classifier == classifier)
            .map(|r| r.metrics.weighted_f1)
    }
}

pub const FEATURES_WITH_DOMAIN: &str = "embedding+domain";
pub const FEATURES_WITHOUT_DOMAIN: &str = "embedding";
pub const FEATURES_UNIGRAM: &str = "unigram";

/// Compares document-embedding features (with and without the domain
/// dictionary) against unigram counts of the condensed, unmapped labeled
/// reports. Embeddings are trained on the labeled and unlabeled reports
/// together; classifiers see only the labeled ones, split into train and test
/// sides once and shared by every feature set.
pub fn classification_experiment(
    labeled: &[Report],
    unlabeled: &[Report],
    config: &ExperimentConfig,
) -> Result<ExperimentReport> {
    let start = Instant::now();
    let mut all: Vec<Report> = labeled.to_vec();
    all.extend_from_slice(unlabeled);
    let n = labeled.len();

    let with = process_reports(&all, &config.condenser, &builtin_dictionaries(true)?)?;
    let without = process_reports(&all, &config.condenser, &builtin_dictionaries(false)?)?;
    let plain = condense(labeled, &config.condenser)?.reports;
    let classes = report_classes(&with.reports[..n])?;
    let split = train_test_split(&classes, config.train_fraction, config.split_seed, config.stratified)?;

    let model_with = train_on(&with.reports, &config.train)?;
    let model_without = train_on(&without.reports, &config.train)?;
    let feature_sets = [
        (FEATURES_WITH_DOMAIN, document_features(&model_with, &with.reports[..n])),
        (
            FEATURES_WITHOUT_DOMAIN,
            document_features(&model_without, &without.reports[..n]),
        ),
        (FEATURES_UNIGRAM, unigram_matrix(&plain, &split.train, config.tfidf)),
    ];

    let mut rows = Vec::new();
    for (name, features) in &feature_sets {
        for c in &config.classifiers {
            let metrics = fit_and_evaluate(c, features, &classes, &split.train, &split.test)?;
            rows.push(ExperimentRow {
                features: name.to_string(),
                classifier: c.name(),
                metrics,
            });
        }
    }
    Ok(ExperimentReport {
        n_train: split.train.len(),
        n_test: split.test.len(),
        vocabulary_with_domain: model_with.len(),
        vocabulary_without_domain: model_without.len(),
        rows,
        seconds: start.elapsed().as_secs_f64(),
    })
}
