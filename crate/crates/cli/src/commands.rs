use std::collections::HashSet;
use std::fmt;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::Instant;

use anyhow::{Context, Result};
use serde::Serialize;
use serde_json::{json, Value};

use repvec::classify::{
    evaluate, grid_search, regroup_labels, train_test_split, write_grid_tsv, Classifier, Distance, ForestConfig,
    GridMode, GridSearchSpec, Metrics, RiskClass,
};
use repvec::condenser::{condense, CondenserConfig};
use repvec::corpus::{corpus_stats, load_condensed, load_reports, save_condensed, CondensedReport, Report};
use repvec::embedding::{
    build_vocabulary, embed_corpus, load_document_vectors, most_similar, save_document_vectors, train_with_report,
    Architecture, EmbeddingModel, Objective, TrainConfig,
};
use repvec::pipeline::{builtin_domain_dictionary, document_features, unigram_matrix};
use repvec::semdict::{
    builtin_common_dictionary, compile_domain_dictionary, load_common_dictionary, map_corpus, OntologyExport,
    SemanticDictionary, BUILTIN_HEMORRHAGE_ONTOLOGY,
};
use repvec::syncorpus::{generate_corpus, write_corpus, GenerationConfig, TemplateSet};
use repvec::tsne::{run_tsne, write_projection_svg, write_projection_tsv, ProjectedPoint, ProjectionConfig};

use crate::manifest::{digests, to_digests, unix_now, PipelineManifest, RunLog, LOG_DIR};
use crate::*;

/// A problem with the user's inputs rather than with the run itself.
#[derive(Debug)]
pub struct Invalid(pub String);

impl fmt::Display for Invalid {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for Invalid {}

fn invalid(msg: impl Into<String>) -> anyhow::Error {
    Invalid(msg.into()).into()
}

/// 1 for validation errors, 2 for runtime failures.
pub fn exit_code(e: &anyhow::Error) -> u8 {
    for cause in e.chain() {
        if cause.is::<Invalid>() {
            return 1;
        }
        if let Some(err) = cause.downcast_ref::<repvec::Error>() {
            use repvec::Error as E;
            return match err {
                E::Validation(_)
                | E::Config(_)
                | E::Parse { .. }
                | E::Dictionary(_)
                | E::NotInVocabulary(_)
                | E::DegenerateDocument(_)
                | E::ModelFormat(_) => 1,
                _ => 2,
            };
        }
    }
    2
}

struct Ctx {
    data_dir: PathBuf,
    format: Format,
    strict: bool,
    argv: Vec<String>,
}

struct StageOutput {
    outputs: Vec<PathBuf>,
    details: Value,
}

impl Ctx {
    fn path(&self, given: &Option<PathBuf>, default: &str) -> PathBuf {
        given.clone().unwrap_or_else(|| self.data_dir.join(default))
    }

    /// Checks inputs, runs `body`, then writes the run log and updates the manifest.
    fn stage(
        &self,
        name: &str,
        inputs: &[PathBuf],
        seed: Option<u64>,
        config: Value,
        body: impl FnOnce(&mut Vec<String>) -> Result<StageOutput>,
    ) -> Result<()> {
        for p in inputs {
            if !p.is_file() {
                return Err(invalid(format!("missing input file: {}", p.display())));
            }
        }
        let log_dir = self.data_dir.join(LOG_DIR);
        std::fs::create_dir_all(&log_dir).with_context(|| format!("cannot create {}", log_dir.display()))?;
        let mut manifest = PipelineManifest::load(&self.data_dir)?;
        let mut warnings = manifest.stale_inputs(inputs);
        for w in &warnings {
            log::warn!("{w}");
        }
        if self.strict && !warnings.is_empty() {
            return Err(invalid(format!("stale inputs (--strict): {}", warnings.join("; "))));
        }

        let input_digests = digests(inputs)?;
        let started = unix_now();
        let t0 = Instant::now();
        let out = body(&mut warnings)?;
        let seconds = t0.elapsed().as_secs_f64();
        let output_digests = digests(&out.outputs)?;

        let log_path = log_dir.join(format!("{name}.json"));
        let log = RunLog {
            stage: name.to_string(),
            version: env!("CARGO_PKG_VERSION").to_string(),
            argv: self.argv.clone(),
            seed,
            config: json!({ "settings": config, "details": out.details }),
            inputs: to_digests(&input_digests),
            outputs: to_digests(&output_digests),
            started_unix: started,
            seconds,
            warnings,
        };
        std::fs::write(&log_path, serde_json::to_string_pretty(&log)? + "\n")
            .with_context(|| format!("cannot write {}", log_path.display()))?;
        manifest.record(name, &input_digests, &output_digests, &log_path);
        manifest.save(&self.data_dir)
    }

    /// Prints `value` as JSON, or `rows` as tab-separated lines under `header`.
    /// A closed stdout (e.g. `| head`) is not an error.
    fn emit<T: Serialize>(&self, value: &T, header: &[&str], rows: Vec<Vec<String>>) -> Result<()> {
        let mut out = std::io::stdout().lock();
        let written = match self.format {
            Format::Json => writeln!(out, "{}", serde_json::to_string_pretty(value)?),
            Format::Tsv => std::iter::once(header.join("\t"))
                .chain(rows.into_iter().map(|r| r.join("\t")))
                .try_for_each(|line| writeln!(out, "{line}")),
        };
        match written.and_then(|()| out.flush()) {
            Err(e) if e.kind() == std::io::ErrorKind::BrokenPipe => Ok(()),
            r => Ok(r.context("cannot write to stdout")?),
        }
    }
}

/// Stage identity in the manifest and log file name: the stage name, plus
/// the output's file stem when the output path was given explicitly.
fn run_name(stage: &str, output: &Option<PathBuf>) -> String {
    match output.as_ref().and_then(|p| p.file_stem()) {
        Some(stem) => format!("{stage}-{}", stem.to_string_lossy()),
        None => stage.to_string(),
    }
}

fn set_threads(n: usize) -> Result<()> {
    if n == 0 {
        return Err(invalid("--threads must be >= 1"));
    }
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .context("cannot configure the thread pool")
}

pub fn run(cli: Cli) -> Result<()> {
    std::fs::create_dir_all(&cli.data_dir)
        .with_context(|| format!("cannot create data directory {}", cli.data_dir.display()))?;
    let ctx = Ctx {
        data_dir: cli.data_dir,
        format: cli.format,
        strict: cli.strict,
        argv: std::env::args().collect(),
    };
    match cli.command {
        Command::GenCorpus(a) => gen_corpus(&ctx, a),
        Command::Condense(a) => condense_cmd(&ctx, a),
        Command::CompileDict(a) => compile_dict(&ctx, a),
        Command::Map(a) => map_cmd(&ctx, a),
        Command::Train(a) => train_cmd(&ctx, a),
        Command::Similar(a) => similar(&ctx, a),
        Command::EmbedDocs(a) => embed_docs(&ctx, a),
        Command::Tsne(a) => tsne_cmd(&ctx, a),
        Command::Classify(a) => classify_cmd(&ctx, a),
        Command::Evaluate(a) => evaluate_cmd(&ctx, a),
        Command::GridSearch(a) => grid_cmd(&ctx, a),
        Command::Stats(a) => stats(&ctx, a),
    }
}

fn load_reports_at(path: &Path) -> Result<Vec<Report>> {
    load_reports(path).with_context(|| format!("reading {}", path.display()))
}

fn load_condensed_at(path: &Path) -> Result<Vec<CondensedReport>> {
    load_condensed(path).with_context(|| format!("reading {}", path.display()))
}

fn load_model_at(path: &Path) -> Result<EmbeddingModel> {
    EmbeddingModel::load(path).with_context(|| format!("reading {}", path.display()))
}

fn gen_corpus(ctx: &Ctx, a: GenCorpusArgs) -> Result<()> {
    let mut cfg = GenerationConfig::default();
    if let Some(n) = a.n_reports {
        cfg.n_reports = n;
    }
    if let Some(s) = a.seed {
        cfg.seed = s;
    }
    if let Some(p) = &a.proportions {
        cfg.proportions = [p[0], p[1], p[2]];
    }
    if let Some(p) = a.synonym_swap_probability {
        cfg.synonym_swap_probability = p;
    }
    if let Some(p) = a.negation_probability {
        cfg.negation_probability = p;
    }
    if let Some(b) = a.boilerplate_count {
        cfg.boilerplate_count = b;
    }
    let out_dir = a.out_dir.clone().unwrap_or_else(|| ctx.data_dir.clone());
    let inputs: Vec<PathBuf> = a.templates.iter().cloned().collect();
    let settings = json!({ "generation": cfg, "templates": a.templates, "unlabeled": a.unlabeled });
    let mut counts = [0usize; 3];
    ctx.stage(
        &run_name("gen-corpus", &a.out_dir),
        &inputs,
        Some(cfg.seed),
        settings,
        |_| {
            let templates = match &a.templates {
                Some(p) => TemplateSet::load(p).with_context(|| format!("reading {}", p.display()))?,
                None => TemplateSet::builtin(),
            };
            let (mut reports, truth) = generate_corpus(&templates, &cfg)?;
            if a.unlabeled {
                for r in &mut reports {
                    r.label = None;
                }
            }
            std::fs::create_dir_all(&out_dir)?;
            write_corpus(&out_dir, &reports, &truth)?;
            counts = truth.class_counts;
            Ok(StageOutput {
                outputs: vec![out_dir.join("reports.jsonl"), out_dir.join("groundtruth.json")],
                details: json!({ "class_counts": truth.class_counts }),
            })
        },
    )?;
    let rows = RiskClass::ALL
        .iter()
        .map(|c| vec![c.name().to_string(), counts[c.index()].to_string()])
        .collect();
    let value: serde_json::Map<String, Value> = RiskClass::ALL
        .iter()
        .map(|c| (c.name().to_string(), json!(counts[c.index()])))
        .collect();
    ctx.emit(&value, &["class", "reports"], rows)
}

fn condense_cmd(ctx: &Ctx, a: CondenseArgs) -> Result<()> {
    set_threads(a.threads)?;
    let mut inputs = if a.inputs.is_empty() {
        vec![ctx.data_dir.join("reports.jsonl")]
    } else {
        a.inputs.clone()
    };
    let output = ctx.path(&a.output, "condensed.jsonl");
    let collocations = if a.output.is_some() {
        let stem = output.file_stem().unwrap_or_default().to_string_lossy();
        output.with_file_name(format!("{stem}.collocations.tsv"))
    } else {
        ctx.data_dir.join("collocations.tsv")
    };
    let corpus_files = inputs.clone();
    inputs.extend(a.config.iter().cloned());
    let mut cfg = match &a.config {
        Some(p) => CondenserConfig::load(p).with_context(|| format!("reading {}", p.display()))?,
        None => CondenserConfig::default(),
    };
    if let Some(v) = a.min_term_frequency {
        cfg.min_term_frequency = v;
    }
    if let Some(v) = a.collocation_min_count {
        cfg.collocation_min_count = v;
    }
    cfg.validate()?;
    let settings = json!({
        "config": a.config,
        "min_term_frequency": cfg.min_term_frequency,
        "collocation_min_count": cfg.collocation_min_count,
        "negation_cues": cfg.negation_cues,
        "stopwords": cfg.stopwords.len(),
        "threads": a.threads,
    });
    ctx.stage(&run_name("condense", &a.output), &inputs, None, settings, |warnings| {
        let mut reports = Vec::new();
        for f in &corpus_files {
            reports.extend(load_reports_at(f)?);
        }
        let mut seen = HashSet::new();
        if let Some(r) = reports.iter().find(|r| !seen.insert(r.id.as_str())) {
            return Err(invalid(format!("duplicate report id {:?} across inputs", r.id)));
        }
        let out = condense(&reports, &cfg)?;
        for id in &out.fallback_ids {
            warnings.push(format!("report {id}: no FINDINGS/IMPRESSION header"));
        }
        save_condensed(&output, &out.reports)?;
        let mut tsv = String::from("first\tsecond\tcount\n");
        for (f, s, c) in out.collocations.iter() {
            tsv.push_str(&format!("{f}\t{s}\t{c}\n"));
        }
        std::fs::write(&collocations, tsv)?;
        Ok(StageOutput {
            outputs: vec![output.clone(), collocations.clone()],
            details: json!({ "reports": out.reports.len(), "collocations": out.collocations.len() }),
        })
    })
}

fn compile_dict(ctx: &Ctx, a: CompileDictArgs) -> Result<()> {
    let output = ctx.path(&a.output, "domain_dictionary.tsv");
    let inputs: Vec<PathBuf> = a.ontology.iter().cloned().collect();
    let settings = json!({ "ontology": a.ontology, "roots": a.roots });
    let mut entries = 0;
    ctx.stage(&run_name("compile-dict", &a.output), &inputs, None, settings, |_| {
        let export = match &a.ontology {
            Some(p) => OntologyExport::load(p).with_context(|| format!("reading {}", p.display()))?,
            None => OntologyExport::parse(BUILTIN_HEMORRHAGE_ONTOLOGY)?,
        };
        let dict = compile_domain_dictionary(&export, &a.roots)?;
        dict.save(&output)?;
        entries = dict.base_entries().len();
        Ok(StageOutput {
            outputs: vec![output.clone()],
            details: json!({ "entries": entries }),
        })
    })?;
    ctx.emit(
        &json!({ "entries": entries, "output": output }),
        &["entries"],
        vec![vec![entries.to_string()]],
    )
}

fn read_dictionary(name: &str, path: &Path) -> Result<SemanticDictionary> {
    let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    SemanticDictionary::from_tsv(name, &text).with_context(|| format!("parsing {}", path.display()))
}

fn map_cmd(ctx: &Ctx, a: MapArgs) -> Result<()> {
    set_threads(a.threads)?;
    let input = ctx.path(&a.input, "condensed.jsonl");
    let output = ctx.path(&a.output, "mapped.jsonl");
    let mut inputs = vec![input.clone()];
    inputs.extend(a.common.iter().cloned());
    inputs.extend(a.domain.iter().cloned());
    let settings = json!({ "common": a.common, "domain": a.domain, "no_domain": a.no_domain, "threads": a.threads });
    ctx.stage(&run_name("map", &a.output), &inputs, None, settings, |_| {
        let mut dicts = vec![match &a.common {
            Some(p) => load_common_dictionary(p).with_context(|| format!("reading {}", p.display()))?,
            None => builtin_common_dictionary(),
        }];
        if !a.no_domain {
            dicts.push(match &a.domain {
                Some(p) => read_dictionary("domain", p)?,
                None => builtin_domain_dictionary()?,
            });
        }
        let reports = load_condensed_at(&input)?;
        let tokens: Vec<Vec<String>> = reports.iter().map(|r| r.tokens.clone()).collect();
        let mapped: Vec<CondensedReport> = reports
            .iter()
            .zip(map_corpus(&tokens, &dicts))
            .map(|(r, t)| CondensedReport::new(r.id.clone(), t, r.label))
            .collect();
        save_condensed(&output, &mapped)?;
        Ok(StageOutput {
            outputs: vec![output.clone()],
            details: json!({ "reports": mapped.len(), "dictionaries": dicts.iter().map(|d| d.name()).collect::<Vec<_>>() }),
        })
    })
}

/// Starts from the config file (or the defaults) and applies the flags.
fn train_config(flags: &TrainFlags) -> Result<TrainConfig> {
    let mut cfg = match &flags.config {
        Some(p) => {
            let text = std::fs::read_to_string(p).with_context(|| format!("reading {}", p.display()))?;
            if p.extension().is_some_and(|e| e == "json") {
                serde_json::from_str::<TrainConfig>(&text).map_err(|e| invalid(format!("{}: {e}", p.display())))?
            } else {
                toml::from_str::<TrainConfig>(&text).map_err(|e| invalid(format!("{}: {e}", p.display())))?
            }
        }
        None => TrainConfig::default(),
    };
    if let Some(a) = flags.architecture {
        cfg.architecture = match a {
            ArchArg::Cbow => Architecture::Cbow,
            ArchArg::SkipGram => Architecture::SkipGram,
        };
    }
    if let Some(o) = flags.objective {
        cfg.objective = match o {
            ObjectiveArg::Ns => Objective::NegativeSampling,
            ObjectiveArg::Hs => Objective::HierarchicalSoftmax,
        };
    }
    if let Some(v) = flags.negatives {
        cfg.negatives = v;
    }
    if let Some(v) = flags.epochs {
        cfg.epochs = v;
    }
    if let Some(v) = flags.initial_learning_rate {
        cfg.initial_learning_rate = v;
    }
    if let Some(v) = flags.min_count {
        cfg.min_count = v;
    }
    if flags.subsample.is_some() {
        cfg.subsample = flags.subsample;
    }
    Ok(cfg)
}

fn train_model(reports: &[CondensedReport], cfg: &TrainConfig) -> Result<(EmbeddingModel, Value)> {
    cfg.validate()?;
    let corpus: Vec<Vec<&str>> = reports
        .iter()
        .map(|r| r.tokens.iter().map(String::as_str).collect())
        .collect();
    let vocab = build_vocabulary(&corpus, cfg.min_count)?;
    let (model, report) = train_with_report(&corpus, &vocab, cfg)?;
    Ok((model, serde_json::to_value(&report)?))
}

fn train_cmd(ctx: &Ctx, a: TrainArgs) -> Result<()> {
    set_threads(a.threads)?;
    let input = ctx.path(&a.input, "mapped.jsonl");
    let output = ctx.path(&a.output, "model.txt");
    let mut inputs = vec![input.clone()];
    inputs.extend(a.flags.config.iter().cloned());
    let mut cfg = train_config(&a.flags)?;
    if let Some(w) = a.window {
        cfg.window = w;
    }
    if let Some(d) = a.dim {
        cfg.dim = d;
    }
    if let Some(s) = a.seed {
        cfg.seed = s;
    }
    cfg.threads = a.threads;
    cfg.validate()?;
    let settings = serde_json::to_value(&cfg)?;
    let mut shape = (0, 0);
    ctx.stage(&run_name("train", &a.output), &inputs, Some(cfg.seed), settings, |_| {
        let reports = load_condensed_at(&input)?;
        let (model, report) = train_model(&reports, &cfg)?;
        if output.extension().is_some_and(|e| e == "bin") {
            model.save_binary(&output)?;
        } else {
            model.save_text(&output)?;
        }
        shape = (model.len(), model.dim());
        Ok(StageOutput {
            outputs: vec![output.clone()],
            details: report,
        })
    })?;
    ctx.emit(
        &json!({ "vocabulary": shape.0, "dim": shape.1, "output": output }),
        &["vocabulary", "dim"],
        vec![vec![shape.0.to_string(), shape.1.to_string()]],
    )
}

fn similar(ctx: &Ctx, a: SimilarArgs) -> Result<()> {
    let model_path = ctx.path(&a.model, "model.txt");
    if a.k == 0 {
        return Err(invalid("--k must be >= 1"));
    }
    let settings = json!({ "word": a.word, "k": a.k });
    let mut rows = Vec::new();
    ctx.stage("similar", std::slice::from_ref(&model_path), None, settings, |_| {
        let model = load_model_at(&model_path)?;
        rows = most_similar(&model, &a.word, a.k)?;
        Ok(StageOutput {
            outputs: Vec::new(),
            details: json!({ "neighbours": rows.len() }),
        })
    })?;
    let value: Vec<Value> = rows.iter().map(|(w, s)| json!({ "word": w, "score": s })).collect();
    let table = rows
        .iter()
        .enumerate()
        .map(|(i, (w, s))| vec![(i + 1).to_string(), w.clone(), format!("{s:.6}")])
        .collect();
    ctx.emit(&value, &["rank", "word", "score"], table)
}

fn embed_docs(ctx: &Ctx, a: EmbedDocsArgs) -> Result<()> {
    set_threads(a.threads)?;
    let model_path = ctx.path(&a.model, "model.txt");
    let input = ctx.path(&a.input, "mapped.jsonl");
    let output = ctx.path(&a.output, "docvecs.jsonl");
    let settings = json!({ "threads": a.threads });
    ctx.stage(
        &run_name("embed-docs", &a.output),
        &[model_path.clone(), input.clone()],
        None,
        settings,
        |warnings| {
            let model = load_model_at(&model_path)?;
            let reports = load_condensed_at(&input)?;
            let (vectors, degenerate) = embed_corpus(&model, &reports);
            for id in &degenerate {
                let w = format!("report {id} has no in-vocabulary tokens and was skipped");
                log::warn!("{w}");
                warnings.push(w);
            }
            save_document_vectors(&vectors, &output)?;
            Ok(StageOutput {
                outputs: vec![output.clone()],
                details: json!({ "vectors": vectors.len(), "degenerate": degenerate.len() }),
            })
        },
    )
}

fn class_of(label: Option<u8>) -> Result<Option<RiskClass>> {
    label.map(regroup_labels).transpose().map_err(Into::into)
}

fn tsne_cmd(ctx: &Ctx, a: TsneArgs) -> Result<()> {
    set_threads(a.threads)?;
    let input = ctx.path(&a.input, "docvecs.jsonl");
    let output = ctx.path(&a.output, "projection.tsv");
    let mut cfg = ProjectionConfig::default();
    macro_rules! set {
        ($($f:ident),*) => { $( if let Some(v) = a.$f { cfg.$f = v; } )* };
    }
    set!(
        perplexity,
        iterations,
        learning_rate,
        initial_momentum,
        final_momentum,
        exaggeration_iterations,
        early_exaggeration,
        min_gain,
        seed
    );
    if a.pca_dims.is_some() {
        cfg.pca_dims = a.pca_dims;
    }
    let settings = json!({ "projection": cfg, "labeled_only": a.labeled_only, "max_points": a.max_points });
    let mut final_kl = f64::NAN;
    ctx.stage(
        &run_name("tsne", &a.output),
        std::slice::from_ref(&input),
        Some(cfg.seed),
        settings,
        |_| {
            let mut docs = load_document_vectors(&input).with_context(|| format!("reading {}", input.display()))?;
            if a.labeled_only {
                docs.retain(|d| d.label.is_some());
            }
            if let Some(m) = a.max_points {
                docs.truncate(m);
            }
            let x: Vec<Vec<f64>> = docs.iter().map(|d| d.vector.clone()).collect();
            let proj = run_tsne(&x, &cfg)?;
            final_kl = proj.kl_trace.last().copied().unwrap_or(f64::NAN);
            let points = docs
                .iter()
                .zip(&proj.coords)
                .map(|(d, c)| {
                    Ok(ProjectedPoint {
                        id: d.id.clone(),
                        x: c[0],
                        y: c[1],
                        label: class_of(d.label)?.map(|c| c.name().to_string()),
                    })
                })
                .collect::<Result<Vec<_>>>()?;
            write_projection_tsv(&points, &output)?;
            let mut outputs = vec![output.clone()];
            if let Some(svg) = &a.svg {
                write_projection_svg(&points, svg)?;
                outputs.push(svg.clone());
            }
            Ok(StageOutput {
                outputs,
                details: json!({ "points": points.len(), "kl_trace": proj.kl_trace }),
            })
        },
    )?;
    ctx.emit(
        &json!({ "final_kl": final_kl }),
        &["final_kl"],
        vec![vec![format!("{final_kl:.6}")]],
    )
}

fn classifier_of(f: &ClassifierFlags) -> Result<Classifier> {
    Ok(match f.classifier {
        ClassifierArg::RandomForest => {
            if f.n_trees == 0 {
                return Err(invalid("--n-trees must be >= 1"));
            }
            Classifier::RandomForest(ForestConfig {
                n_trees: f.n_trees,
                max_features: f.max_features,
                min_samples_leaf: f.min_samples_leaf,
                max_depth: f.max_depth,
                bootstrap: f.bootstrap,
                seed: f.forest_seed,
            })
        }
        ClassifierArg::Knn => Classifier::Knn {
            k: f.k,
            distance: match f.distance {
                DistanceArg::Euclidean => Distance::Euclidean,
                DistanceArg::Cosine => Distance::Cosine,
            },
        },
    })
}

fn metric_rows(m: &Metrics) -> Vec<Vec<String>> {
    let mut rows: Vec<Vec<String>> = m
        .per_class
        .iter()
        .map(|c| {
            vec![
                c.class.name().to_string(),
                format!("{:.6}", c.precision),
                format!("{:.6}", c.recall),
                format!("{:.6}", c.f1),
                c.support.to_string(),
            ]
        })
        .collect();
    let support: usize = m.per_class.iter().map(|c| c.support).sum();
    rows.push(vec![
        "weighted".into(),
        format!("{:.6}", m.weighted_precision),
        format!("{:.6}", m.weighted_recall),
        format!("{:.6}", m.weighted_f1),
        support.to_string(),
    ]);
    rows
}

const METRIC_HEADER: [&str; 5] = ["class", "precision", "recall", "f1", "support"];

fn classify_cmd(ctx: &Ctx, a: ClassifyArgs) -> Result<()> {
    set_threads(a.threads)?;
    let classifier = classifier_of(&a.classifier)?;
    let input = match a.features {
        FeaturesArg::Embedding => ctx.path(&a.vectors, "docvecs.jsonl"),
        FeaturesArg::Unigram => ctx.path(&a.corpus, "condensed.jsonl"),
    };
    let output = ctx.path(&a.output, "predictions.tsv");
    let metrics_path = ctx.path(&a.metrics, "metrics.json");
    let settings = json!({
        "features": format!("{:?}", a.features).to_lowercase(),
        "tfidf": a.tfidf,
        "classifier": classifier,
        "train_fraction": a.train_fraction,
        "split_seed": a.split_seed,
        "stratified": a.stratified,
    });
    let mut metrics = None;
    ctx.stage(
        &run_name("classify", &a.output),
        std::slice::from_ref(&input),
        Some(a.split_seed),
        settings,
        |warnings| {
            let (ids, classes, features) = match a.features {
                FeaturesArg::Embedding => {
                    let docs = load_document_vectors(&input).with_context(|| format!("reading {}", input.display()))?;
                    let mut ids = Vec::new();
                    let mut classes = Vec::new();
                    let mut features = Vec::new();
                    for d in docs {
                        if let Some(c) = class_of(d.label)? {
                            ids.push(d.id);
                            classes.push(c);
                            features.push(d.vector);
                        }
                    }
                    (ids, classes, Some(features))
                }
                FeaturesArg::Unigram => {
                    let reports = load_condensed_at(&input)?;
                    let mut ids = Vec::new();
                    let mut classes = Vec::new();
                    for r in &reports {
                        if let Some(c) = class_of(r.label)? {
                            ids.push(r.id.clone());
                            classes.push(c);
                        }
                    }
                    (ids, classes, None)
                }
            };
            if classes.is_empty() {
                return Err(invalid(format!("{} holds no labeled reports", input.display())));
            }
            let split = train_test_split(&classes, a.train_fraction, a.split_seed, a.stratified)?;
            for c in &split.missing_from_train {
                warnings.push(format!("class {c} is absent from the training split"));
            }
            let features = match features {
                Some(f) => f,
                None => {
                    let reports = load_condensed_at(&input)?;
                    let labeled: Vec<CondensedReport> = reports.into_iter().filter(|r| r.label.is_some()).collect();
                    unigram_matrix(&labeled, &split.train, a.tfidf)
                }
            };
            let m = repvec::pipeline::fit_and_evaluate(&classifier, &features, &classes, &split.train, &split.test)?;
            let train_rows: Vec<_> = split
                .train
                .iter()
                .map(|&i| repvec::classify::LabeledVector::new(ids[i].clone(), features[i].clone(), classes[i]))
                .collect();
            let queries: Vec<Vec<f64>> = split.test.iter().map(|&i| features[i].clone()).collect();
            let pred = classifier.fit_predict(&train_rows, &queries)?;
            let mut tsv = String::from("id\ttruth\tpredicted\n");
            for (&i, p) in split.test.iter().zip(&pred) {
                tsv.push_str(&format!("{}\t{}\t{}\n", ids[i], classes[i], p));
            }
            std::fs::write(&output, tsv)?;
            std::fs::write(&metrics_path, serde_json::to_string_pretty(&m)? + "\n")?;
            let details =
                json!({ "n_train": split.train.len(), "n_test": split.test.len(), "weighted_f1": m.weighted_f1 });
            metrics = Some(m);
            Ok(StageOutput {
                outputs: vec![output.clone(), metrics_path.clone()],
                details,
            })
        },
    )?;
    let m = metrics.expect("stage sets metrics");
    ctx.emit(&m, &METRIC_HEADER, metric_rows(&m))
}

fn evaluate_cmd(ctx: &Ctx, a: EvaluateArgs) -> Result<()> {
    let input = ctx.path(&a.predictions, "predictions.tsv");
    let mut metrics = None;
    ctx.stage("evaluate", std::slice::from_ref(&input), None, json!({}), |_| {
        let text = std::fs::read_to_string(&input)?;
        let mut truth = Vec::new();
        let mut pred = Vec::new();
        for (i, line) in text.lines().enumerate().skip(1) {
            if line.trim().is_empty() {
                continue;
            }
            let cols: Vec<&str> = line.split('\t').collect();
            if cols.len() != 3 {
                return Err(invalid(format!(
                    "{} line {}: expected id, truth, predicted",
                    input.display(),
                    i + 1
                )));
            }
            truth.push(cols[1].parse::<RiskClass>()?);
            pred.push(cols[2].parse::<RiskClass>()?);
        }
        let m = evaluate(&pred, &truth)?;
        let details = json!({ "rows": truth.len(), "weighted_f1": m.weighted_f1 });
        metrics = Some(m);
        Ok(StageOutput {
            outputs: Vec::new(),
            details,
        })
    })?;
    let m = metrics.expect("stage sets metrics");
    ctx.emit(&m, &METRIC_HEADER, metric_rows(&m))
}

fn grid_cmd(ctx: &Ctx, a: GridSearchArgs) -> Result<()> {
    set_threads(a.threads)?;
    let input = ctx.path(&a.input, "mapped.jsonl");
    let output = ctx.path(&a.output, "grid.tsv");
    let mut inputs = vec![input.clone()];
    inputs.extend(a.train.config.iter().cloned());
    let base = train_config(&a.train)?;
    let spec = GridSearchSpec {
        windows: a.windows.clone(),
        dims: a.dims.clone(),
        folds: a.folds,
        classifier: classifier_of(&a.classifier)?,
        seed: a.seed,
        mode: match a.mode {
            GridModeArg::Cartesian => GridMode::Cartesian,
            GridModeArg::Independent => GridMode::Independent,
        },
    };
    spec.validate()?;
    let settings = json!({ "spec": spec, "train": base });
    let mut result = None;
    ctx.stage(
        &run_name("grid-search", &a.output),
        &inputs,
        Some(a.seed),
        settings,
        |warnings| {
            let reports = load_condensed_at(&input)?;
            let mut labeled = Vec::new();
            let mut ids = Vec::new();
            let mut classes = Vec::new();
            for r in &reports {
                if let Some(c) = class_of(r.label)? {
                    labeled.push(r.clone());
                    ids.push(r.id.clone());
                    classes.push(c);
                }
            }
            if labeled.is_empty() {
                return Err(invalid(format!("{} holds no labeled reports", input.display())));
            }
            let featurize = |window: usize, dim: usize| -> repvec::Result<Vec<Vec<f64>>> {
                let cfg = TrainConfig {
                    window,
                    dim,
                    threads: 1,
                    ..base.clone()
                };
                let (model, _) =
                    train_model(&reports, &cfg).map_err(|e| repvec::Error::Validation(format!("{e:#}")))?;
                Ok(document_features(&model, &labeled))
            };
            let r = grid_search(&ids, &classes, &spec, featurize)?;
            for c in r.table.iter().filter(|c| c.error.is_some()) {
                warnings.push(format!(
                    "cell window={} dim={} failed: {}",
                    c.window,
                    c.dim,
                    c.error.as_deref().unwrap_or("")
                ));
            }
            write_grid_tsv(&r, &output)?;
            let details = serde_json::to_value(&r)?;
            result = Some(r);
            Ok(StageOutput {
                outputs: vec![output.clone()],
                details,
            })
        },
    )?;
    let r = result.expect("stage sets result");
    let rows = r
        .table
        .iter()
        .map(|c| {
            vec![
                c.window.to_string(),
                c.dim.to_string(),
                format!("{:.6}", c.mean_f1),
                format!("{:.6}", c.std_f1),
                c.error.clone().unwrap_or_default(),
            ]
        })
        .collect();
    ctx.emit(&r, &["window", "dim", "mean_f1", "std_f1", "error"], rows)
}

fn stats(ctx: &Ctx, a: StatsArgs) -> Result<()> {
    let raw = ctx.path(&a.raw, "reports.jsonl");
    let condensed = ctx.path(&a.condensed, "condensed.jsonl");
    let mut out = None;
    ctx.stage("stats", &[raw.clone(), condensed.clone()], None, json!({}), |_| {
        let s = corpus_stats(&load_reports_at(&raw)?, &load_condensed_at(&condensed)?)?;
        let details = serde_json::to_value(s)?;
        out = Some(s);
        Ok(StageOutput {
            outputs: Vec::new(),
            details,
        })
    })?;
    let s = out.expect("stage sets stats");
    let rows = vec![vec![
        s.report_count.to_string(),
        format!("{:.3}", s.mean_tokens_raw),
        format!("{:.3}", s.mean_tokens_condensed),
        format!("{:.4}", s.reduction_ratio),
    ]];
    ctx.emit(
        &s,
        &["reports", "mean_tokens_raw", "mean_tokens_condensed", "reduction_ratio"],
        rows,
    )
}
