use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::model::EmbeddingModel;
use crate::corpus::CondensedReport;
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DocumentVector {
    pub id: String,
    pub vector: Vec<f64>,
    pub n_known: usize,
    #[serde(default)]
    pub n_oov: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub label: Option<u8>,
}

/// Mean input vector of the in-vocabulary tokens. Rows are summed in
/// vocabulary-index order, so any permutation of `tokens` gives a bitwise
/// identical result.
pub fn embed_document<S: AsRef<str>>(model: &EmbeddingModel, tokens: &[S]) -> Result<DocumentVector> {
    let mut known: Vec<usize> = Vec::with_capacity(tokens.len());
    for t in tokens {
        if let Some(i) = model.vocab.index_of(t.as_ref()) {
            known.push(i);
        }
    }
    if known.is_empty() {
        return Err(Error::DegenerateDocument(String::new()));
    }
    known.sort_unstable();
    let mut vector = vec![0.0; model.dim()];
    for &i in &known {
        for (s, x) in vector.iter_mut().zip(model.input.row(i)) {
            *s += x;
        }
    }
    let n = known.len() as f64;
    for s in &mut vector {
        *s /= n;
    }
    Ok(DocumentVector {
        id: String::new(),
        vector,
        n_known: known.len(),
        n_oov: tokens.len() - known.len(),
        label: None,
    })
}

pub fn embed_report(model: &EmbeddingModel, report: &CondensedReport) -> Result<DocumentVector> {
    let mut dv = embed_document(model, &report.tokens).map_err(|e| match e {
        Error::DegenerateDocument(_) => Error::DegenerateDocument(report.id.clone()),
        other => other,
    })?;
    dv.id = report.id.clone();
    dv.label = report.label;
    Ok(dv)
}

/// Embeds every report, in input order. Degenerate reports are returned
/// separately by id instead of failing the batch.
pub fn embed_corpus(model: &EmbeddingModel, reports: &[CondensedReport]) -> (Vec<DocumentVector>, Vec<String>) {
    let results: Vec<Result<DocumentVector>> = reports.par_iter().map(|r| embed_report(model, r)).collect();
    let mut vectors = Vec::with_capacity(results.len());
    let mut degenerate = Vec::new();
    for (r, res) in reports.iter().zip(results) {
        match res {
            Ok(v) => vectors.push(v),
            Err(_) => degenerate.push(r.id.clone()),
        }
    }
    (vectors, degenerate)
}

pub fn save_document_vectors(vectors: &[DocumentVector], path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let f = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = BufWriter::new(f);
    for v in vectors {
        let line = serde_json::to_string(v).expect("document vector serializes");
        writeln!(w, "{line}").map_err(|e| Error::io(path, e))?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

pub fn load_document_vectors(path: impl AsRef<Path>) -> Result<Vec<DocumentVector>> {
    let path = path.as_ref();
    let f = File::open(path).map_err(|e| Error::io(path, e))?;
    let mut out = Vec::new();
    for (i, line) in BufReader::new(f).lines().enumerate() {
        let line = line.map_err(|e| Error::io(path, e))?;
        if line.trim().is_empty() {
            continue;
        }
        let v: DocumentVector = serde_json::from_str(&line).map_err(|e| Error::Parse {
            line: i + 1,
            message: e.to_string(),
        })?;
        if v.vector.iter().any(|x| !x.is_finite()) {
            return Err(Error::Validation(format!("non-finite vector for {}", v.id)));
        }
        out.push(v);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::embedding::{Matrix, TrainConfig, Vocabulary};

    fn model() -> EmbeddingModel {
        let words = ["u", "w"].map(String::from).to_vec();
        let vocab = Vocabulary::from_parts(words, vec![1; 2], 1).unwrap();
        let input = Matrix::from_vec(2, 2, vec![1.0, 2.0, 3.0, -4.0]).unwrap();
        let cfg = TrainConfig {
            dim: 2,
            ..Default::default()
        };
        EmbeddingModel::new(vocab, input, Matrix::zeros(2, 2), cfg).unwrap()
    }

    #[test]
    fn mean_of_known_tokens() {
        let m = model();
        assert_eq!(embed_document(&m, &["u"]).unwrap().vector, [1.0, 2.0]);
        let d = embed_document(&m, &["w", "oov", "u"]).unwrap();
        assert_eq!(d.vector, [2.0, -1.0]);
        assert_eq!((d.n_known, d.n_oov), (2, 1));
    }

    #[test]
    fn all_oov_is_degenerate() {
        let r = CondensedReport::new("r9", vec!["x".into()], None);
        assert!(matches!(
            embed_report(&model(), &r),
            Err(Error::DegenerateDocument(id)) if id == "r9"
        ));
    }
}
