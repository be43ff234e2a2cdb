//! Trained model container and its on-disk formats.
//!
//! Text format: a `V d` header line, then one `word v1 .. vd` line per
//! vocabulary word with six fixed decimals. Only input vectors are stored;
//! a model loaded from text has zero output vectors and zero counts.
//!
//! Binary format: magic bytes, the training config as JSON, the vocabulary
//! with counts, then both matrices as little-endian `f64`.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Read, Write};
use std::path::Path;

use super::config::TrainConfig;
use super::vocab::Vocabulary;
use crate::{Error, Result};

/// Dense row-major matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct Matrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl Matrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Matrix {
            rows,
            cols,
            data: vec![0.0; rows * cols],
        }
    }

    pub fn from_vec(rows: usize, cols: usize, data: Vec<f64>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::Validation(format!(
                "matrix data has {} values, expected {rows}x{cols}",
                data.len()
            )));
        }
        Ok(Matrix { rows, cols, data })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn row_mut(&mut self, i: usize) -> &mut [f64] {
        &mut self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn as_mut_slice(&mut self) -> &mut [f64] {
        &mut self.data
    }

    /// Index of the first row holding a non-finite value.
    pub fn first_non_finite_row(&self) -> Option<usize> {
        self.data
            .iter()
            .position(|x| !x.is_finite())
            .map(|p| p / self.cols.max(1))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EmbeddingModel {
    pub vocab: Vocabulary,
    /// Word vectors `v_w`, one row per vocabulary word.
    pub input: Matrix,
    /// Output vectors `v'_w` for negative sampling; for hierarchical softmax
    /// row `i` is inner node `i` of the Huffman tree and the last row is unused.
    pub output: Matrix,
    pub config: TrainConfig,
}

impl EmbeddingModel {
    pub fn new(vocab: Vocabulary, input: Matrix, output: Matrix, config: TrainConfig) -> Result<Self> {
        let v = vocab.len();
        if input.rows() != v || output.rows() != v {
            return Err(Error::ModelFormat(format!(
                "matrices have {}/{} rows for a vocabulary of {v}",
                input.rows(),
                output.rows()
            )));
        }
        if input.cols() != output.cols() || input.cols() != config.dim {
            return Err(Error::ModelFormat("matrix widths disagree with dim".into()));
        }
        if let Some(r) = input.first_non_finite_row() {
            return Err(Error::ModelFormat(format!("non-finite value in row {r}")));
        }
        if let Some(r) = output.first_non_finite_row() {
            return Err(Error::ModelFormat(format!("non-finite value in row {r}")));
        }
        Ok(EmbeddingModel {
            vocab,
            input,
            output,
            config,
        })
    }

    pub fn dim(&self) -> usize {
        self.input.cols()
    }

    pub fn len(&self) -> usize {
        self.vocab.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vocab.is_empty()
    }

    pub fn vector(&self, word: &str) -> Option<&[f64]> {
        self.vocab.index_of(word).map(|i| self.input.row(i))
    }

    pub fn write_text<W: Write>(&self, mut w: W) -> Result<()> {
        let err = |e| Error::io("<model>", e);
        writeln!(w, "{} {}", self.len(), self.dim()).map_err(err)?;
        let mut line = String::new();
        for (i, word) in self.vocab.words().iter().enumerate() {
            line.clear();
            line.push_str(word);
            for x in self.input.row(i) {
                use std::fmt::Write as _;
                let _ = write!(line, " {x:.6}");
            }
            line.push('\n');
            w.write_all(line.as_bytes()).map_err(err)?;
        }
        w.flush().map_err(err)
    }

    pub fn save_text(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let f = File::create(path).map_err(|e| Error::io(path, e))?;
        self.write_text(BufWriter::new(f)).map_err(|e| relabel(e, path))
    }

    pub fn read_text<R: BufRead>(r: R) -> Result<Self> {
        let mut lines = r.lines().enumerate();
        let (_, header) = lines
            .next()
            .ok_or_else(|| Error::ModelFormat("empty model file".into()))?;
        let header = header.map_err(|e| Error::io("<model>", e))?;
        let (v, d) = parse_header(&header)?;
        let mut words = Vec::with_capacity(v);
        let mut data = Vec::with_capacity(v * d);
        for (i, line) in lines {
            let line = line.map_err(|e| Error::io("<model>", e))?;
            if line.trim().is_empty() {
                continue;
            }
            if words.len() == v {
                return Err(Error::ModelFormat(format!(
                    "more than the {v} rows announced in the header"
                )));
            }
            let mut parts = line.split_whitespace();
            let word = parts.next().unwrap_or_default().to_string();
            let before = data.len();
            for p in parts {
                let x: f64 = p.parse().map_err(|_| Error::Parse {
                    line: i + 1,
                    message: format!("bad number {p:?}"),
                })?;
                data.push(x);
            }
            if data.len() - before != d {
                return Err(Error::ModelFormat(format!(
                    "line {}: expected {d} components, found {}",
                    i + 1,
                    data.len() - before
                )));
            }
            words.push(word);
        }
        if words.len() != v {
            return Err(Error::ModelFormat(format!(
                "header announces {v} rows but file has {}",
                words.len()
            )));
        }
        let counts = vec![0; v];
        let vocab = Vocabulary::from_parts(words, counts, 1)?;
        let config = TrainConfig {
            dim: d,
            ..TrainConfig::default()
        };
        EmbeddingModel::new(vocab, Matrix::from_vec(v, d, data)?, Matrix::zeros(v, d), config)
    }

    pub fn load_text(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let f = File::open(path).map_err(|e| Error::io(path, e))?;
        Self::read_text(BufReader::new(f))
    }

    pub fn write_binary<W: Write>(&self, mut w: W) -> Result<()> {
        let err = |e| Error::io("<model>", e);
        let config = serde_json::to_vec(&self.config).expect("config serializes");
        let mut buf = Vec::new();
        buf.extend_from_slice(BINARY_MAGIC);
        put_u64(&mut buf, config.len() as u64);
        buf.extend_from_slice(&config);
        put_u64(&mut buf, self.len() as u64);
        put_u64(&mut buf, self.dim() as u64);
        put_u64(&mut buf, self.vocab.min_count());
        for (i, word) in self.vocab.words().iter().enumerate() {
            put_u64(&mut buf, word.len() as u64);
            buf.extend_from_slice(word.as_bytes());
            put_u64(&mut buf, self.vocab.count(i));
        }
        for x in self.input.as_slice().iter().chain(self.output.as_slice()) {
            buf.extend_from_slice(&x.to_le_bytes());
        }
        w.write_all(&buf).map_err(err)?;
        w.flush().map_err(err)
    }

    pub fn save_binary(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let f = File::create(path).map_err(|e| Error::io(path, e))?;
        self.write_binary(BufWriter::new(f)).map_err(|e| relabel(e, path))
    }

    pub fn read_binary(bytes: &[u8]) -> Result<Self> {
        let mut cur = Cursor { bytes, pos: 0 };
        if cur.take(BINARY_MAGIC.len())? != BINARY_MAGIC {
            return Err(Error::ModelFormat("missing binary model magic".into()));
        }
        let clen = cur.u64()? as usize;
        let config: TrainConfig = serde_json::from_slice(cur.take(clen)?)
            .map_err(|e| Error::ModelFormat(format!("bad embedded config: {e}")))?;
        let v = cur.u64()? as usize;
        let d = cur.u64()? as usize;
        let min_count = cur.u64()?;
        let mut words = Vec::with_capacity(v.min(1 << 20));
        let mut counts = Vec::with_capacity(v.min(1 << 20));
        for _ in 0..v {
            let len = cur.u64()? as usize;
            let w = std::str::from_utf8(cur.take(len)?).map_err(|_| Error::ModelFormat("word is not UTF-8".into()))?;
            words.push(w.to_string());
            counts.push(cur.u64()?);
        }
        let mut read_matrix = || -> Result<Matrix> {
            let raw = cur.take(v * d * 8)?;
            let data = raw
                .chunks_exact(8)
                .map(|c| f64::from_le_bytes(c.try_into().unwrap()))
                .collect();
            Matrix::from_vec(v, d, data)
        };
        let input = read_matrix()?;
        let output = read_matrix()?;
        if cur.pos != bytes.len() {
            return Err(Error::ModelFormat("trailing bytes after model".into()));
        }
        let vocab = Vocabulary::from_parts(words, counts, min_count)?;
        EmbeddingModel::new(vocab, input, output, config)
    }

    pub fn load_binary(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let bytes = std::fs::read(path).map_err(|e| Error::io(path, e))?;
        Self::read_binary(&bytes)
    }

    /// Loads either format, detected from the leading bytes.
    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let mut f = File::open(path).map_err(|e| Error::io(path, e))?;
        let mut head = [0u8; 8];
        let n = f.read(&mut head).map_err(|e| Error::io(path, e))?;
        if n == BINARY_MAGIC.len() && head == *BINARY_MAGIC {
            Self::load_binary(path)
        } else {
            Self::load_text(path)
        }
    }
}

pub const BINARY_MAGIC: &[u8; 8] = b"RPVEC01\n";

/// Parses a `V d` text header.
pub fn parse_header(line: &str) -> Result<(usize, usize)> {
    let parts: Vec<&str> = line.split_whitespace().collect();
    let bad = || Error::ModelFormat(format!("bad header {line:?}, expected \"V d\""));
    if parts.len() != 2 {
        return Err(bad());
    }
    let v = parts[0].parse().map_err(|_| bad())?;
    let d = parts[1].parse().map_err(|_| bad())?;
    if v == 0 || d == 0 {
        return Err(bad());
    }
    Ok((v, d))
}

pub fn save_model(model: &EmbeddingModel, path: impl AsRef<Path>) -> Result<()> {
    model.save_text(path)
}

pub fn load_model(path: impl AsRef<Path>) -> Result<EmbeddingModel> {
    EmbeddingModel::load(path)
}

fn relabel(e: Error, path: &Path) -> Error {
    match e {
        Error::Io { source, .. } => Error::io(path, source),
        other => other,
    }
}

fn put_u64(buf: &mut Vec<u8>, x: u64) {
    buf.extend_from_slice(&x.to_le_bytes());
}

struct Cursor<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Cursor<'a> {
    fn take(&mut self, n: usize) -> Result<&'a [u8]> {
        let end = self
            .pos
            .checked_add(n)
            .filter(|&e| e <= self.bytes.len())
            .ok_or_else(|| Error::ModelFormat("truncated binary model".into()))?;
        let s = &self.bytes[self.pos..end];
        self.pos = end;
        Ok(s)
    }

    fn u64(&mut self) -> Result<u64> {
        Ok(u64::from_le_bytes(self.take(8)?.try_into().unwrap()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn toy() -> EmbeddingModel {
        let vocab = Vocabulary::from_parts(vec!["a".into(), "b".into()], vec![3, 2], 1).unwrap();
        let input = Matrix::from_vec(2, 2, vec![0.1234567, -0.5, 1e-9, 2.0]).unwrap();
        let output = Matrix::from_vec(2, 2, vec![0.5, 0.25, -0.125, 0.0]).unwrap();
        let config = TrainConfig {
            dim: 2,
            ..Default::default()
        };
        EmbeddingModel::new(vocab, input, output, config).unwrap()
    }

    #[test]
    fn header_parses() {
        assert_eq!(parse_header("4442 730").unwrap(), (4442, 730));
        assert!(parse_header("4442").is_err());
        assert!(parse_header("a b").is_err());
    }

    #[test]
    fn text_round_trip_is_canonical() {
        let mut first = Vec::new();
        toy().write_text(&mut first).unwrap();
        let loaded = EmbeddingModel::read_text(&first[..]).unwrap();
        let mut second = Vec::new();
        loaded.write_text(&mut second).unwrap();
        assert_eq!(first, second);
        for (a, b) in toy().input.as_slice().iter().zip(loaded.input.as_slice()) {
            assert!((a - b).abs() <= 1e-6);
        }
    }

    #[test]
    fn truncated_text_is_error() {
        let mut buf = Vec::new();
        toy().write_text(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let cut: String = text.lines().take(2).collect::<Vec<_>>().join("\n");
        assert!(EmbeddingModel::read_text(cut.as_bytes()).is_err());
        let short = text.replacen(" 2.000000", "", 1);
        assert!(EmbeddingModel::read_text(short.as_bytes()).is_err());
    }

    #[test]
    fn binary_round_trip_is_exact() {
        let mut buf = Vec::new();
        toy().write_binary(&mut buf).unwrap();
        assert_eq!(EmbeddingModel::read_binary(&buf).unwrap(), toy());
        assert!(EmbeddingModel::read_binary(&buf[..buf.len() - 3]).is_err());
    }
}
