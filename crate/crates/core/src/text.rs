//! Text featurization: hashed bag-of-words, TF-IDF over the hashed
//! vocabulary, and the trainable linear-tanh encoder whose outputs become
//! the structure-aware vertex embeddings.
//!
//! The hashing trick fixes one vocabulary-free dimension across domains, so
//! corpora with different token sets land in a shared feature space.

use crate::error::{Error, Result};
use crate::matrix::DenseMatrix;
use crate::numerics::{l2_normalize_rows, truncated_svd};
use crate::rng::RngSeed;
use rand::Rng;

/// Default hashed vocabulary size (power of two).
pub const DEFAULT_HASH_DIM: usize = 4096;
/// Default embedding width produced by the encoder.
pub const DEFAULT_EMBED_DIM: usize = 256;

/// Sparse hashed token counts, one row per vertex.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct HashedBow {
    dim: usize,
    /// per row: (hashed token id, count), ids sorted ascending, counts >= 1
    rows: Vec<Vec<(u32, u32)>>,
}

impl HashedBow {
    pub fn from_texts(texts: &[String], dim: usize) -> Result<Self> {
        if !dim.is_power_of_two() {
            return Err(Error::invalid_argument(format!(
                "hash dimension {dim} must be a power of two"
            )));
        }
        let rows = texts
            .iter()
            .map(|t| {
                let mut counts: Vec<(u32, u32)> = Vec::new();
                let mut ids: Vec<u32> = tokenize(t).map(|tok| hash_token(tok, dim)).collect();
                ids.sort_unstable();
                for id in ids {
                    match counts.last_mut() {
                        Some(last) if last.0 == id => last.1 += 1,
                        _ => counts.push((id, 1)),
                    }
                }
                counts
            })
            .collect();
        Ok(HashedBow { dim, rows })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn num_rows(&self) -> usize {
        self.rows.len()
    }

    pub fn row(&self, i: usize) -> &[(u32, u32)] {
        &self.rows[i]
    }
}

/// Lowercased alphanumeric tokens of `text`.
pub fn tokenize(text: &str) -> impl Iterator<Item = String> + '_ {
    text.split(|c: char| !c.is_alphanumeric())
        .filter(|t| !t.is_empty())
        .map(|t| t.to_lowercase())
}

/// Hash a token into `0..dim` (`dim` a power of two): FNV-1a over the bytes,
/// then a multiply-shift down to the table size.
pub fn hash_token(token: String, dim: usize) -> u32 {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for b in token.as_bytes() {
        h ^= *b as u64;
        h = h.wrapping_mul(0x0000_0100_0000_01b3);
    }
    let shift = 64 - dim.trailing_zeros();
    (h.wrapping_mul(0x9e37_79b9_7f4a_7c15) >> shift) as u32
}

/// TF-IDF rows over the hashed vocabulary, L2-normalized.
///
/// `entry = tf(t, d) * ln((1 + N) / (1 + df(t)))`; a token present in every
/// document therefore contributes nothing. Rows of empty texts stay zero.
pub fn tfidf(texts: &[String], dim: usize) -> Result<DenseMatrix> {
    let bow = HashedBow::from_texts(texts, dim)?;
    if bow.rows.iter().all(|r| r.is_empty()) {
        return Err(Error::invalid_argument("tfidf over all-empty texts"));
    }
    let n = texts.len() as f64;
    let mut df = vec![0u32; dim];
    for row in &bow.rows {
        for &(id, _) in row {
            df[id as usize] += 1;
        }
    }
    let mut out = DenseMatrix::zeros(texts.len(), dim);
    for (i, row) in bow.rows.iter().enumerate() {
        let orow = out.row_mut(i);
        for &(id, count) in row {
            let idf = ((1.0 + n) / (1.0 + df[id as usize] as f64)).ln();
            orow[id as usize] = count as f64 * idf;
        }
    }
    Ok(l2_normalize_rows(&out))
}

/// Trainable linear-tanh text encoder `Φ`: `row = tanh(bow · projection + bias)`.
///
/// Stands in for the fine-tuned language model; the hierarchical-prediction
/// trainer only needs a differentiable map from text to a fixed-width
/// embedding, so anything exposing forward + parameter gradients can be
/// dropped in here.
#[derive(Debug, Clone, PartialEq)]
pub struct EncoderParams {
    /// dim x embed_dim
    pub projection: DenseMatrix,
    /// embed_dim
    pub bias: Vec<f64>,
}

impl EncoderParams {
    /// Glorot-uniform initialization, deterministic per seed.
    pub fn init(dim: usize, embed_dim: usize, seed: RngSeed) -> Self {
        let mut rng = seed.rng();
        let limit = (6.0 / (dim + embed_dim) as f64).sqrt();
        let mut projection = DenseMatrix::zeros(dim, embed_dim);
        for v in projection.values_mut() {
            *v = (rng.random::<f64>() * 2.0 - 1.0) * limit;
        }
        EncoderParams {
            projection,
            bias: vec![0.0; embed_dim],
        }
    }

    pub fn embed_dim(&self) -> usize {
        self.projection.cols()
    }

    pub fn input_dim(&self) -> usize {
        self.projection.rows()
    }
}

/// Forward pass of the encoder over every bow row.
pub fn encode(params: &EncoderParams, bow: &HashedBow) -> Result<DenseMatrix> {
    if bow.dim() != params.input_dim() {
        return Err(Error::invalid_argument(format!(
            "bow dimension {} does not match projection rows {}",
            bow.dim(),
            params.input_dim()
        )));
    }
    let c = params.embed_dim();
    let mut out = DenseMatrix::zeros(bow.num_rows(), c);
    for i in 0..bow.num_rows() {
        let orow = out.row_mut(i);
        orow.copy_from_slice(&params.bias);
        for &(id, count) in bow.row(i) {
            let prow = params.projection.row(id as usize);
            let w = count as f64;
            for (o, &p) in orow.iter_mut().zip(prow) {
                *o += w * p;
            }
        }
        for o in orow {
            *o = o.tanh();
        }
    }
    Ok(out)
}

/// Compress feature rows to `r` dimensions via truncated SVD.
pub fn compress_features(x: &DenseMatrix, r: usize) -> Result<DenseMatrix> {
    truncated_svd(x, r)
}
