//! Association information injection: level-wise training of the text
//! encoder against the label tree with top-k candidate selection and masked
//! binary cross-entropy, then emission of the structure-aware embeddings.

use crate::dataset::TahgDataset;
use crate::error::{Error, Result};
use crate::hgnn::{glorot, AdamState};
use crate::matrix::DenseMatrix;
use crate::rng::RngSeed;
use crate::text::{encode, tfidf, EncoderParams, HashedBow};
use crate::tree::{
    build_label_features, build_tree, level_counts_for_height, neighbor_label_rows,
    propagate_labels, LabelTree,
};
use std::collections::BTreeSet;

/// Per-label embedding matrix for one tree level, one row per label.
#[derive(Debug, Clone, PartialEq)]
pub struct LevelHead {
    /// K^(t) x embed_dim
    pub label_embeddings: DenseMatrix,
}

/// Hyperparameters of the association trainer.
#[derive(Debug, Clone, serde::Serialize, serde::Deserialize)]
pub struct TrainConfig {
    /// candidates kept per vertex when predicting the previous level
    pub top_k: usize,
    pub learning_rate: f64,
    /// full-batch gradient epochs per tree level
    pub epochs: usize,
    pub hash_dim: usize,
    pub embed_dim: usize,
    /// label tree height
    pub tree_height: usize,
    pub seed: RngSeed,
}

impl TrainConfig {
    pub fn new(seed: RngSeed) -> Self {
        TrainConfig {
            top_k: 5,
            learning_rate: 1e-3,
            epochs: 200,
            hash_dim: crate::text::DEFAULT_HASH_DIM,
            embed_dim: crate::text::DEFAULT_EMBED_DIM,
            tree_height: crate::tree::TREE_HEIGHT,
            seed,
        }
    }

    fn validate(&self) -> Result<()> {
        if self.top_k == 0 {
            return Err(Error::invalid_argument("top_k must be >= 1"));
        }
        if self.learning_rate <= 0.0 {
            return Err(Error::invalid_argument("learning_rate must be positive"));
        }
        Ok(())
    }
}

/// For each vertex, the `k` labels with the largest logits, ties broken
/// toward the lower label id. Rows come back sorted ascending.
pub fn predict_topk(
    head: &LevelHead,
    embeddings: &DenseMatrix,
    k: usize,
) -> Result<Vec<Vec<usize>>> {
    let num_labels = head.label_embeddings.rows();
    if k > num_labels {
        return Err(Error::invalid_argument(format!(
            "top-k {k} exceeds label count {num_labels}"
        )));
    }
    let mut rows = Vec::with_capacity(embeddings.rows());
    for v in 0..embeddings.rows() {
        let emb = embeddings.row(v);
        let mut scored: Vec<(f64, usize)> = (0..num_labels)
            .map(|x| {
                (
                    crate::matrix::dot(emb, head.label_embeddings.row(x)),
                    x,
                )
            })
            .collect();
        // descending score, ascending id on ties
        scored.sort_by(|a, b| b.0.partial_cmp(&a.0).unwrap().then(a.1.cmp(&b.1)));
        let mut picked: Vec<usize> = scored[..k].iter().map(|&(_, x)| x).collect();
        picked.sort_unstable();
        rows.push(picked);
    }
    Ok(rows)
}

/// Sample selection: a label is selected for a vertex iff its parent
/// cluster was predicted or true at the previous level.
pub fn selection_mask(
    predicted_prev: &[Vec<usize>],
    true_prev: &[Vec<usize>],
    parent_of: &[usize],
) -> Result<Vec<Vec<usize>>> {
    if predicted_prev.len() != true_prev.len() {
        return Err(Error::invalid_argument("selection mask row count mismatch"));
    }
    let num_parents = parent_of.iter().max().map_or(0, |&p| p + 1);
    let mut children: Vec<Vec<usize>> = vec![Vec::new(); num_parents];
    for (x, &p) in parent_of.iter().enumerate() {
        children[p].push(x);
    }
    let mut rows = Vec::with_capacity(true_prev.len());
    for (pred, truth) in predicted_prev.iter().zip(true_prev) {
        let parents: BTreeSet<usize> = pred.iter().chain(truth).copied().collect();
        let mut row = Vec::new();
        for &p in &parents {
            if p < num_parents {
                row.extend_from_slice(&children[p]);
            }
        }
        row.sort_unstable();
        rows.push(row);
    }
    Ok(rows)
}

/// Gradients of one level's masked BCE objective.
#[derive(Debug, Clone)]
pub struct LevelGrads {
    pub d_label_embeddings: DenseMatrix,
    pub d_projection: DenseMatrix,
    pub d_bias: Vec<f64>,
}

fn sigmoid(z: f64) -> f64 {
    1.0 / (1.0 + (-z).exp())
}

const PROB_CLAMP: f64 = 1e-12;

/// Masked binary cross-entropy over the selected (vertex, label) pairs,
/// averaged, with exact gradients for the head and the linear-tanh encoder.
pub fn level_loss_and_grads(
    head: &LevelHead,
    encoder: &EncoderParams,
    bow: &HashedBow,
    true_rows: &[Vec<usize>],
    selected_rows: &[Vec<usize>],
) -> Result<(f64, LevelGrads)> {
    let total: usize = selected_rows.iter().map(|r| r.len()).sum();
    if total == 0 {
        return Err(Error::invalid_argument(
            "empty selection mask: degenerate level",
        ));
    }
    let embeddings = encode(encoder, bow)?;
    let n = embeddings.rows();
    if true_rows.len() != n || selected_rows.len() != n {
        return Err(Error::invalid_argument("label rows do not match vertex count"));
    }
    let c = embeddings.cols();
    let num_labels = head.label_embeddings.rows();

    let mut loss = 0.0;
    let inv = 1.0 / total as f64;
    let mut d_w = DenseMatrix::zeros(num_labels, c);
    let mut d_emb = DenseMatrix::zeros(n, c);
    let mut truth_flags = vec![false; num_labels];

    for v in 0..n {
        if selected_rows[v].is_empty() {
            continue;
        }
        for &x in &true_rows[v] {
            truth_flags[x] = true;
        }
        let emb = embeddings.row(v);
        for &x in &selected_rows[v] {
            let w = head.label_embeddings.row(x);
            let p = sigmoid(crate::matrix::dot(emb, w))
                .clamp(PROB_CLAMP, 1.0 - PROB_CLAMP);
            let y = if truth_flags[x] { 1.0 } else { 0.0 };
            loss -= (y * p.ln() + (1.0 - y) * (1.0 - p).ln()) * inv;
            let g = (p - y) * inv;
            let dw_row = d_w.row_mut(x);
            for (d, &e) in dw_row.iter_mut().zip(emb) {
                *d += g * e;
            }
            let de_row = d_emb.row_mut(v);
            for (d, &wv) in de_row.iter_mut().zip(w) {
                *d += g * wv;
            }
        }
        for &x in &true_rows[v] {
            truth_flags[x] = false;
        }
    }

    // back through tanh and the sparse bow projection
    let mut d_projection = DenseMatrix::zeros(encoder.input_dim(), c);
    let mut d_bias = vec![0.0; c];
    for v in 0..n {
        let emb = embeddings.row(v);
        let mut d_pre = d_emb.row(v).to_vec();
        for (d, &e) in d_pre.iter_mut().zip(emb) {
            *d *= 1.0 - e * e;
        }
        for (b, &d) in d_bias.iter_mut().zip(&d_pre) {
            *b += d;
        }
        for &(id, count) in bow.row(v) {
            let prow = d_projection.row_mut(id as usize);
            let w = count as f64;
            for (p, &d) in prow.iter_mut().zip(&d_pre) {
                *p += w * d;
            }
        }
    }

    Ok((
        loss,
        LevelGrads {
            d_label_embeddings: d_w,
            d_projection,
            d_bias,
        },
    ))
}

/// Per-level loss traces from [`train_association`].
#[derive(Debug, Clone)]
pub struct TrainOutcome {
    pub encoder: EncoderParams,
    pub heads: Vec<LevelHead>,
    /// one loss-per-epoch vector per tree level
    pub level_losses: Vec<Vec<f64>>,
}

/// Hierarchical progressive training: coarsest level first, each level's
/// candidate mask derived from the previous level's trained head. The
/// coarsest level trains unmasked (its virtual root predicts everything).
pub fn train_association(
    tree: &LabelTree,
    encoder: EncoderParams,
    bow: &HashedBow,
    cfg: &TrainConfig,
) -> Result<TrainOutcome> {
    cfg.validate()?;
    if tree.labels.len() != tree.height() {
        return Err(Error::invalid_argument(
            "tree labels not propagated; run propagate_labels first",
        ));
    }
    let n = bow.num_rows();
    let c = encoder.embed_dim();
    let mut encoder = encoder;
    let mut heads: Vec<LevelHead> = tree
        .counts
        .iter()
        .enumerate()
        .map(|(t, &k)| LevelHead {
            label_embeddings: glorot(k, c, cfg.seed.derive(10 + t as u64)),
        })
        .collect();
    let mut level_losses = Vec::with_capacity(tree.height());

    for t in 0..tree.height() {
        let selected: Vec<Vec<usize>> = if t == 0 {
            let all: Vec<usize> = (0..tree.counts[0]).collect();
            vec![all; n]
        } else {
            let embeddings = encode(&encoder, bow)?;
            let k_prev = cfg.top_k.min(tree.counts[t - 1]);
            let predicted = predict_topk(&heads[t - 1], &embeddings, k_prev)?;
            selection_mask(&predicted, &tree.labels[t - 1], &tree.parent_of[t])?
        };

        let mut adam_w = AdamState::new(heads[t].label_embeddings.values().len());
        let mut adam_proj = AdamState::new(encoder.projection.values().len());
        let mut adam_bias = AdamState::new(encoder.bias.len());
        let mut losses = Vec::with_capacity(cfg.epochs);
        for _epoch in 0..cfg.epochs {
            let (loss, grads) =
                level_loss_and_grads(&heads[t], &encoder, bow, &tree.labels[t], &selected)?;
            losses.push(loss);
            adam_w.step(
                heads[t].label_embeddings.values_mut(),
                grads.d_label_embeddings.values(),
                cfg.learning_rate,
            );
            adam_proj.step(
                encoder.projection.values_mut(),
                grads.d_projection.values(),
                cfg.learning_rate,
            );
            adam_bias.step(&mut encoder.bias, &grads.d_bias, cfg.learning_rate);
        }
        level_losses.push(losses);
    }

    Ok(TrainOutcome {
        encoder,
        heads,
        level_losses,
    })
}

/// Forward the trained encoder over the corpus.
pub fn emit_embeddings(encoder: &EncoderParams, bow: &HashedBow) -> Result<DenseMatrix> {
    encode(encoder, bow)
}

/// Full per-domain embedding pipeline: hashed bow, TF-IDF label features,
/// label tree, association training, embedding emission.
pub fn embed_pipeline(dataset: &TahgDataset, cfg: &TrainConfig) -> Result<DenseMatrix> {
    let bow = HashedBow::from_texts(&dataset.texts, cfg.hash_dim)?;
    let psi = tfidf(&dataset.texts, cfg.hash_dim)?;
    let z = build_label_features(&dataset.hypergraph, &psi)?;
    let counts = level_counts_for_height(dataset.num_vertices(), cfg.tree_height);
    let mut tree = build_tree(&z, &counts, cfg.seed.derive(1))?;
    propagate_labels(&mut tree, neighbor_label_rows(&dataset.hypergraph))?;
    let encoder = EncoderParams::init(cfg.hash_dim, cfg.embed_dim, cfg.seed.derive(2));
    let outcome = train_association(&tree, encoder, &bow, cfg)?;
    emit_embeddings(&outcome.encoder, &bow)
}
