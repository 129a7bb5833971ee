//! Self-supervised multi-domain pretraining: every epoch re-samples the
//! domains, rebuilds the hierarchical multi-hypergraph, and trains the
//! backbone on a contrastive structural loss plus a masked feature
//! reconstruction loss, aggregated without weighting.

use crate::checkpoint::{config_digest, Checkpoint, CheckpointMeta, NamedTensor};
use crate::error::{Error, Result};
use crate::hgnn::{backward, forward, glorot, init_params, AdamState, HgnnParams};
use crate::hypergraph::Hypergraph;
use crate::matrix::DenseMatrix;
use crate::multihg::{
    assemble, assemble_flat, cluster_domain, sample_all, DomainLayer,
    HierarchicalMultiHypergraph, SampleStrategy, DEFAULT_BUDGET, DEFAULT_CLUSTERS, DEFAULT_KNN,
};
use crate::numerics::l2_normalize_rows;
use crate::rng::RngSeed;
use serde::{Deserialize, Serialize};
use std::io::Write;
use std::path::Path;

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ContrastiveConfig {
    pub hyperedge_drop_rate: f64,
    pub temperature: f64,
    pub projection_dim: usize,
}

impl Default for ContrastiveConfig {
    fn default() -> Self {
        ContrastiveConfig {
            hyperedge_drop_rate: 0.2,
            temperature: 0.5,
            projection_dim: 64,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MaskingConfig {
    pub mask_rate: f64,
}

impl Default for MaskingConfig {
    fn default() -> Self {
        MaskingConfig { mask_rate: 0.5 }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PretrainConfig {
    pub epochs: usize,
    /// sampled vertices per domain
    pub budget: usize,
    /// clusters per domain; 1 selects the non-hierarchical (flat) variant
    pub clusters: usize,
    /// nearest-neighbor order over cluster features
    pub knn: usize,
    pub contrastive: ContrastiveConfig,
    pub masking: MaskingConfig,
    pub learning_rate: f64,
    pub hidden_dim: usize,
    pub strategy: SampleStrategy,
    pub seed: u64,
}

impl PretrainConfig {
    pub fn new(seed: u64) -> Self {
        PretrainConfig {
            epochs: 30,
            budget: DEFAULT_BUDGET,
            clusters: DEFAULT_CLUSTERS,
            knn: DEFAULT_KNN,
            contrastive: ContrastiveConfig::default(),
            masking: MaskingConfig::default(),
            learning_rate: 1e-3,
            hidden_dim: crate::hgnn::HIDDEN_DIM,
            strategy: SampleStrategy::Bfs,
            seed,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(0.0..1.0).contains(&self.contrastive.hyperedge_drop_rate) {
            return Err(Error::invalid_argument("hyperedge_drop_rate outside [0, 1)"));
        }
        if self.contrastive.temperature <= 0.0 {
            return Err(Error::invalid_argument("temperature must be positive"));
        }
        if !(0.0..1.0).contains(&self.masking.mask_rate) || self.masking.mask_rate == 0.0 {
            return Err(Error::invalid_argument("mask_rate outside (0, 1)"));
        }
        if self.budget == 0 || self.clusters == 0 {
            return Err(Error::invalid_argument("budget and clusters must be >= 1"));
        }
        if self.learning_rate <= 0.0 {
            return Err(Error::invalid_argument("learning_rate must be positive"));
        }
        Ok(())
    }
}

/// Backbone plus the pretraining-only heads. Only the backbone transfers
/// into checkpoints.
#[derive(Debug, Clone, PartialEq)]
pub struct PretrainModel {
    pub backbone: HgnnParams,
    /// hidden x projection_dim contrastive head
    pub projection: DenseMatrix,
    /// hidden x input reconstruction head
    pub recon_weights: DenseMatrix,
    pub recon_bias: Vec<f64>,
    /// learned replacement row for masked inputs
    pub mask_row: Vec<f64>,
}

impl PretrainModel {
    pub fn init(input_dim: usize, hidden_dim: usize, projection_dim: usize, seed: RngSeed) -> Self {
        PretrainModel {
            backbone: init_params(input_dim, hidden_dim, seed.derive(0)),
            projection: glorot(hidden_dim, projection_dim, seed.derive(1)),
            recon_weights: glorot(hidden_dim, input_dim, seed.derive(2)),
            recon_bias: vec![0.0; input_dim],
            mask_row: vec![0.0; input_dim],
        }
    }
}

/// Gradients for every pretraining tensor.
#[derive(Debug, Clone)]
pub struct PretrainGrads {
    pub d_theta0: DenseMatrix,
    pub d_theta1: DenseMatrix,
    pub d_projection: DenseMatrix,
    pub d_recon_weights: DenseMatrix,
    pub d_recon_bias: Vec<f64>,
    pub d_mask_row: Vec<f64>,
}

impl PretrainGrads {
    fn zeros(model: &PretrainModel) -> Self {
        PretrainGrads {
            d_theta0: DenseMatrix::zeros(model.backbone.theta0.rows(), model.backbone.theta0.cols()),
            d_theta1: DenseMatrix::zeros(model.backbone.theta1.rows(), model.backbone.theta1.cols()),
            d_projection: DenseMatrix::zeros(model.projection.rows(), model.projection.cols()),
            d_recon_weights: DenseMatrix::zeros(
                model.recon_weights.rows(),
                model.recon_weights.cols(),
            ),
            d_recon_bias: vec![0.0; model.recon_bias.len()],
            d_mask_row: vec![0.0; model.mask_row.len()],
        }
    }

    fn add(&mut self, other: &PretrainGrads) {
        self.d_theta0.add_assign(&other.d_theta0);
        self.d_theta1.add_assign(&other.d_theta1);
        self.d_projection.add_assign(&other.d_projection);
        self.d_recon_weights.add_assign(&other.d_recon_weights);
        for (a, b) in self.d_recon_bias.iter_mut().zip(&other.d_recon_bias) {
            *a += b;
        }
        for (a, b) in self.d_mask_row.iter_mut().zip(&other.d_mask_row) {
            *a += b;
        }
    }
}

/// Drop each droppable hyperedge independently with probability
/// `drop_rate`. Hyperedges touching the first `protected_bonds` vertices
/// (the bond vertices) are never dropped, so domains stay connected. The
/// vertex set is unchanged.
pub fn augment_structure(
    g: &Hypergraph,
    protected_bonds: usize,
    drop_rate: f64,
    seed: RngSeed,
) -> Result<Hypergraph> {
    if !(0.0..1.0).contains(&drop_rate) {
        return Err(Error::invalid_argument("drop_rate outside [0, 1)"));
    }
    let mut rng = seed.rng();
    use rand::Rng;
    let mut edges = Vec::with_capacity(g.num_hyperedges());
    for e in g.hyperedges() {
        let protected = e.iter().any(|&v| v < protected_bonds);
        let drop = rng.random::<f64>() < drop_rate;
        if protected || !drop {
            edges.push(e.clone());
        }
    }
    Hypergraph::new(g.num_vertices(), edges)
}

/// Symmetric vertex-level InfoNCE over two sets of (normalized) projection
/// rows. Returns the loss and its gradients with respect to both inputs.
pub fn infonce(
    z1: &DenseMatrix,
    z2: &DenseMatrix,
    temperature: f64,
) -> Result<(f64, DenseMatrix, DenseMatrix)> {
    let n = z1.rows();
    if n < 2 {
        return Err(Error::invalid_argument(
            "InfoNCE needs at least two vertices for negatives",
        ));
    }
    if z2.rows() != n || z1.cols() != z2.cols() {
        return Err(Error::invalid_argument("view shapes differ"));
    }
    let inv_t = 1.0 / temperature;
    let mut sims = z1.matmul_transpose(z2);
    sims.scale(inv_t);

    let inv_n = 1.0 / n as f64;
    let mut loss = 0.0;
    let mut d_sims = DenseMatrix::zeros(n, n);

    // view1 -> view2: softmax across each row
    for i in 0..n {
        let row = sims.row(i);
        let max = row.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let denom: f64 = row.iter().map(|&s| (s - max).exp()).sum();
        loss += (denom.ln() + max - sims.get(i, i)) * 0.5 * inv_n;
        for j in 0..n {
            let p = (sims.get(i, j) - max).exp() / denom;
            let delta = if i == j { 1.0 } else { 0.0 };
            let v = d_sims.get(i, j) + (p - delta) * 0.5 * inv_n;
            d_sims.set(i, j, v);
        }
    }
    // view2 -> view1: softmax down each column
    for j in 0..n {
        let mut max = f64::NEG_INFINITY;
        for i in 0..n {
            max = max.max(sims.get(i, j));
        }
        let mut denom = 0.0;
        for i in 0..n {
            denom += (sims.get(i, j) - max).exp();
        }
        loss += (denom.ln() + max - sims.get(j, j)) * 0.5 * inv_n;
        for i in 0..n {
            let p = (sims.get(i, j) - max).exp() / denom;
            let delta = if i == j { 1.0 } else { 0.0 };
            let v = d_sims.get(i, j) + (p - delta) * 0.5 * inv_n;
            d_sims.set(i, j, v);
        }
    }

    let mut d_z1 = d_sims.matmul(z2);
    d_z1.scale(inv_t);
    let mut d_z2 = d_sims.transpose().matmul(z1);
    d_z2.scale(inv_t);
    Ok((loss, d_z1, d_z2))
}

fn project_and_normalize(
    model: &PretrainModel,
    hidden: &DenseMatrix,
) -> (DenseMatrix, DenseMatrix) {
    let raw = hidden.matmul(&model.projection);
    let normalized = l2_normalize_rows(&raw);
    (raw, normalized)
}

/// Backprop through row normalization: `z = a / ||a||`.
fn normalize_backward(
    raw: &DenseMatrix,
    normalized: &DenseMatrix,
    d_z: &DenseMatrix,
) -> DenseMatrix {
    let mut d_raw = DenseMatrix::zeros(raw.rows(), raw.cols());
    for i in 0..raw.rows() {
        let norm = crate::matrix::dot(raw.row(i), raw.row(i)).sqrt();
        if norm <= 0.0 {
            continue;
        }
        let z = normalized.row(i);
        let dz = d_z.row(i);
        let along = crate::matrix::dot(dz, z);
        let out = d_raw.row_mut(i);
        for c in 0..z.len() {
            out[c] = (dz[c] - along * z[c]) / norm;
        }
    }
    d_raw
}

/// Structural contrastive loss: encode two augmented views with the shared
/// backbone, project, normalize, and apply symmetric InfoNCE. Gradients are
/// exact for the backbone and projection head.
pub fn contrastive_loss(
    model: &PretrainModel,
    view1: &Hypergraph,
    view2: &Hypergraph,
    features: &DenseMatrix,
    temperature: f64,
) -> Result<(f64, PretrainGrads)> {
    if features.rows() < 2 {
        return Err(Error::invalid_argument(
            "contrastive loss needs at least two vertices",
        ));
    }
    let cache1 = forward(&model.backbone, Some(view1), features)?;
    let cache2 = forward(&model.backbone, Some(view2), features)?;
    let (raw1, z1) = project_and_normalize(model, &cache1.out);
    let (raw2, z2) = project_and_normalize(model, &cache2.out);
    let (loss, d_z1, d_z2) = infonce(&z1, &z2, temperature)?;

    let d_raw1 = normalize_backward(&raw1, &z1, &d_z1);
    let d_raw2 = normalize_backward(&raw2, &z2, &d_z2);

    let mut grads = PretrainGrads::zeros(model);
    grads.d_projection = cache1.out.transpose_matmul(&d_raw1);
    grads
        .d_projection
        .add_assign(&cache2.out.transpose_matmul(&d_raw2));

    let d_hidden1 = d_raw1.matmul_transpose(&model.projection);
    let d_hidden2 = d_raw2.matmul_transpose(&model.projection);
    let b1 = backward(&model.backbone, Some(view1), &cache1, &d_hidden1, false)?;
    let b2 = backward(&model.backbone, Some(view2), &cache2, &d_hidden2, false)?;
    grads.d_theta0 = b1.d_theta0;
    grads.d_theta0.add_assign(&b2.d_theta0);
    grads.d_theta1 = b1.d_theta1;
    grads.d_theta1.add_assign(&b2.d_theta1);
    Ok((loss, grads))
}

/// Masked feature reconstruction: replace a seeded choice of maskable rows
/// with the learned mask row, run the backbone and reconstruction head, and
/// score mean squared error on the masked rows only.
pub fn masked_feature_loss(
    model: &PretrainModel,
    g: &Hypergraph,
    features: &DenseMatrix,
    mask_rate: f64,
    seed: RngSeed,
    maskable: &[usize],
) -> Result<(f64, PretrainGrads)> {
    if maskable.is_empty() {
        return Err(Error::invalid_argument("no maskable vertices"));
    }
    if !(0.0..1.0).contains(&mask_rate) || mask_rate == 0.0 {
        return Err(Error::invalid_argument("mask_rate outside (0, 1)"));
    }
    let n_mask =
        ((mask_rate * maskable.len() as f64).ceil() as usize).clamp(1, maskable.len());
    let mut rng = seed.rng();
    let mut chosen: Vec<usize> = rand::seq::index::sample(&mut rng, maskable.len(), n_mask)
        .into_iter()
        .map(|i| maskable[i])
        .collect();
    chosen.sort_unstable();

    let mut masked_input = features.clone();
    for &v in &chosen {
        masked_input.row_mut(v).copy_from_slice(&model.mask_row);
    }
    let cache = forward(&model.backbone, Some(g), &masked_input)?;
    let recon = {
        let mut r = cache.out.matmul(&model.recon_weights);
        for i in 0..r.rows() {
            for (v, &b) in r.row_mut(i).iter_mut().zip(&model.recon_bias) {
                *v += b;
            }
        }
        r
    };

    let cols = features.cols();
    let scale = 1.0 / (n_mask * cols) as f64;
    let mut loss = 0.0;
    let mut d_recon = DenseMatrix::zeros(recon.rows(), cols);
    for &v in &chosen {
        let rrow = recon.row(v);
        let xrow = features.row(v);
        let drow = d_recon.row_mut(v);
        for c in 0..cols {
            let diff = rrow[c] - xrow[c];
            loss += diff * diff * scale;
            drow[c] = 2.0 * diff * scale;
        }
    }

    let mut grads = PretrainGrads::zeros(model);
    grads.d_recon_weights = cache.out.transpose_matmul(&d_recon);
    for i in 0..d_recon.rows() {
        for (b, &d) in grads.d_recon_bias.iter_mut().zip(d_recon.row(i)) {
            *b += d;
        }
    }
    let d_out = d_recon.matmul_transpose(&model.recon_weights);
    let back = backward(&model.backbone, Some(g), &cache, &d_out, true)?;
    grads.d_theta0 = back.d_theta0;
    grads.d_theta1 = back.d_theta1;
    let d_input = back.d_input.expect("input gradient requested");
    for &v in &chosen {
        for (m, &d) in grads.d_mask_row.iter_mut().zip(d_input.row(v)) {
            *m += d;
        }
    }
    Ok((loss, grads))
}

/// Cluster every sampled domain and assemble the merged structure;
/// `clusters == 1` selects the flat (non-hierarchical) variant.
pub fn build_multi_hypergraph(
    samples: &[(crate::hypergraph::SubHypergraph, DenseMatrix)],
    clusters: usize,
    knn: usize,
    seed: RngSeed,
) -> Result<HierarchicalMultiHypergraph> {
    if clusters <= 1 {
        return assemble_flat(samples);
    }
    let layers: Vec<DomainLayer> = samples
        .iter()
        .enumerate()
        .map(|(a, (sub, emb))| {
            let k = clusters.min(emb.rows());
            let k_c = knn.min(k.saturating_sub(1));
            let layer = cluster_domain(a, emb, k, k_c, seed.derive(a as u64))?;
            Ok(DomainLayer {
                sub: sub.clone(),
                embeddings: emb.clone(),
                clusters: layer,
            })
        })
        .collect::<Result<_>>()?;
    assemble(&layers)
}

/// One epoch's loss components.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EpochLoss {
    pub epoch: usize,
    pub structural: f64,
    pub feature: f64,
    pub total: f64,
}

/// Write the loss trace as `epoch,l_stru,l_feat,l_pre` CSV.
pub fn write_loss_csv(trace: &[EpochLoss], path: &Path) -> Result<()> {
    if let Some(parent) = path.parent() {
        if !parent.as_os_str().is_empty() {
            std::fs::create_dir_all(parent)?;
        }
    }
    let mut f = std::fs::File::create(path)?;
    writeln!(f, "epoch,l_stru,l_feat,l_pre")?;
    for e in trace {
        writeln!(f, "{},{},{},{}", e.epoch, e.structural, e.feature, e.total)?;
    }
    Ok(())
}

struct OptimizerBundle {
    theta0: AdamState,
    theta1: AdamState,
    projection: AdamState,
    recon_weights: AdamState,
    recon_bias: AdamState,
    mask_row: AdamState,
}

impl OptimizerBundle {
    fn new(model: &PretrainModel) -> Self {
        OptimizerBundle {
            theta0: AdamState::new(model.backbone.theta0.values().len()),
            theta1: AdamState::new(model.backbone.theta1.values().len()),
            projection: AdamState::new(model.projection.values().len()),
            recon_weights: AdamState::new(model.recon_weights.values().len()),
            recon_bias: AdamState::new(model.recon_bias.len()),
            mask_row: AdamState::new(model.mask_row.len()),
        }
    }

    fn step(&mut self, model: &mut PretrainModel, grads: &PretrainGrads, alpha: f64) {
        self.theta0.step(
            model.backbone.theta0.values_mut(),
            grads.d_theta0.values(),
            alpha,
        );
        self.theta1.step(
            model.backbone.theta1.values_mut(),
            grads.d_theta1.values(),
            alpha,
        );
        self.projection.step(
            model.projection.values_mut(),
            grads.d_projection.values(),
            alpha,
        );
        self.recon_weights.step(
            model.recon_weights.values_mut(),
            grads.d_recon_weights.values(),
            alpha,
        );
        self.recon_bias
            .step(&mut model.recon_bias, &grads.d_recon_bias, alpha);
        self.mask_row
            .step(&mut model.mask_row, &grads.d_mask_row, alpha);
    }
}

#[derive(Serialize)]
struct DigestInput<'a> {
    mode: &'a str,
    config: &'a PretrainConfig,
}

fn backbone_checkpoint(
    model: &PretrainModel,
    epochs: usize,
    cfg: &PretrainConfig,
    mode: &str,
) -> Checkpoint {
    Checkpoint::new(
        vec![
            NamedTensor::from_matrix("theta0", &model.backbone.theta0),
            NamedTensor::from_matrix("theta1", &model.backbone.theta1),
        ],
        CheckpointMeta {
            epoch: epochs as u64,
            seed: cfg.seed,
            config_digest: config_digest(&DigestInput { mode, config: cfg }),
        },
    )
}

fn epoch_step(
    model: &mut PretrainModel,
    optim: &mut OptimizerBundle,
    hmh: &HierarchicalMultiHypergraph,
    cfg: &PretrainConfig,
    epoch_seed: RngSeed,
    epoch: usize,
) -> Result<EpochLoss> {
    let bonds = hmh.bond_count();
    let view1 = augment_structure(
        &hmh.hypergraph,
        bonds,
        cfg.contrastive.hyperedge_drop_rate,
        epoch_seed.derive(11),
    )?;
    let view2 = augment_structure(
        &hmh.hypergraph,
        bonds,
        cfg.contrastive.hyperedge_drop_rate,
        epoch_seed.derive(12),
    )?;
    let (l_stru, g_stru) = contrastive_loss(
        model,
        &view1,
        &view2,
        &hmh.features,
        cfg.contrastive.temperature,
    )?;
    let maskable = hmh.maskable_ids();
    let (l_feat, g_feat) = masked_feature_loss(
        model,
        &hmh.hypergraph,
        &hmh.features,
        cfg.masking.mask_rate,
        epoch_seed.derive(13),
        &maskable,
    )?;
    let mut grads = g_stru;
    grads.add(&g_feat);
    optim.step(model, &grads, cfg.learning_rate);
    let total = l_stru + l_feat;
    if !total.is_finite() {
        return Err(Error::invalid_state(format!(
            "non-finite pretraining loss at epoch {epoch}"
        )));
    }
    Ok(EpochLoss {
        epoch,
        structural: l_stru,
        feature: l_feat,
        total,
    })
}

/// Joint multi-domain pretraining: fresh samples, clusters, and bond layer
/// every epoch; `L_pre = L_stru + L_feat`. Returns the backbone checkpoint
/// and the per-epoch loss trace.
pub fn pretrain_run(
    domains: &[(&Hypergraph, &DenseMatrix)],
    cfg: &PretrainConfig,
) -> Result<(Checkpoint, Vec<EpochLoss>)> {
    cfg.validate()?;
    if domains.is_empty() {
        return Err(Error::invalid_argument("pretraining needs at least one domain"));
    }
    let input_dim = domains[0].1.cols();
    for (a, (_, emb)) in domains.iter().enumerate() {
        if emb.cols() != input_dim {
            return Err(Error::invalid_argument(format!(
                "domain {a} embedding width {} differs from {input_dim}",
                emb.cols()
            )));
        }
    }
    let base = RngSeed(cfg.seed);
    let mut model = PretrainModel::init(
        input_dim,
        cfg.hidden_dim,
        cfg.contrastive.projection_dim,
        base.derive(0),
    );
    let mut optim = OptimizerBundle::new(&model);
    let mut trace = Vec::with_capacity(cfg.epochs);

    for epoch in 0..cfg.epochs {
        let es = base.derive(0xE000 + epoch as u64);
        let samples = sample_all(domains, cfg.budget, es.derive(1), cfg.strategy)?;
        let hmh = build_multi_hypergraph(&samples, cfg.clusters, cfg.knn, es.derive(2))?;
        trace.push(epoch_step(&mut model, &mut optim, &hmh, cfg, es, epoch)?);
    }

    Ok((backbone_checkpoint(&model, cfg.epochs, cfg, "hyperfm"), trace))
}

/// Isolated (sequential) pretraining baseline: the same losses trained on
/// one domain at a time — no cluster layer, no bond vertices — with the
/// optimizer state reset between stages. Each stage runs the full epoch
/// budget on its own domain.
pub fn ip_pretrain_run(
    domains: &[(&Hypergraph, &DenseMatrix)],
    cfg: &PretrainConfig,
) -> Result<(Checkpoint, Vec<EpochLoss>)> {
    cfg.validate()?;
    if domains.is_empty() {
        return Err(Error::invalid_argument("pretraining needs at least one domain"));
    }
    let input_dim = domains[0].1.cols();
    let base = RngSeed(cfg.seed);
    let mut model = PretrainModel::init(
        input_dim,
        cfg.hidden_dim,
        cfg.contrastive.projection_dim,
        base.derive(0),
    );
    let mut trace = Vec::with_capacity(cfg.epochs * domains.len());

    for (stage, (g, emb)) in domains.iter().enumerate() {
        let mut optim = OptimizerBundle::new(&model);
        for epoch in 0..cfg.epochs {
            let es = base.derive(0x1b000 + (stage * 100_000 + epoch) as u64);
            let sampled = sample_all(&[(*g, *emb)], cfg.budget, es.derive(1), cfg.strategy)?;
            let (sub, sub_emb) = &sampled[0];
            let view1 = augment_structure(
                &sub.hypergraph,
                0,
                cfg.contrastive.hyperedge_drop_rate,
                es.derive(11),
            )?;
            let view2 = augment_structure(
                &sub.hypergraph,
                0,
                cfg.contrastive.hyperedge_drop_rate,
                es.derive(12),
            )?;
            let (l_stru, g_stru) =
                contrastive_loss(&model, &view1, &view2, sub_emb, cfg.contrastive.temperature)?;
            let maskable: Vec<usize> = (0..sub_emb.rows()).collect();
            let (l_feat, g_feat) = masked_feature_loss(
                &model,
                &sub.hypergraph,
                sub_emb,
                cfg.masking.mask_rate,
                es.derive(13),
                &maskable,
            )?;
            let mut grads = g_stru;
            grads.add(&g_feat);
            optim.step(&mut model, &grads, cfg.learning_rate);
            trace.push(EpochLoss {
                epoch: stage * cfg.epochs + epoch,
                structural: l_stru,
                feature: l_feat,
                total: l_stru + l_feat,
            });
        }
    }

    Ok((backbone_checkpoint(&model, cfg.epochs, cfg, "ip"), trace))
}
