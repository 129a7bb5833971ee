//! Downstream adaptation and the experiment harness: 1-shot fine-tuning
//! with validation-based epoch selection, the scratch/IP/joint comparison
//! protocol, the sampling and cluster-count ablations, and the domain-count
//! scaling study.

use crate::checkpoint::{config_digest, Checkpoint};
use crate::dataset::{make_split, FewShotSplit, TahgDataset};
use crate::embed::{embed_pipeline, TrainConfig};
use crate::error::{Error, Result};
use crate::hgnn::{
    backward, cross_entropy, forward, head_logits, init_params, AdamState, HgnnParams,
};
use crate::hypergraph::Hypergraph;
use crate::matrix::DenseMatrix;
use crate::pretrain::{ip_pretrain_run, pretrain_run, PretrainConfig};
use crate::rng::RngSeed;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::io::Write;
use std::path::Path;

/// Fine-tuning hyperparameters.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FinetuneConfig {
    pub epochs: usize,
    pub learning_rate: f64,
    pub hidden_dim: usize,
}

impl Default for FinetuneConfig {
    fn default() -> Self {
        FinetuneConfig {
            epochs: 200,
            learning_rate: 0.01,
            hidden_dim: crate::hgnn::HIDDEN_DIM,
        }
    }
}

/// A fine-tuned model: backbone + classifier head, with the best-validation
/// epoch already selected.
#[derive(Debug, Clone)]
pub struct FinetunedModel {
    pub params: HgnnParams,
    pub use_structure: bool,
    pub best_val_accuracy: f64,
    pub best_epoch: usize,
}

/// Accuracy of the classifier head over `ids` (argmax, ties toward the
/// lower class id).
pub fn evaluate(
    params: &HgnnParams,
    structure: Option<&Hypergraph>,
    features: &DenseMatrix,
    labels: &[usize],
    ids: &[usize],
) -> Result<f64> {
    let head = params
        .head
        .as_ref()
        .ok_or_else(|| Error::invalid_state("evaluate needs a classifier head"))?;
    if ids.is_empty() {
        return Err(Error::invalid_argument("evaluate over an empty id set"));
    }
    let cache = forward(params, structure, features)?;
    let logits = head_logits(head, &cache.out);
    let mut correct = 0usize;
    for &v in ids {
        let row = logits.row(v);
        let mut best = 0usize;
        let mut best_val = row[0];
        for (c, &l) in row.iter().enumerate().skip(1) {
            if l > best_val {
                best_val = l;
                best = c;
            }
        }
        if best == labels[v] {
            correct += 1;
        }
    }
    Ok(correct as f64 / ids.len() as f64)
}

/// Fine-tune on the 1-shot training set with cross-entropy, tracking
/// validation accuracy each epoch and returning the best-validation
/// snapshot. `checkpoint: None` trains from random initialization (the
/// scratch baselines); `use_structure: false` replaces propagation with the
/// identity (the MLP baseline).
pub fn finetune(
    checkpoint: Option<&Checkpoint>,
    dataset: &TahgDataset,
    features: &DenseMatrix,
    split: &FewShotSplit,
    cfg: &FinetuneConfig,
    seed: RngSeed,
    use_structure: bool,
) -> Result<FinetunedModel> {
    let input_dim = features.cols();
    let mut params = match checkpoint {
        Some(ckpt) => {
            let theta0 = ckpt.matrix("theta0")?;
            let theta1 = ckpt.matrix("theta1")?;
            if theta0.rows() != input_dim {
                return Err(Error::invalid_argument(format!(
                    "checkpoint expects {} input features, dataset embeddings have {}",
                    theta0.rows(),
                    input_dim
                )));
            }
            if theta1.rows() != theta0.cols() || theta1.cols() != theta0.cols() {
                return Err(Error::invalid_argument(format!(
                    "checkpoint hidden shapes inconsistent: {}x{} then {}x{}",
                    theta0.rows(),
                    theta0.cols(),
                    theta1.rows(),
                    theta1.cols()
                )));
            }
            HgnnParams {
                theta0,
                theta1,
                head: None,
            }
        }
        None => init_params(input_dim, cfg.hidden_dim, seed.derive(0)),
    };
    params.attach_head(dataset.num_classes, seed.derive(1));

    let structure = use_structure.then_some(&dataset.hypergraph);
    let mut best = FinetunedModel {
        best_val_accuracy: evaluate(
            &params,
            structure,
            features,
            &dataset.labels,
            &split.val_ids,
        )?,
        params: params.clone(),
        use_structure,
        best_epoch: 0,
    };

    let mut adam_t0 = AdamState::new(params.theta0.values().len());
    let mut adam_t1 = AdamState::new(params.theta1.values().len());
    let head_len = params.head.as_ref().unwrap().weights.values().len();
    let bias_len = params.head.as_ref().unwrap().bias.len();
    let mut adam_hw = AdamState::new(head_len);
    let mut adam_hb = AdamState::new(bias_len);

    for epoch in 0..cfg.epochs {
        let cache = forward(&params, structure, features)?;
        let head = params.head.as_ref().unwrap();
        let logits = head_logits(head, &cache.out);
        let (_loss, d_logits) =
            cross_entropy(&logits, &dataset.labels, &split.train_ids)?;

        let d_head_w = cache.out.transpose_matmul(&d_logits);
        let mut d_head_b = vec![0.0; bias_len];
        for r in 0..d_logits.rows() {
            for (b, &d) in d_head_b.iter_mut().zip(d_logits.row(r)) {
                *b += d;
            }
        }
        let d_out = d_logits.matmul_transpose(&head.weights);
        let grads = backward(&params, structure, &cache, &d_out, false)?;

        adam_t0.step(
            params.theta0.values_mut(),
            grads.d_theta0.values(),
            cfg.learning_rate,
        );
        adam_t1.step(
            params.theta1.values_mut(),
            grads.d_theta1.values(),
            cfg.learning_rate,
        );
        let head = params.head.as_mut().unwrap();
        adam_hw.step(head.weights.values_mut(), d_head_w.values(), cfg.learning_rate);
        adam_hb.step(&mut head.bias, &d_head_b, cfg.learning_rate);

        let val_acc = evaluate(
            &params,
            structure,
            features,
            &dataset.labels,
            &split.val_ids,
        )?;
        if val_acc > best.best_val_accuracy {
            best.best_val_accuracy = val_acc;
            best.best_epoch = epoch + 1;
            best.params = params.clone();
        }
    }
    Ok(best)
}

/// Comparison protocol variants.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Mode {
    ScratchMlp,
    ScratchHgnn,
    Ip,
    HyperFm,
}

impl Mode {
    pub fn as_str(&self) -> &'static str {
        match self {
            Mode::ScratchMlp => "scratch-mlp",
            Mode::ScratchHgnn => "scratch-hgnn",
            Mode::Ip => "ip",
            Mode::HyperFm => "hyperfm",
        }
    }

    pub fn parse(s: &str) -> Result<Mode> {
        match s {
            "scratch-mlp" => Ok(Mode::ScratchMlp),
            "scratch-hgnn" => Ok(Mode::ScratchHgnn),
            "ip" => Ok(Mode::Ip),
            "hyperfm" => Ok(Mode::HyperFm),
            other => Err(Error::invalid_argument(format!("unknown mode {other:?}"))),
        }
    }

    pub const ALL: [Mode; 4] = [Mode::ScratchMlp, Mode::ScratchHgnn, Mode::Ip, Mode::HyperFm];
}

/// A dataset with its structure-aware embeddings computed.
#[derive(Debug, Clone)]
pub struct PreparedDomain {
    pub dataset: TahgDataset,
    pub embeddings: DenseMatrix,
}

/// Run the embedding pipeline for every domain (in parallel). All domains
/// share the same seed, hence the same initial encoder parameters — the
/// analog of starting every domain's text encoder from one shared
/// pretrained model — and training then specializes each copy on its own
/// domain. Preparation is independent of pool ordering.
pub fn prepare_domains(
    datasets: &[TahgDataset],
    embed_cfg: &TrainConfig,
) -> Result<Vec<PreparedDomain>> {
    datasets
        .par_iter()
        .map(|d| {
            let embeddings = embed_pipeline(d, embed_cfg)?;
            Ok(PreparedDomain {
                dataset: d.clone(),
                embeddings,
            })
        })
        .collect()
}

/// Full protocol configuration; one digest covers every stage.
#[derive(Debug, Clone, Serialize)]
pub struct ProtocolConfig {
    pub seeds: Vec<u64>,
    pub embed: TrainConfig,
    pub pretrain: PretrainConfig,
    pub finetune: FinetuneConfig,
}

impl ProtocolConfig {
    pub fn new(base_seed: u64) -> Self {
        ProtocolConfig {
            seeds: vec![1, 2, 3, 4, 5],
            embed: TrainConfig::new(RngSeed(base_seed)),
            pretrain: PretrainConfig::new(base_seed),
            finetune: FinetuneConfig::default(),
        }
    }
}

/// One run's outcome.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RunRecord {
    pub seed: u64,
    pub accuracy: f64,
}

/// Accuracy over the protocol's seeds for one mode.
#[derive(Debug, Clone, Serialize)]
pub struct EvalReport {
    pub mode: String,
    pub runs: Vec<RunRecord>,
    pub mean: f64,
    pub std_dev: f64,
    pub config_digest: String,
}

impl EvalReport {
    fn from_runs(mode: &str, runs: Vec<RunRecord>, digest: String) -> Self {
        let mean = runs.iter().map(|r| r.accuracy).sum::<f64>() / runs.len().max(1) as f64;
        let std_dev = if runs.len() > 1 {
            let var = runs
                .iter()
                .map(|r| (r.accuracy - mean).powi(2))
                .sum::<f64>()
                / (runs.len() - 1) as f64;
            var.sqrt()
        } else {
            0.0
        };
        EvalReport {
            mode: mode.to_string(),
            runs,
            mean,
            std_dev,
            config_digest: digest,
        }
    }

    pub fn csv_string(&self) -> String {
        let mut out = String::from("mode,seed,accuracy\n");
        for r in &self.runs {
            out.push_str(&format!("{},{},{}\n", self.mode, r.seed, r.accuracy));
        }
        out
    }

    pub fn write_csv(&self, path: &Path) -> Result<()> {
        write_text(path, &self.csv_string())
    }

    pub fn summary_json(&self) -> serde_json::Value {
        serde_json::json!({
            "mode": self.mode,
            "mean": self.mean,
            "std_dev": self.std_dev,
            "runs": self.runs.len(),
            "config_digest": self.config_digest,
        })
    }
}

fn write_text(path: &Path, content: &str) -> Result<()> {
    if let Some(parent) = path.parent() {
        if !parent.as_os_str().is_empty() {
            std::fs::create_dir_all(parent)?;
        }
    }
    let mut f = std::fs::File::create(path)?;
    f.write_all(content.as_bytes())?;
    Ok(())
}

#[derive(Serialize)]
struct ProtocolDigest<'a> {
    mode: &'a str,
    config: &'a ProtocolConfig,
    sources: Vec<&'a str>,
    target: &'a str,
}

/// Execute one protocol mode over all seeds, paired across modes: every
/// seed uses the same split and the same fine-tune initialization stream
/// regardless of mode.
pub fn run_protocol(
    mode: Mode,
    sources: &[PreparedDomain],
    target: &PreparedDomain,
    cfg: &ProtocolConfig,
) -> Result<EvalReport> {
    if cfg.seeds.is_empty() {
        return Err(Error::invalid_argument("protocol needs at least one seed"));
    }
    if sources.iter().any(|s| s.dataset.name == target.dataset.name) {
        return Err(Error::invalid_argument(format!(
            "target domain {:?} is listed among the sources",
            target.dataset.name
        )));
    }
    if matches!(mode, Mode::Ip | Mode::HyperFm) && sources.is_empty() {
        return Err(Error::invalid_argument(
            "pretraining modes need at least one source domain",
        ));
    }

    let digest = config_digest(&ProtocolDigest {
        mode: mode.as_str(),
        config: cfg,
        sources: sources.iter().map(|s| s.dataset.name.as_str()).collect(),
        target: &target.dataset.name,
    });

    let runs: Result<Vec<RunRecord>> = cfg
        .seeds
        .par_iter()
        .map(|&seed| {
            let accuracy = run_one(mode, sources, target, cfg, seed)?;
            Ok(RunRecord { seed, accuracy })
        })
        .collect();
    Ok(EvalReport::from_runs(mode.as_str(), runs?, digest))
}

fn run_one(
    mode: Mode,
    sources: &[PreparedDomain],
    target: &PreparedDomain,
    cfg: &ProtocolConfig,
    seed: u64,
) -> Result<f64> {
    let split = make_split(&target.dataset, RngSeed(seed))?;
    let source_refs: Vec<(&Hypergraph, &DenseMatrix)> = sources
        .iter()
        .map(|s| (&s.dataset.hypergraph, &s.embeddings))
        .collect();
    let mut pre_cfg = cfg.pretrain.clone();
    pre_cfg.seed = RngSeed(cfg.pretrain.seed).derive(seed).0;
    let checkpoint = match mode {
        Mode::HyperFm => Some(pretrain_run(&source_refs, &pre_cfg)?.0),
        Mode::Ip => Some(ip_pretrain_run(&source_refs, &pre_cfg)?.0),
        Mode::ScratchMlp | Mode::ScratchHgnn => None,
    };
    let use_structure = mode != Mode::ScratchMlp;
    let ft_seed = RngSeed(seed).derive(0xF17E);
    let model = finetune(
        checkpoint.as_ref(),
        &target.dataset,
        &target.embeddings,
        &split,
        &cfg.finetune,
        ft_seed,
        use_structure,
    )?;
    let structure = use_structure.then_some(&target.dataset.hypergraph);
    evaluate(
        &model.params,
        structure,
        &target.embeddings,
        &target.dataset.labels,
        &split.test_ids,
    )
}

/// Scaling study output rows.
#[derive(Debug, Clone, Serialize)]
pub struct ScalingRow {
    pub num_domains: usize,
    pub mean_accuracy: f64,
    pub std_dev: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct BudgetRow {
    pub budget: usize,
    pub mean_accuracy: f64,
    pub std_dev: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct ScalingStudy {
    pub domain_rows: Vec<ScalingRow>,
    pub budget_rows: Vec<BudgetRow>,
}

impl ScalingStudy {
    pub fn domain_csv(&self) -> String {
        let mut out = String::from("num_domains,mean_accuracy,std_dev\n");
        for r in &self.domain_rows {
            out.push_str(&format!("{},{},{}\n", r.num_domains, r.mean_accuracy, r.std_dev));
        }
        out
    }

    pub fn budget_csv(&self) -> String {
        let mut out = String::from("budget,mean_accuracy,std_dev\n");
        for r in &self.budget_rows {
            out.push_str(&format!("{},{},{}\n", r.budget, r.mean_accuracy, r.std_dev));
        }
        out
    }
}

/// Domain-count scaling study plus the sampled-vertex budget sweep: for
/// each pool prefix size, pretrain on that prefix and fine-tune on the
/// target; then sweep the per-domain sampling budget with the full pool.
pub fn scaling_study(
    pool: &[PreparedDomain],
    target: &PreparedDomain,
    cfg: &ProtocolConfig,
    budgets: &[usize],
) -> Result<ScalingStudy> {
    if pool.is_empty() {
        return Err(Error::invalid_argument("scaling study needs a domain pool"));
    }
    let mut domain_rows = Vec::with_capacity(pool.len());
    for m in 1..=pool.len() {
        let report = run_protocol(Mode::HyperFm, &pool[..m], target, cfg)?;
        domain_rows.push(ScalingRow {
            num_domains: m,
            mean_accuracy: report.mean,
            std_dev: report.std_dev,
        });
    }
    let mut budget_rows = Vec::with_capacity(budgets.len());
    for &budget in budgets {
        let mut sweep_cfg = cfg.clone();
        sweep_cfg.pretrain.budget = budget;
        let report = run_protocol(Mode::HyperFm, pool, target, &sweep_cfg)?;
        budget_rows.push(BudgetRow {
            budget,
            mean_accuracy: report.mean,
            std_dev: report.std_dev,
        });
    }
    Ok(ScalingStudy {
        domain_rows,
        budget_rows,
    })
}

/// One cluster-count ablation row.
#[derive(Debug, Clone, Serialize)]
pub struct ClusterRow {
    pub clusters: usize,
    pub mean_accuracy: f64,
    pub std_dev: f64,
    pub config_digest: String,
}

/// Sweep the per-domain cluster count; `clusters = 1` is the flat
/// non-hierarchical variant (bond vertices join domain vertices directly).
pub fn cluster_ablation(
    sources: &[PreparedDomain],
    target: &PreparedDomain,
    cfg: &ProtocolConfig,
    k_values: &[usize],
) -> Result<Vec<ClusterRow>> {
    let mut rows = Vec::with_capacity(k_values.len());
    for &k in k_values {
        let mut sweep_cfg = cfg.clone();
        sweep_cfg.pretrain.clusters = k;
        let report = run_protocol(Mode::HyperFm, sources, target, &sweep_cfg)?;
        rows.push(ClusterRow {
            clusters: k,
            mean_accuracy: report.mean,
            std_dev: report.std_dev,
            config_digest: report.config_digest,
        });
    }
    Ok(rows)
}

pub fn cluster_csv(rows: &[ClusterRow]) -> String {
    let mut out = String::from("clusters,mean_accuracy,std_dev,config_digest\n");
    for r in rows {
        out.push_str(&format!(
            "{},{},{},{}\n",
            r.clusters, r.mean_accuracy, r.std_dev, r.config_digest
        ));
    }
    out
}

/// Structural half of the sampling ablation: mean retained hyperedges per
/// sampled vertex for both strategies over `trials` seeded draws.
pub fn sampling_retention(
    domains: &[&Hypergraph],
    budget: usize,
    trials: u64,
) -> Result<(f64, f64)> {
    let mut bfs_total = 0.0;
    let mut random_total = 0.0;
    let mut count = 0usize;
    for t in 0..trials {
        for (a, g) in domains.iter().enumerate() {
            let b = budget.min(g.num_vertices());
            let seed = RngSeed(t).derive(a as u64);
            let bfs = g.bfs_sample(b, seed)?;
            let rnd = g.random_sample(b, seed)?;
            bfs_total += bfs.hypergraph.num_hyperedges() as f64 / b as f64;
            random_total += rnd.hypergraph.num_hyperedges() as f64 / b as f64;
            count += 1;
        }
    }
    Ok((bfs_total / count as f64, random_total / count as f64))
}

/// End-to-end sampling ablation: the full protocol with BFS versus random
/// sampling during pretraining.
#[derive(Debug, Clone, Serialize)]
pub struct SamplingAblation {
    pub bfs: EvalReport,
    pub random: EvalReport,
}

pub fn sampling_ablation(
    sources: &[PreparedDomain],
    target: &PreparedDomain,
    cfg: &ProtocolConfig,
) -> Result<SamplingAblation> {
    let mut bfs_cfg = cfg.clone();
    bfs_cfg.pretrain.strategy = crate::multihg::SampleStrategy::Bfs;
    let mut random_cfg = cfg.clone();
    random_cfg.pretrain.strategy = crate::multihg::SampleStrategy::Random;
    Ok(SamplingAblation {
        bfs: run_protocol(Mode::HyperFm, sources, target, &bfs_cfg)?,
        random: run_protocol(Mode::HyperFm, sources, target, &random_cfg)?,
    })
}

pub fn sampling_csv(ablation: &SamplingAblation) -> String {
    let mut out = String::from("strategy,seed,accuracy\n");
    for r in &ablation.bfs.runs {
        out.push_str(&format!("bfs,{},{}\n", r.seed, r.accuracy));
    }
    for r in &ablation.random.runs {
        out.push_str(&format!("random,{},{}\n", r.seed, r.accuracy));
    }
    out
}

/// The standard synthetic family used by the experiment suites: `count`
/// domains of 4 classes with strong intra-class bias, per-domain
/// hyperedge-size ranges so degree distributions differ, and classes large
/// enough that the 1-shot split keeps a non-empty test set after the
/// 100-per-class validation cap. The last spec is conventionally the
/// target.
pub fn default_family(count: usize, base_seed: u64) -> Vec<crate::dataset::DomainSpec> {
    let size_ranges = [(3usize, 4usize), (4, 5), (5, 6), (3, 6), (3, 5), (4, 6)];
    (0..count)
        .map(|i| crate::dataset::DomainSpec {
            name: format!("synth-{i}"),
            num_classes: 4,
            vertices_per_class: 150,
            hyperedge_count: 420 + 60 * (i % size_ranges.len()),
            intra_class_bias: 0.9,
            vocab_size: 300,
            edge_size_range: size_ranges[i % size_ranges.len()],
            class_token_prob: 0.2,
            seed: base_seed.wrapping_add(i as u64 * 1000),
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dataset::synth_domains;
    use approx::assert_abs_diff_eq;

    fn one_hot_dataset() -> (TahgDataset, DenseMatrix) {
        // features = one-hot of label: linearly separable
        let n = 12;
        let classes = 3;
        let labels: Vec<usize> = (0..n).map(|v| v % classes).collect();
        let edges: Vec<Vec<usize>> = (0..classes)
            .map(|c| (0..n).filter(|v| v % classes == c).collect())
            .collect();
        let d = TahgDataset::new(
            "onehot".into(),
            Hypergraph::new(n, edges).unwrap(),
            (0..n).map(|v| format!("t{v}")).collect(),
            labels.clone(),
            classes,
        )
        .unwrap();
        let mut x = DenseMatrix::zeros(n, classes);
        for (v, &l) in labels.iter().enumerate() {
            x.set(v, l, 1.0);
        }
        (d, x)
    }

    fn full_split(d: &TahgDataset) -> FewShotSplit {
        make_split(d, RngSeed(7)).unwrap()
    }

    #[test]
    fn evaluate_perfect_and_constant_predictors() {
        let (d, x) = one_hot_dataset();
        // head = identity on the one-hot features, no structure, no backbone
        // distortion: use theta = identity stacks
        let mut params = HgnnParams {
            theta0: DenseMatrix::identity(3),
            theta1: DenseMatrix::identity(3),
            head: None,
        };
        params.head = Some(crate::hgnn::HeadParams {
            weights: DenseMatrix::identity(3),
            bias: vec![0.0; 3],
        });
        let ids: Vec<usize> = (0..d.num_vertices()).collect();
        let acc = evaluate(&params, None, &x, &d.labels, &ids).unwrap();
        assert_abs_diff_eq!(acc, 1.0);

        // constant predictor: always class 0
        let mut constant = params.clone();
        constant.head.as_mut().unwrap().weights = DenseMatrix::zeros(3, 3);
        constant.head.as_mut().unwrap().bias = vec![1.0, 0.0, 0.0];
        let acc = evaluate(&constant, None, &x, &d.labels, &ids).unwrap();
        assert_abs_diff_eq!(acc, 1.0 / 3.0, epsilon = 1e-12);
    }

    #[test]
    fn evaluate_matches_hand_confusion_count() {
        // 10 vertices, 2 classes; predictor gets exactly 7 right
        let labels = vec![0, 0, 0, 0, 0, 1, 1, 1, 1, 1];
        let mut logits_src = DenseMatrix::zeros(10, 2);
        // rows 0..4 predicted 0 except row 3 -> 1; rows 5..9 predicted 1 except rows 7,8 -> 0
        for v in 0..10 {
            let predicted = match v {
                3 => 1,
                7 | 8 => 0,
                v if v < 5 => 0,
                _ => 1,
            };
            logits_src.set(v, predicted, 1.0);
        }
        let params = HgnnParams {
            theta0: DenseMatrix::identity(2),
            theta1: DenseMatrix::identity(2),
            head: Some(crate::hgnn::HeadParams {
                weights: DenseMatrix::identity(2),
                bias: vec![0.0, 0.0],
            }),
        };
        let ids: Vec<usize> = (0..10).collect();
        let acc = evaluate(&params, None, &logits_src, &labels, &ids).unwrap();
        assert_abs_diff_eq!(acc, 0.7, epsilon = 1e-12);
    }

    #[test]
    fn finetune_zero_epochs_returns_init_and_chance_level() {
        let (d, x) = one_hot_dataset();
        let split = full_split(&d);
        let cfg = FinetuneConfig {
            epochs: 0,
            ..FinetuneConfig::default()
        };
        let model = finetune(None, &d, &x, &split, &cfg, RngSeed(1), true).unwrap();
        assert_eq!(model.best_epoch, 0);
        let expect = init_params(3, cfg.hidden_dim, RngSeed(1).derive(0));
        assert_eq!(model.params.theta0, expect.theta0);
    }

    #[test]
    fn finetune_fits_linearly_separable_toy() {
        let (d, x) = one_hot_dataset();
        let split = full_split(&d);
        let cfg = FinetuneConfig {
            epochs: 50,
            learning_rate: 0.05,
            hidden_dim: 8,
        };
        let model = finetune(None, &d, &x, &split, &cfg, RngSeed(3), false).unwrap();
        let train_acc = evaluate(
            &model.params,
            None,
            &x,
            &d.labels,
            &split.train_ids,
        )
        .unwrap();
        assert_abs_diff_eq!(train_acc, 1.0);
    }

    #[test]
    fn finetune_deterministic() {
        let (d, x) = one_hot_dataset();
        let split = full_split(&d);
        let cfg = FinetuneConfig {
            epochs: 10,
            learning_rate: 0.01,
            hidden_dim: 6,
        };
        let a = finetune(None, &d, &x, &split, &cfg, RngSeed(5), true).unwrap();
        let b = finetune(None, &d, &x, &split, &cfg, RngSeed(5), true).unwrap();
        assert_eq!(a.params, b.params);
        assert_eq!(a.best_epoch, b.best_epoch);
    }

    #[test]
    fn finetune_rejects_dim_mismatch_with_shapes() {
        let (d, x) = one_hot_dataset();
        let split = full_split(&d);
        let model = crate::pretrain::PretrainModel::init(7, 4, 2, RngSeed(0));
        let ckpt = Checkpoint::new(
            vec![
                crate::checkpoint::NamedTensor::from_matrix("theta0", &model.backbone.theta0),
                crate::checkpoint::NamedTensor::from_matrix("theta1", &model.backbone.theta1),
            ],
            crate::checkpoint::CheckpointMeta {
                epoch: 0,
                seed: 0,
                config_digest: String::new(),
            },
        );
        match finetune(
            Some(&ckpt),
            &d,
            &x,
            &split,
            &FinetuneConfig::default(),
            RngSeed(0),
            true,
        ) {
            Err(Error::InvalidArgument(msg)) => {
                assert!(msg.contains('7') && msg.contains('3'), "message: {msg}");
            }
            other => panic!("expected dim mismatch, got {other:?}"),
        }
    }

    fn small_protocol_cfg(seeds: Vec<u64>) -> ProtocolConfig {
        let mut cfg = ProtocolConfig::new(90);
        cfg.seeds = seeds;
        cfg.embed.hash_dim = 256;
        cfg.embed.embed_dim = 16;
        cfg.embed.epochs = 10;
        cfg.pretrain.epochs = 4;
        cfg.pretrain.budget = 30;
        cfg.pretrain.clusters = 3;
        cfg.pretrain.knn = 1;
        cfg.pretrain.hidden_dim = 8;
        cfg.pretrain.contrastive.projection_dim = 6;
        cfg.finetune.epochs = 15;
        cfg.finetune.hidden_dim = 8;
        cfg
    }

    fn small_family() -> (Vec<PreparedDomain>, PreparedDomain) {
        // class size must clear the 100-per-class validation cap so the
        // test split is non-empty
        let mut specs = default_family(3, 11);
        for s in &mut specs {
            s.vertices_per_class = 120;
            s.hyperedge_count = 150;
            s.edge_size_range = (3, 4);
        }
        let datasets = synth_domains(&specs).unwrap();
        let cfg = {
            let mut c = TrainConfig::new(RngSeed(17));
            c.hash_dim = 256;
            c.embed_dim = 16;
            c.epochs = 10;
            c
        };
        let mut prepared = prepare_domains(&datasets, &cfg).unwrap();
        let target = prepared.pop().unwrap();
        (prepared, target)
    }

    #[test]
    fn run_protocol_contract() {
        let (sources, target) = small_family();
        let cfg = small_protocol_cfg(vec![1, 2, 3, 4, 5]);
        let report = run_protocol(Mode::ScratchHgnn, &sources, &target, &cfg).unwrap();
        assert_eq!(report.runs.len(), 5);
        let mean = report.runs.iter().map(|r| r.accuracy).sum::<f64>() / 5.0;
        assert_abs_diff_eq!(report.mean, mean, epsilon = 1e-15);
        assert!(report.std_dev.is_finite());
        assert!(report.runs.iter().all(|r| (0.0..=1.0).contains(&r.accuracy)));
        assert_eq!(report.config_digest.len(), 64);
    }

    #[test]
    fn run_protocol_rejects_target_among_sources() {
        let (sources, _) = small_family();
        let cfg = small_protocol_cfg(vec![1]);
        let target = sources[0].clone();
        assert!(matches!(
            run_protocol(Mode::ScratchHgnn, &sources, &target, &cfg),
            Err(Error::InvalidArgument(_))
        ));
    }

    #[test]
    fn protocol_modes_run_and_are_paired() {
        let (sources, target) = small_family();
        let cfg = small_protocol_cfg(vec![1, 2]);
        for mode in Mode::ALL {
            let report = run_protocol(mode, &sources, &target, &cfg).unwrap();
            assert_eq!(report.mode, mode.as_str());
            assert_eq!(report.runs.len(), 2);
            assert_eq!(report.runs[0].seed, 1);
            assert_eq!(report.runs[1].seed, 2);
        }
    }

    #[test]
    fn cluster_ablation_rows_and_digests() {
        let (sources, target) = small_family();
        let cfg = small_protocol_cfg(vec![1, 2]);
        let rows = cluster_ablation(&sources, &target, &cfg, &[1, 3]).unwrap();
        assert_eq!(rows.len(), 2);
        assert_eq!(rows[0].clusters, 1);
        assert_ne!(rows[0].config_digest, rows[1].config_digest);
    }

    #[test]
    fn scaling_study_shape() {
        let (sources, target) = small_family();
        let cfg = small_protocol_cfg(vec![1]);
        let study = scaling_study(&sources, &target, &cfg, &[10, 20]).unwrap();
        assert_eq!(study.domain_rows.len(), sources.len());
        for (i, row) in study.domain_rows.iter().enumerate() {
            assert_eq!(row.num_domains, i + 1);
        }
        assert_eq!(study.budget_rows.len(), 2);
        assert!(study.domain_csv().lines().count() == sources.len() + 1);
    }

    #[test]
    fn sampling_retention_runs() {
        let (sources, _) = small_family();
        let graphs: Vec<&Hypergraph> =
            sources.iter().map(|s| &s.dataset.hypergraph).collect();
        let (bfs, random) = sampling_retention(&graphs, 20, 5).unwrap();
        assert!(bfs.is_finite() && random.is_finite());
        assert!(bfs >= 0.0 && random >= 0.0);
    }
}
