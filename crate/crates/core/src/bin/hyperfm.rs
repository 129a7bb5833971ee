//! Command-line surface for the hypergraph foundation-model pipeline:
//! dataset synthesis, embedding training, pretraining, fine-tuning, and the
//! experiment suites.
//!
//! Exit codes: 0 success, 2 usage/config error, 1 runtime failure. Stdout
//! carries data (CSV/accuracy lines); diagnostics go to stderr.

use clap::{Args, Parser, Subcommand};
use hyperfm_core::checkpoint::{config_digest, Checkpoint, CheckpointMeta, NamedTensor};
use hyperfm_core::dataset::{load_dataset, save_dataset, synth_domains, DomainSpec, TahgDataset};
use hyperfm_core::embed::{embed_pipeline, TrainConfig};
use hyperfm_core::finetune::{
    cluster_ablation, cluster_csv, evaluate, finetune, prepare_domains, run_protocol,
    sampling_ablation, sampling_csv, sampling_retention, scaling_study, BudgetRow, EvalReport,
    FinetuneConfig, Mode, PreparedDomain, ProtocolConfig,
};
use hyperfm_core::matrix::DenseMatrix;
use hyperfm_core::multihg::SampleStrategy;
use hyperfm_core::pretrain::{
    build_multi_hypergraph, ip_pretrain_run, pretrain_run, write_loss_csv, PretrainConfig,
};
use hyperfm_core::rng::RngSeed;
use hyperfm_core::{Error, Hypergraph};
use serde::Deserialize;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

#[derive(Parser)]
#[command(
    name = "hyperfm",
    version,
    about = "Multi-domain hypergraph foundation model pipeline"
)]
struct Cli {
    /// Worker thread cap (default: HYPERFM_THREADS or all cores)
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate synthetic multi-domain datasets
    Synth(SynthArgs),
    /// Train structure-aware vertex embeddings for one dataset
    Embed(EmbedArgs),
    /// Self-supervised pretraining over source domains
    Pretrain(PretrainArgs),
    /// Fine-tune a (pre-trained or fresh) backbone on a target dataset
    Finetune(FinetuneArgs),
    /// Evaluate a fine-tuned checkpoint on a seeded test split
    Eval(EvalArgs),
    /// Experiment suites mirroring the comparison tables and ablations
    Experiment(ExperimentArgs),
}

#[derive(Args)]
struct SynthArgs {
    /// Output directory (one subdirectory per domain)
    #[arg(long)]
    out: PathBuf,
    /// Domain spec: inline JSON array or a path to a JSON file
    #[arg(long)]
    domains: String,
    /// Added to every domain's own seed
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(Args)]
struct EmbedArgs {
    /// Dataset directory
    #[arg(long)]
    data: PathBuf,
    /// Output embedding checkpoint
    #[arg(long)]
    out: PathBuf,
    /// Label-tree height
    #[arg(long, default_value_t = 4)]
    levels: usize,
    /// Training epochs per tree level
    #[arg(long, default_value_t = 200)]
    epochs: usize,
    #[arg(long, default_value_t = 5)]
    top_k: usize,
    #[arg(long, default_value_t = 1e-3)]
    lr: f64,
    #[arg(long, default_value_t = 4096)]
    hash_dim: usize,
    #[arg(long, default_value_t = 256)]
    embed_dim: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(Args)]
struct PretrainArgs {
    /// Source dataset directories
    #[arg(long, num_args = 1.., required = true)]
    sources: Vec<PathBuf>,
    /// Embedding checkpoints, one per source, same order
    #[arg(long, num_args = 1.., required = true)]
    emb: Vec<PathBuf>,
    /// Output checkpoint path
    #[arg(long)]
    out: PathBuf,
    /// Loss trace CSV (default: <out>.loss.csv)
    #[arg(long)]
    loss_csv: Option<PathBuf>,
    #[arg(long, default_value_t = 30)]
    epochs: usize,
    #[arg(long, default_value_t = 500)]
    budget: usize,
    /// Clusters per domain
    #[arg(long, default_value_t = 5)]
    k: usize,
    /// Nearest-neighbor order over cluster features
    #[arg(long, default_value_t = 2)]
    kc: usize,
    /// bfs | random
    #[arg(long, default_value = "bfs")]
    strategy: String,
    /// hyperfm (joint) | ip (isolated sequential)
    #[arg(long, default_value = "hyperfm")]
    mode: String,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Dump the first assembled multi-hypergraph for inspection
    #[arg(long)]
    dump_multihg: Option<PathBuf>,
}

#[derive(Args)]
struct FinetuneArgs {
    /// Pretrained checkpoint; omit to train from scratch
    #[arg(long)]
    ckpt: Option<PathBuf>,
    #[arg(long)]
    data: PathBuf,
    /// Embedding checkpoint for the dataset
    #[arg(long)]
    emb: PathBuf,
    /// Output fine-tuned checkpoint (includes the classifier head)
    #[arg(long)]
    out: PathBuf,
    #[arg(long, default_value_t = 200)]
    epochs: usize,
    #[arg(long, default_value_t = 0.01)]
    lr: f64,
    #[arg(long, default_value_t = 128)]
    hidden: usize,
    /// Split + initialization seed
    #[arg(long, default_value_t = 1)]
    seed: u64,
    /// Ignore hypergraph structure (MLP baseline)
    #[arg(long)]
    no_structure: bool,
}

#[derive(Args)]
struct EvalArgs {
    /// Fine-tuned checkpoint (with head tensors)
    #[arg(long)]
    ckpt: PathBuf,
    #[arg(long)]
    data: PathBuf,
    #[arg(long)]
    emb: PathBuf,
    /// Seed that generated the split to evaluate on
    #[arg(long, default_value_t = 1)]
    seed: u64,
}

#[derive(Args)]
struct ExperimentArgs {
    #[command(subcommand)]
    which: ExperimentKind,
}

#[derive(Subcommand)]
enum ExperimentKind {
    /// Four-mode comparison: scratch-mlp, scratch-hgnn, ip, hyperfm
    Protocol(ExpCommon),
    /// Domain-count scaling study plus the sampling-budget sweep
    Scaling(ScalingArgs),
    /// Cluster-count sweep (k = 1 is the non-hierarchical variant)
    ClusterAblation(ClusterArgs),
    /// BFS versus random sampling, structural and end-to-end
    SamplingAblation(ExpCommon),
}

#[derive(Args, Clone)]
struct ExpCommon {
    /// JSON config file; explicit flags override its values
    #[arg(long)]
    config: Option<PathBuf>,
    /// Source dataset directories (omit with --synthetic)
    #[arg(long, num_args = 1..)]
    sources: Vec<PathBuf>,
    /// Target dataset directory (omit with --synthetic)
    #[arg(long)]
    target: Option<PathBuf>,
    /// Generate N synthetic source domains plus a synthetic target
    #[arg(long)]
    synthetic: Option<usize>,
    /// Output directory for CSV/JSON reports
    #[arg(long)]
    out: PathBuf,
    /// Run seeds, comma separated
    #[arg(long, value_delimiter = ',')]
    seeds: Option<Vec<u64>>,
    /// Base seed for embedding/pretraining streams
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    embed_epochs: Option<usize>,
    #[arg(long)]
    pretrain_epochs: Option<usize>,
    #[arg(long)]
    finetune_epochs: Option<usize>,
    #[arg(long)]
    budget: Option<usize>,
    #[arg(long)]
    k: Option<usize>,
    #[arg(long)]
    kc: Option<usize>,
    #[arg(long)]
    hash_dim: Option<usize>,
    #[arg(long)]
    embed_dim: Option<usize>,
}

#[derive(Args)]
struct ScalingArgs {
    #[command(flatten)]
    common: ExpCommon,
    /// Sampling budgets to sweep
    #[arg(long, value_delimiter = ',')]
    budgets: Option<Vec<usize>>,
}

#[derive(Args)]
struct ClusterArgs {
    #[command(flatten)]
    common: ExpCommon,
    /// Cluster counts to sweep
    #[arg(long, value_delimiter = ',')]
    k_values: Option<Vec<usize>>,
}

/// Optional experiment config file; any present field acts as a default
/// that explicit flags override.
#[derive(Deserialize, Default)]
#[serde(deny_unknown_fields)]
struct FileConfig {
    seeds: Option<Vec<u64>>,
    seed: Option<u64>,
    embed_epochs: Option<usize>,
    pretrain_epochs: Option<usize>,
    finetune_epochs: Option<usize>,
    budget: Option<usize>,
    k: Option<usize>,
    kc: Option<usize>,
    hash_dim: Option<usize>,
    embed_dim: Option<usize>,
    budgets: Option<Vec<usize>>,
    k_values: Option<Vec<usize>>,
}

enum CliError {
    Usage(String),
    Runtime(Error),
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        CliError::Runtime(e)
    }
}

fn usage(msg: impl Into<String>) -> CliError {
    CliError::Usage(msg.into())
}

fn main() {
    let cli = Cli::parse();
    let threads = cli.threads.or_else(|| {
        std::env::var("HYPERFM_THREADS")
            .ok()
            .and_then(|v| v.parse().ok())
    });
    if let Some(n) = threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            eprintln!("warning: thread pool already initialized: {e}");
        }
    }
    let code = match run(cli.command) {
        Ok(()) => 0,
        Err(CliError::Usage(msg)) => {
            eprintln!("error: {msg}");
            2
        }
        Err(CliError::Runtime(e)) => {
            eprintln!("error: {e}");
            1
        }
    };
    std::process::exit(code);
}

fn run(command: Command) -> Result<(), CliError> {
    match command {
        Command::Synth(args) => cmd_synth(args),
        Command::Embed(args) => cmd_embed(args),
        Command::Pretrain(args) => cmd_pretrain(args),
        Command::Finetune(args) => cmd_finetune(args),
        Command::Eval(args) => cmd_eval(args),
        Command::Experiment(args) => match args.which {
            ExperimentKind::Protocol(c) => cmd_protocol(c),
            ExperimentKind::Scaling(c) => cmd_scaling(c),
            ExperimentKind::ClusterAblation(c) => cmd_cluster_ablation(c),
            ExperimentKind::SamplingAblation(c) => cmd_sampling_ablation(c),
        },
    }
}

fn announce_digest<T: serde::Serialize>(cfg: &T, out_dir_or_file: &Path) -> Result<String, CliError> {
    let digest = config_digest(cfg);
    eprintln!("config digest: {digest}");
    let json = serde_json::json!({
        "digest": digest,
        "config": serde_json::to_value(cfg).map_err(Error::from)?,
    });
    let path = if out_dir_or_file.extension().is_some() {
        out_dir_or_file.with_extension("config.json")
    } else {
        std::fs::create_dir_all(out_dir_or_file).map_err(Error::from)?;
        out_dir_or_file.join("config.json")
    };
    std::fs::write(&path, serde_json::to_string_pretty(&json).map_err(Error::from)? + "\n")
        .map_err(Error::from)?;
    Ok(digest)
}

fn cmd_synth(args: SynthArgs) -> Result<(), CliError> {
    let spec_text = if args.domains.trim_start().starts_with('[') {
        args.domains.clone()
    } else {
        std::fs::read_to_string(&args.domains)
            .map_err(|e| usage(format!("cannot read spec file {:?}: {e}", args.domains)))?
    };
    let mut specs: Vec<DomainSpec> = serde_json::from_str(&spec_text)
        .map_err(|e| usage(format!("malformed domain spec: {e}")))?;
    for spec in &mut specs {
        spec.seed = spec.seed.wrapping_add(args.seed);
    }
    let datasets = synth_domains(&specs).map_err(|e| usage(e.to_string()))?;

    #[derive(serde::Serialize)]
    struct SynthDigest<'a> {
        specs: &'a [DomainSpec],
    }
    announce_digest(&SynthDigest { specs: &specs }, &args.out)?;

    for d in &datasets {
        let dir = args.out.join(&d.name);
        save_dataset(d, &dir)?;
        println!("{},{},{},{}", d.name, d.num_vertices(), d.hypergraph.num_hyperedges(), d.num_classes);
    }
    Ok(())
}

fn load_dataset_usage(path: &Path) -> Result<TahgDataset, CliError> {
    load_dataset(path).map_err(|e| match e {
        Error::NotFound(p) => usage(format!("dataset file not found: {p:?}")),
        other => CliError::Runtime(other),
    })
}

fn cmd_embed(args: EmbedArgs) -> Result<(), CliError> {
    if args.levels == 0 {
        return Err(usage("--levels must be >= 1"));
    }
    let dataset = load_dataset_usage(&args.data)?;
    let mut cfg = TrainConfig::new(RngSeed(args.seed));
    cfg.epochs = args.epochs;
    cfg.top_k = args.top_k;
    cfg.learning_rate = args.lr;
    cfg.hash_dim = args.hash_dim;
    cfg.embed_dim = args.embed_dim;
    cfg.tree_height = args.levels;
    let digest = announce_digest(&cfg, &args.out)?;

    let embeddings = embed_pipeline(&dataset, &cfg)?;
    let ckpt = Checkpoint::new(
        vec![NamedTensor::from_matrix("X_emb", &embeddings)],
        CheckpointMeta {
            epoch: args.epochs as u64,
            seed: args.seed,
            config_digest: digest,
        },
    );
    ckpt.save(&args.out)?;
    println!("{},{},{}", dataset.name, embeddings.rows(), embeddings.cols());
    Ok(())
}

fn load_embeddings(path: &Path) -> Result<DenseMatrix, CliError> {
    let ckpt = Checkpoint::load(path).map_err(|e| match e {
        Error::NotFound(p) => usage(format!("embedding checkpoint not found: {p:?}")),
        other => CliError::Runtime(other),
    })?;
    Ok(ckpt.matrix("X_emb")?)
}

fn parse_strategy(s: &str) -> Result<SampleStrategy, CliError> {
    match s {
        "bfs" => Ok(SampleStrategy::Bfs),
        "random" => Ok(SampleStrategy::Random),
        other => Err(usage(format!("unknown strategy {other:?} (expected bfs|random)"))),
    }
}

fn cmd_pretrain(args: PretrainArgs) -> Result<(), CliError> {
    if args.sources.len() != args.emb.len() {
        return Err(usage(format!(
            "{} source directories but {} embedding files",
            args.sources.len(),
            args.emb.len()
        )));
    }
    let strategy = parse_strategy(&args.strategy)?;
    let mut domains: Vec<(Hypergraph, DenseMatrix)> = Vec::new();
    for (dir, emb_path) in args.sources.iter().zip(&args.emb) {
        let d = load_dataset_usage(dir)?;
        let emb = load_embeddings(emb_path)?;
        if emb.rows() != d.num_vertices() {
            return Err(usage(format!(
                "embeddings {emb_path:?} have {} rows but dataset {dir:?} has {} vertices",
                emb.rows(),
                d.num_vertices()
            )));
        }
        domains.push((d.hypergraph, emb));
    }
    let mut cfg = PretrainConfig::new(args.seed);
    cfg.epochs = args.epochs;
    cfg.budget = args.budget;
    cfg.clusters = args.k;
    cfg.knn = args.kc;
    cfg.strategy = strategy;
    cfg.validate().map_err(|e| usage(e.to_string()))?;
    announce_digest(&cfg, &args.out)?;

    let refs: Vec<(&Hypergraph, &DenseMatrix)> = domains.iter().map(|(g, e)| (g, e)).collect();

    if let Some(dump_dir) = &args.dump_multihg {
        let samples = hyperfm_core::multihg::sample_all(
            &refs,
            cfg.budget,
            RngSeed(cfg.seed).derive(0xE000).derive(1),
            cfg.strategy,
        )?;
        let hmh = build_multi_hypergraph(
            &samples,
            cfg.clusters,
            cfg.knn,
            RngSeed(cfg.seed).derive(0xE000).derive(2),
        )?;
        hmh.dump(dump_dir)?;
    }

    let (ckpt, trace) = match args.mode.as_str() {
        "hyperfm" => pretrain_run(&refs, &cfg)?,
        "ip" => ip_pretrain_run(&refs, &cfg)?,
        other => return Err(usage(format!("unknown mode {other:?} (expected hyperfm|ip)"))),
    };
    ckpt.save(&args.out)?;
    let csv_path = args
        .loss_csv
        .clone()
        .unwrap_or_else(|| args.out.with_extension("loss.csv"));
    write_loss_csv(&trace, &csv_path)?;
    for e in &trace {
        println!("{},{},{},{}", e.epoch, e.structural, e.feature, e.total);
    }
    Ok(())
}

fn cmd_finetune(args: FinetuneArgs) -> Result<(), CliError> {
    let dataset = load_dataset_usage(&args.data)?;
    let embeddings = load_embeddings(&args.emb)?;
    if embeddings.rows() != dataset.num_vertices() {
        return Err(usage(format!(
            "embeddings have {} rows but dataset has {} vertices",
            embeddings.rows(),
            dataset.num_vertices()
        )));
    }
    let checkpoint = match &args.ckpt {
        Some(p) => Some(Checkpoint::load(p).map_err(|e| match e {
            Error::NotFound(p) => usage(format!("checkpoint not found: {p:?}")),
            other => CliError::Runtime(other),
        })?),
        None => None,
    };
    let cfg = FinetuneConfig {
        epochs: args.epochs,
        learning_rate: args.lr,
        hidden_dim: args.hidden,
    };
    #[derive(serde::Serialize)]
    struct FtDigest<'a> {
        config: &'a FinetuneConfig,
        seed: u64,
        structure: bool,
    }
    let digest = announce_digest(
        &FtDigest {
            config: &cfg,
            seed: args.seed,
            structure: !args.no_structure,
        },
        &args.out,
    )?;

    let split = hyperfm_core::dataset::make_split(&dataset, RngSeed(args.seed))?;
    let model = finetune(
        checkpoint.as_ref(),
        &dataset,
        &embeddings,
        &split,
        &cfg,
        RngSeed(args.seed).derive(0xF17E),
        !args.no_structure,
    )?;
    let structure = (!args.no_structure).then_some(&dataset.hypergraph);
    let test_acc = if split.test_ids.is_empty() {
        eprintln!("warning: test split is empty (all non-train vertices fell in validation)");
        None
    } else {
        Some(evaluate(
            &model.params,
            structure,
            &embeddings,
            &dataset.labels,
            &split.test_ids,
        )?)
    };

    let head = model.params.head.as_ref().expect("fine-tuned head");
    let out_ckpt = Checkpoint::new(
        vec![
            NamedTensor::from_matrix("theta0", &model.params.theta0),
            NamedTensor::from_matrix("theta1", &model.params.theta1),
            NamedTensor::from_matrix("head_w", &head.weights),
            NamedTensor::from_vector("head_b", &head.bias),
        ],
        CheckpointMeta {
            epoch: model.best_epoch as u64,
            seed: args.seed,
            config_digest: digest,
        },
    );
    out_ckpt.save(&args.out)?;
    println!("val_accuracy,{}", model.best_val_accuracy);
    if let Some(acc) = test_acc {
        println!("test_accuracy,{acc}");
    }
    Ok(())
}

fn cmd_eval(args: EvalArgs) -> Result<(), CliError> {
    let dataset = load_dataset_usage(&args.data)?;
    let embeddings = load_embeddings(&args.emb)?;
    let ckpt = Checkpoint::load(&args.ckpt).map_err(|e| match e {
        Error::NotFound(p) => usage(format!("checkpoint not found: {p:?}")),
        other => CliError::Runtime(other),
    })?;
    let params = hyperfm_core::hgnn::HgnnParams {
        theta0: ckpt.matrix("theta0")?,
        theta1: ckpt.matrix("theta1")?,
        head: Some(hyperfm_core::hgnn::HeadParams {
            weights: ckpt.matrix("head_w")?,
            bias: ckpt.vector("head_b")?,
        }),
    };
    let split = hyperfm_core::dataset::make_split(&dataset, RngSeed(args.seed))?;
    if split.test_ids.is_empty() {
        return Err(usage(
            "test split is empty for this dataset/seed (every class is fully consumed by validation)",
        ));
    }
    let acc = evaluate(
        &params,
        Some(&dataset.hypergraph),
        &embeddings,
        &dataset.labels,
        &split.test_ids,
    )?;
    println!("test_accuracy,{acc}");
    Ok(())
}

struct ResolvedExperiment {
    sources: Vec<PreparedDomain>,
    target: PreparedDomain,
    cfg: ProtocolConfig,
    out: PathBuf,
    file: FileConfig,
}

fn resolve_experiment(common: &ExpCommon) -> Result<ResolvedExperiment, CliError> {
    let file: FileConfig = match &common.config {
        Some(path) => {
            let text = std::fs::read_to_string(path)
                .map_err(|e| usage(format!("cannot read config {path:?}: {e}")))?;
            serde_json::from_str(&text).map_err(|e| usage(format!("malformed config: {e}")))?
        }
        None => FileConfig::default(),
    };

    let base_seed = common.seed.or(file.seed).unwrap_or(7);
    let mut cfg = ProtocolConfig::new(base_seed);
    if let Some(seeds) = common.seeds.clone().or_else(|| file.seeds.clone()) {
        if seeds.is_empty() {
            return Err(usage("--seeds must be non-empty"));
        }
        cfg.seeds = seeds;
    }
    if let Some(v) = common.embed_epochs.or(file.embed_epochs) {
        cfg.embed.epochs = v;
    }
    if let Some(v) = common.pretrain_epochs.or(file.pretrain_epochs) {
        cfg.pretrain.epochs = v;
    }
    if let Some(v) = common.finetune_epochs.or(file.finetune_epochs) {
        cfg.finetune.epochs = v;
    }
    if let Some(v) = common.budget.or(file.budget) {
        cfg.pretrain.budget = v;
    }
    if let Some(v) = common.k.or(file.k) {
        cfg.pretrain.clusters = v;
    }
    if let Some(v) = common.kc.or(file.kc) {
        cfg.pretrain.knn = v;
    }
    if let Some(v) = common.hash_dim.or(file.hash_dim) {
        cfg.embed.hash_dim = v;
    }
    if let Some(v) = common.embed_dim.or(file.embed_dim) {
        cfg.embed.embed_dim = v;
    }
    cfg.pretrain.validate().map_err(|e| usage(e.to_string()))?;

    let datasets: Vec<TahgDataset> = match (common.synthetic, common.target.as_ref()) {
        (Some(n), None) => {
            if !common.sources.is_empty() {
                return Err(usage("--synthetic conflicts with --sources"));
            }
            if n == 0 {
                return Err(usage("--synthetic needs at least one source domain"));
            }
            let specs = hyperfm_core::finetune::default_family(n + 1, base_seed);
            synth_domains(&specs).map_err(|e| usage(e.to_string()))?
        }
        (None, Some(target)) => {
            if common.sources.is_empty() {
                return Err(usage("--target requires --sources"));
            }
            let mut all = Vec::new();
            for dir in &common.sources {
                all.push(load_dataset_usage(dir)?);
            }
            all.push(load_dataset_usage(target)?);
            all
        }
        (Some(_), Some(_)) => return Err(usage("--synthetic conflicts with --target")),
        (None, None) => {
            return Err(usage(
                "provide either --synthetic N or --sources ... --target DIR",
            ))
        }
    };

    eprintln!(
        "preparing embeddings for {} domains ({} epochs per tree level)",
        datasets.len(),
        cfg.embed.epochs
    );
    let mut prepared = prepare_domains(&datasets, &cfg.embed)?;
    let target = prepared.pop().expect("at least one domain");
    Ok(ResolvedExperiment {
        sources: prepared,
        target,
        cfg,
        out: common.out.clone(),
        file,
    })
}

fn write_out(path: &Path, content: &str) -> Result<(), CliError> {
    if let Some(parent) = path.parent() {
        if !parent.as_os_str().is_empty() {
            std::fs::create_dir_all(parent).map_err(Error::from)?;
        }
    }
    std::fs::write(path, content).map_err(Error::from)?;
    Ok(())
}

fn cmd_protocol(common: ExpCommon) -> Result<(), CliError> {
    let exp = resolve_experiment(&common)?;
    announce_digest(&exp.cfg, &exp.out)?;
    let mut csv = String::from("mode,seed,accuracy\n");
    let mut summaries = Vec::new();
    for mode in Mode::ALL {
        let report: EvalReport = run_protocol(mode, &exp.sources, &exp.target, &exp.cfg)?;
        for r in &report.runs {
            let _ = writeln!(csv, "{},{},{}", report.mode, r.seed, r.accuracy);
        }
        eprintln!(
            "{}: mean {:.4} ± {:.4}",
            report.mode, report.mean, report.std_dev
        );
        summaries.push(report.summary_json());
    }
    print!("{csv}");
    write_out(&exp.out.join("protocol.csv"), &csv)?;
    write_out(
        &exp.out.join("protocol_summary.json"),
        &(serde_json::to_string_pretty(&summaries).map_err(Error::from)? + "\n"),
    )?;
    Ok(())
}

fn cmd_scaling(args: ScalingArgs) -> Result<(), CliError> {
    let exp = resolve_experiment(&args.common)?;
    announce_digest(&exp.cfg, &exp.out)?;
    let budgets = args
        .budgets
        .or(exp.file.budgets.clone())
        .unwrap_or_else(|| vec![100, 250, 500, 1000]);
    let study = scaling_study(&exp.sources, &exp.target, &exp.cfg, &budgets)?;
    let domain_csv = study.domain_csv();
    let budget_csv = study.budget_csv();
    print!("{domain_csv}");
    print!("{budget_csv}");
    write_out(&exp.out.join("scaling_domains.csv"), &domain_csv)?;
    write_out(&exp.out.join("scaling_budgets.csv"), &budget_csv)?;
    let _last: Option<&BudgetRow> = study.budget_rows.last();
    Ok(())
}

fn cmd_cluster_ablation(args: ClusterArgs) -> Result<(), CliError> {
    let exp = resolve_experiment(&args.common)?;
    announce_digest(&exp.cfg, &exp.out)?;
    let k_values = args
        .k_values
        .or(exp.file.k_values.clone())
        .unwrap_or_else(|| vec![1, 2, 3, 4, 5, 6]);
    let rows = cluster_ablation(&exp.sources, &exp.target, &exp.cfg, &k_values)?;
    let csv = cluster_csv(&rows);
    print!("{csv}");
    write_out(&exp.out.join("cluster_ablation.csv"), &csv)?;
    Ok(())
}

fn cmd_sampling_ablation(common: ExpCommon) -> Result<(), CliError> {
    let exp = resolve_experiment(&common)?;
    announce_digest(&exp.cfg, &exp.out)?;

    let graphs: Vec<&Hypergraph> = exp
        .sources
        .iter()
        .map(|s| &s.dataset.hypergraph)
        .collect();
    let (bfs_epv, random_epv) = sampling_retention(&graphs, exp.cfg.pretrain.budget, 20)?;
    let retention_csv = format!(
        "strategy,hyperedges_per_vertex\nbfs,{bfs_epv}\nrandom,{random_epv}\n"
    );
    write_out(&exp.out.join("sampling_retention.csv"), &retention_csv)?;

    let ablation = sampling_ablation(&exp.sources, &exp.target, &exp.cfg)?;
    let csv = sampling_csv(&ablation);
    print!("{retention_csv}");
    print!("{csv}");
    write_out(&exp.out.join("sampling_ablation.csv"), &csv)?;
    eprintln!(
        "bfs mean {:.4} vs random mean {:.4}",
        ablation.bfs.mean, ablation.random.mean
    );
    Ok(())
}
