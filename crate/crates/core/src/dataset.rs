//! Text-attributed hypergraph datasets: line-oriented on-disk format,
//! loading with degree-based cleaning, C-way-1-shot splits, and a synthetic
//! multi-domain generator for desk-scale experiments.

use crate::error::{Error, Result};
use crate::hypergraph::Hypergraph;
use crate::rng::RngSeed;
use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};
use std::fs;
use std::io::{BufRead, BufReader, Write};
use std::path::Path;

/// Hyperedges larger than this are dropped during cleaning.
pub const CLEAN_MAX_DEGREE: usize = 40;
/// Validation vertices taken per class (capped by class size).
pub const VAL_PER_CLASS: usize = 100;

/// A hypergraph whose vertices carry a text and a class label.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TahgDataset {
    pub name: String,
    pub hypergraph: Hypergraph,
    pub texts: Vec<String>,
    pub labels: Vec<usize>,
    pub num_classes: usize,
}

impl TahgDataset {
    pub fn new(
        name: String,
        hypergraph: Hypergraph,
        texts: Vec<String>,
        labels: Vec<usize>,
        num_classes: usize,
    ) -> Result<Self> {
        let n = hypergraph.num_vertices();
        if texts.len() != n || labels.len() != n {
            return Err(Error::invalid_argument(format!(
                "dataset {name}: {} texts / {} labels for {n} vertices",
                texts.len(),
                labels.len()
            )));
        }
        if let Some(&bad) = labels.iter().find(|&&l| l >= num_classes) {
            return Err(Error::invalid_argument(format!(
                "dataset {name}: label {bad} out of range {num_classes}"
            )));
        }
        let mut present = vec![false; num_classes];
        for &l in &labels {
            present[l] = true;
        }
        if let Some(missing) = present.iter().position(|&p| !p) {
            return Err(Error::invalid_argument(format!(
                "dataset {name}: class {missing} has no vertices"
            )));
        }
        Ok(TahgDataset {
            name,
            hypergraph,
            texts,
            labels,
            num_classes,
        })
    }

    pub fn num_vertices(&self) -> usize {
        self.hypergraph.num_vertices()
    }

    /// Vertex ids of each class, ascending.
    pub fn class_members(&self) -> Vec<Vec<usize>> {
        let mut members = vec![Vec::new(); self.num_classes];
        for (v, &l) in self.labels.iter().enumerate() {
            members[l].push(v);
        }
        members
    }
}

/// One labeled vertex per class for training, up to 100 per class for
/// validation, the rest for testing.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FewShotSplit {
    pub train_ids: Vec<usize>,
    pub val_ids: Vec<usize>,
    pub test_ids: Vec<usize>,
}

#[derive(Serialize, Deserialize)]
struct Manifest {
    name: String,
    num_classes: usize,
    clean: bool,
}

#[derive(Serialize, Deserialize)]
struct VertexLine {
    id: usize,
    text: String,
    label: usize,
}

#[derive(Serialize, Deserialize)]
struct EdgeLine {
    vertices: Vec<usize>,
}

/// Load a dataset directory (`manifest.json`, `vertices.jsonl`,
/// `hyperedges.jsonl`). Applies cleaning when the manifest asks for it.
pub fn load_dataset(dir: &Path) -> Result<TahgDataset> {
    let manifest_path = dir.join("manifest.json");
    if !manifest_path.is_file() {
        return Err(Error::NotFound(manifest_path));
    }
    let manifest: Manifest = serde_json::from_str(&fs::read_to_string(&manifest_path)?)?;

    let vertices_path = dir.join("vertices.jsonl");
    if !vertices_path.is_file() {
        return Err(Error::NotFound(vertices_path));
    }
    let mut texts = Vec::new();
    let mut labels = Vec::new();
    for (idx, line) in BufReader::new(fs::File::open(&vertices_path)?)
        .lines()
        .enumerate()
    {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let lineno = idx + 1;
        let v: VertexLine = serde_json::from_str(&line)
            .map_err(|e| Error::format("vertices.jsonl", lineno, e.to_string()))?;
        if v.id != texts.len() {
            return Err(Error::format(
                "vertices.jsonl",
                lineno,
                format!("expected id {}, got {}", texts.len(), v.id),
            ));
        }
        if v.label >= manifest.num_classes {
            return Err(Error::format(
                "vertices.jsonl",
                lineno,
                format!("label {} out of range {}", v.label, manifest.num_classes),
            ));
        }
        texts.push(v.text);
        labels.push(v.label);
    }
    let n = texts.len();

    let edges_path = dir.join("hyperedges.jsonl");
    if !edges_path.is_file() {
        return Err(Error::NotFound(edges_path));
    }
    let mut edges = Vec::new();
    for (idx, line) in BufReader::new(fs::File::open(&edges_path)?)
        .lines()
        .enumerate()
    {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let lineno = idx + 1;
        let e: EdgeLine = serde_json::from_str(&line)
            .map_err(|e| Error::format("hyperedges.jsonl", lineno, e.to_string()))?;
        if e.vertices.is_empty() {
            return Err(Error::format("hyperedges.jsonl", lineno, "empty hyperedge"));
        }
        if let Some(&bad) = e.vertices.iter().find(|&&v| v >= n) {
            return Err(Error::format(
                "hyperedges.jsonl",
                lineno,
                format!("vertex {bad} out of range {n}"),
            ));
        }
        edges.push(e.vertices);
    }

    let mut hypergraph = Hypergraph::new(n, edges)?;
    if manifest.clean {
        let (cleaned, kept) = hypergraph.clean(CLEAN_MAX_DEGREE)?;
        texts = kept.iter().map(|&v| texts[v].clone()).collect();
        labels = kept.iter().map(|&v| labels[v]).collect();
        hypergraph = cleaned;
    }
    TahgDataset::new(manifest.name, hypergraph, texts, labels, manifest.num_classes)
}

/// Write a dataset directory in canonical form (already-cleaned data, so the
/// manifest carries `clean: false`).
pub fn save_dataset(d: &TahgDataset, dir: &Path) -> Result<()> {
    fs::create_dir_all(dir)?;
    let manifest = Manifest {
        name: d.name.clone(),
        num_classes: d.num_classes,
        clean: false,
    };
    fs::write(
        dir.join("manifest.json"),
        serde_json::to_string(&manifest)? + "\n",
    )?;

    let mut vf = fs::File::create(dir.join("vertices.jsonl"))?;
    for (id, (text, &label)) in d.texts.iter().zip(&d.labels).enumerate() {
        let line = VertexLine {
            id,
            text: text.clone(),
            label,
        };
        writeln!(vf, "{}", serde_json::to_string(&line)?)?;
    }

    let mut ef = fs::File::create(dir.join("hyperedges.jsonl"))?;
    for e in d.hypergraph.hyperedges() {
        let line = EdgeLine {
            vertices: e.clone(),
        };
        writeln!(ef, "{}", serde_json::to_string(&line)?)?;
    }
    Ok(())
}

/// Parameters of one synthetic domain.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DomainSpec {
    pub name: String,
    pub num_classes: usize,
    pub vertices_per_class: usize,
    pub hyperedge_count: usize,
    /// probability that a hyperedge is drawn inside a single class
    pub intra_class_bias: f64,
    /// size of the shared noise-token pool
    pub vocab_size: usize,
    /// inclusive hyperedge size range; varies per domain to give domains
    /// distinct degree distributions
    #[serde(default = "default_edge_size_range")]
    pub edge_size_range: (usize, usize),
    /// probability that a text token comes from the vertex's class block
    /// rather than the shared noise pool
    #[serde(default = "default_class_token_prob")]
    pub class_token_prob: f64,
    pub seed: u64,
}

fn default_edge_size_range() -> (usize, usize) {
    (3, 6)
}

fn default_class_token_prob() -> f64 {
    0.2
}

/// Distinct class tokens owned by each (domain, class) block.
const CLASS_BLOCK_TOKENS: usize = 12;
/// Tokens per synthetic text.
const TEXT_LEN_RANGE: (usize, usize) = (10, 16);

impl DomainSpec {
    fn validate(&self) -> Result<()> {
        let n = self.num_classes * self.vertices_per_class;
        let field_err = |field: &str, msg: String| {
            Error::invalid_argument(format!("domain {:?}, field {field}: {msg}", self.name))
        };
        if self.num_classes == 0 {
            return Err(field_err("num_classes", "must be >= 1".into()));
        }
        if self.vertices_per_class == 0 {
            return Err(field_err("vertices_per_class", "must be >= 1".into()));
        }
        if !(0.0..=1.0).contains(&self.intra_class_bias) {
            return Err(field_err(
                "intra_class_bias",
                format!("{} outside [0, 1]", self.intra_class_bias),
            ));
        }
        if !(0.0..=1.0).contains(&self.class_token_prob) {
            return Err(field_err(
                "class_token_prob",
                format!("{} outside [0, 1]", self.class_token_prob),
            ));
        }
        if self.vocab_size == 0 {
            return Err(field_err("vocab_size", "must be >= 1".into()));
        }
        let (lo, hi) = self.edge_size_range;
        if lo < 2 || lo > hi {
            return Err(field_err(
                "edge_size_range",
                format!("({lo}, {hi}) must satisfy 2 <= lo <= hi"),
            ));
        }
        if hi > self.vertices_per_class || hi > n {
            return Err(field_err(
                "edge_size_range",
                format!("upper bound {hi} exceeds class size {}", self.vertices_per_class),
            ));
        }
        Ok(())
    }
}

/// Generate one planted-partition dataset per spec. Class-token blocks are
/// disjoint across domains (keyed by position in `specs`), so domains share
/// only the noise vocabulary.
pub fn synth_domains(specs: &[DomainSpec]) -> Result<Vec<TahgDataset>> {
    specs
        .iter()
        .enumerate()
        .map(|(di, spec)| synth_one(di, spec))
        .collect()
}

fn synth_one(domain_index: usize, spec: &DomainSpec) -> Result<TahgDataset> {
    spec.validate()?;
    let mut rng = RngSeed(spec.seed).rng();
    let n = spec.num_classes * spec.vertices_per_class;

    let labels: Vec<usize> = (0..n).map(|v| v / spec.vertices_per_class).collect();
    let mut texts = Vec::with_capacity(n);
    for &label in &labels {
        let len = rng.random_range(TEXT_LEN_RANGE.0..=TEXT_LEN_RANGE.1);
        let mut toks = Vec::with_capacity(len);
        for _ in 0..len {
            if rng.random::<f64>() < spec.class_token_prob {
                let t = rng.random_range(0..CLASS_BLOCK_TOKENS);
                toks.push(format!("d{domain_index}c{label}t{t}"));
            } else {
                let t = rng.random_range(0..spec.vocab_size);
                toks.push(format!("noise{t}"));
            }
        }
        texts.push(toks.join(" "));
    }

    let (lo, hi) = spec.edge_size_range;
    let mut edges = Vec::with_capacity(spec.hyperedge_count);
    for _ in 0..spec.hyperedge_count {
        let size = rng.random_range(lo..=hi);
        let edge = if rng.random::<f64>() < spec.intra_class_bias {
            let class = rng.random_range(0..spec.num_classes);
            let base = class * spec.vertices_per_class;
            rand::seq::index::sample(&mut rng, spec.vertices_per_class, size)
                .into_iter()
                .map(|i| base + i)
                .collect()
        } else {
            rand::seq::index::sample(&mut rng, n, size).into_vec()
        };
        edges.push(edge);
    }

    TahgDataset::new(
        spec.name.clone(),
        Hypergraph::new(n, edges)?,
        texts,
        labels,
        spec.num_classes,
    )
}

/// Draw a C-way-1-shot split: per class one training vertex, then up to
/// [`VAL_PER_CLASS`] validation vertices, the rest to the test set.
pub fn make_split(d: &TahgDataset, seed: RngSeed) -> Result<FewShotSplit> {
    let mut rng = seed.rng();
    let mut train = Vec::new();
    let mut val = Vec::new();
    let mut test = Vec::new();
    for (class, mut members) in d.class_members().into_iter().enumerate() {
        if members.len() < 2 {
            return Err(Error::invalid_argument(format!(
                "class {class} has {} vertices; the 1-shot protocol needs at least 2",
                members.len()
            )));
        }
        members.shuffle(&mut rng);
        train.push(members[0]);
        let val_take = VAL_PER_CLASS.min(members.len() - 1);
        val.extend_from_slice(&members[1..1 + val_take]);
        test.extend_from_slice(&members[1 + val_take..]);
    }
    train.sort_unstable();
    val.sort_unstable();
    test.sort_unstable();
    Ok(FewShotSplit {
        train_ids: train,
        val_ids: val,
        test_ids: test,
    })
}
