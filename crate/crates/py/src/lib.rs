//! Python bindings for the hyperfm pipeline: the hypergraph type and its
//! operators, datasets and splits, the numerical primitives, and the
//! embed/pretrain/finetune loop.
//!
//! Matrices cross the boundary as `list[list[float]]`; this keeps the
//! bindings dependency-free and is plenty at desk scale.

use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;

use hyperfm_core::checkpoint as ckpt;
use hyperfm_core::dataset;
use hyperfm_core::embed;
use hyperfm_core::finetune;
use hyperfm_core::hypergraph;
use hyperfm_core::matrix::DenseMatrix;
use hyperfm_core::numerics;
use hyperfm_core::pretrain;
use hyperfm_core::rng::RngSeed;
use hyperfm_core::text;

fn py_err(e: hyperfm_core::Error) -> PyErr {
    PyValueError::new_err(e.to_string())
}

fn matrix_from_rows(rows: Vec<Vec<f64>>) -> PyResult<DenseMatrix> {
    DenseMatrix::from_rows(&rows).map_err(py_err)
}

fn matrix_to_rows(m: &DenseMatrix) -> Vec<Vec<f64>> {
    m.iter_rows().map(|r| r.to_vec()).collect()
}

/// A hypergraph over vertices `0..num_vertices`.
#[pyclass(name = "Hypergraph", from_py_object)]
#[derive(Clone)]
struct PyHypergraph {
    inner: hypergraph::Hypergraph,
}

#[pymethods]
impl PyHypergraph {
    #[new]
    fn new(num_vertices: usize, hyperedges: Vec<Vec<usize>>) -> PyResult<Self> {
        Ok(PyHypergraph {
            inner: hypergraph::Hypergraph::new(num_vertices, hyperedges).map_err(py_err)?,
        })
    }

    #[getter]
    fn num_vertices(&self) -> usize {
        self.inner.num_vertices()
    }

    #[getter]
    fn num_hyperedges(&self) -> usize {
        self.inner.num_hyperedges()
    }

    fn hyperedges(&self) -> Vec<Vec<usize>> {
        self.inner.hyperedges().to_vec()
    }

    /// (vertex_degrees, hyperedge_degrees)
    fn degrees(&self) -> (Vec<usize>, Vec<usize>) {
        self.inner.degrees()
    }

    /// One application of the normalized propagation operator.
    fn propagate(&self, features: Vec<Vec<f64>>) -> PyResult<Vec<Vec<f64>>> {
        let x = matrix_from_rows(features)?;
        Ok(matrix_to_rows(&self.inner.propagate(&x).map_err(py_err)?))
    }

    /// Ids of vertices sharing a hyperedge with `v` (including `v`).
    fn neighbor_vector(&self, v: usize) -> PyResult<Vec<usize>> {
        Ok(self.inner.neighbor_vector(v).map_err(py_err)?.ones())
    }

    /// Diffusion sample: returns (sub_hypergraph, parent_ids).
    fn bfs_sample(&self, budget: usize, seed: u64) -> PyResult<(PyHypergraph, Vec<usize>)> {
        let sub = self.inner.bfs_sample(budget, RngSeed(seed)).map_err(py_err)?;
        Ok((PyHypergraph { inner: sub.hypergraph }, sub.parent_ids))
    }

    /// Uniform sample: returns (sub_hypergraph, parent_ids).
    fn random_sample(&self, budget: usize, seed: u64) -> PyResult<(PyHypergraph, Vec<usize>)> {
        let sub = self
            .inner
            .random_sample(budget, RngSeed(seed))
            .map_err(py_err)?;
        Ok((PyHypergraph { inner: sub.hypergraph }, sub.parent_ids))
    }

    /// Drop oversize hyperedges and isolated vertices:
    /// returns (cleaned, kept_vertex_ids).
    fn clean(&self, max_degree: usize) -> PyResult<(PyHypergraph, Vec<usize>)> {
        let (g, kept) = self.inner.clean(max_degree).map_err(py_err)?;
        Ok((PyHypergraph { inner: g }, kept))
    }

    fn __repr__(&self) -> String {
        format!(
            "Hypergraph(num_vertices={}, num_hyperedges={})",
            self.inner.num_vertices(),
            self.inner.num_hyperedges()
        )
    }
}

/// A text-attributed hypergraph dataset.
#[pyclass(name = "TahgDataset", from_py_object)]
#[derive(Clone)]
struct PyDataset {
    inner: dataset::TahgDataset,
}

#[pymethods]
impl PyDataset {
    #[staticmethod]
    fn load(path: &str) -> PyResult<Self> {
        Ok(PyDataset {
            inner: dataset::load_dataset(std::path::Path::new(path)).map_err(py_err)?,
        })
    }

    fn save(&self, path: &str) -> PyResult<()> {
        dataset::save_dataset(&self.inner, std::path::Path::new(path)).map_err(py_err)
    }

    #[getter]
    fn name(&self) -> String {
        self.inner.name.clone()
    }

    #[getter]
    fn num_vertices(&self) -> usize {
        self.inner.num_vertices()
    }

    #[getter]
    fn num_classes(&self) -> usize {
        self.inner.num_classes
    }

    #[getter]
    fn labels(&self) -> Vec<usize> {
        self.inner.labels.clone()
    }

    #[getter]
    fn texts(&self) -> Vec<String> {
        self.inner.texts.clone()
    }

    fn hypergraph(&self) -> PyHypergraph {
        PyHypergraph {
            inner: self.inner.hypergraph.clone(),
        }
    }

    fn __repr__(&self) -> String {
        format!(
            "TahgDataset(name={:?}, num_vertices={}, num_classes={})",
            self.inner.name,
            self.inner.num_vertices(),
            self.inner.num_classes
        )
    }
}

/// A saved tensor bundle.
#[pyclass(name = "Checkpoint", from_py_object)]
#[derive(Clone)]
struct PyCheckpoint {
    inner: ckpt::Checkpoint,
}

#[pymethods]
impl PyCheckpoint {
    #[staticmethod]
    fn load(path: &str) -> PyResult<Self> {
        Ok(PyCheckpoint {
            inner: ckpt::Checkpoint::load(std::path::Path::new(path)).map_err(py_err)?,
        })
    }

    fn save(&self, path: &str) -> PyResult<()> {
        self.inner.save(std::path::Path::new(path)).map_err(py_err)
    }

    fn tensor_names(&self) -> Vec<String> {
        self.inner.tensors.iter().map(|t| t.name.clone()).collect()
    }

    /// (shape, flat row-major values)
    fn tensor(&self, name: &str) -> PyResult<(Vec<usize>, Vec<f64>)> {
        let t = self
            .inner
            .tensor(name)
            .ok_or_else(|| PyValueError::new_err(format!("no tensor {name:?}")))?;
        Ok((t.shape.clone(), t.data.clone()))
    }

    #[getter]
    fn config_digest(&self) -> String {
        self.inner.meta.config_digest.clone()
    }
}

/// Generate synthetic domains from a JSON spec array.
#[pyfunction]
fn synth_domains(spec_json: &str) -> PyResult<Vec<PyDataset>> {
    let specs: Vec<dataset::DomainSpec> = serde_json::from_str(spec_json)
        .map_err(|e| PyValueError::new_err(format!("malformed spec: {e}")))?;
    Ok(dataset::synth_domains(&specs)
        .map_err(py_err)?
        .into_iter()
        .map(|inner| PyDataset { inner })
        .collect())
}

/// The standard synthetic experiment family (`count` domains; last one is
/// conventionally the target).
#[pyfunction]
fn default_family(count: usize, seed: u64) -> PyResult<Vec<PyDataset>> {
    let specs = finetune::default_family(count, seed);
    Ok(dataset::synth_domains(&specs)
        .map_err(py_err)?
        .into_iter()
        .map(|inner| PyDataset { inner })
        .collect())
}

/// C-way-1-shot split: returns (train_ids, val_ids, test_ids).
#[pyfunction]
fn make_split(d: &PyDataset, seed: u64) -> PyResult<(Vec<usize>, Vec<usize>, Vec<usize>)> {
    let s = dataset::make_split(&d.inner, RngSeed(seed)).map_err(py_err)?;
    Ok((s.train_ids, s.val_ids, s.test_ids))
}

/// Seeded k-means: returns (assignments, centroids).
#[pyfunction]
#[pyo3(signature = (points, k, seed, max_iter = 50))]
fn kmeans(
    points: Vec<Vec<f64>>,
    k: usize,
    seed: u64,
    max_iter: usize,
) -> PyResult<(Vec<usize>, Vec<Vec<f64>>)> {
    let x = matrix_from_rows(points)?;
    let (assign, centroids) =
        numerics::kmeans(&x, k, RngSeed(seed), max_iter).map_err(py_err)?;
    Ok((assign, matrix_to_rows(&centroids)))
}

/// For each row, the set {row} ∪ {k_c nearest rows}.
#[pyfunction]
fn knn_groups(points: Vec<Vec<f64>>, k_c: usize) -> PyResult<Vec<Vec<usize>>> {
    let x = matrix_from_rows(points)?;
    numerics::knn_groups(&x, k_c).map_err(py_err)
}

/// Rank-r truncated SVD scores (left singular vectors scaled by singular
/// values).
#[pyfunction]
fn truncated_svd(points: Vec<Vec<f64>>, r: usize) -> PyResult<Vec<Vec<f64>>> {
    let x = matrix_from_rows(points)?;
    Ok(matrix_to_rows(&numerics::truncated_svd(&x, r).map_err(py_err)?))
}

/// L2-normalized TF-IDF rows over a hashed vocabulary.
#[pyfunction]
#[pyo3(signature = (texts, dim = 4096))]
fn tfidf(texts: Vec<String>, dim: usize) -> PyResult<Vec<Vec<f64>>> {
    Ok(matrix_to_rows(&text::tfidf(&texts, dim).map_err(py_err)?))
}

/// Structure-aware vertex embeddings via the hierarchical neighbor
/// prediction pipeline.
#[pyfunction]
#[pyo3(signature = (d, epochs = 200, seed = 0, hash_dim = 4096, embed_dim = 256, tree_height = 4))]
fn train_embeddings(
    d: &PyDataset,
    epochs: usize,
    seed: u64,
    hash_dim: usize,
    embed_dim: usize,
    tree_height: usize,
) -> PyResult<Vec<Vec<f64>>> {
    let mut cfg = embed::TrainConfig::new(RngSeed(seed));
    cfg.epochs = epochs;
    cfg.hash_dim = hash_dim;
    cfg.embed_dim = embed_dim;
    cfg.tree_height = tree_height;
    Ok(matrix_to_rows(
        &embed::embed_pipeline(&d.inner, &cfg).map_err(py_err)?,
    ))
}

/// Joint multi-domain pretraining; returns the backbone checkpoint.
#[pyfunction]
#[pyo3(signature = (datasets, embeddings, epochs = 30, budget = 500, k = 5, k_c = 2, seed = 0, hidden_dim = 128))]
#[allow(clippy::too_many_arguments)]
fn pretrain_multi_domain(
    datasets: Vec<PyDataset>,
    embeddings: Vec<Vec<Vec<f64>>>,
    epochs: usize,
    budget: usize,
    k: usize,
    k_c: usize,
    seed: u64,
    hidden_dim: usize,
) -> PyResult<(PyCheckpoint, Vec<(usize, f64, f64, f64)>)> {
    if datasets.len() != embeddings.len() {
        return Err(PyValueError::new_err(format!(
            "{} datasets but {} embedding matrices",
            datasets.len(),
            embeddings.len()
        )));
    }
    let mats: Vec<DenseMatrix> = embeddings
        .into_iter()
        .map(matrix_from_rows)
        .collect::<PyResult<_>>()?;
    let refs: Vec<(&hypergraph::Hypergraph, &DenseMatrix)> = datasets
        .iter()
        .zip(&mats)
        .map(|(d, m)| (&d.inner.hypergraph, m))
        .collect();
    let mut cfg = pretrain::PretrainConfig::new(seed);
    cfg.epochs = epochs;
    cfg.budget = budget;
    cfg.clusters = k;
    cfg.knn = k_c;
    cfg.hidden_dim = hidden_dim;
    let (checkpoint, trace) = pretrain::pretrain_run(&refs, &cfg).map_err(py_err)?;
    Ok((
        PyCheckpoint { inner: checkpoint },
        trace
            .into_iter()
            .map(|e| (e.epoch, e.structural, e.feature, e.total))
            .collect(),
    ))
}

/// Fine-tune (optionally from a checkpoint) under a seeded 1-shot split and
/// return (val_accuracy, test_accuracy).
#[pyfunction]
#[pyo3(signature = (d, embeddings, checkpoint = None, seed = 1, epochs = 200, learning_rate = 0.01, hidden_dim = 128, use_structure = true))]
#[allow(clippy::too_many_arguments)]
fn finetune_evaluate(
    d: &PyDataset,
    embeddings: Vec<Vec<f64>>,
    checkpoint: Option<&PyCheckpoint>,
    seed: u64,
    epochs: usize,
    learning_rate: f64,
    hidden_dim: usize,
    use_structure: bool,
) -> PyResult<(f64, f64)> {
    let features = matrix_from_rows(embeddings)?;
    let split = dataset::make_split(&d.inner, RngSeed(seed)).map_err(py_err)?;
    if split.test_ids.is_empty() {
        return Err(PyValueError::new_err(
            "test split is empty; use classes with more than 101 vertices",
        ));
    }
    let cfg = finetune::FinetuneConfig {
        epochs,
        learning_rate,
        hidden_dim,
    };
    let model = finetune::finetune(
        checkpoint.map(|c| &c.inner),
        &d.inner,
        &features,
        &split,
        &cfg,
        RngSeed(seed).derive(0xF17E),
        use_structure,
    )
    .map_err(py_err)?;
    let structure = use_structure.then_some(&d.inner.hypergraph);
    let test_acc = finetune::evaluate(
        &model.params,
        structure,
        &features,
        &d.inner.labels,
        &split.test_ids,
    )
    .map_err(py_err)?;
    Ok((model.best_val_accuracy, test_acc))
}

#[pymodule]
fn hyperfm_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyHypergraph>()?;
    m.add_class::<PyDataset>()?;
    m.add_class::<PyCheckpoint>()?;
    m.add_function(wrap_pyfunction!(synth_domains, m)?)?;
    m.add_function(wrap_pyfunction!(default_family, m)?)?;
    m.add_function(wrap_pyfunction!(make_split, m)?)?;
    m.add_function(wrap_pyfunction!(kmeans, m)?)?;
    m.add_function(wrap_pyfunction!(knn_groups, m)?)?;
    m.add_function(wrap_pyfunction!(truncated_svd, m)?)?;
    m.add_function(wrap_pyfunction!(tfidf, m)?)?;
    m.add_function(wrap_pyfunction!(train_embeddings, m)?)?;
    m.add_function(wrap_pyfunction!(pretrain_multi_domain, m)?)?;
    m.add_function(wrap_pyfunction!(finetune_evaluate, m)?)?;
    Ok(())
}
