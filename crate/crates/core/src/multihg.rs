//! Hierarchical multi-hypergraph construction: per-domain sampling, cluster
//! layers with virtual cluster vertices, bond vertices linking domains, and
//! assembly of the merged structure with its stacked feature matrix.
//!
//! Virtual vertices carry aggregated features, never trainable embeddings,
//! so new domains can be attached without touching the model.

use crate::error::{Error, Result};
use crate::hypergraph::{Hypergraph, SubHypergraph};
use crate::matrix::DenseMatrix;
use crate::numerics::{kmeans, knn_groups, KMEANS_MAX_ITER};
use crate::rng::RngSeed;
use serde::{Deserialize, Serialize};
use std::collections::BTreeSet;
use std::io::Write;
use std::path::Path;

/// Default sampled vertices per domain.
pub const DEFAULT_BUDGET: usize = 500;
/// Default cluster count per domain.
pub const DEFAULT_CLUSTERS: usize = 5;
/// Default nearest-neighbor order for cluster hyperedges.
pub const DEFAULT_KNN: usize = 2;

/// Sub-hypergraph sampling strategy.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SampleStrategy {
    /// frontier-based diffusion sampling
    Bfs,
    /// uniform vertex sampling
    Random,
}

/// Sample every domain independently (derived per-domain seeds) and slice
/// its embedding rows down to the sampled vertices. Budgets larger than a
/// domain take the whole domain.
pub fn sample_all(
    domains: &[(&Hypergraph, &DenseMatrix)],
    budget: usize,
    seed: RngSeed,
    strategy: SampleStrategy,
) -> Result<Vec<(SubHypergraph, DenseMatrix)>> {
    if budget == 0 {
        return Err(Error::invalid_argument("sampling budget must be >= 1"));
    }
    domains
        .iter()
        .enumerate()
        .map(|(a, (g, emb))| {
            if emb.rows() != g.num_vertices() {
                return Err(Error::invalid_argument(format!(
                    "domain {a}: {} embedding rows for {} vertices",
                    emb.rows(),
                    g.num_vertices()
                )));
            }
            let b = budget.min(g.num_vertices());
            let s = seed.derive(a as u64);
            let sub = match strategy {
                SampleStrategy::Bfs => g.bfs_sample(b, s)?,
                SampleStrategy::Random => g.random_sample(b, s)?,
            };
            let rows = emb.select_rows(&sub.parent_ids);
            Ok((sub, rows))
        })
        .collect()
}

/// One domain's cluster layer: a k-means partition of the sampled vertices,
/// mean features per cluster, and nearest-neighbor hyperedges over the
/// cluster feature space.
#[derive(Debug, Clone, PartialEq)]
pub struct ClusterLayer {
    pub domain: usize,
    /// k member sets over sub-hypergraph local ids, each sorted
    pub membership: Vec<Vec<usize>>,
    /// k x C mean member features
    pub features: DenseMatrix,
    /// deduplicated knn groups over cluster ids
    pub knn_edges: Vec<Vec<usize>>,
}

pub fn cluster_domain(
    domain: usize,
    sub_embeddings: &DenseMatrix,
    k: usize,
    k_c: usize,
    seed: RngSeed,
) -> Result<ClusterLayer> {
    if k_c >= k {
        return Err(Error::invalid_argument(format!(
            "cluster knn order {k_c} must be smaller than cluster count {k}"
        )));
    }
    let (assignments, _) = kmeans(sub_embeddings, k, seed, KMEANS_MAX_ITER)?;
    let mut membership = vec![Vec::new(); k];
    for (v, &c) in assignments.iter().enumerate() {
        membership[c].push(v);
    }
    let cols = sub_embeddings.cols();
    let mut features = DenseMatrix::zeros(k, cols);
    for (c, members) in membership.iter().enumerate() {
        let inv = 1.0 / members.len().max(1) as f64;
        let frow = features.row_mut(c);
        for &v in members {
            for (f, &x) in frow.iter_mut().zip(sub_embeddings.row(v)) {
                *f += x * inv;
            }
        }
    }
    let dedup: BTreeSet<Vec<usize>> = knn_groups(&features, k_c)?.into_iter().collect();
    Ok(ClusterLayer {
        domain,
        membership,
        features,
        knn_edges: dedup.into_iter().collect(),
    })
}

/// One fully prepared domain going into assembly.
#[derive(Debug, Clone, PartialEq)]
pub struct DomainLayer {
    pub sub: SubHypergraph,
    /// |V_sub| x C structure-aware embeddings
    pub embeddings: DenseMatrix,
    pub clusters: ClusterLayer,
}

/// Role of a merged vertex; the payload is its domain index.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Role {
    Bond(usize),
    Domain(usize),
    Cluster(usize),
}

/// The merged multi-domain structure with its stacked features.
///
/// Vertex layout: bond vertices `0..m`, then per domain its sampled
/// vertices followed by its cluster vertices. Feature rows follow the same
/// order.
#[derive(Debug, Clone, PartialEq)]
pub struct HierarchicalMultiHypergraph {
    pub hypergraph: Hypergraph,
    pub features: DenseMatrix,
    pub roles: Vec<Role>,
    pub num_domains: usize,
}

impl HierarchicalMultiHypergraph {
    pub fn bond_count(&self) -> usize {
        self.num_domains
    }

    /// Ids of real (domain-role) vertices, the only maskable ones.
    pub fn maskable_ids(&self) -> Vec<usize> {
        self.roles
            .iter()
            .enumerate()
            .filter_map(|(i, r)| matches!(r, Role::Domain(_)).then_some(i))
            .collect()
    }

    /// Dump the merged structure (hyperedge format plus a role sidecar)
    /// for inspection.
    pub fn dump(&self, dir: &Path) -> Result<()> {
        std::fs::create_dir_all(dir)?;
        let mut ef = std::fs::File::create(dir.join("hyperedges.jsonl"))?;
        for e in self.hypergraph.hyperedges() {
            writeln!(ef, "{}", serde_json::json!({ "vertices": e }))?;
        }
        let mut rf = std::fs::File::create(dir.join("roles.jsonl"))?;
        for (i, r) in self.roles.iter().enumerate() {
            let (kind, domain) = match r {
                Role::Bond(d) => ("bond", d),
                Role::Domain(d) => ("domain", d),
                Role::Cluster(d) => ("cluster", d),
            };
            writeln!(
                rf,
                "{}",
                serde_json::json!({ "id": i, "role": kind, "domain": domain })
            )?;
        }
        Ok(())
    }
}

/// Merge prepared domains into the hierarchical multi-hypergraph:
/// sub-hyperedges, membership hyperedges (cluster vertex joined to its
/// members), knn hyperedges over cluster vertices, one bond-to-clusters
/// hyperedge per domain, and one hyperedge over all bond vertices.
pub fn assemble(layers: &[DomainLayer]) -> Result<HierarchicalMultiHypergraph> {
    let m = layers.len();
    if m == 0 {
        return Err(Error::invalid_argument("assemble needs at least one domain"));
    }
    let cols = layers[0].embeddings.cols();
    for (a, layer) in layers.iter().enumerate() {
        if layer.embeddings.cols() != cols || layer.clusters.features.cols() != cols {
            return Err(Error::invalid_argument(format!(
                "domain {a}: inconsistent feature width"
            )));
        }
        if layer.embeddings.rows() != layer.sub.hypergraph.num_vertices() {
            return Err(Error::invalid_argument(format!(
                "domain {a}: embeddings do not match sampled vertices"
            )));
        }
        let covered: usize = layer.clusters.membership.iter().map(|s| s.len()).sum();
        if covered != layer.sub.hypergraph.num_vertices() {
            return Err(Error::invalid_argument(format!(
                "domain {a}: clusters do not partition the sampled vertices"
            )));
        }
    }

    let mut sub_offset = vec![0usize; m];
    let mut clu_offset = vec![0usize; m];
    let mut next = m;
    for (a, layer) in layers.iter().enumerate() {
        sub_offset[a] = next;
        next += layer.sub.hypergraph.num_vertices();
        clu_offset[a] = next;
        next += layer.clusters.membership.len();
    }
    let total = next;

    let mut roles = Vec::with_capacity(total);
    roles.extend((0..m).map(Role::Bond));
    let mut features = DenseMatrix::zeros(total, cols);
    for (a, layer) in layers.iter().enumerate() {
        let n_sub = layer.sub.hypergraph.num_vertices();
        let k = layer.clusters.membership.len();
        roles.extend(std::iter::repeat(Role::Domain(a)).take(n_sub));
        roles.extend(std::iter::repeat(Role::Cluster(a)).take(k));
        for v in 0..n_sub {
            features
                .row_mut(sub_offset[a] + v)
                .copy_from_slice(layer.embeddings.row(v));
        }
        for c in 0..k {
            features
                .row_mut(clu_offset[a] + c)
                .copy_from_slice(layer.clusters.features.row(c));
        }
        // bond feature: mean of the domain's cluster rows
        let inv = 1.0 / k as f64;
        let mut bond = vec![0.0; cols];
        for c in 0..k {
            for (b, &v) in bond.iter_mut().zip(layer.clusters.features.row(c)) {
                *b += v * inv;
            }
        }
        features.row_mut(a).copy_from_slice(&bond);
    }

    let mut edges: Vec<Vec<usize>> = Vec::new();
    for (a, layer) in layers.iter().enumerate() {
        for e in layer.sub.hypergraph.hyperedges() {
            edges.push(e.iter().map(|&v| v + sub_offset[a]).collect());
        }
        for (c, members) in layer.clusters.membership.iter().enumerate() {
            let mut e: Vec<usize> = members.iter().map(|&v| v + sub_offset[a]).collect();
            e.push(clu_offset[a] + c);
            edges.push(e);
        }
        for group in &layer.clusters.knn_edges {
            edges.push(group.iter().map(|&c| c + clu_offset[a]).collect());
        }
    }
    for (a, layer) in layers.iter().enumerate() {
        let k = layer.clusters.membership.len();
        let mut e = vec![a];
        e.extend(clu_offset[a]..clu_offset[a] + k);
        edges.push(e);
    }
    edges.push((0..m).collect());

    Ok(HierarchicalMultiHypergraph {
        hypergraph: Hypergraph::new(total, edges)?,
        features,
        roles,
        num_domains: m,
    })
}

/// Non-hierarchical variant (the "cluster count 1" ablation): no cluster
/// vertices; each domain's bond vertex joins all of its sampled vertices in
/// a single hyperedge.
pub fn assemble_flat(
    layers: &[(SubHypergraph, DenseMatrix)],
) -> Result<HierarchicalMultiHypergraph> {
    let m = layers.len();
    if m == 0 {
        return Err(Error::invalid_argument("assemble needs at least one domain"));
    }
    let cols = layers[0].1.cols();
    let mut sub_offset = vec![0usize; m];
    let mut next = m;
    for (a, (sub, emb)) in layers.iter().enumerate() {
        if emb.cols() != cols {
            return Err(Error::invalid_argument(format!(
                "domain {a}: inconsistent feature width"
            )));
        }
        if emb.rows() != sub.hypergraph.num_vertices() {
            return Err(Error::invalid_argument(format!(
                "domain {a}: embeddings do not match sampled vertices"
            )));
        }
        sub_offset[a] = next;
        next += sub.hypergraph.num_vertices();
    }
    let total = next;

    let mut roles = Vec::with_capacity(total);
    roles.extend((0..m).map(Role::Bond));
    let mut features = DenseMatrix::zeros(total, cols);
    for (a, (sub, emb)) in layers.iter().enumerate() {
        let n_sub = sub.hypergraph.num_vertices();
        roles.extend(std::iter::repeat(Role::Domain(a)).take(n_sub));
        for v in 0..n_sub {
            features.row_mut(sub_offset[a] + v).copy_from_slice(emb.row(v));
        }
        let inv = 1.0 / n_sub as f64;
        let mut bond = vec![0.0; cols];
        for v in 0..n_sub {
            for (b, &x) in bond.iter_mut().zip(emb.row(v)) {
                *b += x * inv;
            }
        }
        features.row_mut(a).copy_from_slice(&bond);
    }

    let mut edges: Vec<Vec<usize>> = Vec::new();
    for (a, (sub, _)) in layers.iter().enumerate() {
        for e in sub.hypergraph.hyperedges() {
            edges.push(e.iter().map(|&v| v + sub_offset[a]).collect());
        }
    }
    for (a, (sub, _)) in layers.iter().enumerate() {
        let n_sub = sub.hypergraph.num_vertices();
        let mut e = vec![a];
        e.extend(sub_offset[a]..sub_offset[a] + n_sub);
        edges.push(e);
    }
    edges.push((0..m).collect());

    Ok(HierarchicalMultiHypergraph {
        hypergraph: Hypergraph::new(total, edges)?,
        features,
        roles,
        num_domains: m,
    })
}
