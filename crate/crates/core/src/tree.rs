//! Hierarchical neighborhood representation: label features aggregated from
//! hypergraph neighborhoods, a recursive k-means tree over the labels, and
//! level-wise binary label matrices.
//!
//! Labels are the vertices themselves: predicting a vertex's neighbor set is
//! turned into a ladder of multi-label tasks, coarse clusters first.

use crate::error::{Error, Result};
use crate::hypergraph::Hypergraph;
use crate::matrix::DenseMatrix;
use crate::numerics::{kmeans, l2_normalize_rows, KMEANS_MAX_ITER};
use crate::rng::RngSeed;
use std::collections::BTreeSet;

/// Tree height used throughout.
pub const TREE_HEIGHT: usize = 4;
/// Target labels per coarsest cluster.
pub const LABELS_PER_CLUSTER: usize = 100;

/// Multi-level label hierarchy. Level index 0 is the coarsest; the last
/// level has one label per vertex.
#[derive(Debug, Clone, PartialEq)]
pub struct LabelTree {
    /// cluster count per level; `counts[last] == L`
    pub counts: Vec<usize>,
    /// `parent_of[t][x]` = cluster at level `t-1` containing label `x` of
    /// level `t`; `parent_of[0]` is empty
    pub parent_of: Vec<Vec<usize>>,
    /// per-level label features `Z^(t)`, rows L2-normalized
    pub features: Vec<DenseMatrix>,
    /// per-level binary label matrices `Y^(t)` as sorted id rows, one row
    /// per vertex; empty until [`propagate_labels`] runs
    pub labels: Vec<Vec<Vec<usize>>>,
}

impl LabelTree {
    pub fn height(&self) -> usize {
        self.counts.len()
    }
}

/// Label features: for each vertex-as-label `x`, the normalized sum of raw
/// text features over `x`'s hypergraph neighborhood (including `x`).
/// Labels with empty neighborhoods keep a zero row.
pub fn build_label_features(g: &Hypergraph, psi_feats: &DenseMatrix) -> Result<DenseMatrix> {
    let n = g.num_vertices();
    if psi_feats.rows() != n {
        return Err(Error::invalid_argument(format!(
            "label features need {n} psi rows, got {}",
            psi_feats.rows()
        )));
    }
    let mut z = DenseMatrix::zeros(n, psi_feats.cols());
    for x in 0..n {
        let zrow = z.row_mut(x);
        for u in g.co_members(x) {
            for (acc, &v) in zrow.iter_mut().zip(psi_feats.row(u)) {
                *acc += v;
            }
        }
    }
    Ok(l2_normalize_rows(&z))
}

/// Geometric cluster-count ladder for `l` labels: height
/// [`TREE_HEIGHT`], coarsest level near `l / 100`, repaired to stay
/// strictly increasing and truncated when `l` is too small to fit.
pub fn default_level_counts(l: usize) -> Vec<usize> {
    level_counts_for_height(l, TREE_HEIGHT)
}

/// The same ladder for an arbitrary tree height (`height >= 1`; height 1
/// means no clustering levels at all).
pub fn level_counts_for_height(l: usize, height: usize) -> Vec<usize> {
    let t = height.max(1);
    let b = LABELS_PER_CLUSTER as f64;
    let mut counts = Vec::new();
    for level in 1..t {
        let ideal = l as f64 / b.powf((t - level) as f64 / (t - 1) as f64);
        counts.push((ideal.ceil() as usize).max(2));
    }
    // repair into a strictly increasing ladder below l
    let mut out: Vec<usize> = Vec::new();
    for c in counts {
        let floor = out.last().map_or(2, |&p| p + 1);
        let c = c.max(floor);
        if c >= l {
            break;
        }
        out.push(c);
    }
    out
}

/// Build the tree bottom-up from label features `z` (`L x C`): at each step
/// the current level is k-means-clustered into the next coarser count, and
/// coarser features are the normalized column-group sums.
pub fn build_tree(z: &DenseMatrix, level_counts: &[usize], seed: RngSeed) -> Result<LabelTree> {
    let l = z.rows();
    for w in level_counts.windows(2) {
        if w[0] >= w[1] {
            return Err(Error::invalid_argument(format!(
                "level counts must be strictly increasing, got {level_counts:?}"
            )));
        }
    }
    if let Some(&last) = level_counts.last() {
        if last > l {
            return Err(Error::invalid_argument(format!(
                "coarse level count {last} exceeds label count {l}"
            )));
        }
    }

    let mut counts: Vec<usize> = level_counts.to_vec();
    counts.push(l);
    let height = counts.len();

    let mut features = vec![DenseMatrix::zeros(0, 0); height];
    let mut parent_of = vec![Vec::new(); height];
    features[height - 1] = z.clone();

    for t in (1..height).rev() {
        let (assign, _centroids) = kmeans(
            &features[t],
            counts[t - 1],
            seed.derive(t as u64),
            KMEANS_MAX_ITER,
        )?;
        let mut sums = DenseMatrix::zeros(counts[t - 1], z.cols());
        for (x, &p) in assign.iter().enumerate() {
            let srow = sums.row_mut(p);
            for (s, &v) in srow.iter_mut().zip(features[t].row(x)) {
                *s += v;
            }
        }
        features[t - 1] = l2_normalize_rows(&sums);
        parent_of[t] = assign;
    }

    Ok(LabelTree {
        counts,
        parent_of,
        features,
        labels: Vec::new(),
    })
}

/// Binarize-and-project: map a set of level-`t` label ids through the
/// parent assignment into level-`t-1` cluster ids.
pub fn project_row(row: &[usize], parent_of: &[usize]) -> Vec<usize> {
    let set: BTreeSet<usize> = row.iter().map(|&x| parent_of[x]).collect();
    set.into_iter().collect()
}

/// Fill every level's label matrix from the finest rows (vertex neighbor
/// sets): `Y^(t-1) = bin(Y^(t) P^(t))`, computed sparsely.
pub fn propagate_labels(tree: &mut LabelTree, finest_rows: Vec<Vec<usize>>) -> Result<()> {
    let height = tree.height();
    let l = tree.counts[height - 1];
    for row in &finest_rows {
        if row.iter().any(|&x| x >= l) {
            return Err(Error::invalid_argument("finest label row out of range"));
        }
    }
    let mut labels = vec![Vec::new(); height];
    labels[height - 1] = finest_rows;
    for t in (1..height).rev() {
        labels[t - 1] = labels[t]
            .iter()
            .map(|row| project_row(row, &tree.parent_of[t]))
            .collect();
    }
    tree.labels = labels;
    Ok(())
}

/// Finest-level label rows: per vertex, its hypergraph neighbor set (the
/// vertices it shares a hyperedge with, itself included).
pub fn neighbor_label_rows(g: &Hypergraph) -> Vec<Vec<usize>> {
    (0..g.num_vertices()).map(|v| g.co_members(v)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use rand::Rng;

    fn hg(n: usize, edges: &[&[usize]]) -> Hypergraph {
        Hypergraph::new(n, edges.iter().map(|e| e.to_vec()).collect()).unwrap()
    }

    #[test]
    fn label_features_symmetric_pair() {
        let g = hg(2, &[&[0, 1]]);
        let psi = DenseMatrix::identity(2);
        let z = build_label_features(&g, &psi).unwrap();
        let s = 1.0 / 2.0f64.sqrt();
        assert_abs_diff_eq!(z.get(0, 0), s, epsilon = 1e-12);
        assert_abs_diff_eq!(z.get(0, 1), s, epsilon = 1e-12);
        assert_eq!(z.row(0), z.row(1));
    }

    #[test]
    fn label_features_isolated_vertex_zero_row() {
        let g = hg(3, &[&[0, 1]]);
        let psi = DenseMatrix::identity(3);
        let z = build_label_features(&g, &psi).unwrap();
        assert!(z.row(2).iter().all(|&v| v == 0.0));
    }

    #[test]
    fn label_features_chain_center() {
        let g = hg(3, &[&[0, 1], &[1, 2]]);
        let psi = DenseMatrix::identity(3);
        let z = build_label_features(&g, &psi).unwrap();
        let s = 1.0 / 3.0f64.sqrt();
        for c in 0..3 {
            assert_abs_diff_eq!(z.get(1, c), s, epsilon = 1e-12);
        }
    }

    #[test]
    fn build_tree_square_corners() {
        // two tight pairs on the x axis
        let z = DenseMatrix::from_rows(&[
            vec![0.0, 0.0],
            vec![0.0, 1.0],
            vec![10.0, 0.0],
            vec![10.0, 1.0],
        ])
        .unwrap();
        let tree = build_tree(&z, &[2], RngSeed(3)).unwrap();
        assert_eq!(tree.counts, vec![2, 4]);
        let p = &tree.parent_of[1];
        assert_eq!(p[0], p[1]);
        assert_eq!(p[2], p[3]);
        assert_ne!(p[0], p[2]);
        // coarse features are normalized group sums
        let mut group = vec![0.0, 0.0];
        for x in [0, 1] {
            group[0] += z.get(x, 0);
            group[1] += z.get(x, 1);
        }
        let norm = (group[0] * group[0] + group[1] * group[1]).sqrt();
        let f = tree.features[0].row(p[0]);
        assert_abs_diff_eq!(f[0], group[0] / norm, epsilon = 1e-12);
        assert_abs_diff_eq!(f[1], group[1] / norm, epsilon = 1e-12);
    }

    #[test]
    fn build_tree_degenerate_full_count_is_a_permutation() {
        let z = l2_normalize_rows(
            &DenseMatrix::from_rows(&[
                vec![1.0, 0.0],
                vec![0.0, 1.0],
                vec![1.0, 1.0],
            ])
            .unwrap(),
        );
        let tree = build_tree(&z, &[3], RngSeed(0)).unwrap();
        let p = &tree.parent_of[1];
        let mut seen = vec![false; 3];
        for &c in p {
            assert!(!seen[c]);
            seen[c] = true;
        }
        // coarse features equal the originals up to the permutation
        for (x, &c) in p.iter().enumerate() {
            for j in 0..2 {
                assert_abs_diff_eq!(tree.features[0].get(c, j), z.get(x, j), epsilon = 1e-12);
            }
        }
    }

    #[test]
    fn build_tree_identical_rows_co_clustered() {
        let z = DenseMatrix::from_rows(&[
            vec![1.0, 0.0],
            vec![1.0, 0.0],
            vec![0.0, 1.0],
            vec![5.0, 5.0],
            vec![-3.0, 2.0],
            vec![4.0, -1.0],
        ])
        .unwrap();
        for seed in 0..10u64 {
            for counts in [&[2usize][..], &[3], &[2, 4]] {
                let tree = build_tree(&z, counts, RngSeed(seed)).unwrap();
                for t in 1..tree.height() {
                    // rows 0 and 1 are identical at the finest level; being
                    // co-clustered once keeps them together above
                    let p = &tree.parent_of[t];
                    if t == tree.height() - 1 {
                        assert_eq!(p[0], p[1], "seed {seed}, counts {counts:?}");
                    }
                }
            }
        }
    }

    #[test]
    fn build_tree_rejects_non_increasing_counts() {
        let z = DenseMatrix::identity(6);
        assert!(build_tree(&z, &[3, 3], RngSeed(0)).is_err());
        assert!(build_tree(&z, &[4, 2], RngSeed(0)).is_err());
        assert!(build_tree(&z, &[2, 7], RngSeed(0)).is_err());
    }

    #[test]
    fn project_row_binarizes() {
        // Y = ((0,2),(1,0)) with identity parents binarizes to ((0,1),(1,0)):
        // row 0 has copies of label 1, row 1 has label 0
        let parents = vec![0, 1];
        assert_eq!(project_row(&[1, 1], &parents), vec![1]);
        assert_eq!(project_row(&[0], &parents), vec![0]);
        // merging parent collapses everything to cluster 0
        let merge = vec![0, 0, 0];
        assert_eq!(project_row(&[0, 2], &merge), vec![0]);
    }

    #[test]
    fn propagate_labels_hand_example() {
        // 4 labels, parents {0,1}->0, {2,3}->1; row (1,0,0,1) -> (1,1)
        let z = DenseMatrix::identity(4);
        let mut tree = build_tree(&z, &[2], RngSeed(1)).unwrap();
        tree.parent_of[1] = vec![0, 0, 1, 1]; // pin the assignment for the example
        propagate_labels(&mut tree, vec![vec![0, 3], vec![1], vec![], vec![2, 3]]).unwrap();
        assert_eq!(tree.labels[0][0], vec![0, 1]);
        assert_eq!(tree.labels[0][1], vec![0]);
        assert!(tree.labels[0][2].is_empty());
        assert_eq!(tree.labels[0][3], vec![1]);
    }

    #[test]
    fn tree_consistency_and_monotonicity_on_random_hypergraphs() {
        for seed in 0..10u64 {
            let mut rng = RngSeed(seed).rng();
            let n = rng.random_range(8..40);
            let m = rng.random_range(4..20);
            let edges: Vec<Vec<usize>> = (0..m)
                .map(|_| {
                    let size = rng.random_range(2..=4.min(n));
                    rand::seq::index::sample(&mut rng, n, size).into_vec()
                })
                .collect();
            let g = Hypergraph::new(n, edges).unwrap();
            let psi = {
                let mut x = DenseMatrix::zeros(n, 6);
                for v in x.values_mut() {
                    *v = rng.random::<f64>();
                }
                x
            };
            let z = build_label_features(&g, &psi).unwrap();
            let counts = default_level_counts(n);
            let mut tree = build_tree(&z, &counts, RngSeed(seed + 100)).unwrap();
            propagate_labels(&mut tree, neighbor_label_rows(&g)).unwrap();

            for t in 1..tree.height() {
                for v in 0..n {
                    // consistency: bin(Y^(t) P^(t)) == Y^(t-1) exactly
                    let expect = project_row(&tree.labels[t][v], &tree.parent_of[t]);
                    assert_eq!(expect, tree.labels[t - 1][v]);
                    // coarsening never adds distinct associations
                    assert!(tree.labels[t - 1][v].len() <= tree.labels[t][v].len());
                }
            }

            // vertices with equal neighbor vectors share rows at every level
            for a in 0..n {
                for b in (a + 1)..n {
                    let na = g.neighbor_vector(a).unwrap();
                    let nb = g.neighbor_vector(b).unwrap();
                    if na.bits == nb.bits {
                        for t in 0..tree.height() {
                            assert_eq!(tree.labels[t][a], tree.labels[t][b]);
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn tree_deterministic_under_seed() {
        let z = {
            let mut rng = RngSeed(9).rng();
            let rows: Vec<Vec<f64>> = (0..30)
                .map(|_| (0..4).map(|_| rng.random::<f64>()).collect())
                .collect();
            DenseMatrix::from_rows(&rows).unwrap()
        };
        let a = build_tree(&z, &[3, 9], RngSeed(5)).unwrap();
        let b = build_tree(&z, &[3, 9], RngSeed(5)).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn default_level_counts_shapes() {
        assert_eq!(default_level_counts(400), vec![4, 19, 87]);
        let small = default_level_counts(20);
        assert!(small.windows(2).all(|w| w[0] < w[1]));
        assert!(small.last().map_or(true, |&l| l < 20));
        assert!(default_level_counts(2).is_empty());
    }
}
