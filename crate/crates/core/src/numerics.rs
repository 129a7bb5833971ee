//! Deterministic numerical primitives: seeded k-means, k-nearest-neighbor
//! groups, truncated SVD, and row normalization.
//!
//! Everything here is pure given its inputs and seed. Distance loops run in
//! index order so results are bit-identical across runs and platforms.

use crate::error::{Error, Result};
use crate::matrix::{squared_distance, DenseMatrix};
use crate::rng::RngSeed;
use rand::Rng;

/// k-means with k-means++ seeding and Lloyd iterations.
///
/// Empty clusters are repaired by moving the point farthest from its current
/// centroid into the empty cluster, so exactly `k` non-empty clusters come
/// back. Iteration stops when assignments stop changing or after `max_iter`
/// rounds; final centroids are exact means of their members.
pub fn kmeans(
    x: &DenseMatrix,
    k: usize,
    seed: RngSeed,
    max_iter: usize,
) -> Result<(Vec<usize>, DenseMatrix)> {
    let (assignments, centroids, _trace) = kmeans_with_trace(x, k, seed, max_iter)?;
    Ok((assignments, centroids))
}

/// Default Lloyd iteration cap.
pub const KMEANS_MAX_ITER: usize = 50;

/// As [`kmeans`], additionally returning the within-cluster SSE after each
/// assignment step.
pub(crate) fn kmeans_with_trace(
    x: &DenseMatrix,
    k: usize,
    seed: RngSeed,
    max_iter: usize,
) -> Result<(Vec<usize>, DenseMatrix, Vec<f64>)> {
    let n = x.rows();
    let d = x.cols();
    if k == 0 || max_iter == 0 {
        return Err(Error::invalid_argument("kmeans requires k >= 1 and max_iter >= 1"));
    }
    if k > n {
        return Err(Error::invalid_argument(format!(
            "kmeans k={k} exceeds row count {n}"
        )));
    }
    if !x.is_finite() {
        return Err(Error::invalid_argument("kmeans input contains non-finite entries"));
    }

    let mut rng = seed.rng();
    let mut centroids = plus_plus_init(x, k, &mut rng);
    let mut assignments = vec![usize::MAX; n];
    let mut trace = Vec::new();

    for _ in 0..max_iter {
        let mut changed = false;
        let mut sse = 0.0;
        for i in 0..n {
            let (best, dist) = nearest_centroid(x.row(i), &centroids);
            sse += dist;
            if assignments[i] != best {
                assignments[i] = best;
                changed = true;
            }
        }
        trace.push(sse);

        repair_empty_clusters(x, k, &centroids, &mut assignments);
        centroids = cluster_means(x, k, &assignments);

        if !changed {
            break;
        }
    }

    // One final pass so the returned assignment is a fixed point of the
    // returned centroids (repair may have shifted means).
    let mut stable = true;
    for i in 0..n {
        let (best, _) = nearest_centroid(x.row(i), &centroids);
        if assignments[i] != best {
            stable = false;
        }
    }
    if !stable {
        // Rare post-repair drift: re-run one assignment + mean step, which
        // cannot create empty clusters worse than repair handles.
        for i in 0..n {
            let (best, _) = nearest_centroid(x.row(i), &centroids);
            assignments[i] = best;
        }
        repair_empty_clusters(x, k, &centroids, &mut assignments);
        centroids = cluster_means(x, k, &assignments);
    }

    debug_assert_eq!(centroids.rows(), k);
    debug_assert_eq!(centroids.cols(), d);
    Ok((assignments, centroids, trace))
}

fn plus_plus_init(x: &DenseMatrix, k: usize, rng: &mut impl Rng) -> DenseMatrix {
    let n = x.rows();
    let mut chosen = Vec::with_capacity(k);
    chosen.push(rng.random_range(0..n));
    let mut dist2: Vec<f64> = (0..n)
        .map(|i| squared_distance(x.row(i), x.row(chosen[0])))
        .collect();
    while chosen.len() < k {
        let total: f64 = dist2.iter().sum();
        let next = if total > 0.0 {
            let mut u = rng.random::<f64>() * total;
            let mut pick = n - 1;
            for (i, &d) in dist2.iter().enumerate() {
                if u < d {
                    pick = i;
                    break;
                }
                u -= d;
            }
            pick
        } else {
            // All remaining mass at zero distance (duplicate points).
            rng.random_range(0..n)
        };
        chosen.push(next);
        for i in 0..n {
            let d = squared_distance(x.row(i), x.row(next));
            if d < dist2[i] {
                dist2[i] = d;
            }
        }
    }
    let mut centroids = DenseMatrix::zeros(k, x.cols());
    for (j, &i) in chosen.iter().enumerate() {
        centroids.row_mut(j).copy_from_slice(x.row(i));
    }
    centroids
}

fn nearest_centroid(row: &[f64], centroids: &DenseMatrix) -> (usize, f64) {
    let mut best = 0;
    let mut best_d = f64::INFINITY;
    for j in 0..centroids.rows() {
        let d = squared_distance(row, centroids.row(j));
        if d < best_d {
            best_d = d;
            best = j;
        }
    }
    (best, best_d)
}

fn repair_empty_clusters(
    x: &DenseMatrix,
    k: usize,
    centroids: &DenseMatrix,
    assignments: &mut [usize],
) {
    let n = assignments.len();
    let mut sizes = vec![0usize; k];
    for &a in assignments.iter() {
        sizes[a] += 1;
    }
    for j in 0..k {
        if sizes[j] > 0 {
            continue;
        }
        let mut far_i = usize::MAX;
        let mut far_d = -1.0;
        for i in 0..n {
            if sizes[assignments[i]] <= 1 {
                continue;
            }
            let d = squared_distance(x.row(i), centroids.row(assignments[i]));
            if d > far_d {
                far_d = d;
                far_i = i;
            }
        }
        if far_i != usize::MAX {
            sizes[assignments[far_i]] -= 1;
            assignments[far_i] = j;
            sizes[j] = 1;
        }
    }
}

fn cluster_means(x: &DenseMatrix, k: usize, assignments: &[usize]) -> DenseMatrix {
    let d = x.cols();
    let mut sums = DenseMatrix::zeros(k, d);
    let mut counts = vec![0usize; k];
    for (i, &a) in assignments.iter().enumerate() {
        counts[a] += 1;
        let row = x.row(i);
        let srow = sums.row_mut(a);
        for (s, &v) in srow.iter_mut().zip(row) {
            *s += v;
        }
    }
    for j in 0..k {
        if counts[j] > 0 {
            let inv = 1.0 / counts[j] as f64;
            for v in sums.row_mut(j) {
                *v *= inv;
            }
        }
    }
    sums
}

/// For each row `i`, the set `{i} ∪ {k_c nearest rows to i}` under Euclidean
/// distance, ties broken toward the lower index. Returned sets are sorted
/// ascending.
pub fn knn_groups(x: &DenseMatrix, k_c: usize) -> Result<Vec<Vec<usize>>> {
    let n = x.rows();
    if k_c >= n {
        return Err(Error::invalid_argument(format!(
            "knn_groups k_c={k_c} must be smaller than row count {n}"
        )));
    }
    let mut groups = Vec::with_capacity(n);
    for i in 0..n {
        let mut dists: Vec<(f64, usize)> = (0..n)
            .filter(|&j| j != i)
            .map(|j| (squared_distance(x.row(i), x.row(j)), j))
            .collect();
        dists.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap().then(a.1.cmp(&b.1)));
        let mut group: Vec<usize> = dists[..k_c].iter().map(|&(_, j)| j).collect();
        group.push(i);
        group.sort_unstable();
        groups.push(group);
    }
    Ok(groups)
}

/// Rank-`r` truncated SVD scores `U_r Σ_r` (left singular vectors scaled by
/// singular values, columns ordered by descending singular value).
///
/// Small column counts go through an exact eigendecomposition of the Gram
/// matrix; wide inputs fall back to seeded randomized subspace iteration.
pub fn truncated_svd(x: &DenseMatrix, r: usize) -> Result<DenseMatrix> {
    truncated_svd_factors(x, r).map(|(scores, _)| scores)
}

/// As [`truncated_svd`], also returning the right factor `V_r`
/// (`cols x r`, orthonormal columns) so `U_r Σ_r V_rᵀ` can be formed.
pub fn truncated_svd_factors(x: &DenseMatrix, r: usize) -> Result<(DenseMatrix, DenseMatrix)> {
    if r > x.rows().min(x.cols()) {
        return Err(Error::invalid_argument(format!(
            "truncated_svd rank {} exceeds min(rows, cols) = {}",
            r,
            x.rows().min(x.cols())
        )));
    }
    if x.cols() <= 1024 {
        Ok(truncated_svd_gram(x, r))
    } else {
        Ok(truncated_svd_randomized(x, r, RngSeed(0x5fd1_e2a3_c4b5_9687)))
    }
}

pub(crate) fn truncated_svd_gram(x: &DenseMatrix, r: usize) -> (DenseMatrix, DenseMatrix) {
    let gram = x.transpose_matmul(x);
    let (_, vectors) = symmetric_eigen(&gram);
    // V_r = first r eigenvector columns; scores = X V_r
    let vr = take_columns(&vectors, r);
    (x.matmul(&vr), vr)
}

pub(crate) fn truncated_svd_randomized(
    x: &DenseMatrix,
    r: usize,
    seed: RngSeed,
) -> (DenseMatrix, DenseMatrix) {
    let l = (r + 8).min(x.cols()).min(x.rows());
    let mut rng = seed.rng();
    let mut omega = DenseMatrix::zeros(x.cols(), l);
    for v in omega.values_mut() {
        *v = gaussian(&mut rng);
    }
    let mut q = orthonormalize_columns(x.matmul(&omega));
    for _ in 0..5 {
        let z = orthonormalize_columns(x.transpose_matmul(&q));
        q = orthonormalize_columns(x.matmul(&z));
    }
    let b = q.transpose_matmul(x); // l x cols
    let small = b.matmul_transpose(&b); // l x l
    let (vals, vecs) = symmetric_eigen(&small);
    let u_b = take_columns(&vecs, r); // l x r left vectors of B
    let mut scaled = u_b.clone();
    for row in 0..scaled.rows() {
        for c in 0..r {
            let sigma = vals[c].max(0.0).sqrt();
            let v = scaled.get(row, c) * sigma;
            scaled.set(row, c, v);
        }
    }
    // V_r = Bᵀ U_B Σ^{ -1 }
    let mut v_r = b.transpose_matmul(&u_b);
    for row in 0..v_r.rows() {
        for c in 0..r {
            let sigma = vals[c].max(0.0).sqrt();
            let v = if sigma > 1e-12 {
                v_r.get(row, c) / sigma
            } else {
                0.0
            };
            v_r.set(row, c, v);
        }
    }
    (q.matmul(&scaled), v_r)
}

fn gaussian(rng: &mut impl Rng) -> f64 {
    // Box-Muller; two uniform draws per call keeps the stream position fixed.
    let u1: f64 = rng.random::<f64>().max(1e-300);
    let u2: f64 = rng.random::<f64>();
    (-2.0 * u1.ln()).sqrt() * (2.0 * std::f64::consts::PI * u2).cos()
}

fn take_columns(m: &DenseMatrix, r: usize) -> DenseMatrix {
    let mut out = DenseMatrix::zeros(m.rows(), r);
    for i in 0..m.rows() {
        for j in 0..r {
            out.set(i, j, m.get(i, j));
        }
    }
    out
}

fn orthonormalize_columns(mut m: DenseMatrix) -> DenseMatrix {
    // Modified Gram-Schmidt over columns.
    let rows = m.rows();
    let cols = m.cols();
    for j in 0..cols {
        for i in 0..j {
            let mut proj = 0.0;
            for row in 0..rows {
                proj += m.get(row, i) * m.get(row, j);
            }
            for row in 0..rows {
                let v = m.get(row, j) - proj * m.get(row, i);
                m.set(row, j, v);
            }
        }
        let mut norm = 0.0;
        for row in 0..rows {
            norm += m.get(row, j) * m.get(row, j);
        }
        norm = norm.sqrt();
        if norm > 1e-12 {
            for row in 0..rows {
                let v = m.get(row, j) / norm;
                m.set(row, j, v);
            }
        } else {
            for row in 0..rows {
                m.set(row, j, 0.0);
            }
        }
    }
    m
}

/// Symmetric eigendecomposition by cyclic Jacobi rotations. Returns
/// eigenvalues in descending order and the matching eigenvectors as columns.
pub(crate) fn symmetric_eigen(a: &DenseMatrix) -> (Vec<f64>, DenseMatrix) {
    assert_eq!(a.rows(), a.cols(), "symmetric_eigen needs a square matrix");
    let n = a.rows();
    let mut m = a.clone();
    let mut v = DenseMatrix::identity(n);
    let scale = a.frobenius_norm().max(1e-300);

    for _sweep in 0..100 {
        let mut off = 0.0;
        for p in 0..n {
            for q in (p + 1)..n {
                off += m.get(p, q).powi(2);
            }
        }
        if off.sqrt() <= 1e-14 * scale {
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = m.get(p, q);
                if apq.abs() <= 1e-300 {
                    continue;
                }
                let app = m.get(p, p);
                let aqq = m.get(q, q);
                let theta = (aqq - app) / (2.0 * apq);
                let t = if theta >= 0.0 {
                    1.0 / (theta + (theta * theta + 1.0).sqrt())
                } else {
                    -1.0 / (-theta + (theta * theta + 1.0).sqrt())
                };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for i in 0..n {
                    let mip = m.get(i, p);
                    let miq = m.get(i, q);
                    m.set(i, p, c * mip - s * miq);
                    m.set(i, q, s * mip + c * miq);
                }
                for i in 0..n {
                    let mpi = m.get(p, i);
                    let mqi = m.get(q, i);
                    m.set(p, i, c * mpi - s * mqi);
                    m.set(q, i, s * mpi + c * mqi);
                }
                for i in 0..n {
                    let vip = v.get(i, p);
                    let viq = v.get(i, q);
                    v.set(i, p, c * vip - s * viq);
                    v.set(i, q, s * vip + c * viq);
                }
            }
        }
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| m.get(j, j).partial_cmp(&m.get(i, i)).unwrap());
    let values: Vec<f64> = order.iter().map(|&i| m.get(i, i)).collect();
    let mut vectors = DenseMatrix::zeros(n, n);
    for (new_c, &old_c) in order.iter().enumerate() {
        for row in 0..n {
            vectors.set(row, new_c, v.get(row, old_c));
        }
    }
    (values, vectors)
}

/// Scale every nonzero row to unit Euclidean norm; all-zero rows pass
/// through unchanged.
pub fn l2_normalize_rows(x: &DenseMatrix) -> DenseMatrix {
    let mut out = x.clone();
    for i in 0..out.rows() {
        let row = out.row_mut(i);
        let norm = row.iter().map(|v| v * v).sum::<f64>().sqrt();
        if norm > 0.0 {
            for v in row {
                *v /= norm;
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    fn mat(rows: &[&[f64]]) -> DenseMatrix {
        DenseMatrix::from_rows(&rows.iter().map(|r| r.to_vec()).collect::<Vec<_>>()).unwrap()
    }

    fn sse(x: &DenseMatrix, assignments: &[usize], centroids: &DenseMatrix) -> f64 {
        assignments
            .iter()
            .enumerate()
            .map(|(i, &a)| squared_distance(x.row(i), centroids.row(a)))
            .sum()
    }

    /// Brute-force optimum over all assignments of n points into k clusters,
    /// centroids at cluster means.
    fn brute_force_min_sse(x: &DenseMatrix, k: usize) -> f64 {
        let n = x.rows();
        let mut best = f64::INFINITY;
        let total = k.pow(n as u32);
        'outer: for code in 0..total {
            let mut assign = vec![0usize; n];
            let mut c = code;
            for a in assign.iter_mut() {
                *a = c % k;
                c /= k;
            }
            let mut seen = vec![false; k];
            for &a in &assign {
                seen[a] = true;
            }
            if seen.iter().any(|s| !s) {
                continue 'outer;
            }
            let centroids = cluster_means(x, k, &assign);
            best = best.min(sse(x, &assign, &centroids));
        }
        best
    }

    #[test]
    fn kmeans_each_point_its_own_cluster() {
        let x = mat(&[&[0.0, 0.0], &[0.0, 1.0], &[1.0, 0.0], &[1.0, 1.0]]);
        let (assign, centroids) = kmeans(&x, 4, RngSeed(1), 50).unwrap();
        let mut seen = vec![false; 4];
        for (i, &a) in assign.iter().enumerate() {
            assert!(!seen[a], "cluster reused");
            seen[a] = true;
            assert_eq!(centroids.row(a), x.row(i));
        }
    }

    #[test]
    fn kmeans_two_well_separated_pairs() {
        let x = mat(&[&[0.0, 0.0], &[0.0, 1.0], &[10.0, 0.0], &[10.0, 1.0]]);
        let (assign, centroids) = kmeans(&x, 2, RngSeed(7), 50).unwrap();
        assert_eq!(assign[0], assign[1]);
        assert_eq!(assign[2], assign[3]);
        assert_ne!(assign[0], assign[2]);
        let c_left = centroids.row(assign[0]);
        let c_right = centroids.row(assign[2]);
        assert_abs_diff_eq!(c_left[0], 0.0, epsilon = 1e-12);
        assert_abs_diff_eq!(c_left[1], 0.5, epsilon = 1e-12);
        assert_abs_diff_eq!(c_right[0], 10.0, epsilon = 1e-12);
        assert_abs_diff_eq!(c_right[1], 0.5, epsilon = 1e-12);
        // exhaustive oracle: result attains the global SSE optimum
        let got = sse(&x, &assign, &centroids);
        assert_abs_diff_eq!(got, brute_force_min_sse(&x, 2), epsilon = 1e-12);
    }

    #[test]
    fn kmeans_single_cluster_is_column_mean() {
        let x = mat(&[&[1.0, 2.0], &[3.0, 4.0], &[5.0, 9.0]]);
        let (assign, centroids) = kmeans(&x, 1, RngSeed(0), 50).unwrap();
        assert!(assign.iter().all(|&a| a == 0));
        assert_abs_diff_eq!(centroids.get(0, 0), 3.0, epsilon = 1e-12);
        assert_abs_diff_eq!(centroids.get(0, 1), 5.0, epsilon = 1e-12);
    }

    #[test]
    fn kmeans_rejects_bad_arguments() {
        let x = mat(&[&[0.0], &[1.0]]);
        assert!(matches!(
            kmeans(&x, 3, RngSeed(0), 50),
            Err(Error::InvalidArgument(_))
        ));
        let mut bad = x.clone();
        bad.values_mut()[0] = f64::NAN;
        assert!(matches!(
            kmeans(&bad, 1, RngSeed(0), 50),
            Err(Error::InvalidArgument(_))
        ));
    }

    #[test]
    fn kmeans_objective_non_increasing_and_fixed_point() {
        let mut rng = RngSeed(11).rng();
        let rows: Vec<Vec<f64>> = (0..40)
            .map(|_| (0..3).map(|_| rng.random::<f64>() * 4.0).collect())
            .collect();
        let x = DenseMatrix::from_rows(&rows).unwrap();
        let (assign, centroids, trace) = kmeans_with_trace(&x, 5, RngSeed(3), 50).unwrap();
        for w in trace.windows(2) {
            assert!(w[1] <= w[0] + 1e-9, "objective increased: {:?}", w);
        }
        // fixed point: reassigning against returned centroids changes nothing
        for i in 0..x.rows() {
            let (best, _) = nearest_centroid(x.row(i), &centroids);
            assert_eq!(best, assign[i]);
        }
    }

    #[test]
    fn kmeans_no_empty_cluster_on_duplicates() {
        let x = mat(&[&[1.0, 1.0], &[1.0, 1.0], &[1.0, 1.0], &[1.0, 1.0]]);
        let (assign, _c) = kmeans(&x, 3, RngSeed(5), 50).unwrap();
        let mut sizes = vec![0usize; 3];
        for &a in &assign {
            sizes[a] += 1;
        }
        assert!(sizes.iter().all(|&s| s > 0), "empty cluster: {sizes:?}");
    }

    #[test]
    fn kmeans_deterministic() {
        let mut rng = RngSeed(20).rng();
        let rows: Vec<Vec<f64>> = (0..30)
            .map(|_| (0..4).map(|_| rng.random::<f64>()).collect())
            .collect();
        let x = DenseMatrix::from_rows(&rows).unwrap();
        let a = kmeans(&x, 4, RngSeed(9), 50).unwrap();
        let b = kmeans(&x, 4, RngSeed(9), 50).unwrap();
        assert_eq!(a.0, b.0);
        assert_eq!(a.1.values(), b.1.values());
    }

    #[test]
    fn knn_groups_collinear_points() {
        let x = mat(&[&[0.0], &[1.0], &[5.0]]);
        let groups = knn_groups(&x, 1).unwrap();
        assert_eq!(groups, vec![vec![0, 1], vec![0, 1], vec![1, 2]]);
    }

    #[test]
    fn knn_groups_full_when_kc_is_n_minus_1() {
        let x = mat(&[&[0.0], &[1.0], &[5.0], &[9.0]]);
        let groups = knn_groups(&x, 3).unwrap();
        for g in groups {
            assert_eq!(g, vec![0, 1, 2, 3]);
        }
    }

    #[test]
    fn knn_groups_tie_breaks_to_lower_index() {
        let x = mat(&[&[0.0], &[0.0], &[100.0]]);
        let groups = knn_groups(&x, 1).unwrap();
        assert_eq!(groups[2], vec![0, 2]);
    }

    #[test]
    fn knn_groups_rejects_kc_of_row_count() {
        let x = mat(&[&[0.0], &[1.0]]);
        assert!(knn_groups(&x, 2).is_err());
    }

    #[test]
    fn knn_groups_brute_force_oracle() {
        let mut rng = RngSeed(77).rng();
        let rows: Vec<Vec<f64>> = (0..12)
            .map(|_| (0..3).map(|_| rng.random::<f64>()).collect())
            .collect();
        let x = DenseMatrix::from_rows(&rows).unwrap();
        let groups = knn_groups(&x, 4).unwrap();
        for (i, g) in groups.iter().enumerate() {
            assert_eq!(g.len(), 5);
            assert!(g.contains(&i));
            // every excluded j must be at least as far as the farthest included
            let far = g
                .iter()
                .filter(|&&j| j != i)
                .map(|&j| squared_distance(x.row(i), x.row(j)))
                .fold(0.0, f64::max);
            for j in 0..x.rows() {
                if j != i && !g.contains(&j) {
                    assert!(squared_distance(x.row(i), x.row(j)) >= far - 1e-12);
                }
            }
        }
    }

    /// Independent oracle: one-sided Jacobi SVD computing all singular values
    /// directly on X (never touches the Gram-eigen code path).
    fn jacobi_singular_values(x: &DenseMatrix) -> Vec<f64> {
        let mut a = x.clone();
        let (rows, cols) = (a.rows(), a.cols());
        for _ in 0..60 {
            let mut rotated = false;
            for p in 0..cols {
                for q in (p + 1)..cols {
                    let mut app = 0.0;
                    let mut aqq = 0.0;
                    let mut apq = 0.0;
                    for r in 0..rows {
                        app += a.get(r, p) * a.get(r, p);
                        aqq += a.get(r, q) * a.get(r, q);
                        apq += a.get(r, p) * a.get(r, q);
                    }
                    if apq.abs() <= 1e-15 * (app * aqq).sqrt().max(1e-300) {
                        continue;
                    }
                    rotated = true;
                    let theta = (aqq - app) / (2.0 * apq);
                    let t = if theta >= 0.0 {
                        1.0 / (theta + (theta * theta + 1.0).sqrt())
                    } else {
                        -1.0 / (-theta + (theta * theta + 1.0).sqrt())
                    };
                    let c = 1.0 / (t * t + 1.0).sqrt();
                    let s = t * c;
                    for r in 0..rows {
                        let arp = a.get(r, p);
                        let arq = a.get(r, q);
                        a.set(r, p, c * arp - s * arq);
                        a.set(r, q, s * arp + c * arq);
                    }
                }
            }
            if !rotated {
                break;
            }
        }
        let mut sigmas: Vec<f64> = (0..cols)
            .map(|c| (0..rows).map(|r| a.get(r, c).powi(2)).sum::<f64>().sqrt())
            .collect();
        sigmas.sort_by(|x, y| y.partial_cmp(x).unwrap());
        sigmas
    }

    fn reconstruction_error(x: &DenseMatrix, scores: &DenseMatrix, v_r: &DenseMatrix) -> f64 {
        let recon = scores.matmul(&v_r.transpose());
        let mut diff = x.clone();
        for (d, &r) in diff.values_mut().iter_mut().zip(recon.values()) {
            *d -= r;
        }
        diff.frobenius_norm()
    }

    #[test]
    fn svd_rank_one_is_lossless() {
        let u = [1.0, 2.0, -1.0, 0.5];
        let v = [3.0, -1.0, 2.0];
        let rows: Vec<Vec<f64>> = u.iter().map(|a| v.iter().map(|b| a * b).collect()).collect();
        let x = DenseMatrix::from_rows(&rows).unwrap();
        let (scores, v_r) = truncated_svd_factors(&x, 1).unwrap();
        assert!(reconstruction_error(&x, &scores, &v_r) < 1e-9);
    }

    #[test]
    fn svd_identity_has_unit_singular_values() {
        let x = DenseMatrix::identity(3);
        let (scores, v_r) = truncated_svd_factors(&x, 3).unwrap();
        for c in 0..3 {
            let sigma = (0..3).map(|r| scores.get(r, c).powi(2)).sum::<f64>().sqrt();
            assert_abs_diff_eq!(sigma, 1.0, epsilon = 1e-9);
        }
        assert!(reconstruction_error(&x, &scores, &v_r) < 1e-9);
    }

    #[test]
    fn svd_matches_independent_jacobi_oracle() {
        let mut rng = RngSeed(13).rng();
        let rows: Vec<Vec<f64>> = (0..20)
            .map(|_| (0..10).map(|_| rng.random::<f64>() * 2.0 - 1.0).collect())
            .collect();
        let x = DenseMatrix::from_rows(&rows).unwrap();

        let (full, full_v) = truncated_svd_factors(&x, 10).unwrap();
        assert!(reconstruction_error(&x, &full, &full_v) < 1e-8);

        let (scores, v_r) = truncated_svd_factors(&x, 5).unwrap();
        let sigmas = jacobi_singular_values(&x);
        let expected_err: f64 = sigmas[5..].iter().map(|s| s * s).sum::<f64>().sqrt();
        assert_abs_diff_eq!(
            reconstruction_error(&x, &scores, &v_r),
            expected_err,
            epsilon = 1e-8
        );
        // top-r singular values agree with the oracle
        for c in 0..5 {
            let sigma = (0..x.rows()).map(|r| scores.get(r, c).powi(2)).sum::<f64>().sqrt();
            assert_abs_diff_eq!(sigma, sigmas[c], epsilon = 1e-8);
        }
    }

    #[test]
    fn svd_randomized_path_agrees_with_gram_path() {
        let mut rng = RngSeed(17).rng();
        let rows: Vec<Vec<f64>> = (0..30)
            .map(|_| (0..12).map(|_| rng.random::<f64>()).collect())
            .collect();
        let x = DenseMatrix::from_rows(&rows).unwrap();
        let (a, _) = truncated_svd_gram(&x, 4);
        let (b, bv) = truncated_svd_randomized(&x, 4, RngSeed(99));
        // compare spectra, not signs
        for c in 0..4 {
            let sa = (0..30).map(|r| a.get(r, c).powi(2)).sum::<f64>().sqrt();
            let sb = (0..30).map(|r| b.get(r, c).powi(2)).sum::<f64>().sqrt();
            assert_abs_diff_eq!(sa, sb, epsilon = 1e-6);
        }
        // randomized path also reconstructs to the oracle error
        let sigmas = jacobi_singular_values(&x);
        let expected_err: f64 = sigmas[4..].iter().map(|s| s * s).sum::<f64>().sqrt();
        assert_abs_diff_eq!(
            reconstruction_error(&x, &b, &bv),
            expected_err,
            epsilon = 1e-6
        );
    }

    #[test]
    fn svd_rejects_excess_rank() {
        let x = DenseMatrix::zeros(3, 2);
        assert!(truncated_svd(&x, 3).is_err());
    }

    #[test]
    fn l2_normalize_examples() {
        let x = mat(&[&[3.0, 4.0], &[0.0, 0.0], &[1.0, 0.0]]);
        let out = l2_normalize_rows(&x);
        assert_eq!(out.row(0), &[0.6, 0.8]);
        assert_eq!(out.row(1), &[0.0, 0.0]);
        assert_eq!(out.row(2), &[1.0, 0.0]);
    }

    proptest! {
        #[test]
        fn l2_normalize_idempotent(values in proptest::collection::vec(-100.0f64..100.0, 12)) {
            let x = DenseMatrix::from_vec(4, 3, values).unwrap();
            let once = l2_normalize_rows(&x);
            let twice = l2_normalize_rows(&once);
            prop_assert!(once.max_abs_diff(&twice) < 1e-12);
            for i in 0..once.rows() {
                let norm = once.row(i).iter().map(|v| v * v).sum::<f64>().sqrt();
                prop_assert!(norm < 1e-12 || (norm - 1.0).abs() < 1e-9);
            }
        }

        #[test]
        fn knn_group_size_and_membership(seed in 0u64..500, k_c in 1usize..5) {
            let mut rng = RngSeed(seed).rng();
            let rows: Vec<Vec<f64>> = (0..8).map(|_| vec![rng.random::<f64>(), rng.random::<f64>()]).collect();
            let x = DenseMatrix::from_rows(&rows).unwrap();
            let groups = knn_groups(&x, k_c).unwrap();
            for (i, g) in groups.iter().enumerate() {
                prop_assert_eq!(g.len(), k_c + 1);
                prop_assert!(g.contains(&i));
            }
        }
    }
}
