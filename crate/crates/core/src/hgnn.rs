//! Two-layer hypergraph network with exact manual backpropagation, the
//! classification head used downstream, and the Adam update rule.
//!
//! Layer 0 applies propagation, a linear map, and ReLU; layer 1 applies
//! propagation and a linear map with no activation, so heads compose
//! cleanly on top. Passing no hypergraph turns propagation into the
//! identity, which is the structure-free MLP baseline.

use crate::error::{Error, Result};
use crate::hypergraph::Hypergraph;
use crate::matrix::DenseMatrix;
use crate::rng::RngSeed;
use rand::Rng;

/// Backbone hidden width.
pub const HIDDEN_DIM: usize = 128;

/// Backbone weights plus the optional classifier head.
#[derive(Debug, Clone, PartialEq)]
pub struct HgnnParams {
    /// input x hidden
    pub theta0: DenseMatrix,
    /// hidden x hidden
    pub theta1: DenseMatrix,
    pub head: Option<HeadParams>,
}

/// Single-layer classifier head.
#[derive(Debug, Clone, PartialEq)]
pub struct HeadParams {
    /// hidden x classes
    pub weights: DenseMatrix,
    pub bias: Vec<f64>,
}

pub fn glorot(rows: usize, cols: usize, seed: RngSeed) -> DenseMatrix {
    let mut rng = seed.rng();
    let limit = (6.0 / (rows + cols) as f64).sqrt();
    let mut m = DenseMatrix::zeros(rows, cols);
    for v in m.values_mut() {
        *v = (rng.random::<f64>() * 2.0 - 1.0) * limit;
    }
    m
}

/// Glorot-initialized backbone, deterministic per seed.
pub fn init_params(input_dim: usize, hidden_dim: usize, seed: RngSeed) -> HgnnParams {
    HgnnParams {
        theta0: glorot(input_dim, hidden_dim, seed.derive(0)),
        theta1: glorot(hidden_dim, hidden_dim, seed.derive(1)),
        head: None,
    }
}

impl HgnnParams {
    pub fn input_dim(&self) -> usize {
        self.theta0.rows()
    }

    pub fn hidden_dim(&self) -> usize {
        self.theta0.cols()
    }

    pub fn attach_head(&mut self, num_classes: usize, seed: RngSeed) {
        self.head = Some(HeadParams {
            weights: glorot(self.hidden_dim(), num_classes, seed),
            bias: vec![0.0; num_classes],
        });
    }
}

/// Activations cached by [`forward`] for the backward pass.
#[derive(Debug, Clone)]
pub struct ForwardCache {
    pub propagated0: DenseMatrix,
    pub preact0: DenseMatrix,
    pub hidden0: DenseMatrix,
    pub propagated1: DenseMatrix,
    /// backbone output, `N x hidden`
    pub out: DenseMatrix,
}

fn apply_structure(structure: Option<&Hypergraph>, x: &DenseMatrix) -> Result<DenseMatrix> {
    match structure {
        Some(g) => g.propagate(x),
        None => Ok(x.clone()),
    }
}

/// Backbone forward pass. `structure: None` skips propagation (MLP mode).
pub fn forward(
    params: &HgnnParams,
    structure: Option<&Hypergraph>,
    x: &DenseMatrix,
) -> Result<ForwardCache> {
    if let Some(g) = structure {
        if x.rows() != g.num_vertices() {
            return Err(Error::invalid_argument(format!(
                "forward expects {} rows, got {}",
                g.num_vertices(),
                x.rows()
            )));
        }
    }
    if x.cols() != params.input_dim() {
        return Err(Error::invalid_argument(format!(
            "forward expects {} feature columns, got {}",
            params.input_dim(),
            x.cols()
        )));
    }
    let propagated0 = apply_structure(structure, x)?;
    let preact0 = propagated0.matmul(&params.theta0);
    let mut hidden0 = preact0.clone();
    for v in hidden0.values_mut() {
        if *v < 0.0 {
            *v = 0.0;
        }
    }
    let propagated1 = apply_structure(structure, &hidden0)?;
    let out = propagated1.matmul(&params.theta1);
    Ok(ForwardCache {
        propagated0,
        preact0,
        hidden0,
        propagated1,
        out,
    })
}

/// Gradients of a scalar loss with respect to the backbone weights.
#[derive(Debug, Clone)]
pub struct BackboneGrads {
    pub d_theta0: DenseMatrix,
    pub d_theta1: DenseMatrix,
    pub d_input: Option<DenseMatrix>,
}

/// Exact backward pass through the backbone. `d_out` is the loss gradient
/// at the backbone output; propagation is self-adjoint (the operator is
/// symmetric), so the same sparse passes run in reverse.
pub fn backward(
    params: &HgnnParams,
    structure: Option<&Hypergraph>,
    cache: &ForwardCache,
    d_out: &DenseMatrix,
    want_input_grad: bool,
) -> Result<BackboneGrads> {
    if d_out.rows() != cache.out.rows() || d_out.cols() != cache.out.cols() {
        return Err(Error::invalid_state(format!(
            "upstream gradient {}x{} does not match cached output {}x{}",
            d_out.rows(),
            d_out.cols(),
            cache.out.rows(),
            cache.out.cols()
        )));
    }
    if cache.preact0.cols() != params.theta0.cols() || cache.out.cols() != params.theta1.cols() {
        return Err(Error::invalid_state(
            "cache does not match parameters; rerun forward",
        ));
    }
    let d_theta1 = cache.propagated1.transpose_matmul(d_out);
    let d_prop1 = d_out.matmul_transpose(&params.theta1);
    let mut d_hidden0 = apply_structure(structure, &d_prop1)?;
    for (g, &z) in d_hidden0.values_mut().iter_mut().zip(cache.preact0.values()) {
        if z <= 0.0 {
            *g = 0.0;
        }
    }
    let d_theta0 = cache.propagated0.transpose_matmul(&d_hidden0);
    let d_input = if want_input_grad {
        let d_prop0 = d_hidden0.matmul_transpose(&params.theta0);
        Some(apply_structure(structure, &d_prop0)?)
    } else {
        None
    };
    Ok(BackboneGrads {
        d_theta0,
        d_theta1,
        d_input,
    })
}

/// Head logits for every vertex: `out · W + b`.
pub fn head_logits(head: &HeadParams, out: &DenseMatrix) -> DenseMatrix {
    let mut logits = out.matmul(&head.weights);
    for r in 0..logits.rows() {
        for (l, &b) in logits.row_mut(r).iter_mut().zip(&head.bias) {
            *l += b;
        }
    }
    logits
}

/// Mean softmax cross-entropy over the listed rows. Returns the loss and
/// its gradient w.r.t. the full logits matrix (zero outside `ids`).
pub fn cross_entropy(
    logits: &DenseMatrix,
    targets: &[usize],
    ids: &[usize],
) -> Result<(f64, DenseMatrix)> {
    if ids.is_empty() {
        return Err(Error::invalid_argument("cross_entropy over no rows"));
    }
    let mut loss = 0.0;
    let mut d_logits = DenseMatrix::zeros(logits.rows(), logits.cols());
    let inv = 1.0 / ids.len() as f64;
    for &v in ids {
        let row = logits.row(v);
        let max = row.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let mut denom = 0.0;
        for &l in row {
            denom += (l - max).exp();
        }
        let log_denom = denom.ln() + max;
        loss += (log_denom - row[targets[v]]) * inv;
        let drow = d_logits.row_mut(v);
        for (c, &l) in row.iter().enumerate() {
            let p = (l - max).exp() / denom;
            drow[c] = (p - if c == targets[v] { 1.0 } else { 0.0 }) * inv;
        }
    }
    Ok((loss, d_logits))
}

/// First-moment/second-moment state for the Adam update rule
/// (β₁ = 0.9, β₂ = 0.999, ε = 1e-8).
#[derive(Debug, Clone, PartialEq)]
pub struct AdamState {
    m: Vec<f64>,
    v: Vec<f64>,
    step: u64,
}

const ADAM_BETA1: f64 = 0.9;
const ADAM_BETA2: f64 = 0.999;
const ADAM_EPS: f64 = 1e-8;

impl AdamState {
    pub fn new(len: usize) -> Self {
        AdamState {
            m: vec![0.0; len],
            v: vec![0.0; len],
            step: 0,
        }
    }

    /// One bias-corrected Adam step on a flat parameter tensor.
    pub fn step(&mut self, params: &mut [f64], grads: &[f64], alpha: f64) {
        assert_eq!(params.len(), self.m.len(), "adam state length mismatch");
        assert_eq!(params.len(), grads.len(), "adam gradient length mismatch");
        self.step += 1;
        let c1 = 1.0 - ADAM_BETA1.powi(self.step as i32);
        let c2 = 1.0 - ADAM_BETA2.powi(self.step as i32);
        for i in 0..params.len() {
            let g = grads[i];
            self.m[i] = ADAM_BETA1 * self.m[i] + (1.0 - ADAM_BETA1) * g;
            self.v[i] = ADAM_BETA2 * self.v[i] + (1.0 - ADAM_BETA2) * g * g;
            let m_hat = self.m[i] / c1;
            let v_hat = self.v[i] / c2;
            params[i] -= alpha * m_hat / (v_hat.sqrt() + ADAM_EPS);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn hg(n: usize, edges: &[&[usize]]) -> Hypergraph {
        Hypergraph::new(n, edges.iter().map(|e| e.to_vec()).collect()).unwrap()
    }

    #[test]
    fn forward_identity_theta_matches_propagate_example() {
        let g = hg(2, &[&[0, 1]]);
        let params = HgnnParams {
            theta0: DenseMatrix::identity(2),
            theta1: DenseMatrix::identity(2),
            head: None,
        };
        let x = DenseMatrix::from_vec(2, 2, vec![1.0, 0.0, 0.0, 1.0]).unwrap();
        let cache = forward(&params, Some(&g), &x).unwrap();
        assert_eq!(cache.preact0.values(), &[0.5, 0.5, 0.5, 0.5]);
    }

    #[test]
    fn forward_zero_input_zero_output() {
        let g = hg(3, &[&[0, 1, 2]]);
        let params = init_params(4, 6, RngSeed(0));
        let x = DenseMatrix::zeros(3, 4);
        let cache = forward(&params, Some(&g), &x).unwrap();
        assert!(cache.out.values().iter().all(|&v| v == 0.0));
    }

    #[test]
    fn forward_matches_dense_reference() {
        let g = hg(4, &[&[0, 1], &[1, 2, 3]]);
        let params = init_params(3, 5, RngSeed(2));
        let mut x = DenseMatrix::zeros(4, 3);
        let mut rng = RngSeed(8).rng();
        for v in x.values_mut() {
            *v = rng.random::<f64>() - 0.5;
        }
        let cache = forward(&params, Some(&g), &x).unwrap();
        // dense reference recomputation
        let p0 = g.propagate(&x).unwrap();
        let mut a0 = p0.matmul(&params.theta0);
        for v in a0.values_mut() {
            *v = v.max(0.0);
        }
        let expect = g.propagate(&a0).unwrap().matmul(&params.theta1);
        assert!(cache.out.max_abs_diff(&expect) < 1e-10);
    }

    #[test]
    fn permutation_equivariance() {
        let g = hg(5, &[&[0, 1, 2], &[2, 3], &[3, 4]]);
        let perm = [3usize, 0, 4, 1, 2]; // new id of old vertex v
        let edges_p: Vec<Vec<usize>> = g
            .hyperedges()
            .iter()
            .map(|e| e.iter().map(|&v| perm[v]).collect())
            .collect();
        let gp = Hypergraph::new(5, edges_p).unwrap();
        let params = init_params(3, 4, RngSeed(4));
        let mut x = DenseMatrix::zeros(5, 3);
        let mut rng = RngSeed(5).rng();
        for v in x.values_mut() {
            *v = rng.random::<f64>();
        }
        let mut xp = DenseMatrix::zeros(5, 3);
        for v in 0..5 {
            xp.row_mut(perm[v]).copy_from_slice(x.row(v));
        }
        let out = forward(&params, Some(&g), &x).unwrap().out;
        let outp = forward(&params, Some(&gp), &xp).unwrap().out;
        for v in 0..5 {
            for c in 0..out.cols() {
                assert_abs_diff_eq!(out.get(v, c), outp.get(perm[v], c), epsilon = 1e-12);
            }
        }
    }

    #[test]
    fn backward_finite_difference_on_quadratic_loss() {
        // loss = 0.5 * ||out||^2, so d_out = out
        let g = hg(6, &[&[0, 1, 2], &[2, 3], &[3, 4, 5]]);
        let mut params = init_params(3, 4, RngSeed(7));
        let mut x = DenseMatrix::zeros(6, 3);
        let mut rng = RngSeed(9).rng();
        for v in x.values_mut() {
            *v = rng.random::<f64>() - 0.5;
        }
        let loss_of = |p: &HgnnParams, xin: &DenseMatrix| {
            let c = forward(p, Some(&g), xin).unwrap();
            0.5 * c.out.values().iter().map(|v| v * v).sum::<f64>()
        };
        let cache = forward(&params, Some(&g), &x).unwrap();
        let grads = backward(&params, Some(&g), &cache, &cache.out.clone(), true).unwrap();

        let eps = 1e-5;
        for idx in 0..params.theta0.values().len() {
            let orig = params.theta0.values()[idx];
            params.theta0.values_mut()[idx] = orig + eps;
            let up = loss_of(&params, &x);
            params.theta0.values_mut()[idx] = orig - eps;
            let down = loss_of(&params, &x);
            params.theta0.values_mut()[idx] = orig;
            let fd = (up - down) / (2.0 * eps);
            let an = grads.d_theta0.values()[idx];
            assert!(
                (fd - an).abs() <= 1e-6 * fd.abs().max(an.abs()).max(1.0),
                "theta0[{idx}]: fd {fd} vs analytic {an}"
            );
        }
        for idx in 0..x.values().len() {
            let orig = x.values()[idx];
            x.values_mut()[idx] = orig + eps;
            let up = loss_of(&params, &x);
            x.values_mut()[idx] = orig - eps;
            let down = loss_of(&params, &x);
            x.values_mut()[idx] = orig;
            let fd = (up - down) / (2.0 * eps);
            let an = grads.d_input.as_ref().unwrap().values()[idx];
            assert!(
                (fd - an).abs() <= 1e-6 * fd.abs().max(an.abs()).max(1.0),
                "x[{idx}]: fd {fd} vs analytic {an}"
            );
        }
    }

    #[test]
    fn backward_zero_upstream_zero_grads_and_linearity() {
        let g = hg(3, &[&[0, 1], &[1, 2]]);
        let params = init_params(2, 3, RngSeed(3));
        let mut x = DenseMatrix::zeros(3, 2);
        let mut rng = RngSeed(1).rng();
        for v in x.values_mut() {
            *v = rng.random::<f64>();
        }
        let cache = forward(&params, Some(&g), &x).unwrap();
        let zero = DenseMatrix::zeros(3, 3);
        let g0 = backward(&params, Some(&g), &cache, &zero, false).unwrap();
        assert!(g0.d_theta0.values().iter().all(|&v| v == 0.0));
        assert!(g0.d_theta1.values().iter().all(|&v| v == 0.0));

        let mut up = cache.out.clone();
        let g1 = backward(&params, Some(&g), &cache, &up, false).unwrap();
        up.scale(2.0);
        let g2 = backward(&params, Some(&g), &cache, &up, false).unwrap();
        let mut doubled = g1.d_theta0.clone();
        doubled.scale(2.0);
        assert!(doubled.max_abs_diff(&g2.d_theta0) < 1e-12);
    }

    #[test]
    fn backward_rejects_stale_cache() {
        let g = hg(3, &[&[0, 1], &[1, 2]]);
        let params = init_params(2, 3, RngSeed(3));
        let other = init_params(2, 5, RngSeed(4));
        let x = DenseMatrix::zeros(3, 2);
        let cache = forward(&params, Some(&g), &x).unwrap();
        let up = DenseMatrix::zeros(3, 3);
        assert!(matches!(
            backward(&other, Some(&g), &cache, &up, false),
            Err(Error::InvalidState(_))
        ));
    }

    #[test]
    fn init_params_seeded_and_bounded() {
        let a = init_params(10, 6, RngSeed(1));
        let b = init_params(10, 6, RngSeed(1));
        let c = init_params(10, 6, RngSeed(2));
        assert_eq!(a, b);
        assert_ne!(a, c);
        let limit0 = (6.0 / 16.0f64).sqrt();
        assert!(a.theta0.values().iter().all(|v| v.abs() <= limit0));
    }

    #[test]
    fn adam_zero_grad_keeps_params() {
        let mut p = vec![1.0, -2.0, 3.0];
        let mut st = AdamState::new(3);
        st.step(&mut p, &[0.0, 0.0, 0.0], 0.1);
        assert_eq!(p, vec![1.0, -2.0, 3.0]);
    }

    #[test]
    fn adam_first_step_magnitude() {
        let mut p = vec![0.0, 0.0];
        let mut st = AdamState::new(2);
        st.step(&mut p, &[0.5, -1.5], 0.01);
        // bias-corrected first step is alpha * sign(g) up to epsilon
        assert_abs_diff_eq!(p[0], -0.01, epsilon = 1e-6);
        assert_abs_diff_eq!(p[1], 0.01, epsilon = 1e-6);
    }

    #[test]
    fn adam_converges_on_convex_quadratic() {
        let mut rng = RngSeed(6).rng();
        let mut w: Vec<f64> = (0..8).map(|_| rng.random::<f64>() * 2.0 - 1.0).collect();
        let mut st = AdamState::new(8);
        for _ in 0..200 {
            let grads: Vec<f64> = w.iter().map(|v| 2.0 * v).collect();
            st.step(&mut w, &grads, 0.05);
        }
        let grad_norm = w.iter().map(|v| (2.0 * v).powi(2)).sum::<f64>().sqrt();
        assert!(grad_norm < 1e-3, "gradient norm {grad_norm}");
    }

    #[test]
    fn cross_entropy_basics() {
        // uniform logits over 4 classes: loss = ln 4
        let logits = DenseMatrix::zeros(2, 4);
        let (loss, grad) = cross_entropy(&logits, &[1, 2], &[0, 1]).unwrap();
        assert_abs_diff_eq!(loss, 4.0f64.ln(), epsilon = 1e-12);
        // gradient rows sum to zero
        for r in 0..2 {
            let s: f64 = grad.row(r).iter().sum();
            assert_abs_diff_eq!(s, 0.0, epsilon = 1e-12);
        }
        assert!(cross_entropy(&logits, &[0, 0], &[]).is_err());
    }
}
