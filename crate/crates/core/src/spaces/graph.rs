use serde::{Deserialize, Serialize};

use super::GraphSpace;
use crate::error::Result;
use crate::exponent::Exponent;
use crate::matcore::{self, ComplexMatrix, Density};
use crate::normlib::{conditional_norm, oh_closed_form, schatten_norm, SolverOptions};
use crate::rng;

/// The four norms of `z ∈ M_m(M_n)` on each side of the graph-tensor identity,
/// ordered as `[z, zD, Dz, DzD]` with `D = diag(λ)`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct GraphTensorSample {
    pub graph: [f64; 4],
    pub weight: [f64; 4],
    pub ratio: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct GraphTensorReport {
    pub lambdas: Vec<f64>,
    pub m: usize,
    pub samples: Vec<GraphTensorSample>,
    /// `max |ratio − 1|`, over the maxima and over every term.
    pub max_deviation: f64,
}

/// `(z_ij)_{αβ}` for `x ∈ M_m ⊗ M_n`.
fn entry(x: &ComplexMatrix, n: usize, i: usize, j: usize, a: usize, b: usize) -> num_complex::Complex64 {
    x[(a * n + i, b * n + j)]
}

/// Norms of `x ∈ M_m ⊗ M_n` in `C_n ⊗_h R_n`, `C_n ⊗_h OH_n(λ)`, `OH_n(λ) ⊗_h R_n` and `OH_n(λ) ⊗_h OH_n(λ)`
/// at matrix level `m`, from the closed forms of column, row and OH families; and the four
/// `L_{(u,v)}` terms of `J_{∞,2}` for the weight `diag(λ⁴)`.
pub fn graph_tensor_norms(x: &ComplexMatrix, lambdas: &[f64], m: usize, opts: &SolverOptions) -> Result<GraphTensorSample> {
    let g = GraphSpace::new(lambdas.to_vec())?;
    let lam = g.lambdas();
    let n = lam.len();
    let op = schatten_norm(x, Exponent::INF)?;
    let cols: Vec<ComplexMatrix> = (0..n)
        .map(|j| ComplexMatrix::from_fn(n * m, m, |r, b| entry(x, n, r / m, j, r % m, b) * lam[j]))
        .collect();
    let rows: Vec<ComplexMatrix> = (0..n)
        .map(|i| ComplexMatrix::from_fn(m, n * m, |a, c| entry(x, n, i, c / m, a, c % m) * lam[i]))
        .collect();
    let cells: Vec<ComplexMatrix> = (0..n * n)
        .map(|k| {
            let (i, j) = (k / n, k % n);
            ComplexMatrix::from_fn(m, m, |a, b| entry(x, n, i, j, a, b) * lam[i] * lam[j])
        })
        .collect();
    let graph = [op, oh_closed_form(&cols)?, oh_closed_form(&rows)?, oh_closed_form(&cells)?];

    let gammas: Vec<f64> = lam.iter().map(|l| l.powi(4)).collect();
    let d = Density::from_diagonal(&gammas)?;
    let four = Exponent::Finite(4.0);
    let mut weight = [0.0; 4];
    for (slot, (u, v)) in [(Exponent::INF, Exponent::INF), (Exponent::INF, four), (four, Exponent::INF), (four, four)]
        .into_iter()
        .enumerate()
    {
        weight[slot] = conditional_norm(x, &d, m, u, Exponent::INF, v, opts)?.value;
    }
    let gmax = graph.iter().cloned().fold(0.0, f64::max);
    let wmax = weight.iter().cloned().fold(0.0, f64::max);
    let ratio = if gmax == 0.0 && wmax == 0.0 { 1.0 } else { gmax / wmax };
    Ok(GraphTensorSample { graph, weight, ratio })
}

/// Compares both sides of the graph-tensor identity on random `x ∈ M_m ⊗ M_n`.
pub fn graph_tensor_check(lambdas: &[f64], m: usize, samples: usize, seed: u64, opts: &SolverOptions) -> Result<GraphTensorReport> {
    let n = lambdas.len();
    let mut out = Vec::with_capacity(samples);
    let mut max_deviation = 0.0_f64;
    for k in 0..samples {
        let mut r = rng::stream(rng::child_seed(seed, "graph_tensor_check", k as u64), "sample");
        let x = matcore::random_matrix_rng(&mut r, m * n, m * n);
        let s = graph_tensor_norms(&x, lambdas, m, opts)?;
        max_deviation = max_deviation.max((s.ratio - 1.0).abs());
        for (g, w) in s.graph.iter().zip(&s.weight) {
            max_deviation = max_deviation.max((g / w - 1.0).abs());
        }
        out.push(s);
    }
    Ok(GraphTensorReport { lambdas: lambdas.to_vec(), m, samples: out, max_deviation })
}

/// Target of the diagonal part of the graph embedding of `OH_n`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum GraphTarget {
    Row,
    Column,
    Oh,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct OhGraphReport {
    pub lambdas: Vec<f64>,
    pub m: usize,
    pub target: GraphTarget,
    /// `ξ = (Σ λ_k^{-4})^{1/4}`
    pub xi: f64,
    /// `√(1 + ξ²)`
    pub bound: f64,
    /// Largest observed `‖u_m(X)‖ / ‖X‖`.
    pub measured: f64,
    /// Largest observed norm of the coordinate projection back onto `OH_n`.
    pub projection: f64,
}

fn target_norm(ys: &[ComplexMatrix], target: GraphTarget) -> Result<f64> {
    let (r, c) = ys[0].shape();
    Ok(match target {
        GraphTarget::Row => schatten_norm(&ys.iter().fold(ComplexMatrix::zeros(r, r), |a, y| a + y * y.adjoint()), Exponent::INF)?.sqrt(),
        GraphTarget::Column => schatten_norm(&ys.iter().fold(ComplexMatrix::zeros(c, c), |a, y| a + y.adjoint() * y), Exponent::INF)?.sqrt(),
        GraphTarget::Oh => oh_closed_form(ys)?,
    })
}

/// Level-`m` distortion of `u: δ_k ↦ (λ_k^{-1} δ_k, δ_k)` from `OH_n` into `T ⊕_2 OH_n`,
/// estimated on coordinate families and random families.
pub fn oh_graph_map(lambdas: &[f64], m: usize, target: GraphTarget, samples: usize, seed: u64) -> Result<OhGraphReport> {
    let g = GraphSpace::new(lambdas.to_vec())?;
    let lam = g.lambdas();
    let n = lam.len();
    let xi = lam.iter().map(|l| l.powi(-4)).sum::<f64>().powf(0.25);
    let ratio = |xs: &[ComplexMatrix]| -> Result<(f64, f64)> {
        let oh = oh_closed_form(xs)?;
        let scaled: Vec<ComplexMatrix> = xs.iter().zip(lam).map(|(x, l)| x.unscale(*l)).collect();
        let t = target_norm(&scaled, target)?;
        let total = (t * t + oh * oh).sqrt();
        Ok((total / oh, oh / total))
    };
    let mut measured = 0.0_f64;
    let mut projection = 0.0_f64;
    for k in 0..n {
        let mut xs = vec![ComplexMatrix::zeros(m, m); n];
        xs[k][(0, 0)] = matcore::ONE;
        let (a, b) = ratio(&xs)?;
        measured = measured.max(a);
        projection = projection.max(b);
    }
    let mut r = rng::stream(seed, "oh_graph_map");
    for _ in 0..samples {
        let xs: Vec<ComplexMatrix> = (0..n).map(|_| matcore::random_matrix_rng(&mut r, m, m)).collect();
        let (a, b) = ratio(&xs)?;
        measured = measured.max(a);
        projection = projection.max(b);
    }
    Ok(OhGraphReport { lambdas: lam.to_vec(), m, target, xi, bound: (1.0 + xi * xi).sqrt(), measured, projection })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matcore::c;
    use approx::assert_relative_eq;
    use rand::Rng;

    #[test]
    fn one_dimensional_graph() {
        let o = SolverOptions::default();
        for l in [0.6, 1.0, 1.7] {
            let x = ComplexMatrix::from_element(1, 1, c(-1.3));
            let s = graph_tensor_norms(&x, &[l], 1, &o).unwrap();
            let expected = [1.3, 1.3 * l, 1.3 * l, 1.3 * l * l];
            for (a, b) in s.graph.iter().zip(expected) {
                assert_relative_eq!(*a, b, max_relative = 1e-12);
            }
            for (a, b) in s.weight.iter().zip(expected) {
                assert_relative_eq!(*a, b, max_relative = 1e-12);
            }
        }
    }

    #[test]
    fn uniform_weights() {
        let rep = graph_tensor_check(&[1.0, 1.0, 1.0], 1, 4, 3, &SolverOptions::default()).unwrap();
        assert!(rep.max_deviation < 1e-8, "{}", rep.max_deviation);
    }

    #[test]
    fn random_weights_at_level_two() {
        let mut r = rng::stream(60, "lam");
        let lam: Vec<f64> = (0..3).map(|_| r.gen_range(0.5..2.0)).collect();
        let rep = graph_tensor_check(&lam, 2, 2, 60, &SolverOptions::default()).unwrap();
        assert!(rep.max_deviation < 1e-6, "{}", rep.max_deviation);
    }

    #[test]
    fn single_eigenvalue_distortion() {
        for l in [0.3, 1.0, 4.0] {
            for t in [GraphTarget::Row, GraphTarget::Column, GraphTarget::Oh] {
                let rep = oh_graph_map(&[l], 2, t, 20, 1).unwrap();
                assert_relative_eq!(rep.measured, (1.0 + l.powi(-2)).sqrt(), max_relative = 1e-12);
                assert_relative_eq!(rep.bound, rep.measured, max_relative = 1e-12);
                assert!(rep.projection <= 1.0);
            }
        }
    }

    #[test]
    fn geometric_eigenvalues() {
        let lam: Vec<f64> = (1..=6).map(|k| 2f64.powi(k)).collect();
        let rep = oh_graph_map(&lam, 2, GraphTarget::Row, 200, 5).unwrap();
        let xi = (1..=6).map(|k| 2f64.powi(-4 * k)).sum::<f64>().powf(0.25);
        assert_relative_eq!(rep.xi, xi, max_relative = 1e-14);
        assert!(rep.measured <= rep.bound);
        assert!(rep.projection <= 1.0);
    }
}
