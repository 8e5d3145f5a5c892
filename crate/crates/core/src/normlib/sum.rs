use serde::{Deserialize, Serialize};

use super::{schatten_norm, schatten_value_grad, OptimizerReport, SolverOptions};
use crate::error::{Error, Result};
use crate::exponent::Exponent;
use crate::matcore::{self, ComplexMatrix};
use crate::optim::{lbfgs, pack, unpack};

/// A norm on matrices of a fixed shape, with what the sum-norm solver needs.
pub trait NormComponent: Send + Sync {
    fn value(&self, y: &ComplexMatrix) -> f64;
    /// Value and gradient `G` (with `dN = Re tr(G* dy)`) of a smoothing of the norm.
    fn smooth_grad(&self, y: &ComplexMatrix, eps: f64) -> (f64, ComplexMatrix);
    /// Dual norm for the pairing `Re tr(z* y)`.
    fn dual(&self, z: &ComplexMatrix) -> f64;
}

/// `y ↦ scale · ‖L y R‖_{S_p}` with invertible `L`, `R`.
#[derive(Clone, Debug)]
pub struct WeightedSchatten {
    p: Exponent,
    scale: f64,
    left: Option<(ComplexMatrix, ComplexMatrix)>,
    right: Option<(ComplexMatrix, ComplexMatrix)>,
}

impl WeightedSchatten {
    pub fn new(p: Exponent, scale: f64) -> Result<WeightedSchatten> {
        p.require_norm_range()?;
        if !(scale > 0.0) {
            return Err(Error::Invalid(format!("scale {scale} must be positive")));
        }
        Ok(WeightedSchatten { p, scale, left: None, right: None })
    }

    pub fn with_left(mut self, l: ComplexMatrix) -> Result<WeightedSchatten> {
        let inv = l.clone().try_inverse().ok_or(Error::NonInvertible)?;
        self.left = Some((l, inv));
        Ok(self)
    }

    pub fn with_right(mut self, r: ComplexMatrix) -> Result<WeightedSchatten> {
        let inv = r.clone().try_inverse().ok_or(Error::NonInvertible)?;
        self.right = Some((r, inv));
        Ok(self)
    }

    fn apply(&self, y: &ComplexMatrix) -> ComplexMatrix {
        let mut out = y.clone();
        if let Some((l, _)) = &self.left {
            out = l * out;
        }
        if let Some((r, _)) = &self.right {
            out *= r;
        }
        out
    }
}

impl NormComponent for WeightedSchatten {
    fn value(&self, y: &ComplexMatrix) -> f64 {
        self.scale * schatten_norm(&self.apply(y), self.p).unwrap_or(f64::INFINITY)
    }

    fn smooth_grad(&self, y: &ComplexMatrix, eps: f64) -> (f64, ComplexMatrix) {
        let (v, mut g) = schatten_value_grad(&self.apply(y), self.p, eps);
        if let Some((l, _)) = &self.left {
            g = l.adjoint() * g;
        }
        if let Some((r, _)) = &self.right {
            g *= r.adjoint();
        }
        (self.scale * v, g.scale(self.scale))
    }

    fn dual(&self, z: &ComplexMatrix) -> f64 {
        let mut w = z.clone();
        if let Some((_, li)) = &self.left {
            w = li.adjoint() * w;
        }
        if let Some((_, ri)) = &self.right {
            w *= ri.adjoint();
        }
        schatten_norm(&w, self.p.conjugate().expect("p ≥ 1")).unwrap_or(f64::INFINITY) / self.scale
    }
}

/// How the weighted component norms are aggregated.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Combine {
    /// `Σ_i w_i N_i(x_i)`
    #[default]
    Sum,
    /// `(Σ_i (w_i N_i(x_i))²)^{1/2}`
    Euclidean,
}

/// `inf { Σ_i w_i N_i(x_i) : x = Σ_i x_i }` (or the `ℓ_2` aggregate).
///
/// The primal is minimized by L-BFGS on a smoothing with continuation; the
/// averaged component gradients, rescaled into the dual unit ball, give a
/// lower bound. `value` is the primal (an upper bound) and `duality_gap` the
/// distance between the two.
pub fn sum_norm(
    x: &ComplexMatrix,
    components: &[(&dyn NormComponent, f64)],
    combine: Combine,
    opts: &SolverOptions,
) -> Result<OptimizerReport> {
    if components.is_empty() {
        return Err(Error::Invalid("sum norm needs at least one component".into()));
    }
    if components.iter().any(|(_, w)| !(*w > 0.0)) {
        return Err(Error::Invalid("weights must be positive".into()));
    }
    matcore::check_finite(x, "sum norm input")?;
    let c = components.len();
    let shape = x.shape();
    let fro = x.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    if fro == 0.0 {
        return Ok(OptimizerReport::exact(0.0, opts.seed));
    }
    let aggregate = |vals: &[f64]| -> f64 {
        match combine {
            Combine::Sum => vals.iter().zip(components).map(|(v, (_, w))| w * v).sum(),
            Combine::Euclidean => vals.iter().zip(components).map(|(v, (_, w))| (w * v).powi(2)).sum::<f64>().sqrt(),
        }
    };
    let split = |vars: &[f64]| -> Vec<ComplexMatrix> {
        let mut parts = unpack(vars, &vec![shape; c - 1]);
        let rest = parts.iter().fold(x.clone(), |acc, p| acc - p);
        parts.push(rest);
        parts
    };
    let exact_value = |parts: &[ComplexMatrix]| -> f64 {
        let vals: Vec<f64> = parts.iter().zip(components).map(|(p, (n, _))| n.value(p)).collect();
        aggregate(&vals)
    };

    // start with everything in the cheapest single component
    let singles: Vec<f64> = components.iter().map(|(n, w)| w * n.value(x)).collect();
    let cheapest = (0..c).min_by(|&a, &b| singles[a].total_cmp(&singles[b])).unwrap();
    let mut start: Vec<ComplexMatrix> = vec![ComplexMatrix::zeros(shape.0, shape.1); c - 1];
    if cheapest < c - 1 {
        start[cheapest] = x.clone();
    }
    let mut vars = pack(&start.iter().collect::<Vec<_>>());
    let mut best_parts = split(&vars);
    let mut best = exact_value(&best_parts);
    let mut iterations = 0;

    let grads_at = |parts: &[ComplexMatrix], eps: f64| -> (f64, Vec<ComplexMatrix>) {
        let mut vals = Vec::with_capacity(c);
        let mut grads = Vec::with_capacity(c);
        for (p, (n, w)) in parts.iter().zip(components) {
            let (v, g) = n.smooth_grad(p, eps);
            vals.push((v, *w));
            grads.push(g);
        }
        match combine {
            Combine::Sum => {
                let mut total = 0.0;
                for ((v, w), g) in vals.iter().zip(grads.iter_mut()) {
                    let h = (v * v + eps * eps).sqrt();
                    total += w * h;
                    let factor = if h > 0.0 { w * v / h } else { 0.0 };
                    *g = g.scale(factor);
                }
                (total, grads)
            }
            Combine::Euclidean => {
                let mut total = 0.0;
                for ((v, w), g) in vals.iter().zip(grads.iter_mut()) {
                    total += (w * v).powi(2);
                    *g = g.scale(2.0 * w * w * v);
                }
                (total, grads)
            }
        }
    };

    if c > 1 {
        for &rel in &[1e-2, 1e-4, 1e-6, 1e-8, 1e-10] {
            let eps = rel * fro;
            let objective = |w: &[f64]| -> (f64, Vec<f64>) {
                let parts = split(w);
                let (val, grads) = grads_at(&parts, eps);
                let last = &grads[c - 1];
                let dg: Vec<ComplexMatrix> = grads[..c - 1].iter().map(|g| g - last).collect();
                (val, pack(&dg.iter().collect::<Vec<_>>()))
            };
            let m = lbfgs(&objective, vars.clone(), opts.max_iter as u64, 1e-14 * fro.max(1.0));
            iterations += m.iterations;
            vars = m.x;
            let parts = split(&vars);
            let val = exact_value(&parts);
            if val < best {
                best = val;
                best_parts = parts;
            }
        }
    }

    let lower = dual_lower_bound(x, &best_parts, components, combine);
    let gap = (best - lower).max(0.0);
    Ok(OptimizerReport {
        value: best,
        iterations,
        duality_gap: Some(gap),
        restarts: 0,
        converged: gap <= opts.tol.max(1e-4) * best,
        seed: opts.seed,
    })
}

/// Lower bound for the sum norm of `x` from the gradients at a decomposition `parts`.
pub(crate) fn dual_lower_bound(
    x: &ComplexMatrix,
    parts: &[ComplexMatrix],
    components: &[(&dyn NormComponent, f64)],
    combine: Combine,
) -> f64 {
    let (r, c) = x.shape();
    let fro = x.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    let eps = 1e-12 * fro;
    let mut grads = Vec::with_capacity(parts.len());
    let mut total = 0.0;
    for (p, (n, w)) in parts.iter().zip(components) {
        let (v, g) = n.smooth_grad(p, eps);
        let g = match combine {
            Combine::Sum => g.scale(*w),
            Combine::Euclidean => {
                total += (w * v).powi(2);
                g.scale(w * w * v)
            }
        };
        grads.push(g);
    }
    let mut z = grads.iter().fold(ComplexMatrix::zeros(r, c), |a, g| a + g).unscale(parts.len() as f64);
    if combine == Combine::Euclidean {
        z = z.unscale(total.sqrt().max(f64::MIN_POSITIVE));
    }
    // each single-component gradient is also a valid direction
    grads.iter().map(|g| certify(x, g, components, combine)).fold(certify(x, &z, components, combine), f64::max)
}

/// `Re tr(z* x)` after scaling `z` into the dual unit ball.
fn certify(x: &ComplexMatrix, z: &ComplexMatrix, components: &[(&dyn NormComponent, f64)], combine: Combine) -> f64 {
    let ratios: Vec<f64> = components.iter().map(|(n, w)| n.dual(z) / w).collect();
    let size = match combine {
        Combine::Sum => ratios.iter().cloned().fold(0.0, f64::max),
        Combine::Euclidean => ratios.iter().map(|r| r * r).sum::<f64>().sqrt(),
    };
    if !(size > 0.0) || !size.is_finite() {
        return 0.0;
    }
    ((z.adjoint() * x).trace().re / size).max(0.0)
}
