use serde::{Deserialize, Serialize};

use super::{kosaki_image, psd_attainer, schatten_norm, sv_norm, OptimizerReport, Placement, SolverOptions};
use crate::error::{Error, Result};
use crate::exponent::Exponent;
use crate::matcore::{self, ComplexMatrix, Density};
use crate::rng;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Side {
    Row,
    Column,
}

fn same_shape(xs: &[ComplexMatrix]) -> Result<()> {
    if let Some(first) = xs.first() {
        if xs.iter().any(|x| x.shape() != first.shape()) {
            return Err(Error::Dimension("family members differ in shape".into()));
        }
    }
    Ok(())
}

/// `‖(Σ X_k X_k*)^{1/2}‖_p` (row) or `‖(Σ X_k* X_k)^{1/2}‖_p` (column) for the
/// Kosaki images `X_k`. An empty family has norm 0.
pub fn rc_square_norm(xs: &[ComplexMatrix], d: &Density, p: Exponent, side: Side) -> Result<f64> {
    p.require_norm_range()?;
    same_shape(xs)?;
    if xs.is_empty() {
        return Ok(0.0);
    }
    let n = d.dim();
    let mut sq = ComplexMatrix::zeros(n, n);
    for x in xs {
        let k = kosaki_image(x, d, p, Placement::Symmetric)?;
        sq += match side {
            Side::Row => &k * k.adjoint(),
            Side::Column => k.adjoint() * &k,
        };
    }
    let (vals, _) = matcore::hermitian_eig(&sq);
    let roots: Vec<f64> = vals.iter().map(|&l| l.max(0.0).sqrt()).collect();
    Ok(sv_norm(&roots, p))
}

/// `‖Σ x_k ⊗ conj(x_k)‖^{1/2}`: the `M(OH)` norm of `Σ x_k ⊗ δ_k`.
pub fn oh_closed_form(xs: &[ComplexMatrix]) -> Result<f64> {
    same_shape(xs)?;
    let Some(first) = xs.first() else { return Ok(0.0) };
    let (r, c) = first.shape();
    let mut acc = ComplexMatrix::zeros(r * r, c * c);
    for x in xs {
        acc += x.kronecker(&x.conjugate());
    }
    Ok(schatten_norm(&acc, Exponent::INF)?.sqrt())
}

/// `sup { ‖Σ x_k* α x_k‖_{S_2}^{1/2} : α ≥ 0, ‖α‖_{S_2} ≤ 1 }`, by power iteration
/// of `α ↦ T T*(α)` on the positive cone with random restarts.
pub fn oh_valued_norm(xs: &[ComplexMatrix], opts: &SolverOptions) -> Result<OptimizerReport> {
    same_shape(xs)?;
    let Some(first) = xs.first() else { return Ok(OptimizerReport::exact(0.0, opts.seed)) };
    for x in xs {
        matcore::check_finite(x, "oh input")?;
    }
    let r = first.nrows();
    let t = |alpha: &ComplexMatrix| xs.iter().fold(ComplexMatrix::zeros(first.ncols(), first.ncols()), |acc, x| acc + x.adjoint() * alpha * x);
    let t_adj = |beta: &ComplexMatrix| xs.iter().fold(ComplexMatrix::zeros(r, r), |acc, x| acc + x * beta * x.adjoint());
    let fro = |m: &ComplexMatrix| m.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    let mut rg = rng::stream(opts.seed, "oh_valued_norm");
    let restarts = opts.restarts.max(16);
    let mut best = 0.0_f64;
    let mut iterations = 0;
    let mut converged = true;
    for k in 0..=restarts {
        let mut alpha = if k == 0 {
            ComplexMatrix::identity(r, r)
        } else {
            let g = matcore::random_matrix_rng(&mut rg, r, r);
            &g * g.adjoint()
        };
        let na = fro(&alpha);
        alpha.unscale_mut(na);
        let mut prev = -1.0;
        let mut done = false;
        for _ in 0..opts.max_iter {
            iterations += 1;
            let next = t_adj(&t(&alpha));
            let nn = fro(&next);
            if nn == 0.0 {
                done = true;
                break;
            }
            alpha = next.unscale(nn);
            let val = fro(&t(&alpha));
            if (val - prev).abs() <= opts.tol * val {
                done = true;
                break;
            }
            prev = val;
        }
        converged &= done;
        best = best.max(fro(&t(&alpha)).sqrt());
    }
    Ok(OptimizerReport { value: best, iterations, duality_gap: None, restarts, converged, seed: opts.seed })
}

fn halved(e: Exponent) -> Exponent {
    match e {
        Exponent::Finite(u) => Exponent::Finite(u / 2.0),
        Exponent::Infinite => Exponent::Infinite,
    }
}

/// `sup (Σ_k ‖α x_k β‖_2²)^{1/2}` over `‖α‖_u, ‖β‖_v ≤ 1`, alternating over
/// `P = α*α` and `Q = ββ*` with exact partial maximizers.
fn family_sup(xs: &[ComplexMatrix], u: Exponent, v: Exponent, opts: &SolverOptions, stream: &str) -> OptimizerReport {
    let (r, c) = xs[0].shape();
    let (uh, vh) = (halved(u), halved(v));
    let gp = |q: &ComplexMatrix| xs.iter().fold(ComplexMatrix::zeros(r, r), |acc, x| acc + x * q * x.adjoint());
    let gq = |p: &ComplexMatrix| xs.iter().fold(ComplexMatrix::zeros(c, c), |acc, x| acc + x.adjoint() * p * x);
    let mut rg = rng::stream(opts.seed, stream);
    let mut best = 0.0_f64;
    let mut iterations = 0;
    let mut converged = true;
    for k in 0..=opts.restarts {
        let mut q = if k == 0 {
            psd_attainer(&ComplexMatrix::identity(c, c), vh)
        } else {
            let g = matcore::random_matrix_rng(&mut rg, c, c);
            let q = &g * g.adjoint();
            let nq = schatten_norm(&q, vh).unwrap_or(1.0);
            q.unscale(nq)
        };
        let mut p = psd_attainer(&gp(&q), uh);
        let mut prev = -1.0;
        let mut done = false;
        for _ in 0..opts.max_iter {
            iterations += 1;
            q = psd_attainer(&gq(&p), vh);
            p = psd_attainer(&gp(&q), uh);
            let val = (&p * gp(&q)).trace().re;
            if val - prev <= opts.tol * val.abs() {
                done = true;
                break;
            }
            prev = val;
        }
        converged &= done;
        // evaluate at the feasible pair α = P^{1/2}, β = Q^{1/2}
        let a = matcore::psd_power(&p, 0.5);
        let b = matcore::psd_power(&q, 0.5);
        let val: f64 = xs.iter().map(|x| (&a * x * &b).iter().map(|z| z.norm_sqr()).sum::<f64>()).sum();
        best = best.max(val.sqrt());
    }
    OptimizerReport { value: best, iterations, duality_gap: None, restarts: opts.restarts, converged, seed: opts.seed }
}

/// `sup (Σ_k ‖α x_k β‖_{S_2}²)^{1/2}` over `‖α‖_{S_u}, ‖β‖_{S_v} ≤ 1` with
/// `(1/u, 1/v) = (θ/q, (1−θ)/q)` and `1/2 = 1/p + 1/q`.
pub fn mixed_theta_norm(xs: &[ComplexMatrix], theta: f64, p: Exponent, opts: &SolverOptions) -> Result<OptimizerReport> {
    if !(0.0..=1.0).contains(&theta) {
        return Err(Error::Invalid(format!("theta = {theta} outside [0,1]")));
    }
    if p.inv() > 0.5 + 1e-15 {
        return Err(Error::Exponent(format!("mixed norms need 2 ≤ p ≤ ∞, got {p}")));
    }
    same_shape(xs)?;
    if xs.is_empty() {
        return Ok(OptimizerReport::exact(0.0, opts.seed));
    }
    let qi = 0.5 - p.inv();
    let u = Exponent::from_inv(theta * qi)?;
    let v = Exponent::from_inv((1.0 - theta) * qi)?;
    Ok(family_sup(xs, u, v, opts, "mixed_theta_norm"))
}

/// `L_p(OH)` norm of the family of Kosaki images `X_k = d^{1/2p} x_k d^{1/2p}`.
///
/// For `p ≥ 2` this is the supremum over `‖a‖_{2r}, ‖b‖_{2r} ≤ 1` of
/// `(Σ‖a X_k b‖_2²)^{1/2}` with `1/r = 1/2 − 1/p` (a lower bound); for `p < 2`
/// the infimum of `‖a‖_{2r} (Σ‖y_k‖_2²)^{1/2} ‖b‖_{2r}` over `X_k = a y_k b`
/// with `1/r = 1/p − 1/2` (an upper bound).
pub fn oh_lp_norm(xs: &[ComplexMatrix], d: &Density, p: Exponent, opts: &SolverOptions) -> Result<OptimizerReport> {
    p.require_norm_range()?;
    same_shape(xs)?;
    if xs.is_empty() {
        return Ok(OptimizerReport::exact(0.0, opts.seed));
    }
    let images = xs.iter().map(|x| kosaki_image(x, d, p, Placement::Symmetric)).collect::<Result<Vec<_>>>()?;
    if p.is_infinite() {
        return oh_valued_norm(&images, opts);
    }
    let pv = p.value();
    if (pv - 2.0).abs() < 1e-14 {
        let v: f64 = images.iter().map(|x| x.iter().map(|z| z.norm_sqr()).sum::<f64>()).sum();
        return Ok(OptimizerReport::exact(v.sqrt(), opts.seed));
    }
    if pv > 2.0 {
        let w = Exponent::from_inv((0.5 - 1.0 / pv) / 2.0)?;
        return Ok(family_sup(&images, w, w, opts, "oh_lp_norm"));
    }
    Ok(oh_lp_inf(&images, 1.0 / (1.0 / pv - 0.5), opts))
}

/// `min (Σ tr(X_k* A^{-1} X_k B^{-1}))^{1/2}` over `A, B > 0`, `‖A‖_r = ‖B‖_r = 1`.
fn oh_lp_inf(xs: &[ComplexMatrix], r: f64, opts: &SolverOptions) -> OptimizerReport {
    let n = xs[0].nrows();
    let scale = xs.iter().map(|x| x.iter().map(|z| z.norm_sqr()).sum::<f64>()).sum::<f64>().sqrt();
    if scale == 0.0 {
        return OptimizerReport::exact(0.0, opts.seed);
    }
    let reg = 1e-13 * scale;
    let gamma = 1.0 / (r + 1.0);
    // A ∝ G^{1/(r+1)} minimizes tr(A^{-1} G) on the S_r sphere
    let step = |g: &ComplexMatrix| -> ComplexMatrix {
        let (vals, vecs) = matcore::hermitian_eig(g);
        let vals = vals.map(|l| l.max(0.0) + reg);
        let a = matcore::spectral_apply(&vals, &vecs, |l| l.powf(gamma));
        let na = schatten_norm(&a, Exponent::Finite(r)).unwrap_or(1.0);
        a.unscale(na)
    };
    let inv = |a: &ComplexMatrix| matcore::herm_apply(a, |l| 1.0 / l.max(1e-300));
    let value = |a: &ComplexMatrix, b: &ComplexMatrix| -> f64 {
        let (ai, bi) = (inv(a), inv(b));
        xs.iter().map(|x| (x.adjoint() * &ai * x * &bi).trace().re).sum::<f64>().max(0.0).sqrt()
    };
    let eye = ComplexMatrix::identity(n, n);
    let mut b = eye.unscale((n as f64).powf(1.0 / r));
    let mut a = b.clone();
    let mut prev = f64::INFINITY;
    let mut iterations = 0;
    let mut converged = false;
    for _ in 0..opts.max_iter {
        iterations += 1;
        let bi = inv(&b);
        a = step(&xs.iter().fold(ComplexMatrix::zeros(n, n), |acc, x| acc + x * &bi * x.adjoint()));
        let ai = inv(&a);
        b = step(&xs.iter().fold(ComplexMatrix::zeros(n, n), |acc, x| acc + x.adjoint() * &ai * x));
        let val = value(&a, &b);
        if prev - val <= opts.tol * val {
            converged = true;
            break;
        }
        prev = val;
    }
    let val = value(&a, &b);
    OptimizerReport { value: val, iterations, duality_gap: None, restarts: 0, converged, seed: opts.seed }
}
