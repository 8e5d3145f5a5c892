use rand::Rng;

use super::{schatten_norm, schatten_value_grad, OptimizerReport, SolverOptions};
use crate::error::{Error, Result};
use crate::exponent::Exponent;
use crate::matcore::{self, ComplexMatrix};
use crate::optim::{lbfgs, pack, unpack};
use crate::rng;

// Finite stand-in for an infinite exponent inside the smooth surrogate only.
const SURROGATE_INF: f64 = 48.0;

fn smooth_exp(e: Exponent) -> Exponent {
    match e {
        Exponent::Infinite => Exponent::Finite(SURROGATE_INF),
        f => f,
    }
}

/// `inf ‖α‖_{S_u} ‖β‖_{S_v}` over factorizations `x = αβ`.
///
/// Starts from the polar split `α = w|x|^{p/u}`, `β = |x|^{p/v}` and then
/// minimizes `ln‖xβ^{-1}‖_u + ln‖β‖_v` over invertible `β` from random starts.
/// The Hölder bound `‖x‖_p` is reported through `duality_gap`.
pub fn factorization_norm(x: &ComplexMatrix, u: Exponent, v: Exponent, opts: &SolverOptions) -> Result<OptimizerReport> {
    if u.inv() > 0.5 + 1e-12 || v.inv() > 0.5 + 1e-12 {
        return Err(Error::Exponent(format!("factorization needs 2 ≤ u,v ≤ ∞, got ({u},{v})")));
    }
    matcore::check_finite(x, "factorization input")?;
    let p = Exponent::from_inv(u.inv() + v.inv())?;
    let lower = schatten_norm(x, p)?;
    if lower == 0.0 {
        return Ok(OptimizerReport::exact(0.0, opts.seed));
    }
    if p.is_infinite() {
        return Ok(OptimizerReport::exact(lower, opts.seed));
    }
    let n = x.ncols();
    let pv = p.value();

    // polar split
    let svd = x.clone().svd(true, true);
    let (uu, vt, sv) = (svd.u.unwrap(), svd.v_t.unwrap(), svd.singular_values);
    let powered = |t: f64| {
        let mut m = vt.adjoint();
        for (j, &s) in sv.iter().enumerate() {
            let w = if s > 0.0 { s.powf(t) } else { 0.0 };
            m.column_mut(j).iter_mut().for_each(|z| *z *= w);
        }
        m
    };
    // x = U Σ V*, α₀ = U Σ^{p/u} V*, β₀ = V Σ^{p/v} V*
    let alpha0 = {
        let mut m = uu.clone();
        for (j, &s) in sv.iter().enumerate() {
            let w = if s > 0.0 { s.powf(pv * u.inv()) } else { 0.0 };
            m.column_mut(j).iter_mut().for_each(|z| *z *= w);
        }
        m * &vt
    };
    let beta0 = powered(pv * v.inv()) * &vt;
    let mut best = schatten_norm(&alpha0, u)? * schatten_norm(&beta0, v)?;

    let mut r = rng::stream(opts.seed, "factorization_norm");
    let mut iterations = 0;
    let mut any_converged = false;
    let scale = lower.powf(v.inv() * pv).max(1e-300);
    for k in 0..=opts.restarts {
        let start = if k == 0 {
            let reg = ComplexMatrix::identity(n, n).scale(1e-9 * scale);
            &beta0 + reg
        } else {
            let g = matcore::random_matrix_rng(&mut r, n, n);
            let jitter: f64 = r.gen_range(0.5..2.0);
            (ComplexMatrix::identity(n, n) + g.scale(0.3)).scale(scale * jitter)
        };
        let (val, its, conv) = descend(x, u, v, &start, opts.max_iter as u64);
        iterations += its;
        any_converged |= conv;
        if let Some(val) = val {
            if val.is_finite() && val < best {
                best = val;
            }
        }
        if (best - lower) <= 1e-12 * lower {
            break;
        }
    }
    let gap = best - lower;
    Ok(OptimizerReport {
        value: best,
        iterations,
        duality_gap: Some(gap),
        restarts: opts.restarts,
        converged: any_converged || gap <= 1e-8 * lower,
        seed: opts.seed,
    })
}

/// Local descent from `β = start`; returns the exact value at the final factorization.
pub(crate) fn descend(
    x: &ComplexMatrix,
    u: Exponent,
    v: Exponent,
    start: &ComplexMatrix,
    max_iter: u64,
) -> (Option<f64>, u64, bool) {
    let n = x.ncols();
    let (us, vs) = (smooth_exp(u), smooth_exp(v));
    let objective = |w: &[f64]| -> (f64, Vec<f64>) {
        let beta = unpack(w, &[(n, n)]).pop().unwrap();
        let Some(binv) = beta.clone().try_inverse() else {
            return (f64::INFINITY, vec![0.0; w.len()]);
        };
        let a = x * &binv;
        if a.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return (f64::INFINITY, vec![0.0; w.len()]);
        }
        let (na, ga) = schatten_value_grad(&a, us, 0.0);
        let (nb, gb) = schatten_value_grad(&beta, vs, 0.0);
        if na <= 0.0 || nb <= 0.0 {
            return (f64::INFINITY, vec![0.0; w.len()]);
        }
        let grad = -(a.adjoint() * ga * binv.adjoint()).unscale(na) + gb.unscale(nb);
        (na.ln() + nb.ln(), pack(&[&grad]))
    };
    let m = lbfgs(&objective, pack(&[start]), max_iter, 1e-12);
    let beta = unpack(&m.x, &[(n, n)]).pop().unwrap();
    let val = beta.clone().try_inverse().and_then(|binv| {
        Some(schatten_norm(&(x * binv), u).ok()? * schatten_norm(&beta, v).ok()?)
    });
    (val, m.iterations, m.converged)
}
