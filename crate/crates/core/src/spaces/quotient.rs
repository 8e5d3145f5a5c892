use crate::error::{Error, Result};
use crate::exponent::Exponent;
use crate::matcore::{self, ComplexMatrix, Density};
use crate::normlib::{
    dual_lower_bound, schatten_norm, schatten_value_grad, sum_norm, Combine, NormComponent, OptimizerReport,
    SolverOptions, WeightedSchatten,
};
use crate::optim::{lbfgs, pack, unpack};

fn check(d: &Density, p: Exponent) -> Result<()> {
    if p.inv() < 0.5 - 1e-15 || p.inv() > 1.0 + 1e-15 {
        return Err(Error::Exponent(format!("K_(p,2) needs 1 ≤ p ≤ 2, got {p}")));
    }
    if !d.is_invertible() {
        return Err(Error::NonInvertible);
    }
    Ok(())
}

/// `(1/2p', β)` with `β = 1/2p − 1/4`.
fn powers(p: Exponent) -> (f64, f64) {
    let a = (1.0 - p.inv()) / 2.0;
    (a, 0.25 - a)
}

/// Exponents of the four summands: `p`, `w`, `w`, `2` with `1/w = 1/2p + 1/4`.
fn exponents(p: Exponent) -> Result<[Exponent; 4]> {
    let w = Exponent::from_inv(p.inv() / 2.0 + 0.25)?;
    Ok([p, w, w, Exponent::Finite(2.0)])
}

fn check_tuple(tuple: &[ComplexMatrix; 4], n: usize) -> Result<()> {
    for x in tuple {
        if x.shape() != (n, n) {
            return Err(Error::Dimension(format!("tuple entries must be {n}x{n}")));
        }
        matcore::check_finite(x, "tuple entry")?;
    }
    Ok(())
}

/// `Ψ(x) = d^{1/2p'} x₁ d^{1/2p'} + d^{1/2p'} x₂ d^{1/4} + d^{1/4} x₃ d^{1/2p'} + d^{1/4} x₄ d^{1/4}`.
pub fn psi_map(tuple: &[ComplexMatrix; 4], d: &Density, p: Exponent) -> Result<ComplexMatrix> {
    check_tuple(tuple, d.dim())?;
    let (a, _) = powers(p);
    let da = d.pow(a)?;
    let dq = d.pow(0.25)?;
    Ok(&da * &tuple[0] * &da + &da * &tuple[1] * &dq + &dq * &tuple[2] * &da + &dq * &tuple[3] * &dq)
}

/// `(x₁, x₂ d^β, d^β x₃, d^β x₄ d^β)`: the tuple seen in `L_p` after removing `d^{1/2p'}` on both sides.
fn embedded_parts(tuple: &[ComplexMatrix; 4], b: &ComplexMatrix) -> Vec<ComplexMatrix> {
    vec![tuple[0].clone(), &tuple[1] * b, b * &tuple[2], b * &tuple[3] * b]
}

struct Components {
    list: Vec<WeightedSchatten>,
}

impl Components {
    fn new(d: &Density, p: Exponent) -> Result<Components> {
        let (_, beta) = powers(p);
        let binv = d.pow(-beta)?;
        let e = exponents(p)?;
        Ok(Components {
            list: vec![
                WeightedSchatten::new(e[0], 1.0)?,
                WeightedSchatten::new(e[1], 1.0)?.with_right(binv.clone())?,
                WeightedSchatten::new(e[2], 1.0)?.with_left(binv.clone())?,
                WeightedSchatten::new(e[3], 1.0)?.with_left(binv.clone())?.with_right(binv)?,
            ],
        })
    }

    fn weighted(&self) -> Vec<(&dyn NormComponent, f64)> {
        self.list.iter().map(|c| (c as &dyn NormComponent, 1.0)).collect()
    }
}

/// `inf ‖x₁‖_p² + ‖x₂‖_w² + ‖x₃‖_w² + ‖x₄‖_2²` (square-rooted) over `Ψ(x) = y`
/// computed on the sum side: `y` is pulled back to `L_p` and split among
/// `L_p + L_w d^β + d^β L_w + d^β L_2 d^β`.
pub fn k_sum_norm(y: &ComplexMatrix, d: &Density, p: Exponent, opts: &SolverOptions) -> Result<OptimizerReport> {
    check(d, p)?;
    let (a, _) = powers(p);
    let dinv = d.pow(-a)?;
    let z = &dinv * y * &dinv;
    let comps = Components::new(d, p)?;
    sum_norm(&z, &comps.weighted(), Combine::Euclidean, opts)
}

/// Quotient norm of `tuple` in `(L_p ⊕_2 L_w ⊕_2 L_w ⊕_2 L_2) / ker Ψ`, minimizing over
/// the kernel `{x₁ = −(x₂ d^β + d^β x₃ + d^β x₄ d^β)}`; the gap comes from a dual certificate.
pub fn k_quotient_norm(tuple: &[ComplexMatrix; 4], d: &Density, p: Exponent, opts: &SolverOptions) -> Result<OptimizerReport> {
    check(d, p)?;
    let n = d.dim();
    check_tuple(tuple, n)?;
    let (_, beta) = powers(p);
    let b = d.pow(beta)?;
    let e = exponents(p)?;
    let z = embedded_parts(tuple, &b).iter().fold(ComplexMatrix::zeros(n, n), |acc, v| acc + v);
    let scale = tuple.iter().map(|x| x.norm()).fold(0.0, f64::max);
    let zf = z.norm();
    if zf <= 1e-14 * scale || zf == 0.0 {
        return Ok(OptimizerReport::exact(0.0, opts.seed));
    }
    let assemble = |free: &[ComplexMatrix]| -> [ComplexMatrix; 4] {
        let x1 = &z - &free[0] * &b - &b * &free[1] - &b * &free[2] * &b;
        [x1, free[0].clone(), free[1].clone(), free[2].clone()]
    };
    let exact = |t: &[ComplexMatrix; 4]| -> f64 {
        t.iter().zip(e).map(|(x, ex)| schatten_norm(x, ex).unwrap_or(f64::INFINITY).powi(2)).sum::<f64>().sqrt()
    };
    let shapes = [(n, n); 3];
    let mut vars = pack(&[&tuple[1], &tuple[2], &tuple[3]]);
    let mut best_t = assemble(&unpack(&vars, &shapes));
    let mut best = exact(&best_t);
    let mut iterations = 0;
    for &rel in &[1e-2, 1e-4, 1e-6, 1e-8, 1e-10] {
        let eps = rel * zf;
        let objective = |w: &[f64]| -> (f64, Vec<f64>) {
            let t = assemble(&unpack(w, &shapes));
            let mut val = 0.0;
            let mut g = Vec::with_capacity(4);
            for (x, ex) in t.iter().zip(e) {
                let (v, gr) = schatten_value_grad(x, ex, eps);
                val += v * v;
                g.push(gr.scale(2.0 * v));
            }
            let d2 = &g[1] - &g[0] * &b;
            let d3 = &g[2] - &b * &g[0];
            let d4 = &g[3] - &b * &g[0] * &b;
            (val, pack(&[&d2, &d3, &d4]))
        };
        let m = lbfgs(&objective, vars.clone(), opts.max_iter as u64, 1e-14 * zf.max(1.0));
        iterations += m.iterations;
        vars = m.x;
        let t = assemble(&unpack(&vars, &shapes));
        let val = exact(&t);
        if val < best {
            best = val;
            best_t = t;
        }
    }
    let comps = Components::new(d, p)?;
    let lower = dual_lower_bound(&z, &embedded_parts(&best_t, &b), &comps.weighted(), Combine::Euclidean);
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

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matcore::{c, random_matrix_rng, random_state_rng, real_diag};
    use crate::rng::stream;
    use approx::assert_relative_eq;

    fn f(p: f64) -> Exponent {
        Exponent::Finite(p)
    }

    #[test]
    fn scalar_quotient() {
        let d = Density::from_diagonal(&[2.5]).unwrap();
        for p in [1.0, 1.25, 1.5, 2.0] {
            let t = [c(1.0), c(-0.5), c(2.0), c(0.25)].map(|v| ComplexMatrix::from_element(1, 1, v));
            let b = 2.5f64.powf(0.5 / p - 0.25);
            let z = 1.0 - 0.5 * b + 2.0 * b + 0.25 * b * b;
            let expected = z.abs() / (1.0 + b * b);
            let q = k_quotient_norm(&t, &d, f(p), &SolverOptions::default()).unwrap();
            assert_relative_eq!(q.value, expected, max_relative = 1e-8);
            let y = psi_map(&t, &d, f(p)).unwrap();
            let s = k_sum_norm(&y, &d, f(p), &SolverOptions::default()).unwrap();
            assert_relative_eq!(s.value, expected, max_relative = 1e-6);
        }
    }

    #[test]
    fn kernel_elements_vanish() {
        let mut r = stream(70, "ker");
        let d = random_state_rng(&mut r, 2);
        let b = d.pow(0.5 / 1.5 - 0.25).unwrap();
        let x2 = random_matrix_rng(&mut r, 2, 2);
        let x3 = random_matrix_rng(&mut r, 2, 2);
        let x4 = random_matrix_rng(&mut r, 2, 2);
        let x1 = -(&x2 * &b + &b * &x3 + &b * &x4 * &b);
        let q = k_quotient_norm(&[x1, x2, x3, x4], &d, f(1.5), &SolverOptions::default()).unwrap();
        assert_eq!(q.value, 0.0);
    }

    #[test]
    fn hilbertian_case() {
        // at p = 2 every summand is Hilbert–Schmidt and β = 0
        let mut r = stream(71, "hs");
        let d = random_state_rng(&mut r, 3);
        let t = [(); 4].map(|_| random_matrix_rng(&mut r, 3, 3));
        let z = t.iter().fold(ComplexMatrix::zeros(3, 3), |a, x| a + x);
        let q = k_quotient_norm(&t, &d, f(2.0), &SolverOptions::default()).unwrap();
        assert_relative_eq!(q.value, z.norm() / 2.0, max_relative = 1e-8);
        assert!(q.converged);
    }

    /// Compass search over the diagonal kernel coordinates.
    fn pattern_search(obj: impl Fn(&[f64]) -> f64, mut x: Vec<f64>) -> f64 {
        let mut best = obj(&x);
        let mut step = 1.0;
        while step > 1e-9 {
            let mut moved = false;
            for i in 0..x.len() {
                for s in [step, -step] {
                    x[i] += s;
                    let v = obj(&x);
                    if v < best {
                        best = v;
                        moved = true;
                    } else {
                        x[i] -= s;
                    }
                }
            }
            if !moved {
                step /= 2.0;
            }
        }
        best
    }

    #[test]
    fn diagonal_case_matches_search() {
        let dv = [0.3, 0.7];
        let d = Density::from_diagonal(&dv).unwrap();
        let t = [real_diag(&[1.0, -0.4]), real_diag(&[0.3, 0.8]), real_diag(&[-0.2, 0.5]), real_diag(&[0.6, 0.1])];
        for p in [1.25, 1.5] {
            let beta = 0.5 / p - 0.25;
            let bd: Vec<f64> = dv.iter().map(|v| v.powf(beta)).collect();
            let z: Vec<f64> =
                (0..2).map(|k| t[0][(k, k)].re + bd[k] * (t[1][(k, k)].re + t[2][(k, k)].re) + bd[k] * bd[k] * t[3][(k, k)].re).collect();
            let w = 1.0 / (0.5 / p + 0.25);
            let lp = |v: &[f64], q: f64| v.iter().map(|a| a.abs().powf(q)).sum::<f64>().powf(1.0 / q);
            let obj = |x: &[f64]| {
                let (x2, x3, x4) = (&x[0..2], &x[2..4], &x[4..6]);
                let x1: Vec<f64> = (0..2).map(|k| z[k] - bd[k] * (x2[k] + x3[k]) - bd[k] * bd[k] * x4[k]).collect();
                (lp(&x1, p).powi(2) + lp(x2, w).powi(2) + lp(x3, w).powi(2) + lp(x4, 2.0).powi(2)).sqrt()
            };
            let oracle = pattern_search(obj, vec![0.0; 6]);
            let q = k_quotient_norm(&t, &d, f(p), &SolverOptions::default()).unwrap();
            assert_relative_eq!(q.value, oracle, max_relative = 1e-4);
        }
    }

    #[test]
    fn quotient_equals_sum() {
        let mut r = stream(72, "qs");
        for p in [1.25, 1.5, 2.0] {
            let d = random_state_rng(&mut r, 2);
            let t = [(); 4].map(|_| random_matrix_rng(&mut r, 2, 2));
            let q = k_quotient_norm(&t, &d, f(p), &SolverOptions::default()).unwrap();
            let s = k_sum_norm(&psi_map(&t, &d, f(p)).unwrap(), &d, f(p), &SolverOptions::default()).unwrap();
            assert!(q.converged && s.converged, "{q:?} {s:?}");
            assert_relative_eq!(q.value, s.value, max_relative = 1e-4);
        }
    }

    #[test]
    fn rejects_bad_inputs() {
        let d = Density::from_diagonal(&[1.0, 0.0]).unwrap();
        let t = [(); 4].map(|_| ComplexMatrix::identity(2, 2));
        assert!(matches!(k_quotient_norm(&t, &d, f(1.5), &SolverOptions::default()), Err(Error::NonInvertible)));
        let d = Density::uniform_state(2);
        assert!(k_quotient_norm(&t, &d, f(3.0), &SolverOptions::default()).is_err());
    }
}
