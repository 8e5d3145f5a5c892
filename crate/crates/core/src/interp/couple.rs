use nalgebra::DVector;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::strip::StripMeasure;
use crate::error::{Error, Result};
use crate::exponent::Exponent;
use crate::matcore::{self, ComplexMatrix, Density, ZERO};
use crate::normlib::schatten_norm;

/// The space `d^{left} S_p d^{right}`, normed by `‖d^{left} x d^{right}‖_{S_p}`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct WeightedEndpoint {
    pub p: Exponent,
    pub left: f64,
    pub right: f64,
}

impl WeightedEndpoint {
    pub fn norm(&self, x: &ComplexMatrix, d: &Density) -> Result<f64> {
        schatten_norm(&(d.pow(self.left)? * x * d.pow(self.right)?), self.p)
    }
}

/// Row, column and two-sided conditional couples with `1/2 = 1/p + 1/q`:
/// the sup formulas over `L_u(N)`, `L_v(N)` with
/// `Middle: (1/u,1/v) = (θ/q,(1−θ)/q)`, `Row: (θ/q, 0)`, `Column: (0, (1−θ)/q)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CondShape {
    Middle,
    Row,
    Column,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum CoupleSpec {
    Weighted { e0: WeightedEndpoint, e1: WeightedEndpoint, theta: f64 },
    Conditional { shape: CondShape, p: Exponent, theta: f64, m: usize },
}

impl CoupleSpec {
    pub fn theta(&self) -> f64 {
        match self {
            CoupleSpec::Weighted { theta, .. } | CoupleSpec::Conditional { theta, .. } => *theta,
        }
    }

    /// `(u, p, v)` of the conditional sup formula.
    pub fn conditional_indices(&self) -> Result<(Exponent, Exponent, Exponent)> {
        let CoupleSpec::Conditional { shape, p, theta, .. } = *self else {
            return Err(Error::Invalid("not a conditional couple".into()));
        };
        if p.inv() > 0.5 {
            return Err(Error::Exponent(format!("conditional couples need p ≥ 2, got {p}")));
        }
        let qi = 0.5 - p.inv();
        let (ui, vi) = match shape {
            CondShape::Middle => (theta * qi, (1.0 - theta) * qi),
            CondShape::Row => (theta * qi, 0.0),
            CondShape::Column => (0.0, (1.0 - theta) * qi),
        };
        Ok((Exponent::from_inv(ui)?, p, Exponent::from_inv(vi)?))
    }

    fn check_theta(&self) -> Result<()> {
        let t = self.theta();
        if !(0.0..=1.0).contains(&t) {
            return Err(Error::Invalid(format!("theta = {t} outside [0,1]")));
        }
        Ok(())
    }
}

/// Interpolated weighted endpoint: exponent and density powers move affinely.
fn interpolate(e0: &WeightedEndpoint, e1: &WeightedEndpoint, theta: f64) -> Result<WeightedEndpoint> {
    e0.p.require_norm_range()?;
    e1.p.require_norm_range()?;
    Ok(WeightedEndpoint {
        p: Exponent::from_inv((1.0 - theta) * e0.p.inv() + theta * e1.p.inv())?,
        left: (1.0 - theta) * e0.left + theta * e1.left,
        right: (1.0 - theta) * e0.right + theta * e1.right,
    })
}

/// Splits `x ∈ M_m ⊗ M_n` as `A ⊗ B` when it is an elementary tensor.
pub fn elementary_factors(x: &ComplexMatrix, m: usize, n: usize) -> Option<(ComplexMatrix, ComplexMatrix)> {
    if x.nrows() != m * n || x.ncols() != m * n {
        return None;
    }
    if m == 1 {
        return Some((ComplexMatrix::identity(1, 1), x.clone()));
    }
    if n == 1 {
        return Some((x.clone(), ComplexMatrix::identity(1, 1)));
    }
    // realignment: rows (i,j) of A, columns (k,l) of B
    let r = ComplexMatrix::from_fn(m * m, n * n, |a, b| x[((a / m) * n + b / n, (a % m) * n + b % n)]);
    let svd = r.svd(true, true);
    let sv = &svd.singular_values;
    let order: Vec<usize> = {
        let mut idx: Vec<usize> = (0..sv.len()).collect();
        idx.sort_by(|&a, &b| sv[b].total_cmp(&sv[a]));
        idx
    };
    let top = sv[order[0]];
    if top == 0.0 {
        return Some((ComplexMatrix::zeros(m, m), ComplexMatrix::zeros(n, n)));
    }
    if order.len() > 1 && sv[order[1]] > 1e-10 * top {
        return None;
    }
    let u = svd.u.unwrap();
    let vt = svd.v_t.unwrap();
    let k = order[0];
    let a = ComplexMatrix::from_fn(m, m, |i, j| u[(i * m + j, k)]);
    let b = ComplexMatrix::from_fn(n, n, |i, j| vt[(k, i * n + j)] * top);
    Some((a, b))
}

/// Closed-form value of the interpolation norm for the supported couples.
pub fn couple_norm_closed(x: &ComplexMatrix, couple: &CoupleSpec, d: &Density) -> Result<f64> {
    couple.check_theta()?;
    match couple {
        CoupleSpec::Weighted { e0, e1, theta } => {
            if x.nrows() != d.dim() || x.ncols() != d.dim() {
                return Err(Error::Dimension("couple input and density differ in size".into()));
            }
            interpolate(e0, e1, *theta)?.norm(x, d)
        }
        CoupleSpec::Conditional { m, .. } => {
            let (u, p, v) = couple.conditional_indices()?;
            let s = Exponent::from_inv(u.inv() + p.inv() + v.inv())?;
            let n = d.dim();
            let (a, b) = elementary_factors(x, *m, n)
                .ok_or_else(|| Error::NoClosedForm("conditional couple on a non-elementary tensor".into()))?;
            let left = d.pow(p.inv() / 2.0 + u.inv())?;
            let right = d.pow(p.inv() / 2.0 + v.inv())?;
            Ok(schatten_norm(&a, p)? * schatten_norm(&(left * b * right), s)?)
        }
    }
}

/// `base^{c + e z}` for a positive semidefinite `base`.
#[derive(Clone, Debug)]
pub struct PowerFactor {
    vals: DVector<f64>,
    vecs: ComplexMatrix,
    pub c: f64,
    pub e: f64,
}

impl PowerFactor {
    pub fn new(base: &ComplexMatrix, c: f64, e: f64) -> Result<PowerFactor> {
        let d = Density::new(base.clone())?;
        Ok(PowerFactor { vals: d.eigenvalues().clone(), vecs: d.eigenvectors().clone(), c, e })
    }

    fn eval(&self, z: Complex64) -> Result<ComplexMatrix> {
        let w = Complex64::new(self.c, 0.0) + z * self.e;
        let mut scaled = self.vecs.clone();
        for (j, &l) in self.vals.iter().enumerate() {
            let f = if l > 0.0 {
                (w * l.ln()).exp()
            } else if w.re > 0.0 {
                ZERO
            } else if w.norm() == 0.0 {
                matcore::ONE
            } else {
                return Err(Error::Infeasible("non-positive power of a singular factor".into()));
            };
            scaled.column_mut(j).iter_mut().for_each(|v| *v *= f);
        }
        Ok(scaled * self.vecs.adjoint())
    }
}

/// Analytic competitor `f(z) = s^{c+ez} · Π L_i^{c_i+e_i z} · W · Π R_j^{c_j+e_j z}`.
#[derive(Clone, Debug)]
pub struct PowerCompetitor {
    pub scalar: (f64, f64, f64),
    pub left: Vec<PowerFactor>,
    pub middle: ComplexMatrix,
    pub right: Vec<PowerFactor>,
}

impl PowerCompetitor {
    /// `f ≡ x`.
    pub fn constant(x: &ComplexMatrix) -> PowerCompetitor {
        PowerCompetitor { scalar: (1.0, 0.0, 0.0), left: vec![], middle: x.clone(), right: vec![] }
    }

    /// `f(z) = N^{1−p_θ/p(z)} d^{−a(z)} w |y|^{p_θ/p(z)} d^{−b(z)}` with
    /// `y = d^{a_θ} x d^{b_θ} = w|y|` and `N = ‖y‖_{p_θ}`; needs `d > 0`.
    pub fn optimal(x: &ComplexMatrix, e0: &WeightedEndpoint, e1: &WeightedEndpoint, theta: f64, d: &Density) -> Result<PowerCompetitor> {
        if !d.is_invertible() {
            return Err(Error::NonInvertible);
        }
        let mid = interpolate(e0, e1, theta)?;
        if mid.p.is_infinite() {
            return Err(Error::Infeasible("optimal competitor needs a finite interpolated exponent".into()));
        }
        let y = d.pow(mid.left)? * x * d.pow(mid.right)?;
        let norm = schatten_norm(&y, mid.p)?;
        if norm == 0.0 {
            return Ok(PowerCompetitor::constant(x));
        }
        let svd = y.clone().svd(true, true);
        let (u, vt) = (svd.u.unwrap(), svd.v_t.unwrap());
        let w = &u * &vt;
        let absy = vt.adjoint() * ComplexMatrix::from_diagonal(&svd.singular_values.map(matcore::c)) * &vt;
        let pt = mid.p.value();
        // p_θ / p(z) = p_θ ((1−z)/p₀ + z/p₁)
        let (c, e) = (pt * e0.p.inv(), pt * (e1.p.inv() - e0.p.inv()));
        let dm = d.matrix();
        Ok(PowerCompetitor {
            scalar: (norm, 1.0 - c, -e),
            left: vec![PowerFactor::new(dm, -e0.left, -(e1.left - e0.left))?],
            middle: w,
            right: vec![
                PowerFactor::new(&absy, c, e)?,
                PowerFactor::new(dm, -e0.right, -(e1.right - e0.right))?,
            ],
        })
    }

    pub fn eval(&self, z: Complex64) -> Result<ComplexMatrix> {
        let (s, c, e) = self.scalar;
        let sc = if s > 0.0 { ((Complex64::new(c, 0.0) + z * e) * s.ln()).exp() } else { ZERO };
        let mut out = self.middle.map(|v| v * sc);
        for f in self.left.iter().rev() {
            out = f.eval(z)? * out;
        }
        for f in &self.right {
            out *= f.eval(z)?;
        }
        Ok(out)
    }
}

/// F-norm `(∫ ‖f‖² dμ_θ)^{1/2}` of a competitor with `f(θ) = x`: an upper bound
/// for the interpolation norm of `x` in a weighted couple.
pub fn competitor_upper_bound(
    x: &ComplexMatrix,
    couple: &CoupleSpec,
    d: &Density,
    family: &PowerCompetitor,
    mu: &StripMeasure,
) -> Result<f64> {
    couple.check_theta()?;
    let CoupleSpec::Weighted { e0, e1, theta } = couple else {
        return Err(Error::Invalid("competitor bounds need weighted endpoints".into()));
    };
    if (mu.theta - theta).abs() > 1e-12 {
        return Err(Error::Invalid("measure and couple use different theta".into()));
    }
    let at = family.eval(Complex64::new(*theta, 0.0))?;
    if at.shape() != x.shape() {
        return Err(Error::Infeasible("competitor has the wrong shape".into()));
    }
    let scale = x.norm().max(1.0);
    let miss = (&at - x).norm();
    if miss > 1e-8 * scale {
        return Err(Error::Infeasible(format!("f(θ) misses x by {miss:e}")));
    }
    let mut total = 0.0;
    for (z, w) in mu.points0() {
        total += w * e0.norm(&family.eval(z)?, d)?.powi(2);
    }
    for (z, w) in mu.points1() {
        total += w * e1.norm(&family.eval(z)?, d)?.powi(2);
    }
    Ok(total.sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::interp::strip_measure;
    use crate::matcore::{random_matrix_rng, random_state_rng, real_diag};
    use crate::rng::stream;
    use approx::assert_relative_eq;

    fn we(p: f64, left: f64, right: f64) -> WeightedEndpoint {
        WeightedEndpoint { p: Exponent::from(p), left, right }
    }

    #[test]
    fn hilbert_couple_is_constant() {
        let mut r = stream(40, "s2");
        let d = random_state_rng(&mut r, 3);
        let x = random_matrix_rng(&mut r, 3, 3);
        for theta in [0.0, 0.3, 1.0] {
            let c = CoupleSpec::Weighted { e0: we(2.0, 0.0, 0.0), e1: we(2.0, 0.0, 0.0), theta };
            assert_relative_eq!(couple_norm_closed(&x, &c, &d).unwrap(), schatten_norm(&x, Exponent::Finite(2.0)).unwrap(), max_relative = 1e-12);
        }
    }

    #[test]
    fn diagonal_lp_couple() {
        let dvals = [0.5, 0.3, 0.2];
        let xvals = [1.5, -2.0, 0.25];
        let d = Density::from_diagonal(&dvals).unwrap();
        let x = real_diag(&xvals);
        let (p0, p1, theta) = (1.0, 4.0, 0.35);
        let c = CoupleSpec::Weighted { e0: we(p0, 0.5 / p0, 0.5 / p0), e1: we(p1, 0.5 / p1, 0.5 / p1), theta };
        let pt = 1.0 / ((1.0 - theta) / p0 + theta / p1);
        let direct: f64 = dvals.iter().zip(xvals).map(|(dk, xk)| dk * xk.abs().powf(pt)).sum::<f64>().powf(1.0 / pt);
        assert_relative_eq!(couple_norm_closed(&x, &c, &d).unwrap(), direct, max_relative = 1e-12);
    }

    #[test]
    fn log_convex_in_theta() {
        let dvals = [0.6, 0.3, 0.1];
        let d = Density::from_diagonal(&dvals).unwrap();
        let x = real_diag(&[0.2, 3.0, -1.0]);
        let e0 = we(1.0, 0.5, 0.5);
        let e1 = we(f64::INFINITY, 0.0, 0.0);
        let val = |t: f64| couple_norm_closed(&x, &CoupleSpec::Weighted { e0, e1, theta: t }, &d).unwrap().ln();
        for (a, b) in [(0.1, 0.5), (0.2, 0.9), (0.0, 1.0)] {
            let mid = 0.5 * (a + b);
            assert!(val(mid) <= 0.5 * (val(a) + val(b)) + 1e-12);
        }
    }

    #[test]
    fn elementary_tensor_detection() {
        let mut r = stream(41, "el");
        let a = random_matrix_rng(&mut r, 2, 2);
        let b = random_matrix_rng(&mut r, 3, 3);
        let (fa, fb) = elementary_factors(&a.kronecker(&b), 2, 3).unwrap();
        assert!((fa.kronecker(&fb) - a.kronecker(&b)).norm() < 1e-12);
        let x = random_matrix_rng(&mut r, 6, 6);
        assert!(elementary_factors(&x, 2, 3).is_none());
        let d = Density::uniform_state(3);
        let c = CoupleSpec::Conditional { shape: CondShape::Middle, p: Exponent::INF, theta: 0.5, m: 2 };
        assert!(matches!(couple_norm_closed(&x, &c, &d), Err(Error::NoClosedForm(_))));
    }

    #[test]
    fn constant_competitor_is_between_closed_form_and_max() {
        let mut r = stream(42, "const");
        let d = random_state_rng(&mut r, 3);
        let x = random_matrix_rng(&mut r, 3, 3);
        let (e0, e1) = (we(1.0, 0.5, 0.5), we(4.0, 0.125, 0.125));
        for theta in [0.25, 0.5, 0.75] {
            let c = CoupleSpec::Weighted { e0, e1, theta };
            let mu = strip_measure(theta, 1024).unwrap();
            let ub = competitor_upper_bound(&x, &c, &d, &PowerCompetitor::constant(&x), &mu).unwrap();
            let closed = couple_norm_closed(&x, &c, &d).unwrap();
            let mx = e0.norm(&x, &d).unwrap().max(e1.norm(&x, &d).unwrap());
            assert!(ub >= closed - 1e-6);
            assert!(ub <= mx * (1.0 + 1e-6));
        }
    }

    #[test]
    fn optimal_competitor_attains_the_closed_form() {
        let mut r = stream(43, "opt");
        let d = random_state_rng(&mut r, 3);
        let g = random_matrix_rng(&mut r, 3, 3);
        for x in [&g * g.adjoint(), g.clone()] {
            for (e0, e1, theta) in [
                (we(1.0, 0.5, 0.5), we(f64::INFINITY, 0.0, 0.0), 0.4),
                (we(2.0, 0.0, 0.5), we(4.0, 0.25, 0.0), 0.7),
            ] {
                let c = CoupleSpec::Weighted { e0, e1, theta };
                let mu = strip_measure(theta, 2048).unwrap();
                let f = PowerCompetitor::optimal(&x, &e0, &e1, theta, &d).unwrap();
                let ub = competitor_upper_bound(&x, &c, &d, &f, &mu).unwrap();
                let closed = couple_norm_closed(&x, &c, &d).unwrap();
                assert_relative_eq!(ub, closed, max_relative = 1e-6);
            }
        }
    }

    #[test]
    fn scalar_competitor_is_exact() {
        let x = ComplexMatrix::from_element(1, 1, Complex64::new(-2.5, 1.0));
        let d = Density::identity(1);
        let (e0, e1) = (we(1.0, 0.0, 0.0), we(3.0, 0.0, 0.0));
        let c = CoupleSpec::Weighted { e0, e1, theta: 0.6 };
        let mu = strip_measure(0.6, 1024).unwrap();
        let ub = competitor_upper_bound(&x, &c, &d, &PowerCompetitor::constant(&x), &mu).unwrap();
        assert_relative_eq!(ub, x[(0, 0)].norm(), max_relative = 1e-8);
    }

    #[test]
    fn infeasible_competitor_is_rejected() {
        let x = ComplexMatrix::identity(2, 2);
        let d = Density::uniform_state(2);
        let c = CoupleSpec::Weighted { e0: we(2.0, 0.0, 0.0), e1: we(2.0, 0.0, 0.0), theta: 0.5 };
        let mu = strip_measure(0.5, 128).unwrap();
        let wrong = PowerCompetitor::constant(&x.scale(2.0));
        assert!(matches!(competitor_upper_bound(&x, &c, &d, &wrong, &mu), Err(Error::Infeasible(_))));
    }
}
