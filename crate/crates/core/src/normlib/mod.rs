//! Norm solvers: Schatten and Kosaki-embedded L_p norms, factorization
//! infima, conditional suprema, square functions, OH-valued and sum norms.

mod conditional;
mod factorization;
mod oh;
mod sum;

pub use conditional::{conditional_lp_norm, conditional_norm};
pub use factorization::factorization_norm;
pub use oh::{
    mixed_theta_norm, oh_closed_form, oh_lp_norm, oh_valued_norm, rc_square_norm, Side,
};
pub use sum::{sum_norm, Combine, NormComponent, WeightedSchatten};
pub(crate) use sum::dual_lower_bound;

use nalgebra::DVector;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exponent::Exponent;
use crate::matcore::{self, ComplexMatrix, Density, MatrixJson, SubalgebraSpec};

/// Result of an iterative norm computation. Sup-type norms report a
/// certified lower bound, inf-type norms a certified upper bound.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OptimizerReport {
    pub value: f64,
    pub iterations: u64,
    pub duality_gap: Option<f64>,
    pub restarts: usize,
    pub converged: bool,
    pub seed: u64,
}

impl OptimizerReport {
    pub(crate) fn exact(value: f64, seed: u64) -> OptimizerReport {
        OptimizerReport { value, iterations: 0, duality_gap: Some(0.0), restarts: 0, converged: true, seed }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SolverOptions {
    pub seed: u64,
    pub restarts: usize,
    pub max_iter: usize,
    pub tol: f64,
}

impl Default for SolverOptions {
    fn default() -> Self {
        SolverOptions { seed: 0, restarts: 8, max_iter: 5000, tol: 1e-12 }
    }
}

/// Where the density sits around `x` in the Kosaki picture.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Placement {
    /// `d^{1/2p} x d^{1/2p}`
    #[default]
    Symmetric,
    /// `d^{1/p} x`
    Left,
    /// `x d^{1/p}`
    Right,
    /// `d^{1/4} x d^{1/4}`
    BothQuarter,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Exponents {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub p: Option<Exponent>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub q: Option<Exponent>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub u: Option<Exponent>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub v: Option<Exponent>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct DensityJson {
    pub matrix: MatrixJson,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mass: Option<f64>,
}

impl TryFrom<DensityJson> for Density {
    type Error = Error;

    fn try_from(dj: DensityJson) -> Result<Density> {
        let m = dj.matrix.to_matrix()?;
        match dj.mass {
            Some(mass) => Density::with_mass(m, mass),
            None => Density::new(m),
        }
    }
}

impl From<&Density> for DensityJson {
    fn from(d: &Density) -> DensityJson {
        DensityJson { matrix: MatrixJson::from_matrix(d.matrix()), mass: Some(d.mass()) }
    }
}

/// Which norm to compute.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct NormSpec {
    #[serde(default)]
    pub exponents: Exponents,
    #[serde(default = "one")]
    pub amplification: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub density: Option<DensityJson>,
    #[serde(default)]
    pub placement: Placement,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub subalgebra: Option<SubalgebraSpec>,
}

fn one() -> usize {
    1
}

impl NormSpec {
    pub fn conditional(u: Exponent, p: Exponent, v: Exponent, d: &Density, sub: SubalgebraSpec) -> NormSpec {
        NormSpec {
            exponents: Exponents { p: Some(p), q: None, u: Some(u), v: Some(v) },
            amplification: match sub {
                SubalgebraSpec::Scalars => 1,
                SubalgebraSpec::LeftMatrixFactor(m) => m,
            },
            density: Some(d.into()),
            placement: Placement::Symmetric,
            subalgebra: Some(sub),
        }
    }

    pub fn density(&self) -> Result<Option<Density>> {
        self.density.clone().map(Density::try_from).transpose()
    }

    /// `1/s = 1/u + 1/p + 1/v` for conditional norms.
    pub fn conditional_index(&self) -> Result<Exponent> {
        let e = &self.exponents;
        let (u, p, v) = match (e.u, e.p, e.v) {
            (Some(u), Some(p), Some(v)) => (u, p, v),
            _ => return Err(Error::Invalid("conditional norms need u, p and v".into())),
        };
        check_conditional(u, p, v)
    }

    /// `1/p = 1/u + 1/q + 1/v` for amalgamated norms, with `(1/u,1/v,1/q)` in the solid K.
    pub fn amalgamated_index(&self) -> Result<Exponent> {
        let e = &self.exponents;
        let (u, q, v) = match (e.u, e.q, e.v) {
            (Some(u), Some(q), Some(v)) => (u, q, v),
            _ => return Err(Error::Invalid("amalgamated norms need u, q and v".into())),
        };
        check_solid(u, v, q)?;
        Exponent::from_inv(u.inv() + q.inv() + v.inv())
    }
}

/// Membership in `K`: `2 ≤ u,v ≤ ∞`, `1 ≤ q ≤ ∞`, `1/u + 1/q + 1/v ≤ 1`.
pub fn check_solid(u: Exponent, v: Exponent, q: Exponent) -> Result<()> {
    let tol = 1e-12;
    if u.inv() > 0.5 + tol || v.inv() > 0.5 + tol || q.inv() > 1.0 + tol || u.inv() + v.inv() + q.inv() > 1.0 + tol {
        return Err(Error::OutsideSolid(format!("(u,v,q) = ({u},{v},{q})")));
    }
    Ok(())
}

/// Validates conditional indices and returns `s` with `1/s = 1/u + 1/p + 1/v`.
pub fn check_conditional(u: Exponent, p: Exponent, v: Exponent) -> Result<Exponent> {
    check_solid(u, v, p)?;
    Exponent::from_inv(u.inv() + p.inv() + v.inv())
}

fn is_finite(x: &ComplexMatrix) -> bool {
    x.iter().all(|z| z.re.is_finite() && z.im.is_finite())
}

pub fn singular_values(x: &ComplexMatrix) -> DVector<f64> {
    if x.nrows() == 0 || x.ncols() == 0 {
        return DVector::zeros(0);
    }
    // the SVD iteration does not terminate on NaN input
    if !is_finite(x) {
        return DVector::from_element(x.nrows().min(x.ncols()), f64::INFINITY);
    }
    x.clone().singular_values()
}

/// `(Σ σ_i^p)^{1/p}`, computed with a max-rescaling; `max σ` at `p = ∞`.
pub fn sv_norm(sv: &[f64], p: Exponent) -> f64 {
    let top = sv.iter().fold(0.0_f64, |m, &s| m.max(s.abs()));
    if top == 0.0 {
        return 0.0;
    }
    match p {
        Exponent::Infinite => top,
        Exponent::Finite(p) => top * sv.iter().map(|&s| (s.abs() / top).powf(p)).sum::<f64>().powf(1.0 / p),
    }
}

pub fn schatten_norm(x: &ComplexMatrix, p: Exponent) -> Result<f64> {
    p.require_norm_range()?;
    matcore::check_finite(x, "schatten input")?;
    if p == Exponent::Finite(2.0) {
        return Ok(x.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt());
    }
    Ok(sv_norm(singular_values(x).as_slice(), p))
}

/// Value and gradient `G` of `y ↦ ‖y‖_p` with `d‖y‖_p = Re tr(G* dy)`. Singular
/// values are smoothed to `(σ² + ε²)^{1/2}`; at `p = ∞` `G` is a top singular pair.
pub(crate) fn schatten_value_grad(y: &ComplexMatrix, p: Exponent, eps: f64) -> (f64, ComplexMatrix) {
    if !is_finite(y) {
        return (f64::INFINITY, ComplexMatrix::zeros(y.nrows(), y.ncols()));
    }
    let svd = y.clone().svd(true, true);
    let u = svd.u.unwrap();
    let vt = svd.v_t.unwrap();
    let sv = &svd.singular_values;
    let k = sv.len();
    let weights: Vec<f64>;
    let value;
    match p {
        Exponent::Infinite => {
            let (imax, &top) = sv.iter().enumerate().fold((0, &0.0), |a, b| if b.1 > a.1 { b } else { a });
            value = top;
            weights = (0..k).map(|i| if i == imax { 1.0 } else { 0.0 }).collect();
        }
        Exponent::Finite(p) => {
            let sm: Vec<f64> = sv.iter().map(|&s| (s * s + eps * eps).sqrt()).collect();
            value = sv_norm(&sm, Exponent::Finite(p));
            weights = if value == 0.0 {
                vec![0.0; k]
            } else {
                sv.iter()
                    .zip(&sm)
                    .map(|(&s, &t)| if t == 0.0 { 0.0 } else { (t / value).powf(p - 1.0) * s / t })
                    .collect()
            };
        }
    }
    let mut us = u.clone();
    for (j, w) in weights.iter().enumerate() {
        us.column_mut(j).iter_mut().for_each(|z| *z *= *w);
    }
    (value, us * vt)
}

/// Maximizer of `Re tr(a g)` over `‖a‖_r ≤ 1`; the maximum is `‖g‖_{r'}`.
pub fn holder_attainer(g: &ComplexMatrix, r: Exponent) -> ComplexMatrix {
    let svd = g.clone().svd(true, true);
    let u = svd.u.unwrap();
    let vt = svd.v_t.unwrap();
    let sv = &svd.singular_values;
    let k = sv.len();
    let rc = r.conjugate().expect("attainer exponent ≥ 1");
    let top = sv.max();
    let coeffs: Vec<f64> = if top == 0.0 {
        let n = k as f64;
        vec![n.powf(-r.inv()); k]
    } else {
        match rc {
            Exponent::Infinite => {
                let imax = sv.iter().enumerate().fold(0, |a, (i, &s)| if s > sv[a] { i } else { a });
                (0..k).map(|i| if i == imax { 1.0 } else { 0.0 }).collect()
            }
            Exponent::Finite(q) if r.is_infinite() || q == 1.0 => vec![1.0; k],
            Exponent::Finite(q) => {
                let nq = sv_norm(sv.as_slice(), rc);
                sv.iter().map(|&s| (s / nq).powf(q - 1.0)).collect()
            }
        }
    };
    let mut v = vt.adjoint();
    for (j, cf) in coeffs.iter().enumerate() {
        v.column_mut(j).iter_mut().for_each(|z| *z *= *cf);
    }
    v * u.adjoint()
}

/// Positive maximizer of `tr(P G)` over `P ≥ 0, ‖P‖_r ≤ 1` for `G ≥ 0`.
pub(crate) fn psd_attainer(g: &ComplexMatrix, r: Exponent) -> ComplexMatrix {
    let n = g.nrows();
    let (vals, vecs) = matcore::hermitian_eig(g);
    let vals = vals.map(|v| v.max(0.0));
    let top = vals.max();
    if r.is_infinite() {
        return ComplexMatrix::identity(n, n);
    }
    if top == 0.0 {
        return ComplexMatrix::identity(n, n).unscale((n as f64).powf(r.inv()));
    }
    let rc = r.conjugate().expect("r ≥ 1");
    match rc {
        Exponent::Infinite => {
            let v = vecs.column(n - 1).into_owned();
            &v * v.adjoint()
        }
        Exponent::Finite(q) => {
            let nq = sv_norm(vals.as_slice(), rc);
            matcore::spectral_apply(&vals, &vecs, |l| (l / nq).powf(q - 1.0))
        }
    }
}

/// Kosaki image of `x` for the given placement.
pub fn kosaki_image(x: &ComplexMatrix, d: &Density, p: Exponent, placement: Placement) -> Result<ComplexMatrix> {
    if x.nrows() != d.dim() || x.ncols() != d.dim() {
        return Err(Error::Dimension(format!("{}x{} against density of size {}", x.nrows(), x.ncols(), d.dim())));
    }
    let t = p.inv();
    Ok(match placement {
        Placement::Symmetric => {
            let h = d.pow(t / 2.0)?;
            &h * x * &h
        }
        Placement::Left => d.pow(t)? * x,
        Placement::Right => x * d.pow(t)?,
        Placement::BothQuarter => {
            let h = d.pow(0.25)?;
            &h * x * &h
        }
    })
}

/// `‖d^{1/2p} x d^{1/2p}‖_{S_p}`; the operator norm at `p = ∞`.
pub fn state_lp_norm(x: &ComplexMatrix, d: &Density, p: Exponent) -> Result<f64> {
    p.require_norm_range()?;
    schatten_norm(&kosaki_image(x, d, p, Placement::Symmetric)?, p)
}

/// Norm with a declared density placement.
pub fn placed_lp_norm(x: &ComplexMatrix, d: &Density, p: Exponent, placement: Placement) -> Result<f64> {
    p.require_norm_range()?;
    schatten_norm(&kosaki_image(x, d, p, placement)?, p)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matcore::{c, random_matrix_rng, random_state_rng, real_diag};
    use crate::rng::stream;
    use approx::assert_relative_eq;

    #[test]
    fn schatten_examples() {
        let i3 = ComplexMatrix::identity(3, 3);
        assert_relative_eq!(schatten_norm(&i3, Exponent::Finite(4.0)).unwrap(), 3f64.powf(0.25), epsilon = 1e-14);
        assert_relative_eq!(schatten_norm(&real_diag(&[3.0, 4.0]), Exponent::Finite(2.0)).unwrap(), 5.0, epsilon = 1e-14);
        assert!(schatten_norm(&i3, Exponent::Finite(0.5)).is_err());
        assert_relative_eq!(schatten_norm(&real_diag(&[3.0, -4.0]), Exponent::INF).unwrap(), 4.0, epsilon = 1e-14);
    }

    #[test]
    fn schatten_p2_is_frobenius_and_p1_is_trace_norm_of_psd() {
        let mut r = stream(0, "s");
        let g = random_matrix_rng(&mut r, 4, 4);
        let psd = &g * g.adjoint();
        assert_relative_eq!(
            schatten_norm(&psd, Exponent::Finite(1.0)).unwrap(),
            matcore::trace(&psd).re,
            max_relative = 1e-12
        );
    }

    #[test]
    fn state_lp_identity_cases() {
        let mut r = stream(1, "s");
        let d = random_state_rng(&mut r, 3);
        let one = ComplexMatrix::identity(3, 3);
        for p in [1.0, 1.5, 2.0, 3.0, 7.0] {
            assert_relative_eq!(state_lp_norm(&one, &d, Exponent::Finite(p)).unwrap(), 1.0, epsilon = 1e-12);
        }
        let x = random_matrix_rng(&mut r, 3, 3);
        assert_relative_eq!(
            state_lp_norm(&x, &d, Exponent::INF).unwrap(),
            schatten_norm(&x, Exponent::INF).unwrap(),
            epsilon = 1e-12
        );
        let h = d.pow(0.5).unwrap();
        let direct = (&h * x.adjoint() * &h * &x).trace().re.sqrt();
        assert_relative_eq!(state_lp_norm(&x, &d, Exponent::Finite(2.0)).unwrap(), direct, max_relative = 1e-12);
        let u = Density::uniform_state(3);
        for p in [1.0, 2.5, 4.0] {
            let lhs = state_lp_norm(&x, &u, Exponent::Finite(p)).unwrap();
            let rhs = 3f64.powf(-1.0 / p) * schatten_norm(&x, Exponent::Finite(p)).unwrap();
            assert_relative_eq!(lhs, rhs, max_relative = 1e-12);
        }
    }

    #[test]
    fn attainer_reaches_dual_norm() {
        let mut r = stream(2, "a");
        let g = random_matrix_rng(&mut r, 4, 4);
        for rr in [Exponent::Finite(1.0), Exponent::Finite(1.7), Exponent::Finite(4.0), Exponent::INF] {
            let a = holder_attainer(&g, rr);
            assert!(schatten_norm(&a, rr).unwrap() <= 1.0 + 1e-12);
            let val = (&a * &g).trace().re;
            let dual = schatten_norm(&g, rr.conjugate().unwrap()).unwrap();
            assert_relative_eq!(val, dual, max_relative = 1e-10);
        }
    }

    #[test]
    fn psd_attainer_reaches_dual_norm() {
        let mut r = stream(3, "a");
        let g = random_matrix_rng(&mut r, 3, 3);
        let g = &g * g.adjoint();
        for rr in [Exponent::Finite(1.0), Exponent::Finite(2.0), Exponent::Finite(3.5), Exponent::INF] {
            let p = psd_attainer(&g, rr);
            assert!(schatten_norm(&p, rr).unwrap() <= 1.0 + 1e-12);
            assert_relative_eq!(
                (&p * &g).trace().re,
                schatten_norm(&g, rr.conjugate().unwrap()).unwrap(),
                max_relative = 1e-10
            );
        }
    }

    #[test]
    fn gradient_matches_finite_differences() {
        let mut r = stream(4, "g");
        let y = random_matrix_rng(&mut r, 3, 3);
        let dir = random_matrix_rng(&mut r, 3, 3);
        for p in [1.5, 2.0, 3.0] {
            let pe = Exponent::Finite(p);
            let (v, g) = schatten_value_grad(&y, pe, 0.0);
            let h = 1e-6;
            let vp = schatten_norm(&(&y + dir.scale(h)), pe).unwrap();
            let vm = schatten_norm(&(&y - dir.scale(h)), pe).unwrap();
            let fd = (vp - vm) / (2.0 * h);
            let an = (g.adjoint() * &dir).trace().re;
            assert_relative_eq!(v, schatten_norm(&y, pe).unwrap(), max_relative = 1e-12);
            assert_relative_eq!(fd, an, max_relative = 1e-6);
        }
    }

    #[test]
    fn solid_membership() {
        let f = Exponent::Finite;
        assert!(check_solid(f(4.0), f(4.0), f(2.0)).is_ok());
        assert!(check_solid(f(1.5), Exponent::INF, f(2.0)).is_err());
        assert!(check_solid(f(2.0), f(2.0), f(2.0)).is_err());
        assert_eq!(check_conditional(Exponent::INF, f(2.0), Exponent::INF).unwrap(), f(2.0));
    }

    #[test]
    fn spec_json_roundtrip() {
        let d = Density::uniform_state(2);
        let spec = NormSpec::conditional(Exponent::INF, Exponent::Finite(4.0), Exponent::Finite(4.0), &d, SubalgebraSpec::Scalars);
        let text = serde_json::to_string(&spec).unwrap();
        let back: NormSpec = serde_json::from_str(&text).unwrap();
        assert_eq!(back.exponents, spec.exponents);
        assert_relative_eq!(back.conditional_index().unwrap().value(), 2.0, epsilon = 1e-14);
        assert_eq!(back.density().unwrap().unwrap().matrix()[(0, 0)], c(0.5));
    }
}
