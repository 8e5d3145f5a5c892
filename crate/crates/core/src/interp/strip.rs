use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const DEFAULT_GRID: usize = 4096;
/// Boundary lines are truncated to `|Im z| ≤ HALF_WIDTH`.
pub const HALF_WIDTH: f64 = 40.0;

/// Discretized harmonic measure of `θ` on the two boundary lines.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StripMeasure {
    pub theta: f64,
    /// Ordinates `y` of the boundary points `iy` and `1 + iy`.
    pub nodes: Vec<f64>,
    /// Quadrature weights on `Re z = 0`; they sum to about `1 − θ`.
    pub weights0: Vec<f64>,
    /// Quadrature weights on `Re z = 1`; they sum to about `θ`.
    pub weights1: Vec<f64>,
    /// Bound on the measure lost outside `|y| ≤ HALF_WIDTH`.
    pub tail_bound: f64,
}

/// Poisson kernel of the upper half-plane at `w0`, evaluated at real `t`.
fn half_plane_poisson(w0: Complex64, t: f64) -> f64 {
    w0.im / (PI * (Complex64::new(t, 0.0) - w0).norm_sqr())
}

/// Density of the harmonic measure of `θ` at the boundary point `z`, pulled
/// back through `z ↦ exp(iπz)`.
fn pulled_back_density(theta: f64, z: Complex64) -> f64 {
    let i_pi = Complex64::new(0.0, PI);
    let w0 = (i_pi * theta).exp();
    let w = (i_pi * z).exp();
    let jac = (i_pi * w).norm();
    half_plane_poisson(w0, w.re) * jac
}

pub fn strip_measure(theta: f64, grid: usize) -> Result<StripMeasure> {
    if !(theta > 0.0 && theta < 1.0) {
        return Err(Error::Invalid(format!("theta = {theta} outside (0,1)")));
    }
    if grid < 64 {
        return Err(Error::Invalid(format!("grid size {grid} below 64")));
    }
    let h = 2.0 * HALF_WIDTH / (grid - 1) as f64;
    let nodes: Vec<f64> = (0..grid).map(|k| -HALF_WIDTH + k as f64 * h).collect();
    let trap = |k: usize| if k == 0 || k == grid - 1 { 0.5 * h } else { h };
    let weights0 = nodes.iter().enumerate().map(|(k, &y)| trap(k) * pulled_back_density(theta, Complex64::new(0.0, y))).collect();
    let weights1 = nodes.iter().enumerate().map(|(k, &y)| trap(k) * pulled_back_density(theta, Complex64::new(1.0, y))).collect();
    let q = (-PI * HALF_WIDTH).exp();
    let tail_bound = 4.0 * (PI * theta).sin() / PI * q * (1.0 + q * q) / (1.0 - q * q).powi(2);
    Ok(StripMeasure { theta, nodes, weights0, weights1, tail_bound })
}

impl StripMeasure {
    pub fn masses(&self) -> (f64, f64) {
        (self.weights0.iter().sum(), self.weights1.iter().sum())
    }

    pub fn points0(&self) -> impl Iterator<Item = (Complex64, f64)> + '_ {
        self.nodes.iter().zip(&self.weights0).map(|(&y, &w)| (Complex64::new(0.0, y), w))
    }

    pub fn points1(&self) -> impl Iterator<Item = (Complex64, f64)> + '_ {
        self.nodes.iter().zip(&self.weights1).map(|(&y, &w)| (Complex64::new(1.0, y), w))
    }

    /// `line,y,weight` rows for inspection.
    pub fn to_csv(&self) -> String {
        let mut s = String::from("line,y,weight\n");
        for (y, w) in self.nodes.iter().zip(&self.weights0) {
            s.push_str(&format!("0,{y},{w}\n"));
        }
        for (y, w) in self.nodes.iter().zip(&self.weights1) {
            s.push_str(&format!("1,{y},{w}\n"));
        }
        s
    }

    pub fn from_csv(theta: f64, text: &str) -> Result<StripMeasure> {
        let mut nodes = Vec::new();
        let mut weights0 = Vec::new();
        let mut weights1 = Vec::new();
        for (i, line) in text.lines().enumerate().skip(1) {
            let cols: Vec<&str> = line.split(',').collect();
            let parse = |s: &str| s.trim().parse::<f64>().map_err(|_| Error::Parse(format!("quadrature row {i}")));
            if cols.len() != 3 {
                return Err(Error::Parse(format!("quadrature row {i}")));
            }
            let (y, w) = (parse(cols[1])?, parse(cols[2])?);
            match cols[0] {
                "0" => {
                    nodes.push(y);
                    weights0.push(w);
                }
                "1" => weights1.push(w),
                _ => return Err(Error::Parse(format!("quadrature row {i}"))),
            }
        }
        if nodes.len() < 64 || weights1.len() != nodes.len() {
            return Err(Error::Parse("truncated quadrature".into()));
        }
        let q = (-PI * HALF_WIDTH).exp();
        let tail_bound = 4.0 * (PI * theta).sin() / PI * q * (1.0 + q * q) / (1.0 - q * q).powi(2);
        Ok(StripMeasure { theta, nodes, weights0, weights1, tail_bound })
    }
}

/// `f(z) = Σ c_a e^{a z}`, stored as `(a, c_a)` pairs.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct ExpSum {
    pub terms: Vec<(Complex64, Complex64)>,
}

impl ExpSum {
    pub fn constant(c: Complex64) -> ExpSum {
        ExpSum { terms: vec![(Complex64::new(0.0, 0.0), c)] }
    }

    pub fn exp(a: Complex64) -> ExpSum {
        ExpSum { terms: vec![(a, Complex64::new(1.0, 0.0))] }
    }

    pub fn eval(&self, z: Complex64) -> Complex64 {
        self.terms.iter().map(|&(a, c)| c * (a * z).exp()).sum()
    }

    fn check(&self) -> Result<()> {
        if self.terms.len() > 16 {
            return Err(Error::UnsupportedBasis(format!("{} terms (at most 16)", self.terms.len())));
        }
        for &(a, c) in &self.terms {
            if !(a.re.is_finite() && a.im.is_finite() && c.re.is_finite() && c.im.is_finite()) {
                return Err(Error::UnsupportedBasis("non-finite coefficient".into()));
            }
            if a.norm() > 4.0 {
                return Err(Error::UnsupportedBasis(format!("|a| = {} above 4", a.norm())));
            }
            // boundary growth e^{|Im a| |y|} must stay well below the e^{-π|y|} decay
            if a.im.abs() > 2.0 {
                return Err(Error::UnsupportedBasis(format!("|Im a| = {} above 2", a.im.abs())));
            }
        }
        Ok(())
    }
}

/// `∫ f dμ_θ` over both boundary lines.
pub fn reproduce(f: &ExpSum, mu: &StripMeasure) -> Result<Complex64> {
    f.check()?;
    let s0: Complex64 = mu.points0().map(|(z, w)| f.eval(z) * w).sum();
    let s1: Complex64 = mu.points1().map(|(z, w)| f.eval(z) * w).sum();
    Ok(s0 + s1)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn ci(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn masses_split_as_one_minus_theta_and_theta() {
        for k in 1..=9 {
            let theta = k as f64 / 10.0;
            let mu = strip_measure(theta, DEFAULT_GRID).unwrap();
            let (m0, m1) = mu.masses();
            assert!((m0 - (1.0 - theta)).abs() < 1e-8, "θ = {theta}: {m0}");
            assert!((m1 - theta).abs() < 1e-8, "θ = {theta}: {m1}");
            assert!(mu.weights0.iter().chain(&mu.weights1).all(|&w| w > 0.0));
        }
    }

    #[test]
    fn density_matches_closed_expression() {
        // the pulled-back kernel agrees with sin πθ / (2(cosh πy ∓ cos πθ))
        let theta: f64 = 0.3;
        for y in [-2.0, -0.5, 0.0, 0.7, 3.0] {
            let rho0 = (PI * theta).sin() / (2.0 * ((PI * y).cosh() - (PI * theta).cos()));
            let rho1 = (PI * theta).sin() / (2.0 * ((PI * y).cosh() + (PI * theta).cos()));
            assert_relative_eq!(pulled_back_density(theta, ci(0.0, y)), rho0, max_relative = 1e-12);
            assert_relative_eq!(pulled_back_density(theta, ci(1.0, y)), rho1, max_relative = 1e-12);
        }
    }

    #[test]
    fn reproduces_exponentials() {
        let mu = strip_measure(0.5, DEFAULT_GRID).unwrap();
        let got = reproduce(&ExpSum::exp(ci(1.0, 0.0)), &mu).unwrap();
        assert!((got - ci(0.5f64.exp(), 0.0)).norm() < 1e-6);
        let mu = strip_measure(1.0 / 3.0, DEFAULT_GRID).unwrap();
        let got = reproduce(&ExpSum::exp(ci(0.0, 1.0)), &mu).unwrap();
        assert!((got - ci(0.0, 1.0 / 3.0).exp()).norm() < 1e-6);
        let got = reproduce(&ExpSum::constant(ci(1.0, 0.0)), &mu).unwrap();
        assert!((got - ci(1.0, 0.0)).norm() < 1e-8);
    }

    #[test]
    fn identity_function_as_a_limit() {
        let eps = 1e-3;
        let f = ExpSum { terms: vec![(ci(eps, 0.0), ci(1.0 / eps, 0.0)), (ci(0.0, 0.0), ci(-1.0 / eps, 0.0))] };
        for theta in [0.2, 0.5, 0.9] {
            let mu = strip_measure(theta, DEFAULT_GRID).unwrap();
            let got = reproduce(&f, &mu).unwrap();
            let exact = ((eps * theta).exp() - 1.0) / eps;
            assert!((got - ci(exact, 0.0)).norm() < 1e-6, "θ = {theta}: {got}");
            assert!((got.re - theta).abs() < eps * theta);
        }
    }

    #[test]
    fn reproduction_is_linear() {
        let mu = strip_measure(0.4, DEFAULT_GRID).unwrap();
        let f = ExpSum::exp(ci(1.5, -0.5));
        let g = ExpSum::exp(ci(-2.0, 1.0));
        let h = ExpSum { terms: vec![(ci(1.5, -0.5), ci(2.0, 1.0)), (ci(-2.0, 1.0), ci(-3.0, 0.0))] };
        let lhs = reproduce(&h, &mu).unwrap();
        let rhs = reproduce(&f, &mu).unwrap() * ci(2.0, 1.0) + reproduce(&g, &mu).unwrap() * ci(-3.0, 0.0);
        assert!((lhs - rhs).norm() < 1e-12 * lhs.norm().max(1.0));
    }

    #[test]
    fn rejects_bad_inputs() {
        assert!(strip_measure(0.0, 128).is_err());
        assert!(strip_measure(1.0, 128).is_err());
        assert!(strip_measure(0.5, 32).is_err());
        let mu = strip_measure(0.5, 128).unwrap();
        assert!(matches!(reproduce(&ExpSum::exp(ci(5.0, 0.0)), &mu), Err(Error::UnsupportedBasis(_))));
        assert!(matches!(reproduce(&ExpSum::exp(ci(0.0, 3.0)), &mu), Err(Error::UnsupportedBasis(_))));
    }

    #[test]
    fn csv_roundtrip() {
        let mu = strip_measure(0.25, 128).unwrap();
        let back = StripMeasure::from_csv(0.25, &mu.to_csv()).unwrap();
        assert_eq!(back, mu);
    }
}
