//! Intersection, sum, quotient and graph spaces over a weighted matrix algebra.

mod graph;
mod intersection;
mod quotient;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exponent::Exponent;
use crate::matcore::Density;

pub use graph::{graph_tensor_check, graph_tensor_norms, oh_graph_map, GraphTarget, GraphTensorReport, GraphTensorSample, OhGraphReport};
pub use intersection::{j_infty2_norm, j_pq_norm, lambda_norm, IntersectionReport, Term};
pub use quotient::{k_quotient_norm, k_sum_norm, psi_map};

#[derive(Deserialize)]
struct DiagonalWeightJson {
    gammas: Vec<f64>,
    p: Exponent,
}

/// A finite weight `ψ_n = Σ γ_k e_kk` together with the exponent `p` that fixes
/// the graph eigenvalues `λ_k = γ_k^{1/4 − 1/2p'}`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "DiagonalWeightJson")]
pub struct DiagonalWeight {
    gammas: Vec<f64>,
    p: Exponent,
}

impl TryFrom<DiagonalWeightJson> for DiagonalWeight {
    type Error = Error;
    fn try_from(j: DiagonalWeightJson) -> Result<DiagonalWeight> {
        DiagonalWeight::new(j.gammas, j.p)
    }
}

impl DiagonalWeight {
    pub fn new(gammas: Vec<f64>, p: Exponent) -> Result<DiagonalWeight> {
        if gammas.is_empty() {
            return Err(Error::Invalid("a weight needs at least one γ".into()));
        }
        if let Some(g) = gammas.iter().find(|g| !(**g > 0.0) || !g.is_finite()) {
            return Err(Error::Invalid(format!("γ = {g} is not positive")));
        }
        p.require_norm_range()?;
        Ok(DiagonalWeight { gammas, p })
    }

    pub fn gammas(&self) -> &[f64] {
        &self.gammas
    }

    pub fn p(&self) -> Exponent {
        self.p
    }

    pub fn n(&self) -> usize {
        self.gammas.len()
    }

    /// `k_n = Σ γ_k`.
    pub fn mass(&self) -> f64 {
        self.gammas.iter().sum()
    }

    /// Nearest integer to `k_n` (at least 1).
    pub fn rounded_mass(&self) -> usize {
        (self.mass().round() as usize).max(1)
    }

    /// `|k_n − round(k_n)| / k_n`.
    pub fn rounding_distortion(&self) -> f64 {
        (self.mass() - self.rounded_mass() as f64).abs() / self.mass()
    }

    pub fn lambda_exponent(&self) -> f64 {
        0.25 - (1.0 - self.p.inv()) / 2.0
    }

    pub fn lambdas(&self) -> Vec<f64> {
        let e = self.lambda_exponent();
        self.gammas.iter().map(|g| g.powf(e)).collect()
    }

    /// Density of `ψ_n`, of mass `k_n`.
    pub fn weight_density(&self) -> Density {
        Density::from_diagonal(&self.gammas).expect("positive diagonal")
    }

    /// The state `φ_n = ψ_n / k_n`.
    pub fn state(&self) -> Density {
        self.weight_density().normalized()
    }
}

/// Strictly positive graph eigenvalues.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GraphSpace {
    lambdas: Vec<f64>,
}

impl GraphSpace {
    pub fn new(lambdas: Vec<f64>) -> Result<GraphSpace> {
        if lambdas.is_empty() {
            return Err(Error::Invalid("empty graph".into()));
        }
        if let Some(l) = lambdas.iter().find(|l| !(**l > 0.0) || !l.is_finite()) {
            return Err(Error::Invalid(format!("graph eigenvalue {l} is not positive")));
        }
        Ok(GraphSpace { lambdas })
    }

    pub fn lambdas(&self) -> &[f64] {
        &self.lambdas
    }

    /// Replaces `λ_k` by `λ_k + ε_k`; the second value `(Σ ε_k^4)^{1/4}` bounds
    /// the resulting distortion.
    pub fn perturb(lambdas: &[f64], eps: &[f64]) -> Result<(GraphSpace, f64)> {
        if lambdas.len() != eps.len() {
            return Err(Error::Dimension("perturbation has the wrong length".into()));
        }
        if eps.iter().any(|e| *e < 0.0 || !e.is_finite()) || lambdas.iter().any(|l| *l < 0.0) {
            return Err(Error::Invalid("perturbations and eigenvalues must be non-negative".into()));
        }
        let moved: Vec<f64> = lambdas.iter().zip(eps).map(|(l, e)| l + e).collect();
        let bound = eps.iter().map(|e| e.powi(4)).sum::<f64>().powf(0.25);
        Ok((GraphSpace::new(moved)?, bound))
    }
}

/// Eigenvalues floored to a `δ`-grid.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Discretization {
    pub delta: f64,
    pub original: Vec<f64>,
    pub floored: Vec<f64>,
    /// `max √(1+λ²) / √(1+g²)`, at most `1 + δ`.
    pub distortion: f64,
    /// `max λ / g`
    pub raw_ratio: f64,
}

impl Discretization {
    pub fn weight(&self, p: Exponent) -> Result<DiagonalWeight> {
        DiagonalWeight::new(self.floored.clone(), p)
    }
}

pub fn discretize_spectrum(d: &Density, delta: f64) -> Result<Discretization> {
    if !(delta > 0.0) || !delta.is_finite() {
        return Err(Error::Invalid(format!("δ = {delta} must be positive")));
    }
    let original: Vec<f64> = d.eigenvalues().iter().copied().collect();
    let floored: Vec<f64> = original.iter().map(|&l| (l / delta).floor() * delta).collect();
    if let Some(l) = original.iter().zip(&floored).find(|(_, g)| **g <= 0.0).map(|(l, _)| l) {
        return Err(Error::Invalid(format!("eigenvalue {l} floors to 0 at δ = {delta}")));
    }
    let mut distortion = 1.0_f64;
    let mut raw_ratio = 1.0_f64;
    for (l, g) in original.iter().zip(&floored) {
        distortion = distortion.max(((1.0 + l * l) / (1.0 + g * g)).sqrt());
        raw_ratio = raw_ratio.max(l / g);
    }
    Ok(Discretization { delta, original, floored, distortion, raw_ratio })
}

/// Sizes along the chain `n ~ m ln m`, `k_n = ⌈n^α⌉`, `w_n = ⌈k_n^{γ k_n}⌉`, `M = m^{β m^α}`.
/// Large quantities are carried as natural logarithms.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DimensionBudget {
    pub m: u64,
    pub n: u64,
    pub k_n: u64,
    pub ln_w_n: f64,
    pub w_n: Option<f64>,
    pub ln_big_m: f64,
}

pub fn dimension_budget(m: u64, alpha: f64, beta: f64, gamma: f64) -> Result<DimensionBudget> {
    if m < 2 {
        return Err(Error::Invalid(format!("m = {m} must be at least 2")));
    }
    if !(alpha > 0.0 && beta > 0.0 && gamma > 0.0) || !(alpha.is_finite() && beta.is_finite() && gamma.is_finite()) {
        return Err(Error::Invalid("budget exponents must be positive".into()));
    }
    let mf = m as f64;
    let n = (mf * mf.ln()).ceil() as u64;
    let k_n = ((n as f64).powf(alpha) - 1e-9).ceil().max(1.0) as u64;
    let kf = k_n as f64;
    let ln_w_n = gamma * kf * kf.ln();
    let w_n = (ln_w_n < 700.0).then(|| ln_w_n.exp().ceil());
    let ln_big_m = beta * mf.powf(alpha) * mf.ln();
    Ok(DimensionBudget { m, n, k_n, ln_w_n, w_n, ln_big_m })
}
