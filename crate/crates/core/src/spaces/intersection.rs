use serde::Serialize;

use crate::error::{Error, Result};
use crate::exponent::Exponent;
use crate::matcore::{ComplexMatrix, Density, SubalgebraSpec};
use crate::normlib::{conditional_norm, OptimizerReport, SolverOptions};

/// One scaled conditional norm inside an intersection.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Term {
    pub u: Exponent,
    pub v: Exponent,
    pub scale: f64,
    pub value: f64,
    pub converged: bool,
}

/// `max` of the scaled terms.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct IntersectionReport {
    pub value: f64,
    pub terms: Vec<Term>,
}

impl IntersectionReport {
    fn from_terms(terms: Vec<Term>) -> IntersectionReport {
        let value = terms.iter().map(|t| t.value).fold(0.0, f64::max);
        IntersectionReport { value, terms }
    }

    pub fn term(&self, u: Exponent, v: Exponent) -> Option<&Term> {
        self.terms.iter().find(|t| t.u == u && t.v == v)
    }
}

#[allow(clippy::too_many_arguments)]
fn scaled_term(
    x: &ComplexMatrix,
    d: &Density,
    m: usize,
    u: Exponent,
    p: Exponent,
    v: Exponent,
    copies: usize,
    opts: &SolverOptions,
) -> Result<Term> {
    let rep = conditional_norm(x, d, m, u, p, v, opts)?;
    let scale = (copies as f64).powf(u.inv() + p.inv() + v.inv());
    Ok(Term { u, v, scale, value: scale * rep.value, converged: rep.converged })
}

fn check_copies(n: usize) -> Result<()> {
    if n == 0 {
        return Err(Error::Invalid("copy count must be at least 1".into()));
    }
    Ok(())
}

/// `n^{1/u+1/v} sup ‖α x β‖_{L_ξ}` over the unit balls of `L_u(N)`, `L_v(N)`, `1/ξ = 1/u + 1/v`.
pub fn lambda_norm(
    x: &ComplexMatrix,
    d: &Density,
    sub: SubalgebraSpec,
    u: Exponent,
    v: Exponent,
    n: usize,
    opts: &SolverOptions,
) -> Result<OptimizerReport> {
    check_copies(n)?;
    let m = sub.factor_dim(x.nrows())?;
    let mut rep = conditional_norm(x, d, m, u, Exponent::INF, v, opts)?;
    let scale = (n as f64).powf(u.inv() + v.inv());
    rep.value *= scale;
    rep.duality_gap = rep.duality_gap.map(|g| g * scale);
    Ok(rep)
}

/// `max { ‖x‖_{Λ(u,v)} : u, v ∈ {4, ∞} }`.
pub fn j_infty2_norm(x: &ComplexMatrix, d: &Density, sub: SubalgebraSpec, n: usize, opts: &SolverOptions) -> Result<IntersectionReport> {
    check_copies(n)?;
    let m = sub.factor_dim(x.nrows())?;
    let four = Exponent::Finite(4.0);
    let mut terms = Vec::with_capacity(4);
    for (u, v) in [(Exponent::INF, Exponent::INF), (four, Exponent::INF), (Exponent::INF, four), (four, four)] {
        terms.push(scaled_term(x, d, m, u, Exponent::INF, v, n, opts)?);
    }
    Ok(IntersectionReport::from_terms(terms))
}

/// `max { n^{1/u+1/p+1/v} ‖x‖_{L_p^{(u,v)}(M_m ⊗ M, E)} : u, v ∈ {2r, ∞} }` with `1/r = 1/q − 1/p`.
#[allow(clippy::too_many_arguments)]
pub fn j_pq_norm(
    x: &ComplexMatrix,
    d: &Density,
    p: Exponent,
    q: Exponent,
    n: usize,
    m: usize,
    opts: &SolverOptions,
) -> Result<IntersectionReport> {
    check_copies(n)?;
    p.require_norm_range()?;
    q.require_norm_range()?;
    let ri = q.inv() - p.inv();
    if ri < -1e-15 {
        return Err(Error::Exponent(format!("J_(p,q) needs q ≤ p, got p = {p}, q = {q}")));
    }
    let r2 = Exponent::from_inv(ri.max(0.0) / 2.0)?;
    let mut choices = vec![Exponent::INF];
    if !r2.is_infinite() {
        choices.push(r2);
    }
    let mut terms = Vec::new();
    for &u in &choices {
        for &v in &choices {
            terms.push(scaled_term(x, d, m, u, p, v, n, opts)?);
        }
    }
    Ok(IntersectionReport::from_terms(terms))
}
