//! Smooth minimization over complex matrices packed as real vectors.

use argmin::core::{CostFunction, Executor, Gradient, State, TerminationReason, TerminationStatus};
use argmin::solver::linesearch::MoreThuenteLineSearch;
use argmin::solver::quasinewton::LBFGS;
use num_complex::Complex64;

use crate::matcore::ComplexMatrix;

/// Real coordinates `[re..., im...]` of the column-major entries of each matrix.
pub(crate) fn pack(ms: &[&ComplexMatrix]) -> Vec<f64> {
    let mut v = Vec::new();
    for m in ms {
        v.extend(m.iter().map(|z| z.re));
        v.extend(m.iter().map(|z| z.im));
    }
    v
}

pub(crate) fn unpack(v: &[f64], shapes: &[(usize, usize)]) -> Vec<ComplexMatrix> {
    let mut out = Vec::with_capacity(shapes.len());
    let mut off = 0;
    for &(r, c) in shapes {
        let len = r * c;
        let re = &v[off..off + len];
        let im = &v[off + len..off + 2 * len];
        out.push(ComplexMatrix::from_iterator(r, c, (0..len).map(|k| Complex64::new(re[k], im[k]))));
        off += 2 * len;
    }
    out
}

struct Problem<'a> {
    f: &'a (dyn Fn(&[f64]) -> (f64, Vec<f64>) + Sync),
}

impl CostFunction for Problem<'_> {
    type Param = Vec<f64>;
    type Output = f64;

    fn cost(&self, p: &Self::Param) -> Result<f64, argmin::core::Error> {
        if p.iter().any(|v| !v.is_finite()) {
            return Ok(f64::INFINITY);
        }
        Ok((self.f)(p).0)
    }
}

impl Gradient for Problem<'_> {
    type Param = Vec<f64>;
    type Gradient = Vec<f64>;

    fn gradient(&self, p: &Self::Param) -> Result<Vec<f64>, argmin::core::Error> {
        if p.iter().any(|v| !v.is_finite()) {
            return Ok(vec![0.0; p.len()]);
        }
        Ok((self.f)(p).1)
    }
}

pub(crate) struct Minimum {
    pub x: Vec<f64>,
    #[allow(dead_code)]
    pub cost: f64,
    pub iterations: u64,
    pub converged: bool,
}

/// L-BFGS with a Moré–Thuente line search, run in chunks so that a failed
/// line search keeps the best point found so far.
pub(crate) fn lbfgs(
    f: &(dyn Fn(&[f64]) -> (f64, Vec<f64>) + Sync),
    x0: Vec<f64>,
    max_iters: u64,
    tol_grad: f64,
) -> Minimum {
    let mut best_x = x0;
    let mut best_cost = f(&best_x).0;
    let mut iterations = 0;
    let mut converged = false;
    const CHUNK: u64 = 200;
    while iterations < max_iters && !converged {
        let solver = match LBFGS::new(MoreThuenteLineSearch::new(), 12)
            .with_tolerance_grad(tol_grad)
            .and_then(|s| s.with_tolerance_cost(0.0))
        {
            Ok(s) => s,
            Err(_) => break,
        };
        let budget = CHUNK.min(max_iters - iterations);
        let run = Executor::new(Problem { f }, solver)
            .configure(|st| st.param(best_x.clone()).max_iters(budget))
            .run();
        let Ok(res) = run else { break };
        let st = res.state();
        iterations += st.get_iter().max(1);
        let improved = match (st.get_best_param(), st.get_best_cost()) {
            (Some(p), c) if c.is_finite() && c < best_cost => {
                let gain = best_cost - c;
                best_x = p.clone();
                best_cost = c;
                gain
            }
            _ => 0.0,
        };
        match st.get_termination_status() {
            TerminationStatus::Terminated(TerminationReason::SolverConverged) => converged = true,
            TerminationStatus::Terminated(TerminationReason::MaxItersReached) => {
                if improved <= 1e-15 * best_cost.abs().max(1e-300) {
                    break;
                }
            }
            _ => break,
        }
    }
    Minimum { x: best_x, cost: best_cost, iterations, converged }
}
