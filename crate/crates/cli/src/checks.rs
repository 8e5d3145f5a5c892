//! The acceptance checks and the suites that group them.

use std::path::PathBuf;

use nclp_core::copies::{
    clt_moment_finite_s, clt_moment_simulated, poisson_moment, rosenthal_bound_check, rosenthal_classical_mc, sign_symmetry_check,
    CopySystem, Distribution,
};
use nclp_core::interp::{couple_norm_closed, reproduce, strip_measure, CondShape, CoupleSpec, ExpSum, StripMeasure, DEFAULT_GRID};
use nclp_core::matcore::{c, hermitian_eig, psd_power, random_matrix_rng, random_state_rng, random_unitary_rng, real_diag, trace};
use nclp_core::normlib::{conditional_norm, factorization_norm, schatten_norm, state_lp_norm};
use nclp_core::rng::{child_seed, stream};
use nclp_core::spaces::{graph_tensor_check, k_quotient_norm, k_sum_norm, oh_graph_map, psi_map, DiagonalWeight, GraphTarget};
use nclp_core::{ComplexMatrix, Density, Exponent, Result, SolverOptions};
use num_complex::Complex64;
use rand::Rng;
use serde::Serialize;

use crate::report::CheckOutcome;

/// Everything a check may depend on besides its own name.
#[derive(Clone, Debug, Default)]
pub struct Ctx {
    pub seed: u64,
    /// Replaces the primary tolerance of every check that has one.
    pub tol: Option<f64>,
    /// Directory for cached quadrature grids.
    pub cache_dir: Option<PathBuf>,
}

impl Ctx {
    pub fn new(seed: u64) -> Ctx {
        Ctx { seed, ..Ctx::default() }
    }

    pub fn tol(&self, default: f64) -> f64 {
        self.tol.unwrap_or(default)
    }

    pub fn rng(&self, check: &str) -> impl Rng {
        stream(self.seed, check)
    }

    pub fn opts(&self, check: &str) -> SolverOptions {
        SolverOptions { seed: child_seed(self.seed, check, 0), ..SolverOptions::default() }
    }

    /// Strip quadrature, read from or written to the cache directory when one is set.
    pub fn strip(&self, theta: f64, grid: usize) -> Result<StripMeasure> {
        let Some(dir) = &self.cache_dir else {
            return strip_measure(theta, grid);
        };
        let path = dir.join(format!("strip-{theta}-{grid}.csv"));
        if let Ok(text) = std::fs::read_to_string(&path) {
            if let Ok(mu) = StripMeasure::from_csv(theta, &text) {
                if mu.nodes.len() == grid {
                    return Ok(mu);
                }
            }
        }
        let mu = strip_measure(theta, grid)?;
        // a cache that cannot be written is only a lost speedup
        let _ = std::fs::create_dir_all(dir).and_then(|_| std::fs::write(&path, mu.to_csv()));
        Ok(mu)
    }
}

pub type CheckFn = fn(&Ctx) -> Result<CheckOutcome>;

/// `(name, acceptance number, function)` in acceptance order.
pub const CHECKS: [(&str, usize, CheckFn); 10] = [
    ("closed-forms", 1, closed_forms),
    ("harmonic-measure", 2, harmonic_measure),
    ("conditional-couples", 3, conditional_couples),
    ("graph-tensor", 4, graph_tensor),
    ("quotient-sum", 5, quotient_sum),
    ("sign-symmetry", 6, sign_symmetry),
    ("clt-moments", 7, clt_moments),
    ("classical-mc", 8, classical_mc),
    ("oh-graph", 9, oh_graph),
    ("transference", 10, transference),
];

pub const SUITES: [&str; 5] = ["closed-forms", "interpolation", "graphs", "copies", "all"];

pub fn suite_checks(suite: &str) -> Option<Vec<&'static str>> {
    let names: Vec<&str> = match suite {
        "closed-forms" => vec!["closed-forms"],
        "interpolation" => vec!["harmonic-measure", "conditional-couples"],
        "graphs" => vec!["graph-tensor", "quotient-sum", "oh-graph"],
        "copies" => vec!["sign-symmetry", "clt-moments", "classical-mc", "transference"],
        "all" => CHECKS.iter().map(|c| c.0).collect(),
        _ => return None,
    };
    Some(names)
}

pub fn find(name: &str) -> Option<CheckFn> {
    CHECKS.iter().find(|c| c.0 == name).map(|c| c.2)
}

/// Runs a check, turning an error into a failed outcome.
pub fn run(name: &str, ctx: &Ctx) -> CheckOutcome {
    match find(name) {
        None => CheckOutcome::failed(name, "unknown check".into()),
        Some(f) => f(ctx).unwrap_or_else(|e| CheckOutcome::failed(name, e.to_string())),
    }
}

fn fx(p: f64) -> Exponent {
    Exponent::Finite(p)
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs().max(1e-300)
}

fn details<T: Serialize>(v: &T) -> Option<serde_json::Value> {
    serde_json::to_value(v).ok()
}

fn random_psd<R: Rng + ?Sized>(r: &mut R, n: usize) -> ComplexMatrix {
    let g = random_matrix_rng(r, n, n);
    &g * g.adjoint()
}

/// Schatten oracle summing the square roots of the eigenvalues of `x* x`.
fn schatten_by_eig(x: &ComplexMatrix, p: Exponent) -> f64 {
    let gram = if x.nrows() < x.ncols() { x * x.adjoint() } else { x.adjoint() * x };
    let (vals, _) = hermitian_eig(&gram);
    let sv = vals.iter().map(|l| l.max(0.0).sqrt());
    match p {
        Exponent::Infinite => sv.fold(0.0, f64::max),
        Exponent::Finite(p) => sv.map(|s| s.powf(p)).sum::<f64>().powf(1.0 / p),
    }
}

/// Schatten oracle from nalgebra's own singular values.
fn schatten_by_svd(x: &ComplexMatrix, p: Exponent) -> f64 {
    let sv = x.singular_values();
    match p {
        Exponent::Infinite => sv.iter().cloned().fold(0.0, f64::max),
        Exponent::Finite(p) => sv.iter().map(|s| s.powf(p)).sum::<f64>().powf(1.0 / p),
    }
}

pub fn closed_forms(ctx: &Ctx) -> Result<CheckOutcome> {
    let name = "closed-forms";
    let mut out = CheckOutcome::new(name);
    let tol = ctx.tol(1e-12);
    let ident = ctx.tol(1e-8);
    let mut r = ctx.rng(name);
    let exps = [fx(1.0), fx(1.7), fx(2.0), fx(3.5), Exponent::INF];

    for (rows, cols) in [(1, 1), (2, 3), (3, 3), (4, 2), (5, 5), (6, 6), (6, 4)] {
        let x = random_matrix_rng(&mut r, rows, cols);
        for p in exps {
            let v = schatten_norm(&x, p)?;
            let item = format!("schatten {rows}x{cols} p={p}");
            out.at_most(&item, "svd-oracle-rel-err", rel(v, schatten_by_svd(&x, p)), tol);
            out.at_most(&item, "eig-oracle-rel-err", rel(v, schatten_by_eig(&x, p)), 1e3 * tol);
        }
    }
    out.at_most("schatten I_3 p=4", "abs-err", (schatten_norm(&ComplexMatrix::identity(3, 3), fx(4.0))? - 3f64.powf(0.25)).abs(), ident);
    out.at_most("schatten diag(3,4) p=2", "abs-err", (schatten_norm(&real_diag(&[3.0, 4.0]), fx(2.0))? - 5.0).abs(), ident);

    for n in [2, 4, 6] {
        let d = random_state_rng(&mut r, n);
        let x = random_matrix_rng(&mut r, n, n);
        let one = ComplexMatrix::identity(n, n);
        for p in exps {
            out.at_most(format!("state unit n={n} p={p}"), "abs-err", (state_lp_norm(&one, &d, p)? - 1.0).abs(), ident);
            let u = Density::uniform_state(n);
            let expected = (n as f64).powf(-p.inv()) * schatten_norm(&x, p)?;
            out.at_most(format!("state uniform n={n} p={p}"), "rel-err", rel(state_lp_norm(&x, &u, p)?, expected), ident);
        }
        let h = psd_power(d.matrix(), 0.5);
        let direct = trace(&(&h * x.adjoint() * &h * &x)).re.sqrt();
        out.at_most(format!("state trace n={n} p=2"), "rel-err", rel(state_lp_norm(&x, &d, fx(2.0))?, direct), ident);
    }

    let o = ctx.opts(name);
    for (n, u, v) in [(2, 4.0, 4.0), (3, 2.0, 6.0), (4, 3.0, 12.0), (3, 4.0, f64::INFINITY)] {
        let x = random_psd(&mut r, n);
        let (u, v) = (Exponent::from(u), Exponent::from(v));
        let p = Exponent::from_inv(u.inv() + v.inv())?;
        let rep = factorization_norm(&x, u, v, &o)?;
        out.at_most(format!("factorization psd n={n} u={u} v={v}"), "rel-err", rel(rep.value, schatten_norm(&x, p)?), 1e-6);
    }
    for n in [2, 3, 5] {
        let rep = factorization_norm(&ComplexMatrix::identity(n, n), fx(4.0), fx(4.0), &o)?;
        out.at_most(format!("factorization I_{n} u=v=4"), "rel-err", rel(rep.value, (n as f64).sqrt()), 1e-6);
    }

    for (m, n) in [(1, 3), (2, 2), (2, 3)] {
        let d = random_state_rng(&mut r, n);
        let x = random_matrix_rng(&mut r, m * n, m * n);
        for p in [fx(1.0), fx(2.0), fx(4.0), Exponent::INF] {
            let rep = conditional_norm(&x, &d, m, Exponent::INF, p, Exponent::INF, &o)?;
            let big = ComplexMatrix::identity(m, m).kronecker(d.matrix());
            let expected = schatten_norm(&(psd_power(&big, p.inv() / 2.0) * &x * psd_power(&big, p.inv() / 2.0)), p)?;
            out.at_most(format!("conditional u=v=inf m={m} n={n} p={p}"), "rel-err", rel(rep.value, expected), ident);
        }
    }
    // scalar subalgebra: unit-modulus scalars leave the weighted L_s norm
    let d = random_state_rng(&mut r, 3);
    let x = random_matrix_rng(&mut r, 3, 3);
    for (u, p, v) in [(4.0, 2.0, 4.0), (f64::INFINITY, 2.0, 4.0), (6.0, 3.0, f64::INFINITY)] {
        let (u, p, v) = (Exponent::from(u), Exponent::from(p), Exponent::from(v));
        let s = Exponent::from_inv(u.inv() + p.inv() + v.inv())?;
        let rep = conditional_norm(&x, &d, 1, u, p, v, &o)?;
        let placed = psd_power(d.matrix(), u.inv() + p.inv() / 2.0) * &x * psd_power(d.matrix(), p.inv() / 2.0 + v.inv());
        out.at_most(format!("conditional scalars u={u} p={p} v={v}"), "rel-err", rel(rep.value, schatten_norm(&placed, s)?), ident);
    }
    Ok(out)
}

/// `f(z) = Σ c_a e^{a z}` test functions with `|a| ≤ 4`, `|Im a| ≤ 2`.
fn test_functions() -> Vec<ExpSum> {
    let z = |re: f64, im: f64| Complex64::new(re, im);
    vec![
        ExpSum::constant(z(1.0, 0.0)),
        ExpSum::exp(z(1.0, 0.0)),
        ExpSum::exp(z(0.0, 1.0)),
        ExpSum::exp(z(-2.0, 0.5)),
        ExpSum::exp(z(3.0, -1.0)),
        ExpSum { terms: vec![(z(1.0, 1.0), z(0.5, -1.0)), (z(-1.0, 0.0), z(2.0, 0.0))] },
        ExpSum { terms: vec![(z(0.0, 2.0), z(1.0, 0.0)), (z(0.0, -2.0), z(1.0, 0.0)), (z(3.5, 0.0), z(0.0, 0.25))] },
        ExpSum { terms: vec![(z(-4.0, 0.0), z(1.0, 1.0)), (z(2.0, 1.5), z(-0.5, 0.0)), (z(0.5, -0.5), z(0.0, 3.0))] },
    ]
}

pub fn harmonic_measure(ctx: &Ctx) -> Result<CheckOutcome> {
    let mut out = CheckOutcome::new("harmonic-measure");
    let mass_tol = ctx.tol(1e-8);
    let fns = test_functions();
    for t in 1..=9 {
        let theta = t as f64 / 10.0;
        let mu = ctx.strip(theta, DEFAULT_GRID)?;
        let (m0, m1) = mu.masses();
        let item = format!("theta={theta}");
        out.at_most(&item, "mass0-err", (m0 - (1.0 - theta)).abs(), mass_tol);
        out.at_most(&item, "mass1-err", (m1 - theta).abs(), mass_tol);
        for (i, f) in fns.iter().enumerate() {
            let err = (reproduce(f, &mu)? - f.eval(Complex64::new(theta, 0.0))).norm();
            out.at_most(format!("theta={theta} f{i}"), "reproduction-err", err, 1e-6);
        }
    }
    Ok(out)
}

pub fn conditional_couples(ctx: &Ctx) -> Result<CheckOutcome> {
    let name = "conditional-couples";
    let mut out = CheckOutcome::new(name);
    let tol = ctx.tol(1e-3);
    let mut r = ctx.rng(name);
    let o = ctx.opts(name);
    let (m, n) = (2, 3);
    for theta in [0.25, 0.5, 0.75] {
        for p in [fx(3.0), fx(4.0), Exponent::INF] {
            let d = random_state_rng(&mut r, n);
            let x = random_matrix_rng(&mut r, m, m).kronecker(&random_matrix_rng(&mut r, n, n));
            for shape in [CondShape::Middle, CondShape::Row, CondShape::Column] {
                let couple = CoupleSpec::Conditional { shape, p, theta, m };
                let closed = couple_norm_closed(&x, &couple, &d)?;
                let (u, pp, v) = couple.conditional_indices()?;
                let opt = conditional_norm(&x, &d, m, u, pp, v, &o)?.value;
                let item = format!("theta={theta} p={p} {shape:?}").to_lowercase();
                out.at_most(&item, "rel-err", rel(opt, closed), tol);
                out.at_least(&item, "closed-minus-optimizer", closed - opt, -1e-9 * closed);
            }
        }
    }
    Ok(out)
}

pub fn graph_tensor(ctx: &Ctx) -> Result<CheckOutcome> {
    let name = "graph-tensor";
    let mut out = CheckOutcome::new(name);
    let mut r = ctx.rng(name);
    let mut worst = 0.0_f64;
    for draw in 0..25u64 {
        let n = 1 + (draw as usize % 4);
        let m = 1 + (draw as usize / 4) % 2;
        let lam: Vec<f64> = (0..n).map(|_| r.gen_range(0.5..2.0)).collect();
        let rep = graph_tensor_check(&lam, m, 2, child_seed(ctx.seed, name, draw), &ctx.opts(name))?;
        worst = worst.max(rep.max_deviation);
        out.at_most(format!("draw={draw} n={n} m={m}"), "max-ratio-deviation", rep.max_deviation, ctx.tol(1e-6));
    }
    out.log("all", "worst-deviation", worst);
    Ok(out)
}

/// Graph-tensor identity for one user-chosen size.
pub fn graph_tensor_custom(ctx: &Ctx, n: usize, m: usize, samples: usize) -> Result<CheckOutcome> {
    let name = "graph-tensor";
    let mut out = CheckOutcome::new(name);
    let mut r = ctx.rng(name);
    let lam: Vec<f64> = (0..n).map(|_| r.gen_range(0.5..2.0)).collect();
    let rep = graph_tensor_check(&lam, m, samples, child_seed(ctx.seed, name, 0), &ctx.opts(name))?;
    for (i, s) in rep.samples.iter().enumerate() {
        out.at_most(format!("sample={i}"), "ratio-deviation", (s.ratio - 1.0).abs(), ctx.tol(1e-6));
    }
    out.at_most("all", "max-ratio-deviation", rep.max_deviation, ctx.tol(1e-6));
    out.details = details(&rep);
    Ok(out)
}

pub fn quotient_sum(ctx: &Ctx) -> Result<CheckOutcome> {
    let name = "quotient-sum";
    let mut out = CheckOutcome::new(name);
    let tol = ctx.tol(1e-4);
    let mut r = ctx.rng(name);
    let o = ctx.opts(name);
    for i in 0..20 {
        let p = [fx(1.25), fx(1.5), fx(2.0)][i % 3];
        let n = 2 + i % 2;
        let gammas: Vec<f64> = (0..n).map(|_| r.gen_range(0.3..2.0)).collect();
        let d = DiagonalWeight::new(gammas, p)?.weight_density();
        let tuple: [ComplexMatrix; 4] = std::array::from_fn(|_| random_matrix_rng(&mut r, n, n));
        let y = psi_map(&tuple, &d, p)?;
        let q = k_quotient_norm(&tuple, &d, p, &o)?;
        let s = k_sum_norm(&y, &d, p, &o)?;
        let item = format!("instance={i} n={n} p={p}");
        out.at_most(&item, "rel-diff", rel(q.value, s.value), tol);
        for (label, rep) in [("quotient", &q), ("sum", &s)] {
            let gap = rep.duality_gap.unwrap_or(f64::NAN);
            out.require(&item, &format!("{label}-converged"), f64::from(u8::from(rep.converged)), rep.converged);
            out.at_most(&item, &format!("{label}-gap"), gap / rep.value.max(1e-300), tol);
            out.at_least(&item, &format!("{label}-gap-sign"), gap, 0.0);
        }
    }
    Ok(out)
}

pub fn sign_symmetry(ctx: &Ctx) -> Result<CheckOutcome> {
    let name = "sign-symmetry";
    let mut out = CheckOutcome::new(name);
    let mut r = ctx.rng(name);
    let mut violations = 0;
    for i in 0..50 {
        let k = 1 + i % 4;
        let p = [fx(1.0), fx(1.5), fx(2.0), fx(3.0), Exponent::INF][i % 5];
        let d = random_state_rng(&mut r, 2);
        let x = random_matrix_rng(&mut r, 2, 2);
        let sys = CopySystem::new(&d, k, true)?;
        let rep = sign_symmetry_check(&x, &sys, p)?;
        let item = format!("instance={i} k={k} p={p}");
        out.at_least(&item, "min-ratio", rep.min_ratio, 0.5);
        out.at_most(&item, "max-ratio", rep.max_ratio, 2.0);
        violations += usize::from(!rep.pass);
    }
    out.at_most("all", "violations", violations as f64, 0.0);
    Ok(out)
}

/// `T_m(k)` from `T_{m+1} = k Σ_i C(m,i) T_i`.
fn touchard_oracle(m: usize, k: f64) -> f64 {
    let mut t = vec![1.0];
    for j in 0..m {
        let mut binom = 1.0;
        let mut s = 0.0;
        for (i, ti) in t.iter().enumerate() {
            s += binom * ti;
            binom = binom * (j - i) as f64 / (i + 1) as f64;
        }
        t.push(k * s);
    }
    t[m]
}

pub fn clt_moments(ctx: &Ctx) -> Result<CheckOutcome> {
    let name = "clt-moments";
    let mut out = CheckOutcome::new(name);
    let tol = ctx.tol(1e-10);
    let mut r = ctx.rng(name);
    for m in 1..=4 {
        for s in 1..=5 {
            let d = random_state_rng(&mut r, 2);
            let xs: Vec<ComplexMatrix> = (0..m).map(|_| random_matrix_rng(&mut r, 2, 2)).collect();
            let fin = clt_moment_finite_s(&xs, &d, s)?;
            let sim = clt_moment_simulated(&xs, &d, s)?;
            let scale = xs.iter().map(|x| schatten_norm(x, Exponent::INF)).product::<Result<f64>>()?.max(1.0);
            out.at_most(format!("m={m} s={s}"), "abs-err", (fin - sim).norm() / scale, tol);
        }
    }
    for k in 1..=3 {
        let d = Density::identity(k);
        for m in 0..=6 {
            let v = poisson_moment(&vec![ComplexMatrix::identity(k, k); m], &d)?;
            let t = touchard_oracle(m, k as f64);
            out.require(format!("touchard m={m} k={k}"), "value", v.re, v.re == t && v.im == 0.0);
        }
    }
    Ok(out)
}

pub fn classical_mc(ctx: &Ctx) -> Result<CheckOutcome> {
    let name = "classical-mc";
    let mut out = CheckOutcome::new(name);
    let mut ratios = Vec::new();
    let mut reps = Vec::new();
    for (i, n) in [4usize, 16, 64].into_iter().enumerate() {
        let rep = rosenthal_classical_mc(Distribution::Gaussian, n, 2.0, 1.0, 100_000, child_seed(ctx.seed, name, i as u64))?;
        let item = format!("n={n}");
        out.log(&item, "ratio", rep.ratio);
        out.at_most(&item, "ci-rel-width", (rep.ci.1 - rep.ci.0) / rep.ratio, ctx.tol(0.05));
        ratios.push(rep.ratio);
        reps.push(rep);
    }
    let hi = ratios.iter().cloned().fold(0.0, f64::max);
    let lo = ratios.iter().cloned().fold(f64::INFINITY, f64::min);
    out.at_most("all", "ratio-spread", hi / lo, 5.0);
    out.details = details(&reps);
    Ok(out)
}

fn lambda_sequences<R: Rng>(r: &mut R) -> Vec<Vec<f64>> {
    let mut seqs = vec![
        vec![1.0],
        vec![0.3],
        vec![1.0; 4],
        (1..=6).map(|k| 2f64.powi(k)).collect(),
        (1..=5).map(|k| 0.5f64.powi(k)).collect(),
        vec![0.2, 5.0, 1.0],
    ];
    while seqs.len() < 10 {
        let n = r.gen_range(2..=6);
        seqs.push((0..n).map(|_| r.gen_range(0.25..4.0)).collect());
    }
    seqs
}

pub fn oh_graph(ctx: &Ctx) -> Result<CheckOutcome> {
    let name = "oh-graph";
    let mut out = CheckOutcome::new(name);
    let mut r = ctx.rng(name);
    for (i, lam) in lambda_sequences(&mut r).iter().enumerate() {
        for target in [GraphTarget::Row, GraphTarget::Column, GraphTarget::Oh] {
            let rep = oh_graph_map(lam, 2, target, 60, child_seed(ctx.seed, name, i as u64))?;
            let item = format!("seq={i} n={} {target:?}", lam.len()).to_lowercase();
            out.at_most(&item, "distortion-over-bound", rep.measured / rep.bound, 1.0 + 1e-12);
            out.at_most(&item, "projection", rep.projection, 1.0 + 1e-12);
        }
    }
    Ok(out)
}

/// OH graph map for one user-chosen length.
pub fn oh_graph_custom(ctx: &Ctx, n: usize, m: usize, samples: usize) -> Result<CheckOutcome> {
    let name = "oh-graph";
    let mut out = CheckOutcome::new(name);
    let mut r = ctx.rng(name);
    let lam: Vec<f64> = (0..n).map(|_| r.gen_range(0.25..4.0)).collect();
    let mut reps = Vec::new();
    for target in [GraphTarget::Row, GraphTarget::Column, GraphTarget::Oh] {
        let rep = oh_graph_map(&lam, m, target, samples, child_seed(ctx.seed, name, 0))?;
        let item = format!("{target:?}").to_lowercase();
        out.at_most(&item, "distortion-over-bound", rep.measured / rep.bound, 1.0 + 1e-12);
        out.at_most(&item, "projection", rep.projection, 1.0 + 1e-12);
        reps.push(rep);
    }
    out.details = details(&reps);
    Ok(out)
}

pub fn transference(ctx: &Ctx) -> Result<CheckOutcome> {
    let name = "transference";
    let mut out = CheckOutcome::new(name);
    let mut r = ctx.rng(name);
    let o = ctx.opts(name);
    let d = random_state_rng(&mut r, 2);
    let x = random_unitary_rng(&mut r, 2) * real_diag(&[1.0, 0.4]) * random_unitary_rng(&mut r, 2) + ComplexMatrix::from_element(2, 2, c(0.1));
    let mut reps = Vec::new();
    for p in [fx(1.0), fx(1.5), fx(2.0)] {
        for k in 2..=4 {
            let sys = CopySystem::new(&d, k, true)?;
            let rep = rosenthal_bound_check(&x, &sys, p, &o)?;
            let item = format!("k={k} p={p}");
            out.at_least(&item, "ratio-low", rep.ratio, 0.1);
            out.at_most(&item, "ratio-high", rep.ratio, 10.0);
            reps.push(rep);
        }
    }
    out.details = details(&reps);
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn touchard_oracle_values() {
        // Bell numbers and T_3(2) = 8 + 12 + 2
        assert_eq!(touchard_oracle(4, 1.0), 15.0);
        assert_eq!(touchard_oracle(6, 1.0), 203.0);
        assert_eq!(touchard_oracle(3, 2.0), 22.0);
        assert_eq!(touchard_oracle(0, 3.0), 1.0);
    }

    #[test]
    fn suites_cover_every_check() {
        let mut seen: Vec<&str> = SUITES[..4].iter().flat_map(|s| suite_checks(s).unwrap()).collect();
        seen.sort();
        let mut all = suite_checks("all").unwrap();
        all.sort();
        assert_eq!(seen, all);
        assert!(suite_checks("nope").is_none());
    }

    #[test]
    fn oracles_agree_on_a_fixed_matrix() {
        let x = real_diag(&[3.0, 4.0]);
        assert!((schatten_by_eig(&x, fx(2.0)) - 5.0).abs() < 1e-14);
        assert!((schatten_by_svd(&x, Exponent::INF) - 4.0).abs() < 1e-14);
    }
}
