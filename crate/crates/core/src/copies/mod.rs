//! Independent copies in tensor powers of `M ⊕ M`, sign symmetrization,
//! Rosenthal-type bounds and Poisson/central-limit moment combinatorics.

mod montecarlo;
mod partitions;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exponent::Exponent;
use crate::matcore::{self, ComplexMatrix, Density};
use crate::normlib::{oh_lp_norm, schatten_norm, sum_norm, Combine, NormComponent, OptimizerReport, SolverOptions, WeightedSchatten};

pub use montecarlo::{bootstrap_ci, gaussian_abs_moment, rosenthal_classical_mc, Distribution, McReport};
pub use partitions::{
    clt_moment_finite_s, clt_moment_kronecker, clt_moment_limit, clt_moment_simulated, falling_coefficient,
    poisson_moment, stirling2, touchard, SetPartition, MAX_ORDER,
};

pub const DEFAULT_CAP: usize = 4096;

/// `k` copies of a base algebra `M_n` with state `d`, either plain or
/// symmetrized as `(x, −x) ∈ M ⊕ M` with state `½(φ ⊕ φ)`.
#[derive(Clone, Debug)]
pub struct CopySystem {
    slot_state: Density,
    base_dim: usize,
    copies: usize,
    symmetrized: bool,
}

impl CopySystem {
    pub fn new(d: &Density, copies: usize, symmetrized: bool) -> Result<CopySystem> {
        CopySystem::with_cap(d, copies, symmetrized, DEFAULT_CAP)
    }

    pub fn with_cap(d: &Density, copies: usize, symmetrized: bool, cap: usize) -> Result<CopySystem> {
        if !d.is_state() {
            return Err(Error::NotDensity(format!("copies need a state, mass {}", d.mass())));
        }
        if copies == 0 {
            return Err(Error::Invalid("at least one copy".into()));
        }
        let n = d.dim();
        let slot = if symmetrized { 2 * n } else { n };
        let ambient = (slot as f64).powi(copies as i32);
        if ambient > cap as f64 {
            return Err(Error::Cap(format!("ambient dimension {slot}^{copies} exceeds {cap}")));
        }
        let slot_state = if symmetrized {
            Density::new(matcore::direct_sum(d.matrix(), d.matrix()).unscale(2.0))?
        } else {
            d.clone()
        };
        Ok(CopySystem { slot_state, base_dim: n, copies, symmetrized })
    }

    pub fn copies(&self) -> usize {
        self.copies
    }

    pub fn base_dim(&self) -> usize {
        self.base_dim
    }

    pub fn symmetrized(&self) -> bool {
        self.symmetrized
    }

    pub fn slot_dim(&self) -> usize {
        self.slot_state.dim()
    }

    pub fn ambient_dim(&self) -> usize {
        self.slot_dim().pow(self.copies as u32)
    }

    pub fn slot_state(&self) -> &Density {
        &self.slot_state
    }

    pub fn product_state(&self) -> Result<Density> {
        Density::new(self.product_power(1.0)?)
    }

    /// `(⊗ ρ)^a = ⊗ ρ^a`.
    pub fn product_power(&self, a: f64) -> Result<ComplexMatrix> {
        let f = self.slot_state.pow(a)?;
        matcore::tensor_power(&vec![f; self.copies])
    }

    /// `(x, −x)` or `x`.
    pub fn slot_element(&self, x: &ComplexMatrix) -> Result<ComplexMatrix> {
        if x.shape() != (self.base_dim, self.base_dim) {
            return Err(Error::Dimension(format!("copies of {}x{} matrices", self.base_dim, self.base_dim)));
        }
        Ok(if self.symmetrized { matcore::direct_sum(x, &(-x)) } else { x.clone() })
    }

    /// `1 ⊗ … ⊗ y ⊗ … ⊗ 1` with `y` in slot `j` (1-based).
    pub fn embed_slot(&self, y: &ComplexMatrix, j: usize) -> Result<ComplexMatrix> {
        if j == 0 || j > self.copies {
            return Err(Error::Invalid(format!("slot {j} outside 1..={}", self.copies)));
        }
        let id = ComplexMatrix::identity(self.slot_dim(), self.slot_dim());
        let factors: Vec<ComplexMatrix> = (1..=self.copies).map(|i| if i == j { y.clone() } else { id.clone() }).collect();
        matcore::tensor_power(&factors)
    }

    pub fn embed_copy(&self, x: &ComplexMatrix, j: usize) -> Result<ComplexMatrix> {
        self.embed_slot(&self.slot_element(x)?, j)
    }

    /// `Σ_j ε_j π_j(x)`.
    pub fn signed_sum(&self, x: &ComplexMatrix, signs: Option<&SignPattern>) -> Result<ComplexMatrix> {
        if let Some(s) = signs {
            if s.len() != self.copies {
                return Err(Error::Dimension(format!("{} signs for {} copies", s.len(), self.copies)));
            }
        }
        let n = self.ambient_dim();
        let mut out = ComplexMatrix::zeros(n, n);
        for j in 1..=self.copies {
            let e = signs.map_or(1.0, |s| s.get(j - 1));
            out += self.embed_copy(x, j)?.scale(e);
        }
        Ok(out)
    }

    /// `(⊗ρ)^a (Σ_j ε_j π_j(x)) (⊗ρ)^a`, assembled slot by slot.
    pub fn weighted_signed_sum(&self, x: &ComplexMatrix, signs: Option<&SignPattern>, a: f64) -> Result<ComplexMatrix> {
        if let Some(s) = signs {
            if s.len() != self.copies {
                return Err(Error::Dimension(format!("{} signs for {} copies", s.len(), self.copies)));
            }
        }
        let h = self.slot_state.pow(a)?;
        let hh = &h * &h;
        let hyh = &h * self.slot_element(x)? * &h;
        let n = self.ambient_dim();
        let mut out = ComplexMatrix::zeros(n, n);
        for j in 1..=self.copies {
            let e = signs.map_or(1.0, |s| s.get(j - 1));
            let factors: Vec<ComplexMatrix> = (1..=self.copies).map(|i| if i == j { hyh.clone() } else { hh.clone() }).collect();
            out += matcore::tensor_power(&factors)?.scale(e);
        }
        Ok(out)
    }
}

/// A vector of signs `ε ∈ {±1}^k`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SignPattern(Vec<i8>);

impl SignPattern {
    pub fn new(signs: Vec<i8>) -> Result<SignPattern> {
        if signs.iter().any(|s| *s != 1 && *s != -1) {
            return Err(Error::Invalid("signs must be ±1".into()));
        }
        Ok(SignPattern(signs))
    }

    pub fn all_plus(k: usize) -> SignPattern {
        SignPattern(vec![1; k])
    }

    /// All `2^k` patterns; bit `j` of the index set means `ε_j = −1`.
    pub fn enumerate(k: usize) -> Vec<SignPattern> {
        (0..1usize << k).map(|b| SignPattern((0..k).map(|j| if b >> j & 1 == 1 { -1 } else { 1 }).collect())).collect()
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn get(&self, j: usize) -> f64 {
        self.0[j] as f64
    }

    pub fn negated(&self) -> SignPattern {
        SignPattern(self.0.iter().map(|s| -s).collect())
    }
}

impl std::fmt::Display for SignPattern {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        for s in &self.0 {
            f.write_str(if *s > 0 { "+" } else { "-" })?;
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum VectorMode {
    #[default]
    Plain,
    OhValued,
}

/// `‖Σ_j ε_j π_j(x)‖_{L_p}` under the product state (plain), or the `L_p(OH_k)`
/// norm of the family `(π_j(x))_j` (OH-valued).
pub fn sum_copies_norm(
    x: &ComplexMatrix,
    sys: &CopySystem,
    p: Exponent,
    signs: Option<&SignPattern>,
    mode: VectorMode,
    opts: &SolverOptions,
) -> Result<f64> {
    p.require_norm_range()?;
    match mode {
        VectorMode::Plain => schatten_norm(&sys.weighted_signed_sum(x, signs, p.inv() / 2.0)?, p),
        VectorMode::OhValued => {
            let family = (1..=sys.copies())
                .map(|j| Ok(sys.embed_copy(x, j)?.scale(signs.map_or(1.0, |s| s.get(j - 1)))))
                .collect::<Result<Vec<_>>>()?;
            Ok(oh_lp_norm(&family, &sys.product_state()?, p, opts)?.value)
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SignSymmetryReport {
    pub copies: usize,
    pub p: Exponent,
    pub base_value: f64,
    pub patterns: Vec<(String, f64)>,
    pub min_ratio: f64,
    pub max_ratio: f64,
    pub pass: bool,
}

/// Ratios `‖Σ ε_j π_j(x)‖_p / ‖Σ π_j(x)‖_p` for every sign pattern.
pub fn sign_symmetry_check(x: &ComplexMatrix, sys: &CopySystem, p: Exponent) -> Result<SignSymmetryReport> {
    if !sys.symmetrized() {
        return Err(Error::Invalid("sign symmetry needs symmetrized copies".into()));
    }
    if sys.copies() > 8 {
        return Err(Error::Cap("exhaustive sign enumeration stops at k = 8".into()));
    }
    p.require_norm_range()?;
    let norm = |s: &SignPattern| -> Result<f64> { schatten_norm(&sys.weighted_signed_sum(x, Some(s), p.inv() / 2.0)?, p) };
    let base_value = norm(&SignPattern::all_plus(sys.copies()))?;
    let mut patterns = Vec::new();
    let (mut lo, mut hi) = (f64::INFINITY, 0.0_f64);
    for s in SignPattern::enumerate(sys.copies()) {
        let v = norm(&s)?;
        let ratio = if base_value == 0.0 { if v == 0.0 { 1.0 } else { f64::INFINITY } } else { v / base_value };
        lo = lo.min(ratio);
        hi = hi.max(ratio);
        patterns.push((s.to_string(), ratio));
    }
    let pass = lo >= 0.5 && hi <= 2.0;
    Ok(SignSymmetryReport { copies: sys.copies(), p, base_value, patterns, min_ratio: lo, max_ratio: hi, pass })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RosenthalReport {
    pub copies: usize,
    pub p: Exponent,
    pub lhs: f64,
    pub rhs: f64,
    pub ratio: f64,
    pub rhs_report: OptimizerReport,
}

/// `‖Σ_j π_j(x, −x)‖_p` against
/// `inf_{X = a + b + c} k^{1/p}‖a‖_p + √k ‖ρ^{-1/s} b‖_2 + √k ‖c ρ^{-1/s}‖_2`
/// on the Kosaki image `X` of `(x, −x)` in `L_p(M ⊕ M)`, `1/s = 1/p − 1/2`.
pub fn rosenthal_bound_check(x: &ComplexMatrix, sys: &CopySystem, p: Exponent, opts: &SolverOptions) -> Result<RosenthalReport> {
    if !sys.symmetrized() {
        return Err(Error::Invalid("the Rosenthal check uses symmetrized copies".into()));
    }
    if p.inv() < 0.5 - 1e-15 || p.inv() > 1.0 + 1e-15 {
        return Err(Error::Exponent(format!("the Rosenthal check needs 1 ≤ p ≤ 2, got {p}")));
    }
    let rho = sys.slot_state();
    if !rho.is_invertible() {
        return Err(Error::NonInvertible);
    }
    let k = sys.copies() as f64;
    let lhs = sum_copies_norm(x, sys, p, None, VectorMode::Plain, opts)?;
    let h = rho.pow(p.inv() / 2.0)?;
    let big_x = &h * sys.slot_element(x)? * &h;
    let w = rho.pow(-(p.inv() - 0.5))?;
    let two = Exponent::Finite(2.0);
    let diag = WeightedSchatten::new(p, k.powf(p.inv()))?;
    let row = WeightedSchatten::new(two, k.sqrt())?.with_left(w.clone())?;
    let col = WeightedSchatten::new(two, k.sqrt())?.with_right(w)?;
    let comps: Vec<(&dyn NormComponent, f64)> = vec![(&diag, 1.0), (&row, 1.0), (&col, 1.0)];
    let rhs_report = sum_norm(&big_x, &comps, Combine::Sum, opts)?;
    let rhs = rhs_report.value;
    let ratio = if rhs == 0.0 { if lhs == 0.0 { 1.0 } else { f64::INFINITY } } else { lhs / rhs };
    Ok(RosenthalReport { copies: sys.copies(), p, lhs, rhs, ratio, rhs_report })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matcore::{c, random_matrix_rng, random_state_rng};
    use crate::normlib::state_lp_norm;
    use crate::rng::stream;
    use approx::assert_relative_eq;

    fn f(p: f64) -> Exponent {
        Exponent::Finite(p)
    }

    #[test]
    fn embedding_basics() {
        let mut r = stream(90, "emb");
        let d = random_state_rng(&mut r, 2);
        let x = random_matrix_rng(&mut r, 2, 2);
        let y = random_matrix_rng(&mut r, 2, 2);
        let one = CopySystem::new(&d, 1, true).unwrap();
        assert_eq!(one.embed_copy(&x, 1).unwrap(), matcore::direct_sum(&x, &(-&x)));
        let sys = CopySystem::new(&d, 3, true).unwrap();
        assert_eq!(sys.ambient_dim(), 64);
        let a = sys.embed_copy(&x, 1).unwrap();
        let b = sys.embed_copy(&y, 2).unwrap();
        assert!((&a * &b - &b * &a).norm() < 1e-12);
        let state = sys.product_state().unwrap();
        assert!(state.functional(&a).norm() < 1e-15);
        // factorization of the product state over distinct slots
        let plain = CopySystem::new(&d, 3, false).unwrap();
        let ps = plain.product_state().unwrap();
        let a = plain.embed_copy(&x, 1).unwrap();
        let b = plain.embed_copy(&y, 3).unwrap();
        let lhs = ps.functional(&(&a * &b));
        assert!((lhs - d.functional(&x) * d.functional(&y)).norm() < 1e-12);
        assert!(sys.embed_copy(&x, 4).is_err());
        assert!(CopySystem::new(&d, 7, true).is_err());
    }

    #[test]
    fn slotwise_weighting_matches_products() {
        let mut r = stream(93, "weighted");
        let d = random_state_rng(&mut r, 2);
        let x = random_matrix_rng(&mut r, 2, 2);
        let sys = CopySystem::new(&d, 3, true).unwrap();
        let signs = SignPattern::new(vec![1, -1, 1]).unwrap();
        let h = sys.product_power(0.3).unwrap();
        let direct = &h * sys.signed_sum(&x, Some(&signs)).unwrap() * &h;
        let slotwise = sys.weighted_signed_sum(&x, Some(&signs), 0.3).unwrap();
        assert!((direct - slotwise).norm() < 1e-12);
    }

    #[test]
    fn copy_norms() {
        let mut r = stream(91, "norms");
        let d = random_state_rng(&mut r, 2);
        let x = random_matrix_rng(&mut r, 2, 2);
        let o = SolverOptions::default();
        let one = CopySystem::new(&d, 1, true).unwrap();
        let v = sum_copies_norm(&x, &one, f(1.5), None, VectorMode::Plain, &o).unwrap();
        let direct = state_lp_norm(&matcore::direct_sum(&x, &(-&x)), one.slot_state(), f(1.5)).unwrap();
        assert_relative_eq!(v, direct, max_relative = 1e-12);
        let sys = CopySystem::new(&d, 3, true).unwrap();
        assert_eq!(sum_copies_norm(&ComplexMatrix::zeros(2, 2), &sys, f(1.0), None, VectorMode::Plain, &o).unwrap(), 0.0);
        let scalar = CopySystem::new(&Density::identity(1), 5, true).unwrap();
        let z = ComplexMatrix::from_element(1, 1, c(-1.25));
        let v = sum_copies_norm(&z, &scalar, f(2.0), None, VectorMode::Plain, &o).unwrap();
        assert_relative_eq!(v, 5f64.sqrt() * 1.25, max_relative = 1e-12);
        let v = sum_copies_norm(&z, &scalar, f(2.0), None, VectorMode::OhValued, &o).unwrap();
        assert_relative_eq!(v, 5f64.sqrt() * 1.25, max_relative = 1e-9);
    }

    #[test]
    fn sign_patterns() {
        assert_eq!(SignPattern::enumerate(3).len(), 8);
        assert_eq!(SignPattern::enumerate(2)[1].to_string(), "-+");
        assert!(SignPattern::new(vec![1, 0]).is_err());
        let mut r = stream(92, "sign");
        for k in 1..=4 {
            let d = random_state_rng(&mut r, 2);
            let x = random_matrix_rng(&mut r, 2, 2);
            let sys = CopySystem::new(&d, k, true).unwrap();
            let rep = sign_symmetry_check(&x, &sys, f(1.0)).unwrap();
            assert!(rep.pass);
            assert_eq!(rep.patterns.len(), 1 << k);
            assert_relative_eq!(rep.patterns[0].1, 1.0, max_relative = 1e-15);
            let table: std::collections::HashMap<_, _> = rep.patterns.iter().cloned().collect();
            for s in SignPattern::enumerate(k) {
                assert_relative_eq!(table[&s.to_string()], table[&s.negated().to_string()], max_relative = 1e-10);
            }
        }
    }

    #[test]
    fn rosenthal_scalar_hilbert_case() {
        let z = ComplexMatrix::from_element(1, 1, c(0.8));
        for k in 1..=4 {
            let sys = CopySystem::new(&Density::identity(1), k, true).unwrap();
            let rep = rosenthal_bound_check(&z, &sys, f(2.0), &SolverOptions::default()).unwrap();
            assert_relative_eq!(rep.lhs, (k as f64).sqrt() * 0.8, max_relative = 1e-12);
            assert_relative_eq!(rep.ratio, 1.0, max_relative = 1e-6);
        }
        let sys = CopySystem::new(&Density::identity(1), 2, true).unwrap();
        let rep = rosenthal_bound_check(&ComplexMatrix::zeros(1, 1), &sys, f(1.5), &SolverOptions::default()).unwrap();
        assert_eq!((rep.lhs, rep.rhs), (0.0, 0.0));
    }

    #[test]
    fn rosenthal_single_copy_is_comparable() {
        let mut r = stream(93, "ros");
        let d = random_state_rng(&mut r, 2);
        let x = random_matrix_rng(&mut r, 2, 2);
        let sys = CopySystem::new(&d, 1, true).unwrap();
        for p in [1.0, 1.5, 2.0] {
            let rep = rosenthal_bound_check(&x, &sys, f(p), &SolverOptions::default()).unwrap();
            // the first component alone gives rhs ≤ lhs when k = 1
            assert!(rep.rhs <= rep.lhs * (1.0 + 1e-9));
            assert!(rep.ratio >= 1.0 - 1e-9 && rep.ratio < 10.0, "{rep:?}");
        }
    }
}
