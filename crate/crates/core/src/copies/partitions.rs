use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matcore::{self, ComplexMatrix, Density, ZERO};

/// Largest moment order handled by partition enumeration.
pub const MAX_ORDER: usize = 8;

/// A partition of `{0, …, m−1}` into blocks with increasing elements, blocks
/// ordered by their smallest element. Printed 1-based as `1|2 3|4`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct SetPartition {
    blocks: Vec<Vec<usize>>,
}

impl SetPartition {
    pub fn new(mut blocks: Vec<Vec<usize>>) -> Result<SetPartition> {
        let m: usize = blocks.iter().map(Vec::len).sum();
        let mut seen = vec![false; m];
        for b in &mut blocks {
            if b.is_empty() {
                return Err(Error::Invalid("empty block".into()));
            }
            b.sort_unstable();
            for &e in b.iter() {
                if e >= m || seen[e] {
                    return Err(Error::Invalid(format!("blocks do not partition 0..{m}")));
                }
                seen[e] = true;
            }
        }
        blocks.sort_by_key(|b| b[0]);
        Ok(SetPartition { blocks })
    }

    pub fn blocks(&self) -> &[Vec<usize>] {
        &self.blocks
    }

    pub fn len(&self) -> usize {
        self.blocks.len()
    }

    pub fn is_empty(&self) -> bool {
        self.blocks.is_empty()
    }

    pub fn order(&self) -> usize {
        self.blocks.iter().map(Vec::len).sum()
    }

    pub fn is_even(&self) -> bool {
        self.blocks.iter().all(|b| b.len() % 2 == 0)
    }

    /// All partitions of an `m`-element set, from restricted growth strings.
    pub fn all(m: usize) -> Vec<SetPartition> {
        let mut out = Vec::new();
        if m == 0 {
            out.push(SetPartition { blocks: vec![] });
            return out;
        }
        let mut a = vec![0usize; m];
        loop {
            let r = a.iter().max().unwrap() + 1;
            let mut blocks = vec![Vec::new(); r];
            for (i, &b) in a.iter().enumerate() {
                blocks[b].push(i);
            }
            out.push(SetPartition { blocks });
            // next restricted growth string
            let mut i = m - 1;
            loop {
                if i == 0 {
                    return out;
                }
                let cap = a[..i].iter().max().unwrap() + 1;
                if a[i] < cap {
                    a[i] += 1;
                    a[i + 1..].iter_mut().for_each(|v| *v = 0);
                    break;
                }
                i -= 1;
            }
        }
    }
}

impl fmt::Display for SetPartition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> =
            self.blocks.iter().map(|b| b.iter().map(|e| (e + 1).to_string()).collect::<Vec<_>>().join(" ")).collect();
        write!(f, "{}", parts.join("|"))
    }
}

impl FromStr for SetPartition {
    type Err = Error;
    fn from_str(s: &str) -> Result<SetPartition> {
        let blocks = s
            .split('|')
            .map(|b| {
                b.split_whitespace()
                    .map(|e| match e.parse::<usize>() {
                        Ok(v) if v >= 1 => Ok(v - 1),
                        _ => Err(Error::Parse(format!("bad partition element {e:?}"))),
                    })
                    .collect::<Result<Vec<_>>>()
            })
            .collect::<Result<Vec<_>>>()?;
        SetPartition::new(blocks)
    }
}

/// Stirling numbers of the second kind `S(m, r)` for `r = 0..=m`.
pub fn stirling2(m: usize) -> Vec<u64> {
    let mut row = vec![1u64];
    for i in 1..=m {
        let mut next = vec![0u64; i + 1];
        for r in 1..=i {
            let keep = if r < i { r as u64 * row[r] } else { 0 };
            next[r] = keep + row[r - 1];
        }
        row = next;
    }
    row
}

/// Touchard polynomial `T_m(k) = Σ_r S(m, r) k^r`.
pub fn touchard(m: usize, k: f64) -> f64 {
    stirling2(m).iter().enumerate().map(|(r, &s)| s as f64 * k.powi(r as i32)).sum()
}

fn check_family(xs: &[ComplexMatrix], d: &Density) -> Result<()> {
    if xs.len() > MAX_ORDER {
        return Err(Error::Cap(format!("moment order {} exceeds {MAX_ORDER}", xs.len())));
    }
    let n = d.dim();
    for x in xs {
        if x.shape() != (n, n) {
            return Err(Error::Dimension(format!("moment entries must be {n}x{n}")));
        }
        matcore::check_finite(x, "moment entry")?;
    }
    Ok(())
}

/// `ψ(Π→_{j∈B} x_j)` with the product taken in increasing index order.
fn block_value(xs: &[ComplexMatrix], block: &[usize], d: &Density) -> Complex64 {
    let mut prod = xs[block[0]].clone();
    for &j in &block[1..] {
        prod *= &xs[j];
    }
    d.functional(&prod)
}

fn partition_value(xs: &[ComplexMatrix], sigma: &SetPartition, d: &Density) -> Complex64 {
    sigma.blocks().iter().fold(matcore::ONE, |acc, b| acc * block_value(xs, b, d))
}

/// `Σ_{σ ∈ Π(m)} Π_{B ∈ σ} ψ(Π→_{j∈B} x_j)` where `ψ = tr(d ·)`.
pub fn poisson_moment(xs: &[ComplexMatrix], d: &Density) -> Result<Complex64> {
    check_family(xs, d)?;
    Ok(SetPartition::all(xs.len()).iter().map(|s| partition_value(xs, s, d)).fold(ZERO, |a, b| a + b))
}

/// `s! / (s^r (s−r)!)`, zero when `r > s`.
pub fn falling_coefficient(s: usize, r: usize) -> f64 {
    if r > s {
        return 0.0;
    }
    (0..r).map(|i| (s - i) as f64 / s as f64).product()
}

/// Even-partition moment with the finite-`s` coefficients.
pub fn clt_moment_finite_s(xs: &[ComplexMatrix], d: &Density, s: usize) -> Result<Complex64> {
    check_family(xs, d)?;
    if s == 0 {
        return Err(Error::Invalid("s must be positive".into()));
    }
    Ok(SetPartition::all(xs.len())
        .iter()
        .filter(|p| p.is_even())
        .map(|p| partition_value(xs, p, d) * falling_coefficient(s, p.len()))
        .fold(ZERO, |a, b| a + b))
}

/// `Σ_{σ ∈ Π_e(m)} Π_{B ∈ σ} ψ(Π→_{j∈B} x_j)`.
pub fn clt_moment_limit(xs: &[ComplexMatrix], d: &Density) -> Result<Complex64> {
    check_family(xs, d)?;
    Ok(SetPartition::all(xs.len())
        .iter()
        .filter(|p| p.is_even())
        .map(|p| partition_value(xs, p, d))
        .fold(ZERO, |a, b| a + b))
}

/// One slot of the `s`-fold model: `C² ⊗ (M ⊕ M)` with state
/// `diag(k/s, 1 − k/s) ⊗ ½(φ ⊕ φ)`, `φ = ψ/k`, and `z(x) = e₁₁ ⊗ (x, −x)`.
struct Slot {
    state: ComplexMatrix,
    n: usize,
}

impl Slot {
    fn new(d: &Density, s: usize) -> Result<Slot> {
        let k = d.mass();
        if k > s as f64 + 1e-12 {
            return Err(Error::Invalid(format!("the slot model needs mass k = {k} ≤ s = {s}")));
        }
        let t = (k / s as f64).min(1.0);
        let phi = d.matrix().unscale(k);
        let half = matcore::direct_sum(&phi, &phi).unscale(2.0);
        Ok(Slot { state: matcore::real_diag(&[t, 1.0 - t]).kronecker(&half), n: d.dim() })
    }

    fn element(&self, x: &ComplexMatrix) -> ComplexMatrix {
        let mut e = ComplexMatrix::zeros(2, 2);
        e[(0, 0)] = matcore::ONE;
        e.kronecker(&matcore::direct_sum(x, &(-x)))
    }

    fn dim(&self) -> usize {
        4 * self.n
    }
}

/// `φ_s(u_s(x₁) ⋯ u_s(x_m))` with `u_s(x) = Σ_j π_j(z(x))` in the `s`-fold tensor
/// product, expanded over slot assignments; the product state factorizes over slots.
pub fn clt_moment_simulated(xs: &[ComplexMatrix], d: &Density, s: usize) -> Result<Complex64> {
    check_family(xs, d)?;
    let m = xs.len();
    if s == 0 {
        return Err(Error::Invalid("s must be positive".into()));
    }
    if (s as f64).powi(m as i32) > 1e7 {
        return Err(Error::Cap(format!("{s}^{m} slot assignments")));
    }
    let slot = Slot::new(d, s)?;
    let zs: Vec<ComplexMatrix> = xs.iter().map(|x| slot.element(x)).collect();
    let id = ComplexMatrix::identity(slot.dim(), slot.dim());
    let omega = |y: &ComplexMatrix| matcore::trace(&(&slot.state * y));
    let total = s.pow(m as u32);
    let mut sum = ZERO;
    let mut assign = vec![0usize; m];
    for code in 0..total {
        let mut c = code;
        for a in assign.iter_mut() {
            *a = c % s;
            c /= s;
        }
        let mut value = matcore::ONE;
        let mut used: Vec<usize> = assign.clone();
        used.sort_unstable();
        used.dedup();
        for &j in &used {
            let mut prod = id.clone();
            for (i, &a) in assign.iter().enumerate() {
                if a == j {
                    prod *= &zs[i];
                }
            }
            value *= omega(&prod);
        }
        // idle slots contribute ω(1) = 1
        sum += value;
    }
    Ok(sum)
}

/// Same moment from explicit matrices on the full `(4n)^s`-dimensional tensor product.
pub fn clt_moment_kronecker(xs: &[ComplexMatrix], d: &Density, s: usize, cap: usize) -> Result<Complex64> {
    check_family(xs, d)?;
    let slot = Slot::new(d, s)?;
    let dim = (slot.dim() as f64).powi(s as i32);
    if dim > cap as f64 {
        return Err(Error::Cap(format!("dimension {dim} exceeds cap {cap}")));
    }
    let id = ComplexMatrix::identity(slot.dim(), slot.dim());
    let embed = |y: &ComplexMatrix, j: usize| {
        let factors: Vec<ComplexMatrix> = (0..s).map(|i| if i == j { y.clone() } else { id.clone() }).collect();
        matcore::tensor_power(&factors)
    };
    let states: Vec<ComplexMatrix> = vec![slot.state.clone(); s];
    let big_state = matcore::tensor_power(&states)?;
    let mut prod: Option<ComplexMatrix> = None;
    for x in xs {
        let z = slot.element(x);
        let mut u = embed(&z, 0)?;
        for j in 1..s {
            u += embed(&z, j)?;
        }
        prod = Some(match prod {
            None => u,
            Some(p) => p * u,
        });
    }
    Ok(match prod {
        None => matcore::ONE,
        Some(p) => matcore::trace(&(big_state * p)),
    })
}
