//! Dense complex matrices, densities and their functional calculus, tensor and
//! direct-sum constructions, and conditional expectations onto a left factor.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng;

pub type ComplexMatrix = DMatrix<Complex64>;

pub const ZERO: Complex64 = Complex64::new(0.0, 0.0);
pub const ONE: Complex64 = Complex64::new(1.0, 0.0);

pub fn c(re: f64) -> Complex64 {
    Complex64::new(re, 0.0)
}

pub fn check_finite(x: &ComplexMatrix, what: &str) -> Result<()> {
    if x.iter().all(|z| z.re.is_finite() && z.im.is_finite()) {
        Ok(())
    } else {
        Err(Error::NonFinite(what.to_string()))
    }
}

pub fn real_diag(values: &[f64]) -> ComplexMatrix {
    ComplexMatrix::from_diagonal(&DVector::from_iterator(values.len(), values.iter().map(|&v| c(v))))
}

pub fn trace(x: &ComplexMatrix) -> Complex64 {
    x.diagonal().iter().sum()
}

pub fn is_diagonal(x: &ComplexMatrix) -> bool {
    x.is_square()
        && (0..x.nrows()).all(|i| (0..x.ncols()).all(|j| i == j || x[(i, j)] == ZERO))
}

/// Eigendecomposition of the Hermitian part of `h`; eigenvalues ascending.
pub fn hermitian_eig(h: &ComplexMatrix) -> (DVector<f64>, ComplexMatrix) {
    let n = h.nrows();
    if is_diagonal(h) {
        let mut idx: Vec<usize> = (0..n).collect();
        idx.sort_by(|&a, &b| h[(a, a)].re.total_cmp(&h[(b, b)].re));
        let vals = DVector::from_iterator(n, idx.iter().map(|&i| h[(i, i)].re));
        let mut vecs = ComplexMatrix::zeros(n, n);
        for (col, &i) in idx.iter().enumerate() {
            vecs[(i, col)] = ONE;
        }
        return (vals, vecs);
    }
    let herm = (h + h.adjoint()).scale(0.5);
    let eig = SymmetricEigen::new(herm);
    let mut idx: Vec<usize> = (0..n).collect();
    idx.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let vals = DVector::from_iterator(n, idx.iter().map(|&i| eig.eigenvalues[i]));
    let mut vecs = ComplexMatrix::zeros(n, n);
    for (col, &i) in idx.iter().enumerate() {
        vecs.set_column(col, &eig.eigenvectors.column(i));
    }
    (vals, vecs)
}

/// `V f(Λ) V*`.
pub fn spectral_apply(vals: &DVector<f64>, vecs: &ComplexMatrix, f: impl Fn(f64) -> f64) -> ComplexMatrix {
    let mut scaled = vecs.clone();
    for (j, &lam) in vals.iter().enumerate() {
        let fl = c(f(lam));
        scaled.column_mut(j).iter_mut().for_each(|z| *z *= fl);
    }
    scaled * vecs.adjoint()
}

/// Functional calculus on the Hermitian part of `h`.
pub fn herm_apply(h: &ComplexMatrix, f: impl Fn(f64) -> f64) -> ComplexMatrix {
    let (vals, vecs) = hermitian_eig(h);
    spectral_apply(&vals, &vecs, f)
}

/// `a^t` for positive semidefinite `a` and `t > 0`, with `0^t = 0`.
pub fn psd_power(a: &ComplexMatrix, t: f64) -> ComplexMatrix {
    herm_apply(a, |x| if x > 0.0 { x.powf(t) } else { 0.0 })
}

/// `|x| = (x* x)^{1/2}`.
pub fn abs(x: &ComplexMatrix) -> ComplexMatrix {
    psd_power(&(x.adjoint() * x), 0.5)
}

/// A positive semidefinite matrix with a declared total mass.
#[derive(Clone, Debug)]
pub struct Density {
    matrix: ComplexMatrix,
    mass: f64,
    evals: DVector<f64>,
    evecs: ComplexMatrix,
}

impl Density {
    /// Builds a density whose mass is its trace.
    pub fn new(matrix: ComplexMatrix) -> Result<Density> {
        Density::build(matrix, None)
    }

    /// Builds a density and checks the declared mass against the trace.
    pub fn with_mass(matrix: ComplexMatrix, mass: f64) -> Result<Density> {
        Density::build(matrix, Some(mass))
    }

    pub fn from_diagonal(values: &[f64]) -> Result<Density> {
        Density::new(real_diag(values))
    }

    pub fn identity(n: usize) -> Density {
        Density::from_diagonal(&vec![1.0; n]).expect("identity is a density")
    }

    /// The uniform state `I_n / n`.
    pub fn uniform_state(n: usize) -> Density {
        Density::from_diagonal(&vec![1.0 / n as f64; n]).expect("uniform state")
    }

    fn build(matrix: ComplexMatrix, declared: Option<f64>) -> Result<Density> {
        if !matrix.is_square() || matrix.nrows() == 0 {
            return Err(Error::Dimension(format!(
                "density must be square and non-empty, got {}x{}",
                matrix.nrows(),
                matrix.ncols()
            )));
        }
        check_finite(&matrix, "density")?;
        let scale = matrix.iter().fold(0.0_f64, |m, z| m.max(z.norm())).max(f64::MIN_POSITIVE);
        let skew = (&matrix - matrix.adjoint()).iter().fold(0.0_f64, |m, z| m.max(z.norm()));
        if skew > 1e-12 * scale {
            return Err(Error::NotDensity(format!("not Hermitian (defect {skew:e})")));
        }
        let (vals, vecs) = hermitian_eig(&matrix);
        let top = vals.iter().fold(0.0_f64, |m, &v| m.max(v.abs()));
        let floor = -1e-12 * top;
        if vals.iter().any(|&v| v < floor) {
            return Err(Error::NotDensity(format!("negative eigenvalue {:e}", vals.min())));
        }
        let clipped = vals.iter().any(|&v| v < 0.0);
        let vals = vals.map(|v| v.max(0.0));
        let matrix = if clipped {
            spectral_apply(&vals, &vecs, |v| v)
        } else {
            (&matrix + matrix.adjoint()).scale(0.5)
        };
        let tr = trace(&matrix).re;
        if tr <= 0.0 {
            return Err(Error::NotDensity("zero mass".into()));
        }
        let mass = match declared {
            Some(m) => {
                if !(m > 0.0) || (tr - m).abs() > 1e-10 * m {
                    return Err(Error::NotDensity(format!("trace {tr} differs from declared mass {m}")));
                }
                m
            }
            None => tr,
        };
        Ok(Density { matrix, mass, evals: vals, evecs: vecs })
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.matrix
    }

    pub fn mass(&self) -> f64 {
        self.mass
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    /// Eigenvalues in ascending order.
    pub fn eigenvalues(&self) -> &DVector<f64> {
        &self.evals
    }

    pub fn eigenvectors(&self) -> &ComplexMatrix {
        &self.evecs
    }

    pub fn is_state(&self) -> bool {
        (self.mass - 1.0).abs() <= 1e-10
    }

    pub fn is_invertible(&self) -> bool {
        let top = self.evals.max();
        self.evals.min() > 1e-14 * top
    }

    pub fn normalized(&self) -> Density {
        self.scaled(1.0 / self.mass)
    }

    pub fn scaled(&self, s: f64) -> Density {
        assert!(s > 0.0, "densities scale by positive factors");
        Density {
            matrix: self.matrix.scale(s),
            mass: self.mass * s,
            evals: self.evals.scale(s),
            evecs: self.evecs.clone(),
        }
    }

    /// `d^a`; negative exponents need an invertible density. `d^0` is the identity.
    pub fn pow(&self, a: f64) -> Result<ComplexMatrix> {
        if !a.is_finite() {
            return Err(Error::Invalid(format!("exponent {a}")));
        }
        if a == 0.0 {
            return Ok(ComplexMatrix::identity(self.dim(), self.dim()));
        }
        if a < 0.0 && !self.is_invertible() {
            return Err(Error::NonInvertible);
        }
        Ok(spectral_apply(&self.evals, &self.evecs, |v| if v > 0.0 { v.powf(a) } else { 0.0 }))
    }

    /// `ψ(x) = tr(d x)`.
    pub fn functional(&self, x: &ComplexMatrix) -> Complex64 {
        (&self.matrix * x).trace()
    }

    pub fn tensor(&self, other: &Density) -> Result<Density> {
        Density::new(self.matrix.kronecker(&other.matrix))
    }
}

pub fn frac_power(d: &Density, a: f64) -> Result<ComplexMatrix> {
    d.pow(a)
}

/// Which subalgebra `N` of `M_m ⊗ M_n` a conditional norm is taken over.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "m")]
pub enum SubalgebraSpec {
    Scalars,
    LeftMatrixFactor(usize),
}

impl SubalgebraSpec {
    /// Size `m` of the left factor inside an ambient algebra of dimension `ambient`.
    pub fn factor_dim(&self, ambient: usize) -> Result<usize> {
        match *self {
            SubalgebraSpec::Scalars => Ok(1),
            SubalgebraSpec::LeftMatrixFactor(m) => {
                if m == 0 || ambient % m != 0 {
                    Err(Error::Dimension(format!("ambient dimension {ambient} not divisible by {m}")))
                } else {
                    Ok(m)
                }
            }
        }
    }
}

/// `n × n` block `(i, j)` of a matrix in `M_m ⊗ M_n`.
pub fn block(x: &ComplexMatrix, n: usize, i: usize, j: usize) -> ComplexMatrix {
    x.view((i * n, j * n), (n, n)).into_owned()
}

/// Unweighted partial trace over the second factor of `M_m ⊗ M_n`.
pub fn partial_trace_second(k: &ComplexMatrix, m: usize, n: usize) -> ComplexMatrix {
    let mut out = ComplexMatrix::zeros(m, m);
    for i in 0..m {
        for j in 0..m {
            let mut s = ZERO;
            for l in 0..n {
                s += k[(i * n + l, j * n + l)];
            }
            out[(i, j)] = s;
        }
    }
    out
}

/// `E = id ⊗ φ`: `E(x)_{ij} = tr(d x_{ij})` over the `n × n` blocks.
pub fn cond_expect(x: &ComplexMatrix, d: &Density) -> Result<ComplexMatrix> {
    let n = d.dim();
    if !x.is_square() || x.nrows() % n != 0 {
        return Err(Error::Dimension(format!("{}x{} is not in M_m ⊗ M_{n}", x.nrows(), x.ncols())));
    }
    if !d.is_state() {
        return Err(Error::NotDensity(format!("conditional expectation needs a state, mass {}", d.mass())));
    }
    let m = x.nrows() / n;
    let lifted = x * ComplexMatrix::identity(m, m).kronecker(d.matrix());
    Ok(partial_trace_second(&lifted, m, n))
}

/// `x_1 ⊗ x_2 ⊗ … ⊗ x_k`.
pub fn tensor_power(xs: &[ComplexMatrix]) -> Result<ComplexMatrix> {
    let (first, rest) = xs.split_first().ok_or_else(|| Error::Invalid("empty tensor list".into()))?;
    Ok(rest.iter().fold(first.clone(), |acc, x| acc.kronecker(x)))
}

pub fn direct_sum(a: &ComplexMatrix, b: &ComplexMatrix) -> ComplexMatrix {
    let (r, c) = (a.nrows() + b.nrows(), a.ncols() + b.ncols());
    let mut out = ComplexMatrix::zeros(r, c);
    out.view_mut((0, 0), a.shape()).copy_from(a);
    out.view_mut(a.shape(), b.shape()).copy_from(b);
    out
}

pub fn random_matrix_rng<R: Rng + ?Sized>(rng: &mut R, rows: usize, cols: usize) -> ComplexMatrix {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    ComplexMatrix::from_fn(rows, cols, |_, _| {
        let re: f64 = rng.sample(StandardNormal);
        let im: f64 = rng.sample(StandardNormal);
        Complex64::new(re * s, im * s)
    })
}

pub fn random_matrix(rows: usize, cols: usize, seed: u64) -> ComplexMatrix {
    random_matrix_rng(&mut rng::stream(seed, "random_matrix"), rows, cols)
}

/// Wishart state `G G* / tr(G G*)`.
pub fn random_state_rng<R: Rng + ?Sized>(rng: &mut R, n: usize) -> Density {
    let g = random_matrix_rng(rng, n, n);
    let w = &g * g.adjoint();
    let tr = trace(&w).re;
    Density::new(w.unscale(tr)).expect("Wishart matrices are densities")
}

pub fn random_state(n: usize, seed: u64) -> Density {
    random_state_rng(&mut rng::stream(seed, "random_state"), n)
}

pub fn random_unitary_rng<R: Rng + ?Sized>(rng: &mut R, n: usize) -> ComplexMatrix {
    let g = random_matrix_rng(rng, n, n);
    let qr = g.qr();
    let (q, r) = (qr.q(), qr.r());
    let mut q = q;
    for j in 0..n {
        let d = r[(j, j)];
        let ph = if d.norm() > 0.0 { d / d.norm() } else { ONE };
        q.column_mut(j).iter_mut().for_each(|z| *z *= ph);
    }
    q
}

/// Wire format `{"rows","cols","re","im"}` with row-major nested arrays.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MatrixJson {
    pub rows: usize,
    pub cols: usize,
    pub re: Vec<Vec<f64>>,
    pub im: Vec<Vec<f64>>,
}

impl MatrixJson {
    pub fn from_matrix(x: &ComplexMatrix) -> MatrixJson {
        let rows = x.nrows();
        let cols = x.ncols();
        MatrixJson {
            rows,
            cols,
            re: (0..rows).map(|i| (0..cols).map(|j| x[(i, j)].re).collect()).collect(),
            im: (0..rows).map(|i| (0..cols).map(|j| x[(i, j)].im).collect()).collect(),
        }
    }

    pub fn to_matrix(&self) -> Result<ComplexMatrix> {
        let shape_ok = |v: &Vec<Vec<f64>>| v.len() == self.rows && v.iter().all(|r| r.len() == self.cols);
        if !shape_ok(&self.re) || !(self.im.is_empty() || shape_ok(&self.im)) {
            return Err(Error::Parse(format!("entry arrays do not match {}x{}", self.rows, self.cols)));
        }
        let x = ComplexMatrix::from_fn(self.rows, self.cols, |i, j| {
            let im = if self.im.is_empty() { 0.0 } else { self.im[i][j] };
            Complex64::new(self.re[i][j], im)
        });
        check_finite(&x, "matrix input")?;
        Ok(x)
    }

    pub fn parse(text: &str) -> Result<ComplexMatrix> {
        let mj: MatrixJson = serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
        mj.to_matrix()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn max_abs(x: &ComplexMatrix) -> f64 {
        x.iter().fold(0.0, |m, z| m.max(z.norm()))
    }

    #[test]
    fn square_root_of_diagonal() {
        let d = Density::from_diagonal(&[4.0, 1.0]).unwrap();
        let r = frac_power(&d, 0.5).unwrap();
        assert!(max_abs(&(r - real_diag(&[2.0, 1.0]))) < 1e-15);
    }

    #[test]
    fn identity_powers() {
        let d = Density::identity(3);
        for a in [-1.5, 0.3, 2.0] {
            assert!(max_abs(&(frac_power(&d, a).unwrap() - ComplexMatrix::identity(3, 3))) < 1e-15);
        }
    }

    #[test]
    fn cube_root_cubed() {
        for seed in 0..10 {
            let d = random_state(4, seed);
            let r = frac_power(&d, 1.0 / 3.0).unwrap();
            let back = &r * &r * &r;
            assert!(max_abs(&(back - d.matrix())) < 1e-9 * max_abs(d.matrix()));
        }
    }

    #[test]
    fn power_group_law() {
        let d = random_state(4, 3);
        for (a, b) in [(-1.0, 2.0), (0.25, 0.5), (-0.7, -0.3), (1.3, 0.7)] {
            let lhs = d.pow(a).unwrap() * d.pow(b).unwrap();
            let rhs = d.pow(a + b).unwrap();
            assert!(max_abs(&(lhs - &rhs)) < 1e-9 * max_abs(&rhs).max(1.0));
        }
    }

    #[test]
    fn singular_density_rejects_negative_powers() {
        let d = Density::from_diagonal(&[1.0, 0.0]).unwrap();
        assert_eq!(d.pow(-0.5).unwrap_err(), Error::NonInvertible);
        let r = d.pow(0.5).unwrap();
        assert_eq!(r[(1, 1)], ZERO);
    }

    #[test]
    fn density_validation() {
        assert!(Density::from_diagonal(&[1.0, -0.5]).is_err());
        let tiny = Density::from_diagonal(&[1.0, -1e-14]).unwrap();
        assert!(tiny.eigenvalues().min() >= 0.0);
        assert!(Density::with_mass(real_diag(&[0.5, 0.5]), 2.0).is_err());
        let mut bad = real_diag(&[1.0, 1.0]);
        bad[(0, 1)] = c(f64::NAN);
        assert!(Density::new(bad).is_err());
        let mut skew = real_diag(&[1.0, 1.0]);
        skew[(0, 1)] = c(0.3);
        assert!(Density::new(skew).is_err());
    }

    #[test]
    fn random_state_is_state() {
        let d = random_state(3, 11);
        assert_relative_eq!(trace(d.matrix()).re, 1.0, epsilon = 1e-12);
        assert!(d.eigenvalues().min() >= 0.0);
    }

    #[test]
    fn cond_expect_elementary_tensor() {
        let mut r = rng::stream(1, "t");
        let a = random_matrix_rng(&mut r, 2, 2);
        let b = random_matrix_rng(&mut r, 3, 3);
        let d = random_state_rng(&mut r, 3);
        let e = cond_expect(&a.kronecker(&b), &d).unwrap();
        let expect = a.map(|z| z * d.functional(&b));
        assert!(max_abs(&(e - expect)) < 1e-12);
    }

    #[test]
    fn cond_expect_unital_and_positive() {
        let d = random_state(3, 5);
        let e = cond_expect(&ComplexMatrix::identity(6, 6), &d).unwrap();
        assert!(max_abs(&(e - ComplexMatrix::identity(2, 2))) < 1e-12);
        let mut r = rng::stream(2, "pos");
        for _ in 0..100 {
            let g = random_matrix_rng(&mut r, 6, 6);
            let x = &g * g.adjoint();
            let (vals, _) = hermitian_eig(&cond_expect(&x, &d).unwrap());
            assert!(vals.min() >= -1e-12);
        }
    }

    #[test]
    fn cond_expect_module_property() {
        let mut r = rng::stream(3, "mod");
        let d = random_state_rng(&mut r, 3);
        let x = random_matrix_rng(&mut r, 6, 6);
        let a = random_matrix_rng(&mut r, 2, 2);
        let b = random_matrix_rng(&mut r, 2, 2);
        let i3 = ComplexMatrix::identity(3, 3);
        let lhs = cond_expect(&(a.kronecker(&i3) * &x * b.kronecker(&i3)), &d).unwrap();
        let rhs = &a * cond_expect(&x, &d).unwrap() * &b;
        assert!(max_abs(&(lhs - rhs)) < 1e-12);
    }

    #[test]
    fn cond_expect_rejects_bad_shapes() {
        let d = Density::uniform_state(3);
        assert!(cond_expect(&ComplexMatrix::identity(4, 4), &d).is_err());
        assert!(cond_expect(&ComplexMatrix::identity(6, 6), &Density::identity(3)).is_err());
    }

    #[test]
    fn tensor_and_sum_constructors() {
        let i2 = ComplexMatrix::identity(2, 2);
        assert_eq!(tensor_power(&[i2.clone(), i2]).unwrap(), ComplexMatrix::identity(4, 4));
        assert!(tensor_power(&[]).is_err());
        let s = direct_sum(&real_diag(&[2.0]), &real_diag(&[-3.0]));
        assert_eq!(s, real_diag(&[2.0, -3.0]));
    }

    #[test]
    fn matrix_json_roundtrip() {
        let x = random_matrix(2, 3, 9);
        let text = serde_json::to_string(&MatrixJson::from_matrix(&x)).unwrap();
        assert_eq!(MatrixJson::parse(&text).unwrap(), x);
        assert!(MatrixJson::parse(r#"{"rows":2,"cols":2,"re":[[1]],"im":[]}"#).is_err());
    }

    #[test]
    fn subalgebra_divisibility() {
        assert_eq!(SubalgebraSpec::LeftMatrixFactor(2).factor_dim(6).unwrap(), 2);
        assert!(SubalgebraSpec::LeftMatrixFactor(4).factor_dim(6).is_err());
        assert_eq!(SubalgebraSpec::Scalars.factor_dim(5).unwrap(), 1);
    }

    #[test]
    fn random_unitary_is_unitary() {
        let u = random_unitary_rng(&mut rng::stream(0, "u"), 4);
        assert!(max_abs(&(u.adjoint() * &u - ComplexMatrix::identity(4, 4))) < 1e-12);
    }
}
