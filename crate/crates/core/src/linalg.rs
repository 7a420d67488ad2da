//! Dense complex matrix helpers shared by every module.
//!
//! Operators are plain `nalgebra` matrices; the functions here cover the
//! handful of operations the phase-space code leans on (traces of products,
//! Kronecker products, exponentials of Hermitian generators) plus the JSON
//! matrix envelope used by the command line.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type C64 = Complex64;

/// Dense square matrix representing a Hilbert-space operator.
pub type OperatorMatrix = DMatrix<C64>;

pub const I: C64 = C64::new(0.0, 1.0);

#[inline]
pub fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

#[inline]
pub fn real(re: f64) -> C64 {
    C64::new(re, 0.0)
}

pub fn identity(dim: usize) -> OperatorMatrix {
    DMatrix::identity(dim, dim)
}

pub fn zeros(dim: usize) -> OperatorMatrix {
    DMatrix::zeros(dim, dim)
}

pub fn diagonal(entries: &[C64]) -> OperatorMatrix {
    DMatrix::from_diagonal(&DVector::from_column_slice(entries))
}

pub fn trace(a: &OperatorMatrix) -> C64 {
    a.diagonal().iter().sum()
}

/// `Tr[A B]` without forming the product.
pub fn trace_product(a: &OperatorMatrix, b: &OperatorMatrix) -> C64 {
    debug_assert_eq!(a.shape(), b.transpose().shape());
    let n = a.nrows();
    let mut acc = C64::new(0.0, 0.0);
    for i in 0..n {
        for j in 0..a.ncols() {
            acc += a[(i, j)] * b[(j, i)];
        }
    }
    acc
}

pub fn commutator(a: &OperatorMatrix, b: &OperatorMatrix) -> OperatorMatrix {
    a * b - b * a
}

pub fn kron(a: &OperatorMatrix, b: &OperatorMatrix) -> OperatorMatrix {
    a.kronecker(b)
}

/// Kronecker product of an ordered list of factors; the first factor is the
/// most significant index.
pub fn kron_all<'a, I>(factors: I) -> OperatorMatrix
where
    I: IntoIterator<Item = &'a OperatorMatrix>,
{
    let mut iter = factors.into_iter();
    let first = iter
        .next()
        .expect("kron_all needs at least one factor")
        .clone();
    iter.fold(first, |acc, f| acc.kronecker(f))
}

/// Largest entrywise modulus of `a - b`.
pub fn max_abs_diff(a: &OperatorMatrix, b: &OperatorMatrix) -> f64 {
    assert_eq!(a.shape(), b.shape(), "shape mismatch");
    a.iter()
        .zip(b.iter())
        .map(|(x, y)| (x - y).norm())
        .fold(0.0, f64::max)
}

pub fn max_abs(a: &OperatorMatrix) -> f64 {
    a.iter().map(|x| x.norm()).fold(0.0, f64::max)
}

/// Operator (spectral) norm: the largest singular value.
pub fn operator_norm(a: &OperatorMatrix) -> f64 {
    if a.is_empty() {
        return 0.0;
    }
    a.clone().svd(false, false).singular_values.max()
}

pub fn hermiticity_defect(a: &OperatorMatrix) -> f64 {
    max_abs_diff(a, &a.adjoint())
}

pub fn is_hermitian(a: &OperatorMatrix, tol: f64) -> bool {
    a.is_square() && hermiticity_defect(a) <= tol
}

pub fn unitarity_defect(u: &OperatorMatrix) -> f64 {
    max_abs_diff(&(u.adjoint() * u), &identity(u.ncols()))
}

pub fn is_unitary(u: &OperatorMatrix, tol: f64) -> bool {
    u.is_square() && unitarity_defect(u) <= tol
}

/// Eigen-decomposition of a Hermitian matrix, kept around so that
/// `exp(i t H)` can be evaluated for many `t` at the cost of two products.
#[derive(Debug, Clone)]
pub struct HermitianExp {
    values: Vec<f64>,
    vectors: OperatorMatrix,
    diagonal: bool,
}

impl HermitianExp {
    pub fn new(h: &OperatorMatrix) -> Self {
        let n = h.nrows();
        let off_diag = (0..n)
            .flat_map(|i| (0..n).map(move |j| (i, j)))
            .filter(|(i, j)| i != j)
            .any(|(i, j)| h[(i, j)] != C64::new(0.0, 0.0));
        if !off_diag {
            return Self {
                values: (0..n).map(|i| h[(i, i)].re).collect(),
                vectors: identity(n),
                diagonal: true,
            };
        }
        let eig = h.clone().symmetric_eigen();
        Self {
            values: eig.eigenvalues.iter().copied().collect(),
            vectors: eig.eigenvectors,
            diagonal: false,
        }
    }

    pub fn eigenvalues(&self) -> &[f64] {
        &self.values
    }

    /// `exp(i t H)`.
    pub fn exp_i(&self, t: f64) -> OperatorMatrix {
        let phases: Vec<C64> = self
            .values
            .iter()
            .map(|&l| C64::from_polar(1.0, l * t))
            .collect();
        if self.diagonal {
            return diagonal(&phases);
        }
        let mut scaled = self.vectors.clone();
        for (j, p) in phases.iter().enumerate() {
            for i in 0..scaled.nrows() {
                scaled[(i, j)] *= p;
            }
        }
        scaled * self.vectors.adjoint()
    }

    /// `exp(i t H) v`.
    pub fn exp_i_apply(&self, t: f64, v: &DVector<C64>) -> DVector<C64> {
        let phase = |l: f64| C64::from_polar(1.0, l * t);
        if self.diagonal {
            return DVector::from_iterator(
                v.len(),
                v.iter().zip(&self.values).map(|(x, &l)| x * phase(l)),
            );
        }
        let mut w = self.vectors.ad_mul(v);
        for (x, &l) in w.iter_mut().zip(&self.values) {
            *x *= phase(l);
        }
        &self.vectors * w
    }

    /// `f(H)` for a real scalar function applied to the spectrum.
    pub fn apply(&self, f: impl Fn(f64) -> f64) -> OperatorMatrix {
        let vals: Vec<C64> = self.values.iter().map(|&l| real(f(l))).collect();
        if self.diagonal {
            return diagonal(&vals);
        }
        let mut scaled = self.vectors.clone();
        for (j, v) in vals.iter().enumerate() {
            for i in 0..scaled.nrows() {
                scaled[(i, j)] *= v;
            }
        }
        scaled * self.vectors.adjoint()
    }
}

/// `exp(i t H)` for Hermitian `H`.
pub fn exp_i_hermitian(h: &OperatorMatrix, t: f64) -> OperatorMatrix {
    HermitianExp::new(h).exp_i(t)
}

/// Exponential of an anti-Hermitian matrix `A = i H`.
pub fn expm_skew_hermitian(a: &OperatorMatrix) -> OperatorMatrix {
    let h = a.map(|z| z * (-I));
    let h = (&h + h.adjoint()).scale(0.5);
    HermitianExp::new(&h).exp_i(1.0)
}

/// Complex matrix with independent standard-normal real and imaginary parts.
pub fn random_ginibre<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> OperatorMatrix {
    DMatrix::from_fn(dim, dim, |_, _| {
        let re: f64 = rng.sample(StandardNormal);
        let im: f64 = rng.sample(StandardNormal);
        C64::new(re, im)
    })
}

pub fn random_hermitian<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> OperatorMatrix {
    let g = random_ginibre(dim, rng);
    (&g + g.adjoint()).scale(0.5)
}

/// `G G† / Tr[G G†]` for a Ginibre `G`.
pub fn random_density<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> OperatorMatrix {
    let g = random_ginibre(dim, rng);
    let rho = &g * g.adjoint();
    let tr = trace(&rho).re;
    rho.unscale(tr)
}

/// Haar-random unitary from the QR decomposition of a Ginibre matrix.
pub fn random_unitary<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> OperatorMatrix {
    let g = random_ginibre(dim, rng);
    let qr = g.qr();
    let q = qr.q();
    let r = qr.r();
    let mut u = q;
    for j in 0..dim {
        let d = r[(j, j)];
        let phase = if d.norm() > 0.0 {
            d / d.norm()
        } else {
            real(1.0)
        };
        for i in 0..dim {
            u[(i, j)] *= phase;
        }
    }
    u
}

/// JSON envelope for a matrix: separate real and imaginary row arrays.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MatrixJson {
    pub dim: usize,
    pub re: Vec<Vec<f64>>,
    pub im: Vec<Vec<f64>>,
}

impl From<&OperatorMatrix> for MatrixJson {
    fn from(m: &OperatorMatrix) -> Self {
        let rows = |f: fn(&C64) -> f64| -> Vec<Vec<f64>> {
            (0..m.nrows())
                .map(|i| (0..m.ncols()).map(|j| f(&m[(i, j)])).collect())
                .collect()
        };
        MatrixJson {
            dim: m.nrows(),
            re: rows(|z| z.re),
            im: rows(|z| z.im),
        }
    }
}

impl TryFrom<&MatrixJson> for OperatorMatrix {
    type Error = Error;

    fn try_from(j: &MatrixJson) -> Result<Self> {
        let d = j.dim;
        let check = |rows: &Vec<Vec<f64>>| -> Result<()> {
            if rows.len() != d {
                return Err(Error::DimensionMismatch {
                    expected: d,
                    found: rows.len(),
                });
            }
            for r in rows {
                if r.len() != d {
                    return Err(Error::DimensionMismatch {
                        expected: d,
                        found: r.len(),
                    });
                }
            }
            Ok(())
        };
        check(&j.re)?;
        check(&j.im)?;
        Ok(DMatrix::from_fn(d, d, |r, col| {
            C64::new(j.re[r][col], j.im[r][col])
        }))
    }
}
