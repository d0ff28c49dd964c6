//! Dense complex linear algebra for small matrices.
//!
//! Everything downstream works with Bloch-sized problems, `2 <= N <= 16`,
//! where cyclic Jacobi iterations are unconditionally stable, quadratically
//! convergent, and fast enough that no external solver is warranted. All
//! decompositions here are deterministic: the same input bits produce the
//! same output bits, and eigenvector phases follow a fixed convention
//! (largest-modulus component real positive) so that cached frames can be
//! compared across calls.

use std::fmt;
use std::ops::{Index, IndexMut};

pub use num_complex::Complex64 as C64;



mod eig;
mod svd;

pub use eig::{herm_eig, sqrt_psd, EigDecomposition};
pub use svd::{svd, unitary_polar, SvdTriple};

/// Dense square complex matrix, row-major storage.
#[derive(Clone, PartialEq)]
pub struct CMatrix {
    dim: usize,
    data: Vec<C64>,
}

impl CMatrix {
    pub fn zeros(dim: usize) -> Self {
        CMatrix { dim, data: vec![C64::new(0.0, 0.0); dim * dim] }
    }

    pub fn identity(dim: usize) -> Self {
        let mut m = CMatrix::zeros(dim);
        for i in 0..dim {
            m[(i, i)] = C64::new(1.0, 0.0);
        }
        m
    }

    pub fn from_fn(dim: usize, mut f: impl FnMut(usize, usize) -> C64) -> Self {
        let mut m = CMatrix::zeros(dim);
        for i in 0..dim {
            for j in 0..dim {
                m[(i, j)] = f(i, j);
            }
        }
        m
    }

    /// Build from row slices; panics if the rows are not square.
    pub fn from_rows(rows: &[Vec<C64>]) -> Self {
        let dim = rows.len();
        assert!(rows.iter().all(|r| r.len() == dim), "rows must form a square matrix");
        CMatrix::from_fn(dim, |i, j| rows[i][j])
    }

    pub fn diag_re(entries: &[f64]) -> Self {
        let mut m = CMatrix::zeros(entries.len());
        for (i, &e) in entries.iter().enumerate() {
            m[(i, i)] = C64::new(e, 0.0);
        }
        m
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn mul(&self, rhs: &CMatrix) -> CMatrix {
        assert_eq!(self.dim, rhs.dim, "dimension mismatch in matrix product");
        let n = self.dim;
        let mut out = CMatrix::zeros(n);
        for i in 0..n {
            for k in 0..n {
                let a = self.data[i * n + k];
                if a == C64::new(0.0, 0.0) {
                    continue;
                }
                for j in 0..n {
                    out.data[i * n + j] += a * rhs.data[k * n + j];
                }
            }
        }
        out
    }

    pub fn add(&self, rhs: &CMatrix) -> CMatrix {
        assert_eq!(self.dim, rhs.dim, "dimension mismatch in matrix sum");
        let mut out = self.clone();
        for (o, r) in out.data.iter_mut().zip(&rhs.data) {
            *o += r;
        }
        out
    }

    pub fn sub(&self, rhs: &CMatrix) -> CMatrix {
        assert_eq!(self.dim, rhs.dim, "dimension mismatch in matrix difference");
        let mut out = self.clone();
        for (o, r) in out.data.iter_mut().zip(&rhs.data) {
            *o -= r;
        }
        out
    }

    pub fn scaled(&self, s: C64) -> CMatrix {
        let mut out = self.clone();
        for o in out.data.iter_mut() {
            *o *= s;
        }
        out
    }

    pub fn scaled_re(&self, s: f64) -> CMatrix {
        self.scaled(C64::new(s, 0.0))
    }

    pub fn adjoint(&self) -> CMatrix {
        CMatrix::from_fn(self.dim, |i, j| self[(j, i)].conj())
    }

    pub fn trace(&self) -> C64 {
        (0..self.dim).map(|i| self[(i, i)]).sum()
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.data.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn max_abs_diff(&self, rhs: &CMatrix) -> f64 {
        assert_eq!(self.dim, rhs.dim);
        self.data
            .iter()
            .zip(&rhs.data)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|z| z.re.is_finite() && z.im.is_finite())
    }

    /// Frobenius norm of `A - A^dagger`.
    pub fn hermiticity_deviation(&self) -> f64 {
        let mut acc = 0.0;
        for i in 0..self.dim {
            for j in 0..self.dim {
                acc += (self[(i, j)] - self[(j, i)].conj()).norm_sqr();
            }
        }
        acc.sqrt()
    }

    /// Frobenius norm of `A^dagger A - 1`.
    pub fn unitarity_deviation(&self) -> f64 {
        self.adjoint()
            .mul(self)
            .sub(&CMatrix::identity(self.dim))
            .frobenius_norm()
    }

    /// Hermitian within `tol`, measured relative to `max(1, ||A||_F)`.
    pub fn is_hermitian(&self, tol: f64) -> bool {
        self.hermiticity_deviation() <= tol * self.frobenius_norm().max(1.0)
    }

    pub fn is_unitary(&self, tol: f64) -> bool {
        self.unitarity_deviation() <= tol
    }

    /// Hermitian within `tol` and no eigenvalue below `-tol`.
    pub fn is_psd(&self, tol: f64) -> bool {
        if !self.is_finite() || !self.is_hermitian(tol) {
            return false;
        }
        let e = eig::jacobi(&hermitian_average(self));
        e.values.iter().all(|&v| v >= -tol)
    }

    /// Determinant by LU with partial pivoting.
    pub fn det(&self) -> C64 {
        let n = self.dim;
        if n == 0 {
            return C64::new(1.0, 0.0);
        }
        let mut lu = self.data.clone();
        let mut det = C64::new(1.0, 0.0);
        for col in 0..n {
            let mut pivot = col;
            let mut best = lu[col * n + col].norm();
            for row in col + 1..n {
                let mag = lu[row * n + col].norm();
                if mag > best {
                    best = mag;
                    pivot = row;
                }
            }
            if best == 0.0 {
                return C64::new(0.0, 0.0);
            }
            if pivot != col {
                for j in 0..n {
                    lu.swap(col * n + j, pivot * n + j);
                }
                det = -det;
            }
            let diag = lu[col * n + col];
            det *= diag;
            for row in col + 1..n {
                let factor = lu[row * n + col] / diag;
                for j in col..n {
                    let above = lu[col * n + j];
                    lu[row * n + j] -= factor * above;
                }
            }
        }
        det
    }

    /// Largest singular value. Panics on non-finite entries.
    pub fn operator_norm(&self) -> f64 {
        svd::svd(self)
            .expect("operator_norm requires finite entries")
            .singulars[0]
    }

    /// Closed-form eigenvalues of a general (not necessarily Hermitian)
    /// 2x2 matrix.
    pub fn eigenvalues2(&self) -> (C64, C64) {
        assert_eq!(self.dim, 2, "eigenvalues2 requires a 2x2 matrix");
        let a = self[(0, 0)];
        let b = self[(0, 1)];
        let c = self[(1, 0)];
        let d = self[(1, 1)];
        let half_tr = (a + d) * 0.5;
        let disc = ((a - d) * (a - d) * 0.25 + b * c).sqrt();
        (half_tr + disc, half_tr - disc)
    }

    pub(crate) fn col(&self, j: usize) -> Vec<C64> {
        (0..self.dim).map(|i| self[(i, j)]).collect()
    }

    pub(crate) fn scale_col(&mut self, j: usize, s: C64) {
        for i in 0..self.dim {
            let v = self[(i, j)] * s;
            self[(i, j)] = v;
        }
    }
}

/// Sum of `w_j v_j v_j^dagger` over the columns of `vectors`.
pub(crate) fn from_spectral(vectors: &CMatrix, weights: &[f64]) -> CMatrix {
    let n = vectors.dim();
    assert_eq!(weights.len(), n);
    let mut out = CMatrix::zeros(n);
    for (j, &w) in weights.iter().enumerate() {
        if w == 0.0 {
            continue;
        }
        for i in 0..n {
            let vi = vectors[(i, j)];
            for l in 0..n {
                out[(i, l)] += vi * vectors[(l, j)].conj() * w;
            }
        }
    }
    out
}

/// `(A + A^dagger)/2` with the diagonal forced real.
pub(crate) fn hermitian_average(a: &CMatrix) -> CMatrix {
    let mut m = CMatrix::from_fn(a.dim(), |i, j| (a[(i, j)] + a[(j, i)].conj()) * 0.5);
    for i in 0..a.dim() {
        m[(i, i)] = C64::new(m[(i, i)].re, 0.0);
    }
    m
}

impl Index<(usize, usize)> for CMatrix {
    type Output = C64;
    fn index(&self, (i, j): (usize, usize)) -> &C64 {
        &self.data[i * self.dim + j]
    }
}

impl IndexMut<(usize, usize)> for CMatrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut C64 {
        &mut self.data[i * self.dim + j]
    }
}

impl fmt::Debug for CMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "CMatrix {}x{} [", self.dim, self.dim)?;
        for i in 0..self.dim {
            write!(f, "  ")?;
            for j in 0..self.dim {
                let z = self[(i, j)];
                write!(f, "{:+.4e}{:+.4e}i  ", z.re, z.im)?;
            }
            writeln!(f)?;
        }
        write!(f, "]")
    }
}

/// Rectangular block of orthonormal columns (an `N x n` eigenframe).
#[derive(Clone, Debug)]
pub struct Frame {
    rows: usize,
    cols: usize,
    data: Vec<C64>,
}

impl Frame {
    /// Collect the given columns of `m` into a frame, in the order listed.
    pub fn from_columns(m: &CMatrix, columns: &[usize]) -> Frame {
        let rows = m.dim();
        let cols = columns.len();
        let mut data = vec![C64::new(0.0, 0.0); rows * cols];
        for (t, &j) in columns.iter().enumerate() {
            for i in 0..rows {
                data[i * cols + t] = m[(i, j)];
            }
        }
        Frame { rows, cols, data }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn at(&self, i: usize, t: usize) -> C64 {
        self.data[i * self.cols + t]
    }

    /// `self^dagger * other`, an `n x n` matrix; both frames must share shape.
    pub fn adjoint_mul(&self, other: &Frame) -> CMatrix {
        assert_eq!(self.rows, other.rows);
        assert_eq!(self.cols, other.cols);
        CMatrix::from_fn(self.cols, |s, t| {
            (0..self.rows)
                .map(|i| self.at(i, s).conj() * other.at(i, t))
                .sum()
        })
    }

    /// `m * self` for a square `m` acting on the embedding space.
    pub fn left_mul(&self, m: &CMatrix) -> Frame {
        assert_eq!(self.rows, m.dim());
        let mut data = vec![C64::new(0.0, 0.0); self.rows * self.cols];
        for i in 0..self.rows {
            for t in 0..self.cols {
                let mut acc = C64::new(0.0, 0.0);
                for l in 0..self.rows {
                    acc += m[(i, l)] * self.at(l, t);
                }
                data[i * self.cols + t] = acc;
            }
        }
        Frame { rows: self.rows, cols: self.cols, data }
    }

    /// The orthogonal projector `F F^dagger` onto the span of the columns.
    pub fn projector(&self) -> CMatrix {
        CMatrix::from_fn(self.rows, |i, j| {
            (0..self.cols)
                .map(|t| self.at(i, t) * self.at(j, t).conj())
                .sum()
        })
    }

    pub(crate) fn scale_col(&mut self, t: usize, s: C64) {
        for i in 0..self.rows {
            self.data[i * self.cols + t] *= s;
        }
    }
}
