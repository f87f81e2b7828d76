//! Dense complex matrices and the few decompositions the rest of the crate needs.
//!
//! Storage is row-major. Heavy kernels (products, eigendecomposition, QR) are delegated
//! to `faer` through zero-copy views.

mod io;
mod rng;

pub use io::{read_binary, read_csv, write_binary, write_csv};
pub use rng::{complex_gaussian, haar_unitary, RngStream};

use crate::error::{param, Error, Result};
use faer::linalg::solvers::Solve;
use faer::{Mat, MatRef, Side};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

/// Tolerance used by [`hermitian_eig`] to accept a matrix as Hermitian.
pub const HERMITIAN_TOL: f64 = 1e-12;

/// A dense complex matrix stored row-major.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "MatrixRepr", into = "MatrixRepr")]
pub struct ComplexMatrix {
    rows: usize,
    cols: usize,
    data: Vec<Complex64>,
}

impl ComplexMatrix {
    /// Builds a matrix from row-major data. Entries must be finite.
    pub fn new(rows: usize, cols: usize, data: Vec<Complex64>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::Dimension(format!(
                "{} entries for a {rows}x{cols} matrix",
                data.len()
            )));
        }
        if let Some(pos) = data.iter().position(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return param(format!("non-finite entry at ({}, {})", pos / cols, pos % cols));
        }
        Ok(Self { rows, cols, data })
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self { rows, cols, data: vec![Complex64::new(0.0, 0.0); rows * cols] }
    }

    pub fn identity(n: usize) -> Self {
        Self::from_real_diagonal(&vec![1.0; n])
    }

    pub fn from_real_diagonal(diag: &[f64]) -> Self {
        let n = diag.len();
        let mut m = Self::zeros(n, n);
        for (i, &d) in diag.iter().enumerate() {
            m.data[i * n + i] = Complex64::new(d, 0.0);
        }
        m
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> Complex64) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        Self { rows, cols, data }
    }

    /// Builds a matrix whose columns are the given vectors.
    pub fn from_columns(columns: &[Vec<Complex64>]) -> Result<Self> {
        let cols = columns.len();
        let rows = columns.first().map_or(0, Vec::len);
        if columns.iter().any(|c| c.len() != rows) {
            return Err(Error::Dimension("columns of unequal length".into()));
        }
        Ok(Self::from_fn(rows, cols, |i, j| columns[j][i]))
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn get(&self, i: usize, j: usize) -> Complex64 {
        self.data[i * self.cols + j]
    }

    pub fn set(&mut self, i: usize, j: usize, value: Complex64) {
        self.data[i * self.cols + j] = value;
    }

    pub fn as_slice(&self) -> &[Complex64] {
        &self.data
    }

    pub fn row(&self, i: usize) -> &[Complex64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn row_mut(&mut self, i: usize) -> &mut [Complex64] {
        let c = self.cols;
        &mut self.data[i * c..(i + 1) * c]
    }

    pub fn column(&self, j: usize) -> Vec<Complex64> {
        (0..self.rows).map(|i| self.get(i, j)).collect()
    }

    pub fn into_vec(self) -> Vec<Complex64> {
        self.data
    }

    pub fn adjoint(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self.get(j, i).conj())
    }

    pub fn scale(&self, alpha: f64) -> Self {
        Self { rows: self.rows, cols: self.cols, data: self.data.iter().map(|z| z * alpha).collect() }
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        if self.rows != other.rows || self.cols != other.cols {
            return Err(Error::Dimension(format!(
                "cannot add {}x{} and {}x{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        let data = self.data.iter().zip(&other.data).map(|(a, b)| a + b).collect();
        Ok(Self { rows: self.rows, cols: self.cols, data })
    }

    pub fn matmul(&self, other: &Self) -> Result<Self> {
        if self.cols != other.rows {
            return Err(Error::Dimension(format!(
                "cannot multiply {}x{} by {}x{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        Ok(Self::from_faer(self.view() * other.view()))
    }

    /// `A v` for a column vector `v`.
    pub fn mul_vec(&self, v: &[Complex64]) -> Result<Vec<Complex64>> {
        if v.len() != self.cols {
            return Err(Error::Dimension(format!("vector of length {} for {} columns", v.len(), self.cols)));
        }
        Ok((0..self.rows)
            .map(|i| self.row(i).iter().zip(v).map(|(a, b)| a * b).sum())
            .collect())
    }

    /// Multiplies row `i` by `d[i]`.
    pub fn scale_rows(&self, d: &[f64]) -> Result<Self> {
        if d.len() != self.rows {
            return Err(Error::Dimension(format!("{} row scales for {} rows", d.len(), self.rows)));
        }
        let mut out = self.clone();
        for (i, &s) in d.iter().enumerate() {
            out.row_mut(i).iter_mut().for_each(|z| *z *= s);
        }
        Ok(out)
    }

    pub fn trace(&self) -> Complex64 {
        (0..self.rows.min(self.cols)).map(|i| self.get(i, i)).sum()
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.data.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    /// Largest `|A_ij - conj(A_ji)|` relative to the largest entry (zero for the zero matrix).
    pub fn hermitian_defect(&self) -> f64 {
        if !self.is_square() {
            return f64::INFINITY;
        }
        let scale = self.max_abs();
        if scale == 0.0 {
            return 0.0;
        }
        let mut worst = 0.0f64;
        for i in 0..self.rows {
            for j in i..self.cols {
                worst = worst.max((self.get(i, j) - self.get(j, i).conj()).norm());
            }
        }
        worst / scale
    }

    /// Replaces the matrix by `(A + A^H) / 2`.
    pub fn symmetrize(&mut self) {
        let n = self.rows;
        for i in 0..n {
            let d = self.get(i, i);
            self.set(i, i, Complex64::new(d.re, 0.0));
            for j in i + 1..n {
                let avg = 0.5 * (self.get(i, j) + self.get(j, i).conj());
                self.set(i, j, avg);
                self.set(j, i, avg.conj());
            }
        }
    }

    pub(crate) fn view(&self) -> MatRef<'_, Complex64> {
        MatRef::from_row_major_slice(&self.data, self.rows, self.cols)
    }

    pub(crate) fn from_faer(m: Mat<Complex64>) -> Self {
        Self::from_fn(m.nrows(), m.ncols(), |i, j| m[(i, j)])
    }
}

#[derive(Serialize, Deserialize)]
struct MatrixRepr {
    rows: usize,
    cols: usize,
    re: Vec<f64>,
    im: Vec<f64>,
}

impl From<ComplexMatrix> for MatrixRepr {
    fn from(m: ComplexMatrix) -> Self {
        Self {
            rows: m.rows,
            cols: m.cols,
            re: m.data.iter().map(|z| z.re).collect(),
            im: m.data.iter().map(|z| z.im).collect(),
        }
    }
}

impl TryFrom<MatrixRepr> for ComplexMatrix {
    type Error = Error;

    fn try_from(r: MatrixRepr) -> Result<Self> {
        if r.re.len() != r.im.len() {
            return Err(Error::Format("re and im arrays differ in length".into()));
        }
        let data = r.re.iter().zip(&r.im).map(|(&a, &b)| Complex64::new(a, b)).collect();
        ComplexMatrix::new(r.rows, r.cols, data)
    }
}

/// Eigenvalues in nondecreasing order with matching unit eigenvectors.
///
/// Each eigenvector is rotated so that its first component of non-negligible modulus is
/// real and positive.
#[derive(Debug, Clone)]
pub struct HermitianEigen {
    pub values: Vec<f64>,
    /// Eigenvectors stored as columns.
    pub vectors: ComplexMatrix,
}

impl HermitianEigen {
    pub fn dim(&self) -> usize {
        self.values.len()
    }

    pub fn vector(&self, k: usize) -> Vec<Complex64> {
        self.vectors.column(k)
    }

    /// Index of the largest and smallest eigenvalue.
    pub fn largest(&self) -> (f64, Vec<Complex64>) {
        let k = self.dim() - 1;
        (self.values[k], self.vector(k))
    }

    pub fn smallest(&self) -> (f64, Vec<Complex64>) {
        (self.values[0], self.vector(0))
    }

    /// Rebuilds `U f(Λ) U^H`.
    pub fn apply(&self, f: impl Fn(f64) -> f64) -> ComplexMatrix {
        let fl: Vec<f64> = self.values.iter().map(|&l| f(l)).collect();
        let u = &self.vectors;
        let n = self.dim();
        let mut out = ComplexMatrix::from_fn(n, n, |i, j| {
            (0..n).map(|k| u.get(i, k) * u.get(j, k).conj() * fl[k]).sum()
        });
        out.symmetrize();
        out
    }
}

/// Normalizes the phase of a vector in place: first non-negligible entry real positive.
pub fn fix_phase(v: &mut [Complex64]) {
    let scale = v.iter().map(|z| z.norm()).fold(0.0, f64::max);
    if scale == 0.0 {
        return;
    }
    if let Some(lead) = v.iter().find(|z| z.norm() > 1e-8 * scale).copied() {
        let rot = lead.conj() / lead.norm();
        v.iter_mut().for_each(|z| *z *= rot);
    }
}

fn check_hermitian(a: &ComplexMatrix) -> Result<()> {
    if !a.is_square() {
        return Err(Error::Dimension(format!("{}x{} matrix is not square", a.rows, a.cols)));
    }
    if a.rows == 0 {
        return Err(Error::Dimension("empty matrix".into()));
    }
    let defect = a.hermitian_defect();
    if defect > HERMITIAN_TOL {
        return Err(Error::NotHermitian(defect));
    }
    Ok(())
}

/// Full eigendecomposition of a Hermitian matrix.
pub fn hermitian_eig(a: &ComplexMatrix) -> Result<HermitianEigen> {
    check_hermitian(a)?;
    let evd = a
        .view()
        .self_adjoint_eigen(Side::Lower)
        .map_err(|e| Error::Decomposition(format!("{e:?}")))?;
    let n = a.rows;
    let values: Vec<f64> = (0..n).map(|k| evd.S().column_vector()[k].re).collect();
    let u = evd.U();
    let mut columns = Vec::with_capacity(n);
    for k in 0..n {
        let mut col: Vec<Complex64> = (0..n).map(|i| u[(i, k)]).collect();
        fix_phase(&mut col);
        columns.push(col);
    }
    Ok(HermitianEigen { values, vectors: ComplexMatrix::from_columns(&columns)? })
}

/// Eigenvalues of a Hermitian matrix in nondecreasing order.
pub fn hermitian_eigenvalues(a: &ComplexMatrix) -> Result<Vec<f64>> {
    check_hermitian(a)?;
    a.view()
        .self_adjoint_eigenvalues(Side::Lower)
        .map_err(|e| Error::Decomposition(format!("{e:?}")))
}

/// `(1/n) Y Y^H` for an `N x n` observation matrix, exactly Hermitian.
pub fn sample_covariance(y: &ComplexMatrix) -> Result<ComplexMatrix> {
    if y.rows == 0 || y.cols == 0 {
        return Err(Error::Dimension("empty observation matrix".into()));
    }
    let v = y.view();
    let g = v * v.adjoint();
    let mut s = ComplexMatrix::from_faer(g).scale(1.0 / y.cols as f64);
    s.symmetrize();
    Ok(s)
}

/// `(1/N) Y^H Y` for an `N x n` observation matrix.
pub fn gram(y: &ComplexMatrix) -> Result<ComplexMatrix> {
    if y.rows == 0 || y.cols == 0 {
        return Err(Error::Dimension("empty observation matrix".into()));
    }
    let v = y.view();
    let g = v.adjoint() * v;
    let mut s = ComplexMatrix::from_faer(g).scale(1.0 / y.rows as f64);
    s.symmetrize();
    Ok(s)
}

/// Eigenvalues of the sample covariance `(1/n) Y Y^H`.
pub fn sample_eigenvalues(y: &ComplexMatrix) -> Result<Vec<f64>> {
    hermitian_eigenvalues(&sample_covariance(y)?)
}

/// Inverse square root `A^{-1/2}` of a Hermitian positive definite matrix.
pub fn inverse_sqrt(a: &ComplexMatrix) -> Result<ComplexMatrix> {
    let eig = hermitian_eig(a)?;
    let top = eig.values.last().copied().unwrap_or(0.0).abs();
    if eig.values[0] <= 1e-14 * top.max(f64::MIN_POSITIVE) {
        return Err(Error::Decomposition(format!(
            "matrix is not positive definite (smallest eigenvalue {:e})",
            eig.values[0]
        )));
    }
    Ok(eig.apply(|l| 1.0 / l.sqrt()))
}

/// Square root of a Hermitian positive semidefinite matrix.
pub fn sqrt_psd(a: &ComplexMatrix) -> Result<ComplexMatrix> {
    let eig = hermitian_eig(a)?;
    let top = eig.values.last().copied().unwrap_or(0.0).abs();
    if eig.values[0] < -1e-12 * top {
        return Err(Error::Decomposition(format!(
            "matrix is not positive semidefinite (smallest eigenvalue {:e})",
            eig.values[0]
        )));
    }
    Ok(eig.apply(|l| l.max(0.0).sqrt()))
}

/// `log det A` of a Hermitian positive definite matrix via Cholesky.
pub fn log_det_hpd(a: &ComplexMatrix) -> Result<f64> {
    check_hermitian(a)?;
    let llt = a
        .view()
        .llt(Side::Lower)
        .map_err(|e| Error::Decomposition(format!("Cholesky failed: {e:?}")))?;
    let l = llt.L();
    Ok((0..a.rows).map(|i| 2.0 * l[(i, i)].re.ln()).sum())
}

/// `tr A^{-1}` of a Hermitian positive definite matrix via Cholesky solves.
pub fn trace_inverse_hpd(a: &ComplexMatrix) -> Result<f64> {
    check_hermitian(a)?;
    let llt = a
        .view()
        .llt(Side::Lower)
        .map_err(|e| Error::Decomposition(format!("Cholesky failed: {e:?}")))?;
    let n = a.rows;
    let inv = llt.solve(Mat::<Complex64>::identity(n, n));
    Ok((0..n).map(|i| inv[(i, i)].re).sum())
}

pub(crate) fn check_vector(name: &str, v: &[f64]) -> Result<()> {
    if v.is_empty() {
        return param(format!("{name} is empty"));
    }
    if v.iter().any(|x| !x.is_finite()) {
        return param(format!("{name} contains non-finite values"));
    }
    Ok(())
}
