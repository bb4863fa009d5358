//! Dense complex matrices and the handful of operations the certificates
//! need: Frobenius pairing, Gram ranks, symmetric/antisymmetric splitting,
//! column-stacking vectorization and unitarity checks.
//!
//! Vectorization convention: `vec(A)[j·m + i] = A[i][j]` (columns stacked).
//! Under it `vec(U)` equals `(I ⊗ U)·φ` with `φ = Σ e_i ⊗ e_i`, and the Choi
//! matrix `Σ E_ij ⊗ Φ(E_ij)` of `X ↦ U X U*` is `vec(U)·vec(U)*`.

use std::ops::{Add, Index, IndexMut, Mul, Sub};

use nalgebra::DMatrix;
use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const ZERO: Complex64 = Complex64::new(0.0, 0.0);
pub const ONE: Complex64 = Complex64::new(1.0, 0.0);

/// Numerical thresholds shared by every check.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Tolerance {
    /// Absolute tolerance for deviations from exact identities.
    pub eps: f64,
    /// Relative eigenvalue cutoff for numerical rank.
    pub rank_eps: f64,
}

impl Default for Tolerance {
    fn default() -> Self {
        Self {
            eps: 1e-9,
            rank_eps: 1e-7,
        }
    }
}

impl Tolerance {
    pub fn new(eps: f64, rank_eps: f64) -> Result<Self> {
        if !(eps > 0.0 && eps.is_finite()) || !(rank_eps > 0.0 && rank_eps.is_finite()) {
            return Err(Error::Invalid(format!(
                "tolerances must be positive and finite (eps = {eps}, rank_eps = {rank_eps})"
            )));
        }
        Ok(Self { eps, rank_eps })
    }
}

/// Row-major dense complex matrix.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "MatrixJson", into = "MatrixJson")]
pub struct ComplexMatrix {
    rows: usize,
    cols: usize,
    data: Vec<Complex64>,
}

/// On-disk form: `{"rows": m, "cols": n, "data": [[re, im], ...]}`, row-major.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MatrixJson {
    pub rows: usize,
    pub cols: usize,
    pub data: Vec<[f64; 2]>,
}

impl TryFrom<MatrixJson> for ComplexMatrix {
    type Error = Error;

    fn try_from(m: MatrixJson) -> Result<Self> {
        let data = m
            .data
            .into_iter()
            .map(|[re, im]| Complex64::new(re, im))
            .collect();
        ComplexMatrix::new(m.rows, m.cols, data)
    }
}

impl From<ComplexMatrix> for MatrixJson {
    fn from(m: ComplexMatrix) -> Self {
        MatrixJson {
            rows: m.rows,
            cols: m.cols,
            data: m.data.into_iter().map(|z| [z.re, z.im]).collect(),
        }
    }
}

impl ComplexMatrix {
    pub fn new(rows: usize, cols: usize, data: Vec<Complex64>) -> Result<Self> {
        if rows == 0 || cols == 0 || data.len() != rows * cols {
            return Err(Error::Invalid(format!(
                "{rows}x{cols} matrix needs {} entries, got {}",
                rows * cols,
                data.len()
            )));
        }
        Ok(Self { rows, cols, data })
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![ZERO; rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        Self::from_fn(n, n, |i, j| if i == j { ONE } else { ZERO })
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

    /// Real row-major entries.
    pub fn from_real(rows: usize, cols: usize, values: &[f64]) -> Result<Self> {
        Self::new(
            rows,
            cols,
            values.iter().map(|&x| Complex64::new(x, 0.0)).collect(),
        )
    }

    /// Column vector.
    pub fn column(values: Vec<Complex64>) -> Self {
        Self {
            rows: values.len(),
            cols: 1,
            data: values,
        }
    }

    /// Elementary matrix `E_{ij}` of size `n`.
    pub fn unit(n: usize, i: usize, j: usize) -> Self {
        let mut m = Self::zeros(n, n);
        m[(i, j)] = ONE;
        m
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.rows, self.cols)
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn data(&self) -> &[Complex64] {
        &self.data
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self[(j, i)])
    }

    pub fn adjoint(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self[(j, i)].conj())
    }

    pub fn conj(&self) -> Self {
        self.map(|z| z.conj())
    }

    pub fn map(&self, f: impl Fn(Complex64) -> Complex64) -> Self {
        Self {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|&z| f(z)).collect(),
        }
    }

    pub fn scale(&self, c: Complex64) -> Self {
        self.map(|z| z * c)
    }

    pub fn scale_real(&self, c: f64) -> Self {
        self.map(|z| z * c)
    }

    pub fn trace(&self) -> Complex64 {
        (0..self.rows.min(self.cols)).map(|i| self[(i, i)]).sum()
    }

    /// Largest entry modulus.
    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    /// Largest imaginary-part magnitude.
    pub fn max_imag(&self) -> f64 {
        self.data.iter().map(|z| z.im.abs()).fold(0.0, f64::max)
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.data.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn matmul(&self, other: &Self) -> Result<Self> {
        if self.cols != other.rows {
            return Err(Error::ShapeMismatch {
                left: self.shape(),
                right: other.shape(),
            });
        }
        let mut out = Self::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self[(i, k)];
                if a == ZERO {
                    continue;
                }
                let row = &other.data[k * other.cols..(k + 1) * other.cols];
                let dst = &mut out.data[i * other.cols..(i + 1) * other.cols];
                for (d, &b) in dst.iter_mut().zip(row) {
                    *d += a * b;
                }
            }
        }
        Ok(out)
    }

    /// Kronecker product `self ⊗ other`.
    pub fn kron(&self, other: &Self) -> Self {
        let (m, n) = other.shape();
        Self::from_fn(self.rows * m, self.cols * n, |i, j| {
            self[(i / m, j / n)] * other[(i % m, j % n)]
        })
    }

    fn zip_with(&self, other: &Self, f: impl Fn(Complex64, Complex64) -> Complex64) -> Result<Self> {
        if self.shape() != other.shape() {
            return Err(Error::ShapeMismatch {
                left: self.shape(),
                right: other.shape(),
            });
        }
        Ok(Self {
            rows: self.rows,
            cols: self.cols,
            data: self
                .data
                .iter()
                .zip(&other.data)
                .map(|(&a, &b)| f(a, b))
                .collect(),
        })
    }

    pub fn try_add(&self, other: &Self) -> Result<Self> {
        self.zip_with(other, |a, b| a + b)
    }

    pub fn try_sub(&self, other: &Self) -> Result<Self> {
        self.zip_with(other, |a, b| a - b)
    }

    fn require_square(&self) -> Result<usize> {
        if self.is_square() {
            Ok(self.rows)
        } else {
            Err(Error::NotSquare {
                rows: self.rows,
                cols: self.cols,
            })
        }
    }

    /// Determinant by LU with partial pivoting.
    pub fn determinant(&self) -> Result<Complex64> {
        let n = self.require_square()?;
        let mut a = self.data.clone();
        let mut det = ONE;
        for col in 0..n {
            let pivot = (col..n)
                .max_by(|&x, &y| a[x * n + col].norm().total_cmp(&a[y * n + col].norm()))
                .expect("nonempty range");
            if a[pivot * n + col] == ZERO {
                return Ok(ZERO);
            }
            if pivot != col {
                for j in 0..n {
                    a.swap(pivot * n + j, col * n + j);
                }
                det = -det;
            }
            let p = a[col * n + col];
            det *= p;
            for row in col + 1..n {
                let f = a[row * n + col] / p;
                if f == ZERO {
                    continue;
                }
                for j in col..n {
                    let v = a[col * n + j];
                    a[row * n + j] -= f * v;
                }
            }
        }
        Ok(det)
    }

    pub fn to_nalgebra(&self) -> DMatrix<Complex64> {
        DMatrix::from_row_slice(self.rows, self.cols, &self.data)
    }
}

impl Index<(usize, usize)> for ComplexMatrix {
    type Output = Complex64;

    fn index(&self, (i, j): (usize, usize)) -> &Complex64 {
        assert!(i < self.rows && j < self.cols, "index ({i},{j}) out of bounds");
        &self.data[i * self.cols + j]
    }
}

impl IndexMut<(usize, usize)> for ComplexMatrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut Complex64 {
        assert!(i < self.rows && j < self.cols, "index ({i},{j}) out of bounds");
        &mut self.data[i * self.cols + j]
    }
}

// Operator forms panic on shape mismatch; use the `try_*` methods when the
// shapes are not known to agree.
impl Add for &ComplexMatrix {
    type Output = ComplexMatrix;

    fn add(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        self.try_add(rhs).expect("shape mismatch in +")
    }
}

impl Sub for &ComplexMatrix {
    type Output = ComplexMatrix;

    fn sub(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        self.try_sub(rhs).expect("shape mismatch in -")
    }
}

impl Mul for &ComplexMatrix {
    type Output = ComplexMatrix;

    fn mul(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        self.matmul(rhs).expect("shape mismatch in *")
    }
}

/// `tr(a*·b) = Σ conj(a_ij)·b_ij`.
pub fn frobenius_inner(a: &ComplexMatrix, b: &ComplexMatrix) -> Result<Complex64> {
    if a.shape() != b.shape() {
        return Err(Error::ShapeMismatch {
            left: a.shape(),
            right: b.shape(),
        });
    }
    Ok(a.data
        .iter()
        .zip(&b.data)
        .map(|(x, y)| x.conj() * y)
        .sum())
}

/// Hermitian Gram matrix `G_ij = ⟨v_i, v_j⟩` under the Frobenius pairing.
pub fn gram_matrix(vectors: &[ComplexMatrix]) -> Result<ComplexMatrix> {
    let n = vectors.len();
    if let Some(first) = vectors.first() {
        if let Some(bad) = vectors.iter().find(|v| v.shape() != first.shape()) {
            return Err(Error::ShapeMismatch {
                left: first.shape(),
                right: bad.shape(),
            });
        }
    }
    let rows: Vec<Vec<Complex64>> = (0..n)
        .into_par_iter()
        .map(|i| {
            (i..n)
                .map(|j| frobenius_inner(&vectors[i], &vectors[j]).expect("shapes checked"))
                .collect()
        })
        .collect();
    let mut g = ComplexMatrix::zeros(n, n);
    for (i, row) in rows.into_iter().enumerate() {
        for (off, v) in row.into_iter().enumerate() {
            let j = i + off;
            g[(i, j)] = v;
            g[(j, i)] = v.conj();
        }
    }
    Ok(g)
}

/// Eigen-decomposition of a Hermitian matrix: ascending eigenvalues and the
/// matching orthonormal eigenvectors as columns.
pub fn hermitian_eigen(h: &ComplexMatrix) -> Result<(Vec<f64>, DMatrix<Complex64>)> {
    let n = h.require_square()?;
    if n == 0 {
        return Ok((Vec::new(), DMatrix::zeros(0, 0)));
    }
    let eig = nalgebra::SymmetricEigen::new(h.to_nalgebra());
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let values = order.iter().map(|&k| eig.eigenvalues[k]).collect();
    let vectors = DMatrix::from_fn(n, n, |i, c| eig.eigenvectors[(i, order[c])]);
    Ok((values, vectors))
}

/// Ascending eigenvalues of a Hermitian matrix.
pub fn hermitian_eigenvalues(h: &ComplexMatrix) -> Result<Vec<f64>> {
    h.require_square()?;
    let mut values: Vec<f64> = nalgebra::SymmetricEigen::new(h.to_nalgebra())
        .eigenvalues
        .iter()
        .copied()
        .collect();
    values.sort_by(f64::total_cmp);
    Ok(values)
}

/// Count of eigenvalues above `rank_eps · λ_max`.
pub fn rank_from_eigenvalues(values: &[f64], tol: &Tolerance) -> usize {
    let top = values.iter().copied().fold(0.0, f64::max);
    if top <= 0.0 {
        return 0;
    }
    values.iter().filter(|&&v| v > tol.rank_eps * top).count()
}

/// Dimension of the span of `vectors`, from the eigenvalues of their Gram
/// matrix.
pub fn numerical_rank(vectors: &[ComplexMatrix], tol: &Tolerance) -> Result<usize> {
    if vectors.is_empty() {
        return Ok(0);
    }
    let g = gram_matrix(vectors)?;
    Ok(rank_from_eigenvalues(&hermitian_eigenvalues(&g)?, tol))
}

/// `((a + aᵀ)/2, (a − aᵀ)/2)`.
pub fn sym_antisym_split(a: &ComplexMatrix) -> Result<(ComplexMatrix, ComplexMatrix)> {
    a.require_square()?;
    let t = a.transpose();
    Ok(((a + &t).scale_real(0.5), (a - &t).scale_real(0.5)))
}

/// Unnormalized column stacking, `vec(A)[j·m + i] = A[i][j]`.
pub fn vec_columns(a: &ComplexMatrix) -> ComplexMatrix {
    let (m, n) = a.shape();
    ComplexMatrix::column((0..m * n).map(|idx| a[(idx % m, idx / m)]).collect())
}

/// Maximally entangled state of a `d×d` matrix: `vec(U)/√d`.
pub fn cj_vectorize(u: &ComplexMatrix) -> Result<ComplexMatrix> {
    let d = u.require_square()?;
    Ok(vec_columns(u).scale_real(1.0 / (d as f64).sqrt()))
}

/// Returns `(deviation ≤ eps, deviation)` with deviation `max |(u*u − I)_ij|`.
pub fn is_unitary(u: &ComplexMatrix, tol: &Tolerance) -> Result<(bool, f64)> {
    let d = u.require_square()?;
    let dev = (&(&u.adjoint() * u) - &ComplexMatrix::identity(d)).max_abs();
    Ok((dev <= tol.eps, dev))
}
