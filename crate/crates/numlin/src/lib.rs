//! Dense real linear algebra used by the rest of the workspace: a column-major
//! matrix type, symmetric eigendecomposition, operator norms, PSD clamping and
//! SPD linear solves.
//!
//! Everything is generic over the scalar through [`Scalar`] (any
//! `num_traits::Float`); the concrete alias used across the workspace is
//! [`Matrix`] (`f64`). The heavy matrix products are only provided for `f64`,
//! where they are backed by `matrixmultiply`.
//!
//! The eigensolver is a Householder tridiagonalization followed by implicit-shift
//! QL (the classic EISPACK `tred2`/`tql2` pair). It is deterministic: fixed
//! iteration order, eigenvalues sorted descending, and every eigenvector is
//! normalized so that its first numerically nonzero component is positive.

use std::fmt;
use std::iter::Sum;
use std::ops::{Index, IndexMut};

use num_traits::{Float, NumAssign};
use thiserror::Error;

pub mod vecops;

/// Scalar bound for the generic routines.
pub trait Scalar: Float + NumAssign + Sum + fmt::Debug + 'static {}
impl<T> Scalar for T where T: Float + NumAssign + Sum + fmt::Debug + 'static {}

/// Concrete matrix type used throughout the workspace.
pub type Matrix = DenseMatrix<f64>;

pub type Result<T> = std::result::Result<T, LinAlgError>;

#[derive(Debug, Error)]
pub enum LinAlgError {
    #[error("matrix contains non-finite entries")]
    NonFinite,
    #[error("matrix is not symmetric (max asymmetry {asymmetry:e} > tolerance {tolerance:e})")]
    NonSymmetric { asymmetry: f64, tolerance: f64 },
    #[error("eigenvalue {value:e} below -{tolerance:e}; input is indefinite")]
    EigenvalueBelowTolerance { value: f64, tolerance: f64 },
    #[error("eigensolver failed to converge")]
    NoConvergence,
    #[error("singular or non-positive-definite system")]
    SingularSystem,
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
}

/// Dense matrix with column-major storage (each column is contiguous).
#[derive(Debug, Clone, PartialEq)]
pub struct DenseMatrix<T> {
    rows: usize,
    cols: usize,
    data: Vec<T>,
}

impl<T: Scalar> DenseMatrix<T> {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        DenseMatrix {
            rows,
            cols,
            data: vec![T::zero(); rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = T::one();
        }
        m
    }

    pub fn from_diag(d: &[T]) -> Self {
        let mut m = Self::zeros(d.len(), d.len());
        for (i, &v) in d.iter().enumerate() {
            m[(i, i)] = v;
        }
        m
    }

    /// Builds from a column-major buffer. Panics if the length is wrong.
    pub fn from_col_major(rows: usize, cols: usize, data: Vec<T>) -> Self {
        assert_eq!(data.len(), rows * cols, "buffer length must be rows*cols");
        DenseMatrix { rows, cols, data }
    }

    /// Builds from nested rows (convenient in tests).
    pub fn from_rows(rows: &[Vec<T>]) -> Self {
        let r = rows.len();
        let c = if r == 0 { 0 } else { rows[0].len() };
        let mut m = Self::zeros(r, c);
        for (i, row) in rows.iter().enumerate() {
            assert_eq!(row.len(), c, "ragged rows");
            for (j, &v) in row.iter().enumerate() {
                m[(i, j)] = v;
            }
        }
        m
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

    pub fn data(&self) -> &[T] {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut [T] {
        &mut self.data
    }

    pub fn col(&self, j: usize) -> &[T] {
        &self.data[j * self.rows..(j + 1) * self.rows]
    }

    pub fn col_mut(&mut self, j: usize) -> &mut [T] {
        &mut self.data[j * self.rows..(j + 1) * self.rows]
    }

    pub fn transpose(&self) -> Self {
        let mut out = Self::zeros(self.cols, self.rows);
        for j in 0..self.cols {
            for i in 0..self.rows {
                out[(j, i)] = self[(i, j)];
            }
        }
        out
    }

    pub fn all_finite(&self) -> bool {
        self.data.iter().all(|v| v.is_finite())
    }

    pub fn max_abs(&self) -> T {
        self.data.iter().fold(T::zero(), |a, &v| a.max(v.abs()))
    }

    pub fn frobenius_norm(&self) -> T {
        self.data.iter().map(|&v| v * v).sum::<T>().sqrt()
    }

    pub fn scaled(&self, s: T) -> Self {
        let mut out = self.clone();
        for v in &mut out.data {
            *v *= s;
        }
        out
    }

    pub fn add(&self, other: &Self) -> Self {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        let mut out = self.clone();
        for (a, &b) in out.data.iter_mut().zip(&other.data) {
            *a += b;
        }
        out
    }

    pub fn sub(&self, other: &Self) -> Self {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        let mut out = self.clone();
        for (a, &b) in out.data.iter_mut().zip(&other.data) {
            *a -= b;
        }
        out
    }

    /// `A x` for a length-`cols` vector.
    pub fn matvec(&self, x: &[T]) -> Vec<T> {
        assert_eq!(x.len(), self.cols, "matvec dimension mismatch");
        let mut out = vec![T::zero(); self.rows];
        for j in 0..self.cols {
            let xj = x[j];
            if xj == T::zero() {
                continue;
            }
            for (o, &a) in out.iter_mut().zip(self.col(j)) {
                *o += a * xj;
            }
        }
        out
    }

    /// `Aᵀ x` for a length-`rows` vector.
    pub fn tr_matvec(&self, x: &[T]) -> Vec<T> {
        assert_eq!(x.len(), self.rows, "tr_matvec dimension mismatch");
        (0..self.cols).map(|j| dot(self.col(j), x)).collect()
    }

    fn max_asymmetry(&self) -> T {
        let mut worst = T::zero();
        for j in 0..self.cols {
            for i in 0..j {
                worst = worst.max((self[(i, j)] - self[(j, i)]).abs());
            }
        }
        worst
    }
}

impl<T: Scalar> Index<(usize, usize)> for DenseMatrix<T> {
    type Output = T;
    #[inline]
    fn index(&self, (i, j): (usize, usize)) -> &T {
        &self.data[j * self.rows + i]
    }
}

impl<T: Scalar> IndexMut<(usize, usize)> for DenseMatrix<T> {
    #[inline]
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut T {
        &mut self.data[j * self.rows + i]
    }
}

fn dot<T: Scalar>(a: &[T], b: &[T]) -> T {
    debug_assert_eq!(a.len(), b.len());
    let mut acc = T::zero();
    for (&x, &y) in a.iter().zip(b) {
        acc += x * y;
    }
    acc
}

// ---------------------------------------------------------------------------
// f64 matrix products (matrixmultiply-backed)
// ---------------------------------------------------------------------------

impl DenseMatrix<f64> {
    /// `A · B`.
    pub fn mul(&self, other: &Self) -> Self {
        assert_eq!(self.cols, other.rows, "mul dimension mismatch");
        let mut out = Self::zeros(self.rows, other.cols);
        unsafe {
            matrixmultiply::dgemm(
                self.rows,
                self.cols,
                other.cols,
                1.0,
                self.data.as_ptr(),
                1,
                self.rows as isize,
                other.data.as_ptr(),
                1,
                other.rows as isize,
                0.0,
                out.data.as_mut_ptr(),
                1,
                out.rows as isize,
            );
        }
        out
    }

    /// `Aᵀ · B`; with column-major storage this is the cache-friendly product.
    pub fn t_mul(&self, other: &Self) -> Self {
        assert_eq!(self.rows, other.rows, "t_mul dimension mismatch");
        let mut out = Self::zeros(self.cols, other.cols);
        unsafe {
            matrixmultiply::dgemm(
                self.cols,
                self.rows,
                other.cols,
                1.0,
                self.data.as_ptr(),
                self.rows as isize,
                1,
                other.data.as_ptr(),
                1,
                other.rows as isize,
                0.0,
                out.data.as_mut_ptr(),
                1,
                out.rows as isize,
            );
        }
        out
    }

    /// `A · Bᵀ`.
    pub fn mul_t(&self, other: &Self) -> Self {
        assert_eq!(self.cols, other.cols, "mul_t dimension mismatch");
        let mut out = Self::zeros(self.rows, other.rows);
        unsafe {
            matrixmultiply::dgemm(
                self.rows,
                self.cols,
                other.rows,
                1.0,
                self.data.as_ptr(),
                1,
                self.rows as isize,
                other.data.as_ptr(),
                other.rows as isize,
                1,
                0.0,
                out.data.as_mut_ptr(),
                1,
                out.rows as isize,
            );
        }
        out
    }

    /// Gram matrix `AᵀA`.
    pub fn gram(&self) -> Self {
        self.t_mul(self)
    }

    /// Gram matrix of the row block `rows_from..rows_to` of `A`, i.e.
    /// `Ā ᵀĀ` for the sub-matrix of those rows. No copy is made.
    pub fn gram_of_rows(&self, rows_from: usize, rows_to: usize) -> Self {
        assert!(rows_from <= rows_to && rows_to <= self.rows);
        let k = rows_to - rows_from;
        let mut out = Self::zeros(self.cols, self.cols);
        if k == 0 {
            return out;
        }
        unsafe {
            matrixmultiply::dgemm(
                self.cols,
                k,
                self.cols,
                1.0,
                self.data.as_ptr().add(rows_from),
                self.rows as isize,
                1,
                self.data.as_ptr().add(rows_from),
                1,
                self.rows as isize,
                0.0,
                out.data.as_mut_ptr(),
                1,
                out.rows as isize,
            );
        }
        out
    }
}

// ---------------------------------------------------------------------------
// Symmetric eigendecomposition
// ---------------------------------------------------------------------------

/// Eigendecomposition of a symmetric matrix: `A = V Λ Vᵀ` with eigenvalues
/// sorted descending and orthonormal eigenvector columns.
#[derive(Debug, Clone)]
pub struct SymEig<T> {
    pub eigenvalues: Vec<T>,
    pub eigenvectors: DenseMatrix<T>,
}

impl<T: Scalar> SymEig<T> {
    /// Reconstructs `V f(Λ) Vᵀ` for an eigenvalue map `f`.
    pub fn reconstruct_mapped(&self, f: impl Fn(T) -> T) -> DenseMatrix<T> {
        let n = self.eigenvectors.rows();
        let k = self.eigenvalues.len();
        let mut out = DenseMatrix::zeros(n, n);
        for e in 0..k {
            let lam = f(self.eigenvalues[e]);
            if lam == T::zero() {
                continue;
            }
            let v = self.eigenvectors.col(e);
            for j in 0..n {
                let s = lam * v[j];
                let col = out.col_mut(j);
                for i in 0..n {
                    col[i] += s * v[i];
                }
            }
        }
        out
    }

    pub fn reconstruct(&self) -> DenseMatrix<T> {
        self.reconstruct_mapped(|l| l)
    }
}

fn check_square_symmetric<T: Scalar>(a: &DenseMatrix<T>) -> Result<DenseMatrix<T>> {
    if !a.is_square() {
        return Err(LinAlgError::DimensionMismatch(format!(
            "sym_eig requires a square matrix, got {}x{}",
            a.rows(),
            a.cols()
        )));
    }
    if !a.all_finite() {
        return Err(LinAlgError::NonFinite);
    }
    // The 1e-8 asymmetry tolerance is scaled by the matrix magnitude so that
    // kernel matrices with entries far above 1 are not rejected for roundoff.
    let tol = T::from(1e-8).unwrap() * T::one().max(a.max_abs());
    let asym = a.max_asymmetry();
    if asym > tol {
        return Err(LinAlgError::NonSymmetric {
            asymmetry: asym.to_f64().unwrap_or(f64::NAN),
            tolerance: tol.to_f64().unwrap_or(f64::NAN),
        });
    }
    // Symmetrize as (A + Aᵀ)/2.
    let mut s = a.clone();
    let half = T::from(0.5).unwrap();
    for j in 0..s.cols() {
        for i in 0..j {
            let m = (s[(i, j)] + s[(j, i)]) * half;
            s[(i, j)] = m;
            s[(j, i)] = m;
        }
    }
    Ok(s)
}

/// Householder reduction to tridiagonal form, accumulating the transform in
/// place (EISPACK `tred2`). `d` receives the diagonal, `e` the subdiagonal.
fn tred2<T: Scalar>(v: &mut DenseMatrix<T>, d: &mut [T], e: &mut [T]) {
    let n = v.rows();
    if n == 0 {
        return;
    }
    for j in 0..n {
        d[j] = v[(n - 1, j)];
    }
    for i in (1..n).rev() {
        let l = i;
        let mut h = T::zero();
        let mut scale = T::zero();
        if l > 1 {
            for k in 0..l {
                scale += d[k].abs();
            }
        }
        if scale == T::zero() {
            e[i] = if l > 0 { d[l - 1] } else { T::zero() };
            for j in 0..l {
                d[j] = v[(l - 1, j)];
                v[(i, j)] = T::zero();
                v[(j, i)] = T::zero();
            }
        } else {
            for k in 0..l {
                d[k] /= scale;
                h += d[k] * d[k];
            }
            let mut f = d[l - 1];
            let mut g = h.sqrt();
            if f > T::zero() {
                g = -g;
            }
            e[i] = scale * g;
            h -= f * g;
            d[l - 1] = f - g;
            for j in 0..l {
                e[j] = T::zero();
            }
            for j in 0..l {
                f = d[j];
                v[(j, i)] = f;
                g = e[j] + v[(j, j)] * f;
                for k in (j + 1)..l {
                    g += v[(k, j)] * d[k];
                    e[k] += v[(k, j)] * f;
                }
                e[j] = g;
            }
            f = T::zero();
            for j in 0..l {
                e[j] /= h;
                f += e[j] * d[j];
            }
            let hh = f / (h + h);
            for j in 0..l {
                e[j] -= hh * d[j];
            }
            for j in 0..l {
                f = d[j];
                g = e[j];
                for k in j..l {
                    let t = v[(k, j)] - (f * e[k] + g * d[k]);
                    v[(k, j)] = t;
                }
                d[j] = v[(l - 1, j)];
                v[(i, j)] = T::zero();
            }
        }
        d[i] = h;
    }
    for i in 0..n {
        if i > 0 {
            v[(n - 1, i - 1)] = v[(i - 1, i - 1)];
            v[(i - 1, i - 1)] = T::one();
            let h = d[i];
            if h != T::zero() {
                for k in 0..i {
                    d[k] = v[(k, i)] / h;
                }
                for j in 0..i {
                    let mut g = T::zero();
                    for k in 0..i {
                        g += v[(k, i)] * v[(k, j)];
                    }
                    for k in 0..i {
                        let t = v[(k, j)] - g * d[k];
                        v[(k, j)] = t;
                    }
                }
            }
            for k in 0..i {
                v[(k, i)] = T::zero();
            }
        }
    }
    for j in 0..n {
        d[j] = v[(n - 1, j)];
        v[(n - 1, j)] = T::zero();
    }
    v[(n - 1, n - 1)] = T::one();
    e[0] = T::zero();
}

/// Tridiagonal-only Householder reduction (EISPACK `tred1`), for the
/// eigenvalues-only path. `a` is clobbered.
fn tred1<T: Scalar>(a: &mut DenseMatrix<T>, d: &mut [T], e: &mut [T]) {
    let n = a.rows();
    if n == 0 {
        return;
    }
    for i in 0..n {
        d[i] = a[(n - 1, i)];
        a[(n - 1, i)] = a[(i, i)];
    }
    for i in (0..n).rev() {
        let l = i; // number of elements preceding index i
        let mut h = T::zero();
        let mut scale = T::zero();
        for k in 0..l {
            scale += d[k].abs();
        }
        if l == 0 || scale == T::zero() {
            for j in 0..l {
                d[j] = a[(l - 1, j)];
                a[(l - 1, j)] = a[(i, j)];
                a[(i, j)] = T::zero();
            }
            e[i] = T::zero();
            continue;
        }
        for k in 0..l {
            d[k] /= scale;
            h += d[k] * d[k];
        }
        let f0 = d[l - 1];
        let mut g = h.sqrt();
        if f0 >= T::zero() {
            g = -g;
        }
        e[i] = scale * g;
        h -= f0 * g;
        d[l - 1] = f0 - g;
        if l > 1 {
            for j in 0..l {
                e[j] = T::zero();
            }
            for j in 0..l {
                let f = d[j];
                let mut gg = e[j] + a[(j, j)] * f;
                for k in (j + 1)..l {
                    gg += a[(k, j)] * d[k];
                    e[k] += a[(k, j)] * f;
                }
                e[j] = gg;
            }
            let mut f = T::zero();
            for j in 0..l {
                e[j] /= h;
                f += e[j] * d[j];
            }
            let hh = f / (h + h);
            for j in 0..l {
                e[j] -= hh * d[j];
            }
            for j in 0..l {
                let f = d[j];
                let g = e[j];
                for k in j..l {
                    let t = a[(k, j)] - f * e[k] - g * d[k];
                    a[(k, j)] = t;
                }
            }
        }
        for j in 0..l {
            let f = d[j];
            d[j] = a[(l - 1, j)];
            a[(l - 1, j)] = a[(i, j)];
            a[(i, j)] = f * scale;
        }
    }
}

/// Implicit-shift QL iteration on a tridiagonal matrix (EISPACK `tql2`).
/// If `v` is `Some`, eigenvectors are accumulated into it.
fn tql2<T: Scalar>(d: &mut [T], e: &mut [T], mut v: Option<&mut DenseMatrix<T>>) -> Result<()> {
    let n = d.len();
    if n == 0 {
        return Ok(());
    }
    for i in 1..n {
        e[i - 1] = e[i];
    }
    e[n - 1] = T::zero();

    let eps = T::epsilon();
    let mut f = T::zero();
    let mut tst1 = T::zero();
    for l in 0..n {
        tst1 = tst1.max(d[l].abs() + e[l].abs());
        let mut m = l;
        while m < n {
            if e[m].abs() <= eps * tst1 {
                break;
            }
            m += 1;
        }
        if m > l && m < n {
            let mut iter = 0usize;
            loop {
                iter += 1;
                if iter > 50 {
                    return Err(LinAlgError::NoConvergence);
                }
                let two = T::from(2.0).unwrap();
                let mut g = d[l];
                let mut p = (d[l + 1] - g) / (two * e[l]);
                let mut r = p.hypot(T::one());
                if p < T::zero() {
                    r = -r;
                }
                d[l] = e[l] / (p + r);
                d[l + 1] = e[l] * (p + r);
                let dl1 = d[l + 1];
                let mut h = g - d[l];
                for i in (l + 2)..n {
                    d[i] -= h;
                }
                f += h;

                p = d[m];
                let mut c = T::one();
                let mut c2 = c;
                let mut c3 = c;
                let el1 = e[l + 1];
                let mut s = T::zero();
                let mut s2 = T::zero();
                for i in (l..m).rev() {
                    c3 = c2;
                    c2 = c;
                    s2 = s;
                    g = c * e[i];
                    h = c * p;
                    r = p.hypot(e[i]);
                    e[i + 1] = s * r;
                    s = e[i] / r;
                    c = p / r;
                    p = c * d[i] - s * g;
                    d[i + 1] = h + s * (c * g + s * d[i]);
                    if let Some(vv) = v.as_deref_mut() {
                        for k in 0..vv.rows() {
                            h = vv[(k, i + 1)];
                            vv[(k, i + 1)] = s * vv[(k, i)] + c * h;
                            vv[(k, i)] = c * vv[(k, i)] - s * h;
                        }
                    }
                }
                p = -s * s2 * c3 * el1 * e[l] / dl1;
                e[l] = s * p;
                d[l] = c * p;
                if e[l].abs() <= eps * tst1 {
                    break;
                }
            }
        }
        d[l] += f;
        e[l] = T::zero();
    }
    Ok(())
}

fn sort_descending_with_vectors<T: Scalar>(d: Vec<T>, v: Option<DenseMatrix<T>>) -> SymEig<T> {
    let n = d.len();
    let mut idx: Vec<usize> = (0..n).collect();
    idx.sort_by(|&a, &b| d[b].partial_cmp(&d[a]).unwrap_or(std::cmp::Ordering::Equal));
    let eigenvalues: Vec<T> = idx.iter().map(|&i| d[i]).collect();
    let eigenvectors = match v {
        Some(v) => {
            let mut out = DenseMatrix::zeros(n, n);
            for (new_j, &old_j) in idx.iter().enumerate() {
                out.col_mut(new_j).copy_from_slice(v.col(old_j));
            }
            fix_signs(&mut out);
            out
        }
        None => DenseMatrix::zeros(0, 0),
    };
    SymEig {
        eigenvalues,
        eigenvectors,
    }
}

/// Sign convention: the first component whose magnitude exceeds
/// `1e-12 * max|v|` is made positive. Deterministic across runs.
pub fn fix_signs<T: Scalar>(v: &mut DenseMatrix<T>) {
    let tol_rel = T::from(1e-12).unwrap();
    for j in 0..v.cols() {
        let col = v.col_mut(j);
        let scale = col.iter().fold(T::zero(), |a, &x| a.max(x.abs()));
        if scale == T::zero() {
            continue;
        }
        let thresh = tol_rel * scale;
        if let Some(&lead) = col.iter().find(|&&x| x.abs() > thresh) {
            if lead < T::zero() {
                for x in col.iter_mut() {
                    *x = -*x;
                }
            }
        }
    }
}

/// Full symmetric eigendecomposition. The input is validated as finite,
/// square, and symmetric within tolerance, then symmetrized exactly.
pub fn sym_eig<T: Scalar>(a: &DenseMatrix<T>) -> Result<SymEig<T>> {
    let mut v = check_square_symmetric(a)?;
    let n = v.rows();
    let mut d = vec![T::zero(); n];
    let mut e = vec![T::zero(); n];
    tred2(&mut v, &mut d, &mut e);
    tql2(&mut d, &mut e, Some(&mut v))?;
    Ok(sort_descending_with_vectors(d, Some(v)))
}

/// Eigenvalues only (descending); used where eigenvectors are not needed.
pub fn sym_eigenvalues<T: Scalar>(a: &DenseMatrix<T>) -> Result<Vec<T>> {
    let mut work = check_square_symmetric(a)?;
    let n = work.rows();
    let mut d = vec![T::zero(); n];
    let mut e = vec![T::zero(); n];
    tred1(&mut work, &mut d, &mut e);
    tql2(&mut d, &mut e, None)?;
    d.sort_by(|a, b| b.partial_cmp(a).unwrap_or(std::cmp::Ordering::Equal));
    Ok(d)
}

// ---------------------------------------------------------------------------
// Operator norm and PSD clamp
// ---------------------------------------------------------------------------

/// Largest singular value, computed as the square root of the top eigenvalue
/// of `AᵀA` or `AAᵀ`, whichever is smaller.
pub fn operator_norm(a: &Matrix) -> Result<f64> {
    if !a.all_finite() {
        return Err(LinAlgError::NonFinite);
    }
    if a.rows() == 0 || a.cols() == 0 {
        return Ok(0.0);
    }
    let g = if a.cols() <= a.rows() {
        a.gram()
    } else {
        a.mul_t(a)
    };
    let top = sym_eigenvalues(&g)?.first().copied().unwrap_or(0.0);
    Ok(top.max(0.0).sqrt())
}

/// Operator norm of a symmetric matrix: max |eigenvalue|. Cheaper than the
/// generic path and equal to it on symmetric inputs.
pub fn operator_norm_sym(a: &Matrix) -> Result<f64> {
    let vals = sym_eigenvalues(a)?;
    Ok(vals.iter().fold(0.0f64, |m, &v| m.max(v.abs())))
}

/// Replaces eigenvalues in `[-tol, 0)` by zero. Errors if any eigenvalue is
/// below `-tol` (a genuinely indefinite input). PSD inputs are returned
/// unchanged.
pub fn psd_clamp(a: &Matrix, tol: f64) -> Result<Matrix> {
    let eig = sym_eig(a)?;
    let min = eig.eigenvalues.last().copied().unwrap_or(0.0);
    if min < -tol {
        return Err(LinAlgError::EigenvalueBelowTolerance {
            value: min,
            tolerance: tol,
        });
    }
    if min >= 0.0 {
        return Ok(a.clone());
    }
    Ok(eig.reconstruct_mapped(|l| l.max(0.0)))
}

// ---------------------------------------------------------------------------
// SPD solve (Cholesky)
// ---------------------------------------------------------------------------

/// Cholesky factor of an SPD matrix (lower triangular, in column-major form).
pub fn cholesky(a: &Matrix) -> Result<Matrix> {
    if !a.is_square() {
        return Err(LinAlgError::DimensionMismatch(
            "cholesky requires square input".into(),
        ));
    }
    if !a.all_finite() {
        return Err(LinAlgError::NonFinite);
    }
    let n = a.rows();
    let mut l = a.clone();
    for j in 0..n {
        for k in 0..j {
            let ljk = l[(j, k)];
            if ljk != 0.0 {
                for i in j..n {
                    let t = l[(i, j)] - l[(i, k)] * ljk;
                    l[(i, j)] = t;
                }
            }
        }
        let diag = l[(j, j)];
        if !(diag > 0.0) || !diag.is_finite() {
            return Err(LinAlgError::SingularSystem);
        }
        let inv = 1.0 / diag.sqrt();
        for i in j..n {
            l[(i, j)] *= inv;
        }
        for i in 0..j {
            l[(i, j)] = 0.0;
        }
    }
    Ok(l)
}

/// Solves `A x = b` for SPD `A` via Cholesky.
pub fn solve_spd(a: &Matrix, b: &[f64]) -> Result<Vec<f64>> {
    if b.len() != a.rows() {
        return Err(LinAlgError::DimensionMismatch(format!(
            "solve_spd: matrix is {}x{} but rhs has length {}",
            a.rows(),
            a.cols(),
            b.len()
        )));
    }
    let l = cholesky(a)?;
    let n = b.len();
    let mut x = b.to_vec();
    // forward: L y = b
    for j in 0..n {
        x[j] /= l[(j, j)];
        let xj = x[j];
        for i in (j + 1)..n {
            x[i] -= l[(i, j)] * xj;
        }
    }
    // back: Lᵀ x = y
    for j in (0..n).rev() {
        for k in (j + 1)..n {
            x[j] -= l[(k, j)] * x[k];
        }
        x[j] /= l[(j, j)];
    }
    Ok(x)
}

#[cfg(test)]
mod tests;
