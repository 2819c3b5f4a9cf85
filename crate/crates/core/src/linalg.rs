//! Minimal dense linear algebra over `f64`, backed by the system BLAS/LAPACK.
//!
//! Everything in this crate that needs dense matrices works with real
//! symmetric ones: the chain Hamiltonians are real in the computational
//! basis, so their Gibbs states, square roots and eigenbases are real too.

use std::os::raw::c_int;

use crate::error::{Error, Result};

extern "C" {
    fn dsyevd_(
        jobz: *const u8,
        uplo: *const u8,
        n: *const c_int,
        a: *mut f64,
        lda: *const c_int,
        w: *mut f64,
        work: *mut f64,
        lwork: *const c_int,
        iwork: *mut c_int,
        liwork: *const c_int,
        info: *mut c_int,
    );

    fn dgemm_(
        transa: *const u8,
        transb: *const u8,
        m: *const c_int,
        n: *const c_int,
        k: *const c_int,
        alpha: *const f64,
        a: *const f64,
        lda: *const c_int,
        b: *const f64,
        ldb: *const c_int,
        beta: *const f64,
        c: *mut f64,
        ldc: *const c_int,
    );
}

/// Dense column-major matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct Matrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl Matrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Matrix {
            rows,
            cols,
            data: vec![0.0; rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Matrix::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = 1.0;
        }
        m
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut m = Matrix::zeros(rows, cols);
        for c in 0..cols {
            for r in 0..rows {
                m[(r, c)] = f(r, c);
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

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    /// Column `c` as a contiguous slice.
    pub fn column(&self, c: usize) -> &[f64] {
        &self.data[c * self.rows..(c + 1) * self.rows]
    }

    pub fn column_mut(&mut self, c: usize) -> &mut [f64] {
        &mut self.data[c * self.rows..(c + 1) * self.rows]
    }

    pub fn transpose(&self) -> Matrix {
        Matrix::from_fn(self.cols, self.rows, |r, c| self[(c, r)])
    }

    pub fn trace(&self) -> f64 {
        (0..self.rows.min(self.cols)).map(|i| self[(i, i)]).sum()
    }

    pub fn scale(&mut self, s: f64) {
        for v in &mut self.data {
            *v *= s;
        }
    }

    pub fn max_abs_diff(&self, other: &Matrix) -> f64 {
        assert_eq!(self.rows, other.rows);
        assert_eq!(self.cols, other.cols);
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }

    /// `self * other` via BLAS.
    pub fn matmul(&self, other: &Matrix) -> Matrix {
        self.gemm(other, false, false)
    }

    /// `self^T * other` via BLAS.
    pub fn matmul_tn(&self, other: &Matrix) -> Matrix {
        self.gemm(other, true, false)
    }

    /// `self * other^T` via BLAS.
    pub fn matmul_nt(&self, other: &Matrix) -> Matrix {
        self.gemm(other, false, true)
    }

    fn gemm(&self, other: &Matrix, ta: bool, tb: bool) -> Matrix {
        let (m, k1) = if ta {
            (self.cols, self.rows)
        } else {
            (self.rows, self.cols)
        };
        let (k2, n) = if tb {
            (other.cols, other.rows)
        } else {
            (other.rows, other.cols)
        };
        assert_eq!(k1, k2, "inner dimensions must agree");
        let mut out = Matrix::zeros(m, n);
        if m == 0 || n == 0 || k1 == 0 {
            return out;
        }
        let (alpha, beta) = (1.0f64, 0.0f64);
        let (mm, nn, kk) = (m as c_int, n as c_int, k1 as c_int);
        let lda = self.rows as c_int;
        let ldb = other.rows as c_int;
        let ldc = m as c_int;
        let (ca, cb) = (if ta { b'T' } else { b'N' }, if tb { b'T' } else { b'N' });
        unsafe {
            dgemm_(
                &ca,
                &cb,
                &mm,
                &nn,
                &kk,
                &alpha,
                self.data.as_ptr(),
                &lda,
                other.data.as_ptr(),
                &ldb,
                &beta,
                out.data.as_mut_ptr(),
                &ldc,
            );
        }
        out
    }

    /// Eigendecomposition of a real symmetric matrix (divide and conquer).
    ///
    /// Returns ascending eigenvalues and the matrix whose columns are the
    /// corresponding orthonormal eigenvectors.
    pub fn eigh(&self) -> Result<(Vec<f64>, Matrix)> {
        assert_eq!(self.rows, self.cols, "eigh needs a square matrix");
        let n = self.rows;
        if n == 0 {
            return Ok((Vec::new(), Matrix::zeros(0, 0)));
        }
        let mut a = self.clone();
        let mut w = vec![0.0f64; n];
        let ni = n as c_int;
        let (jobz, uplo) = (b'V', b'L');
        let mut info: c_int = 0;

        let mut wkopt = 0.0f64;
        let mut iwkopt: c_int = 0;
        let query: c_int = -1;
        unsafe {
            dsyevd_(
                &jobz,
                &uplo,
                &ni,
                a.data.as_mut_ptr(),
                &ni,
                w.as_mut_ptr(),
                &mut wkopt,
                &query,
                &mut iwkopt,
                &query,
                &mut info,
            );
        }
        if info != 0 {
            return Err(Error::Lapack {
                routine: "dsyevd (workspace query)",
                info,
            });
        }
        let lwork = wkopt as c_int;
        let liwork = iwkopt;
        let mut work = vec![0.0f64; lwork as usize];
        let mut iwork = vec![0 as c_int; liwork as usize];
        unsafe {
            dsyevd_(
                &jobz,
                &uplo,
                &ni,
                a.data.as_mut_ptr(),
                &ni,
                w.as_mut_ptr(),
                work.as_mut_ptr(),
                &lwork,
                iwork.as_mut_ptr(),
                &liwork,
                &mut info,
            );
        }
        if info != 0 {
            return Err(Error::Lapack {
                routine: "dsyevd",
                info,
            });
        }
        Ok((w, a))
    }
}

impl std::ops::Index<(usize, usize)> for Matrix {
    type Output = f64;
    #[inline]
    fn index(&self, (r, c): (usize, usize)) -> &f64 {
        &self.data[c * self.rows + r]
    }
}

impl std::ops::IndexMut<(usize, usize)> for Matrix {
    #[inline]
    fn index_mut(&mut self, (r, c): (usize, usize)) -> &mut f64 {
        &mut self.data[c * self.rows + r]
    }
}

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}
