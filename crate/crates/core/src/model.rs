//! XXZ chain in a transverse field: parameters, sparse operators, states.
//!
//! Basis convention, fixed for reproducible layouts: site 1 is the most
//! significant bit of the basis index and bit value 0 means spin up
//! (the +1 eigenstate of sigma^z). Open boundaries throughout.
//!
//! The Hamiltonian is
//!
//! ```text
//! H(lambda) = - sum_{n=1}^{N-1} ( sx_n sx_{n+1} + sy_n sy_{n+1} + J_z sz_n sz_{n+1} )
//!             + lambda * sum_{n=1}^{N} sx_n
//! ```
//!
//! Every matrix element is real in this basis (the sy-sy product is real),
//! so operators store plain `f64` values.

use std::io::Write;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::linalg::Matrix;

/// Hard capacity budget: 2^22 basis states is about the largest chain the
/// sparse storage can hold comfortably in memory at desk scale.
pub const MAX_SITES: usize = 22;

/// Entries smaller than this are dropped from sparse storage. All matrix
/// elements of the chain Hamiltonian are exact multiples of 1, 2, J_z or
/// lambda; the threshold only guards arithmetic noise in composed operators.
pub const SPARSE_DROP_TOL: f64 = 1e-15;

/// Boundary condition of the chain.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Boundary {
    Open,
}

/// Model definition: chain size, anisotropy and transverse field.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChainParams {
    pub n_sites: usize,
    pub j_z: f64,
    pub field: f64,
    pub boundary: Boundary,
}

impl ChainParams {
    pub fn new(n_sites: usize, j_z: f64, field: f64) -> Result<Self> {
        if n_sites < 2 {
            return Err(Error::TooFewSites(n_sites));
        }
        if n_sites > MAX_SITES {
            return Err(Error::Capacity {
                n_sites,
                max_sites: MAX_SITES,
            });
        }
        Ok(ChainParams {
            n_sites,
            j_z,
            field,
            boundary: Boundary::Open,
        })
    }

    /// Hilbert-space dimension 2^N.
    pub fn dim(&self) -> usize {
        1 << self.n_sites
    }

    /// Same chain at a different field value.
    pub fn with_field(&self, field: f64) -> Self {
        ChainParams { field, ..*self }
    }

    /// Site used for the central on-site magnetization: floor(N/2), 1-based.
    pub fn center_site(&self) -> usize {
        (self.n_sites / 2).max(1)
    }
}

/// Real symmetric sparse operator over the 2^N computational basis, in
/// compressed-row form with rows sorted by column.
#[derive(Debug, Clone)]
pub struct SparseHermitian {
    dim: usize,
    row_ptr: Vec<usize>,
    cols: Vec<u32>,
    vals: Vec<f64>,
}

impl SparseHermitian {
    /// Build from a row generator. The generator pushes `(col, value)`
    /// pairs for one row at a time; duplicates are merged and entries
    /// below [`SPARSE_DROP_TOL`] dropped.
    pub fn from_rows(dim: usize, mut row_fn: impl FnMut(usize, &mut Vec<(usize, f64)>)) -> Self {
        let mut row_ptr = Vec::with_capacity(dim + 1);
        let mut cols: Vec<u32> = Vec::new();
        let mut vals: Vec<f64> = Vec::new();
        let mut buf: Vec<(usize, f64)> = Vec::new();
        row_ptr.push(0);
        for r in 0..dim {
            buf.clear();
            row_fn(r, &mut buf);
            buf.sort_unstable_by_key(|&(c, _)| c);
            let mut k = 0;
            while k < buf.len() {
                let c = buf[k].0;
                let mut v = 0.0;
                while k < buf.len() && buf[k].0 == c {
                    v += buf[k].1;
                    k += 1;
                }
                if v.abs() >= SPARSE_DROP_TOL {
                    cols.push(c as u32);
                    vals.push(v);
                }
            }
            row_ptr.push(cols.len());
        }
        SparseHermitian {
            dim,
            row_ptr,
            cols,
            vals,
        }
    }

    /// Build from an unordered coordinate list. Both triangles must be
    /// supplied (or generated symmetrically); duplicates are merged.
    pub fn from_triplets(dim: usize, triplets: &[(usize, usize, f64)]) -> Self {
        let mut by_row: Vec<Vec<(usize, f64)>> = vec![Vec::new(); dim];
        for &(r, c, v) in triplets {
            by_row[r].push((c, v));
        }
        SparseHermitian::from_rows(dim, |r, buf| buf.extend_from_slice(&by_row[r]))
    }

    pub fn identity(dim: usize) -> Self {
        SparseHermitian::from_rows(dim, |r, buf| buf.push((r, 1.0)))
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn nnz(&self) -> usize {
        self.vals.len()
    }

    /// Stored value at (r, c); zero if absent.
    pub fn entry(&self, r: usize, c: usize) -> f64 {
        let lo = self.row_ptr[r];
        let hi = self.row_ptr[r + 1];
        match self.cols[lo..hi].binary_search(&(c as u32)) {
            Ok(k) => self.vals[lo + k],
            Err(_) => 0.0,
        }
    }

    /// y = A x over real vectors.
    pub fn apply_real(&self, x: &[f64], y: &mut [f64]) {
        assert_eq!(x.len(), self.dim);
        assert_eq!(y.len(), self.dim);
        for r in 0..self.dim {
            let mut acc = 0.0;
            for k in self.row_ptr[r]..self.row_ptr[r + 1] {
                acc += self.vals[k] * x[self.cols[k] as usize];
            }
            y[r] = acc;
        }
    }

    /// y = A x over complex vectors.
    pub fn apply_complex(&self, x: &[Complex64], y: &mut [Complex64]) {
        assert_eq!(x.len(), self.dim);
        assert_eq!(y.len(), self.dim);
        for r in 0..self.dim {
            let mut acc = Complex64::new(0.0, 0.0);
            for k in self.row_ptr[r]..self.row_ptr[r + 1] {
                acc += x[self.cols[k] as usize] * self.vals[k];
            }
            y[r] = acc;
        }
    }

    /// Matrix-vector product on a state.
    pub fn apply(&self, s: &PureState) -> Result<Vec<Complex64>> {
        if s.dim() != self.dim {
            return Err(Error::DimensionMismatch {
                left: self.dim,
                right: s.dim(),
            });
        }
        let mut y = vec![Complex64::new(0.0, 0.0); self.dim];
        self.apply_complex(s.amplitudes(), &mut y);
        Ok(y)
    }

    /// <x|A|x> for a real unit vector.
    pub fn expectation_real(&self, x: &[f64]) -> f64 {
        let mut y = vec![0.0; self.dim];
        self.apply_real(x, &mut y);
        crate::linalg::dot(x, y.as_slice())
    }

    /// (<x|A|x>, <x|A^2|x>) for a real unit vector, in one pass.
    pub fn moments_real(&self, x: &[f64]) -> (f64, f64) {
        let mut y = vec![0.0; self.dim];
        self.apply_real(x, &mut y);
        (crate::linalg::dot(x, &y), crate::linalg::dot(&y, &y))
    }

    /// (<psi|A|psi>, <psi|A^2|psi>) for a complex unit vector.
    pub fn moments_complex(&self, x: &[Complex64]) -> (f64, f64) {
        let mut y = vec![Complex64::new(0.0, 0.0); self.dim];
        self.apply_complex(x, &mut y);
        let mean: Complex64 = x.iter().zip(&y).map(|(a, b)| a.conj() * b).sum();
        let sq: f64 = y.iter().map(|v| v.norm_sqr()).sum();
        (mean.re, sq)
    }

    /// Weighted sum of operators, merged entrywise.
    pub fn linear_combination(terms: &[(f64, &SparseHermitian)]) -> SparseHermitian {
        assert!(!terms.is_empty());
        let dim = terms[0].1.dim;
        for (_, t) in terms {
            assert_eq!(t.dim, dim);
        }
        SparseHermitian::from_rows(dim, |r, buf| {
            for &(w, t) in terms {
                for k in t.row_ptr[r]..t.row_ptr[r + 1] {
                    buf.push((t.cols[k] as usize, w * t.vals[k]));
                }
            }
        })
    }

    /// Largest entrywise difference between two operators.
    pub fn max_abs_diff(&self, other: &SparseHermitian) -> f64 {
        assert_eq!(self.dim, other.dim);
        let mut worst = 0.0f64;
        for r in 0..self.dim {
            let mut ka = self.row_ptr[r];
            let mut kb = other.row_ptr[r];
            while ka < self.row_ptr[r + 1] || kb < other.row_ptr[r + 1] {
                let ca = if ka < self.row_ptr[r + 1] {
                    self.cols[ka]
                } else {
                    u32::MAX
                };
                let cb = if kb < other.row_ptr[r + 1] {
                    other.cols[kb]
                } else {
                    u32::MAX
                };
                let d = match ca.cmp(&cb) {
                    std::cmp::Ordering::Less => {
                        ka += 1;
                        self.vals[ka - 1].abs()
                    }
                    std::cmp::Ordering::Greater => {
                        kb += 1;
                        other.vals[kb - 1].abs()
                    }
                    std::cmp::Ordering::Equal => {
                        ka += 1;
                        kb += 1;
                        (self.vals[ka - 1] - other.vals[kb - 1]).abs()
                    }
                };
                worst = worst.max(d);
            }
        }
        worst
    }

    /// Largest Hermiticity violation max |A - A^T|; exactly zero for all
    /// operators built here.
    pub fn max_asymmetry(&self) -> f64 {
        let mut worst = 0.0f64;
        for r in 0..self.dim {
            for k in self.row_ptr[r]..self.row_ptr[r + 1] {
                let c = self.cols[k] as usize;
                worst = worst.max((self.vals[k] - self.entry(c, r)).abs());
            }
        }
        worst
    }

    pub fn to_matrix(&self) -> Matrix {
        let mut m = Matrix::zeros(self.dim, self.dim);
        for r in 0..self.dim {
            for k in self.row_ptr[r]..self.row_ptr[r + 1] {
                m[(r, self.cols[k] as usize)] = self.vals[k];
            }
        }
        m
    }

    /// Coordinate-list text dump for cross-implementation diffing:
    /// a `dim nnz` header, then one `row col re im` line per stored entry
    /// (0-based indices, rows ascending, columns ascending within a row).
    pub fn write_coo<W: Write>(&self, w: &mut W) -> std::io::Result<()> {
        writeln!(w, "{} {}", self.dim, self.nnz())?;
        for r in 0..self.dim {
            for k in self.row_ptr[r]..self.row_ptr[r + 1] {
                writeln!(w, "{} {} {} {}", r, self.cols[k], self.vals[k], 0.0)?;
            }
        }
        Ok(())
    }
}

/// Normalized complex state vector of dimension 2^N.
#[derive(Debug, Clone)]
pub struct PureState {
    amplitudes: Vec<Complex64>,
}

impl PureState {
    /// Wrap an amplitude vector, requiring unit norm within 1e-12.
    pub fn new(amplitudes: Vec<Complex64>) -> Result<Self> {
        let n: f64 = amplitudes.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
        if (n - 1.0).abs() > 1e-12 {
            return Err(Error::NotNormalized(n));
        }
        Ok(PureState { amplitudes })
    }

    /// Wrap and rescale to unit norm.
    pub fn normalized(mut amplitudes: Vec<Complex64>) -> Self {
        let n: f64 = amplitudes.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
        assert!(n > 0.0, "cannot normalize the zero vector");
        for a in &mut amplitudes {
            *a /= n;
        }
        PureState { amplitudes }
    }

    pub fn from_real(v: &[f64]) -> Result<Self> {
        PureState::new(v.iter().map(|&x| Complex64::new(x, 0.0)).collect())
    }

    /// Computational basis state |index>.
    pub fn basis_state(dim: usize, index: usize) -> Self {
        let mut amplitudes = vec![Complex64::new(0.0, 0.0); dim];
        amplitudes[index] = Complex64::new(1.0, 0.0);
        PureState { amplitudes }
    }

    pub fn dim(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amplitudes
    }

    pub fn norm(&self) -> f64 {
        self.amplitudes
            .iter()
            .map(|a| a.norm_sqr())
            .sum::<f64>()
            .sqrt()
    }

    /// <self|other>.
    pub fn overlap(&self, other: &PureState) -> Result<Complex64> {
        if self.dim() != other.dim() {
            return Err(Error::DimensionMismatch {
                left: self.dim(),
                right: other.dim(),
            });
        }
        Ok(self
            .amplitudes
            .iter()
            .zip(&other.amplitudes)
            .map(|(a, b)| a.conj() * b)
            .sum())
    }

    /// |self> tensor |other>, with `self` on the most significant bits.
    pub fn tensor(&self, other: &PureState) -> PureState {
        let mut amplitudes = Vec::with_capacity(self.dim() * other.dim());
        for a in &self.amplitudes {
            for b in &other.amplitudes {
                amplitudes.push(a * b);
            }
        }
        PureState { amplitudes }
    }
}

#[inline]
fn site_mask(n_sites: usize, site: usize) -> usize {
    1 << (n_sites - site)
}

#[inline]
fn sigma_z(index: usize, n_sites: usize, site: usize) -> f64 {
    if index & site_mask(n_sites, site) == 0 {
        1.0
    } else {
        -1.0
    }
}

/// Full chain Hamiltonian H(lambda) as a sparse real symmetric operator.
pub fn build_hamiltonian(p: &ChainParams) -> Result<SparseHermitian> {
    let p = ChainParams::new(p.n_sites, p.j_z, p.field)?;
    let n = p.n_sites;
    let dim = p.dim();
    Ok(SparseHermitian::from_rows(dim, |i, buf| {
        let mut diag = 0.0;
        for s in 1..n {
            diag -= p.j_z * sigma_z(i, n, s) * sigma_z(i, n, s + 1);
        }
        buf.push((i, diag));
        // XX + YY exchange: hops between anti-aligned neighbors, amplitude -2
        for s in 1..n {
            let m1 = site_mask(n, s);
            let m2 = site_mask(n, s + 1);
            if (i & m1 == 0) != (i & m2 == 0) {
                buf.push((i ^ (m1 | m2), -2.0));
            }
        }
        // transverse field lambda * sigma^x on every site
        for s in 1..=n {
            buf.push((i ^ site_mask(n, s), p.field));
        }
    }))
}

/// The field operator M_x = sum_n sigma^x_n (the part of H coupled to
/// lambda). Its operator norm is exactly N.
pub fn build_h1(p: &ChainParams) -> Result<SparseHermitian> {
    let p = ChainParams::new(p.n_sites, p.j_z, p.field)?;
    let n = p.n_sites;
    Ok(SparseHermitian::from_rows(p.dim(), |i, buf| {
        for s in 1..=n {
            buf.push((i ^ site_mask(n, s), 1.0));
        }
    }))
}

/// Single-site magnetization sigma^x at `site` (1-based).
pub fn build_local_h(p: &ChainParams, site: usize) -> Result<SparseHermitian> {
    let p = ChainParams::new(p.n_sites, p.j_z, p.field)?;
    if site < 1 || site > p.n_sites {
        return Err(Error::SiteOutOfRange {
            site,
            n_sites: p.n_sites,
        });
    }
    let n = p.n_sites;
    Ok(SparseHermitian::from_rows(p.dim(), |i, buf| {
        buf.push((i ^ site_mask(n, site), 1.0));
    }))
}

/// Two-site product sigma^x_a sigma^x_b, used by the correlator diagnostic.
pub fn build_sxsx(p: &ChainParams, a: usize, b: usize) -> Result<SparseHermitian> {
    let p = ChainParams::new(p.n_sites, p.j_z, p.field)?;
    for site in [a, b] {
        if site < 1 || site > p.n_sites {
            return Err(Error::SiteOutOfRange {
                site,
                n_sites: p.n_sites,
            });
        }
    }
    let n = p.n_sites;
    let mask = site_mask(n, a) ^ site_mask(n, b);
    Ok(SparseHermitian::from_rows(p.dim(), |i, buf| {
        buf.push((i ^ mask, 1.0));
    }))
}

/// Swap observable S^(tensor N) on a doubled register of 2N qubits:
/// maps |a>|b> to |b>|a> where each register holds N sites. A real
/// symmetric permutation matrix, used by the swap estimator.
pub fn build_swap(n_sites: usize) -> Result<SparseHermitian> {
    if 2 * n_sites > MAX_SITES {
        return Err(Error::Capacity {
            n_sites: 2 * n_sites,
            max_sites: MAX_SITES,
        });
    }
    let half = 1usize << n_sites;
    let dim = half * half;
    Ok(SparseHermitian::from_rows(dim, |i, buf| {
        let (a, b) = (i / half, i % half);
        buf.push((b * half + a, 1.0));
    }))
}
