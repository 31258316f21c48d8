//! Sparse matrices, bordered sparse solves and determinant signs.
//!
//! [`SparseMatrix`] is a plain CSR container used for the Laplacian, the
//! Hessians `G_u` and the Jacobians of the augmented systems. Direct solves go
//! through faer's sparse LU. A [`Jacobian`] may carry a few dense rank-one
//! terms (the `α v̄ᵀ` and `α αᵀ` blocks of the swallowtail system) which are
//! kept out of the sparse pattern and eliminated by bordering.

use faer::sparse::{SparseColMat, Triplet};
use faer::Mat;
use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Compressed sparse row matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct SparseMatrix {
    nrows: usize,
    ncols: usize,
    indptr: Vec<usize>,
    indices: Vec<usize>,
    data: Vec<f64>,
}

impl SparseMatrix {
    /// Assembles from `(row, col, value)` triplets; duplicates are summed.
    pub fn from_triplets(nrows: usize, ncols: usize, triplets: &[(usize, usize, f64)]) -> Self {
        let mut sorted: Vec<(usize, usize, f64)> = triplets.to_vec();
        sorted.sort_by(|a, b| (a.0, a.1).cmp(&(b.0, b.1)));
        let mut indptr = vec![0usize; nrows + 1];
        let mut indices = Vec::with_capacity(sorted.len());
        let mut data = Vec::with_capacity(sorted.len());
        let mut last: Option<(usize, usize)> = None;
        for (r, c, v) in sorted {
            assert!(r < nrows && c < ncols, "triplet ({r}, {c}) outside {nrows}x{ncols}");
            if last == Some((r, c)) {
                *data.last_mut().unwrap() += v;
            } else {
                indices.push(c);
                data.push(v);
                indptr[r + 1] += 1;
                last = Some((r, c));
            }
        }
        for r in 0..nrows {
            indptr[r + 1] += indptr[r];
        }
        Self {
            nrows,
            ncols,
            indptr,
            indices,
            data,
        }
    }

    pub fn zeros(nrows: usize, ncols: usize) -> Self {
        Self::from_triplets(nrows, ncols, &[])
    }

    pub fn identity(n: usize) -> Self {
        Self::diagonal(&vec![1.0; n])
    }

    pub fn diagonal(d: &[f64]) -> Self {
        let t: Vec<_> = d.iter().enumerate().map(|(i, &v)| (i, i, v)).collect();
        Self::from_triplets(d.len(), d.len(), &t)
    }

    /// Symmetric tridiagonal Toeplitz matrix with `diag` on the diagonal and
    /// `off` on both neighbouring diagonals.
    pub fn tridiagonal(n: usize, diag: f64, off: f64) -> Self {
        let mut t = Vec::with_capacity(3 * n);
        for i in 0..n {
            t.push((i, i, diag));
            if i > 0 {
                t.push((i, i - 1, off));
            }
            if i + 1 < n {
                t.push((i, i + 1, off));
            }
        }
        Self::from_triplets(n, n, &t)
    }

    pub fn nrows(&self) -> usize {
        self.nrows
    }

    pub fn ncols(&self) -> usize {
        self.ncols
    }

    pub fn nnz(&self) -> usize {
        self.data.len()
    }

    /// Non-zeros of row `r` as `(col, value)`.
    pub fn row(&self, r: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        let span = self.indptr[r]..self.indptr[r + 1];
        self.indices[span.clone()].iter().copied().zip(self.data[span].iter().copied())
    }

    pub fn triplets(&self) -> Vec<(usize, usize, f64)> {
        let mut out = Vec::with_capacity(self.nnz());
        for r in 0..self.nrows {
            out.extend(self.row(r).map(|(c, v)| (r, c, v)));
        }
        out
    }

    pub fn get(&self, r: usize, c: usize) -> f64 {
        self.row(r).find(|&(cc, _)| cc == c).map_or(0.0, |(_, v)| v)
    }

    pub fn matvec(&self, x: &[f64]) -> Vec<f64> {
        assert_eq!(x.len(), self.ncols);
        (0..self.nrows)
            .map(|r| self.row(r).map(|(c, v)| v * x[c]).sum())
            .collect()
    }

    pub fn transpose(&self) -> Self {
        let t: Vec<_> = self.triplets().into_iter().map(|(r, c, v)| (c, r, v)).collect();
        Self::from_triplets(self.ncols, self.nrows, &t)
    }

    pub fn scale(&self, s: f64) -> Self {
        let mut out = self.clone();
        out.data.iter_mut().for_each(|v| *v *= s);
        out
    }

    pub fn add(&self, other: &Self) -> Self {
        assert_eq!((self.nrows, self.ncols), (other.nrows, other.ncols));
        let mut t = self.triplets();
        t.extend(other.triplets());
        Self::from_triplets(self.nrows, self.ncols, &t)
    }

    /// `self + diag(d)`.
    pub fn add_diagonal(&self, d: &[f64]) -> Self {
        assert_eq!(self.nrows, self.ncols);
        self.add(&Self::diagonal(d))
    }

    /// `self · diag(d)`: column `c` scaled by `d[c]`.
    pub fn scale_columns(&self, d: &[f64]) -> Self {
        let mut out = self.clone();
        for (v, &c) in out.data.iter_mut().zip(&out.indices) {
            *v *= d[c];
        }
        out
    }

    /// `diag(d) · self`.
    pub fn scale_rows(&self, d: &[f64]) -> Self {
        let mut out = self.clone();
        for r in 0..out.nrows {
            for k in out.indptr[r]..out.indptr[r + 1] {
                out.data[k] *= d[r];
            }
        }
        out
    }

    pub fn matmul(&self, other: &Self) -> Self {
        assert_eq!(self.ncols, other.nrows);
        let mut t = Vec::new();
        let mut acc = vec![0.0; other.ncols];
        let mut touched: Vec<usize> = Vec::new();
        let mut mark = vec![false; other.ncols];
        for r in 0..self.nrows {
            for (k, a) in self.row(r) {
                for (c, b) in other.row(k) {
                    if !mark[c] {
                        mark[c] = true;
                        touched.push(c);
                    }
                    acc[c] += a * b;
                }
            }
            for &c in &touched {
                t.push((r, c, acc[c]));
                acc[c] = 0.0;
                mark[c] = false;
            }
            touched.clear();
        }
        Self::from_triplets(self.nrows, other.ncols, &t)
    }

    /// Kronecker product `self ⊗ other`.
    pub fn kron(&self, other: &Self) -> Self {
        let mut t = Vec::with_capacity(self.nnz() * other.nnz());
        for (r1, c1, v1) in self.triplets() {
            for (r2, c2, v2) in other.triplets() {
                t.push((r1 * other.nrows + r2, c1 * other.ncols + c2, v1 * v2));
            }
        }
        Self::from_triplets(self.nrows * other.nrows, self.ncols * other.ncols, &t)
    }

    /// Copies the block into a larger matrix at offset `(row0, col0)`.
    pub fn shifted_triplets(&self, row0: usize, col0: usize) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        (0..self.nrows).flat_map(move |r| self.row(r).map(move |(c, v)| (r + row0, c + col0, v)))
    }

    pub fn to_dense(&self) -> DMatrix<f64> {
        let mut m = DMatrix::zeros(self.nrows, self.ncols);
        for (r, c, v) in self.triplets() {
            m[(r, c)] += v;
        }
        m
    }

    pub fn from_dense(m: &DMatrix<f64>) -> Self {
        let mut t = Vec::new();
        for r in 0..m.nrows() {
            for c in 0..m.ncols() {
                if m[(r, c)] != 0.0 {
                    t.push((r, c, m[(r, c)]));
                }
            }
        }
        Self::from_triplets(m.nrows(), m.ncols(), &t)
    }

    /// Largest absolute row sum.
    pub fn norm_inf(&self) -> f64 {
        (0..self.nrows)
            .map(|r| self.row(r).map(|(_, v)| v.abs()).sum::<f64>())
            .fold(0.0, f64::max)
    }

    /// Exact structural and numerical symmetry.
    pub fn is_symmetric(&self) -> bool {
        self.nrows == self.ncols && *self == self.transpose()
    }

    /// Largest `|i - j|` over stored entries.
    pub fn bandwidth(&self) -> usize {
        self.triplets().iter().map(|&(r, c, _)| r.abs_diff(c)).max().unwrap_or(0)
    }

    /// Solves `self · x = rhs` with a sparse LU factorisation.
    pub fn solve(&self, rhs: &[f64]) -> Result<Vec<f64>> {
        sparse_solve(self, rhs)
    }
}

fn sparse_solve(a: &SparseMatrix, rhs: &[f64]) -> Result<Vec<f64>> {
    let n = a.nrows();
    if a.ncols() != n {
        return Err(Error::LengthMismatch {
            expected: n,
            got: a.ncols(),
        });
    }
    if rhs.len() != n {
        return Err(Error::LengthMismatch {
            expected: n,
            got: rhs.len(),
        });
    }
    let trip: Vec<Triplet<usize, usize, f64>> = a
        .triplets()
        .into_iter()
        .map(|(r, c, v)| Triplet::new(r, c, v))
        .collect();
    let mat = SparseColMat::<usize, f64>::try_new_from_triplets(n, n, &trip)
        .map_err(|e| Error::Singular(format!("sparse assembly failed: {e:?}")))?;
    let lu = mat
        .sp_lu()
        .map_err(|e| Error::Singular(format!("sparse LU failed: {e:?}")))?;
    let b = Mat::from_fn(n, 1, |i, _| rhs[i]);
    let x = faer::linalg::solvers::Solve::solve(&lu, &b);
    let x: Vec<f64> = (0..n).map(|i| x[(i, 0)]).collect();
    if x.iter().any(|v| !v.is_finite()) {
        return Err(Error::Singular("non-finite solution".into()));
    }
    // a numerically singular factorisation shows up as a poor backward error
    let ax = a.matvec(&x);
    let res = ax.iter().zip(rhs).map(|(p, q)| (p - q).abs()).fold(0.0, f64::max);
    let xnorm = x.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let bnorm = rhs.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    if res > 1e-6 * (a.norm_inf() * xnorm + bnorm) {
        return Err(Error::Singular(format!("backward error {res:e} too large")));
    }
    Ok(x)
}

/// A sparse matrix plus a sum of dense rank-one terms `Σ a_i d_iᵀ`.
#[derive(Debug, Clone)]
pub struct Jacobian {
    pub sparse: SparseMatrix,
    pub rank_one: Vec<(Vec<f64>, Vec<f64>)>,
}

impl Jacobian {
    pub fn from_sparse(sparse: SparseMatrix) -> Self {
        Self {
            sparse,
            rank_one: Vec::new(),
        }
    }

    pub fn nrows(&self) -> usize {
        self.sparse.nrows()
    }

    pub fn ncols(&self) -> usize {
        self.sparse.ncols()
    }

    pub fn matvec(&self, x: &[f64]) -> Vec<f64> {
        let mut y = self.sparse.matvec(x);
        for (a, d) in &self.rank_one {
            let s: f64 = d.iter().zip(x).map(|(p, q)| p * q).sum();
            y.iter_mut().zip(a).for_each(|(yi, ai)| *yi += ai * s);
        }
        y
    }

    pub fn to_dense(&self) -> DMatrix<f64> {
        let mut m = self.sparse.to_dense();
        for (a, d) in &self.rank_one {
            m += DMatrix::from_column_slice(a.len(), 1, a) * DMatrix::from_row_slice(1, d.len(), d);
        }
        m
    }

    /// Appends one dense row below the matrix.
    pub fn with_row(&self, row: &[f64]) -> Self {
        assert_eq!(row.len(), self.ncols());
        let n = self.nrows();
        let mut t = self.sparse.triplets();
        t.extend(row.iter().enumerate().filter(|(_, v)| **v != 0.0).map(|(c, &v)| (n, c, v)));
        let sparse = SparseMatrix::from_triplets(n + 1, self.ncols(), &t);
        let rank_one = self
            .rank_one
            .iter()
            .map(|(a, d)| {
                let mut a = a.clone();
                a.push(0.0);
                (a, d.clone())
            })
            .collect();
        Self { sparse, rank_one }
    }

    /// Solves the square system. Rank-one terms are eliminated by bordering:
    /// `[S A; Dᵀ -I] [x; μ] = [b; 0]` is equivalent to `(S + A Dᵀ) x = b`.
    pub fn solve(&self, rhs: &[f64]) -> Result<Vec<f64>> {
        let n = self.nrows();
        if self.ncols() != n {
            return Err(Error::LengthMismatch {
                expected: n,
                got: self.ncols(),
            });
        }
        if self.rank_one.is_empty() {
            return self.sparse.solve(rhs);
        }
        let r = self.rank_one.len();
        let mut t = self.sparse.triplets();
        for (i, (a, d)) in self.rank_one.iter().enumerate() {
            t.extend(a.iter().enumerate().filter(|(_, v)| **v != 0.0).map(|(row, &v)| (row, n + i, v)));
            t.extend(d.iter().enumerate().filter(|(_, v)| **v != 0.0).map(|(col, &v)| (n + i, col, v)));
            t.push((n + i, n + i, -1.0));
        }
        let big = SparseMatrix::from_triplets(n + r, n + r, &t);
        let mut b = rhs.to_vec();
        b.resize(n + r, 0.0);
        let mut x = big.solve(&b)?;
        x.truncate(n);
        Ok(x)
    }
}

/// Sign of a determinant, or `Degenerate` when the matrix is numerically singular.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Sign {
    Positive,
    Negative,
    Degenerate,
}

impl Sign {
    pub fn from_value(v: f64) -> Self {
        if v > 0.0 {
            Sign::Positive
        } else if v < 0.0 {
            Sign::Negative
        } else {
            Sign::Degenerate
        }
    }

    pub fn as_i32(self) -> i32 {
        match self {
            Sign::Positive => 1,
            Sign::Negative => -1,
            Sign::Degenerate => 0,
        }
    }
}

/// Relative pivot threshold below which the unpivoted factorisation is not trusted.
pub const PIVOT_TOLERANCE: f64 = 1e-10;
/// Relative shift used by the inertia fallback.
pub const INERTIA_SHIFT: f64 = 1e-8;

/// Pivots of the unpivoted `L D Lᵀ` factorisation of a symmetric banded matrix
/// shifted by `shift · I`. Only the lower band is read.
pub fn ldlt_pivots(a: &SparseMatrix, shift: f64) -> Vec<f64> {
    let n = a.nrows();
    let bw = a.bandwidth();
    // lower band storage: band[i][i - j] = L_ij (or A_ij before elimination)
    let mut band = vec![vec![0.0; bw + 1]; n];
    for (r, c, v) in a.triplets() {
        if c <= r {
            band[r][r - c] += v;
        }
    }
    for (i, row) in band.iter_mut().enumerate() {
        let _ = i;
        row[0] += shift;
    }
    let mut d = vec![0.0; n];
    for j in 0..n {
        let lo = j.saturating_sub(bw);
        let mut djj = band[j][0];
        for k in lo..j {
            let ljk = band[j][j - k];
            djj -= ljk * ljk * d[k];
        }
        d[j] = djj;
        let hi = (j + bw).min(n - 1);
        for i in j + 1..=hi {
            let mut aij = band[i][i - j];
            let lo_i = i.saturating_sub(bw).max(lo);
            for k in lo_i..j {
                aij -= band[i][i - k] * band[j][j - k] * d[k];
            }
            band[i][i - j] = aij / djj;
        }
    }
    d
}

/// Sign of `det(a)` for symmetric `a`, from an unpivoted `L D Lᵀ` factorisation.
///
/// If a pivot is tiny relative to `‖a‖_∞`, the inertia of `a ∓ εI` is compared
/// instead (Sylvester's law): differing negative counts mean an eigenvalue
/// lies in `(-ε, ε)` and the result is `Degenerate`.
pub fn determinant_sign(a: &SparseMatrix) -> Sign {
    assert_eq!(a.nrows(), a.ncols());
    if a.nrows() == 0 {
        return Sign::Positive;
    }
    let scale = a.norm_inf();
    if scale == 0.0 {
        return Sign::Degenerate;
    }
    let count_negative = |d: &[f64]| d.iter().filter(|&&p| p < 0.0).count();
    let pivots = ldlt_pivots(a, 0.0);
    let tiny = |d: &[f64]| d.iter().any(|p| !p.is_finite() || p.abs() <= PIVOT_TOLERANCE * scale);
    if !tiny(&pivots) {
        return parity(count_negative(&pivots));
    }
    let eps = INERTIA_SHIFT * scale;
    let below = ldlt_pivots(a, -eps);
    let above = ldlt_pivots(a, eps);
    if tiny(&below) || tiny(&above) {
        return Sign::Degenerate;
    }
    let (nb, na) = (count_negative(&below), count_negative(&above));
    if nb != na {
        Sign::Degenerate
    } else {
        parity(na)
    }
}

fn parity(negatives: usize) -> Sign {
    if negatives % 2 == 0 {
        Sign::Positive
    } else {
        Sign::Negative
    }
}

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn norm2(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

pub fn norm_inf(a: &[f64]) -> f64 {
    a.iter().fold(0.0, |m, v| m.max(v.abs()))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> SparseMatrix {
        SparseMatrix::from_triplets(
            3,
            3,
            &[(0, 0, 4.0), (0, 1, 1.0), (1, 0, 1.0), (1, 1, 3.0), (2, 2, -2.0), (1, 2, 0.5), (2, 1, 0.5), (0, 0, 1.0)],
        )
    }

    #[test]
    fn triplets_are_summed() {
        let a = sample();
        assert_eq!(a.get(0, 0), 5.0);
        assert_eq!(a.nnz(), 7);
        assert!(a.is_symmetric());
    }

    #[test]
    fn matmul_and_kron_match_dense() {
        let a = sample();
        let b = SparseMatrix::tridiagonal(3, -2.0, 1.0);
        assert!((a.matmul(&b).to_dense() - a.to_dense() * b.to_dense()).abs().max() < 1e-15);
        let k = a.kron(&b).to_dense();
        let (ad, bd) = (a.to_dense(), b.to_dense());
        assert!((k - ad.kronecker(&bd)).abs().max() < 1e-15);
    }

    #[test]
    fn sparse_solve_matches_dense() {
        let a = sample();
        let x = a.solve(&[1.0, 2.0, 3.0]).unwrap();
        let r = a.matvec(&x);
        assert!(norm_inf(&[r[0] - 1.0, r[1] - 2.0, r[2] - 3.0]) < 1e-14);
    }

    #[test]
    fn singular_solve_fails() {
        let a = SparseMatrix::from_triplets(2, 2, &[(0, 0, 1.0), (0, 1, 1.0), (1, 0, 1.0), (1, 1, 1.0)]);
        assert!(matches!(a.solve(&[1.0, 0.0]), Err(Error::Singular(_))));
    }

    #[test]
    fn bordered_rank_one_solve() {
        let s = SparseMatrix::diagonal(&[1.0, 2.0, 3.0, 4.0]);
        let a = vec![1.0, 0.0, -1.0, 2.0];
        let d = vec![0.5, 1.0, 0.0, -1.0];
        let j = Jacobian {
            sparse: s,
            rank_one: vec![(a, d)],
        };
        let b = [1.0, -1.0, 2.0, 0.5];
        let x = j.solve(&b).unwrap();
        let dense = j.to_dense();
        let bx = dense.lu().solve(&nalgebra::DVector::from_column_slice(&b)).unwrap();
        for i in 0..4 {
            assert!((x[i] - bx[i]).abs() < 1e-13);
        }
        let y = j.matvec(&x);
        assert!(y.iter().zip(&b).all(|(p, q)| (p - q).abs() < 1e-13));
    }

    #[test]
    fn determinant_signs() {
        assert_eq!(determinant_sign(&SparseMatrix::diagonal(&[2.0, 3.0])), Sign::Positive);
        assert_eq!(determinant_sign(&SparseMatrix::diagonal(&[-1.0, 3.0])), Sign::Negative);
        assert_eq!(determinant_sign(&SparseMatrix::diagonal(&[0.0, 3.0])), Sign::Degenerate);
        // indefinite with zero leading pivot but nonsingular: [[0,1],[1,0]], det = -1
        let swap = SparseMatrix::from_triplets(2, 2, &[(0, 1, 1.0), (1, 0, 1.0)]);
        assert_eq!(determinant_sign(&swap), Sign::Negative);
        assert_eq!(determinant_sign(&sample()), Sign::from_value(sample().to_dense().determinant()));
    }

    #[test]
    fn banded_pivots_reproduce_determinant() {
        let a = SparseMatrix::tridiagonal(6, -2.0, 1.0).add_diagonal(&[0.3, -0.1, 0.2, 0.0, 0.5, -0.4]);
        let d = ldlt_pivots(&a, 0.0);
        let det: f64 = d.iter().product();
        assert!((det - a.to_dense().determinant()).abs() < 1e-12 * det.abs().max(1.0));
    }
}
