//! Dense real linear algebra for the small matrices this crate works with.
//!
//! Storage is row-major. Everything here is sized for systems of a few dozen
//! unknowns at most; there is no blocking, no sparse storage and no complex
//! arithmetic.

use std::fmt;
use std::ops::{Add, Index, IndexMut, Mul, Neg, Sub};

use crate::error::{Error, Result};

/// Maximum number of cyclic Jacobi sweeps in [`symmetric_eig`].
pub const JACOBI_MAX_SWEEPS: usize = 100;
/// Off-diagonal Frobenius norm (relative to the input norm) at which Jacobi stops.
pub const JACOBI_TOLERANCE: f64 = 1e-12;
/// Default relative singular-value cutoff for [`numerical_rank`].
pub const DEFAULT_RANK_TOLERANCE: f64 = 1e-9;
/// Pivots below this fraction of the largest entry are treated as zero.
pub const PIVOT_TOLERANCE: f64 = 1e-12;

#[derive(Clone, PartialEq)]
pub struct DenseMatrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl DenseMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![0.0; rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = 1.0;
        }
        m
    }

    pub fn diag(values: &[f64]) -> Self {
        let mut m = Self::zeros(values.len(), values.len());
        for (i, &v) in values.iter().enumerate() {
            m[(i, i)] = v;
        }
        m
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        Self { rows, cols, data }
    }

    /// Builds a matrix from row-major data, rejecting wrong lengths and non-finite entries.
    pub fn from_row_slice(rows: usize, cols: usize, data: &[f64]) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::DimensionMismatch {
                context: "matrix data length",
                expected: rows * cols,
                found: data.len(),
            });
        }
        if data.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("matrix data"));
        }
        Ok(Self {
            rows,
            cols,
            data: data.to_vec(),
        })
    }

    /// Builds a matrix from nested rows. All rows must have the same nonzero length.
    pub fn from_rows<R: AsRef<[f64]>>(rows: &[R]) -> Result<Self> {
        let cols = rows.first().map(|r| r.as_ref().len()).unwrap_or(0);
        if rows.is_empty() || cols == 0 {
            return Err(Error::DimensionMismatch {
                context: "matrix must have at least one row and column",
                expected: 1,
                found: 0,
            });
        }
        let mut data = Vec::with_capacity(rows.len() * cols);
        for r in rows {
            let r = r.as_ref();
            if r.len() != cols {
                return Err(Error::DimensionMismatch {
                    context: "ragged matrix row",
                    expected: cols,
                    found: r.len(),
                });
            }
            data.extend_from_slice(r);
        }
        Self::from_row_slice(rows.len(), cols, &data)
    }

    pub fn column_vector(values: &[f64]) -> Self {
        Self {
            rows: values.len(),
            cols: 1,
            data: values.to_vec(),
        }
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

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn row_mut(&mut self, i: usize) -> &mut [f64] {
        &mut self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn column(&self, j: usize) -> Vec<f64> {
        (0..self.rows).map(|i| self[(i, j)]).collect()
    }

    pub fn to_rows(&self) -> Vec<Vec<f64>> {
        (0..self.rows).map(|i| self.row(i).to_vec()).collect()
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self[(j, i)])
    }

    pub fn scaled(&self, factor: f64) -> Self {
        Self {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|v| v * factor).collect(),
        }
    }

    /// Matrix-vector product. Panics if `x.len() != self.cols()`.
    pub fn mul_vec(&self, x: &[f64]) -> Vec<f64> {
        assert_eq!(x.len(), self.cols, "mul_vec dimension mismatch");
        (0..self.rows)
            .map(|i| self.row(i).iter().zip(x).map(|(a, b)| a * b).sum())
            .collect()
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.data.iter().map(|v| v * v).sum::<f64>().sqrt()
    }

    /// Largest absolute entrywise difference. Panics on shape mismatch.
    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        assert_eq!(self.shape(), other.shape(), "max_abs_diff shape mismatch");
        self.data
            .iter()
            .zip(&other.data)
            .fold(0.0, |m, (a, b)| m.max((a - b).abs()))
    }

    /// Largest |a_ij - a_ji|; infinite for non-square matrices.
    pub fn asymmetry(&self) -> f64 {
        if !self.is_square() {
            return f64::INFINITY;
        }
        let mut worst = 0.0f64;
        for i in 0..self.rows {
            for j in i + 1..self.cols {
                worst = worst.max((self[(i, j)] - self[(j, i)]).abs());
            }
        }
        worst
    }

    pub fn symmetrized(&self) -> Self {
        let t = self.transpose();
        (self + &t).scaled(0.5)
    }

    /// Stacks matrices left to right. Panics if row counts differ.
    pub fn hstack(blocks: &[&DenseMatrix]) -> Self {
        let rows = blocks[0].rows;
        assert!(blocks.iter().all(|b| b.rows == rows), "hstack row mismatch");
        let cols = blocks.iter().map(|b| b.cols).sum();
        let mut out = Self::zeros(rows, cols);
        let mut offset = 0;
        for b in blocks {
            for i in 0..rows {
                out.row_mut(i)[offset..offset + b.cols].copy_from_slice(b.row(i));
            }
            offset += b.cols;
        }
        out
    }

    /// Stacks matrices top to bottom. Panics if column counts differ.
    pub fn vstack(blocks: &[&DenseMatrix]) -> Self {
        let cols = blocks[0].cols;
        assert!(blocks.iter().all(|b| b.cols == cols), "vstack column mismatch");
        let mut data = Vec::new();
        for b in blocks {
            data.extend_from_slice(&b.data);
        }
        Self {
            rows: data.len() / cols.max(1),
            cols,
            data,
        }
    }

    /// Copies of rows `range` as a new matrix.
    pub fn row_block(&self, start: usize, end: usize) -> Self {
        Self {
            rows: end - start,
            cols: self.cols,
            data: self.data[start * self.cols..end * self.cols].to_vec(),
        }
    }

    /// Sum of each column.
    pub fn column_sums(&self) -> Vec<f64> {
        let mut sums = vec![0.0; self.cols];
        for i in 0..self.rows {
            for (s, v) in sums.iter_mut().zip(self.row(i)) {
                *s += v;
            }
        }
        sums
    }
}

impl Index<(usize, usize)> for DenseMatrix {
    type Output = f64;

    fn index(&self, (i, j): (usize, usize)) -> &f64 {
        debug_assert!(i < self.rows && j < self.cols);
        &self.data[i * self.cols + j]
    }
}

impl IndexMut<(usize, usize)> for DenseMatrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut f64 {
        debug_assert!(i < self.rows && j < self.cols);
        &mut self.data[i * self.cols + j]
    }
}

impl fmt::Debug for DenseMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "DenseMatrix {}x{} [", self.rows, self.cols)?;
        for i in 0..self.rows {
            writeln!(f, "  {:?}", self.row(i))?;
        }
        write!(f, "]")
    }
}

impl Mul for &DenseMatrix {
    type Output = DenseMatrix;

    /// Panics on inner-dimension mismatch.
    fn mul(self, rhs: &DenseMatrix) -> DenseMatrix {
        assert_eq!(self.cols, rhs.rows, "matmul inner dimension mismatch");
        let mut out = DenseMatrix::zeros(self.rows, rhs.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self[(i, k)];
                if a == 0.0 {
                    continue;
                }
                for j in 0..rhs.cols {
                    out.data[i * rhs.cols + j] += a * rhs.data[k * rhs.cols + j];
                }
            }
        }
        out
    }
}

impl Add for &DenseMatrix {
    type Output = DenseMatrix;

    fn add(self, rhs: &DenseMatrix) -> DenseMatrix {
        assert_eq!(self.shape(), rhs.shape(), "add shape mismatch");
        DenseMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&rhs.data).map(|(a, b)| a + b).collect(),
        }
    }
}

impl Sub for &DenseMatrix {
    type Output = DenseMatrix;

    fn sub(self, rhs: &DenseMatrix) -> DenseMatrix {
        assert_eq!(self.shape(), rhs.shape(), "sub shape mismatch");
        DenseMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&rhs.data).map(|(a, b)| a - b).collect(),
        }
    }
}

impl Neg for &DenseMatrix {
    type Output = DenseMatrix;

    fn neg(self) -> DenseMatrix {
        self.scaled(-1.0)
    }
}

/// Solves `A X = B` by LU factorization with partial pivoting.
pub fn lu_solve(a: &DenseMatrix, b: &DenseMatrix) -> Result<DenseMatrix> {
    let n = a.rows();
    if !a.is_square() {
        return Err(Error::DimensionMismatch {
            context: "lu_solve expects a square matrix",
            expected: a.rows(),
            found: a.cols(),
        });
    }
    if b.rows() != n {
        return Err(Error::DimensionMismatch {
            context: "lu_solve right-hand side rows",
            expected: n,
            found: b.rows(),
        });
    }
    let scale = a.max_abs();
    if scale == 0.0 {
        return Err(Error::Singular);
    }
    let m = b.cols();
    let mut lu = a.clone();
    let mut x = b.clone();

    for k in 0..n {
        let (pivot_row, pivot_abs) =
            (k..n)
                .map(|i| (i, lu[(i, k)].abs()))
                .fold((k, -1.0), |best, cur| if cur.1 > best.1 { cur } else { best });
        if pivot_abs < PIVOT_TOLERANCE * scale {
            return Err(Error::Singular);
        }
        if pivot_row != k {
            for j in 0..n {
                lu.data.swap(k * n + j, pivot_row * n + j);
            }
            for j in 0..m {
                x.data.swap(k * m + j, pivot_row * m + j);
            }
        }
        let pivot = lu[(k, k)];
        for i in k + 1..n {
            let factor = lu[(i, k)] / pivot;
            if factor == 0.0 {
                continue;
            }
            lu[(i, k)] = factor;
            for j in k + 1..n {
                let v = lu[(k, j)];
                lu[(i, j)] -= factor * v;
            }
            for j in 0..m {
                let v = x[(k, j)];
                x[(i, j)] -= factor * v;
            }
        }
    }

    // back substitution
    for k in (0..n).rev() {
        let pivot = lu[(k, k)];
        for j in 0..m {
            let mut acc = x[(k, j)];
            for c in k + 1..n {
                acc -= lu[(k, c)] * x[(c, j)];
            }
            x[(k, j)] = acc / pivot;
        }
    }
    Ok(x)
}

/// Kronecker product: block (i, j) of the result is `a[i][j] * b`.
pub fn kron(a: &DenseMatrix, b: &DenseMatrix) -> DenseMatrix {
    let (br, bc) = b.shape();
    DenseMatrix::from_fn(a.rows() * br, a.cols() * bc, |i, j| {
        a[(i / br, j / bc)] * b[(i % br, j % bc)]
    })
}

/// Singular values in descending order.
///
/// One-sided (Hestenes) Jacobi: plane rotations applied to the columns of `A`
/// until all column pairs are orthogonal. This diagonalizes `AᵀA` by exactly
/// the rotations two-sided Jacobi would use on it, without forming the
/// product, so small singular values are not lost to squaring.
pub fn singular_values(a: &DenseMatrix) -> Vec<f64> {
    let n = a.cols();
    let mut cols: Vec<Vec<f64>> = (0..n).map(|j| a.column(j)).collect();
    let dot = |x: &[f64], y: &[f64]| x.iter().zip(y).map(|(a, b)| a * b).sum::<f64>();

    for _ in 0..JACOBI_MAX_SWEEPS {
        let mut rotated = false;
        for p in 0..n {
            for q in p + 1..n {
                let alpha = dot(&cols[p], &cols[p]);
                let beta = dot(&cols[q], &cols[q]);
                let gamma = dot(&cols[p], &cols[q]);
                if gamma == 0.0 || gamma.abs() <= f64::EPSILON * (alpha * beta).sqrt() {
                    continue;
                }
                rotated = true;
                let zeta = (beta - alpha) / (2.0 * gamma);
                let t = zeta.signum() / (zeta.abs() + (1.0 + zeta * zeta).sqrt());
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = c * t;
                let (head, tail) = cols.split_at_mut(q);
                for (up, uq) in head[p].iter_mut().zip(tail[0].iter_mut()) {
                    let (a, b) = (*up, *uq);
                    *up = c * a - s * b;
                    *uq = s * a + c * b;
                }
            }
        }
        if !rotated {
            break;
        }
    }

    let mut sv: Vec<f64> = cols.iter().map(|c| dot(c, c).sqrt()).collect();
    sv.sort_by(|a, b| b.total_cmp(a));
    sv
}

/// Number of singular values above `tol * sigma_max`.
pub fn numerical_rank(a: &DenseMatrix, tol: f64) -> usize {
    let sv = singular_values(a);
    let Some(&largest) = sv.first() else {
        return 0;
    };
    if largest == 0.0 {
        return 0;
    }
    sv.iter().filter(|&&s| s > tol * largest).count()
}

/// Eigenvalues of a symmetric matrix, ascending, by cyclic Jacobi rotations.
pub fn symmetric_eig(a: &DenseMatrix) -> Result<Vec<f64>> {
    if !a.is_square() {
        return Err(Error::DimensionMismatch {
            context: "symmetric_eig expects a square matrix",
            expected: a.rows(),
            found: a.cols(),
        });
    }
    let asym = a.asymmetry();
    if asym > 1e-12 * a.max_abs().max(1.0) {
        return Err(Error::NotSymmetric(asym));
    }
    let n = a.rows();
    let mut w = a.symmetrized();
    let norm = w.frobenius_norm();
    let off_norm = |w: &DenseMatrix| {
        let mut s = 0.0;
        for i in 0..n {
            for j in 0..n {
                if i != j {
                    s += w[(i, j)] * w[(i, j)];
                }
            }
        }
        s.sqrt()
    };

    let mut converged = norm == 0.0;
    for _ in 0..JACOBI_MAX_SWEEPS {
        if converged || off_norm(&w) <= JACOBI_TOLERANCE * norm {
            converged = true;
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                let apq = w[(p, q)];
                if apq == 0.0 {
                    continue;
                }
                let theta = (w[(q, q)] - w[(p, p)]) / (2.0 * apq);
                let sign = if theta >= 0.0 { 1.0 } else { -1.0 };
                let t = sign / (theta.abs() + (theta * theta + 1.0).sqrt());
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..n {
                    let akp = w[(k, p)];
                    let akq = w[(k, q)];
                    w[(k, p)] = c * akp - s * akq;
                    w[(k, q)] = s * akp + c * akq;
                }
                for k in 0..n {
                    let apk = w[(p, k)];
                    let aqk = w[(q, k)];
                    w[(p, k)] = c * apk - s * aqk;
                    w[(q, k)] = s * apk + c * aqk;
                }
            }
        }
    }
    if !converged && off_norm(&w) > JACOBI_TOLERANCE * norm {
        return Err(Error::NoConvergence(JACOBI_MAX_SWEEPS));
    }

    let mut eig: Vec<f64> = (0..n).map(|i| w[(i, i)]).collect();
    eig.sort_by(|a, b| a.total_cmp(b));
    Ok(eig)
}

/// Lower-triangular Cholesky factor, or `None` if `a` is not positive definite.
pub fn cholesky(a: &DenseMatrix) -> Option<DenseMatrix> {
    if !a.is_square() {
        return None;
    }
    let n = a.rows();
    let mut l = DenseMatrix::zeros(n, n);
    for j in 0..n {
        let mut d = a[(j, j)];
        for k in 0..j {
            d -= l[(j, k)] * l[(j, k)];
        }
        if d.is_nan() || d <= 0.0 {
            return None;
        }
        let d = d.sqrt();
        l[(j, j)] = d;
        for i in j + 1..n {
            let mut s = a[(i, j)];
            for k in 0..j {
                s -= l[(i, k)] * l[(j, k)];
            }
            l[(i, j)] = s / d;
        }
    }
    Some(l)
}

/// Solution of the discrete Lyapunov equation `MᵀPM − P = −I`.
#[derive(Clone, Debug)]
pub struct LyapunovCertificate {
    pub p: DenseMatrix,
    /// True iff the symmetrized `P` has a Cholesky factor. A positive definite
    /// solution exists exactly when `M` is Schur stable.
    pub positive_definite: bool,
}

/// Solves `MᵀPM − P = −I` through the vectorized system `(I − Mᵀ⊗Mᵀ) vec(P) = vec(I)`.
///
/// A singular vectorized system means two eigenvalues of `M` multiply to one;
/// that is reported as [`Error::Singular`] and such an `M` cannot be certified.
pub fn dlyap_solve(m: &DenseMatrix) -> Result<LyapunovCertificate> {
    if !m.is_square() {
        return Err(Error::DimensionMismatch {
            context: "dlyap_solve expects a square matrix",
            expected: m.rows(),
            found: m.cols(),
        });
    }
    let n = m.rows();
    let mt = m.transpose();
    let system = &DenseMatrix::identity(n * n) - &kron(&mt, &mt);
    let rhs = DenseMatrix::column_vector(DenseMatrix::identity(n).as_slice());
    let vec_p = lu_solve(&system, &rhs)?;
    let p = DenseMatrix::from_fn(n, n, |i, j| vec_p[(i * n + j, 0)]);
    let positive_definite = cholesky(&p.symmetrized()).is_some();
    Ok(LyapunovCertificate { p, positive_definite })
}
