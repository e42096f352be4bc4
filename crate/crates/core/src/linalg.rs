//! Small dense real linear algebra.
//!
//! Everything here is sized for Jacobian blocks of a handful of unknowns:
//! determinants, leading principal minors, linear solves and inverses, all
//! on top of one partially pivoted LU factorization.

use alloc::vec;
use alloc::vec::Vec;
use core::fmt;
use core::ops::Index;

/// Relative pivot threshold: a pivot is treated as zero when
/// `|pivot| <= SINGULAR_RTOL * max_row_inf_norm`.
pub const SINGULAR_RTOL: f64 = 1e-12;

/// Errors raised by the linear algebra routines.
#[derive(Clone, Debug, PartialEq)]
pub enum LinalgError {
    /// Operand shapes do not fit together.
    DimensionMismatch {
        /// Shape the operation expected, as `(rows, cols)`.
        expected: (usize, usize),
        /// Shape that was supplied.
        found: (usize, usize),
    },
    /// A square matrix was required.
    NotSquare { rows: usize, cols: usize },
    /// A pivot fell below the singularity threshold.
    Singular {
        /// Zero-based elimination step at which the pivot failed.
        step: usize,
        /// Absolute value of the rejected pivot.
        pivot: f64,
    },
    /// NaN or infinity in the input data.
    NonFinite,
}

impl fmt::Display for LinalgError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::DimensionMismatch { expected, found } => write!(
                f,
                "dimension mismatch: expected {}x{}, found {}x{}",
                expected.0, expected.1, found.0, found.1
            ),
            Self::NotSquare { rows, cols } => {
                write!(f, "matrix must be square, got {rows}x{cols}")
            }
            Self::Singular { step, pivot } => write!(
                f,
                "matrix is singular to working precision (pivot {pivot:e} at step {step})"
            ),
            Self::NonFinite => f.write_str("non-finite matrix or vector entry"),
        }
    }
}

impl core::error::Error for LinalgError {}

/// A point or direction in real coordinate space.
#[derive(Clone, Debug, PartialEq, Default)]
pub struct Vector(Vec<f64>);

impl Vector {
    /// Wraps `entries`, rejecting NaN and infinities.
    pub fn new(entries: Vec<f64>) -> Result<Self, LinalgError> {
        if entries.iter().all(|v| v.is_finite()) {
            Ok(Self(entries))
        } else {
            Err(LinalgError::NonFinite)
        }
    }

    pub fn from_slice(entries: &[f64]) -> Result<Self, LinalgError> {
        Self::new(entries.to_vec())
    }

    pub fn zeros(dim: usize) -> Self {
        Self(vec![0.0; dim])
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.0
    }

    pub fn norm_inf(&self) -> f64 {
        norm_inf(&self.0)
    }
}

impl Index<usize> for Vector {
    type Output = f64;

    fn index(&self, i: usize) -> &f64 {
        &self.0[i]
    }
}

impl AsRef<[f64]> for Vector {
    fn as_ref(&self) -> &[f64] {
        &self.0
    }
}

/// Maximum absolute entry of a slice (0 for an empty slice).
pub fn norm_inf(v: &[f64]) -> f64 {
    v.iter().fold(0.0, |acc: f64, x| acc.max(x.abs()))
}

/// Dense row-major real matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct Matrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl Matrix {
    /// Builds a matrix from row-major `data`.
    pub fn new(rows: usize, cols: usize, data: Vec<f64>) -> Result<Self, LinalgError> {
        if data.len() != rows * cols {
            return Err(LinalgError::DimensionMismatch {
                expected: (rows, cols),
                found: (data.len(), 1),
            });
        }
        if !data.iter().all(|v| v.is_finite()) {
            return Err(LinalgError::NonFinite);
        }
        Ok(Self { rows, cols, data })
    }

    /// Builds a matrix from a list of equally long rows.
    pub fn from_rows<R: AsRef<[f64]>>(rows: &[R]) -> Result<Self, LinalgError> {
        let cols = rows.first().map_or(0, |r| r.as_ref().len());
        let mut data = Vec::with_capacity(rows.len() * cols);
        for r in rows {
            let r = r.as_ref();
            if r.len() != cols {
                return Err(LinalgError::DimensionMismatch {
                    expected: (rows.len(), cols),
                    found: (rows.len(), r.len()),
                });
            }
            data.extend_from_slice(r);
        }
        Self::new(rows.len(), cols, data)
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self { rows, cols, data: vec![0.0; rows * cols] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.data[i * n + i] = 1.0;
        }
        m
    }

    pub fn diagonal(diag: &[f64]) -> Self {
        let n = diag.len();
        let mut m = Self::zeros(n, n);
        for (i, d) in diag.iter().enumerate() {
            m.data[i * n + i] = *d;
        }
        m
    }

    /// Column vector with the given entries.
    pub fn column(entries: &[f64]) -> Self {
        Self { rows: entries.len(), cols: 1, data: entries.to_vec() }
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

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.cols + j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        self.data[i * self.cols + j] = v;
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    /// Copies of columns `start..end`.
    pub fn columns(&self, start: usize, end: usize) -> Matrix {
        assert!(start <= end && end <= self.cols, "column range out of bounds");
        let width = end - start;
        let mut data = Vec::with_capacity(self.rows * width);
        for i in 0..self.rows {
            data.extend_from_slice(&self.row(i)[start..end]);
        }
        Matrix { rows: self.rows, cols: width, data }
    }

    /// Top-left `k x k` block.
    pub fn leading_block(&self, k: usize) -> Matrix {
        assert!(k <= self.rows && k <= self.cols, "block larger than matrix");
        let mut data = Vec::with_capacity(k * k);
        for i in 0..k {
            data.extend_from_slice(&self.row(i)[..k]);
        }
        Matrix { rows: k, cols: k, data }
    }

    /// Horizontal concatenation `[self | other]`.
    pub fn hstack(&self, other: &Matrix) -> Result<Matrix, LinalgError> {
        if self.rows != other.rows {
            return Err(LinalgError::DimensionMismatch {
                expected: (self.rows, other.cols),
                found: (other.rows, other.cols),
            });
        }
        let cols = self.cols + other.cols;
        let mut data = Vec::with_capacity(self.rows * cols);
        for i in 0..self.rows {
            data.extend_from_slice(self.row(i));
            data.extend_from_slice(other.row(i));
        }
        Ok(Matrix { rows: self.rows, cols, data })
    }

    pub fn transpose(&self) -> Matrix {
        let mut t = Matrix::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                t.set(j, i, self.get(i, j));
            }
        }
        t
    }

    pub fn mul(&self, rhs: &Matrix) -> Result<Matrix, LinalgError> {
        if self.cols != rhs.rows {
            return Err(LinalgError::DimensionMismatch {
                expected: (self.cols, rhs.cols),
                found: (rhs.rows, rhs.cols),
            });
        }
        let mut out = Matrix::zeros(self.rows, rhs.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self.get(i, k);
                if a == 0.0 {
                    continue;
                }
                for j in 0..rhs.cols {
                    out.data[i * rhs.cols + j] += a * rhs.get(k, j);
                }
            }
        }
        Ok(out)
    }

    pub fn mul_vec(&self, v: &[f64]) -> Result<Vec<f64>, LinalgError> {
        if self.cols != v.len() {
            return Err(LinalgError::DimensionMismatch {
                expected: (self.cols, 1),
                found: (v.len(), 1),
            });
        }
        Ok((0..self.rows)
            .map(|i| self.row(i).iter().zip(v).map(|(a, b)| a * b).sum())
            .collect())
    }

    pub fn sub(&self, rhs: &Matrix) -> Result<Matrix, LinalgError> {
        if (self.rows, self.cols) != (rhs.rows, rhs.cols) {
            return Err(LinalgError::DimensionMismatch {
                expected: (self.rows, self.cols),
                found: (rhs.rows, rhs.cols),
            });
        }
        let data = self.data.iter().zip(&rhs.data).map(|(a, b)| a - b).collect();
        Ok(Matrix { rows: self.rows, cols: self.cols, data })
    }

    pub fn scale(&self, s: f64) -> Matrix {
        Matrix { rows: self.rows, cols: self.cols, data: self.data.iter().map(|v| v * s).collect() }
    }

    /// Induced infinity norm (maximum absolute row sum).
    pub fn norm_inf(&self) -> f64 {
        (0..self.rows)
            .map(|i| self.row(i).iter().map(|v| v.abs()).sum::<f64>())
            .fold(0.0, f64::max)
    }

    /// Largest absolute entry.
    pub fn max_abs(&self) -> f64 {
        norm_inf(&self.data)
    }

    pub fn swap_rows(&mut self, a: usize, b: usize) {
        if a == b {
            return;
        }
        for j in 0..self.cols {
            self.data.swap(a * self.cols + j, b * self.cols + j);
        }
    }

    fn require_square(&self) -> Result<usize, LinalgError> {
        if self.is_square() {
            Ok(self.rows)
        } else {
            Err(LinalgError::NotSquare { rows: self.rows, cols: self.cols })
        }
    }
}

/// Partially pivoted LU factorization `P A = L U`.
///
/// Factoring never fails on a square matrix; a zero column simply leaves a
/// zero pivot behind, which makes [`Lu::det`] return 0 and [`Lu::solve`]
/// report singularity.
#[derive(Clone, Debug)]
pub struct Lu {
    n: usize,
    /// L (unit, below diagonal) and U (on and above diagonal), row-major.
    factors: Vec<f64>,
    perm: Vec<usize>,
    sign: f64,
    scale: f64,
}

impl Lu {
    pub fn factor(a: &Matrix) -> Result<Self, LinalgError> {
        let n = a.require_square()?;
        let scale = a.norm_inf();
        let mut lu = a.data.clone();
        let mut perm: Vec<usize> = (0..n).collect();
        let mut sign = 1.0;
        for k in 0..n {
            let mut p = k;
            let mut best = lu[k * n + k].abs();
            for i in k + 1..n {
                let v = lu[i * n + k].abs();
                if v > best {
                    best = v;
                    p = i;
                }
            }
            if p != k {
                for j in 0..n {
                    lu.swap(k * n + j, p * n + j);
                }
                perm.swap(k, p);
                sign = -sign;
            }
            let pivot = lu[k * n + k];
            if pivot == 0.0 {
                continue;
            }
            for i in k + 1..n {
                let l = lu[i * n + k] / pivot;
                lu[i * n + k] = l;
                if l != 0.0 {
                    for j in k + 1..n {
                        lu[i * n + j] -= l * lu[k * n + j];
                    }
                }
            }
        }
        Ok(Self { n, factors: lu, perm, sign, scale })
    }

    pub fn order(&self) -> usize {
        self.n
    }

    pub fn det(&self) -> f64 {
        (0..self.n).fold(self.sign, |acc, k| acc * self.factors[k * self.n + k])
    }

    /// Fails if any pivot is at or below the relative singularity threshold.
    fn check_pivots(&self) -> Result<(), LinalgError> {
        let threshold = SINGULAR_RTOL * self.scale;
        for k in 0..self.n {
            let pivot = self.factors[k * self.n + k].abs();
            if pivot <= threshold || pivot == 0.0 {
                return Err(LinalgError::Singular { step: k, pivot });
            }
        }
        Ok(())
    }

    /// Solves `A X = B` for every column of `b`.
    pub fn solve(&self, b: &Matrix) -> Result<Matrix, LinalgError> {
        let n = self.n;
        if b.rows != n {
            return Err(LinalgError::DimensionMismatch {
                expected: (n, b.cols),
                found: (b.rows, b.cols),
            });
        }
        self.check_pivots()?;
        let mut x = Matrix::zeros(n, b.cols);
        let mut col = vec![0.0; n];
        for c in 0..b.cols {
            for i in 0..n {
                col[i] = b.get(self.perm[i], c);
            }
            for i in 0..n {
                let mut s = col[i];
                for j in 0..i {
                    s -= self.factors[i * n + j] * col[j];
                }
                col[i] = s;
            }
            for i in (0..n).rev() {
                let mut s = col[i];
                for j in i + 1..n {
                    s -= self.factors[i * n + j] * col[j];
                }
                col[i] = s / self.factors[i * n + i];
            }
            for i in 0..n {
                x.set(i, c, col[i]);
            }
        }
        Ok(x)
    }
}

/// Determinant via pivoted LU.
pub fn det(m: &Matrix) -> Result<f64, LinalgError> {
    Ok(Lu::factor(m)?.det())
}

/// Determinants of the top-left `k x k` blocks, `k = 1..=order`.
///
/// Runs Gaussian elimination without row exchanges, where the k-th minor is
/// the running product of pivots. Once a pivot drops below the singularity
/// threshold the remaining minors come from pivoted LU on each leading block,
/// so matrices that violate the minor condition can still be measured. The
/// full-order entry always comes from [`det`].
pub fn leading_principal_minors(m: &Matrix) -> Result<Vec<f64>, LinalgError> {
    let n = m.require_square()?;
    let threshold = SINGULAR_RTOL * m.norm_inf();
    let mut work = m.data.clone();
    let mut minors = Vec::with_capacity(n);
    let mut running = 1.0;
    let mut unpivoted_ok = true;
    for k in 0..n {
        if k + 1 == n {
            minors.push(det(m)?);
            break;
        }
        if unpivoted_ok {
            let pivot = work[k * n + k];
            if pivot.abs() > threshold && pivot != 0.0 {
                running *= pivot;
                minors.push(running);
                for i in k + 1..n {
                    let l = work[i * n + k] / pivot;
                    for j in k + 1..n {
                        work[i * n + j] -= l * work[k * n + j];
                    }
                }
                continue;
            }
            unpivoted_ok = false;
        }
        minors.push(det(&m.leading_block(k + 1))?);
    }
    Ok(minors)
}

/// Solves `A X = B` with partially pivoted LU.
pub fn solve_linear(a: &Matrix, b: &Matrix) -> Result<Matrix, LinalgError> {
    Lu::factor(a)?.solve(b)
}

pub fn invert(a: &Matrix) -> Result<Matrix, LinalgError> {
    let n = a.require_square()?;
    solve_linear(a, &Matrix::identity(n))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol
    }

    #[test]
    fn det_examples() {
        assert_eq!(det(&Matrix::identity(3)).unwrap(), 1.0);
        let m = Matrix::from_rows(&[[1.0, 2.0], [3.0, 4.0]]).unwrap();
        assert!(close(det(&m).unwrap(), -2.0, 1e-14));
        assert_eq!(det(&Matrix::diagonal(&[8.0, 8.0])).unwrap(), 64.0);
    }

    #[test]
    fn det_rejects_non_square() {
        let m = Matrix::zeros(2, 3);
        assert_eq!(det(&m), Err(LinalgError::NotSquare { rows: 2, cols: 3 }));
        assert!(leading_principal_minors(&m).is_err());
    }

    #[test]
    fn det_of_singular_is_zero() {
        let m = Matrix::from_rows(&[[1.0, 2.0], [2.0, 4.0]]).unwrap();
        assert_eq!(det(&m).unwrap(), 0.0);
    }

    #[test]
    fn minors_examples() {
        assert_eq!(
            leading_principal_minors(&Matrix::diagonal(&[8.0, 8.0])).unwrap(),
            vec![8.0, 64.0]
        );
        assert_eq!(leading_principal_minors(&Matrix::identity(4)).unwrap(), vec![1.0; 4]);
        let m = Matrix::from_rows(&[[2.0, 0.0], [1.0, 3.0]]).unwrap();
        assert_eq!(leading_principal_minors(&m).unwrap(), vec![2.0, 6.0]);
    }

    #[test]
    fn minors_fall_back_on_zero_pivot() {
        // First minor vanishes, later ones do not.
        let m = Matrix::from_rows(&[[0.0, 1.0, 0.0], [1.0, 0.0, 0.0], [0.0, 0.0, 2.0]]).unwrap();
        let minors = leading_principal_minors(&m).unwrap();
        assert_eq!(minors, vec![0.0, -1.0, -2.0]);
    }

    #[test]
    fn solve_examples() {
        let b = Matrix::from_rows(&[[1.0, -2.0], [3.5, 0.25]]).unwrap();
        assert_eq!(solve_linear(&Matrix::identity(2), &b).unwrap(), b);

        let x = solve_linear(&Matrix::diagonal(&[8.0, 8.0]), &Matrix::identity(2)).unwrap();
        assert_eq!(x, Matrix::diagonal(&[0.125, 0.125]));

        // Forward substitution by hand: 2 x1 = 1, x1 + 3 x2 = 1.
        let a = Matrix::from_rows(&[[2.0, 0.0], [1.0, 3.0]]).unwrap();
        let x = solve_linear(&a, &Matrix::column(&[1.0, 1.0])).unwrap();
        assert!(close(x.get(0, 0), 0.5, 1e-15));
        assert!(close(x.get(1, 0), 1.0 / 6.0, 1e-15));
    }

    #[test]
    fn invert_examples() {
        assert_eq!(invert(&Matrix::identity(3)).unwrap(), Matrix::identity(3));
        assert_eq!(
            invert(&Matrix::diagonal(&[8.0, 8.0])).unwrap(),
            Matrix::diagonal(&[0.125, 0.125])
        );
        let a = Matrix::from_rows(&[[2.0, 0.0], [1.0, 3.0]]).unwrap();
        let inv = invert(&a).unwrap();
        let expected = [[0.5, 0.0], [-1.0 / 6.0, 1.0 / 3.0]];
        for i in 0..2 {
            for j in 0..2 {
                assert!(close(inv.get(i, j), expected[i][j], 1e-15));
            }
        }
        let back = inv.mul(&a).unwrap().sub(&Matrix::identity(2)).unwrap();
        assert!(back.max_abs() < 1e-15);
    }

    #[test]
    fn singular_solve_reports_pivot() {
        let a = Matrix::from_rows(&[[1.0, 2.0], [2.0, 4.0]]).unwrap();
        match invert(&a) {
            Err(LinalgError::Singular { step, pivot }) => {
                assert_eq!(step, 1);
                assert!(pivot <= 1e-12 * 6.0);
            }
            other => panic!("expected singularity, got {other:?}"),
        }
    }

    #[test]
    fn singular_threshold_is_scale_invariant() {
        let a = Matrix::from_rows(&[[1e-20, 0.0], [0.0, 1e-20]]).unwrap();
        assert!(invert(&a).is_ok());
        let b = Matrix::from_rows(&[[1.0, 0.0], [0.0, 1e-13]]).unwrap();
        assert!(matches!(invert(&b), Err(LinalgError::Singular { .. })));
    }

    #[test]
    fn construction_rejects_bad_input() {
        assert_eq!(Matrix::new(2, 2, vec![1.0; 3]).unwrap_err(), LinalgError::DimensionMismatch {
            expected: (2, 2),
            found: (3, 1)
        });
        assert_eq!(Matrix::new(1, 1, vec![f64::NAN]), Err(LinalgError::NonFinite));
        assert_eq!(Vector::new(vec![f64::INFINITY]), Err(LinalgError::NonFinite));
    }

    #[test]
    fn residual_bound_holds() {
        let a = Matrix::from_rows(&[[4.0, -2.0, 1.0], [3.0, 6.0, -4.0], [2.0, 1.0, 8.0]]).unwrap();
        let b = Matrix::from_rows(&[[12.0, 1.0], [-25.0, 0.0], [32.0, -7.0]]).unwrap();
        let x = solve_linear(&a, &b).unwrap();
        let r = a.mul(&x).unwrap().sub(&b).unwrap();
        assert!(r.max_abs() <= 1e-10 * (1.0 + b.max_abs()));
    }
}
