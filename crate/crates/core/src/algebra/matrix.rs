use std::fmt;
use std::ops::{Add, Index, IndexMut, Mul, Sub};

use num_complex::Complex64;
use num_traits::{One, Zero};

use crate::error::{Error, Result};

pub type C64 = Complex64;
pub type Vector = Vec<C64>;

/// Relative pivot threshold for inversion.
pub const SINGULAR_TOL: f64 = 1e-12;

/// Dense complex matrix, row-major.
#[derive(Clone, PartialEq)]
pub struct Matrix {
    rows: usize,
    cols: usize,
    data: Vec<C64>,
}

impl fmt::Debug for Matrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "Matrix {}x{} [", self.rows, self.cols)?;
        for i in 0..self.rows {
            write!(f, "  ")?;
            for j in 0..self.cols {
                let z = self[(i, j)];
                write!(f, "{:.6}{:+.6}i  ", z.re, z.im)?;
            }
            writeln!(f)?;
        }
        write!(f, "]")
    }
}

impl Matrix {
    pub fn new(rows: usize, cols: usize, data: Vec<C64>) -> Result<Self> {
        if rows == 0 || cols == 0 {
            return Err(Error::Domain("matrix dimensions must be positive".into()));
        }
        if data.len() != rows * cols {
            return Err(Error::DimensionMismatch { expected: rows * cols, found: data.len() });
        }
        Ok(Matrix { rows, cols, data })
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        Matrix { rows, cols, data: vec![C64::zero(); rows * cols] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Matrix::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = C64::one();
        }
        m
    }

    pub fn diagonal(values: &[C64]) -> Self {
        let mut m = Matrix::zeros(values.len(), values.len());
        for (i, v) in values.iter().enumerate() {
            m[(i, i)] = *v;
        }
        m
    }

    pub fn from_rows(rows: Vec<Vec<C64>>) -> Result<Self> {
        let r = rows.len();
        let c = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|row| row.len() != c) {
            return Err(Error::Validation("ragged matrix rows".into()));
        }
        Matrix::new(r, c, rows.into_iter().flatten().collect())
    }

    /// Real matrix from nested slices. Panics on ragged input; meant for literals.
    pub fn real<R: AsRef<[f64]>>(rows: &[R]) -> Self {
        let rows: Vec<Vec<C64>> =
            rows.iter().map(|r| r.as_ref().iter().map(|&x| C64::new(x, 0.0)).collect()).collect();
        Matrix::from_rows(rows).expect("rectangular literal")
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

    pub fn as_slice(&self) -> &[C64] {
        &self.data
    }

    pub fn column(&self, j: usize) -> Vector {
        (0..self.rows).map(|i| self[(i, j)]).collect()
    }

    pub fn from_columns(cols: &[Vector]) -> Result<Self> {
        let n = cols.first().map_or(0, Vec::len);
        let mut m = Matrix::zeros(n, cols.len());
        for (j, c) in cols.iter().enumerate() {
            if c.len() != n {
                return Err(Error::DimensionMismatch { expected: n, found: c.len() });
            }
            for (i, v) in c.iter().enumerate() {
                m[(i, j)] = *v;
            }
        }
        Ok(m)
    }

    pub(crate) fn require_square(&self) -> Result<usize> {
        if self.is_square() {
            Ok(self.rows)
        } else {
            Err(Error::DimensionMismatch { expected: self.rows, found: self.cols })
        }
    }

    pub fn checked_mul(&self, rhs: &Matrix) -> Result<Matrix> {
        if self.cols != rhs.rows {
            return Err(Error::DimensionMismatch { expected: self.cols, found: rhs.rows });
        }
        let mut out = Matrix::zeros(self.rows, rhs.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self[(i, k)];
                if a.is_zero() {
                    continue;
                }
                for j in 0..rhs.cols {
                    out.data[i * rhs.cols + j] += a * rhs.data[k * rhs.cols + j];
                }
            }
        }
        Ok(out)
    }

    pub fn mul_vec(&self, v: &[C64]) -> Vector {
        assert_eq!(v.len(), self.cols, "matrix-vector size mismatch");
        (0..self.rows)
            .map(|i| self.data[i * self.cols..(i + 1) * self.cols].iter().zip(v).map(|(a, b)| a * b).sum())
            .collect()
    }

    pub fn scale(&self, s: C64) -> Matrix {
        Matrix { rows: self.rows, cols: self.cols, data: self.data.iter().map(|z| z * s).collect() }
    }

    pub fn trace(&self) -> C64 {
        (0..self.rows.min(self.cols)).map(|i| self[(i, i)]).sum()
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.data.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    /// `‖self − other‖_F / max(‖self‖_F, ‖other‖_F)`, absolute when both vanish.
    pub fn relative_diff(&self, other: &Matrix) -> f64 {
        let d = (self - other).frobenius_norm();
        let s = other.frobenius_norm().max(self.frobenius_norm());
        if s == 0.0 {
            d
        } else {
            d / s
        }
    }

    pub fn is_real(&self, tol: f64) -> bool {
        self.data.iter().all(|z| z.im.abs() <= tol * (1.0 + z.re.abs()))
    }

    /// Determinant by partial-pivoting elimination.
    pub fn determinant(&self) -> Result<C64> {
        let n = self.require_square()?;
        let mut a = self.data.clone();
        let mut det = C64::one();
        for col in 0..n {
            let p = (col..n).max_by(|&x, &y| a[x * n + col].norm().total_cmp(&a[y * n + col].norm())).unwrap();
            if a[p * n + col].is_zero() {
                return Ok(C64::zero());
            }
            if p != col {
                for j in 0..n {
                    a.swap(p * n + j, col * n + j);
                }
                det = -det;
            }
            let piv = a[col * n + col];
            det *= piv;
            for r in col + 1..n {
                let f = a[r * n + col] / piv;
                if f.is_zero() {
                    continue;
                }
                for j in col..n {
                    let v = a[col * n + j];
                    a[r * n + j] -= f * v;
                }
            }
        }
        Ok(det)
    }

    /// Inverse by Gauss-Jordan with partial pivoting. Rejects when the smallest
    /// pivot falls below `SINGULAR_TOL` times the largest entry magnitude.
    pub fn inverse(&self) -> Result<Matrix> {
        let n = self.require_square()?;
        let scale = self.max_abs();
        if scale == 0.0 {
            return Err(Error::Singular { pivot: 0.0 });
        }
        let mut a = self.data.clone();
        let mut inv = Matrix::identity(n).data;
        let mut min_pivot = f64::INFINITY;
        for col in 0..n {
            let p = (col..n).max_by(|&x, &y| a[x * n + col].norm().total_cmp(&a[y * n + col].norm())).unwrap();
            let mag = a[p * n + col].norm();
            min_pivot = min_pivot.min(mag);
            if mag < SINGULAR_TOL * scale {
                return Err(Error::Singular { pivot: mag });
            }
            if p != col {
                for j in 0..n {
                    a.swap(p * n + j, col * n + j);
                    inv.swap(p * n + j, col * n + j);
                }
            }
            let piv = a[col * n + col];
            for j in 0..n {
                a[col * n + j] /= piv;
                inv[col * n + j] /= piv;
            }
            for r in 0..n {
                if r == col {
                    continue;
                }
                let f = a[r * n + col];
                if f.is_zero() {
                    continue;
                }
                for j in 0..n {
                    let (av, iv) = (a[col * n + j], inv[col * n + j]);
                    a[r * n + j] -= f * av;
                    inv[r * n + j] -= f * iv;
                }
            }
        }
        debug_assert!(min_pivot.is_finite());
        Ok(Matrix { rows: n, cols: n, data: inv })
    }

    /// Non-negative integer power by repeated squaring.
    pub fn pow(&self, mut k: u64) -> Result<Matrix> {
        let n = self.require_square()?;
        let mut result = Matrix::identity(n);
        let mut base = self.clone();
        while k > 0 {
            if k & 1 == 1 {
                result = &result * &base;
            }
            k >>= 1;
            if k > 0 {
                base = &base * &base;
            }
        }
        Ok(result)
    }

    /// Power by plain repeated multiplication, `self·self·…·self`.
    pub fn pow_sequential(&self, k: u64) -> Result<Matrix> {
        let n = self.require_square()?;
        let mut result = Matrix::identity(n);
        for _ in 0..k {
            result = &result * self;
        }
        Ok(result)
    }

    /// Solve `self · x = b` with partial pivoting, nudging exactly-zero pivots.
    /// Used for inverse iteration where near-singularity is the point.
    pub(crate) fn solve_nudged(&self, b: &[C64], nudge: f64) -> Vector {
        let n = self.rows;
        let mut a = self.data.clone();
        let mut x: Vector = b.to_vec();
        for col in 0..n {
            let p = (col..n).max_by(|&u, &v| a[u * n + col].norm().total_cmp(&a[v * n + col].norm())).unwrap();
            if p != col {
                for j in 0..n {
                    a.swap(p * n + j, col * n + j);
                }
                x.swap(p, col);
            }
            if a[col * n + col].norm() < nudge {
                a[col * n + col] = C64::new(nudge, 0.0);
            }
            let piv = a[col * n + col];
            for r in col + 1..n {
                let f = a[r * n + col] / piv;
                if f.is_zero() {
                    continue;
                }
                for j in col..n {
                    let v = a[col * n + j];
                    a[r * n + j] -= f * v;
                }
                let xv = x[col];
                x[r] -= f * xv;
            }
        }
        for col in (0..n).rev() {
            let mut s = x[col];
            for j in col + 1..n {
                s -= a[col * n + j] * x[j];
            }
            x[col] = s / a[col * n + col];
        }
        x
    }
}

impl Index<(usize, usize)> for Matrix {
    type Output = C64;
    fn index(&self, (i, j): (usize, usize)) -> &C64 {
        &self.data[i * self.cols + j]
    }
}

impl IndexMut<(usize, usize)> for Matrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut C64 {
        &mut self.data[i * self.cols + j]
    }
}

impl Mul for &Matrix {
    type Output = Matrix;
    fn mul(self, rhs: &Matrix) -> Matrix {
        self.checked_mul(rhs).expect("matrix product size mismatch")
    }
}

impl Add for &Matrix {
    type Output = Matrix;
    fn add(self, rhs: &Matrix) -> Matrix {
        assert_eq!((self.rows, self.cols), (rhs.rows, rhs.cols), "matrix sum size mismatch");
        Matrix { rows: self.rows, cols: self.cols, data: self.data.iter().zip(&rhs.data).map(|(a, b)| a + b).collect() }
    }
}

impl Sub for &Matrix {
    type Output = Matrix;
    fn sub(self, rhs: &Matrix) -> Matrix {
        assert_eq!((self.rows, self.cols), (rhs.rows, rhs.cols), "matrix difference size mismatch");
        Matrix { rows: self.rows, cols: self.cols, data: self.data.iter().zip(&rhs.data).map(|(a, b)| a - b).collect() }
    }
}

/// Left-to-right product `F₀·F₁·…`; the empty chain is `I_n`.
pub fn mat_product_chain(n: usize, factors: &[Matrix]) -> Result<Matrix> {
    let mut acc = Matrix::identity(n);
    for f in factors {
        if f.rows != n || f.cols != n {
            return Err(Error::DimensionMismatch { expected: n, found: if f.rows != n { f.rows } else { f.cols } });
        }
        acc = &acc * f;
    }
    Ok(acc)
}

pub fn real_vector(v: &[f64]) -> Vector {
    v.iter().map(|&x| C64::new(x, 0.0)).collect()
}

pub fn vec_norm(v: &[C64]) -> f64 {
    v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

pub fn vec_sub(a: &[C64], b: &[C64]) -> Vector {
    a.iter().zip(b).map(|(x, y)| x - y).collect()
}

pub fn vec_add_assign(a: &mut [C64], b: &[C64]) {
    for (x, y) in a.iter_mut().zip(b) {
        *x += y;
    }
}

/// `|a − b| ≤ rel·max(|a|,|b|) + abs` in the Euclidean norm.
pub fn vectors_close(a: &[C64], b: &[C64], rel: f64, abs: f64) -> bool {
    a.len() == b.len() && vec_norm(&vec_sub(a, b)) <= rel * vec_norm(a).max(vec_norm(b)) + abs
}
