use std::ops::{Index, IndexMut};

use num_complex::Complex;

use crate::error::{invalid, Result};
use crate::scalar::Real;

/// Dense row-major real matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct Mat<T> {
    rows: usize,
    cols: usize,
    data: Vec<T>,
}

impl<T: Real> Mat<T> {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self { rows, cols, data: vec![T::zero(); rows * cols] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = T::one();
        }
        m
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> T) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        Self { rows, cols, data }
    }

    pub fn from_vec(rows: usize, cols: usize, data: Vec<T>) -> Result<Self> {
        if data.len() != rows * cols {
            return invalid(format!("expected {} entries for {rows}x{cols}, got {}", rows * cols, data.len()));
        }
        Ok(Self { rows, cols, data })
    }

    pub fn from_rows(rows: &[Vec<T>]) -> Result<Self> {
        let r = rows.len();
        let c = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|row| row.len() != c) {
            return invalid("ragged rows");
        }
        Ok(Self { rows: r, cols: c, data: rows.concat() })
    }

    /// Column vector (n x 1).
    pub fn column(v: &[T]) -> Self {
        Self { rows: v.len(), cols: 1, data: v.to_vec() }
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

    pub fn as_slice(&self) -> &[T] {
        &self.data
    }

    pub fn as_mut_slice(&mut self) -> &mut [T] {
        &mut self.data
    }

    pub fn row(&self, i: usize) -> &[T] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn col(&self, j: usize) -> Vec<T> {
        (0..self.rows).map(|i| self[(i, j)]).collect()
    }

    pub fn to_rows(&self) -> Vec<Vec<T>> {
        (0..self.rows).map(|i| self.row(i).to_vec()).collect()
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self[(j, i)])
    }

    pub fn matmul(&self, other: &Self) -> Self {
        assert_eq!(self.cols, other.rows, "matmul shape mismatch");
        let mut out = Self::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            let out_row = &mut out.data[i * other.cols..(i + 1) * other.cols];
            for k in 0..self.cols {
                let a = self.data[i * self.cols + k];
                if a == T::zero() {
                    continue;
                }
                let b_row = &other.data[k * other.cols..(k + 1) * other.cols];
                for (o, &b) in out_row.iter_mut().zip(b_row) {
                    *o += a * b;
                }
            }
        }
        out
    }

    /// `selfᵀ · other` without materializing the transpose.
    pub fn tr_matmul(&self, other: &Self) -> Self {
        assert_eq!(self.rows, other.rows, "tr_matmul shape mismatch");
        let mut out = Self::zeros(self.cols, other.cols);
        for k in 0..self.rows {
            let a_row = self.row(k);
            let b_row = other.row(k);
            for (i, &a) in a_row.iter().enumerate() {
                if a == T::zero() {
                    continue;
                }
                let out_row = &mut out.data[i * other.cols..(i + 1) * other.cols];
                for (o, &b) in out_row.iter_mut().zip(b_row) {
                    *o += a * b;
                }
            }
        }
        out
    }

    pub fn mul_vec(&self, v: &[T]) -> Vec<T> {
        assert_eq!(self.cols, v.len());
        (0..self.rows).map(|i| dot(self.row(i), v)).collect()
    }

    pub fn tr_mul_vec(&self, v: &[T]) -> Vec<T> {
        assert_eq!(self.rows, v.len());
        let mut out = vec![T::zero(); self.cols];
        for (i, &vi) in v.iter().enumerate() {
            for (o, &a) in out.iter_mut().zip(self.row(i)) {
                *o += a * vi;
            }
        }
        out
    }

    pub fn sub(&self, other: &Self) -> Self {
        assert_eq!(self.shape(), other.shape());
        let data = self.data.iter().zip(&other.data).map(|(&a, &b)| a - b).collect();
        Self { rows: self.rows, cols: self.cols, data }
    }

    pub fn add(&self, other: &Self) -> Self {
        assert_eq!(self.shape(), other.shape());
        let data = self.data.iter().zip(&other.data).map(|(&a, &b)| a + b).collect();
        Self { rows: self.rows, cols: self.cols, data }
    }

    pub fn scale(&self, s: T) -> Self {
        Self { rows: self.rows, cols: self.cols, data: self.data.iter().map(|&a| a * s).collect() }
    }

    pub fn norm_fro(&self) -> T {
        norm2(&self.data)
    }

    pub fn max_abs(&self) -> T {
        self.data.iter().fold(T::zero(), |m, &a| m.max(a.abs()))
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|a| a.is_finite())
    }

    /// Submatrix picking the given rows and columns, in order.
    pub fn select(&self, rows: &[usize], cols: &[usize]) -> Self {
        Self::from_fn(rows.len(), cols.len(), |i, j| self[(rows[i], cols[j])])
    }

    pub fn cast<U: Real>(&self) -> Mat<U> {
        Mat { rows: self.rows, cols: self.cols, data: self.data.iter().map(|&a| U::lit(a.as_f64())).collect() }
    }
}

impl<T> Index<(usize, usize)> for Mat<T> {
    type Output = T;
    #[inline]
    fn index(&self, (i, j): (usize, usize)) -> &T {
        debug_assert!(i < self.rows && j < self.cols);
        &self.data[i * self.cols + j]
    }
}

impl<T> IndexMut<(usize, usize)> for Mat<T> {
    #[inline]
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut T {
        debug_assert!(i < self.rows && j < self.cols);
        &mut self.data[i * self.cols + j]
    }
}

/// Dense real symmetric matrix. Symmetry holds exactly: every constructor
/// averages the two triangles.
#[derive(Debug, Clone, PartialEq)]
pub struct SymMatrix<T> {
    inner: Mat<T>,
}

impl<T: Real> SymMatrix<T> {
    pub fn zeros(n: usize) -> Self {
        Self { inner: Mat::zeros(n, n) }
    }

    pub fn identity(n: usize) -> Self {
        Self { inner: Mat::identity(n) }
    }

    pub fn from_diag(d: &[T]) -> Self {
        let mut m = Mat::zeros(d.len(), d.len());
        for (i, &v) in d.iter().enumerate() {
            m[(i, i)] = v;
        }
        Self { inner: m }
    }

    /// Symmetrizes `m` as `(m + mᵀ)/2`.
    pub fn from_mat(m: Mat<T>) -> Result<Self> {
        if m.rows() != m.cols() {
            return invalid(format!("symmetric matrix must be square, got {:?}", m.shape()));
        }
        let n = m.rows();
        let half = T::lit(0.5);
        let mut out = m;
        for i in 0..n {
            for j in (i + 1)..n {
                let v = (out[(i, j)] + out[(j, i)]) * half;
                out[(i, j)] = v;
                out[(j, i)] = v;
            }
        }
        Ok(Self { inner: out })
    }

    /// Builds from the upper triangle of `f`; `f(i, j)` is only called for `i <= j`.
    pub fn from_upper(n: usize, mut f: impl FnMut(usize, usize) -> T) -> Self {
        let mut m = Mat::zeros(n, n);
        for i in 0..n {
            for j in i..n {
                let v = f(i, j);
                m[(i, j)] = v;
                m[(j, i)] = v;
            }
        }
        Self { inner: m }
    }

    pub fn from_rows(rows: &[Vec<T>]) -> Result<Self> {
        Self::from_mat(Mat::from_rows(rows)?)
    }

    /// `F Fᵀ` for any `F`.
    pub fn outer_gram(f: &Mat<T>) -> Self {
        let n = f.rows();
        Self::from_upper(n, |i, j| dot(f.row(i), f.row(j)))
    }

    /// `Fᵀ F` for any `F`.
    pub fn gram(f: &Mat<T>) -> Self {
        Self::from_mat(f.tr_matmul(f)).expect("square by construction")
    }

    pub fn outer(v: &[T]) -> Self {
        Self::from_upper(v.len(), |i, j| v[i] * v[j])
    }

    pub fn dim(&self) -> usize {
        self.inner.rows()
    }

    pub fn as_mat(&self) -> &Mat<T> {
        &self.inner
    }

    pub fn into_mat(self) -> Mat<T> {
        self.inner
    }

    pub fn diag(&self) -> Vec<T> {
        (0..self.dim()).map(|i| self.inner[(i, i)]).collect()
    }

    pub fn add(&self, other: &Self) -> Self {
        Self { inner: self.inner.add(&other.inner) }
    }

    pub fn sub(&self, other: &Self) -> Self {
        Self { inner: self.inner.sub(&other.inner) }
    }

    pub fn scale(&self, s: T) -> Self {
        Self { inner: self.inner.scale(s) }
    }

    pub fn add_diag(&self, d: &[T]) -> Self {
        assert_eq!(d.len(), self.dim());
        let mut inner = self.inner.clone();
        for (i, &v) in d.iter().enumerate() {
            inner[(i, i)] += v;
        }
        Self { inner }
    }

    /// `P · self · Pᵀ`.
    pub fn congruence(&self, p: &Mat<T>) -> Self {
        let tmp = p.matmul(&self.inner);
        Self::from_mat(tmp.matmul(&p.transpose())).expect("square by construction")
    }

    /// Principal submatrix on `idx`.
    pub fn principal(&self, idx: &[usize]) -> Self {
        Self { inner: self.inner.select(idx, idx) }
    }

    /// Frobenius inner product.
    pub fn inner_product(&self, other: &Self) -> T {
        dot(self.inner.as_slice(), other.inner.as_slice())
    }

    pub fn quad_form(&self, v: &[T]) -> T {
        dot(v, &self.inner.mul_vec(v))
    }

    pub fn norm_fro(&self) -> T {
        self.inner.norm_fro()
    }

    pub fn max_abs(&self) -> T {
        self.inner.max_abs()
    }

    pub fn is_finite(&self) -> bool {
        self.inner.is_finite()
    }

    /// `[[corner, vᵀ], [v, self]]`.
    pub fn bordered(&self, corner: T, v: &[T]) -> Self {
        let n = self.dim();
        assert_eq!(v.len(), n);
        Self::from_upper(n + 1, |i, j| match (i, j) {
            (0, 0) => corner,
            (0, j) => v[j - 1],
            (i, j) => self.inner[(i - 1, j - 1)],
        })
    }

    /// Splits `[[c, vᵀ], [v, B]]` into `(c, v, B)`.
    pub fn unborder(&self) -> (T, Vec<T>, Self) {
        let n = self.dim();
        assert!(n >= 1);
        let v = (1..n).map(|i| self.inner[(i, 0)]).collect();
        let idx: Vec<usize> = (1..n).collect();
        (self.inner[(0, 0)], v, self.principal(&idx))
    }

    pub fn cast<U: Real>(&self) -> SymMatrix<U> {
        SymMatrix { inner: self.inner.cast() }
    }
}

impl<T> Index<(usize, usize)> for SymMatrix<T> {
    type Output = T;
    #[inline]
    fn index(&self, idx: (usize, usize)) -> &T {
        &self.inner[idx]
    }
}

/// Dense complex Hermitian matrix. Constructors enforce
/// `a[i][j] == conj(a[j][i])` exactly (real diagonal).
#[derive(Debug, Clone, PartialEq)]
pub struct HermMatrix<T> {
    n: usize,
    data: Vec<Complex<T>>,
}

impl<T: Real> HermMatrix<T> {
    pub fn zeros(n: usize) -> Self {
        Self { n, data: vec![Complex::new(T::zero(), T::zero()); n * n] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n);
        for i in 0..n {
            m.data[i * n + i] = Complex::new(T::one(), T::zero());
        }
        m
    }

    /// Hermitizes the given square array as `(A + A†)/2`.
    pub fn from_fn(n: usize, mut f: impl FnMut(usize, usize) -> Complex<T>) -> Self {
        let mut raw = Vec::with_capacity(n * n);
        for i in 0..n {
            for j in 0..n {
                raw.push(f(i, j));
            }
        }
        let half = T::lit(0.5);
        let mut data = raw.clone();
        for i in 0..n {
            data[i * n + i] = Complex::new(raw[i * n + i].re, T::zero());
            for j in (i + 1)..n {
                let v = (raw[i * n + j] + raw[j * n + i].conj()).scale(half);
                data[i * n + j] = v;
                data[j * n + i] = v.conj();
            }
        }
        Self { n, data }
    }

    pub fn from_rows(rows: &[Vec<Complex<T>>]) -> Result<Self> {
        let n = rows.len();
        if rows.iter().any(|r| r.len() != n) {
            return invalid("Hermitian matrix must be square");
        }
        Ok(Self::from_fn(n, |i, j| rows[i][j]))
    }

    /// `A† A` for a complex `m x n` matrix given row-major.
    pub fn gram(a: &[Complex<T>], rows: usize, cols: usize) -> Self {
        assert_eq!(a.len(), rows * cols);
        let mut out = Self::zeros(cols);
        for i in 0..cols {
            for j in i..cols {
                let v = (0..rows).fold(Complex::new(T::zero(), T::zero()), |acc, k| {
                    acc + a[k * cols + i].conj() * a[k * cols + j]
                });
                if i == j {
                    out.data[i * cols + i] = Complex::new(v.re, T::zero());
                } else {
                    out.data[i * cols + j] = v;
                    out.data[j * cols + i] = v.conj();
                }
            }
        }
        out
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn get(&self, i: usize, j: usize) -> Complex<T> {
        self.data[i * self.n + j]
    }

    pub fn add_real_diag(&self, d: &[T]) -> Self {
        assert_eq!(d.len(), self.n);
        let mut out = self.clone();
        for (i, &v) in d.iter().enumerate() {
            out.data[i * self.n + i].re += v;
        }
        out
    }

    pub fn mul_vec(&self, v: &[Complex<T>]) -> Vec<Complex<T>> {
        (0..self.n)
            .map(|i| {
                (0..self.n).fold(Complex::new(T::zero(), T::zero()), |acc, j| acc + self.get(i, j) * v[j])
            })
            .collect()
    }

    pub fn real_part(&self) -> Mat<T> {
        Mat::from_fn(self.n, self.n, |i, j| self.get(i, j).re)
    }

    pub fn imag_part(&self) -> Mat<T> {
        Mat::from_fn(self.n, self.n, |i, j| self.get(i, j).im)
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|z| z.re.is_finite() && z.im.is_finite())
    }
}

#[inline]
pub fn dot<T: Real>(a: &[T], b: &[T]) -> T {
    debug_assert_eq!(a.len(), b.len());
    let mut acc = T::zero();
    for (&x, &y) in a.iter().zip(b) {
        acc += x * y;
    }
    acc
}

#[inline]
pub fn norm2<T: Real>(a: &[T]) -> T {
    dot(a, a).sqrt()
}

pub fn norm_inf<T: Real>(a: &[T]) -> T {
    a.iter().fold(T::zero(), |m, &x| m.max(x.abs()))
}
