//! Factorizations: Gram factors of PSD matrices, orthogonal extensions
//! matching two Gram-equivalent factors, and a dense Cholesky.

use crate::error::{Error, Result};
use crate::linalg::eigen::eig_sym;
use crate::linalg::matrix::{dot, norm2, Mat, SymMatrix};
use crate::scalar::Real;

/// Relative PSD slack accepted by [`gram_factor`].
pub const GRAM_PSD_TOL: f64 = 1e-8;

/// Returns `F` with `rows` rows and `FᵀF = A`.
///
/// Eigenvalues below `−1e-8·max(1, ‖A‖_F)` are rejected; smaller negative ones
/// are clipped to zero. When `rows < dim(A)` the largest eigenvalues are kept
/// and the dropped ones must be negligible at the same tolerance.
pub fn gram_factor<T: Real>(a: &SymMatrix<T>, rows: usize) -> Result<Mat<T>> {
    gram_factor_with_tol(a, rows, T::lit(GRAM_PSD_TOL))
}

pub fn gram_factor_with_tol<T: Real>(a: &SymMatrix<T>, rows: usize, tol: T) -> Result<Mat<T>> {
    let n = a.dim();
    let mut f = Mat::zeros(rows, n);
    if n == 0 {
        return Ok(f);
    }
    let eig = eig_sym(a)?;
    let limit = tol * T::one().max(a.norm_fro());
    if eig.min() < -limit {
        return Err(Error::NotPsd { min_eig: eig.min().as_f64(), tol: limit.as_f64() });
    }
    // descending, so the kept rows carry the dominant part
    for (row, k) in (0..n).rev().enumerate() {
        let lambda = eig.values[k].max(T::zero());
        if row >= rows {
            if lambda > limit {
                return Err(Error::InvalidInput(format!(
                    "matrix has rank above the requested {rows} factor rows"
                )));
            }
            continue;
        }
        let s = lambda.sqrt();
        for j in 0..n {
            f[(row, j)] = s * eig.vectors[(j, k)];
        }
    }
    Ok(f)
}

/// Relative Gram mismatch accepted by [`orthogonal_extension`].
pub const EXTENSION_GRAM_TOL: f64 = 1e-8;

/// For `A` (`p×n`) and `B` (`q×n`) with `AᵀA = BᵀB` and `p ≤ q`, returns
/// `U` (`q×p`) with orthonormal columns and `B = UA`.
pub fn orthogonal_extension<T: Real>(a: &Mat<T>, b: &Mat<T>) -> Result<Mat<T>> {
    orthogonal_extension_with_tol(a, b, T::lit(EXTENSION_GRAM_TOL))
}

pub fn orthogonal_extension_with_tol<T: Real>(a: &Mat<T>, b: &Mat<T>, tol: T) -> Result<Mat<T>> {
    let (p, n) = a.shape();
    let q = b.rows();
    if b.cols() != n {
        return Err(Error::InvalidInput(format!("column counts differ: {} vs {}", n, b.cols())));
    }
    if p > q {
        return Err(Error::InvalidInput(format!("need p <= q, got p={p}, q={q}")));
    }
    let ga = SymMatrix::gram(a);
    let gb = SymMatrix::gram(b);
    let residual = ga.sub(&gb).norm_fro();
    let limit = tol * (T::one() + ga.norm_fro());
    if residual > limit {
        return Err(Error::GramMismatch { residual: residual.as_f64(), tol: limit.as_f64() });
    }

    let eig = eig_sym(&ga)?;
    let sigma_max = eig.max().max(T::zero()).sqrt();
    // |‖Aw‖² − ‖Bw‖²| is bounded by the Gram mismatch, so directions with
    // σ² near it carry no reliable image under B
    let floor = (residual + T::lit(64.0) * T::epsilon() * (T::one() + ga.norm_fro())).sqrt();
    let cutoff = (T::lit(1e-9) * (T::one() + sigma_max)).max(T::lit(100.0) * floor);
    let mut a_basis: Vec<Vec<T>> = Vec::new();
    let mut b_basis: Vec<Vec<T>> = Vec::new();
    for k in (0..n).rev() {
        if a_basis.len() == p {
            break;
        }
        let w = eig.vector(k);
        let aw = a.mul_vec(&w);
        // ‖Aw‖ is accurate in absolute terms, unlike √λ near zero
        let sigma = norm2(&aw);
        if sigma <= cutoff {
            continue;
        }
        let ak: Vec<T> = aw.into_iter().map(|x| x / sigma).collect();
        let bk: Vec<T> = b.mul_vec(&w).into_iter().map(|x| x / sigma).collect();
        a_basis.push(ak);
        b_basis.push(bk);
    }
    // Both sets are orthonormal up to rounding; clean them pairwise so the
    // correspondence a_k -> b_k survives.
    reorthonormalize(&mut a_basis)?;
    reorthonormalize(&mut b_basis)?;
    complete_basis(&mut a_basis, p, p);
    complete_basis(&mut b_basis, q, p);

    let mut u = Mat::zeros(q, p);
    for (ak, bk) in a_basis.iter().zip(&b_basis) {
        for i in 0..q {
            if bk[i] == T::zero() {
                continue;
            }
            for j in 0..p {
                u[(i, j)] += bk[i] * ak[j];
            }
        }
    }
    Ok(u)
}

fn reorthonormalize<T: Real>(basis: &mut [Vec<T>]) -> Result<()> {
    for k in 0..basis.len() {
        for _pass in 0..2 {
            for j in 0..k {
                let (done, rest) = basis.split_at_mut(k);
                let proj = dot(&done[j], &rest[0]);
                for (x, y) in rest[0].iter_mut().zip(&done[j]) {
                    *x -= proj * *y;
                }
            }
        }
        let nrm = norm2(&basis[k]);
        if nrm <= T::lit(1e-6) {
            return Err(Error::NumericalBreakdown("singular directions collapsed during extension".into()));
        }
        basis[k].iter_mut().for_each(|x| *x /= nrm);
    }
    Ok(())
}

/// Extends an orthonormal set to `count` vectors, greedily taking the
/// standard basis vector with the largest residual each time.
fn complete_basis<T: Real>(basis: &mut Vec<Vec<T>>, d: usize, count: usize) {
    while basis.len() < count {
        let mut best: Option<(T, Vec<T>)> = None;
        for e in 0..d {
            let mut v = vec![T::zero(); d];
            v[e] = T::one();
            for _pass in 0..2 {
                for b in basis.iter() {
                    let proj = dot(b, &v);
                    for (x, y) in v.iter_mut().zip(b) {
                        *x -= proj * *y;
                    }
                }
            }
            let nrm = norm2(&v);
            if best.as_ref().is_none_or(|(bn, _)| nrm > *bn) {
                best = Some((nrm, v));
            }
        }
        let (nrm, mut v) = best.expect("nonempty candidate set");
        v.iter_mut().for_each(|x| *x /= nrm);
        basis.push(v);
    }
}

/// Dense lower-triangular Cholesky factor `A = LLᵀ`.
#[derive(Debug, Clone)]
pub struct Cholesky<T> {
    n: usize,
    l: Vec<T>,
}

impl<T: Real> Cholesky<T> {
    pub fn factor(a: &Mat<T>) -> Result<Self> {
        let n = a.rows();
        if a.cols() != n {
            return Err(Error::InvalidInput("Cholesky needs a square matrix".into()));
        }
        let mut l = vec![T::zero(); n * n];
        for j in 0..n {
            let mut d = a[(j, j)];
            for k in 0..j {
                d -= l[j * n + k] * l[j * n + k];
            }
            if !(d > T::zero()) {
                return Err(Error::NumericalBreakdown(format!("Cholesky pivot {j} is not positive")));
            }
            let djj = d.sqrt();
            l[j * n + j] = djj;
            for i in (j + 1)..n {
                let mut s = a[(i, j)];
                let (ri, rj) = (&l[i * n..i * n + j], &l[j * n..j * n + j]);
                for k in 0..j {
                    s -= ri[k] * rj[k];
                }
                l[i * n + j] = s / djj;
            }
        }
        Ok(Self { n, l })
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    /// Smallest diagonal entry of `L`.
    pub fn min_pivot(&self) -> T {
        (0..self.n).map(|i| self.l[i * self.n + i]).fold(T::infinity(), T::min)
    }

    /// Solves `A x = b` in place.
    pub fn solve_in_place(&self, b: &mut [T]) {
        let n = self.n;
        for i in 0..n {
            let mut s = b[i];
            for k in 0..i {
                s -= self.l[i * n + k] * b[k];
            }
            b[i] = s / self.l[i * n + i];
        }
        for i in (0..n).rev() {
            let mut s = b[i];
            for k in (i + 1)..n {
                s -= self.l[k * n + i] * b[k];
            }
            b[i] = s / self.l[i * n + i];
        }
    }
}
