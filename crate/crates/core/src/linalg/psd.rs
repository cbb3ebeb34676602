//! PSD-cone membership, projection, and the real embedding of Hermitian
//! matrices.

use num_complex::Complex;

use crate::error::{invalid, Result};
use crate::linalg::eigen::{eig_sym, eig_sym_ql};
use crate::linalg::matrix::{HermMatrix, Mat, SymMatrix};
use crate::scalar::Real;

/// Tolerance scale shared by the PSD checks: `max(1, max |a_ij|)`.
pub fn psd_scale<T: Real>(a: &SymMatrix<T>) -> T {
    T::one().max(a.max_abs())
}

/// `λ_min(A) ≥ −tol·max(1, max |a_ij|)`.
pub fn is_psd<T: Real>(a: &SymMatrix<T>, tol: T) -> Result<bool> {
    if tol < T::zero() {
        return invalid("PSD tolerance must be nonnegative");
    }
    Ok(min_eig(a)? >= -tol * psd_scale(a))
}

pub fn min_eig<T: Real>(a: &SymMatrix<T>) -> Result<T> {
    if a.dim() == 0 {
        return Ok(T::zero());
    }
    Ok(eig_sym(a)?.min())
}

/// Frobenius-nearest PSD matrix, `V max(Λ, 0) Vᵀ`.
pub fn psd_project<T: Real>(a: &SymMatrix<T>) -> Result<SymMatrix<T>> {
    let eig = eig_sym(a)?;
    Ok(eig.reconstruct_with(|l| l.max(T::zero())))
}

/// Same projection through the tridiagonal-QL eigensolver. Reconstructs from
/// whichever of the positive or negative parts has fewer eigenpairs.
pub fn psd_project_fast<T: Real>(a: &SymMatrix<T>) -> Result<SymMatrix<T>> {
    let eig = eig_sym_ql(a)?;
    let positives = eig.values.iter().filter(|&&l| l > T::zero()).count();
    if positives * 2 <= a.dim() {
        Ok(eig.reconstruct_with(|l| l.max(T::zero())))
    } else {
        let neg = eig.reconstruct_with(|l| l.min(T::zero()));
        Ok(a.sub(&neg))
    }
}

/// `[[Re A, −Im A], [Im A, Re A]]`.
pub fn herm_to_real<T: Real>(a: &HermMatrix<T>) -> SymMatrix<T> {
    let n = a.dim();
    let m = Mat::from_fn(2 * n, 2 * n, |i, j| {
        let z = a.get(i % n, j % n);
        match (i < n, j < n) {
            (true, true) | (false, false) => z.re,
            (true, false) => -z.im,
            (false, true) => z.im,
        }
    });
    SymMatrix::from_mat(m).expect("square")
}

/// For `V = [[A, B], [Bᵀ, C]]` returns `½(A + C) + (i/2)(Bᵀ − B)`, which is
/// PSD whenever `V` is.
pub fn real_pair_to_herm<T: Real>(v: &SymMatrix<T>) -> Result<HermMatrix<T>> {
    let d = v.dim();
    if d % 2 != 0 {
        return invalid(format!("real pair matrix must have even dimension, got {d}"));
    }
    let n = d / 2;
    let half = T::lit(0.5);
    Ok(HermMatrix::from_fn(n, |i, j| {
        let re = half * (v[(i, j)] + v[(n + i, n + j)]);
        // (Bᵀ)_ij = B_ji = v[(j, n+i)]
        let im = half * (v[(j, n + i)] - v[(i, n + j)]);
        Complex::new(re, im)
    }))
}

/// Smallest eigenvalue of a Hermitian matrix via its real embedding.
pub fn min_eig_herm<T: Real>(a: &HermMatrix<T>) -> Result<T> {
    if !a.is_finite() {
        return invalid("matrix has non-finite entries");
    }
    min_eig(&herm_to_real(a))
}

/// Eigenvalues of a Hermitian matrix, ascending, with the doubled copies from
/// the real embedding removed.
pub fn eigvals_herm<T: Real>(a: &HermMatrix<T>) -> Result<Vec<T>> {
    let vals = eig_sym(&herm_to_real(a))?.values;
    Ok(vals.chunks(2).map(|p| p[0]).collect())
}
