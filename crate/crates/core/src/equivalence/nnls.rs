//! Lawson–Hanson active-set nonnegative least squares.

use crate::error::{invalid, Error, Result};
use crate::linalg::{Cholesky, Mat};
use crate::scalar::Real;

/// `argmin ‖Ax − b‖₂` over `x ≥ 0`.
pub fn nnls<T: Real>(a: &Mat<T>, b: &[T]) -> Result<Vec<T>> {
    let (m, n) = a.shape();
    if b.len() != m {
        return invalid("right-hand side length differs from the row count");
    }
    let mut x = vec![T::zero(); n];
    let mut passive = vec![false; n];
    let anorm = a.norm_fro();
    let tol = T::lit(10.0) * T::epsilon() * anorm.max(T::one()) * T::from_count(m.max(n));
    let gradient = |x: &[T]| -> Vec<T> {
        let ax = a.mul_vec(x);
        let r: Vec<T> = b.iter().zip(&ax).map(|(&bi, &v)| bi - v).collect();
        a.tr_mul_vec(&r)
    };
    let mut w = gradient(&x);
    let max_outer = 3 * n + 10;
    for _ in 0..max_outer {
        let pick = (0..n).filter(|&j| !passive[j]).max_by(|&i, &j| w[i].partial_cmp(&w[j]).expect("finite gradient"));
        let Some(j) = pick.filter(|&j| w[j] > tol) else {
            return Ok(x);
        };
        passive[j] = true;
        loop {
            let idx: Vec<usize> = (0..n).filter(|&k| passive[k]).collect();
            let s = passive_solve(a, b, &idx)?;
            if s.iter().all(|&v| v > T::zero()) {
                x.iter_mut().for_each(|v| *v = T::zero());
                for (&k, &v) in idx.iter().zip(&s) {
                    x[k] = v;
                }
                break;
            }
            let mut alpha = T::one();
            for (&k, &v) in idx.iter().zip(&s) {
                if v <= T::zero() {
                    alpha = alpha.min(x[k] / (x[k] - v));
                }
            }
            let mut full = vec![T::zero(); n];
            for (&k, &v) in idx.iter().zip(&s) {
                full[k] = v;
            }
            for k in 0..n {
                x[k] = x[k] + alpha * (full[k] - x[k]);
                if passive[k] && x[k] <= tol {
                    x[k] = T::zero();
                    passive[k] = false;
                }
            }
            if !passive.iter().any(|&p| p) {
                break;
            }
        }
        w = gradient(&x);
    }
    Err(Error::NumericalBreakdown("nonnegative least squares did not converge".into()))
}

/// Unconstrained least squares on the columns `idx` via normal equations.
fn passive_solve<T: Real>(a: &Mat<T>, b: &[T], idx: &[usize]) -> Result<Vec<T>> {
    let m = a.rows();
    let k = idx.len();
    let g = Mat::from_fn(k, k, |p, q| (0..m).fold(T::zero(), |acc, r| acc + a[(r, idx[p])] * a[(r, idx[q])]));
    let mut rhs: Vec<T> = idx.iter().map(|&c| (0..m).fold(T::zero(), |acc, r| acc + a[(r, c)] * b[r])).collect();
    let chol = Cholesky::factor(&g).map_err(|_| Error::NumericalBreakdown("rank-deficient passive set".into()))?;
    chol.solve_in_place(&mut rhs);
    Ok(rhs)
}
