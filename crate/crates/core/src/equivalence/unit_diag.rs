//! Range of `wᵀBw` over unit-diagonal PSD `B`, `w = [1, 2, …, 2^{q−1}]`.

use crate::error::{invalid, Result};
use crate::linalg::SymMatrix;
use crate::scalar::Real;

/// Residual accepted on the witness value.
pub const WITNESS_TOL: f64 = 1e-10;

/// `w = [1, 2, 4, …, 2^{q−1}]`.
pub fn binary_weights<T: Real>(q: usize) -> Vec<T> {
    let mut w = Vec::with_capacity(q);
    let mut v = T::one();
    for _ in 0..q {
        w.push(v);
        v = v + v;
    }
    w
}

/// `(1, (2^q − 1)²)`, the exact image of `B ↦ wᵀBw` over `B ⪰ 0`,
/// `diag(B) = 1`.
pub fn weight_interval<T: Real>(q: usize) -> Result<(T, T)> {
    if q == 0 {
        return invalid("q must be at least 1");
    }
    let hi = binary_weights::<T>(q).into_iter().fold(T::zero(), |a, x| a + x);
    Ok((T::one(), hi * hi))
}

/// `θ·𝟙𝟙ᵀ + (1 − θ)·ggᵀ` with `g = [−1, …, −1, 1]` and `θ` chosen so that
/// `wᵀBw = x` (`gᵀw = 1`, `𝟙ᵀw = 2^q − 1`).
pub fn weight_witness<T: Real>(q: usize, x: T) -> Result<SymMatrix<T>> {
    let (lo, hi) = weight_interval::<T>(q)?;
    let slack = T::lit(WITNESS_TOL) * hi;
    if !(x >= lo - slack && x <= hi + slack) {
        return invalid(format!("target {:e} lies outside [{:e}, {:e}]", x.as_f64(), lo.as_f64(), hi.as_f64()));
    }
    let theta = if hi > lo { ((x - lo) / (hi - lo)).max(T::zero()).min(T::one()) } else { T::one() };
    let mut g = vec![-T::one(); q];
    g[q - 1] = T::one();
    let ones = vec![T::one(); q];
    Ok(SymMatrix::outer(&ones).scale(theta).add(&SymMatrix::outer(&g).scale(T::one() - theta)))
}
