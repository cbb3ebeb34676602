//! The two specializations of the lift: ESDR2-T ↔ ESDR-Y through `Ŝ`, and
//! the binary-expansion relaxations through `W = [I, 2I, …, 2^{q−1}I]`.

use serde::{Deserialize, Serialize};

use crate::equivalence::lift::{lift, DecomposedPoint, INPUT_TOL};
use crate::equivalence::nnls::nnls;
use crate::equivalence::partition::{find_partition, SeparablePartition};
use crate::equivalence::unit_diag::{binary_weights, weight_interval, weight_witness};
use crate::error::{invalid, Result};
use crate::linalg::{min_eig, psd_scale, Mat, SymMatrix};
use crate::model::ProblemData;
use crate::scalar::Real;

/// Ridge of the hull-weight least squares; it selects the minimum-norm
/// weights among the exact solutions.
const HULL_RIDGE: f64 = 1e-12;
/// Moment residual above which a block is declared outside the hull.
const HULL_TOL: f64 = 1e-8;
/// Weights above this negativity are clipped to zero.
const CLIP_TOL: f64 = 1e-9;

fn bordered_violation<T: Real>(v: &[T], m: &SymMatrix<T>) -> Result<T> {
    let b = m.bordered(T::one(), v);
    Ok((-min_eig(&b)? / psd_scale(&b)).max(T::zero()))
}

/// `⟨Q̂, Y⟩ + 2ĉᵀy`.
pub fn esdry_objective<T: Real>(pd: &ProblemData<T>, y: &[T], yy: &SymMatrix<T>) -> T {
    pd.qhat.inner_product(yy) + T::lit(2.0) * y.iter().zip(&pd.chat).fold(T::zero(), |a, (&u, &c)| a + u * c)
}

/// `⟨Q̄, T⟩ + 2c̄ᵀt`.
pub fn esdr2t_objective<T: Real>(pd: &ProblemData<T>, t: &[T], tt: &SymMatrix<T>) -> T {
    pd.qbar.inner_product(tt) + T::lit(2.0) * t.iter().zip(&pd.cbar).fold(T::zero(), |a, (&u, &c)| a + u * c)
}

/// Largest violation of the ESDR2-T constraints: simplex weights, `T` equal
/// to `Diag(t)` on each antenna block, and the bordered PSD constraint
/// (relative).
pub fn esdr2t_violation<T: Real>(pd: &ProblemData<T>, t: &[T], tt: &SymMatrix<T>) -> Result<T> {
    let (n, mm) = (pd.n, pd.order);
    if t.len() != n * mm || tt.dim() != n * mm {
        return invalid("ESDR2-T point has the wrong dimension");
    }
    let mut v = bordered_violation(t, tt)?;
    for i in 0..n {
        let block = &t[i * mm..(i + 1) * mm];
        v = v.max((block.iter().fold(T::zero(), |a, &x| a + x) - T::one()).abs());
        for a in 0..mm {
            v = v.max(-block[a]);
            for b in 0..mm {
                let target = if a == b { block[a] } else { T::zero() };
                v = v.max((tt[(i * mm + a, i * mm + b)] - target).abs());
            }
        }
    }
    Ok(v)
}

/// Hull weights of antenna `i`: nonnegative `t⁽ⁱ⁾` matching the moments
/// `(1, y_i, y_{n+i}, Y_ii, Y_{i,n+i}, Y_{n+i,n+i})`, together with the
/// moment residual before clipping.
pub fn hull_weights<T: Real>(pd: &ProblemData<T>, y: &[T], yy: &SymMatrix<T>, i: usize) -> Result<(Vec<T>, T)> {
    let (n, mm) = (pd.n, pd.order);
    let s = &pd.symbols;
    let moments = |j: usize| {
        let z = s.get(j);
        [T::one(), z.re, z.im, z.re * z.re, z.re * z.im, z.im * z.im]
    };
    let target = [T::one(), y[i], y[n + i], yy[(i, i)], yy[(i, n + i)], yy[(n + i, n + i)]];
    let ridge = T::lit(HULL_RIDGE).sqrt();
    let a = Mat::from_fn(6 + mm, mm, |r, c| if r < 6 { moments(c)[r] } else if r - 6 == c { ridge } else { T::zero() });
    let b: Vec<T> = target.iter().copied().chain(std::iter::repeat_n(T::zero(), mm)).collect();
    let mut w = nnls(&a, &b)?;
    let residual = (0..6).fold(T::zero(), |m, r| {
        let v = (0..mm).fold(T::zero(), |acc, c| acc + a[(r, c)] * w[c]);
        m.max((v - target[r]).abs())
    });
    w.iter_mut().for_each(|x| {
        if *x < T::lit(CLIP_TOL) && *x > -T::lit(CLIP_TOL) {
            *x = x.max(T::zero());
        }
    });
    let total = w.iter().fold(T::zero(), |a, &x| a + x);
    if total > T::zero() {
        w.iter_mut().for_each(|x| *x /= total);
    }
    Ok((w, residual))
}

/// Largest violation of the ESDR-Y constraints: bordered PSD (relative) and
/// each antenna's moment block inside the hull of the `K_j`.
pub fn esdry_violation<T: Real>(pd: &ProblemData<T>, y: &[T], yy: &SymMatrix<T>) -> Result<T> {
    let n = pd.n;
    if y.len() != 2 * n || yy.dim() != 2 * n {
        return invalid("ESDR-Y point has the wrong dimension");
    }
    let mut v = bordered_violation(y, yy)?;
    for i in 0..n {
        v = v.max(hull_weights(pd, y, yy, i)?.1);
    }
    Ok(v)
}

/// `y = Ŝt`, `Y = ŜTŜᵀ`.
pub fn esdr2t_to_esdry<T: Real>(t: &[T], tt: &SymMatrix<T>, pd: &ProblemData<T>) -> Result<(Vec<T>, SymMatrix<T>)> {
    let viol = esdr2t_violation(pd, t, tt)?;
    if viol > T::lit(INPUT_TOL) {
        return invalid(format!("point is not ESDR2-T feasible (violation {:e})", viol.as_f64()));
    }
    Ok((pd.shat.mul_vec(t), tt.congruence(&pd.shat)))
}

/// `(t⁽ⁱ⁾, Diag(t⁽ⁱ⁾))` per antenna from the hull weights, in the order of
/// [`antenna_partition`].
pub fn esdry_groups<T: Real>(pd: &ProblemData<T>, y: &[T], yy: &SymMatrix<T>) -> Result<Vec<(Vec<T>, SymMatrix<T>)>> {
    let scale = T::one().max(yy.max_abs());
    (0..pd.n)
        .map(|i| {
            let (w, residual) = hull_weights(pd, y, yy, i)?;
            if residual > T::lit(HULL_TOL) * scale {
                return invalid(format!("antenna {i} moment block lies outside the hull (residual {:e})", residual.as_f64()));
            }
            let d = SymMatrix::from_diag(&w);
            Ok((w, d))
        })
        .collect()
}

/// Hull weights per antenna give `t⁽ⁱ⁾` and `T⁽ⁱ⁾ = Diag(t⁽ⁱ⁾)`; the lift over
/// the `Ŝ` partition assembles `(t, T)`.
pub fn esdry_to_esdr2t<T: Real>(y: &[T], yy: &SymMatrix<T>, pd: &ProblemData<T>) -> Result<(Vec<T>, SymMatrix<T>)> {
    let n = pd.n;
    if y.len() != 2 * n || yy.dim() != 2 * n {
        return invalid("ESDR-Y point has the wrong dimension");
    }
    let groups = esdry_groups(pd, y, yy)?;
    let part = antenna_partition(pd)?;
    let lifted = lift(&DecomposedPoint { y: y.to_vec(), yy: yy.clone(), groups }, &part)?;
    Ok((lifted.t, lifted.tt))
}

/// Groups `α_i = {i, n+i}`, `β_i = {iM, …, (i+1)M − 1}` of `Ŝ`. For QPSK the
/// finest partition splits these further, but the hull weights live per
/// antenna.
pub fn antenna_partition<T: Real>(pd: &ProblemData<T>) -> Result<SeparablePartition<T>> {
    let (n, mm) = (pd.n, pd.order);
    let rows = (0..n).map(|i| vec![i, n + i]).collect();
    let cols = (0..n).map(|i| (i * mm..(i + 1) * mm).collect()).collect();
    SeparablePartition::with_groups(&pd.shat, rows, cols)
}

/// `W = [I_n, 2I_n, …, 2^{q−1}I_n]` (`n × qn`).
pub fn binary_weight_matrix<T: Real>(q: usize, n: usize) -> Mat<T> {
    let w = binary_weights::<T>(q);
    let mut m = Mat::zeros(n, q * n);
    for (k, &wk) in w.iter().enumerate() {
        for i in 0..n {
            m[(i, k * n + i)] = wk;
        }
    }
    m
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum VaBcDirection {
    /// `(b, B) ↦ (Wb, WBWᵀ)`.
    VaToBc,
    /// Per-coordinate witnesses lifted through the `W` partition.
    BcToVa,
}

/// `diag(B) = 1` and the bordered PSD constraint.
pub fn va_violation<T: Real>(b: &[T], bb: &SymMatrix<T>) -> Result<T> {
    let v = bordered_violation(b, bb)?;
    Ok(bb.diag().into_iter().fold(v, |a, d| a.max((d - T::one()).abs())))
}

/// `1 ≤ X_ii ≤ (2^q − 1)²` and the bordered PSD constraint.
pub fn bc_violation<T: Real>(q: usize, x: &[T], xx: &SymMatrix<T>) -> Result<T> {
    let (lo, hi) = weight_interval::<T>(q)?;
    let v = bordered_violation(x, xx)?;
    Ok(xx.diag().into_iter().fold(v, |a, d| a.max(lo - d).max(d - hi)))
}

pub fn va_to_bc<T: Real>(q: usize, n: usize, b: &[T], bb: &SymMatrix<T>) -> Result<(Vec<T>, SymMatrix<T>)> {
    if b.len() != q * n || bb.dim() != q * n {
        return invalid("VA point has the wrong dimension");
    }
    let viol = va_violation(b, bb)?;
    if viol > T::lit(INPUT_TOL) {
        return invalid(format!("point is not VA feasible (violation {:e})", viol.as_f64()));
    }
    let w = binary_weight_matrix::<T>(q, n);
    Ok((w.mul_vec(b), bb.congruence(&w)))
}

/// Per-coordinate `(b⁽ⁱ⁾, B⁽ⁱ⁾)` in the order of `find_partition(W)`.
pub fn bc_groups<T: Real>(q: usize, x: &[T], xx: &SymMatrix<T>) -> Result<Vec<(Vec<T>, SymMatrix<T>)>> {
    let w = binary_weights::<T>(q);
    (0..x.len())
        .map(|i| {
            let bi = weight_witness(q, xx[(i, i)])?;
            let ratio = x[i] / xx[(i, i)];
            let v: Vec<T> = bi.as_mat().mul_vec(&w).into_iter().map(|u| ratio * u).collect();
            Ok((v, bi))
        })
        .collect()
}

/// `B⁽ⁱ⁾` is the unit-diagonal witness with `wᵀB⁽ⁱ⁾w = X_ii` and
/// `b⁽ⁱ⁾ = (x_i / X_ii)·B⁽ⁱ⁾w`.
pub fn bc_to_va<T: Real>(q: usize, n: usize, x: &[T], xx: &SymMatrix<T>) -> Result<(Vec<T>, SymMatrix<T>)> {
    if x.len() != n || xx.dim() != n {
        return invalid("BC point has the wrong dimension");
    }
    let scale = T::one().max(xx.max_abs());
    let viol = bc_violation(q, x, xx)?;
    if viol > T::lit(INPUT_TOL) * scale {
        return invalid(format!("point is not BC feasible (violation {:e})", viol.as_f64()));
    }
    let groups = bc_groups(q, x, xx)?;
    let part = find_partition(&binary_weight_matrix::<T>(q, n));
    let lifted = lift(&DecomposedPoint { y: x.to_vec(), yy: xx.clone(), groups }, &part)?;
    Ok((lifted.t, lifted.tt))
}

/// Dispatches on `direction`; `point` is `(b, B)` for VA→BC and `(x, X)`
/// for BC→VA.
pub fn va_bc_map<T: Real>(q: usize, n: usize, direction: VaBcDirection, v: &[T], m: &SymMatrix<T>) -> Result<(Vec<T>, SymMatrix<T>)> {
    match direction {
        VaBcDirection::VaToBc => va_to_bc(q, n, v, m),
        VaBcDirection::BcToVa => bc_to_va(q, n, v, m),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{derive_problem, one_hot, sample_instance};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
        a.iter().zip(b).fold(0.0, |m, (x, y)| m.max((x - y).abs()))
    }

    fn problem(n: usize, order: usize, seed: u64) -> ProblemData<f64> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        derive_problem(&sample_instance(n + 2, n, order, 10.0, &mut rng).unwrap())
    }

    /// Mixture of rank-one one-hot vertices: feasible for ESDR2-T.
    fn random_esdr2t_point(pd: &ProblemData<f64>, rng: &mut ChaCha8Rng) -> (Vec<f64>, SymMatrix<f64>) {
        let d = pd.dim_t();
        let mut t = vec![0.0; d];
        let mut tt = SymMatrix::zeros(d);
        let count = 5;
        let weights: Vec<f64> = (0..count).map(|_| rng.random_range(0.1..1.0)).collect();
        let total: f64 = weights.iter().sum();
        for w in weights {
            let u: Vec<usize> = (0..pd.n).map(|_| rng.random_range(0..pd.order)).collect();
            let v = one_hot::<f64>(&u, pd.order);
            t.iter_mut().zip(&v).for_each(|(a, b)| *a += w / total * b);
            tt = tt.add(&SymMatrix::outer(&v).scale(w / total));
        }
        (t, tt)
    }

    #[test]
    fn one_hot_maps_to_rank_one_moments() {
        let pd = problem(2, 8, 1);
        let t = one_hot::<f64>(&[3, 5], 8);
        let tt = SymMatrix::outer(&t);
        let (y, yy) = esdr2t_to_esdry(&t, &tt, &pd).unwrap();
        let ystar = pd.shat.mul_vec(&t);
        assert!(max_abs_diff(&y, &ystar) < 1e-15);
        assert!(yy.sub(&SymMatrix::outer(&ystar)).max_abs() < 1e-14);
        let (t2, tt2) = esdry_to_esdr2t(&y, &yy, &pd).unwrap();
        assert!(max_abs_diff(&t2, &t) < 1e-8);
        assert!(tt2.sub(&tt).max_abs() < 1e-8);
    }

    #[test]
    fn maps_preserve_objectives_and_feasibility() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for (n, order) in [(2, 4), (2, 8), (3, 8)] {
            let pd = problem(n, order, 9);
            for _ in 0..10 {
                let (t, tt) = random_esdr2t_point(&pd, &mut rng);
                let (y, yy) = esdr2t_to_esdry(&t, &tt, &pd).unwrap();
                let f2t = esdr2t_objective(&pd, &t, &tt);
                assert!((esdry_objective(&pd, &y, &yy) - f2t).abs() <= 1e-9 * (1.0 + f2t.abs()));
                assert!(esdry_violation(&pd, &y, &yy).unwrap() < 1e-6);
                let (t2, tt2) = esdry_to_esdr2t(&y, &yy, &pd).unwrap();
                assert!(esdr2t_violation(&pd, &t2, &tt2).unwrap() < 1e-6);
                assert!((esdr2t_objective(&pd, &t2, &tt2) - f2t).abs() <= 1e-6 * (1.0 + f2t.abs()));
            }
        }
    }

    #[test]
    fn qpsk_hull_weights_solve_the_moment_system() {
        let pd = problem(1, 4, 2);
        let t = vec![0.1, 0.2, 0.3, 0.4];
        let tt = SymMatrix::from_diag(&t);
        let (y, yy) = esdr2t_to_esdry(&t, &tt, &pd).unwrap();
        let (w, residual) = hull_weights(&pd, &y, &yy, 0).unwrap();
        assert!(residual < 1e-10);
        // with M = 4 the five moment equations determine the weights
        assert!(max_abs_diff(&w, &t) < 1e-8, "{w:?}");
    }

    #[test]
    fn outside_hull_is_rejected() {
        let pd = problem(1, 8, 3);
        // |y| = 1 on a non-constellation phase cannot be a hull point
        let th = 0.3f64;
        let y = vec![th.cos(), th.sin()];
        let yy = SymMatrix::outer(&y);
        assert!(esdry_to_esdr2t(&y, &yy, &pd).is_err());
        assert!(esdr2t_to_esdry(&[0.5; 8], &SymMatrix::from_diag(&[0.5; 8]), &pd).is_err());
    }

    #[test]
    fn weight_matrix_layout() {
        let w = binary_weight_matrix::<f64>(2, 2);
        assert_eq!(w.to_rows(), vec![vec![1.0, 0.0, 2.0, 0.0], vec![0.0, 1.0, 0.0, 2.0]]);
    }

    #[test]
    fn va_identity_at_q1() {
        let b = vec![0.2, -0.4];
        let bb = SymMatrix::from_rows(&[vec![1.0, 0.3], vec![0.3, 1.0]]).unwrap();
        let (x, xx) = va_to_bc(1, 2, &b, &bb).unwrap();
        assert_eq!(x, b);
        assert_eq!(xx, bb);
        let (b2, bb2) = bc_to_va(1, 2, &x, &xx).unwrap();
        assert!(max_abs_diff(&b2, &b) < 1e-10);
        assert!(bb2.sub(&bb).max_abs() < 1e-10);
    }

    #[test]
    fn va_scalar_example() {
        let (x, xx) = va_to_bc(2, 1, &[0.0, 0.0], &SymMatrix::identity(2)).unwrap();
        assert_eq!(x, vec![0.0]);
        assert_eq!(xx[(0, 0)], 5.0);
        assert!(bc_violation(2, &x, &xx).unwrap() == 0.0);
    }

    #[test]
    fn bc_round_trip_with_unit_diagonal() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        for _ in 0..20 {
            let n = 2;
            let q = 3;
            // correlation matrix with a mean vector inside its Schur bound
            let g = Mat::from_fn(n, n + 1, |_, _| rng.random_range(-1.0..1.0));
            let raw: SymMatrix<f64> = SymMatrix::outer_gram(&g);
            let d: Vec<f64> = raw.diag().iter().map(|v: &f64| 1.0 / v.sqrt()).collect();
            let xx = SymMatrix::from_upper(n, |i, j| raw[(i, j)] * d[i] * d[j]);
            let x: Vec<f64> = (0..n).map(|_| rng.random_range(-0.3..0.3)).collect();
            if bc_violation(q, &x, &xx).unwrap() > 0.0 {
                continue;
            }
            let (b, bb) = bc_to_va(q, n, &x, &xx).unwrap();
            assert!(va_violation(&b, &bb).unwrap() < 1e-8);
            let (x2, xx2) = va_to_bc(q, n, &b, &bb).unwrap();
            assert!(max_abs_diff(&x2, &x) < 1e-8);
            assert!(xx2.sub(&xx).max_abs() < 1e-8);
            let cost = SymMatrix::from_upper(n, |_, _| rng.random_range(-1.0..1.0));
            assert!((cost.inner_product(&xx2) - cost.inner_product(&xx)).abs() < 1e-8);
        }
    }
}
