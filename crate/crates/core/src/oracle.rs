//! Brute-force references: exhaustive ML detection and random feasible
//! points of the relaxations.

use num_complex::Complex;
use rand::Rng;
use rand_distr::{Distribution, Exp1};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::model::{ml_objective, MimoInstance, ProblemData};
use crate::scalar::Real;
use crate::sdr::{build, vertex_point, ConicProgram, SdrKind};

/// Largest `Mⁿ` that [`brute_force_ml`] enumerates.
pub const ML_BUDGET: u64 = 10_000_000;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MlResult<T> {
    pub xopt: Vec<Complex<T>>,
    pub uopt: Vec<usize>,
    /// `‖Hx − r‖²` at the optimum (the constant `r†r` included).
    pub objective: T,
    pub num_candidates: u64,
}

/// Symbol indices of candidate `k`; `u[0]` is the most significant digit, so
/// candidate order is lexicographic order.
fn decode(mut k: u64, n: usize, order: usize, u: &mut [usize]) {
    for i in (0..n).rev() {
        u[i] = (k % order as u64) as usize;
        k /= order as u64;
    }
}

/// Exhaustive search over `Sⁿ`. Ties go to the lexicographically smallest
/// index vector, independent of how the work is split across threads.
pub fn brute_force_ml<T: Real>(inst: &MimoInstance<T>) -> Result<MlResult<T>> {
    let (n, order) = (inst.n, inst.order());
    let total = (order as f64).powi(n as i32);
    if total > ML_BUDGET as f64 {
        return Err(Error::TooLarge { candidates: total, limit: ML_BUDGET });
    }
    let total = total as u64;
    let chunk = 4096u64;
    let best = (0..total.div_ceil(chunk))
        .into_par_iter()
        .map(|c| {
            let mut u = vec![0; n];
            let mut x = vec![Complex::new(T::zero(), T::zero()); n];
            let mut best: Option<(T, u64)> = None;
            for k in c * chunk..((c + 1) * chunk).min(total) {
                decode(k, n, order, &mut u);
                u.iter().zip(x.iter_mut()).for_each(|(&j, xi)| *xi = inst.symbols.get(j));
                let f = ml_objective(inst, &x);
                if best.is_none_or(|(b, _)| f < b) {
                    best = Some((f, k));
                }
            }
            best
        })
        .reduce(|| None, pick_min);
    let (objective, k) = best.ok_or_else(|| Error::InvalidInput("empty search space".into()))?;
    let mut uopt = vec![0; n];
    decode(k, n, order, &mut uopt);
    Ok(MlResult { xopt: uopt.iter().map(|&j| inst.symbols.get(j)).collect(), uopt, objective, num_candidates: total })
}

fn pick_min<T: Real>(a: Option<(T, u64)>, b: Option<(T, u64)>) -> Option<(T, u64)> {
    match (a, b) {
        (Some(x), Some(y)) => Some(if y.0 < x.0 || (y.0 == x.0 && y.1 < x.1) { y } else { x }),
        (x, None) => x,
        (None, y) => y,
    }
}

/// `Σ w_k · vertex(u_k)` for the given index vectors and weights (which must
/// be nonnegative and sum to one).
pub fn vertex_mixture<T: Real>(program: &ConicProgram<T>, pd: &ProblemData<T>, vertices: &[Vec<usize>], weights: &[T]) -> Result<Vec<T>> {
    if vertices.is_empty() || vertices.len() != weights.len() {
        return invalid("need one weight per vertex");
    }
    let total = weights.iter().fold(T::zero(), |a, &w| a + w);
    if weights.iter().any(|&w| w < T::zero()) || (total - T::one()).abs() > T::lit(1e-12) {
        return invalid("mixture weights must be nonnegative and sum to one");
    }
    let mut out = vec![T::zero(); program.num_vars()];
    for (u, &w) in vertices.iter().zip(weights) {
        let p = vertex_point(program, pd, u)?;
        out.iter_mut().zip(&p).for_each(|(o, &v)| *o += w * v);
    }
    Ok(out)
}

/// `count` random feasible points of `kind`: mixtures of one to four random
/// rank-one vertices with exponential (flat Dirichlet) weights.
pub fn sample_feasible_membership<T: Real, R: Rng + ?Sized>(
    kind: SdrKind,
    inst: &MimoInstance<T>,
    pd: &ProblemData<T>,
    count: usize,
    rng: &mut R,
) -> Result<Vec<Vec<T>>> {
    let program = build(kind, pd, inst);
    (0..count)
        .map(|_| {
            let k = rng.random_range(1..=4);
            let vertices: Vec<Vec<usize>> = (0..k).map(|_| (0..pd.n).map(|_| rng.random_range(0..pd.order)).collect()).collect();
            let raw: Vec<f64> = (0..k).map(|_| Exp1.sample(rng)).collect();
            let total: f64 = raw.iter().sum();
            let mut weights: Vec<T> = raw.iter().map(|&w| T::lit(w / total)).collect();
            // absorb rounding so the weights sum to one exactly in T
            let rest = weights[1..].iter().fold(T::zero(), |a, &w| a + w);
            weights[0] = T::one() - rest;
            vertex_mixture(&program, pd, &vertices, &weights)
        })
        .collect()
}
