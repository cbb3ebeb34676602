//! Moving between the lifted set `{(t, T) : [[1,tᵀ],[t,T]] ⪰ 0, Y = PTPᵀ,
//! y = Pt, (t⁽ⁱ⁾, T⁽ⁱ⁾) ∈ 𝒜_i}` and the decomposed set where each group
//! carries its own `(t⁽ⁱ⁾, T⁽ⁱ⁾)`.

use serde::{Deserialize, Serialize};

use crate::equivalence::partition::SeparablePartition;
use crate::error::{invalid, Error, Result};
use crate::linalg::{gram_factor, min_eig, orthogonal_extension, psd_scale, Mat, SymMatrix};
use crate::scalar::Real;

/// Feasibility tolerance on inputs of [`restrict`] and [`lift`].
pub const INPUT_TOL: f64 = 1e-8;

/// Per-group pair `(t⁽ⁱ⁾, T⁽ⁱ⁾)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroupPoint<T> {
    pub t: Vec<T>,
    pub tt: Vec<Vec<T>>,
}

impl<T: Real> GroupPoint<T> {
    pub fn new(t: Vec<T>, tt: &SymMatrix<T>) -> Self {
        Self { t, tt: tt.as_mat().to_rows() }
    }

    pub fn matrix(&self) -> Result<SymMatrix<T>> {
        SymMatrix::from_rows(&self.tt)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DecomposedPoint<T> {
    pub y: Vec<T>,
    pub yy: SymMatrix<T>,
    pub groups: Vec<(Vec<T>, SymMatrix<T>)>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LiftedPoint<T> {
    pub t: Vec<T>,
    pub tt: SymMatrix<T>,
}

/// Membership test for the per-group sets `𝒜_i`; returns a violation
/// measure (0 when inside).
pub trait GroupConstraint<T> {
    fn violation(&self, group: usize, t: &[T], tt: &SymMatrix<T>) -> T;
}

/// No constraint beyond the PSD coupling.
pub struct Unconstrained;

impl<T: Real> GroupConstraint<T> for Unconstrained {
    fn violation(&self, _: usize, _: &[T], _: &SymMatrix<T>) -> T {
        T::zero()
    }
}

/// `conv{E₁, …, E_M}` with `E_j = (e_j, e_j e_jᵀ)`: `t` in the simplex and
/// `T = Diag(t)`.
pub struct SimplexVertices;

impl<T: Real> GroupConstraint<T> for SimplexVertices {
    fn violation(&self, _: usize, t: &[T], tt: &SymMatrix<T>) -> T {
        let sum = t.iter().fold(T::zero(), |a, &x| a + x);
        let mut v = (sum - T::one()).abs();
        for (i, &ti) in t.iter().enumerate() {
            v = v.max(-ti);
            for j in 0..t.len() {
                let target = if i == j { ti } else { T::zero() };
                v = v.max((tt[(i, j)] - target).abs());
            }
        }
        v
    }
}

/// `diag(T) = 1`.
pub struct UnitDiagonal;

impl<T: Real> GroupConstraint<T> for UnitDiagonal {
    fn violation(&self, _: usize, _: &[T], tt: &SymMatrix<T>) -> T {
        tt.diag().into_iter().fold(T::zero(), |a, x| a.max((x - T::one()).abs()))
    }
}

fn bordered_psd_violation<T: Real>(t: &[T], tt: &SymMatrix<T>) -> Result<T> {
    let m = tt.bordered(T::one(), t);
    Ok((-min_eig(&m)? / psd_scale(&m)).max(T::zero()))
}

fn max_abs_diff<T: Real>(a: &[T], b: &[T]) -> T {
    a.iter().zip(b).fold(T::zero(), |m, (&x, &y)| m.max((x - y).abs()))
}

/// Residuals of the lifted-set constraints: PSD of the bordered matrix,
/// `y = Pt`, `Y = PTPᵀ`, and agreement with `groups` on each `β_i` block.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LiftResiduals {
    pub psd: f64,
    pub y: f64,
    pub yy: f64,
    pub groups: f64,
}

impl LiftResiduals {
    pub fn max(&self) -> f64 {
        self.psd.max(self.y).max(self.yy).max(self.groups)
    }
}

pub fn lifted_residuals<T: Real>(
    point: &LiftedPoint<T>,
    part: &SeparablePartition<T>,
    y: &[T],
    yy: &SymMatrix<T>,
    groups: Option<&[(Vec<T>, SymMatrix<T>)]>,
) -> Result<LiftResiduals> {
    check_lifted_shapes(point, part, y, yy)?;
    let p = part.matrix();
    let py = p.mul_vec(&point.t);
    let pyy = point.tt.congruence(&p);
    let mut g = T::zero();
    if let Some(groups) = groups {
        for ((t_i, tt_i), beta) in groups.iter().zip(&part.col_groups) {
            let sub_t: Vec<T> = beta.iter().map(|&c| point.t[c]).collect();
            g = g.max(max_abs_diff(&sub_t, t_i));
            g = g.max(point.tt.principal(beta).sub(tt_i).max_abs());
        }
    }
    Ok(LiftResiduals {
        psd: bordered_psd_violation(&point.t, &point.tt)?.as_f64(),
        y: max_abs_diff(&py, y).as_f64(),
        yy: pyy.sub(yy).max_abs().as_f64(),
        groups: g.as_f64(),
    })
}

fn check_lifted_shapes<T: Real>(point: &LiftedPoint<T>, part: &SeparablePartition<T>, y: &[T], yy: &SymMatrix<T>) -> Result<()> {
    if point.t.len() != part.cols || point.tt.dim() != part.cols {
        return invalid("lifted point does not match the partition's column count");
    }
    if y.len() != part.rows || yy.dim() != part.rows {
        return invalid("(y, Y) does not match the partition's row count");
    }
    Ok(())
}

/// Invariants of a decomposed point: every bordered group matrix and the
/// bordered `(y, Y)` are PSD, `y[α_i] = P_i t⁽ⁱ⁾`, `Y[α_i] = P_i T⁽ⁱ⁾ P_iᵀ`.
/// Returns the largest violation.
pub fn decomposed_residual<T: Real>(point: &DecomposedPoint<T>, part: &SeparablePartition<T>) -> Result<T> {
    check_decomposed_shapes(point, part)?;
    let mut v = bordered_psd_violation(&point.y, &point.yy)?;
    for (g, (t_i, tt_i)) in point.groups.iter().enumerate() {
        let (alpha, p_i) = (&part.row_groups[g], &part.blocks[g]);
        v = v.max(bordered_psd_violation(t_i, tt_i)?);
        let y_a: Vec<T> = alpha.iter().map(|&r| point.y[r]).collect();
        v = v.max(max_abs_diff(&p_i.mul_vec(t_i), &y_a));
        v = v.max(tt_i.congruence(p_i).sub(&point.yy.principal(alpha)).max_abs());
    }
    Ok(v)
}

fn check_decomposed_shapes<T: Real>(point: &DecomposedPoint<T>, part: &SeparablePartition<T>) -> Result<()> {
    if point.groups.len() != part.len() {
        return invalid("group count differs from the partition");
    }
    if point.y.len() != part.rows || point.yy.dim() != part.rows {
        return invalid("(y, Y) does not match the partition's row count");
    }
    for (g, ((t_i, tt_i), beta)) in point.groups.iter().zip(&part.col_groups).enumerate() {
        if t_i.len() != beta.len() || tt_i.dim() != beta.len() {
            return invalid(format!("group {g} has the wrong dimension"));
        }
    }
    Ok(())
}

/// The easy direction: `t⁽ⁱ⁾ = t[β_i]`, `T⁽ⁱ⁾ = T[β_i]`.
pub fn restrict<T: Real>(point: &LiftedPoint<T>, part: &SeparablePartition<T>, y: &[T], yy: &SymMatrix<T>) -> Result<DecomposedPoint<T>> {
    let res = lifted_residuals(point, part, y, yy, None)?;
    if res.max() > INPUT_TOL * (1.0 + yy.max_abs().as_f64()) {
        return invalid(format!("lifted point violates its constraints ({res:?})"));
    }
    let groups = part
        .col_groups
        .iter()
        .map(|beta| (beta.iter().map(|&c| point.t[c]).collect(), point.tt.principal(beta)))
        .collect();
    Ok(DecomposedPoint { y: y.to_vec(), yy: yy.clone(), groups })
}

/// The constructive direction.
///
/// With `r = max(k, d)`: factor `Ỹ = [[1,yᵀ],[y,Y]] = ṼᵀṼ` with `r+1` rows,
/// `Ṽ = [v, V]`; factor each `T̃⁽ⁱ⁾ = Z̃⁽ⁱ⁾ᵀZ̃⁽ⁱ⁾`, `Z̃⁽ⁱ⁾ = [z_i, Z⁽ⁱ⁾]`; find
/// `U_i` with orthonormal columns and `[v, V[:, α_i]] = U_i Z̃⁽ⁱ⁾ P̃_iᵀ`,
/// `P̃_i = diag(1, P_i)`; then `[[1,tᵀ],[t,T]] = RᵀR` with
/// `R = [v, U₁Z⁽¹⁾, …, U_l Z⁽ˡ⁾]` (columns of group `i` placed at `β_i`).
///
/// A non-PSD input surfaces as `NotPsd` from the factorizations; a group
/// inconsistent with `(y, Y)` surfaces as `GramMismatch`.
pub fn lift<T: Real>(point: &DecomposedPoint<T>, part: &SeparablePartition<T>) -> Result<LiftedPoint<T>> {
    check_decomposed_shapes(point, part)?;
    let (k, d) = (part.rows, part.cols);
    let r1 = k.max(d) + 1;
    let v_tilde = gram_factor(&point.yy.bordered(T::one(), &point.y), r1)?;
    let mut big_r = Mat::zeros(r1, d + 1);
    for row in 0..r1 {
        big_r[(row, 0)] = v_tilde[(row, 0)];
    }
    for (g, (t_i, tt_i)) in point.groups.iter().enumerate() {
        let (alpha, beta, p_i) = (&part.row_groups[g], &part.col_groups[g], &part.blocks[g]);
        let di = beta.len();
        let z_tilde = gram_factor(&tt_i.bordered(T::one(), t_i), di + 1)?;
        // Z̃ P̃ᵀ = [z_i, Z P_iᵀ]
        let a = Mat::from_fn(di + 1, alpha.len() + 1, |row, col| {
            if col == 0 {
                z_tilde[(row, 0)]
            } else {
                (0..di).fold(T::zero(), |acc, c| acc + z_tilde[(row, 1 + c)] * p_i[(col - 1, c)])
            }
        });
        let b = Mat::from_fn(r1, alpha.len() + 1, |row, col| {
            if col == 0 {
                v_tilde[(row, 0)]
            } else {
                v_tilde[(row, 1 + alpha[col - 1])]
            }
        });
        let u = orthogonal_extension(&a, &b).map_err(|e| match e {
            Error::GramMismatch { .. } => e,
            other => Error::NumericalBreakdown(format!("group {g}: {other}")),
        })?;
        for (c, &col) in beta.iter().enumerate() {
            for row in 0..r1 {
                big_r[(row, 1 + col)] = (0..=di).fold(T::zero(), |acc, s| acc + u[(row, s)] * z_tilde[(s, 1 + c)]);
            }
        }
    }
    let full = SymMatrix::gram(&big_r);
    let (_, t, tt) = full.unborder();
    Ok(LiftedPoint { t, tt })
}

/// Largest `𝒜_i` violation over the groups of a decomposed point.
pub fn group_violation<T: Real, C: GroupConstraint<T> + ?Sized>(point: &DecomposedPoint<T>, sets: &C) -> T {
    point.groups.iter().enumerate().fold(T::zero(), |m, (g, (t, tt))| m.max(sets.violation(g, t, tt)))
}
