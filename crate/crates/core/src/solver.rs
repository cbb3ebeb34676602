//! Operator-splitting solver for `min cᵀu, Au = b, u ∈ K`.
//!
//! ADMM on the split `u ∈ {Au = b}` / `u ∈ K`:
//!
//! ```text
//! x ← Π_aff(z − w − c/ρ)
//! x̂ ← αx + (1 − α)z
//! z ← Π_K(x̂ + w)
//! w ← w + x̂ − z
//! ```
//!
//! The affine projection reuses one Cholesky factor of `AAᵀ` (rows scaled to
//! unit norm, `1e-12` ridge); it does not depend on `ρ`, so `ρ` is rebalanced
//! freely from the residual ratio. Dual estimates: `s = −ρw ∈ K` and `y`
//! the least-squares solution of `Aᵀy = c − s`.

use std::collections::VecDeque;
use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::linalg::{dot, eig_sym, eig_sym_ql, norm2, Cholesky, Mat, SymMatrix};
use crate::scalar::Real;
use crate::sdr::program::{smat_into, svec_from_slice, ConeKind, ConicProgram, SparseRow};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SolverConfig {
    pub max_iters: usize,
    pub eps_primal: f64,
    pub eps_dual: f64,
    pub eps_gap: f64,
    pub over_relaxation: f64,
    pub check_every: usize,
    /// Initial penalty; the cost is prescaled to unit max-norm first.
    pub rho: f64,
    pub adaptive_rho: bool,
    /// History length of the Anderson extrapolation; 0 disables it.
    pub anderson_memory: usize,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            max_iters: 50_000,
            eps_primal: 1e-9,
            eps_dual: 1e-9,
            eps_gap: 1e-9,
            over_relaxation: 1.5,
            check_every: 25,
            rho: 1.0,
            adaptive_rho: true,
            anderson_memory: 10,
        }
    }
}

impl SolverConfig {
    /// Same tolerance on all three residuals.
    pub fn with_eps(mut self, eps: f64) -> Self {
        self.eps_primal = eps;
        self.eps_dual = eps;
        self.eps_gap = eps;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.eps_primal > 0.0 && self.eps_dual > 0.0 && self.eps_gap > 0.0) {
            return invalid("solver tolerances must be positive");
        }
        if !(self.over_relaxation > 0.0 && self.over_relaxation < 2.0) {
            return invalid("over_relaxation must lie in (0, 2)");
        }
        if self.check_every == 0 || self.max_iters == 0 {
            return invalid("max_iters and check_every must be positive");
        }
        if !(self.rho > 0.0 && self.rho.is_finite()) {
            return invalid("rho must be positive");
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum SolveStatus {
    Solved,
    MaxIters,
    NumericalBreakdown,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Residuals {
    pub primal: f64,
    pub dual: f64,
    pub gap: f64,
}

#[derive(Debug, Clone)]
pub struct SolveResult<T> {
    pub status: SolveStatus,
    pub residuals: Residuals,
    /// Primal point, inside the cone.
    pub x: Vec<T>,
    /// Equality multipliers.
    pub y: Vec<T>,
    /// Dual slack, inside the cone.
    pub s: Vec<T>,
    pub objective: T,
    pub dual_objective: T,
    pub iterations: usize,
    pub rho: T,
}

/// Iterate state for warm starts (`z`, scaled dual `w`, and `ρ`).
#[derive(Debug, Clone)]
pub struct WarmStart<T> {
    pub z: Vec<T>,
    pub w: Vec<T>,
    pub rho: T,
}

/// Projection onto `{u : Āu = b̄}` with unit-norm rows.
struct AffineProjector<T> {
    rows: Vec<SparseRow<T>>,
    b: Vec<T>,
    chol: Cholesky<T>,
}

impl<T: Real> AffineProjector<T> {
    fn new(p: &ConicProgram<T>) -> Result<(Self, Vec<T>)> {
        let nv = p.num_vars();
        let mut rows = Vec::with_capacity(p.rows.len());
        let mut b = Vec::with_capacity(p.rows.len());
        let mut scale = Vec::with_capacity(p.rows.len());
        for (row, &rhs) in p.rows.iter().zip(&p.rhs) {
            if row.idx.iter().any(|&k| k >= nv) {
                return invalid("constraint row references a coordinate outside the program");
            }
            let nrm = row.norm();
            if nrm == T::zero() {
                return Err(Error::NumericalBreakdown("empty constraint row".into()));
            }
            rows.push(SparseRow { idx: row.idx.clone(), val: row.val.iter().map(|&a| a / nrm).collect() });
            b.push(rhs / nrm);
            scale.push(nrm);
        }
        let m = rows.len();
        // column lists for the Gram product
        let mut cols: Vec<Vec<(usize, T)>> = vec![Vec::new(); nv];
        for (r, row) in rows.iter().enumerate() {
            for (&k, &a) in row.idx.iter().zip(&row.val) {
                cols[k].push((r, a));
            }
        }
        let mut g = Mat::zeros(m, m);
        for col in &cols {
            for &(r1, a1) in col {
                for &(r2, a2) in col {
                    g[(r1, r2)] += a1 * a2;
                }
            }
        }
        for r in 0..m {
            g[(r, r)] += T::lit(1e-12);
        }
        let singular = || Error::NumericalBreakdown("normal equations are singular (dependent constraints)".into());
        let chol = Cholesky::factor(&g).map_err(|_| singular())?;
        // unit rows put every diagonal at 1; a collapsed pivot means dependence
        if chol.min_pivot() < T::lit(1e-5) {
            return Err(singular());
        }
        Ok((Self { rows, b, chol }, scale))
    }

    /// Multipliers `(ĀĀᵀ)⁻¹(Āv − shift·b̄)`.
    fn multipliers(&self, v: &[T], with_rhs: bool) -> Vec<T> {
        let mut r: Vec<T> = self
            .rows
            .iter()
            .zip(&self.b)
            .map(|(row, &b)| if with_rhs { row.dot(v) - b } else { row.dot(v) })
            .collect();
        self.chol.solve_in_place(&mut r);
        r
    }

    fn sub_adjoint(&self, v: &mut [T], y: &[T]) {
        for (row, &yk) in self.rows.iter().zip(y) {
            for (&k, &a) in row.idx.iter().zip(&row.val) {
                v[k] -= a * yk;
            }
        }
    }

    fn project(&self, v: &mut [T]) {
        let y = self.multipliers(v, true);
        self.sub_adjoint(v, &y);
    }
}

struct ConeProjector {
    /// (offset, dim) of each PSD block and (offset, len) of each orthant.
    psd: Vec<(usize, usize)>,
    nonneg: Vec<(usize, usize)>,
}

impl ConeProjector {
    fn new<T: Real>(p: &ConicProgram<T>) -> Self {
        let mut psd = Vec::new();
        let mut nonneg = Vec::new();
        for (b, off) in p.blocks.iter().zip(p.offsets()) {
            match b.kind {
                ConeKind::Psd => psd.push((off, b.dim)),
                ConeKind::Nonneg => nonneg.push((off, b.dim)),
            }
        }
        Self { psd, nonneg }
    }

    fn project<T: Real>(&self, u: &mut [T], buf: &mut Vec<T>) -> Result<()> {
        for &(off, len) in &self.nonneg {
            for x in &mut u[off..off + len] {
                if *x < T::zero() {
                    *x = T::zero();
                }
            }
        }
        for &(off, d) in &self.psd {
            let len = d * (d + 1) / 2;
            buf.resize(d * d, T::zero());
            smat_into(&u[off..off + len], d, buf);
            let a = SymMatrix::from_mat(Mat::from_vec(d, d, buf.clone())?)?;
            let eig = eig_sym_ql(&a)?;
            let positives = eig.values.iter().filter(|&&l| l > T::zero()).count();
            let proj = if positives * 2 <= d {
                eig.reconstruct_with(|l| l.max(T::zero()))
            } else {
                a.sub(&eig.reconstruct_with(|l| l.min(T::zero())))
            };
            svec_from_slice(proj.as_mat().as_slice(), d, &mut u[off..off + len]);
        }
        Ok(())
    }
}

/// Type-II Anderson acceleration of the fixed-point map `u ↦ F(u)`,
/// `u = (z, w)`.
struct Anderson<T> {
    memory: usize,
    /// Differences of successive `F(u)` and of successive residuals `F(u) − u`.
    df: VecDeque<Vec<T>>,
    dg: VecDeque<Vec<T>>,
    /// Inner products of the stored `dg` columns.
    gram: VecDeque<VecDeque<T>>,
    prev_f: Vec<T>,
    prev_g: Vec<T>,
    has_prev: bool,
    g: Vec<T>,
}

impl<T: Real> Anderson<T> {
    fn new(memory: usize, dim: usize) -> Self {
        let buf = if memory > 0 { dim } else { 0 };
        Self {
            memory,
            df: VecDeque::new(),
            dg: VecDeque::new(),
            gram: VecDeque::new(),
            prev_f: vec![T::zero(); buf],
            prev_g: vec![T::zero(); buf],
            has_prev: false,
            g: vec![T::zero(); buf],
        }
    }

    fn enabled(&self) -> bool {
        self.memory > 0
    }

    fn reset(&mut self) {
        self.df.clear();
        self.dg.clear();
        self.gram.clear();
        self.has_prev = false;
    }

    /// Records `(u, F(u))` and writes the extrapolated point into `out`;
    /// returns false when there is no history or the small solve fails.
    fn extrapolate(&mut self, u: &[T], f: &[T], out: &mut [T]) -> bool {
        for ((g, &fi), &ui) in self.g.iter_mut().zip(f).zip(u) {
            *g = fi - ui;
        }
        if self.has_prev {
            let (mut dfk, mut dgk) = if self.df.len() == self.memory {
                self.gram.pop_front();
                self.gram.iter_mut().for_each(|row| {
                    row.pop_front();
                });
                (self.df.pop_front().expect("nonempty"), self.dg.pop_front().expect("nonempty"))
            } else {
                (vec![T::zero(); f.len()], vec![T::zero(); f.len()])
            };
            for i in 0..f.len() {
                dfk[i] = f[i] - self.prev_f[i];
                dgk[i] = self.g[i] - self.prev_g[i];
            }
            let mut row: VecDeque<T> = self.dg.iter().map(|d| dot(d, &dgk)).collect();
            for (r, &v) in self.gram.iter_mut().zip(&row) {
                r.push_back(v);
            }
            row.push_back(dot(&dgk, &dgk));
            self.gram.push_back(row);
            self.df.push_back(dfk);
            self.dg.push_back(dgk);
        }
        self.prev_f.copy_from_slice(f);
        self.prev_g.copy_from_slice(&self.g);
        self.has_prev = true;
        let k = self.dg.len();
        if k == 0 {
            return false;
        }
        let scale = (0..k).fold(T::zero(), |m, a| m.max(self.gram[a][a]));
        if !(scale > T::zero()) {
            return false;
        }
        let mut gram = Mat::from_fn(k, k, |a, b| self.gram[a][b]);
        for a in 0..k {
            gram[(a, a)] += scale * T::lit(1e-10);
        }
        let Ok(chol) = Cholesky::factor(&gram) else {
            return false;
        };
        let mut gamma: Vec<T> = self.dg.iter().map(|d| dot(d, &self.g)).collect();
        chol.solve_in_place(&mut gamma);
        if gamma.iter().any(|v| !v.is_finite()) {
            return false;
        }
        out.copy_from_slice(f);
        for (&gm, d) in gamma.iter().zip(&self.df) {
            for (o, &di) in out.iter_mut().zip(d) {
                *o -= gm * di;
            }
        }
        true
    }
}

/// `ρ` is revisited every this many residual checks.
const RHO_UPDATE_CHECKS: usize = 4;
/// Frequent penalty changes stall ADMM, so adaptation stops after this many.
const MAX_RHO_UPDATES: usize = 50;
const RHO_BAND_LO: f64 = 0.5;
const RHO_BAND_HI: f64 = 2.0;

fn rel_diff<T: Real>(a: T, b: T) -> T {
    (a - b).abs() / (T::one() + a.abs() + b.abs())
}

pub fn solve<T: Real>(p: &ConicProgram<T>, cfg: &SolverConfig) -> Result<SolveResult<T>> {
    solve_from(p, cfg, None, None::<&mut std::io::Sink>)
}

/// Solves, optionally from a warm start, optionally writing a CSV trace
/// `iter,primal_res,dual_res,gap` at every residual check.
pub fn solve_from<T: Real, W: Write>(
    p: &ConicProgram<T>,
    cfg: &SolverConfig,
    warm: Option<&WarmStart<T>>,
    mut trace: Option<&mut W>,
) -> Result<SolveResult<T>> {
    cfg.validate()?;
    let nv = p.num_vars();
    if p.rhs.len() != p.rows.len() {
        return invalid("row and right-hand-side counts differ");
    }
    let (aff, row_scale) = AffineProjector::new(p)?;
    let cone = ConeProjector::new(p);

    let c_norm_inf = p.cost.iter().fold(T::zero(), |a, &x| a.max(x.abs()));
    let sigma = if c_norm_inf > T::zero() { c_norm_inf } else { T::one() };
    let c: Vec<T> = p.cost.iter().map(|&x| x / sigma).collect();
    let b_norm = norm2(&p.rhs);
    let c_norm = norm2(&p.cost);
    let alpha = T::lit(cfg.over_relaxation);
    let one_minus_alpha = T::one() - alpha;

    let (mut u, mut rho) = match warm {
        Some(ws) if ws.z.len() == nv && ws.w.len() == nv => ([ws.z.as_slice(), ws.w.as_slice()].concat(), ws.rho),
        Some(_) => return invalid("warm start has the wrong length"),
        None => (vec![T::zero(); 2 * nv], T::lit(cfg.rho)),
    };
    let mut f = vec![T::zero(); 2 * nv];
    let mut fallback = vec![T::zero(); 2 * nv];
    let mut ext = vec![T::zero(); 2 * nv];
    let mut x = vec![T::zero(); nv];
    let mut buf = Vec::new();
    let mut accel = Anderson::new(cfg.anderson_memory, 2 * nv);
    let mut accelerated = false;
    let mut ref_norm = T::zero();

    if let Some(tr) = trace.as_mut() {
        writeln!(tr, "iter,primal_res,dual_res,gap").map_err(|e| Error::InvalidInput(e.to_string()))?;
    }

    let mut result = None;
    let mut rho_updates = 0;
    for it in 1..=cfg.max_iters {
        {
            let (z, w) = u.split_at(nv);
            let (fz, fw) = f.split_at_mut(nv);
            let inv_rho = T::one() / rho;
            for i in 0..nv {
                x[i] = z[i] - w[i] - c[i] * inv_rho;
            }
            aff.project(&mut x);
            for i in 0..nv {
                let xh = alpha * x[i] + one_minus_alpha * z[i];
                x[i] = xh;
                fz[i] = xh + w[i];
            }
            cone.project(fz, &mut buf)?;
            for i in 0..nv {
                fw[i] = w[i] + x[i] - fz[i];
            }
        }

        if accel.enabled() {
            let g_norm = u.iter().zip(&f).map(|(&a, &b)| (b - a) * (b - a)).sum::<T>().sqrt();
            if accelerated && g_norm > ref_norm {
                // the extrapolated point made things worse: resume from the plain iterate
                accel.reset();
                accelerated = false;
                u.copy_from_slice(&fallback);
            } else {
                ref_norm = g_norm;
                accelerated = accel.extrapolate(&u, &f, &mut ext);
                if accelerated {
                    fallback.copy_from_slice(&f);
                    u.copy_from_slice(&ext);
                } else {
                    u.copy_from_slice(&f);
                }
            }
        } else {
            std::mem::swap(&mut u, &mut f);
        }

        if it % cfg.check_every != 0 && it != cfg.max_iters {
            continue;
        }
        // residuals are read from the plain iterate, which lies in the cone
        let plain = if accelerated { &fallback } else { &u };
        let (z, w) = plain.split_at(nv);
        let finite = plain.iter().all(|v| v.is_finite());
        let (res, y, s, pobj, dobj) = residuals(p, &aff, &c, sigma, z, w, rho, b_norm, c_norm);
        if let Some(tr) = trace.as_mut() {
            writeln!(tr, "{it},{:.16e},{:.16e},{:.16e}", res.primal, res.dual, res.gap)
                .map_err(|e| Error::InvalidInput(e.to_string()))?;
        }
        let status = if !finite || !(res.primal.is_finite() && res.dual.is_finite() && res.gap.is_finite()) {
            Some(SolveStatus::NumericalBreakdown)
        } else if res.primal <= cfg.eps_primal && res.dual <= cfg.eps_dual && res.gap <= cfg.eps_gap {
            Some(SolveStatus::Solved)
        } else if it == cfg.max_iters {
            Some(SolveStatus::MaxIters)
        } else {
            None
        };
        if let Some(status) = status {
            let y_orig: Vec<T> = y.iter().zip(&row_scale).map(|(&yk, &r)| yk / r).collect();
            result = Some(SolveResult {
                status,
                residuals: res,
                x: z.to_vec(),
                y: y_orig,
                s,
                objective: pobj,
                dual_objective: dobj,
                iterations: it,
                rho,
            });
            break;
        }
        if cfg.adaptive_rho && it % (RHO_UPDATE_CHECKS * cfg.check_every) == 0 && rho_updates < MAX_RHO_UPDATES {
            let ratio = (res.primal / cfg.eps_primal) / (res.dual / cfg.eps_dual).max(f64::MIN_POSITIVE);
            let factor = ratio.sqrt().clamp(0.1, 10.0);
            if !(RHO_BAND_LO..=RHO_BAND_HI).contains(&factor) {
                rho_updates += 1;
                // a large primal residual calls for a larger ρ
                let new_rho = rho * T::lit(factor);
                let k = rho / new_rho;
                if accelerated {
                    u.copy_from_slice(&fallback);
                }
                u[nv..].iter_mut().for_each(|v| *v *= k);
                accel.reset();
                accelerated = false;
                rho = new_rho;
            }
        }
    }
    Ok(result.expect("loop always terminates with a status"))
}

#[allow(clippy::too_many_arguments)]
fn residuals<T: Real>(
    p: &ConicProgram<T>,
    aff: &AffineProjector<T>,
    c: &[T],
    sigma: T,
    z: &[T],
    w: &[T],
    rho: T,
    b_norm: T,
    c_norm: T,
) -> (Residuals, Vec<T>, Vec<T>, T, T) {
    let prim: T = p
        .rows
        .iter()
        .zip(&p.rhs)
        .map(|(row, &b)| {
            let r = row.dot(z) - b;
            r * r
        })
        .sum::<T>()
        .sqrt();
    let s_scaled: Vec<T> = w.iter().map(|&v| -rho * v).collect();
    let mut r: Vec<T> = c.iter().zip(&s_scaled).map(|(&ci, &si)| ci - si).collect();
    let y = aff.multipliers(&r, false);
    aff.sub_adjoint(&mut r, &y);
    let dual = norm2(&r) * sigma;
    let pobj = p.objective(z);
    let dobj = aff.b.iter().zip(&y).fold(T::zero(), |acc, (&b, &yk)| acc + b * yk) * sigma;
    let y_out: Vec<T> = y.iter().map(|&v| v * sigma).collect();
    let s: Vec<T> = s_scaled.iter().map(|&v| v * sigma).collect();
    let res = Residuals {
        primal: (prim / (T::one() + b_norm)).as_f64(),
        dual: (dual / (T::one() + c_norm)).as_f64(),
        gap: rel_diff(pobj, dobj).as_f64(),
    };
    (res, y_out, s, pobj, dobj)
}

/// Number of eigenvalues above `rel_tol·λ_max`.
pub fn rank_of_block<T: Real>(block: &SymMatrix<T>, rel_tol: T) -> Result<usize> {
    if block.dim() == 0 {
        return Ok(0);
    }
    let eig = eig_sym(block)?;
    let top = eig.max();
    if top <= T::zero() {
        return Ok(0);
    }
    Ok(eig.values.iter().filter(|&&l| l > rel_tol * top).count())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sdr::program::{ConeBlock, ProgramMetadata, SdrKind};

    fn meta() -> ProgramMetadata {
        ProgramMetadata {
            sdr_kind: SdrKind::Csdr,
            m: 0,
            n: 0,
            order: 2,
            matrix_block: 0,
            x_re: vec![],
            x_im: vec![],
            y: vec![],
            t: vec![],
        }
    }

    fn row(idx: &[usize], val: &[f64]) -> SparseRow<f64> {
        SparseRow { idx: idx.to_vec(), val: val.to_vec() }
    }

    /// min ⟨I, X⟩ s.t. X₁₁ = 1, X ⪰ 0 (2×2).
    fn trace_program() -> ConicProgram<f64> {
        ConicProgram {
            blocks: vec![ConeBlock { kind: ConeKind::Psd, dim: 2 }],
            cost: vec![1.0, 0.0, 1.0],
            rows: vec![row(&[0], &[1.0])],
            rhs: vec![1.0],
            metadata: meta(),
        }
    }

    #[test]
    fn trace_minimization() {
        let p = trace_program();
        let r = solve(&p, &SolverConfig::default()).unwrap();
        assert_eq!(r.status, SolveStatus::Solved);
        assert!((r.objective - 1.0).abs() < 1e-7);
        assert!((r.x[0] - 1.0).abs() < 1e-7 && r.x[1].abs() < 1e-7 && r.x[2].abs() < 1e-7);
    }

    #[test]
    fn max_iters_reports_residuals() {
        let p = trace_program();
        let cfg = SolverConfig { max_iters: 1, ..Default::default() };
        let r = solve(&p, &cfg).unwrap();
        assert_eq!(r.status, SolveStatus::MaxIters);
        assert_eq!(r.iterations, 1);
        assert!(r.residuals.primal.is_finite());
    }

    #[test]
    fn deterministic_iterates() {
        let p = trace_program();
        let cfg = SolverConfig { max_iters: 40, ..Default::default() };
        let a = solve(&p, &cfg).unwrap();
        let b = solve(&p, &cfg).unwrap();
        assert_eq!(a.x, b.x);
        assert_eq!(a.y, b.y);
    }

    #[test]
    fn trace_output_has_header_and_rows() {
        let p = trace_program();
        let cfg = SolverConfig { max_iters: 100, check_every: 10, ..Default::default() };
        let mut out = Vec::new();
        solve_from(&p, &cfg, None, Some(&mut out)).unwrap();
        let text = String::from_utf8(out).unwrap();
        let mut lines = text.lines();
        assert_eq!(lines.next(), Some("iter,primal_res,dual_res,gap"));
        assert!(lines.next().unwrap().starts_with("10,"));
    }

    #[test]
    fn bad_config_rejected() {
        let p = trace_program();
        let cfg = SolverConfig { over_relaxation: 2.0, ..Default::default() };
        assert!(solve(&p, &cfg).is_err());
    }

    #[test]
    fn dependent_rows_break_down() {
        let p = ConicProgram {
            blocks: vec![ConeBlock { kind: ConeKind::Nonneg, dim: 2 }],
            cost: vec![1.0, 1.0],
            rows: vec![row(&[0], &[1.0]), row(&[0], &[2.0])],
            rhs: vec![1.0, 2.0],
            metadata: meta(),
        };
        assert!(matches!(solve(&p, &SolverConfig::default()), Err(Error::NumericalBreakdown(_))));
    }

    /// Hand-built programs with closed-form optima.
    fn micro_library() -> Vec<(&'static str, ConicProgram<f64>, f64)> {
        let r2 = 2f64.sqrt();
        let psd = |dim| ConeBlock { kind: ConeKind::Psd, dim };
        let mk = |blocks, cost, rows, rhs| ConicProgram { blocks, cost, rows, rhs, metadata: meta() };
        vec![
            ("trace", trace_program(), 1.0),
            (
                // λ_min of [[2,1],[1,3]]
                "min eigenvalue",
                mk(vec![psd(2)], vec![2.0, r2, 3.0], vec![row(&[0, 2], &[1.0, 1.0])], vec![1.0]),
                (5.0 - 5f64.sqrt()) / 2.0,
            ),
            (
                // max-cut relaxation on a triangle: 1ᵀX1 ≥ 0 forces Σ_{i<j} X_ij ≥ −3/2
                "triangle cut",
                mk(
                    vec![psd(3)],
                    vec![0.0, r2, r2, 0.0, r2, 0.0],
                    vec![row(&[0], &[1.0]), row(&[3], &[1.0]), row(&[5], &[1.0])],
                    vec![1.0; 3],
                ),
                -3.0,
            ),
            (
                "linear program",
                mk(vec![ConeBlock { kind: ConeKind::Nonneg, dim: 2 }], vec![1.0, 2.0], vec![row(&[0, 1], &[1.0, 1.0])], vec![1.0]),
                1.0,
            ),
            (
                // X₁₁ = X₁₂ = 1 forces X₂₂ ≥ 1; s = X₂₂ + 1; cost X₂₂ + s/2
                "mixed cones",
                mk(
                    vec![psd(2), ConeBlock { kind: ConeKind::Nonneg, dim: 1 }],
                    vec![0.0, 0.0, 1.0, 0.5],
                    vec![row(&[0], &[1.0]), row(&[1], &[1.0 / r2]), row(&[3, 2], &[1.0, -1.0])],
                    vec![1.0, 1.0, 1.0],
                ),
                2.0,
            ),
        ]
    }

    #[test]
    fn micro_sdps_match_analytic_optima() {
        let cfg = SolverConfig::default();
        for (name, p, opt) in micro_library() {
            let r = solve(&p, &cfg).unwrap();
            assert_eq!(r.status, SolveStatus::Solved, "{name}");
            assert!((r.objective - opt).abs() <= 1e-7 * opt.abs().max(1.0), "{name}: {} vs {opt}", r.objective);
            assert!(r.objective >= r.dual_objective - 10.0 * cfg.eps_gap * (1.0 + r.objective.abs()), "{name}");
            assert!(p.eq_residual_inf(&r.x) < 1e-7, "{name}");
            assert!(p.cone_violation(&r.x).unwrap() < 1e-9, "{name}");
        }
    }

    #[test]
    fn scalar_csdr_optimum() {
        use crate::model::{derive_problem, MimoInstance, C};
        let inst = MimoInstance::<f64>::new(1, 1, 4, vec![C::new(1.0, 0.0)], vec![C::new(0.0, 0.0)], vec![0], 20.0).unwrap();
        let pd = derive_problem(&inst);
        let p = crate::sdr::build_csdr(&pd, &inst);
        let r = solve(&p, &SolverConfig::default()).unwrap();
        assert_eq!(r.status, SolveStatus::Solved);
        assert!((r.objective + 1.0).abs() < 1e-7, "{}", r.objective);
    }

    #[test]
    fn acceleration_off_agrees() {
        for (name, p, opt) in micro_library() {
            let cfg = SolverConfig { anderson_memory: 0, adaptive_rho: false, ..Default::default() };
            let r = solve(&p, &cfg).unwrap();
            assert!((r.objective - opt).abs() <= 1e-7 * opt.abs().max(1.0), "{name}");
        }
    }

    #[test]
    fn ranks() {
        assert_eq!(rank_of_block(&SymMatrix::<f64>::identity(3), 1e-6).unwrap(), 3);
        assert_eq!(rank_of_block(&SymMatrix::<f64>::zeros(3), 1e-6).unwrap(), 0);
        assert_eq!(rank_of_block(&SymMatrix::outer(&[1.0, 2.0, -1.0]), 1e-6).unwrap(), 1);
    }
}
