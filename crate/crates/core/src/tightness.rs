//! Closed-form tightness certificates for the PSK relaxations.
//!
//! With `z_i = (x*_i)^{-1}(H†v)_i`:
//! - ESDR-X is tight if `λ_min(Q)·sin(π/M) > ‖H†v‖_∞`, and tight exactly when
//!   `Q + Diag(Re z) − cot(π/M)·Diag(|Im z|) ⪰ 0`.
//! - ESDR-Y can only be tight when the same matrix with `cot(2π/M)` is PSD.
//! - ESDR1-T can only be tight when `Re z_i ≥ 0` for every `i`.

use num_complex::Complex;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::linalg::{herm_to_real, is_psd, min_eig, min_eig_herm, HermMatrix, Mat, SymMatrix};
use crate::model::{compute_z, MimoInstance, ProblemData};
use crate::scalar::Real;

/// Relative tolerance of every PSD test in this module.
pub const CERT_PSD_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TightnessReport {
    pub esdrx_sufficient: bool,
    pub esdrx_tight: bool,
    pub esdry_necessary: bool,
    pub esdr1_necessary: bool,
    pub min_eig_esdrx: f64,
    pub min_eig_esdry: f64,
}

/// Dual multipliers. ESDR-X uses `lambda` of length `n` and no `mu`; ESDR-Y
/// uses `lambda` of length `2n` and `mu` of length `n`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DualCertificate<T> {
    pub lambda: Vec<T>,
    pub mu: Vec<T>,
}

/// One ESDR-Y dual inequality
/// `a·λ_i + b·λ_{n+i} + c·μ_i ≤ rhs` for antenna `i` and symbol `j ≠ u_i`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EsdryInequality<T> {
    pub i: usize,
    pub j: usize,
    pub coeff_lambda_i: T,
    pub coeff_lambda_n_i: T,
    pub coeff_mu_i: T,
    pub rhs: T,
}

impl<T: Real> EsdryInequality<T> {
    pub fn lhs(&self, cert: &DualCertificate<T>, n: usize) -> T {
        self.coeff_lambda_i * cert.lambda[self.i]
            + self.coeff_lambda_n_i * cert.lambda[n + self.i]
            + self.coeff_mu_i * cert.mu[self.i]
    }
}

fn require_order_4(order: usize) -> Result<()> {
    if order < 4 {
        return Err(Error::Unsupported(format!("condition requires M >= 4, got M={order}")));
    }
    Ok(())
}

/// `λ_min(H†H)·sin(π/M) > ‖H†v‖_∞`, strict, no tolerance.
pub fn check_esdrx_sufficient<T: Real>(pd: &ProblemData<T>, inst: &MimoInstance<T>) -> Result<bool> {
    require_order_4(pd.order)?;
    let lmin = min_eig_herm(&pd.q)?;
    let g = inst.h_adj_v();
    let rhs = g.iter().map(|z| z.norm()).fold(T::zero(), T::max);
    let lhs = lmin * (T::PI() / T::from_count(pd.order)).sin();
    Ok(lhs - rhs > T::zero())
}

/// `Q + Diag(Re z) − κ·Diag(|Im z|)` in its real embedding.
fn shifted_embedding<T: Real>(q: &HermMatrix<T>, z: &[Complex<T>], kappa: T) -> SymMatrix<T> {
    let shift: Vec<T> = z.iter().map(|zi| zi.re - kappa * zi.im.abs()).collect();
    herm_to_real(&q.add_real_diag(&shift))
}

fn psd_verdict<T: Real>(a: &SymMatrix<T>) -> Result<(bool, T)> {
    let lmin = min_eig(a)?;
    let ok = is_psd(a, T::lit(CERT_PSD_TOL))?;
    Ok((ok, lmin))
}

fn cot<T: Real>(x: T) -> T {
    x.cos() / x.sin()
}

/// `Q + Diag(Re z) − cot(π/M)·Diag(|Im z|) ⪰ 0`; also returns the minimum
/// eigenvalue.
pub fn check_esdrx_tight<T: Real>(pd: &ProblemData<T>, z: &[Complex<T>], order: usize) -> Result<(bool, T)> {
    require_order_4(order)?;
    let kappa = cot(T::PI() / T::from_count(order));
    psd_verdict(&shifted_embedding(&pd.q, z, kappa))
}

/// As [`check_esdrx_tight`] with `cot(2π/M)`.
pub fn check_esdry_necessary<T: Real>(pd: &ProblemData<T>, z: &[Complex<T>], order: usize) -> Result<(bool, T)> {
    require_order_4(order)?;
    let kappa = if order == 4 { T::zero() } else { cot(T::TAU() / T::from_count(order)) };
    psd_verdict(&shifted_embedding(&pd.q, z, kappa))
}

/// Real binary case: `HᵀH + Diag(x*)^{-1}·Diag(Hᵀv) ⪰ 0`.
pub fn check_condition_real_binary<T: Real>(h: &Mat<T>, v: &[T], xstar: &[T]) -> Result<bool> {
    if v.len() != h.rows() || xstar.len() != h.cols() {
        return invalid("dimension mismatch in real binary condition");
    }
    if xstar.iter().any(|&x| x != T::one() && x != -T::one()) {
        return invalid("x* entries must be +1 or -1");
    }
    let htv = h.tr_mul_vec(v);
    let shift: Vec<T> = htv.iter().zip(xstar).map(|(&g, &x)| g * x).collect();
    let a = SymMatrix::gram(h).add_diag(&shift);
    is_psd(&a, T::lit(CERT_PSD_TOL))
}

/// `Re z_i ≥ 0` for all `i`.
pub fn check_esdr1_necessary<T: Real>(z: &[Complex<T>]) -> bool {
    z.iter().all(|zi| zi.re >= T::zero())
}

/// Extreme feasible ESDR-X multipliers `λ_i = Re z_i − |Im z_i|·cot(π/M)`.
pub fn esdrx_dual_from_z<T: Real>(z: &[Complex<T>], order: usize) -> DualCertificate<T> {
    let kappa = cot(T::PI() / T::from_count(order));
    DualCertificate { lambda: z.iter().map(|zi| zi.re - zi.im.abs() * kappa).collect(), mu: Vec::new() }
}

/// The `n(M−1)` linear inequalities on `(λ, μ)` from the ESDR-Y optimality
/// conditions at the transmitted point.
pub fn esdry_inequality_coeffs<T: Real>(inst: &MimoInstance<T>, z: &[Complex<T>]) -> Result<Vec<EsdryInequality<T>>> {
    let order = inst.order();
    if z.len() != inst.n {
        return invalid(format!("z has length {}, expected {}", z.len(), inst.n));
    }
    let two = T::lit(2.0);
    let mut out = Vec::with_capacity(inst.n * (order - 1));
    for (i, (&u, zi)) in inst.ustar.iter().zip(z).enumerate() {
        let theta_u = inst.symbols.phase(u);
        for j in 0..order {
            if j == u {
                continue;
            }
            let steps = (j + order - u) % order;
            let dtheta = T::TAU() * T::from_count(steps) / T::from_count(order);
            let phi = theta_u + dtheta / two;
            let (s, c) = phi.sin_cos();
            // cot(π/2) would otherwise come out as ~6e-17
            let cot_half = if 2 * steps == order { T::zero() } else { cot(dtheta / two) };
            out.push(EsdryInequality {
                i,
                j,
                coeff_lambda_i: s * s,
                coeff_lambda_n_i: c * c,
                coeff_mu_i: -(two * theta_u + dtheta).sin(),
                rhs: zi.re - cot_half * zi.im,
            });
        }
    }
    Ok(out)
}

/// `Q̂ + Diag(λ) + [[0, Diag μ], [Diag μ, 0]]`.
pub fn esdry_dual_matrix<T: Real>(pd: &ProblemData<T>, cert: &DualCertificate<T>) -> Result<SymMatrix<T>> {
    let n = pd.n;
    if cert.lambda.len() != 2 * n || cert.mu.len() != n {
        return invalid(format!(
            "ESDR-Y certificate needs 2n={} lambdas and n={} mus, got {} and {}",
            2 * n,
            n,
            cert.lambda.len(),
            cert.mu.len()
        ));
    }
    let mut m = pd.qhat.add_diag(&cert.lambda).into_mat();
    for i in 0..n {
        m[(i, n + i)] += cert.mu[i];
        m[(n + i, i)] += cert.mu[i];
    }
    SymMatrix::from_mat(m)
}

/// Validates a supplied ESDR-Y certificate: every inequality within `1e-9`
/// and the dual matrix PSD at the module tolerance.
pub fn esdry_certificate_check<T: Real>(
    pd: &ProblemData<T>,
    cert: &DualCertificate<T>,
    ineqs: &[EsdryInequality<T>],
) -> Result<bool> {
    let dual = esdry_dual_matrix(pd, cert)?;
    if let Some(bad) = ineqs.iter().find(|q| q.i >= pd.n) {
        return invalid(format!("inequality refers to antenna {} but n={}", bad.i, pd.n));
    }
    let tol = T::lit(CERT_PSD_TOL);
    let ineq_ok = ineqs.iter().all(|q| q.lhs(cert, pd.n) <= q.rhs + tol * (T::one() + q.rhs.abs()));
    if !ineq_ok {
        return Ok(false);
    }
    is_psd(&dual, tol)
}

/// `(2/M)^n` for `M ≥ 4`, `(1/2)^n` for `M = 2`.
pub fn tightness_probability_bound(order: usize, n: usize) -> f64 {
    let base = if order <= 2 { 0.5 } else { 2.0 / order as f64 };
    base.powi(n as i32)
}

/// Evaluates every certificate on one instance (requires `M ≥ 4`).
pub fn evaluate_report<T: Real>(inst: &MimoInstance<T>, pd: &ProblemData<T>) -> Result<TightnessReport> {
    let z = compute_z(inst);
    let order = inst.order();
    let sufficient = check_esdrx_sufficient(pd, inst)?;
    let (tight_x, eig_x) = check_esdrx_tight(pd, &z, order)?;
    let (necessary_y, eig_y) = check_esdry_necessary(pd, &z, order)?;
    Ok(TightnessReport {
        esdrx_sufficient: sufficient,
        esdrx_tight: tight_x,
        esdry_necessary: necessary_y,
        esdr1_necessary: check_esdr1_necessary(&z),
        min_eig_esdrx: eig_x.as_f64(),
        min_eig_esdry: eig_y.as_f64(),
    })
}
