//! Channel model `r = Hx* + v` over M-PSK and the derived problem matrices.
//!
//! Symbol indices are 0-based throughout the code (`s_0 = 1`).

use num_complex::Complex;
use rand::Rng;
use rand_distr::{Distribution, StandardNormal, Uniform};

use crate::error::{invalid, Result};
use crate::linalg::{herm_to_real, HermMatrix, Mat, SymMatrix};
use crate::scalar::Real;

pub type C<T> = Complex<T>;

/// The M-PSK constellation `s_j = exp(i 2πj / M)`, `j = 0..M`.
#[derive(Debug, Clone, PartialEq)]
pub struct SymbolSet<T> {
    order: usize,
    symbols: Vec<C<T>>,
}

impl<T: Real> SymbolSet<T> {
    pub fn order(&self) -> usize {
        self.order
    }

    pub fn symbols(&self) -> &[C<T>] {
        &self.symbols
    }

    pub fn get(&self, j: usize) -> C<T> {
        self.symbols[j]
    }

    pub fn s_re(&self) -> Vec<T> {
        self.symbols.iter().map(|s| s.re).collect()
    }

    pub fn s_im(&self) -> Vec<T> {
        self.symbols.iter().map(|s| s.im).collect()
    }

    pub fn phase(&self, j: usize) -> T {
        T::TAU() * T::from_count(j) / T::from_count(self.order)
    }
}

pub fn is_power_of_two(m: usize) -> bool {
    m >= 2 && m.is_power_of_two()
}

/// Builds the M-PSK set. Multiples of π/4 are exact, and the second half of
/// the constellation is the exact negation of the first.
pub fn make_symbol_set<T: Real>(order: usize) -> Result<SymbolSet<T>> {
    if !is_power_of_two(order) {
        return invalid(format!("M must be a power of two >= 2, got {order}"));
    }
    let half = order / 2;
    let mut symbols = Vec::with_capacity(order);
    for j in 0..half {
        symbols.push(unit_root::<T>(j, order));
    }
    for j in 0..half {
        symbols.push(-symbols[j]);
    }
    Ok(SymbolSet { order, symbols })
}

fn unit_root<T: Real>(j: usize, order: usize) -> C<T> {
    let (zero, one) = (T::zero(), T::one());
    if (4 * j) % order == 0 {
        return match (4 * j / order) % 4 {
            0 => C::new(one, zero),
            1 => C::new(zero, one),
            2 => C::new(-one, zero),
            _ => C::new(zero, -one),
        };
    }
    if (8 * j) % order == 0 {
        let h = T::FRAC_1_SQRT_2();
        return match (8 * j / order) % 8 {
            1 => C::new(h, h),
            3 => C::new(-h, h),
            5 => C::new(-h, -h),
            _ => C::new(h, -h),
        };
    }
    let theta = T::TAU() * T::from_count(j) / T::from_count(order);
    C::new(theta.cos(), theta.sin())
}

/// One realization of the channel. `h` is `m×n` row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct MimoInstance<T> {
    pub m: usize,
    pub n: usize,
    pub symbols: SymbolSet<T>,
    pub h: Vec<C<T>>,
    pub v: Vec<C<T>>,
    pub ustar: Vec<usize>,
    pub xstar: Vec<C<T>>,
    pub r: Vec<C<T>>,
    pub snr_db: T,
    pub sigma2: T,
    pub seed: Option<u64>,
}

pub fn sigma2_from_snr_db<T: Real>(snr_db: T) -> T {
    T::lit(10.0).powf(-snr_db / T::lit(10.0))
}

impl<T: Real> MimoInstance<T> {
    /// Assembles an instance from explicit data; `r` is computed as `Hx* + v`.
    pub fn new(m: usize, n: usize, order: usize, h: Vec<C<T>>, v: Vec<C<T>>, ustar: Vec<usize>, snr_db: T) -> Result<Self> {
        if m == 0 || n == 0 {
            return invalid("m and n must be positive");
        }
        if h.len() != m * n || v.len() != m || ustar.len() != n {
            return invalid(format!(
                "shape mismatch: H has {} entries (want {}), v has {} (want {m}), ustar has {} (want {n})",
                h.len(),
                m * n,
                v.len(),
                ustar.len()
            ));
        }
        let symbols = make_symbol_set::<T>(order)?;
        if let Some(&bad) = ustar.iter().find(|&&u| u >= order) {
            return invalid(format!("symbol index {bad} out of range for M={order}"));
        }
        let xstar: Vec<C<T>> = ustar.iter().map(|&u| symbols.get(u)).collect();
        let mut r = mat_vec(&h, m, n, &xstar);
        for (ri, vi) in r.iter_mut().zip(&v) {
            *ri = *ri + *vi;
        }
        Ok(Self { m, n, symbols, h, v, ustar, xstar, r, snr_db, sigma2: sigma2_from_snr_db(snr_db), seed: None })
    }

    pub fn order(&self) -> usize {
        self.symbols.order()
    }

    pub fn h_at(&self, i: usize, j: usize) -> C<T> {
        self.h[i * self.n + j]
    }

    /// `H†v`.
    pub fn h_adj_v(&self) -> Vec<C<T>> {
        adj_mat_vec(&self.h, self.m, self.n, &self.v)
    }

    pub fn r_norm2(&self) -> T {
        self.r.iter().map(|z| z.norm_sqr()).sum()
    }
}

fn mat_vec<T: Real>(h: &[C<T>], m: usize, n: usize, x: &[C<T>]) -> Vec<C<T>> {
    (0..m)
        .map(|i| (0..n).fold(C::new(T::zero(), T::zero()), |acc, j| acc + h[i * n + j] * x[j]))
        .collect()
}

fn adj_mat_vec<T: Real>(h: &[C<T>], m: usize, n: usize, y: &[C<T>]) -> Vec<C<T>> {
    (0..n)
        .map(|j| (0..m).fold(C::new(T::zero(), T::zero()), |acc, i| acc + h[i * n + j].conj() * y[i]))
        .collect()
}

fn complex_gaussian<T: Real, R: Rng + ?Sized>(rng: &mut R, variance: f64) -> C<T> {
    let s = (variance / 2.0).sqrt();
    let re: f64 = StandardNormal.sample(rng);
    let im: f64 = StandardNormal.sample(rng);
    C::new(T::lit(s * re), T::lit(s * im))
}

/// Draws `H ~ CN(0,1)` entrywise, `x*` uniform over the constellation and
/// `v ~ CN(0, σ²)` with `σ² = 10^(−snr_db/10)`, in that order.
pub fn sample_instance<T: Real, R: Rng + ?Sized>(m: usize, n: usize, order: usize, snr_db: T, rng: &mut R) -> Result<MimoInstance<T>> {
    if m == 0 || n == 0 {
        return invalid("m and n must be positive");
    }
    if !is_power_of_two(order) {
        return invalid(format!("M must be a power of two >= 2, got {order}"));
    }
    let h: Vec<C<T>> = (0..m * n).map(|_| complex_gaussian(rng, 1.0)).collect();
    let pick = Uniform::new(0, order).expect("nonempty range");
    let ustar: Vec<usize> = (0..n).map(|_| pick.sample(rng)).collect();
    let sigma2 = sigma2_from_snr_db(snr_db.as_f64());
    let v: Vec<C<T>> = (0..m).map(|_| complex_gaussian(rng, sigma2)).collect();
    MimoInstance::new(m, n, order, h, v, ustar, snr_db)
}

/// Every matrix and vector derived from an instance.
///
/// Layouts: `ŷ = [Re x; Im x]`; `t` stacks the per-antenna weight vectors,
/// `t[i*M + j]` being the weight of symbol `j` at antenna `i`.
#[derive(Debug, Clone)]
pub struct ProblemData<T> {
    pub n: usize,
    pub order: usize,
    /// `H†H`
    pub q: HermMatrix<T>,
    /// `−H†r`
    pub c: Vec<C<T>>,
    pub qhat: SymMatrix<T>,
    pub chat: Vec<T>,
    /// `2n × Mn`
    pub shat: Mat<T>,
    pub qbar: SymMatrix<T>,
    pub cbar: Vec<T>,
    /// `[1, s_R, s_I]ᵀ[1, s_R, s_I]` per symbol
    pub k: Vec<SymMatrix<T>>,
    /// `2m × 2n` real embedding of `H`
    pub hhat: Mat<T>,
    pub vhat: Vec<T>,
    /// `r†r`, the constant dropped from every relaxation objective
    pub r_norm2: T,
    pub symbols: SymbolSet<T>,
}

impl<T: Real> ProblemData<T> {
    pub fn dim_t(&self) -> usize {
        self.n * self.order
    }

    /// `t` index of symbol `j` at antenna `i`.
    pub fn t_index(&self, i: usize, j: usize) -> usize {
        i * self.order + j
    }

    /// `Ŝ t`.
    pub fn shat_times(&self, t: &[T]) -> Vec<T> {
        self.shat.mul_vec(t)
    }
}

/// Builds `Ŝ` for `n` antennas.
pub fn shat_matrix<T: Real>(symbols: &SymbolSet<T>, n: usize) -> Mat<T> {
    let mm = symbols.order();
    let mut s = Mat::zeros(2 * n, mm * n);
    for i in 0..n {
        for j in 0..mm {
            let z = symbols.get(j);
            s[(i, i * mm + j)] = z.re;
            s[(n + i, i * mm + j)] = z.im;
        }
    }
    s
}

pub fn k_matrix<T: Real>(s: C<T>) -> SymMatrix<T> {
    SymMatrix::outer(&[T::one(), s.re, s.im])
}

pub fn derive_problem<T: Real>(inst: &MimoInstance<T>) -> ProblemData<T> {
    let (m, n) = (inst.m, inst.n);
    let q = HermMatrix::gram(&inst.h, m, n);
    let c: Vec<C<T>> = adj_mat_vec(&inst.h, m, n, &inst.r).into_iter().map(|z| -z).collect();
    let qhat = herm_to_real(&q);
    let chat: Vec<T> = c.iter().map(|z| z.re).chain(c.iter().map(|z| z.im)).collect();
    let shat = shat_matrix(&inst.symbols, n);
    let qbar = SymMatrix::from_mat(shat.tr_matmul(&qhat.as_mat().matmul(&shat))).expect("square");
    let cbar = shat.tr_mul_vec(&chat);
    let k = inst.symbols.symbols().iter().map(|&s| k_matrix(s)).collect();
    let hhat = Mat::from_fn(2 * m, 2 * n, |i, j| {
        let z = inst.h_at(i % m, j % n);
        match (i < m, j < n) {
            (true, true) | (false, false) => z.re,
            (true, false) => -z.im,
            (false, true) => z.im,
        }
    });
    let vhat = inst.v.iter().map(|z| z.re).chain(inst.v.iter().map(|z| z.im)).collect();
    ProblemData {
        n,
        order: inst.order(),
        q,
        c,
        qhat,
        chat,
        shat,
        qbar,
        cbar,
        k,
        hhat,
        vhat,
        r_norm2: inst.r_norm2(),
        symbols: inst.symbols.clone(),
    }
}

/// `z_i = (x*_i)^{-1} (H†v)_i`.
pub fn compute_z<T: Real>(inst: &MimoInstance<T>) -> Vec<C<T>> {
    inst.h_adj_v().into_iter().zip(&inst.xstar).map(|(g, x)| x.conj() * g).collect()
}

/// `‖Hx − r‖²`.
pub fn ml_objective<T: Real>(inst: &MimoInstance<T>, x: &[C<T>]) -> T {
    mat_vec(&inst.h, inst.m, inst.n, x).iter().zip(&inst.r).map(|(a, b)| (a - b).norm_sqr()).sum()
}

/// Rounds each entry to its nearest constellation point; ties go to the
/// smaller index.
pub fn nearest_symbols<T: Real>(x: &[C<T>], symbols: &SymbolSet<T>) -> (Vec<C<T>>, Vec<usize>) {
    let idx: Vec<usize> = x
        .iter()
        .map(|xi| {
            let mut best = 0;
            let mut best_d = (xi - symbols.get(0)).norm_sqr();
            for j in 1..symbols.order() {
                let d = (xi - symbols.get(j)).norm_sqr();
                if d < best_d {
                    best = j;
                    best_d = d;
                }
            }
            best
        })
        .collect();
    (idx.iter().map(|&j| symbols.get(j)).collect(), idx)
}

/// Stacked one-hot encoding of symbol indices.
pub fn one_hot<T: Real>(indices: &[usize], order: usize) -> Vec<T> {
    let mut t = vec![T::zero(); indices.len() * order];
    for (i, &u) in indices.iter().enumerate() {
        t[i * order + u] = T::one();
    }
    t
}
