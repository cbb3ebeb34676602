//! The five relaxations as standard-form conic programs.

use num_complex::Complex;

use crate::error::{invalid, Result};
use crate::linalg::{herm_to_real, HermMatrix, SymMatrix};
use crate::model::{one_hot, MimoInstance, ProblemData};
use crate::scalar::Real;
use crate::sdr::program::{BlockValue, ConeKind, ConicProgram, ProgramBuilder, ProgramMetadata, SdrKind, VarRef};

fn psd(block: usize, i: usize, j: usize) -> VarRef {
    VarRef::Psd { block, i, j }
}

fn nn(block: usize, k: usize) -> VarRef {
    VarRef::Nonneg { block, k }
}

pub fn build<T: Real>(kind: SdrKind, pd: &ProblemData<T>, inst: &MimoInstance<T>) -> ConicProgram<T> {
    match kind {
        SdrKind::Csdr => build_csdr(pd, inst),
        SdrKind::EsdrX => build_esdr_x(pd, inst),
        SdrKind::EsdrY => build_esdr_y(pd, inst),
        SdrKind::Esdr1T => build_esdr1_t(pd, inst),
        SdrKind::Esdr2T => build_esdr2_t(pd, inst),
    }
}

/// `[[0, c†], [c, Q]]`.
fn complex_cost<T: Real>(pd: &ProblemData<T>) -> HermMatrix<T> {
    let n = pd.n;
    let zero = Complex::new(T::zero(), T::zero());
    HermMatrix::from_fn(n + 1, |a, b| match (a, b) {
        (0, 0) => zero,
        (0, j) => pd.c[j - 1].conj(),
        (i, 0) => pd.c[i - 1],
        (i, j) => pd.q.get(i - 1, j - 1),
    })
}

/// The Hermitian block `[[1, x†], [x, X]]` as a real PSD block of size
/// `2(n+1)` with the equalities that keep it a real embedding.
fn complex_block<T: Real>(b: &mut ProgramBuilder<T>, pd: &ProblemData<T>) -> usize {
    let n1 = pd.n + 1;
    let blk = b.add_block(ConeKind::Psd, 2 * n1);
    let one = T::one();
    // ⟨emb(C), emb(Z)⟩ = 2 Re⟨C, Z⟩
    b.psd_cost(blk, &herm_to_real(&complex_cost(pd)).scale(T::lit(0.5)));
    b.eq(&[(psd(blk, 0, 0), one)], one);
    b.eq(&[(psd(blk, n1, n1), one)], one);
    for i in 1..n1 {
        b.eq(&[(psd(blk, i, i), one)], one);
        b.eq(&[(psd(blk, n1 + i, n1 + i), one)], one);
    }
    for a in 0..n1 {
        for c in (a + 1)..n1 {
            b.eq(&[(psd(blk, a, c), one), (psd(blk, n1 + a, n1 + c), -one)], T::zero());
        }
    }
    // the off-diagonal quadrant is antisymmetric
    for a in 0..n1 {
        b.eq(&[(psd(blk, a, n1 + a), one)], T::zero());
        for c in (a + 1)..n1 {
            b.eq(&[(psd(blk, a, n1 + c), one), (psd(blk, c, n1 + a), one)], T::zero());
        }
    }
    blk
}

fn complex_metadata<T>(kind: SdrKind, pd: &ProblemData<T>, inst: &MimoInstance<T>, t: Vec<VarRef>) -> ProgramMetadata {
    let n1 = pd.n + 1;
    ProgramMetadata {
        sdr_kind: kind,
        m: inst.m,
        n: pd.n,
        order: pd.order,
        matrix_block: 0,
        x_re: (0..pd.n).map(|i| psd(0, 1 + i, 0)).collect(),
        x_im: (0..pd.n).map(|i| psd(0, n1 + 1 + i, 0)).collect(),
        y: Vec::new(),
        t,
    }
}

pub fn build_csdr<T: Real>(pd: &ProblemData<T>, inst: &MimoInstance<T>) -> ConicProgram<T> {
    let mut b = ProgramBuilder::new();
    complex_block(&mut b, pd);
    b.finish(complex_metadata(SdrKind::Csdr, pd, inst, Vec::new()))
}

pub fn build_esdr_x<T: Real>(pd: &ProblemData<T>, inst: &MimoInstance<T>) -> ConicProgram<T> {
    let (n, mm) = (pd.n, pd.order);
    let n1 = n + 1;
    let mut b = ProgramBuilder::new();
    let blk = complex_block(&mut b, pd);
    let tb = b.add_block(ConeKind::Nonneg, mm * n);
    let one = T::one();
    for i in 0..n {
        let mut re = vec![(psd(blk, 1 + i, 0), one)];
        let mut im = vec![(psd(blk, n1 + 1 + i, 0), one)];
        let mut sum = Vec::with_capacity(mm);
        for j in 0..mm {
            let s = pd.symbols.get(j);
            re.push((nn(tb, i * mm + j), -s.re));
            im.push((nn(tb, i * mm + j), -s.im));
            sum.push((nn(tb, i * mm + j), one));
        }
        b.eq(&re, T::zero());
        b.eq(&im, T::zero());
        b.eq(&sum, one);
    }
    let t = (0..mm * n).map(|k| nn(tb, k)).collect();
    b.finish(complex_metadata(SdrKind::EsdrX, pd, inst, t))
}

pub fn build_esdr_y<T: Real>(pd: &ProblemData<T>, inst: &MimoInstance<T>) -> ConicProgram<T> {
    let (n, mm) = (pd.n, pd.order);
    let mut b = ProgramBuilder::new();
    let blk = b.add_block(ConeKind::Psd, 2 * n + 1);
    let tb = b.add_block(ConeKind::Nonneg, mm * n);
    b.psd_cost(blk, &pd.qhat.bordered(T::zero(), &pd.chat));
    let one = T::one();
    b.eq(&[(psd(blk, 0, 0), one)], one);
    // y_i ↦ (1+i), y_{n+i} ↦ (1+n+i)
    for i in 0..n {
        let (p, q) = (1 + i, 1 + n + i);
        // entries of 𝒴(i) paired with the matching entry of K_j
        let targets: [(VarRef, fn(Complex<T>) -> T); 5] = [
            (psd(blk, p, 0), |s| s.re),
            (psd(blk, q, 0), |s| s.im),
            (psd(blk, p, p), |s| s.re * s.re),
            (psd(blk, p, q), |s| s.re * s.im),
            (psd(blk, q, q), |s| s.im * s.im),
        ];
        for (var, f) in targets {
            let mut terms = vec![(var, one)];
            for j in 0..mm {
                terms.push((nn(tb, i * mm + j), -f(pd.symbols.get(j))));
            }
            b.eq(&terms, T::zero());
        }
        let sum: Vec<_> = (0..mm).map(|j| (nn(tb, i * mm + j), one)).collect();
        b.eq(&sum, one);
    }
    let meta = ProgramMetadata {
        sdr_kind: SdrKind::EsdrY,
        m: inst.m,
        n,
        order: mm,
        matrix_block: blk,
        x_re: Vec::new(),
        x_im: Vec::new(),
        y: (0..2 * n).map(|k| psd(blk, 1 + k, 0)).collect(),
        t: (0..mm * n).map(|k| nn(tb, k)).collect(),
    };
    b.finish(meta)
}

fn build_t_model<T: Real>(pd: &ProblemData<T>, inst: &MimoInstance<T>, zero_offdiag: bool) -> ConicProgram<T> {
    let (n, mm) = (pd.n, pd.order);
    let d = mm * n;
    let mut b = ProgramBuilder::new();
    let blk = b.add_block(ConeKind::Psd, d + 1);
    let tb = b.add_block(ConeKind::Nonneg, d);
    b.psd_cost(blk, &pd.qbar.bordered(T::zero(), &pd.cbar));
    let one = T::one();
    b.eq(&[(psd(blk, 0, 0), one)], one);
    for k in 0..d {
        b.eq(&[(psd(blk, 1 + k, 0), one), (nn(tb, k), -one)], T::zero());
    }
    for i in 0..n {
        let sum: Vec<_> = (0..mm).map(|j| (nn(tb, i * mm + j), one)).collect();
        b.eq(&sum, one);
    }
    for k in 0..d {
        b.eq(&[(psd(blk, 1 + k, 1 + k), one), (nn(tb, k), -one)], T::zero());
    }
    if zero_offdiag {
        for i in 0..n {
            for j in 0..mm {
                for l in (j + 1)..mm {
                    b.eq(&[(psd(blk, 1 + i * mm + j, 1 + i * mm + l), one)], T::zero());
                }
            }
        }
    }
    let meta = ProgramMetadata {
        sdr_kind: if zero_offdiag { SdrKind::Esdr2T } else { SdrKind::Esdr1T },
        m: inst.m,
        n,
        order: mm,
        matrix_block: blk,
        x_re: Vec::new(),
        x_im: Vec::new(),
        y: Vec::new(),
        t: (0..d).map(|k| nn(tb, k)).collect(),
    };
    b.finish(meta)
}

pub fn build_esdr1_t<T: Real>(pd: &ProblemData<T>, inst: &MimoInstance<T>) -> ConicProgram<T> {
    build_t_model(pd, inst, false)
}

pub fn build_esdr2_t<T: Real>(pd: &ProblemData<T>, inst: &MimoInstance<T>) -> ConicProgram<T> {
    build_t_model(pd, inst, true)
}

/// The rank-one point of `program` at symbol indices `u` (stacked vector).
pub fn vertex_point<T: Real>(program: &ConicProgram<T>, pd: &ProblemData<T>, u: &[usize]) -> Result<Vec<T>> {
    let (n, mm) = (pd.n, pd.order);
    if u.len() != n || u.iter().any(|&j| j >= mm) {
        return invalid("symbol index vector does not match the program");
    }
    let t: Vec<T> = one_hot(u, mm);
    let blocks = match program.kind() {
        SdrKind::Csdr | SdrKind::EsdrX => {
            let mut v = vec![Complex::new(T::one(), T::zero())];
            v.extend(u.iter().map(|&j| pd.symbols.get(j)));
            let z = HermMatrix::from_fn(n + 1, |a, b| v[a] * v[b].conj());
            let mut blocks = vec![BlockValue::Psd(herm_to_real(&z))];
            if program.kind() == SdrKind::EsdrX {
                blocks.push(BlockValue::Nonneg(t));
            }
            blocks
        }
        SdrKind::EsdrY => {
            let y = pd.shat_times(&t);
            let mut w = vec![T::one()];
            w.extend(y);
            vec![BlockValue::Psd(SymMatrix::outer(&w)), BlockValue::Nonneg(t)]
        }
        SdrKind::Esdr1T | SdrKind::Esdr2T => {
            let mut w = vec![T::one()];
            w.extend(t.iter().copied());
            vec![BlockValue::Psd(SymMatrix::outer(&w)), BlockValue::Nonneg(t)]
        }
    };
    program.pack(&blocks)
}
