//! Standard-form conic programs: minimize `cᵀu` subject to `Au = b`,
//! `u ∈ K₁ × … × K_p` with each `K` a PSD cone or a nonnegative orthant.
//!
//! PSD blocks are stored as scaled upper-triangular vectors: row by row,
//! off-diagonal entries multiplied by `√2`, so `⟨A, B⟩ = svec(A)·svec(B)`.

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::linalg::{Mat, SymMatrix};
use crate::scalar::Real;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum SdrKind {
    #[serde(rename = "CSDR")]
    Csdr,
    #[serde(rename = "ESDR-X")]
    EsdrX,
    #[serde(rename = "ESDR-Y")]
    EsdrY,
    #[serde(rename = "ESDR1-T")]
    Esdr1T,
    #[serde(rename = "ESDR2-T")]
    Esdr2T,
}

impl SdrKind {
    pub const ALL: [SdrKind; 5] = [SdrKind::Csdr, SdrKind::EsdrX, SdrKind::EsdrY, SdrKind::Esdr1T, SdrKind::Esdr2T];

    pub fn name(self) -> &'static str {
        match self {
            SdrKind::Csdr => "CSDR",
            SdrKind::EsdrX => "ESDR-X",
            SdrKind::EsdrY => "ESDR-Y",
            SdrKind::Esdr1T => "ESDR1-T",
            SdrKind::Esdr2T => "ESDR2-T",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        let key: String = s.chars().filter(|c| c.is_ascii_alphanumeric()).collect::<String>().to_ascii_uppercase();
        match key.as_str() {
            "CSDR" => Ok(SdrKind::Csdr),
            "ESDRX" => Ok(SdrKind::EsdrX),
            "ESDRY" => Ok(SdrKind::EsdrY),
            "ESDR1T" => Ok(SdrKind::Esdr1T),
            "ESDR2T" => Ok(SdrKind::Esdr2T),
            _ => invalid(format!("unknown SDR kind {s:?}")),
        }
    }
}

impl std::fmt::Display for SdrKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ConeKind {
    #[serde(rename = "PSD")]
    Psd,
    #[serde(rename = "NONNEG")]
    Nonneg,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConeBlock {
    pub kind: ConeKind,
    pub dim: usize,
}

impl ConeBlock {
    /// Number of stacked coordinates.
    pub fn len(&self) -> usize {
        match self.kind {
            ConeKind::Psd => self.dim * (self.dim + 1) / 2,
            ConeKind::Nonneg => self.dim,
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

/// Position of `(i, j)`, `i ≤ j`, in the scaled upper-triangular vector of a
/// `d×d` matrix.
pub fn svec_index(d: usize, i: usize, j: usize) -> usize {
    let (i, j) = if i <= j { (i, j) } else { (j, i) };
    i * (2 * d + 1 - i) / 2 + (j - i)
}

pub fn svec<T: Real>(a: &SymMatrix<T>) -> Vec<T> {
    let d = a.dim();
    let r2 = T::SQRT_2();
    let mut out = Vec::with_capacity(d * (d + 1) / 2);
    for i in 0..d {
        out.push(a[(i, i)]);
        for j in (i + 1)..d {
            out.push(a[(i, j)] * r2);
        }
    }
    out
}

pub fn smat<T: Real>(v: &[T], d: usize) -> SymMatrix<T> {
    let mut m = Mat::zeros(d, d);
    smat_into(v, d, m.as_mut_slice());
    SymMatrix::from_mat(m).expect("square")
}

/// Unpacks a scaled vector into a dense row-major buffer of length `d²`.
pub fn smat_into<T: Real>(v: &[T], d: usize, out: &mut [T]) {
    let inv = T::FRAC_1_SQRT_2();
    let mut k = 0;
    for i in 0..d {
        out[i * d + i] = v[k];
        k += 1;
        for j in (i + 1)..d {
            let x = v[k] * inv;
            out[i * d + j] = x;
            out[j * d + i] = x;
            k += 1;
        }
    }
}

/// Packs the upper triangle of a dense row-major `d×d` buffer.
pub fn svec_from_slice<T: Real>(a: &[T], d: usize, out: &mut [T]) {
    let r2 = T::SQRT_2();
    let mut k = 0;
    for i in 0..d {
        out[k] = a[i * d + i];
        k += 1;
        for j in (i + 1)..d {
            out[k] = a[i * d + j] * r2;
            k += 1;
        }
    }
}

/// A model variable located inside a block.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "cone")]
pub enum VarRef {
    #[serde(rename = "PSD")]
    Psd { block: usize, i: usize, j: usize },
    #[serde(rename = "NONNEG")]
    Nonneg { block: usize, k: usize },
}

/// Where each model variable lives. Empty lists mean the model has no such
/// variable. Matrix variables (`X`, `Y`, `T`) occupy the PSD block minus its
/// first row and column; `x` entries are complex and given as (re, im) pairs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProgramMetadata {
    pub sdr_kind: SdrKind,
    pub m: usize,
    pub n: usize,
    #[serde(rename = "M")]
    pub order: usize,
    pub matrix_block: usize,
    pub x_re: Vec<VarRef>,
    pub x_im: Vec<VarRef>,
    pub y: Vec<VarRef>,
    pub t: Vec<VarRef>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SparseRow<T> {
    pub idx: Vec<usize>,
    pub val: Vec<T>,
}

impl<T: Real> SparseRow<T> {
    pub fn dot(&self, u: &[T]) -> T {
        self.idx.iter().zip(&self.val).fold(T::zero(), |acc, (&k, &a)| acc + a * u[k])
    }

    pub fn norm(&self) -> T {
        self.val.iter().fold(T::zero(), |acc, &a| acc + a * a).sqrt()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConicProgram<T> {
    pub blocks: Vec<ConeBlock>,
    pub cost: Vec<T>,
    pub rows: Vec<SparseRow<T>>,
    pub rhs: Vec<T>,
    pub metadata: ProgramMetadata,
}

/// Primal value of one block.
#[derive(Debug, Clone, PartialEq)]
pub enum BlockValue<T> {
    Psd(SymMatrix<T>),
    Nonneg(Vec<T>),
}

impl<T: Real> BlockValue<T> {
    pub fn as_psd(&self) -> Option<&SymMatrix<T>> {
        match self {
            BlockValue::Psd(m) => Some(m),
            BlockValue::Nonneg(_) => None,
        }
    }

    pub fn as_nonneg(&self) -> Option<&[T]> {
        match self {
            BlockValue::Nonneg(v) => Some(v),
            BlockValue::Psd(_) => None,
        }
    }
}

impl<T: Real> ConicProgram<T> {
    pub fn num_vars(&self) -> usize {
        self.cost.len()
    }

    pub fn num_constraints(&self) -> usize {
        self.rows.len()
    }

    pub fn kind(&self) -> SdrKind {
        self.metadata.sdr_kind
    }

    pub fn offsets(&self) -> Vec<usize> {
        let mut off = Vec::with_capacity(self.blocks.len());
        let mut acc = 0;
        for b in &self.blocks {
            off.push(acc);
            acc += b.len();
        }
        off
    }

    /// Stacked coordinate of a variable and the factor turning the stored
    /// value into the model value.
    pub fn coord(&self, r: VarRef) -> (usize, T) {
        let off = self.offsets();
        match r {
            VarRef::Psd { block, i, j } => {
                let d = self.blocks[block].dim;
                let f = if i == j { T::one() } else { T::FRAC_1_SQRT_2() };
                (off[block] + svec_index(d, i, j), f)
            }
            VarRef::Nonneg { block, k } => (off[block] + k, T::one()),
        }
    }

    pub fn read(&self, u: &[T], r: VarRef) -> T {
        let (k, f) = self.coord(r);
        u[k] * f
    }

    pub fn objective(&self, u: &[T]) -> T {
        crate::linalg::dot(&self.cost, u)
    }

    /// `max_k |a_kᵀu − b_k|`.
    pub fn eq_residual_inf(&self, u: &[T]) -> T {
        self.rows.iter().zip(&self.rhs).fold(T::zero(), |acc, (row, &b)| acc.max((row.dot(u) - b).abs()))
    }

    pub fn check_len(&self, u: &[T]) -> Result<()> {
        if u.len() != self.num_vars() {
            return invalid(format!("vector has length {}, program has {} variables", u.len(), self.num_vars()));
        }
        Ok(())
    }

    pub fn unpack(&self, u: &[T]) -> Result<Vec<BlockValue<T>>> {
        self.check_len(u)?;
        let mut out = Vec::with_capacity(self.blocks.len());
        let mut off = 0;
        for b in &self.blocks {
            let part = &u[off..off + b.len()];
            out.push(match b.kind {
                ConeKind::Psd => BlockValue::Psd(smat(part, b.dim)),
                ConeKind::Nonneg => BlockValue::Nonneg(part.to_vec()),
            });
            off += b.len();
        }
        Ok(out)
    }

    pub fn pack(&self, blocks: &[BlockValue<T>]) -> Result<Vec<T>> {
        if blocks.len() != self.blocks.len() {
            return invalid("block count mismatch");
        }
        let mut u = Vec::with_capacity(self.num_vars());
        for (spec, val) in self.blocks.iter().zip(blocks) {
            match (spec.kind, val) {
                (ConeKind::Psd, BlockValue::Psd(m)) if m.dim() == spec.dim => u.extend(svec(m)),
                (ConeKind::Nonneg, BlockValue::Nonneg(v)) if v.len() == spec.dim => u.extend_from_slice(v),
                _ => return invalid("block shape mismatch"),
            }
        }
        Ok(u)
    }

    /// Most negative eigenvalue or entry across all blocks (0 when inside).
    pub fn cone_violation(&self, u: &[T]) -> Result<T> {
        let mut worst = T::zero();
        for b in self.unpack(u)? {
            let low = match b {
                BlockValue::Psd(m) => crate::linalg::min_eig(&m)?,
                BlockValue::Nonneg(v) => v.iter().copied().fold(T::infinity(), T::min),
            };
            worst = worst.max(-low);
        }
        Ok(worst)
    }

    /// Sparse `A` as `(row, col, value)` triplets.
    pub fn triplets(&self) -> Vec<(usize, usize, T)> {
        self.rows
            .iter()
            .enumerate()
            .flat_map(|(r, row)| row.idx.iter().zip(&row.val).map(move |(&c, &v)| (r, c, v)))
            .collect()
    }
}

/// Incremental construction with coefficients expressed on matrix entries.
pub(crate) struct ProgramBuilder<T> {
    blocks: Vec<ConeBlock>,
    offsets: Vec<usize>,
    cost: Vec<T>,
    rows: Vec<SparseRow<T>>,
    rhs: Vec<T>,
}

impl<T: Real> ProgramBuilder<T> {
    pub fn new() -> Self {
        Self { blocks: Vec::new(), offsets: Vec::new(), cost: Vec::new(), rows: Vec::new(), rhs: Vec::new() }
    }

    pub fn add_block(&mut self, kind: ConeKind, dim: usize) -> usize {
        let b = ConeBlock { kind, dim };
        self.offsets.push(self.cost.len());
        self.cost.extend(std::iter::repeat_n(T::zero(), b.len()));
        self.blocks.push(b);
        self.blocks.len() - 1
    }

    /// Coordinate and coefficient such that `coef·u[coord]` is the model value.
    pub fn locate(&self, r: VarRef) -> (usize, T) {
        match r {
            VarRef::Psd { block, i, j } => {
                let d = self.blocks[block].dim;
                let f = if i == j { T::one() } else { T::FRAC_1_SQRT_2() };
                (self.offsets[block] + svec_index(d, i, j), f)
            }
            VarRef::Nonneg { block, k } => (self.offsets[block] + k, T::one()),
        }
    }

    /// Adds `Σ a·var = rhs`.
    pub fn eq(&mut self, terms: &[(VarRef, T)], rhs: T) {
        let mut entries: Vec<(usize, T)> = terms
            .iter()
            .filter(|(_, a)| *a != T::zero())
            .map(|&(r, a)| {
                let (k, f) = self.locate(r);
                (k, a * f)
            })
            .collect();
        entries.sort_by_key(|e| e.0);
        let mut row = SparseRow { idx: Vec::with_capacity(entries.len()), val: Vec::with_capacity(entries.len()) };
        for (k, a) in entries {
            if row.idx.last() == Some(&k) {
                *row.val.last_mut().expect("nonempty") += a;
            } else {
                row.idx.push(k);
                row.val.push(a);
            }
        }
        self.rows.push(row);
        self.rhs.push(rhs);
    }

    /// Adds `⟨C, W⟩` for a symmetric cost on a PSD block.
    pub fn psd_cost(&mut self, block: usize, c: &SymMatrix<T>) {
        let d = self.blocks[block].dim;
        let v = svec(c);
        for (k, x) in v.into_iter().enumerate() {
            self.cost[self.offsets[block] + k] += x;
        }
        debug_assert_eq!(c.dim(), d);
    }

    pub fn finish(self, metadata: ProgramMetadata) -> ConicProgram<T> {
        ConicProgram { blocks: self.blocks, cost: self.cost, rows: self.rows, rhs: self.rhs, metadata }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn svec_layout_and_inner_product() {
        let a = SymMatrix::from_rows(&[vec![1.0f64, 2.0, 3.0], vec![2.0, 4.0, 5.0], vec![3.0, 5.0, 6.0]]).unwrap();
        let b = SymMatrix::from_rows(&[vec![0.5, -1.0, 0.0], vec![-1.0, 2.0, 1.5], vec![0.0, 1.5, -3.0]]).unwrap();
        let (va, vb) = (svec(&a), svec(&b));
        assert_eq!(va.len(), 6);
        assert!((crate::linalg::dot(&va, &vb) - a.inner_product(&b)).abs() < 1e-12);
        let back = smat(&va, 3);
        assert!((0..3).all(|i| (0..3).all(|j| (back[(i, j)] - a[(i, j)]).abs() < 1e-14)));
        for i in 0..3 {
            for j in i..3 {
                let k = svec_index(3, i, j);
                let f = if i == j { 1.0 } else { 2f64.sqrt() };
                assert!((va[k] - f * a[(i, j)]).abs() < 1e-12);
                assert_eq!(svec_index(3, j, i), k);
            }
        }
    }

    #[test]
    fn kind_names_round_trip() {
        for k in SdrKind::ALL {
            assert_eq!(SdrKind::parse(k.name()).unwrap(), k);
        }
        assert_eq!(SdrKind::parse("esdr2t").unwrap(), SdrKind::Esdr2T);
        assert!(SdrKind::parse("qam").is_err());
    }
}
