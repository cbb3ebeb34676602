//! JSON documents for instances, programs, solutions, equivalence points and
//! partitions. Complex numbers are `[re, im]` pairs; matrices are lists of
//! rows.

use std::path::Path;

use num_complex::Complex;
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::equivalence::{DecomposedPoint, GroupPoint, LiftedPoint, SeparablePartition};
use crate::error::{Error, Result};
use crate::linalg::{Mat, SymMatrix};
use crate::model::MimoInstance;
use crate::sdr::{BlockValue, ConeBlock, ConicProgram, ProgramMetadata, SdrSolution};
use crate::solver::{Residuals, SolveStatus};

pub fn to_json<S: Serialize>(value: &S) -> Result<String> {
    Ok(serde_json::to_string_pretty(value)?)
}

pub fn from_json<D: DeserializeOwned>(text: &str) -> Result<D> {
    Ok(serde_json::from_str(text)?)
}

pub fn read_json<D: DeserializeOwned>(path: &Path) -> Result<D> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::InvalidInput(format!("{}: {e}", path.display())))?;
    from_json(&text)
}

fn pairs(z: &[Complex<f64>]) -> Vec<[f64; 2]> {
    z.iter().map(|c| [c.re, c.im]).collect()
}

fn complexes(p: &[[f64; 2]]) -> Vec<Complex<f64>> {
    p.iter().map(|&[re, im]| Complex::new(re, im)).collect()
}

/// Instance data; `r` is recomputed from `H`, `x*` and `v` on load.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InstanceDoc {
    pub m: usize,
    pub n: usize,
    #[serde(rename = "M")]
    pub order: usize,
    /// `m×n` rows.
    pub h: Vec<Vec<[f64; 2]>>,
    pub v: Vec<[f64; 2]>,
    pub ustar: Vec<usize>,
    pub snr_db: f64,
    #[serde(default)]
    pub seed: Option<u64>,
}

impl InstanceDoc {
    pub fn from_instance(inst: &MimoInstance<f64>) -> Self {
        Self {
            m: inst.m,
            n: inst.n,
            order: inst.order(),
            h: inst.h.chunks(inst.n).map(pairs).collect(),
            v: pairs(&inst.v),
            ustar: inst.ustar.clone(),
            snr_db: inst.snr_db,
            seed: inst.seed,
        }
    }

    pub fn to_instance(&self) -> Result<MimoInstance<f64>> {
        if self.h.len() != self.m || self.h.iter().any(|row| row.len() != self.n) {
            return Err(Error::InvalidInput(format!("H must be {}x{}", self.m, self.n)));
        }
        let h = self.h.iter().flat_map(|row| complexes(row)).collect();
        let mut inst = MimoInstance::new(self.m, self.n, self.order, h, complexes(&self.v), self.ustar.clone(), self.snr_db)?;
        inst.seed = self.seed;
        Ok(inst)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProgramDoc {
    pub metadata: ProgramMetadata,
    pub blocks: Vec<ConeBlock>,
    pub cost: Vec<f64>,
    /// `(row, column, value)` entries of `A`.
    pub a: Vec<(usize, usize, f64)>,
    pub b: Vec<f64>,
}

impl ProgramDoc {
    pub fn from_program(p: &ConicProgram<f64>) -> Self {
        Self { metadata: p.metadata.clone(), blocks: p.blocks.clone(), cost: p.cost.clone(), a: p.triplets(), b: p.rhs.clone() }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "cone", content = "value")]
pub enum BlockDoc {
    #[serde(rename = "PSD")]
    Psd(Vec<Vec<f64>>),
    #[serde(rename = "NONNEG")]
    Nonneg(Vec<f64>),
}

impl From<&BlockValue<f64>> for BlockDoc {
    fn from(b: &BlockValue<f64>) -> Self {
        match b {
            BlockValue::Psd(m) => BlockDoc::Psd(m.as_mat().to_rows()),
            BlockValue::Nonneg(v) => BlockDoc::Nonneg(v.clone()),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolutionDoc {
    pub kind: crate::sdr::SdrKind,
    pub status: SolveStatus,
    pub objective: f64,
    /// `objective + r†r`, comparable with the ML objective.
    pub objective_with_constant: f64,
    pub xhat: Vec<[f64; 2]>,
    pub tight: bool,
    pub margin: f64,
    pub iterations: usize,
    pub residuals: Residuals,
    pub blocks: Vec<BlockDoc>,
}

impl SolutionDoc {
    pub fn from_solution(s: &SdrSolution<f64>, r_norm2: f64) -> Self {
        Self {
            kind: s.kind,
            status: s.status,
            objective: s.objective,
            objective_with_constant: s.objective + r_norm2,
            xhat: pairs(&s.xhat),
            tight: s.tight,
            margin: s.margin,
            iterations: s.iterations,
            residuals: s.residuals,
            blocks: s.matrix_part.iter().map(BlockDoc::from).collect(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LiftedDoc {
    pub t: Vec<f64>,
    pub tt: Vec<Vec<f64>>,
}

impl LiftedDoc {
    pub fn from_point(p: &LiftedPoint<f64>) -> Self {
        Self { t: p.t.clone(), tt: p.tt.as_mat().to_rows() }
    }

    pub fn to_point(&self) -> Result<LiftedPoint<f64>> {
        Ok(LiftedPoint { t: self.t.clone(), tt: SymMatrix::from_rows(&self.tt)? })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecomposedDoc {
    pub y: Vec<f64>,
    pub yy: Vec<Vec<f64>>,
    pub groups: Vec<GroupPoint<f64>>,
}

impl DecomposedDoc {
    pub fn from_point(p: &DecomposedPoint<f64>) -> Self {
        Self { y: p.y.clone(), yy: p.yy.as_mat().to_rows(), groups: p.groups.iter().map(|(t, tt)| GroupPoint::new(t.clone(), tt)).collect() }
    }

    pub fn to_point(&self) -> Result<DecomposedPoint<f64>> {
        let groups = self.groups.iter().map(|g| Ok((g.t.clone(), g.matrix()?))).collect::<Result<_>>()?;
        Ok(DecomposedPoint { y: self.y.clone(), yy: SymMatrix::from_rows(&self.yy)?, groups })
    }
}

/// A lifting matrix with its groups; blocks are rebuilt and validated on
/// load.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PartitionDoc {
    pub p: Vec<Vec<f64>>,
    pub row_groups: Vec<Vec<usize>>,
    pub col_groups: Vec<Vec<usize>>,
}

impl PartitionDoc {
    pub fn from_partition(part: &SeparablePartition<f64>) -> Self {
        Self { p: part.matrix().to_rows(), row_groups: part.row_groups.clone(), col_groups: part.col_groups.clone() }
    }

    pub fn to_partition(&self) -> Result<SeparablePartition<f64>> {
        let p = Mat::from_rows(&self.p)?;
        SeparablePartition::with_groups(&p, self.row_groups.clone(), self.col_groups.clone())
    }
}
