//! The five semidefinite relaxations, their standard-form encodings, and
//! symbol extraction.

pub mod builders;
pub mod extract;
pub mod program;

use num_complex::Complex;

use crate::error::Result;
use crate::model::{MimoInstance, ProblemData};
use crate::scalar::Real;
use crate::solver::{rank_of_block, solve, Residuals, SolveStatus, SolverConfig};

pub use builders::{build, build_csdr, build_esdr1_t, build_esdr2_t, build_esdr_x, build_esdr_y, vertex_point};
pub use extract::{decide_tight, extract_xhat, extract_xhat_from_blocks, tightness_margin, TIGHT_TOL};
pub use program::{svec, svec_index, smat, BlockValue, ConeBlock, ConeKind, ConicProgram, ProgramMetadata, SdrKind, SparseRow, VarRef};

/// A solved relaxation on one instance.
#[derive(Debug, Clone)]
pub struct SdrSolution<T> {
    pub kind: SdrKind,
    pub status: SolveStatus,
    /// Relaxation objective (the constant `r†r` excluded).
    pub objective: T,
    pub xhat: Vec<Complex<T>>,
    pub matrix_part: Vec<BlockValue<T>>,
    pub residuals: Residuals,
    pub tight: bool,
    /// `‖x̂ − x*‖_∞`
    pub margin: T,
    pub iterations: usize,
}

impl<T: Real> SdrSolution<T> {
    pub fn solved(&self) -> bool {
        self.status == SolveStatus::Solved
    }

    /// Numerical rank of the main PSD block.
    pub fn rank(&self, rel_tol: T) -> Result<usize> {
        match self.matrix_part.iter().find_map(BlockValue::as_psd) {
            Some(m) => rank_of_block(m, rel_tol),
            None => Ok(0),
        }
    }
}

/// Builds, solves, and decides tightness for one model.
pub fn solve_sdr<T: Real>(kind: SdrKind, inst: &MimoInstance<T>, pd: &ProblemData<T>, cfg: &SolverConfig) -> Result<SdrSolution<T>> {
    let program = build(kind, pd, inst);
    let res = solve(&program, cfg)?;
    let xhat = extract_xhat(&res.x, &program)?;
    let margin = tightness_margin(&xhat, &inst.xstar);
    Ok(SdrSolution {
        kind,
        status: res.status,
        objective: res.objective,
        tight: decide_tight(&xhat, &inst.xstar),
        margin,
        xhat,
        matrix_part: program.unpack(&res.x)?,
        residuals: res.residuals,
        iterations: res.iterations,
    })
}
