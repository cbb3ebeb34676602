//! Semidefinite relaxations for maximum-likelihood detection of M-PSK
//! symbols over a MIMO channel: problem data, the five relaxations as conic
//! programs, a first-order conic solver, closed-form tightness certificates,
//! the separable-lifting equivalence maps, and a Monte Carlo harness.
//!
//! Numeric code is generic over [`Real`]; the aliases below fix `f64`.

pub mod equivalence;
pub mod error;
pub mod harness;
pub mod io;
pub mod linalg;
pub mod model;
pub mod oracle;
pub mod scalar;
pub mod sdr;
pub mod solver;
pub mod tightness;

pub use error::{Error, Result};
pub use scalar::Real;

pub type Complex64 = num_complex::Complex<f64>;
pub type Instance = model::MimoInstance<f64>;
pub type Problem = model::ProblemData<f64>;
pub type SymbolSet = model::SymbolSet<f64>;
pub type Program = sdr::ConicProgram<f64>;
pub type Solution = sdr::SdrSolution<f64>;
pub type SolveResult = solver::SolveResult<f64>;
pub type MlResult = oracle::MlResult<f64>;
pub type Partition = equivalence::SeparablePartition<f64>;
pub type Decomposed = equivalence::DecomposedPoint<f64>;
pub type Lifted = equivalence::LiftedPoint<f64>;
pub type Matrix = linalg::Mat<f64>;
pub type SymMatrix = linalg::SymMatrix<f64>;
