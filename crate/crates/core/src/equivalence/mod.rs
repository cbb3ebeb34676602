//! Dimension reduction for separable lifting matrices, with constructive
//! maps in both directions.

pub mod lift;
pub mod maps;
pub mod nnls;
pub mod partition;
pub mod unit_diag;

pub use lift::{
    decomposed_residual, group_violation, lift, lifted_residuals, restrict, DecomposedPoint, GroupConstraint, GroupPoint,
    LiftResiduals, LiftedPoint, SimplexVertices, UnitDiagonal, Unconstrained,
};
pub use maps::{
    antenna_partition, bc_groups, bc_to_va, bc_violation, binary_weight_matrix, esdr2t_objective, esdr2t_to_esdry, esdr2t_violation, esdry_objective,
    esdry_groups, esdry_to_esdr2t, esdry_violation, hull_weights, va_bc_map, va_to_bc, va_violation, VaBcDirection,
};
pub use nnls::nnls;
pub use partition::{find_partition, SeparablePartition};
pub use unit_diag::{binary_weights, weight_interval, weight_witness};
