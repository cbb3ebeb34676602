//! Dense real-symmetric and complex-Hermitian kernels.

pub mod eigen;
pub mod factor;
pub mod matrix;
pub mod psd;

pub use eigen::{eig_sym, eig_sym_ql, eigvals_sym, EigenDecomposition};
pub use factor::{gram_factor, gram_factor_with_tol, orthogonal_extension, orthogonal_extension_with_tol, Cholesky};
pub use matrix::{dot, norm2, norm_inf, HermMatrix, Mat, SymMatrix};
pub use psd::{
    eigvals_herm, herm_to_real, is_psd, min_eig, min_eig_herm, psd_project, psd_project_fast, psd_scale,
    real_pair_to_herm,
};
