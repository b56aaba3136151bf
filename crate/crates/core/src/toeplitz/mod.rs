//! Töplitz-in-time operators, their 2×2 block matrices and the diagonal
//! normal form.

mod algebra;
mod block;
mod normal;
mod operator;

pub use algebra::{
    conjugate_generator, expm, invert_near_identity, invert_with_guess, refine_inverse, InverseResult, TruncatedAlgebra,
    INVERSE_TOL, STALL_TOL,
};
pub use block::{sigma_sign, BlockOperator2x2, StructureReport, MINUS, PLUS};
pub use normal::{dm, normal_form_project, normal_form_project_unchecked, EigenPair, NormalForm};
pub use operator::{power_iteration, NormEstimate, NormMode, Side, ToeplitzOperator, POWER_ITERS, POWER_RTOL};
