//! Reduction of a quasi-periodically forced Klein-Gordon operator to a
//! constant-coefficient diagonal normal form.

mod coefficients;
mod kam;
mod stages;

pub use coefficients::{CoefficientSummary, KGCoefficients};
pub use kam::{kam_reduce, KamConfig, KamOutcome, KamStep, MelnikovViolation};
pub use stages::{
    assemble_conjugator, block_diagonalize, build_system, interior_norm, reduce_order0, reduce_order1, run_pipeline,
    symmetrize_order1, ConjugatorCheck, PipelineConfig, ReductionState, Stage, StageRecord, Transform,
};
