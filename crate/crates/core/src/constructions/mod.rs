//! Stage-based constructions that realize a limit-computable bit inside a
//! computable copy, the combinatorial case analysis of a type string, and
//! the quasi-block builder over a value sequence.
//!
//! Every construction returns a [`trace::ConstructionTrace`]; the audits in
//! [`trace`] re-check the module invariants (order persistence, push
//! preservation, contiguity, freshness) from the trace alone.

pub mod block_cases;
pub mod case_analysis;
pub mod finite_range;
pub mod michal;
pub mod trace;

pub use block_cases::{construct_block_case_a, construct_block_case_b, construct_block_case_c};
pub use case_analysis::{find_case, CaseWitness};
pub use finite_range::construct_finite_range;
pub use michal::michal_build;
pub use trace::{audit_trace, decode_x_from_trace, ConstructionTrace};

use thiserror::Error;

#[derive(Debug, Error)]
pub enum BuildError {
    #[error("approximation domain {domain} declares no history for requirement {e}")]
    UndeclaredIndex { e: u64, domain: u64 },
    #[error("function is unsuitable: {0}")]
    Unsuitable(String),
    #[error("case witness does not match this construction: {0}")]
    WitnessMismatch(String),
    #[error("witness window exceeded: {0}")]
    WitnessWindowExceeded(String),
    #[error(transparent)]
    Ptr(#[from] crate::ptr::PtrError),
    #[error(transparent)]
    Block(#[from] crate::block::BlockError),
    #[error(transparent)]
    Func(#[from] crate::func::FuncError),
    #[error(transparent)]
    Approx(#[from] crate::approx::ApproxError),
    #[error("internal invariant violation: {0}")]
    Internal(String),
}

/// Common knobs for the stage engines.
#[derive(Debug, Clone, serde::Serialize, serde::Deserialize)]
pub struct StageConfig {
    pub stages: u64,
    /// Evaluation window for the source function.
    pub bound: u64,
    /// Hard cap for greedy position searches, in source coordinates.
    pub search_cap: u64,
}

impl StageConfig {
    pub fn new(stages: u64, bound: u64) -> StageConfig {
        StageConfig {
            stages,
            bound,
            search_cap: bound,
        }
    }
}
