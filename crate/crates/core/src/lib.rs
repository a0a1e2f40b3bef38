//! Finite, machine-checkable renderings of block/quasi-block structure on
//! computable copies of `(ω,<)`.
//!
//! The library is organised around the objects the constructions manipulate:
//!
//! * [`func`] — total function specifications (tables, builtins, a small
//!   expression language) together with batch evaluation.
//! * [`block`] — f-blocks, isomorphism/embedding tests, type tables and the
//!   left-to-right tiling of an initial segment into blocks.
//! * [`approx`] — limit-computable 0/1 approximations given by finite flip
//!   histories.
//! * [`presentation`] — finite stages of a computable copy of `(ω,<)`.
//! * [`ptr`] — the generic pushing-to-the-right transformation: relocate a
//!   middle interval so it meets a target condition while preserving the
//!   values of everything to its left and right.
//! * [`analysis`] — quasi-block cuts, counting profiles and the evidence-based
//!   classifier.
//! * [`constructions`] — stage-based realizations of a Δ₂ approximation
//!   inside a copy (finite range; block cases A/B/C), the quasi-block builder
//!   over a value sequence, and trace decoding.
//! * [`rs`] — successor retrieval relative to the image of a function, with
//!   adversarial copy generators and sealed ground-truth logs.
//! * [`injury`] — the finite-injury engine producing a cycle-block function,
//!   the sets I and J, and a copy with per-stage auditable invariants.
//!
//! Every engine produces a replayable trace; audits re-check the advertised
//! invariants from the trace alone.

pub mod analysis;
pub mod approx;
pub mod block;
pub mod constructions;
pub mod dot;
pub mod func;
pub mod injury;
pub mod pairing;
pub mod presentation;
pub mod ptr;
pub mod rs;

pub use approx::DeltaTwoApprox;
pub use block::{FBlock, TypeTable};
pub use func::FuncSpec;
pub use presentation::FinitePresentation;

/// Version of the on-disk trace/report JSON schema.
pub const SCHEMA_VERSION: u32 = 1;
