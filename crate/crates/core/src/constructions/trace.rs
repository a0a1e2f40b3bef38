//! Stage-by-stage construction traces and the audits that re-check them.
//!
//! A trace records every stage's presentation snapshot plus the typed events
//! that produced it. Audits work from the trace alone: they re-derive induced
//! values from the source function and fail loudly on any violation of the
//! push invariants.

use crate::approx::DeltaTwoApprox;
use crate::func::FuncSpec;
use crate::presentation::FinitePresentation;
use serde::{Deserialize, Serialize};
use std::collections::BTreeSet;
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum TargetDescriptor {
    Value { symbol: u64 },
    Pattern { pattern: Vec<usize> },
    BlockPosition { run_type: usize, right_end: bool },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Event {
    RequirementInitialized {
        e: u64,
        placed_even: u64,
    },
    AttentionReceived {
        e: u64,
    },
    PtrApplied {
        e: u64,
        /// Elements of the relocated middle interval, in order.
        c_members: Vec<u64>,
        /// Present on a requirement's own push; D re-seats carry none.
        target: Option<TargetDescriptor>,
        inserted: Vec<u64>,
    },
    CompanionAssigned {
        e: u64,
        companions: Vec<u64>,
        boundary: bool,
    },
    ValueCommitted {
        x: u64,
        value: u64,
    },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Stage {
    pub index: u64,
    pub presentation: FinitePresentation,
    pub events: Vec<Event>,
}

/// Parameters the decoder needs to read a bit off the final presentation.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "variant", rename_all = "kebab-case")]
pub enum DecodeInfo {
    FiniteRange {
        /// Value representing bit 0 and bit 1.
        c0: u64,
        c1: u64,
    },
    BlockA {
        /// Type index of 2e's block when the bit is 0 resp. 1.
        type_bit0: usize,
        type_bit1: usize,
    },
    BlockEnd {
        /// Size of the recurring block; bit 1 ⇔ 2e at its right end.
        block_size: u64,
    },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LedgerEntry {
    pub e: u64,
    pub companions: Vec<u64>,
    pub boundary: Vec<u64>,
    /// Case-C pattern exponents in chronological order.
    pub exponents: Vec<u64>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConstructionTrace {
    pub schema_version: u32,
    pub variant: String,
    pub source: FuncSpec,
    pub approximation: DeltaTwoApprox,
    pub stages_requested: u64,
    /// Right end of the copied initial segment of the source, in source
    /// coordinates (the structure never touches positions ≤ this again).
    pub m_prefix: u64,
    pub decode: DecodeInfo,
    pub stages: Vec<Stage>,
    pub ledger: Vec<LedgerEntry>,
}

impl ConstructionTrace {
    pub fn final_presentation(&self) -> &FinitePresentation {
        &self.stages.last().expect("trace has stages").presentation
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("trace serializes")
    }

    pub fn from_json(s: &str) -> Result<ConstructionTrace, serde_json::Error> {
        serde_json::from_str(s)
    }

    /// Position history of one element across stages (None before entry).
    pub fn positions_of(&self, x: u64) -> Vec<Option<usize>> {
        self.stages
            .iter()
            .map(|st| st.presentation.position_of(x))
            .collect()
    }

    /// Number of stages at which the element changed position.
    pub fn movement_count(&self, x: u64) -> u64 {
        let hist = self.positions_of(x);
        let mut moves = 0;
        let mut prev: Option<usize> = None;
        for p in hist.into_iter().flatten() {
            if let Some(q) = prev {
                if q != p {
                    moves += 1;
                }
            }
            prev = Some(p);
        }
        moves
    }
}

#[derive(Debug, Error)]
pub enum AuditFailure {
    #[error("stage {stage}: presentation does not extend the previous one")]
    NotMonotone { stage: u64 },
    #[error("stage {stage}: element {x} changed induced value {before} → {after} outside any pushed interval")]
    ValueNotPreserved {
        stage: u64,
        x: u64,
        before: u64,
        after: u64,
    },
    #[error("stage {stage}: pushed interval of {e} is not contiguous")]
    NotContiguous { stage: u64, e: u64 },
    #[error("stage {stage}: inserted element {x} is not fresh or not odd")]
    BadFreshElement { stage: u64, x: u64 },
    #[error("stage {stage}: committed value of {x} disagrees with the induced map")]
    CommitInconsistent { stage: u64, x: u64 },
    #[error("companion sets of {a} and {b} intersect")]
    CompanionsOverlap { a: u64, b: u64 },
}

#[derive(Debug, Clone, Default, Serialize)]
pub struct AuditReport {
    pub stages_checked: u64,
    pub pushes_checked: u64,
    pub preserved_values_checked: u64,
}

/// Re-check the push invariants across the whole trace.
pub fn audit_trace(trace: &ConstructionTrace, f: &FuncSpec) -> Result<AuditReport, AuditFailure> {
    let mut report = AuditReport::default();
    let mut seen: BTreeSet<u64> = BTreeSet::new();
    for st in &trace.stages {
        for x in &st.presentation.elements {
            seen.insert(*x);
        }
        break;
    }
    for w in trace.stages.windows(2) {
        let (prev, cur) = (&w[0], &w[1]);
        let stage = cur.index;
        if !cur.presentation.extends(&prev.presentation) {
            return Err(AuditFailure::NotMonotone { stage });
        }
        // Elements whose value the stage was allowed to change.
        let mut pushed: BTreeSet<u64> = BTreeSet::new();
        for ev in &cur.events {
            match ev {
                Event::PtrApplied {
                    e,
                    c_members,
                    inserted,
                    ..
                } => {
                    report.pushes_checked += 1;
                    pushed.extend(c_members.iter().copied());
                    // Contiguity of the pushed interval afterwards.
                    if !c_members.is_empty() {
                        let idx = cur.presentation.index();
                        let mut pos: Vec<usize> =
                            c_members.iter().filter_map(|x| idx.get(x).copied()).collect();
                        if pos.len() != c_members.len() {
                            return Err(AuditFailure::NotContiguous { stage, e: *e });
                        }
                        pos.sort_unstable();
                        if pos.windows(2).any(|p| p[1] != p[0] + 1) {
                            return Err(AuditFailure::NotContiguous { stage, e: *e });
                        }
                    }
                    for &x in inserted {
                        if seen.contains(&x) || x % 2 == 0 {
                            return Err(AuditFailure::BadFreshElement { stage, x });
                        }
                        seen.insert(x);
                    }
                }
                Event::RequirementInitialized { placed_even, .. } => {
                    seen.insert(*placed_even);
                }
                _ => {}
            }
        }
        // Push preservation: everything outside pushed intervals keeps its
        // induced element-form value.
        let prev_idx = prev.presentation.index();
        let cur_idx = cur.presentation.index();
        for (&x, &i) in &prev_idx {
            if pushed.contains(&x) {
                continue;
            }
            if let Some(before) = prev.presentation.induced_at(f, i) {
                if let Some(&j) = cur_idx.get(&x) {
                    if let Some(after) = cur.presentation.induced_at(f, j) {
                        report.preserved_values_checked += 1;
                        if before != after {
                            return Err(AuditFailure::ValueNotPreserved {
                                stage,
                                x,
                                before,
                                after,
                            });
                        }
                    }
                }
            }
        }
        if !cur.presentation.committed_consistent(f) {
            let x = cur
                .presentation
                .fvals
                .iter()
                .find(|(&x, &v)| cur.presentation.induced_value(f, x) != Some(v))
                .map(|(&x, _)| x)
                .unwrap_or(0);
            return Err(AuditFailure::CommitInconsistent { stage, x });
        }
        report.stages_checked += 1;
    }
    // Companion sets of distinct requirements stay disjoint.
    for (i, a) in trace.ledger.iter().enumerate() {
        for b in trace.ledger.iter().skip(i + 1) {
            let sa: BTreeSet<&u64> = a.companions.iter().collect();
            if b.companions.iter().any(|x| sa.contains(x)) {
                return Err(AuditFailure::CompanionsOverlap { a: a.e, b: b.e });
            }
        }
    }
    Ok(report)
}

#[derive(Debug, Error)]
pub enum DecodeError {
    #[error("element {x} moved within the last {k} stages; not stabilized")]
    NotStabilized { x: u64, k: u64 },
    #[error("element {x} never entered the structure")]
    Missing { x: u64 },
    #[error("cannot decode: {0}")]
    Unreadable(String),
}

/// Read the realized bit for requirement `e` off the final presentation,
/// refusing if `2e` still moved within the last `k_stable` stages.
pub fn decode_x_from_trace(
    trace: &ConstructionTrace,
    e: u64,
    k_stable: u64,
) -> Result<bool, DecodeError> {
    let x = 2 * e;
    let hist = trace.positions_of(x);
    let last = hist
        .last()
        .copied()
        .flatten()
        .ok_or(DecodeError::Missing { x })?;
    let lookback = (k_stable as usize).min(hist.len());
    for p in hist[hist.len() - lookback..].iter() {
        if let Some(p) = p {
            if *p != last {
                return Err(DecodeError::NotStabilized { x, k: k_stable });
            }
        }
    }
    let pres = trace.final_presentation();
    match &trace.decode {
        DecodeInfo::FiniteRange { c0, c1 } => {
            let v = pres
                .value_symbol(&trace.source, x)
                .ok_or_else(|| DecodeError::Unreadable("no value at 2e".into()))?;
            if v == *c1 {
                Ok(true)
            } else if v == *c0 {
                Ok(false)
            } else {
                Err(DecodeError::Unreadable(format!(
                    "value {v} is neither coding value"
                )))
            }
        }
        DecodeInfo::BlockA {
            type_bit0,
            type_bit1,
        } => {
            let tiling =
                crate::analysis::alpha_prefix_full(&trace.source, decode_bound(trace, last))
                    .map_err(|err| DecodeError::Unreadable(err.to_string()))?;
            let blk = tiling
                .block_index_of(last as u64)
                .ok_or_else(|| DecodeError::Unreadable("position beyond tiling".into()))?;
            let t = tiling.alpha_prefix[blk];
            if t == *type_bit1 {
                Ok(true)
            } else if t == *type_bit0 {
                Ok(false)
            } else {
                Err(DecodeError::Unreadable(format!(
                    "block type {t} codes no bit"
                )))
            }
        }
        DecodeInfo::BlockEnd { block_size } => {
            let tiling =
                crate::analysis::alpha_prefix_full(&trace.source, decode_bound(trace, last))
                    .map_err(|err| DecodeError::Unreadable(err.to_string()))?;
            let blk = tiling
                .block_index_of(last as u64)
                .ok_or_else(|| DecodeError::Unreadable("position beyond tiling".into()))?;
            let (lo, hi) = tiling.spans[blk];
            if hi - lo + 1 != *block_size {
                return Err(DecodeError::Unreadable(format!(
                    "block size {} does not match the coding size {block_size}",
                    hi - lo + 1
                )));
            }
            if last as u64 == hi {
                Ok(true)
            } else if last as u64 == lo {
                Ok(false)
            } else {
                Err(DecodeError::Unreadable(
                    "2e is interior to its block".into(),
                ))
            }
        }
    }
}

fn decode_bound(trace: &ConstructionTrace, last_pos: usize) -> u64 {
    // Window comfortably past the final structure.
    (trace.final_presentation().len().max(last_pos) as u64 + 2) * 2
}
