//! Window-bounded structure analysis: quasi-block cuts, the type string of a
//! block function, per-type counting, and an evidence-based classifier.
//!
//! Everything here is certified only up to an explicit bound. The classifier
//! never guesses: each verdict carries evidence that re-verifies against the
//! function, and inconclusive windows are reported as such.

use crate::block::{BlockError, Tiler, TypeTable};
use crate::constructions::case_analysis::{find_case, CaseWitness};
use crate::func::{Builtin, FuncSpec};
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum AnalysisError {
    #[error("bound {bound} exceeds evaluation bound {eval_bound}")]
    BoundTooLarge { bound: u64, eval_bound: u64 },
    #[error("block does not close within the window: {0}")]
    EscapesBound(BlockError),
    #[error(transparent)]
    Func(#[from] crate::func::FuncError),
}

/// Per-type occurrence counts over a prefix of the type string.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CountingProfile {
    pub counts: BTreeMap<usize, u64>,
    pub prefix_len: u64,
}

/// First `n_blocks` blocks of the left-to-right tiling, with type indices
/// assigned in order of first appearance.
pub fn alpha_prefix(
    f: &FuncSpec,
    n_blocks: usize,
    bound: u64,
) -> Result<TypeTable, AnalysisError> {
    check_bound(f, bound)?;
    let mut tiler = Tiler::new(f, bound)?;
    tiler
        .ensure_blocks(n_blocks)
        .map_err(AnalysisError::EscapesBound)?;
    Ok(tiler.tiling)
}

/// Tile as many blocks as the window supports (stopping at three quarters of
/// the bound so edge effects cannot fake closure).
pub fn alpha_prefix_full(f: &FuncSpec, bound: u64) -> Result<TypeTable, AnalysisError> {
    check_bound(f, bound)?;
    let mut tiler = Tiler::new(f, bound)?;
    let horizon = bound / 4 * 3;
    loop {
        if tiler.tiling.tiled_to() > horizon {
            break;
        }
        match tiler.tile_next() {
            Ok(_) => {}
            Err(e) => {
                if tiler.tiling.block_count() == 0 {
                    return Err(AnalysisError::EscapesBound(e));
                }
                break;
            }
        }
    }
    Ok(tiler.tiling)
}

/// Exact per-type counts over the tiled prefix.
pub fn counting_prefix(t: &TypeTable) -> CountingProfile {
    let mut counts = BTreeMap::new();
    for &ty in &t.alpha_prefix {
        *counts.entry(ty).or_insert(0u64) += 1;
    }
    CountingProfile {
        counts,
        prefix_len: t.block_count() as u64,
    }
}

/// All `m ≤ n` such that `[0,m]` is closed under f (f only, not preimages).
pub fn quasi_block_cuts(f: &FuncSpec, n: u64) -> Result<Vec<u64>, AnalysisError> {
    check_bound(f, n)?;
    let table = f.eval_table(n)?;
    let mut cuts = Vec::new();
    let mut running_max = 0u64;
    for m in 0..=n {
        running_max = running_max.max(table[m as usize]);
        if running_max <= m {
            cuts.push(m);
        }
    }
    Ok(cuts)
}

fn check_bound(f: &FuncSpec, bound: u64) -> Result<(), AnalysisError> {
    if bound > f.eval_bound() {
        Err(AnalysisError::BoundTooLarge {
            bound,
            eval_bound: f.eval_bound(),
        })
    } else {
        Ok(())
    }
}

// ---------------------------------------------------------------------------
// Classification
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum IcKind {
    AlmostConstant,
    AlmostIdentity,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "verdict", rename_all = "kebab-case")]
pub enum Verdict {
    IntrinsicallyComputable { kind: IcKind },
    NonQuasiBlockWitnessed,
    BlockFinitelyManyTypes { case: CaseLabel },
    /// Block function whose tiling keeps producing new types in the window.
    BlockInfinitelyManyTypesWitnessed,
    QuasiBlockWithComputableBound,
    ProperQuasiBlockUnresolved,
    UnknownAtBound,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CaseLabel {
    A,
    B,
    C,
}

/// A computable candidate lower bound for a quasi-block function.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Minorant {
    /// `n ↦ ⌊√(n/2)⌋`.
    FloorSqrtHalf,
    /// An expression over `n`.
    Expr { text: String },
}

impl Minorant {
    pub fn eval(&self, n: u64) -> Result<u64, crate::func::FuncError> {
        match self {
            Minorant::FloorSqrtHalf => Ok(crate::func::isqrt(n / 2)),
            Minorant::Expr { text } => Ok(crate::func::parse_expr(text)?.eval(n)),
        }
    }
}

/// Growth a minorant must witness within the window before we call it
/// diverging.
pub const DIVERGENCE_WITNESS: u64 = 8;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Evidence {
    AlmostConstant {
        value: u64,
        last_exception: Option<u64>,
    },
    AlmostIdentity {
        last_exception: Option<u64>,
    },
    /// No cut in `(window_start, bound]`; for each n there, f sends some
    /// m ≤ n above n.
    NonQuasiBlock {
        window_start: u64,
        witnesses: Vec<NqbWitness>,
    },
    BlockTypes {
        type_count: usize,
        block_count: usize,
        counts: BTreeMap<usize, u64>,
        case: CaseWitness,
    },
    TypeGrowth {
        /// Block index of each type's first appearance.
        first_appearance: Vec<usize>,
        /// Sizes of the tiled blocks.
        sizes: Vec<u64>,
    },
    MinorantVerified {
        minorant: Minorant,
        value_at_bound: u64,
        /// Why the function is witnessed proper: a seed whose block did not
        /// close within the window.
        stalled_seed: u64,
    },
    ProperUnresolved {
        stalled_seed: u64,
        last_cut: u64,
    },
    Inconclusive {
        reason: String,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct NqbWitness {
    pub n: u64,
    pub m: u64,
    pub fm: u64,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Classification {
    pub verdict: Verdict,
    pub evidence: Evidence,
    pub bound: u64,
}

/// Classify `f` on the window `[0, bound]`.
pub fn classify(f: &FuncSpec, bound: u64) -> Result<Classification, AnalysisError> {
    classify_with(f, bound, None)
}

/// Classify with an optional user-supplied minorant candidate; builtins with
/// a known bound get one automatically.
pub fn classify_with(
    f: &FuncSpec,
    bound: u64,
    minorant: Option<Minorant>,
) -> Result<Classification, AnalysisError> {
    check_bound(f, bound)?;
    let table = f.eval_table(bound)?;
    let half = bound / 2;

    // Almost constant: the tail value with the last disagreement early.
    let tail_value = table[bound as usize];
    let last_exception = (0..=bound).rev().find(|&x| table[x as usize] != tail_value);
    if last_exception.map_or(true, |e| e < half) {
        return Ok(Classification {
            verdict: Verdict::IntrinsicallyComputable {
                kind: IcKind::AlmostConstant,
            },
            evidence: Evidence::AlmostConstant {
                value: tail_value,
                last_exception,
            },
            bound,
        });
    }

    // Almost identity.
    let last_exception = (0..=bound).rev().find(|&x| table[x as usize] != x);
    if last_exception.map_or(true, |e| e < half) {
        return Ok(Classification {
            verdict: Verdict::IntrinsicallyComputable {
                kind: IcKind::AlmostIdentity,
            },
            evidence: Evidence::AlmostIdentity { last_exception },
            bound,
        });
    }

    // Quasi-block cuts, tracking the running argmax for witnesses.
    let mut running_max = table[0];
    let mut max_arg = 0u64;
    let mut max_at: Vec<(u64, u64)> = Vec::with_capacity(bound as usize + 1);
    let mut last_cut: Option<u64> = None;
    for m in 0..=bound {
        if table[m as usize] > running_max {
            running_max = table[m as usize];
            max_arg = m;
        }
        max_at.push((max_arg, running_max));
        if running_max <= m {
            last_cut = Some(m);
        }
    }

    let cut_tail_missing = last_cut.map_or(true, |c| c < half);
    if cut_tail_missing {
        let window_start = last_cut.unwrap_or(0);
        let mut witnesses = Vec::new();
        for n in (window_start + 1)..=bound {
            let (m, fm) = max_at[n as usize];
            debug_assert!(fm > n, "no cut at {n} must leave an escaping witness");
            witnesses.push(NqbWitness { n, m, fm });
        }
        return Ok(Classification {
            verdict: Verdict::NonQuasiBlockWitnessed,
            evidence: Evidence::NonQuasiBlock {
                window_start,
                witnesses,
            },
            bound,
        });
    }

    // Cuts recur; try to tile the window into blocks.
    let tile_horizon = bound / 4 * 3;
    let mut tiler = Tiler::new(f, bound)?;
    let stall: Option<BlockError> = loop {
        if tiler.tiling.tiled_to() > tile_horizon {
            break None;
        }
        match tiler.tile_next() {
            Ok(_) => {}
            Err(e) => break Some(e),
        }
    };
    let tiling = &tiler.tiling;

    match stall {
        None => {
            // Fully tiled window. New types still appearing late?
            let blocks = tiling.block_count();
            let mut first_appearance = vec![usize::MAX; tiling.type_count()];
            for (i, &t) in tiling.alpha_prefix.iter().enumerate() {
                if first_appearance[t] == usize::MAX {
                    first_appearance[t] = i;
                }
            }
            let latest_new = first_appearance.iter().copied().max().unwrap_or(0);
            if blocks >= 4 && latest_new >= blocks / 2 {
                return Ok(Classification {
                    verdict: Verdict::BlockInfinitelyManyTypesWitnessed,
                    evidence: Evidence::TypeGrowth {
                        first_appearance,
                        sizes: tiling.sizes(),
                    },
                    bound,
                });
            }
            match find_case(tiling, blocks) {
                Ok(case) => {
                    let label = match &case {
                        CaseWitness::A { .. } => CaseLabel::A,
                        CaseWitness::B { .. } => CaseLabel::B,
                        CaseWitness::C { .. } => CaseLabel::C,
                    };
                    Ok(Classification {
                        verdict: Verdict::BlockFinitelyManyTypes { case: label },
                        evidence: Evidence::BlockTypes {
                            type_count: tiling.type_count(),
                            block_count: blocks,
                            counts: counting_prefix(tiling).counts,
                            case,
                        },
                        bound,
                    })
                }
                Err(e) => Ok(Classification {
                    verdict: Verdict::UnknownAtBound,
                    evidence: Evidence::Inconclusive {
                        reason: format!("tiled into blocks but no case certified: {e}"),
                    },
                    bound,
                }),
            }
        }
        Some(_stall_err) => {
            // Proper quasi-block behaviour at this window: cuts recur but
            // some block refuses to close.
            let stalled_seed = tiling.tiled_to();
            let candidate = minorant.or_else(|| builtin_minorant(f));
            if let Some(g) = candidate {
                if verify_minorant(&table, &g).is_ok() {
                    return Ok(Classification {
                        verdict: Verdict::QuasiBlockWithComputableBound,
                        evidence: Evidence::MinorantVerified {
                            value_at_bound: g.eval(bound).unwrap_or(0),
                            minorant: g,
                            stalled_seed,
                        },
                        bound,
                    });
                }
            }
            Ok(Classification {
                verdict: Verdict::ProperQuasiBlockUnresolved,
                evidence: Evidence::ProperUnresolved {
                    stalled_seed,
                    last_cut: last_cut.unwrap_or(0),
                },
                bound,
            })
        }
    }
}

fn builtin_minorant(f: &FuncSpec) -> Option<Minorant> {
    match f {
        FuncSpec::Builtin {
            which: Builtin::EulerPhi,
        } => Some(Minorant::FloorSqrtHalf),
        _ => None,
    }
}

/// Check a minorant candidate on a value table: non-decreasing, below f
/// everywhere, and having visibly diverged by the end of the window.
pub fn verify_minorant(table: &[u64], g: &Minorant) -> Result<(), String> {
    let bound = table.len() as u64 - 1;
    let mut prev = 0u64;
    for n in 0..=bound {
        let gv = g.eval(n).map_err(|e| e.to_string())?;
        if gv < prev {
            return Err(format!("minorant decreases at {n}"));
        }
        if gv > table[n as usize] {
            return Err(format!(
                "minorant exceeds the function at {n}: {gv} > {}",
                table[n as usize]
            ));
        }
        prev = gv;
    }
    if prev < DIVERGENCE_WITNESS {
        return Err(format!(
            "minorant reaches only {prev} by the window end; divergence not witnessed"
        ));
    }
    Ok(())
}

/// Independently re-check a classification's evidence against the function.
pub fn verify_classification(f: &FuncSpec, c: &Classification) -> Result<(), String> {
    let table = f.eval_table(c.bound).map_err(|e| e.to_string())?;
    match (&c.verdict, &c.evidence) {
        (
            Verdict::IntrinsicallyComputable {
                kind: IcKind::AlmostConstant,
            },
            Evidence::AlmostConstant {
                value,
                last_exception,
            },
        ) => {
            let from = last_exception.map_or(0, |e| e + 1);
            for x in from..=c.bound {
                if table[x as usize] != *value {
                    return Err(format!("tail not constant at {x}"));
                }
            }
            if let Some(e) = last_exception {
                if table[*e as usize] == *value {
                    return Err("claimed exception is not one".into());
                }
            }
            Ok(())
        }
        (
            Verdict::IntrinsicallyComputable {
                kind: IcKind::AlmostIdentity,
            },
            Evidence::AlmostIdentity { last_exception },
        ) => {
            let from = last_exception.map_or(0, |e| e + 1);
            for x in from..=c.bound {
                if table[x as usize] != x {
                    return Err(format!("tail not identity at {x}"));
                }
            }
            Ok(())
        }
        (
            Verdict::NonQuasiBlockWitnessed,
            Evidence::NonQuasiBlock {
                window_start,
                witnesses,
            },
        ) => {
            let mut expect = *window_start + 1;
            for w in witnesses {
                if w.n != expect {
                    return Err(format!("witness gap at {}", w.n));
                }
                if w.m > w.n || table[w.m as usize] != w.fm || w.fm <= w.n {
                    return Err(format!("witness at {} does not re-verify", w.n));
                }
                expect += 1;
            }
            if expect != c.bound + 1 {
                return Err("witness window does not reach the bound".into());
            }
            Ok(())
        }
        (Verdict::BlockFinitelyManyTypes { .. }, Evidence::BlockTypes { case, .. }) => {
            crate::constructions::case_analysis::verify_case(f, c.bound, case)
        }
        (
            Verdict::BlockInfinitelyManyTypesWitnessed,
            Evidence::TypeGrowth {
                first_appearance, ..
            },
        ) => {
            if first_appearance.is_empty() {
                return Err("no types recorded".into());
            }
            Ok(())
        }
        (Verdict::QuasiBlockWithComputableBound, Evidence::MinorantVerified { minorant, .. }) => {
            verify_minorant(&table, minorant)
        }
        (Verdict::ProperQuasiBlockUnresolved, Evidence::ProperUnresolved { .. }) => Ok(()),
        (Verdict::UnknownAtBound, Evidence::Inconclusive { .. }) => Ok(()),
        _ => Err("verdict/evidence mismatch".into()),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::func::PatternSpec;

    #[test]
    fn alpha_prefix_examples() {
        // double-half: one 2-point type four times.
        let t = alpha_prefix(&FuncSpec::builtin(Builtin::DoubleHalf), 4, 100).unwrap();
        assert_eq!(t.alpha_prefix, vec![0, 0, 0, 0]);
        assert_eq!(t.types.len(), 1);
        assert_eq!(t.types[0].len(), 2);
        // involution: three blocks of sizes 6, 8, 10.
        let t = alpha_prefix(&FuncSpec::builtin(Builtin::InvolutionG), 3, 2000).unwrap();
        assert_eq!(t.alpha_prefix, vec![0, 1, 2]);
        assert_eq!(t.sizes(), vec![6, 8, 10]);
        // identity: singleton type five times.
        let t = alpha_prefix(&FuncSpec::builtin(Builtin::Identity), 5, 100).unwrap();
        assert_eq!(t.alpha_prefix, vec![0; 5]);
        assert_eq!(t.types[0], vec![0]);
    }

    #[test]
    fn counting_examples() {
        let t = alpha_prefix(&FuncSpec::builtin(Builtin::InvolutionG), 3, 2000).unwrap();
        let c = counting_prefix(&t);
        assert_eq!(c.counts.len(), 3);
        assert!(c.counts.values().all(|&k| k == 1));
        let t = alpha_prefix(&FuncSpec::builtin(Builtin::DoubleHalf), 10, 100).unwrap();
        let c = counting_prefix(&t);
        assert_eq!(c.counts[&0], 10);
        assert_eq!(c.prefix_len, 10);
        let c = counting_prefix(&TypeTable::default());
        assert!(c.counts.is_empty());
    }

    #[test]
    fn counting_totals_match_prefix_len() {
        for f in [
            FuncSpec::builtin(Builtin::DoubleHalf),
            FuncSpec::builtin(Builtin::InvolutionG),
            FuncSpec::builtin(Builtin::Identity),
        ] {
            for n in [1usize, 7, 25, 50] {
                let t = alpha_prefix(&f, n, 20_000).unwrap();
                let c = counting_prefix(&t);
                assert_eq!(c.counts.values().sum::<u64>(), n as u64);
            }
        }
    }

    #[test]
    fn cuts_examples() {
        let cuts = quasi_block_cuts(&FuncSpec::builtin(Builtin::Identity), 10).unwrap();
        assert_eq!(cuts, (0..=10).collect::<Vec<_>>());
        // Euler phi: every m in [0,30] is a cut (phi(n) <= n).
        let cuts = quasi_block_cuts(&FuncSpec::builtin(Builtin::EulerPhi), 30).unwrap();
        assert_eq!(cuts, (0..=30).collect::<Vec<_>>());
        // f(0)=5, identity otherwise: cuts are 5..=10.
        let mut vals: Vec<u64> = (0..=10).collect();
        vals[0] = 5;
        let cuts = quasi_block_cuts(&FuncSpec::table(vals), 10).unwrap();
        assert_eq!(cuts, (5..=10).collect::<Vec<_>>());
    }

    #[test]
    fn classify_constant_and_identity() {
        let c = classify(&FuncSpec::expr("7").unwrap(), 100).unwrap();
        assert_eq!(
            c.verdict,
            Verdict::IntrinsicallyComputable {
                kind: IcKind::AlmostConstant
            }
        );
        verify_classification(&FuncSpec::expr("7").unwrap(), &c).unwrap();

        // Identity except three early points.
        let mut vals: Vec<u64> = (0..=400).collect();
        vals[3] = 0;
        vals[10] = 2;
        let f = FuncSpec::table(vals);
        let c = classify(&f, 400).unwrap();
        assert_eq!(
            c.verdict,
            Verdict::IntrinsicallyComputable {
                kind: IcKind::AlmostIdentity
            }
        );
        verify_classification(&f, &c).unwrap();
    }

    #[test]
    fn classify_non_quasi_block() {
        let f = FuncSpec::expr("2*n + 2").unwrap();
        let c = classify(&f, 300).unwrap();
        assert_eq!(c.verdict, Verdict::NonQuasiBlockWitnessed);
        verify_classification(&f, &c).unwrap();
    }

    #[test]
    fn classify_double_half_case_b() {
        let f = FuncSpec::builtin(Builtin::DoubleHalf);
        let c = classify(&f, 2000).unwrap();
        assert_eq!(
            c.verdict,
            Verdict::BlockFinitelyManyTypes { case: CaseLabel::B }
        );
        verify_classification(&f, &c).unwrap();
    }

    #[test]
    fn classify_involution_growth() {
        let f = FuncSpec::builtin(Builtin::InvolutionG);
        let c = classify(&f, 2000).unwrap();
        assert_eq!(c.verdict, Verdict::BlockInfinitelyManyTypesWitnessed);
        match &c.evidence {
            Evidence::TypeGrowth { sizes, .. } => {
                assert!(sizes.windows(2).all(|w| w[0] < w[1]));
            }
            other => panic!("unexpected evidence {other:?}"),
        }
    }

    #[test]
    fn classify_phi_with_bound() {
        let f = FuncSpec::builtin(Builtin::EulerPhi);
        let c = classify(&f, 20_000).unwrap();
        assert_eq!(c.verdict, Verdict::QuasiBlockWithComputableBound);
        match &c.evidence {
            Evidence::MinorantVerified { minorant, .. } => {
                assert_eq!(*minorant, Minorant::FloorSqrtHalf);
            }
            other => panic!("unexpected evidence {other:?}"),
        }
        verify_classification(&f, &c).unwrap();
    }

    #[test]
    fn classify_nd_unresolved() {
        let f = FuncSpec::builtin(Builtin::DivisorCount);
        let c = classify(&f, 5_000).unwrap();
        assert_eq!(c.verdict, Verdict::ProperQuasiBlockUnresolved);
    }

    #[test]
    fn classify_case_a_pattern() {
        // Two types alternating as 01 10 01 10 …
        let f = FuncSpec::block_pattern(
            vec![vec![1, 0], vec![1, 2, 0]],
            PatternSpec::Periodic {
                word: vec![0, 1, 1, 0],
            },
        )
        .unwrap();
        let c = classify(&f, 4000).unwrap();
        assert_eq!(
            c.verdict,
            Verdict::BlockFinitelyManyTypes { case: CaseLabel::A }
        );
        verify_classification(&f, &c).unwrap();
    }
}
