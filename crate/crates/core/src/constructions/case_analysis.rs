//! Case analysis of a type string prefix.
//!
//! A block function with finitely many recurring types falls into one of
//! three construction cases, detected here with window-certified evidence:
//!
//! * **B** — exactly one type still occurs in the tail;
//! * **C** — some symbol `b` has flanked runs `d bᵐ e` with `m` unbounded in
//!   the window;
//! * **A** — two distinct permuted strings both recur.
//!
//! Detection order is B, C, A: a string with unbounded flanked runs may also
//! satisfy the permuted-pair condition, and the run witness is the one whose
//! construction needs it. All recurrence claims are certified only up to the
//! window and the returned occurrence positions re-verify directly.

use crate::block::TypeTable;
use crate::func::FuncSpec;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum CaseError {
    #[error("no case certified within a window of {window} blocks")]
    InconclusiveAtWindow { window: usize },
    #[error("window {window} exceeds tiled prefix {have}")]
    WindowTooLarge { window: usize, have: usize },
}

/// Minimum occurrences before a factor counts as recurring in the window.
const MIN_RECUR: usize = 3;
/// Longest factor length tried for case A.
const MAX_FACTOR_LEN: usize = 4;
/// Distinct increasing run lengths required for a case-C witness.
const MIN_RUN_GROWTH: usize = 3;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "case", rename_all = "kebab-case")]
pub enum CaseWitness {
    A {
        sigma: Vec<usize>,
        tau: Vec<usize>,
        /// `tau[i] = sigma[perm[i]]`.
        perm: Vec<usize>,
        /// First position where the strings differ.
        first_diff: usize,
        sigma_occurrences: Vec<u64>,
        tau_occurrences: Vec<u64>,
    },
    B {
        type_index: usize,
        /// Every block from this coordinate on has the type, in the window.
        tail_from: u64,
        occurrences_in_tail: u64,
    },
    C {
        d: usize,
        b: usize,
        e: usize,
        /// Record-breaking flanked runs: strictly increasing `m` with the
        /// coordinate of the run's first `b`.
        occurrences: Vec<RunOccurrence>,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct RunOccurrence {
    pub m: u64,
    /// Block coordinate of the first `b` of the run (the `d` sits just left).
    pub coord: u64,
}

/// Decide which construction case the tiled prefix certifies.
pub fn find_case(t: &TypeTable, window: usize) -> Result<CaseWitness, CaseError> {
    if window > t.block_count() {
        return Err(CaseError::WindowTooLarge {
            window,
            have: t.block_count(),
        });
    }
    let alpha = &t.alpha_prefix[..window];
    if let Some(w) = detect_b(alpha) {
        return Ok(w);
    }
    if let Some(w) = detect_c(alpha) {
        return Ok(w);
    }
    if let Some(w) = detect_a(alpha) {
        return Ok(w);
    }
    Err(CaseError::InconclusiveAtWindow { window })
}

fn detect_b(alpha: &[usize]) -> Option<CaseWitness> {
    let w = alpha.len();
    if w < 4 {
        return None;
    }
    let tail_start = w - w / 4;
    let k = alpha[w - 1];
    if alpha[tail_start..].iter().any(|&t| t != k) {
        return None;
    }
    let occ = alpha[tail_start..].len() as u64;
    if (occ as usize) < MIN_RECUR {
        return None;
    }
    // Certified tail start: the last non-k position plus one.
    let tail_from = alpha.iter().rposition(|&t| t != k).map_or(0, |p| p + 1);
    Some(CaseWitness::B {
        type_index: k,
        tail_from: tail_from as u64,
        occurrences_in_tail: (w - tail_from) as u64,
    })
}

fn detect_c(alpha: &[usize]) -> Option<CaseWitness> {
    let w = alpha.len();
    // Maximal runs, grouped by (flank-left, run-symbol, flank-right).
    let mut groups: BTreeMap<(usize, usize, usize), Vec<RunOccurrence>> = BTreeMap::new();
    let mut i = 1usize;
    while i + 1 < w {
        let b = alpha[i];
        if alpha[i - 1] != b {
            let start = i;
            let mut j = i;
            while j < w && alpha[j] == b {
                j += 1;
            }
            if j < w && alpha[j] != b {
                let d = alpha[start - 1];
                let e = alpha[j];
                if d != b && e != b {
                    groups.entry((d, b, e)).or_default().push(RunOccurrence {
                        m: (j - start) as u64,
                        coord: start as u64,
                    });
                }
            }
            i = j;
        } else {
            i += 1;
        }
    }
    let mut best: Option<(u64, (usize, usize, usize), Vec<RunOccurrence>)> = None;
    for ((d, b, e), occs) in groups {
        // Record-breaking subsequence in position order.
        let mut records = Vec::new();
        let mut top = 0u64;
        for o in &occs {
            if o.m > top {
                top = o.m;
                records.push(*o);
            }
        }
        let grows = records.len() >= MIN_RUN_GROWTH
            && records.last().map_or(false, |r| r.coord as usize >= w / 2);
        if grows {
            let max_m = records.last().unwrap().m;
            if best.as_ref().map_or(true, |(bm, _, _)| max_m > *bm) {
                best = Some((max_m, (d, b, e), records));
            }
        }
    }
    best.map(|(_, (d, b, e), occurrences)| CaseWitness::C {
        d,
        b,
        e,
        occurrences,
    })
}

fn detect_a(alpha: &[usize]) -> Option<CaseWitness> {
    let w = alpha.len();
    for len in 2..=MAX_FACTOR_LEN.min(w / 2) {
        let mut positions: BTreeMap<&[usize], Vec<u64>> = BTreeMap::new();
        for i in 0..=(w - len) {
            positions
                .entry(&alpha[i..i + len])
                .or_default()
                .push(i as u64);
        }
        // Recurring = enough occurrences with a late one.
        let recurring: Vec<(&[usize], &Vec<u64>)> = positions
            .iter()
            .filter(|(_, occ)| {
                occ.len() >= MIN_RECUR && *occ.last().unwrap() as usize >= w - w / 4 - len
            })
            .map(|(f, occ)| (*f, occ))
            .collect();
        // Group by sorted multiset, look for two distinct members.
        let mut by_multiset: BTreeMap<Vec<usize>, Vec<usize>> = BTreeMap::new();
        for (idx, (f, _)) in recurring.iter().enumerate() {
            let mut key = f.to_vec();
            key.sort_unstable();
            by_multiset.entry(key).or_default().push(idx);
        }
        for members in by_multiset.values() {
            if members.len() >= 2 {
                let (sigma, s_occ) = recurring[members[0]];
                let (tau, t_occ) = recurring[members[1]];
                let perm = permutation_between(sigma, tau);
                let first_diff = sigma
                    .iter()
                    .zip(tau)
                    .position(|(a, b)| a != b)
                    .expect("distinct strings differ somewhere");
                return Some(CaseWitness::A {
                    sigma: sigma.to_vec(),
                    tau: tau.to_vec(),
                    perm,
                    first_diff,
                    sigma_occurrences: s_occ.clone(),
                    tau_occurrences: t_occ.clone(),
                });
            }
        }
    }
    None
}

/// Some permutation h with `tau[i] = sigma[h(i)]`; greedy by occurrence.
fn permutation_between(sigma: &[usize], tau: &[usize]) -> Vec<usize> {
    let mut used = vec![false; sigma.len()];
    tau.iter()
        .map(|&t| {
            let j = sigma
                .iter()
                .enumerate()
                .position(|(j, &s)| s == t && !used[j])
                .expect("tau is a permutation of sigma");
            used[j] = true;
            j
        })
        .collect()
}

/// Re-verify a case witness against a fresh tiling of the function.
pub fn verify_case(f: &FuncSpec, bound: u64, case: &CaseWitness) -> Result<(), String> {
    let table = crate::analysis::alpha_prefix_full(f, bound).map_err(|e| e.to_string())?;
    let alpha = &table.alpha_prefix;
    let at = |i: u64| -> Result<usize, String> {
        alpha
            .get(i as usize)
            .copied()
            .ok_or_else(|| format!("occurrence {i} beyond re-tiled window"))
    };
    match case {
        CaseWitness::A {
            sigma,
            tau,
            perm,
            first_diff,
            sigma_occurrences,
            tau_occurrences,
        } => {
            if sigma == tau || sigma.len() != tau.len() {
                return Err("sigma and tau must be distinct strings of one length".into());
            }
            for (i, &p) in perm.iter().enumerate() {
                if tau[i] != sigma[p] {
                    return Err("perm does not carry sigma to tau".into());
                }
            }
            if sigma[*first_diff] == tau[*first_diff] {
                return Err("first_diff does not differ".into());
            }
            for &p in sigma_occurrences {
                for (k, &s) in sigma.iter().enumerate() {
                    if at(p + k as u64)? != s {
                        return Err(format!("sigma does not occur at {p}"));
                    }
                }
            }
            for &p in tau_occurrences {
                for (k, &s) in tau.iter().enumerate() {
                    if at(p + k as u64)? != s {
                        return Err(format!("tau does not occur at {p}"));
                    }
                }
            }
            Ok(())
        }
        CaseWitness::B {
            type_index,
            tail_from,
            ..
        } => {
            for (i, &t) in alpha.iter().enumerate().skip(*tail_from as usize) {
                if t != *type_index {
                    return Err(format!("tail has a foreign type at block {i}"));
                }
            }
            Ok(())
        }
        CaseWitness::C {
            d,
            b,
            e,
            occurrences,
        } => {
            let mut prev = 0u64;
            for o in occurrences {
                if o.m <= prev && prev != 0 {
                    return Err("run lengths are not strictly increasing".into());
                }
                prev = o.m;
                if o.coord == 0 {
                    return Err("run cannot start at the first block".into());
                }
                if at(o.coord - 1)? != *d || at(o.coord + o.m)? != *e {
                    return Err(format!("flanks do not re-verify at {}", o.coord));
                }
                for k in 0..o.m {
                    if at(o.coord + k)? != *b {
                        return Err(format!("run symbol fails at {}", o.coord + k));
                    }
                }
            }
            Ok(())
        }
    }
}
