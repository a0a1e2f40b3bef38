//! Pushing to the right.
//!
//! The presentation is split into three contiguous parts `B ≺ C ≺ D`. The
//! transformation keeps `B` fixed, relocates `C` (kept contiguous) to a
//! position where a target condition holds against the source string, and
//! re-seats every `D` element further right on a coordinate carrying the same
//! source symbol it had before, in order. Freshly minted elements fill every
//! other coordinate, so the result is again an initial segment of the source.
//!
//! Searches are greedy: the least admissible position for `C`, then the
//! earliest symbol match for each `D` element. Budgets make the "occurs again
//! later" hypotheses finite: a search that exceeds its window is an error,
//! not a loop.

use crate::presentation::FinitePresentation;
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum PtrError {
    #[error("search budget {budget} exceeded while looking for symbol {symbol}")]
    SearchBudgetExceeded { symbol: u32, budget: u64 },
    #[error("no admissible position for C within budget {budget}")]
    UnsatisfiableWithinWindow { budget: u64 },
    #[error("source evaluation failed at {at}: {msg}")]
    SourceEval { at: u64, msg: String },
    #[error("fresh-number supplier exhausted")]
    FreshExhausted,
    #[error("invalid split: b={b} c={c} exceeds presentation length {len}")]
    BadSplit { b: usize, c: usize, len: usize },
    #[error("invalid relocation plan: {0}")]
    BadPlan(String),
}

/// An infinite string over a finite alphabet, evaluated on demand.
pub trait SourceString {
    fn symbol_at(&self, i: u64) -> Result<u32, PtrError>;
}

/// A periodic word, the simplest recurrent source.
#[derive(Debug, Clone)]
pub struct PeriodicSource(pub Vec<u32>);

impl SourceString for PeriodicSource {
    fn symbol_at(&self, i: u64) -> Result<u32, PtrError> {
        Ok(self.0[(i % self.0.len() as u64) as usize])
    }
}

/// The value string of a function spec: symbol `i` is `f(i)`.
pub struct ValueSource<'a> {
    pub f: &'a crate::func::FuncSpec,
}

impl SourceString for ValueSource<'_> {
    fn symbol_at(&self, i: u64) -> Result<u32, PtrError> {
        let v = self.f.eval(i).map_err(|e| PtrError::SourceEval {
            at: i,
            msg: e.to_string(),
        })?;
        u32::try_from(v).map_err(|_| PtrError::SourceEval {
            at: i,
            msg: format!("value {v} does not fit the symbol alphabet"),
        })
    }
}

/// A precomputed value table as a source; constructions use this on hot
/// paths so expression sources are not re-parsed per query.
pub struct TableSource<'a>(pub &'a [u64]);

impl SourceString for TableSource<'_> {
    fn symbol_at(&self, i: u64) -> Result<u32, PtrError> {
        let v = *self
            .0
            .get(i as usize)
            .ok_or(PtrError::SearchBudgetExceeded {
                symbol: u32::MAX,
                budget: self.0.len() as u64,
            })?;
        u32::try_from(v).map_err(|_| PtrError::SourceEval {
            at: i,
            msg: format!("value {v} does not fit the symbol alphabet"),
        })
    }
}

/// Contiguous split of a presentation: `B = [0,b_len)`, `C` the next
/// `c_len` positions, `D` the rest. `C` and `D` may be empty.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct PtrSplit {
    pub b_len: usize,
    pub c_len: usize,
}

impl PtrSplit {
    pub fn validate(&self, len: usize) -> Result<(), PtrError> {
        if self.b_len + self.c_len > len {
            Err(PtrError::BadSplit {
                b: self.b_len,
                c: self.c_len,
                len,
            })
        } else {
            Ok(())
        }
    }
}

/// What must hold of the source at C's landing position `p`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum TargetCondition {
    /// Symbol at `p` equals `symbol` (value condition).
    ValueIs { symbol: u32 },
    /// Symbols at `p..p+len` spell `pattern` (block-shape condition).
    PatternIs { pattern: Vec<u32> },
}

impl TargetCondition {
    pub fn holds_at(&self, p: u64, src: &dyn SourceString) -> Result<bool, PtrError> {
        match self {
            TargetCondition::ValueIs { symbol } => Ok(src.symbol_at(p)? == *symbol),
            TargetCondition::PatternIs { pattern } => {
                for (k, &s) in pattern.iter().enumerate() {
                    if src.symbol_at(p + k as u64)? != s {
                        return Ok(false);
                    }
                }
                Ok(true)
            }
        }
    }
}

/// Supplies previously unused element names, odd where the constructions
/// demand it.
pub trait FreshSupplier {
    fn next(&mut self) -> Result<u64, PtrError>;
}

/// Fresh odd numbers in increasing order.
#[derive(Debug, Clone)]
pub struct OddSupplier {
    next: u64,
}

impl OddSupplier {
    /// Start strictly above everything in `used`.
    pub fn above(used: impl IntoIterator<Item = u64>) -> OddSupplier {
        let max = used.into_iter().max().map_or(0, |m| m + 1);
        OddSupplier {
            next: if max % 2 == 0 { max + 1 } else { max },
        }
    }

    pub fn starting_at_odd(next: u64) -> OddSupplier {
        debug_assert!(next % 2 == 1);
        OddSupplier { next }
    }
}

impl FreshSupplier for OddSupplier {
    fn next(&mut self) -> Result<u64, PtrError> {
        let v = self.next;
        self.next = self.next.checked_add(2).ok_or(PtrError::FreshExhausted)?;
        Ok(v)
    }
}

/// Greedy interleaving: fillers `τ₀ σ(0) τ₁ σ(1) … τ_{m−1} σ(m−1)` forming a
/// factor of the source starting at `from`, each `σ(i)` matched at its
/// earliest occurrence. Returns the fillers and the position one past the
/// last match.
pub fn interleave_search(
    src: &dyn SourceString,
    sigma: &[u32],
    from: u64,
    budget: u64,
) -> Result<(Vec<Vec<u32>>, u64), PtrError> {
    let mut fillers = Vec::with_capacity(sigma.len());
    let mut pos = from;
    for &want in sigma {
        let mut tau = Vec::new();
        loop {
            if pos >= budget {
                return Err(PtrError::SearchBudgetExceeded {
                    symbol: want,
                    budget,
                });
            }
            let have = src.symbol_at(pos)?;
            pos += 1;
            if have == want {
                break;
            }
            tau.push(have);
        }
        fillers.push(tau);
    }
    Ok((fillers, pos))
}

/// Where each moved element lands. Coordinates in `[b_len, new_len)` not
/// listed are filled with fresh elements.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RelocationPlan {
    pub b_len: usize,
    /// New coordinate of C's first element; C stays contiguous.
    pub c_start: u64,
    pub c_len: usize,
    /// New coordinates of the D elements, strictly increasing, all past C.
    pub d_coords: Vec<u64>,
    pub new_len: u64,
}

/// Outcome summary of one application, for traces and audits.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PtrOutcome {
    pub c_start: u64,
    pub inserted: Vec<u64>,
    pub d_coords: Vec<u64>,
}

/// Mechanically apply a relocation plan, enforcing the module's shape
/// invariants. Returns the extended presentation and the fresh elements.
pub fn apply_plan(
    pres: &FinitePresentation,
    plan: &RelocationPlan,
    fresh: &mut dyn FreshSupplier,
) -> Result<(FinitePresentation, Vec<u64>), PtrError> {
    let n = pres.len();
    let b = plan.b_len;
    let c = plan.c_len;
    let d = n - b - c;
    if b + c > n {
        return Err(PtrError::BadPlan("split exceeds presentation".into()));
    }
    if plan.c_start < b as u64 {
        return Err(PtrError::BadPlan("C may not move left of B".into()));
    }
    if plan.d_coords.len() != d {
        return Err(PtrError::BadPlan("one coordinate per D element".into()));
    }
    let c_end = plan.c_start + c as u64;
    let mut prev = c_end;
    for (i, &q) in plan.d_coords.iter().enumerate() {
        if q < prev {
            return Err(PtrError::BadPlan(format!(
                "D coordinate {i} not increasing past C"
            )));
        }
        prev = q + 1;
    }
    if plan.new_len < prev.max(c_end) {
        return Err(PtrError::BadPlan("new length too small".into()));
    }
    let mut out: Vec<Option<u64>> = vec![None; plan.new_len as usize];
    for (i, &e) in pres.elements.iter().take(b).enumerate() {
        out[i] = Some(e);
    }
    for k in 0..c {
        out[(plan.c_start + k as u64) as usize] = Some(pres.elements[b + k]);
    }
    for (i, &q) in plan.d_coords.iter().enumerate() {
        out[q as usize] = Some(pres.elements[b + c + i]);
    }
    let mut inserted = Vec::new();
    let elements: Vec<u64> = out
        .into_iter()
        .map(|slot| match slot {
            Some(e) => Ok(e),
            None => {
                let x = fresh.next()?;
                inserted.push(x);
                Ok(x)
            }
        })
        .collect::<Result<_, PtrError>>()?;
    let mut next = FinitePresentation::new(elements, pres.stage);
    next.fvals = pres.fvals.clone();
    Ok((next, inserted))
}

/// Search a landing position for `C` satisfying `target`, greedily match the
/// `D` symbols after it, and apply the resulting plan.
///
/// With empty `C` and `D` the presentation is returned unchanged.
pub fn ptr_apply(
    pres: &FinitePresentation,
    src: &dyn SourceString,
    split: PtrSplit,
    target: &TargetCondition,
    fresh: &mut dyn FreshSupplier,
    budget: u64,
) -> Result<(FinitePresentation, PtrOutcome), PtrError> {
    split.validate(pres.len())?;
    let b = split.b_len;
    let c = split.c_len;
    let n = pres.len();
    if c == 0 {
        // Nothing to relocate: the module is the identity.
        return Ok((
            pres.clone(),
            PtrOutcome {
                c_start: b as u64,
                inserted: vec![],
                d_coords: (b as u64..n as u64).collect(),
            },
        ));
    }
    // Required symbols of the D elements at their current coordinates.
    let mut d_syms = Vec::with_capacity(n - b - c);
    for i in (b + c)..n {
        d_syms.push(src.symbol_at(i as u64)?);
    }
    let mut p = b as u64;
    loop {
        if p >= budget {
            return Err(PtrError::UnsatisfiableWithinWindow { budget });
        }
        if target.holds_at(p, src)? {
            match interleave_search(src, &d_syms, p + c as u64, budget) {
                Ok((_fillers, end)) => {
                    // Reconstruct the matched coordinates from the greedy walk.
                    let mut d_coords = Vec::with_capacity(d_syms.len());
                    let mut pos = p + c as u64;
                    for &want in &d_syms {
                        while src.symbol_at(pos)? != want {
                            pos += 1;
                        }
                        d_coords.push(pos);
                        pos += 1;
                    }
                    debug_assert_eq!(pos, end);
                    let plan = RelocationPlan {
                        b_len: b,
                        c_start: p,
                        c_len: c,
                        d_coords: d_coords.clone(),
                        new_len: end.max(p + c as u64),
                    };
                    let (next, inserted) = apply_plan(pres, &plan, fresh)?;
                    return Ok((
                        next,
                        PtrOutcome {
                            c_start: p,
                            inserted,
                            d_coords,
                        },
                    ));
                }
                Err(PtrError::SearchBudgetExceeded { .. }) => {
                    // This landing position starves D; try the next one.
                }
                Err(e) => return Err(e),
            }
        }
        p += 1;
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pres(elements: Vec<u64>) -> FinitePresentation {
        FinitePresentation::new(elements, 0)
    }

    #[test]
    fn interleave_trivial_and_derived() {
        let alpha = PeriodicSource(vec![0, 1]);
        // sigma "0" from 0: matches immediately, empty filler.
        let (fillers, end) = interleave_search(&alpha, &[0], 0, 100).unwrap();
        assert_eq!(fillers, vec![Vec::<u32>::new()]);
        assert_eq!(end, 1);
        // sigma "11": oracle says fillers "0","0".
        let (fillers, end) = interleave_search(&alpha, &[1, 1], 0, 100).unwrap();
        assert_eq!(fillers, vec![vec![0], vec![0]]);
        assert_eq!(end, 4);
        // alphabet of three: "20" from 0 over (012)^ω.
        let alpha = PeriodicSource(vec![0, 1, 2]);
        let (fillers, end) = interleave_search(&alpha, &[2, 0], 0, 100).unwrap();
        assert_eq!(fillers, vec![vec![0, 1], vec![]]);
        assert_eq!(end, 4);
    }

    /// Validates the factor by direct substring extraction.
    #[test]
    fn interleave_revalidates() {
        let alpha = PeriodicSource(vec![2, 0, 1, 1]);
        let sigma = [1u32, 2, 0];
        let (fillers, end) = interleave_search(&alpha, &sigma, 3, 1000).unwrap();
        let mut rebuilt = Vec::new();
        for (i, tau) in fillers.iter().enumerate() {
            rebuilt.extend_from_slice(tau);
            rebuilt.push(sigma[i]);
        }
        let direct: Vec<u32> = (3..end).map(|i| alpha.symbol_at(i).unwrap()).collect();
        assert_eq!(rebuilt, direct);
    }

    #[test]
    fn interleave_budget_error() {
        let alpha = PeriodicSource(vec![0, 1]);
        match interleave_search(&alpha, &[7], 0, 50) {
            Err(PtrError::SearchBudgetExceeded { symbol: 7, .. }) => {}
            other => panic!("expected budget error, got {other:?}"),
        }
    }

    #[test]
    fn empty_c_is_identity() {
        let p = pres(vec![10, 11, 12]);
        let src = PeriodicSource(vec![0]);
        let split = PtrSplit { b_len: 3, c_len: 0 };
        let (q, _) = ptr_apply(
            &p,
            &src,
            split,
            &TargetCondition::ValueIs { symbol: 0 },
            &mut OddSupplier::starting_at_odd(101),
            1000,
        )
        .unwrap();
        assert_eq!(q.elements, p.elements);
    }

    #[test]
    fn singleton_c_meets_value_condition() {
        // Source 0101…; element 6 sits at position 2 with symbol 0; move it
        // so its symbol becomes 1, keeping the D element's symbol.
        let p = pres(vec![1, 3, 6, 5]);
        let src = PeriodicSource(vec![0, 1]);
        let split = PtrSplit { b_len: 2, c_len: 1 };
        let (q, out) = ptr_apply(
            &p,
            &src,
            split,
            &TargetCondition::ValueIs { symbol: 1 },
            &mut OddSupplier::starting_at_odd(101),
            1000,
        )
        .unwrap();
        assert_eq!(out.c_start, 3);
        assert_eq!(q.elements[..2], [1, 3]);
        assert_eq!(q.position_of(6), Some(3));
        // D element 5 had symbol of position 3 = 1; it lands on symbol 1.
        let d_new = q.position_of(5).unwrap() as u64;
        assert_eq!(src.symbol_at(d_new).unwrap(), 1);
        // Fresh elements fill the gap and are odd and new.
        for &x in &out.inserted {
            assert_eq!(x % 2, 1);
            assert!(!p.elements.contains(&x));
        }
    }

    #[test]
    fn d_symbols_preserved_pattern_target() {
        let src = PeriodicSource(vec![0, 1, 2, 1]);
        let p = pres(vec![100, 101, 102, 103, 104, 105]);
        let split = PtrSplit { b_len: 1, c_len: 2 };
        let before: Vec<u32> = (0..6).map(|i| src.symbol_at(i).unwrap()).collect();
        let (q, out) = ptr_apply(
            &p,
            &src,
            split,
            &TargetCondition::PatternIs {
                pattern: vec![2, 1],
            },
            &mut OddSupplier::starting_at_odd(1001),
            10_000,
        )
        .unwrap();
        // Target holds at C's landing site.
        assert_eq!(src.symbol_at(out.c_start).unwrap(), 2);
        assert_eq!(src.symbol_at(out.c_start + 1).unwrap(), 1);
        // C contiguous.
        let c0 = q.position_of(101).unwrap();
        assert_eq!(q.position_of(102), Some(c0 + 1));
        // Every D element kept its symbol.
        for (i, &d) in [103u64, 104, 105].iter().enumerate() {
            let at = q.position_of(d).unwrap() as u64;
            assert_eq!(src.symbol_at(at).unwrap(), before[3 + i]);
        }
    }

    #[test]
    fn bad_plans_rejected() {
        let p = pres(vec![1, 2, 3]);
        let mut fresh = OddSupplier::starting_at_odd(11);
        let plan = RelocationPlan {
            b_len: 1,
            c_start: 0,
            c_len: 1,
            d_coords: vec![5],
            new_len: 6,
        };
        assert!(apply_plan(&p, &plan, &mut fresh).is_err());
        let plan = RelocationPlan {
            b_len: 1,
            c_start: 2,
            c_len: 1,
            d_coords: vec![2],
            new_len: 6,
        };
        assert!(apply_plan(&p, &plan, &mut fresh).is_err());
    }
}
