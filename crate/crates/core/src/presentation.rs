//! Finite stages of a computable copy of `(ω,<)`.
//!
//! A stage is a list of distinct naturals in copy order; the element at
//! position `i` names the i-th least point, so the source function induces
//! values by position: the value of the element at `i` is the element at
//! position `f(i)`, when that position exists. `fvals` records values the
//! construction has committed to never change again.

use crate::func::FuncSpec;
use serde::{Deserialize, Serialize};
use std::collections::{BTreeMap, HashMap};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize, Default)]
pub struct FinitePresentation {
    pub elements: Vec<u64>,
    /// Committed element-form values: `x ↦ f_A(x)`.
    pub fvals: BTreeMap<u64, u64>,
    pub stage: u64,
}

impl FinitePresentation {
    pub fn new(elements: Vec<u64>, stage: u64) -> Self {
        debug_assert!(distinct(&elements));
        FinitePresentation {
            elements,
            fvals: BTreeMap::new(),
            stage,
        }
    }

    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }

    pub fn position_of(&self, x: u64) -> Option<usize> {
        self.elements.iter().position(|&e| e == x)
    }

    /// Position lookup table for hot paths.
    pub fn index(&self) -> HashMap<u64, usize> {
        self.elements
            .iter()
            .enumerate()
            .map(|(i, &e)| (e, i))
            .collect()
    }

    /// Value of the source function at position `i`, as a position.
    pub fn value_position(&self, f: &FuncSpec, i: usize) -> Option<u64> {
        f.eval(i as u64).ok()
    }

    /// Induced element-form value of the element at position `i`:
    /// the element sitting at position `f(i)`, if defined yet.
    pub fn induced_at(&self, f: &FuncSpec, i: usize) -> Option<u64> {
        let v = f.eval(i as u64).ok()?;
        self.elements.get(v as usize).copied()
    }

    /// Induced element-form value of element `x`.
    pub fn induced_value(&self, f: &FuncSpec, x: u64) -> Option<u64> {
        self.induced_at(f, self.position_of(x)?)
    }

    /// Source value (a natural) at the position of `x`.
    pub fn value_symbol(&self, f: &FuncSpec, x: u64) -> Option<u64> {
        f.eval(self.position_of(x)? as u64).ok()
    }

    /// Record a committed value; returns false if it contradicts an earlier
    /// commitment.
    pub fn commit(&mut self, x: u64, v: u64) -> bool {
        match self.fvals.get(&x) {
            Some(&old) => old == v,
            None => {
                self.fvals.insert(x, v);
                true
            }
        }
    }

    /// Check every committed value against the induced map.
    pub fn committed_consistent(&self, f: &FuncSpec) -> bool {
        let idx = self.index();
        self.fvals.iter().all(|(&x, &v)| {
            idx.get(&x)
                .and_then(|&i| self.induced_at(f, i))
                .map_or(false, |iv| iv == v)
        })
    }

    /// True iff `other`'s elements occur in `self` as a subsequence in the
    /// same relative order (stage monotonicity).
    pub fn extends(&self, other: &FinitePresentation) -> bool {
        let mut it = self.elements.iter();
        other.elements.iter().all(|x| it.any(|y| y == x))
    }
}

fn distinct(xs: &[u64]) -> bool {
    let mut seen = std::collections::HashSet::new();
    xs.iter().all(|x| seen.insert(*x))
}
