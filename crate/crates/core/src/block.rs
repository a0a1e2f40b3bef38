//! f-blocks: finite intervals closed under a function and its preimages,
//! their isomorphism types, embedding tests, and the left-to-right tiling of
//! an initial segment into consecutive blocks.
//!
//! Block-ness is undecidable in general, so every closure query carries an
//! explicit window `[0, bound]` and the answer is three-valued: a closed
//! block, an escape witness, or unknown-at-bound (the closure touched the
//! window edge, so preimages past the window cannot be audited).

use crate::func::{FuncError, FuncSpec};
use serde::{Deserialize, Serialize};
use std::collections::HashMap;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum BlockError {
    /// A value left the window: `f(from) = to > bound`.
    #[error("closure escapes the window: f({from}) = {to} exceeds bound {bound}")]
    Escapes { from: u64, to: u64, bound: u64 },
    /// Closure stabilized touching the window edge; preimages beyond the
    /// bound cannot be ruled out.
    #[error("closure of {seed} reached the window edge {hi}; closed-ness unknown at this bound")]
    UnknownAtBound { seed: u64, hi: u64 },
    #[error("seed {seed} exceeds bound {bound}")]
    SeedBeyondBound { seed: u64, bound: u64 },
    /// The closure of a tile seed reached below the tile start, so the
    /// previously tiled prefix was not closed after all.
    #[error("tile at {start} overlaps earlier blocks (closure reached {lo})")]
    TilingOverlap { start: u64, lo: u64 },
    #[error(transparent)]
    Eval(#[from] FuncError),
}

/// A finite interval `[lo, hi]` together with the restriction of f to it.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FBlock {
    pub lo: u64,
    pub hi: u64,
    /// `fmap[i] = f(lo + i)`, always within `[lo, hi]`.
    pub fmap: Vec<u64>,
}

impl FBlock {
    pub fn len(&self) -> usize {
        self.fmap.len()
    }

    pub fn is_empty(&self) -> bool {
        self.fmap.is_empty()
    }

    /// Canonical shape: images translated to base offset 0. Two blocks are
    /// isomorphic iff their shapes are equal, so shapes key type tables.
    pub fn shape(&self) -> Vec<u64> {
        self.fmap.iter().map(|&v| v - self.lo).collect()
    }

    /// Build a block at `lo` from a local shape (offset images).
    pub fn from_shape(lo: u64, shape: &[u64]) -> FBlock {
        FBlock {
            lo,
            hi: lo + shape.len() as u64 - 1,
            fmap: shape.iter().map(|&o| lo + o).collect(),
        }
    }
}

/// The minimal interval containing `a` that is closed under f and under
/// f-preimages within `[0, bound]`.
pub fn block_of(f: &FuncSpec, a: u64, bound: u64) -> Result<FBlock, BlockError> {
    if a > bound {
        return Err(BlockError::SeedBeyondBound { seed: a, bound });
    }
    let table = f.eval_table(bound)?;
    block_of_table(&table, a, bound)
}

/// Same closure on a precomputed value table (`table[x] = f(x)` for x ≤ bound).
pub fn block_of_table(table: &[u64], a: u64, bound: u64) -> Result<FBlock, BlockError> {
    debug_assert!(table.len() as u64 > bound);
    let mut lo = a;
    let mut hi = a;
    loop {
        let mut changed = false;
        // Image closure.
        let mut x = lo;
        while x <= hi {
            let y = table[x as usize];
            if y > bound {
                return Err(BlockError::Escapes {
                    from: x,
                    to: y,
                    bound,
                });
            }
            if y < lo {
                lo = y;
                changed = true;
            }
            if y > hi {
                hi = y;
                changed = true;
            }
            x += 1;
        }
        // Preimage closure within the window.
        for (y, &v) in table.iter().enumerate().take(bound as usize + 1) {
            let y = y as u64;
            if v >= lo && v <= hi {
                if y < lo {
                    lo = y;
                    changed = true;
                }
                if y > hi {
                    hi = y;
                    changed = true;
                }
            }
        }
        if !changed {
            break;
        }
    }
    if hi == bound {
        return Err(BlockError::UnknownAtBound { seed: a, hi });
    }
    Ok(FBlock {
        lo,
        hi,
        fmap: table[lo as usize..=hi as usize].to_vec(),
    })
}

/// True iff the unique order isomorphism (translation) between the two
/// intervals transports one function onto the other.
pub fn iso_type(b1: &FBlock, b2: &FBlock) -> bool {
    b1.shape() == b2.shape()
}

/// True iff some order-preserving injection of `b1`'s interval into `b2`'s
/// transports `fmap₁` into (the restriction of) `fmap₂`. Backtracking over
/// strictly increasing assignments with consistency pruning.
pub fn embeds(b1: &FBlock, b2: &FBlock) -> bool {
    let la = b1.len();
    let lb = b2.len();
    if la == 0 {
        return true;
    }
    if la > lb {
        return false;
    }
    let fa: Vec<usize> = b1.shape().iter().map(|&v| v as usize).collect();
    let fb: Vec<usize> = b2.shape().iter().map(|&v| v as usize).collect();
    let mut map: Vec<usize> = vec![usize::MAX; la];
    search(&fa, &fb, &mut map, 0, 0)
}

fn search(fa: &[usize], fb: &[usize], map: &mut Vec<usize>, i: usize, min_img: usize) -> bool {
    if i == fa.len() {
        return true;
    }
    // Enough room for the remaining points.
    let slack = fb.len() - (fa.len() - i);
    for j in min_img..=slack {
        map[i] = j;
        if consistent(fa, fb, map, i) && search(fa, fb, map, i + 1, j + 1) {
            return true;
        }
    }
    map[i] = usize::MAX;
    false
}

fn consistent(fa: &[usize], fb: &[usize], map: &[usize], upto: usize) -> bool {
    let frontier = map[upto];
    for k in 0..=upto {
        let t = fa[k];
        let img = fb[map[k]];
        if t <= upto {
            // Both endpoints assigned: must commute.
            if img != map[t] {
                return false;
            }
        } else {
            // f(k) not assigned yet; its image is forced to fb[map[k]], which
            // must still be available above the current frontier.
            if img <= frontier {
                return false;
            }
        }
    }
    true
}

/// A 1-1 enumeration of block shapes together with the prefix of the type
/// string and the spans each block occupies.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize, Default)]
pub struct TypeTable {
    /// Canonical shapes in order of first appearance.
    pub types: Vec<Vec<u64>>,
    /// `alpha_prefix[i]` = type index of the i-th block from the left.
    pub alpha_prefix: Vec<usize>,
    /// `spans[i] = (lo, hi)` of the i-th block.
    pub spans: Vec<(u64, u64)>,
}

impl TypeTable {
    pub fn block_count(&self) -> usize {
        self.alpha_prefix.len()
    }

    pub fn type_count(&self) -> usize {
        self.types.len()
    }

    pub fn sizes(&self) -> Vec<u64> {
        self.alpha_prefix
            .iter()
            .map(|&t| self.types[t].len() as u64)
            .collect()
    }

    pub fn block(&self, i: usize) -> FBlock {
        FBlock::from_shape(self.spans[i].0, &self.types[self.alpha_prefix[i]])
    }

    /// Index of the block whose span contains `x`, if tiled.
    pub fn block_index_of(&self, x: u64) -> Option<usize> {
        match self.spans.binary_search_by(|&(lo, hi)| {
            if x < lo {
                std::cmp::Ordering::Greater
            } else if x > hi {
                std::cmp::Ordering::Less
            } else {
                std::cmp::Ordering::Equal
            }
        }) {
            Ok(i) => Some(i),
            Err(_) => None,
        }
    }

    /// First coordinate not covered by the tiling.
    pub fn tiled_to(&self) -> u64 {
        self.spans.last().map(|&(_, hi)| hi + 1).unwrap_or(0)
    }
}

/// Incremental left-to-right tiler of `(ω,<,f)` into consecutive blocks,
/// with an O(1) shape lookup for type indices.
#[derive(Debug)]
pub struct Tiler {
    table: Vec<u64>,
    bound: u64,
    shape_index: HashMap<Vec<u64>, usize>,
    pub tiling: TypeTable,
}

impl Tiler {
    pub fn new(f: &FuncSpec, bound: u64) -> Result<Tiler, BlockError> {
        let table = f.eval_table(bound)?;
        Ok(Tiler {
            table,
            bound,
            shape_index: HashMap::new(),
            tiling: TypeTable::default(),
        })
    }

    /// Tile the next block; errors propagate escape/unknown outcomes.
    pub fn tile_next(&mut self) -> Result<usize, BlockError> {
        let start = self.tiling.tiled_to();
        if start > self.bound {
            return Err(BlockError::SeedBeyondBound {
                seed: start,
                bound: self.bound,
            });
        }
        let b = block_of_table(&self.table, start, self.bound)?;
        if b.lo != start {
            return Err(BlockError::TilingOverlap { start, lo: b.lo });
        }
        let shape = b.shape();
        let next_idx = self.tiling.types.len();
        let idx = *self.shape_index.entry(shape.clone()).or_insert(next_idx);
        if idx == next_idx {
            self.tiling.types.push(shape);
        }
        self.tiling.alpha_prefix.push(idx);
        self.tiling.spans.push((b.lo, b.hi));
        Ok(idx)
    }

    /// Ensure at least `n` blocks are tiled.
    pub fn ensure_blocks(&mut self, n: usize) -> Result<(), BlockError> {
        while self.tiling.block_count() < n {
            self.tile_next()?;
        }
        Ok(())
    }

    /// Type symbol at block coordinate `i`, tiling on demand.
    pub fn symbol_at(&mut self, i: u64) -> Result<usize, BlockError> {
        self.ensure_blocks(i as usize + 1)?;
        Ok(self.tiling.alpha_prefix[i as usize])
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::func::Builtin;
    use proptest::prelude::*;
    use std::collections::BTreeSet;

    /// Independent closure oracle: set-based saturation, no interval logic.
    fn brute_block(table: &[u64], a: u64, bound: u64) -> Option<(u64, u64)> {
        let mut set = BTreeSet::from([a]);
        loop {
            let lo = *set.iter().next().unwrap();
            let hi = *set.iter().last().unwrap();
            let mut next = set.clone();
            for x in lo..=hi {
                next.insert(x);
                let y = table[x as usize];
                if y > bound {
                    return None;
                }
                next.insert(y);
            }
            for y in 0..=bound {
                let v = table[y as usize];
                if v >= lo && v <= hi {
                    next.insert(y);
                }
            }
            if next == set {
                return Some((lo, hi));
            }
            set = next;
        }
    }

    #[test]
    fn identity_fixed_singleton() {
        let f = FuncSpec::builtin(Builtin::Identity);
        let b = block_of(&f, 7, 100).unwrap();
        assert_eq!((b.lo, b.hi), (7, 7));
    }

    #[test]
    fn involution_block_of_least_element_is_j0() {
        // The tiling starts the first J-structure at 0, so the block of the
        // least element has 6 points; interior fixed points are singletons.
        let g = FuncSpec::builtin(Builtin::InvolutionG);
        let b = block_of(&g, 0, 200).unwrap();
        assert_eq!((b.lo, b.hi), (0, 5));
        assert_eq!(b.len(), 6);
        // Shape matches the J₀ structure: pairs (0,3),(2,5); fixed 1,4.
        assert_eq!(b.shape(), vec![3, 1, 5, 0, 4, 2]);
        let fixed = block_of(&g, 1, 200).unwrap();
        assert_eq!((fixed.lo, fixed.hi), (1, 1));
    }

    #[test]
    fn double_half_block_derived() {
        // Oracle: brute-force closure over [0,100].
        let f = FuncSpec::builtin(Builtin::DoubleHalf);
        let table = f.eval_table(100).unwrap();
        assert_eq!(brute_block(&table, 5, 100), Some((4, 5)));
        let b = block_of(&f, 5, 100).unwrap();
        assert_eq!((b.lo, b.hi), (4, 5));
    }

    #[test]
    fn escape_and_unknown_outcomes() {
        // f(3) = 500 escapes bound 100.
        let mut vals: Vec<u64> = (0..=100).collect();
        vals[3] = 500;
        let f = FuncSpec::table(vals);
        match block_of(&f, 3, 100) {
            Err(BlockError::Escapes { from: 3, to: 500, .. }) => {}
            other => panic!("expected escape, got {other:?}"),
        }
        // Constant 0 pulls every point of the window into the block of 0.
        let f = FuncSpec::table(vec![0; 101]);
        match block_of(&f, 0, 100) {
            Err(BlockError::UnknownAtBound { hi: 100, .. }) => {}
            other => panic!("expected unknown-at-bound, got {other:?}"),
        }
    }

    #[test]
    fn minimality_of_returned_block() {
        // Removing either endpoint breaks closure.
        let g = FuncSpec::builtin(Builtin::InvolutionG);
        let table = g.eval_table(200).unwrap();
        let b = block_of(&g, 0, 200).unwrap();
        let closed = |lo: u64, hi: u64| -> bool {
            (lo..=hi).all(|x| {
                let y = table[x as usize];
                y >= lo && y <= hi
            }) && (0..=200u64).all(|y| {
                let v = table[y as usize];
                !(v >= lo && v <= hi) || (y >= lo && y <= hi)
            })
        };
        assert!(closed(b.lo, b.hi));
        if b.lo < b.hi {
            assert!(!closed(b.lo + 1, b.hi));
            assert!(!closed(b.lo, b.hi - 1));
        }
    }

    #[test]
    fn j_structures_iso_and_translation() {
        let g = FuncSpec::builtin(Builtin::InvolutionG);
        let j0 = block_of(&g, 0, 500).unwrap();
        let j1 = block_of(&g, 6, 500).unwrap();
        assert_eq!(j0.len(), 6);
        assert_eq!(j1.len(), 8);
        assert!(!iso_type(&j0, &j1));
        // Translation of J₀ to another base is isomorphic.
        let moved = FBlock::from_shape(11, &j0.shape());
        assert!(iso_type(&j0, &moved));
        assert!(embeds(&j0, &j0));
    }

    /// Exhaustive embedding oracle: enumerate all strictly increasing maps.
    fn embeds_brute(b1: &FBlock, b2: &FBlock) -> bool {
        let la = b1.len();
        let lb = b2.len();
        if la > lb {
            return false;
        }
        let fa: Vec<usize> = b1.shape().iter().map(|&v| v as usize).collect();
        let fb: Vec<usize> = b2.shape().iter().map(|&v| v as usize).collect();
        let mut comb: Vec<usize> = (0..la).collect();
        loop {
            let ok = (0..la).all(|i| fb[comb[i]] == comb[fa[i]]);
            if ok {
                return true;
            }
            // next combination
            let mut i = la;
            loop {
                if i == 0 {
                    return false;
                }
                i -= 1;
                if comb[i] != i + lb - la {
                    break;
                }
                if i == 0 {
                    return false;
                }
            }
            comb[i] += 1;
            for k in i + 1..la {
                comb[k] = comb[k - 1] + 1;
            }
        }
    }

    #[test]
    fn j0_does_not_embed_into_j1() {
        let g = FuncSpec::builtin(Builtin::InvolutionG);
        let j0 = block_of(&g, 0, 500).unwrap();
        let j1 = block_of(&g, 6, 500).unwrap();
        // Oracle agrees with the pruned search.
        assert!(!embeds_brute(&j0, &j1));
        assert!(!embeds(&j0, &j1));
        assert!(!embeds(&j1, &j0));
    }

    #[test]
    fn singleton_embeds_into_j0_at_fixed_points() {
        let g = FuncSpec::builtin(Builtin::InvolutionG);
        let j0 = block_of(&g, 0, 500).unwrap();
        let singleton = FBlock::from_shape(0, &[0]);
        assert!(embeds_brute(&singleton, &j0));
        assert!(embeds(&singleton, &j0));
    }

    #[test]
    fn adjacent_double_half_blocks_iso() {
        let f = FuncSpec::builtin(Builtin::DoubleHalf);
        let b1 = block_of(&f, 4, 100).unwrap();
        let b2 = block_of(&f, 6, 100).unwrap();
        assert!(iso_type(&b1, &b2));
    }

    #[test]
    fn tiler_first_blocks() {
        let g = FuncSpec::builtin(Builtin::InvolutionG);
        let mut t = Tiler::new(&g, 2000).unwrap();
        t.ensure_blocks(3).unwrap();
        assert_eq!(t.tiling.alpha_prefix, vec![0, 1, 2]);
        assert_eq!(t.tiling.sizes(), vec![6, 8, 10]);
        assert_eq!(t.tiling.spans[1], (6, 13));
        assert_eq!(t.tiling.block_index_of(7), Some(1));
        assert_eq!(t.tiling.block_index_of(99), None);
    }

    fn arb_shape() -> impl Strategy<Value = Vec<u64>> {
        (1usize..7).prop_flat_map(|len| {
            proptest::collection::vec(0..len as u64, len)
        })
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(128))]

        #[test]
        fn embeds_matches_brute(sa in arb_shape(), sb in arb_shape()) {
            let a = FBlock::from_shape(0, &sa);
            let b = FBlock::from_shape(10, &sb);
            prop_assert_eq!(embeds(&a, &b), embeds_brute(&a, &b));
        }

        #[test]
        fn iso_implies_embeds_both_ways(s in arb_shape(), base in 0u64..50) {
            let a = FBlock::from_shape(base, &s);
            let b = FBlock::from_shape(base + 100, &s);
            prop_assert!(iso_type(&a, &b));
            prop_assert!(embeds(&a, &b) && embeds(&b, &a));
        }

        #[test]
        fn embeds_reflexive_and_transitive(
            sa in arb_shape(), sb in arb_shape(), sc in arb_shape()
        ) {
            let a = FBlock::from_shape(0, &sa);
            let b = FBlock::from_shape(0, &sb);
            let c = FBlock::from_shape(0, &sc);
            prop_assert!(embeds(&a, &a));
            if embeds(&a, &b) && embeds(&b, &c) {
                prop_assert!(embeds(&a, &c));
            }
        }
    }
}
