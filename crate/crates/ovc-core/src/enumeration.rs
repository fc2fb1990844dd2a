//! Graded enumerations of multi-indices.
//!
//! An [`Enumeration`] is a bijection between `0, 1, 2, ...` and the exponent
//! tuples of `d`-variable monomials.  All supported enumerations are graded:
//! a scheme-specific grading value is nondecreasing along the enumeration,
//! and indices of equal grading form a contiguous block ordered
//! lexicographically.  Partial sums taken along such an enumeration are
//! therefore unions of complete blocks plus one partial block.

use crate::error::{Error, Result};
use crate::multi_index::MultiIndex;
use serde::{Deserialize, Serialize};
use std::collections::HashMap;
use std::sync::Mutex;

/// The grading that orders monomial blocks.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Scheme {
    /// Blocks are `max_i a_i = B` (square/cube shells).
    Rectangular,
    /// Blocks are `sum a_i^2 = B` (spherical shells; many B are empty).
    Spherical,
    /// Blocks are `sum a_i = B` (total degree).
    Graded,
}

impl Scheme {
    pub fn grading(&self, a: &MultiIndex) -> u64 {
        match self {
            Scheme::Rectangular => a.max_degree(),
            Scheme::Spherical => a.squared_norm(),
            Scheme::Graded => a.total_degree(),
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Scheme::Rectangular => "rectangular",
            Scheme::Spherical => "spherical",
            Scheme::Graded => "graded",
        }
    }

    /// All multi-indices of grading exactly `b` in `dim` variables, in
    /// lexicographic order.
    pub fn block_elements(&self, dim: usize, b: u64) -> Vec<MultiIndex> {
        let mut out = Vec::new();
        let mut prefix = Vec::with_capacity(dim);
        match self {
            Scheme::Graded => gen_graded(dim, b, &mut prefix, &mut out),
            Scheme::Rectangular => gen_rectangular(dim, b, false, &mut prefix, &mut out),
            Scheme::Spherical => gen_spherical(dim, b, &mut prefix, &mut out),
        }
        out
    }

    /// Smallest exponent `m` such that any multi-index with `a_axis >= m`
    /// has grading above `b`.
    pub fn min_power_exceeding(&self, b: u64) -> u32 {
        match self {
            Scheme::Rectangular | Scheme::Graded => (b + 1) as u32,
            Scheme::Spherical => (b as f64).sqrt().floor() as u32 + 1,
        }
    }
}

fn gen_graded(dim: usize, rem: u64, prefix: &mut Vec<u32>, out: &mut Vec<MultiIndex>) {
    if prefix.len() == dim - 1 {
        if rem <= u32::MAX as u64 {
            let mut v = prefix.clone();
            v.push(rem as u32);
            out.push(MultiIndex::new(v));
        }
        return;
    }
    for a in 0..=rem {
        prefix.push(a as u32);
        gen_graded(dim, rem - a, prefix, out);
        prefix.pop();
    }
}

fn gen_rectangular(dim: usize, b: u64, seen_max: bool, prefix: &mut Vec<u32>, out: &mut Vec<MultiIndex>) {
    if prefix.len() == dim {
        if seen_max {
            out.push(MultiIndex::new(prefix.clone()));
        }
        return;
    }
    let last = prefix.len() == dim - 1;
    if last && !seen_max {
        // final coordinate must realize the maximum
        prefix.push(b as u32);
        gen_rectangular(dim, b, true, prefix, out);
        prefix.pop();
        return;
    }
    for a in 0..=b {
        prefix.push(a as u32);
        gen_rectangular(dim, b, seen_max || a == b, prefix, out);
        prefix.pop();
    }
}

fn gen_spherical(dim: usize, rem: u64, prefix: &mut Vec<u32>, out: &mut Vec<MultiIndex>) {
    if prefix.len() == dim - 1 {
        let r = (rem as f64).sqrt().round() as u64;
        // guard against rounding: accept r with r^2 == rem exactly
        for cand in r.saturating_sub(1)..=r + 1 {
            if cand * cand == rem {
                let mut v = prefix.clone();
                v.push(cand as u32);
                out.push(MultiIndex::new(v));
                return;
            }
        }
        return;
    }
    let mut a = 0u64;
    while a * a <= rem {
        prefix.push(a as u32);
        gen_spherical(dim, rem - a * a, prefix, out);
        prefix.pop();
        a += 1;
    }
}

/// Inclusive index range of one grading block, or `Empty` when no
/// multi-index attains that grading (possible for spherical blocks).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BlockRange {
    Empty,
    Range { start: usize, end: usize },
}

#[derive(Debug, Default)]
struct Table {
    /// Multi-indices in enumeration order, generated so far.
    forward: Vec<MultiIndex>,
    inverse: HashMap<MultiIndex, usize>,
    /// Nonempty blocks in order: (grading, start index in `forward`).
    /// A block's end is the next block's start (or `forward.len()`).
    blocks: Vec<(u64, usize)>,
    /// All gradings `<= generated_through` have been generated (empty ones
    /// are skipped analytically where possible).
    generated_through: Option<u64>,
}

impl Table {
    /// Generate the next attainable grading's block.
    fn extend(&mut self, dim: usize, scheme: Scheme) {
        let next = match self.generated_through {
            None => 0,
            Some(g) => match scheme {
                // d=1 spherical gradings are the perfect squares; jump
                Scheme::Spherical if dim == 1 => {
                    let r = (g as f64).sqrt().floor() as u64 + 1;
                    r * r
                }
                _ => g + 1,
            },
        };
        let elems = scheme.block_elements(dim, next);
        if !elems.is_empty() {
            self.blocks.push((next, self.forward.len()));
            for a in elems {
                let j = self.forward.len();
                self.inverse.insert(a.clone(), j);
                self.forward.push(a);
            }
        }
        self.generated_through = Some(next);
    }

    fn ensure_grading(&mut self, b: u64, dim: usize, scheme: Scheme) {
        while self.generated_through.is_none_or(|g| g < b) {
            self.extend(dim, scheme);
        }
    }

    fn ensure_index(&mut self, j: usize, dim: usize, scheme: Scheme) {
        while self.forward.len() <= j {
            self.extend(dim, scheme);
        }
    }

    /// Inclusive index range of the (generated) block of grading `b`.
    fn range_of(&self, b: u64) -> Option<(usize, usize)> {
        let i = self.blocks.binary_search_by_key(&b, |&(g, _)| g).ok()?;
        let start = self.blocks[i].1;
        let end = match self.blocks.get(i + 1) {
            Some(&(_, next_start)) => next_start - 1,
            None => self.forward.len() - 1,
        };
        Some((start, end))
    }

    /// Last index of the last nonempty block with grading `<= b`.
    fn end_through(&self, b: u64) -> Option<usize> {
        let i = match self.blocks.binary_search_by_key(&b, |&(g, _)| g) {
            Ok(i) => i,
            Err(0) => return None,
            Err(i) => i - 1,
        };
        let end = match self.blocks.get(i + 1) {
            Some(&(_, next_start)) => next_start - 1,
            None => self.forward.len() - 1,
        };
        Some(end)
    }
}

/// A graded bijection between enumeration indices and multi-indices.
///
/// Lookups are cached internally; the observable behavior is pure and the
/// value is safe to share across threads.
#[derive(Debug)]
pub struct Enumeration {
    dim: usize,
    scheme: Scheme,
    /// Optional validated reordering of the first `prefix.len()` indices.
    prefix: Vec<MultiIndex>,
    prefix_pos: HashMap<MultiIndex, usize>,
    table: Mutex<Table>,
}

impl Clone for Enumeration {
    fn clone(&self) -> Self {
        Enumeration {
            dim: self.dim,
            scheme: self.scheme,
            prefix: self.prefix.clone(),
            prefix_pos: self.prefix_pos.clone(),
            table: Mutex::new(Table::default()),
        }
    }
}

impl PartialEq for Enumeration {
    fn eq(&self, other: &Self) -> bool {
        self.dim == other.dim && self.scheme == other.scheme && self.prefix == other.prefix
    }
}

impl Enumeration {
    pub fn new(dim: usize, scheme: Scheme) -> Result<Self> {
        if dim == 0 {
            return Err(Error::validation("enumeration.dimension", "must be >= 1"));
        }
        Ok(Enumeration {
            dim,
            scheme,
            prefix: Vec::new(),
            prefix_pos: HashMap::new(),
            table: Mutex::new(Table::default()),
        })
    }

    /// A custom enumeration: an explicit reordering of the first
    /// `prefix.len()` indices of the fallback scheme, then the fallback.
    ///
    /// The prefix must be duplicate-free, must cover exactly the first
    /// `prefix.len()` multi-indices of the fallback enumeration, and must
    /// keep the grading nondecreasing; arbitrary bijections are rejected so
    /// block arithmetic stays well defined.
    pub fn with_custom_prefix(
        dim: usize,
        fallback: Scheme,
        prefix: Vec<MultiIndex>,
    ) -> Result<Self> {
        let base = Enumeration::new(dim, fallback)?;
        let mut pos = HashMap::new();
        for (i, a) in prefix.iter().enumerate() {
            if a.dim() != dim {
                return Err(Error::Dimension {
                    expected: dim,
                    got: a.dim(),
                    context: format!("custom prefix entry {i}"),
                });
            }
            if pos.insert(a.clone(), i).is_some() {
                return Err(Error::validation(
                    "enumeration.prefix",
                    format!("duplicate multi-index {a} in custom prefix"),
                ));
            }
        }
        for (i, a) in prefix.iter().enumerate() {
            if i > 0 && fallback.grading(a) < fallback.grading(&prefix[i - 1]) {
                return Err(Error::validation(
                    "enumeration.prefix",
                    format!("grading decreases at prefix position {i}"),
                ));
            }
        }
        // the prefix must be a permutation of the fallback's first indices
        for j in 0..prefix.len() {
            let expected = base.multi_of_index(j);
            if !pos.contains_key(&expected) {
                return Err(Error::validation(
                    "enumeration.prefix",
                    format!("prefix is not a permutation of the fallback's first {} indices (missing {expected})", prefix.len()),
                ));
            }
        }
        Ok(Enumeration {
            dim,
            scheme: fallback,
            prefix,
            prefix_pos: pos,
            table: Mutex::new(Table::default()),
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn scheme(&self) -> Scheme {
        self.scheme
    }

    pub fn custom_prefix(&self) -> &[MultiIndex] {
        &self.prefix
    }

    pub fn grading(&self, a: &MultiIndex) -> u64 {
        self.scheme.grading(a)
    }

    /// The `j`-th multi-index.
    pub fn multi_of_index(&self, j: usize) -> MultiIndex {
        if j < self.prefix.len() {
            return self.prefix[j].clone();
        }
        let mut t = self.table.lock().unwrap();
        t.ensure_index(j, self.dim, self.scheme);
        t.forward[j].clone()
    }

    /// The unique index `j` with `multi_of_index(j) = a`.
    pub fn index_of_multi(&self, a: &MultiIndex) -> usize {
        assert_eq!(a.dim(), self.dim, "multi-index dimension mismatch");
        if let Some(&p) = self.prefix_pos.get(a) {
            return p;
        }
        let grading = self.scheme.grading(a);
        let mut t = self.table.lock().unwrap();
        t.ensure_grading(grading, self.dim, self.scheme);
        *t.inverse.get(a).expect("graded table covers this grading")
    }

    /// Index range of the block of grading `b`.
    pub fn block_range(&self, b: u64) -> BlockRange {
        let mut t = self.table.lock().unwrap();
        t.ensure_grading(b, self.dim, self.scheme);
        match t.range_of(b) {
            Some((start, end)) => BlockRange::Range { start, end },
            None => BlockRange::Empty,
        }
    }

    /// Index of the last element of the last nonempty block with grading
    /// `<= b` (`None` only before block 0, which never happens since the
    /// zero index has grading 0).
    pub fn end_of_blocks_through(&self, b: u64) -> Option<usize> {
        let mut t = self.table.lock().unwrap();
        t.ensure_grading(b, self.dim, self.scheme);
        t.end_through(b)
    }

    /// Smallest `m` such that every multi-index with exponent `>= m` on
    /// `axis` has grading above `b` (hence enumeration index after block `b`).
    pub fn min_power_exceeding_block(&self, _axis: usize, b: u64) -> u32 {
        self.scheme.min_power_exceeding(b)
    }

    /// All multi-indices with grading `<= b`, in enumeration order.
    pub fn support_through(&self, b: u64) -> Vec<MultiIndex> {
        let last = match self.end_of_blocks_through(b) {
            Some(j) => j,
            None => return Vec::new(),
        };
        (0..=last).map(|j| self.multi_of_index(j)).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::HashSet;

    /// Brute-force oracle: sort all multi-indices in a box by
    /// (grading, lex) and keep the first `count`.
    fn oracle_order(dim: usize, scheme: Scheme, count: usize, box_side: u32) -> Vec<MultiIndex> {
        let mut all = Vec::new();
        let mut cur = vec![0u32; dim];
        loop {
            all.push(MultiIndex::new(cur.clone()));
            // odometer increment
            let mut i = dim;
            loop {
                if i == 0 {
                    cur.clear();
                    break;
                }
                i -= 1;
                if cur[i] < box_side {
                    cur[i] += 1;
                    for v in cur.iter_mut().skip(i + 1) {
                        *v = 0;
                    }
                    break;
                }
            }
            if cur.is_empty() {
                break;
            }
        }
        all.sort_by(|a, b| {
            scheme
                .grading(a)
                .cmp(&scheme.grading(b))
                .then_with(|| a.cmp(b))
        });
        all.truncate(count);
        all
    }

    #[test]
    fn graded_d2_first_elements() {
        let e = Enumeration::new(2, Scheme::Graded).unwrap();
        assert_eq!(e.multi_of_index(0), MultiIndex::new(vec![0, 0]));
        assert_eq!(e.multi_of_index(1), MultiIndex::new(vec![0, 1]));
        assert_eq!(e.multi_of_index(2), MultiIndex::new(vec![1, 0]));
    }

    #[test]
    fn spherical_d2_index_3() {
        // gradings: (0,0)->0, (0,1)->1, (1,0)->1, (1,1)->2
        let e = Enumeration::new(2, Scheme::Spherical).unwrap();
        assert_eq!(e.multi_of_index(3), MultiIndex::new(vec![1, 1]));
    }

    #[test]
    fn rectangular_d2_block1() {
        let e = Enumeration::new(2, Scheme::Rectangular).unwrap();
        assert_eq!(e.block_range(1), BlockRange::Range { start: 1, end: 3 });
        assert_eq!(e.index_of_multi(&MultiIndex::new(vec![1, 1])), 3);
    }

    #[test]
    fn graded_block_ranges() {
        let e = Enumeration::new(2, Scheme::Graded).unwrap();
        assert_eq!(e.block_range(0), BlockRange::Range { start: 0, end: 0 });
        assert_eq!(e.block_range(1), BlockRange::Range { start: 1, end: 2 });
    }

    #[test]
    fn spherical_empty_blocks_marked() {
        // d=1: only perfect squares are attainable gradings
        let e = Enumeration::new(1, Scheme::Spherical).unwrap();
        assert_eq!(e.block_range(2), BlockRange::Empty);
        assert_eq!(e.block_range(4), BlockRange::Range { start: 2, end: 2 });
    }

    #[test]
    fn matches_bruteforce_oracle() {
        for &scheme in &[Scheme::Rectangular, Scheme::Spherical, Scheme::Graded] {
            for dim in 1..=3usize {
                let e = Enumeration::new(dim, scheme).unwrap();
                // box_side chosen large enough that the first 300 elements
                // of the sorted box are the true first 300
                let oracle = oracle_order(dim, scheme, 300, 40);
                for (j, a) in oracle.iter().enumerate() {
                    assert_eq!(
                        &e.multi_of_index(j),
                        a,
                        "{} d={} j={}",
                        scheme.name(),
                        dim,
                        j
                    );
                    assert_eq!(e.index_of_multi(a), j);
                }
            }
        }
    }

    #[test]
    fn min_power_values() {
        let er = Enumeration::new(2, Scheme::Rectangular).unwrap();
        let eg = Enumeration::new(2, Scheme::Graded).unwrap();
        let es = Enumeration::new(2, Scheme::Spherical).unwrap();
        assert_eq!(er.min_power_exceeding_block(0, 5), 6);
        assert_eq!(eg.min_power_exceeding_block(0, 5), 6);
        assert_eq!(es.min_power_exceeding_block(0, 5), 3);
    }

    #[test]
    fn min_power_pushes_past_block() {
        for &scheme in &[Scheme::Rectangular, Scheme::Spherical, Scheme::Graded] {
            let e = Enumeration::new(2, scheme).unwrap();
            for b in 0..12u64 {
                let m = e.min_power_exceeding_block(0, b);
                let end = e.end_of_blocks_through(b).unwrap();
                for extra in 0..3u32 {
                    let a = MultiIndex::new(vec![m + extra, extra]);
                    assert!(
                        e.index_of_multi(&a) > end,
                        "{} b={b} a={a}",
                        scheme.name()
                    );
                }
            }
        }
    }

    #[test]
    fn custom_prefix_roundtrip() {
        // swap the two grading-1 elements of graded d=2
        let prefix = vec![
            MultiIndex::new(vec![0, 0]),
            MultiIndex::new(vec![1, 0]),
            MultiIndex::new(vec![0, 1]),
        ];
        let e = Enumeration::with_custom_prefix(2, Scheme::Graded, prefix).unwrap();
        assert_eq!(e.multi_of_index(1), MultiIndex::new(vec![1, 0]));
        assert_eq!(e.index_of_multi(&MultiIndex::new(vec![0, 1])), 2);
        // past the prefix, the fallback order resumes
        assert_eq!(e.multi_of_index(3), MultiIndex::new(vec![0, 2]));
    }

    #[test]
    fn custom_prefix_rejects_non_permutation() {
        let prefix = vec![MultiIndex::new(vec![5, 5])];
        let err = Enumeration::with_custom_prefix(2, Scheme::Graded, prefix).unwrap_err();
        assert!(err.to_string().contains("permutation"));
    }

    #[test]
    fn custom_prefix_rejects_duplicates() {
        let prefix = vec![MultiIndex::new(vec![0, 0]), MultiIndex::new(vec![0, 0])];
        assert!(Enumeration::with_custom_prefix(2, Scheme::Graded, prefix).is_err());
    }

    #[test]
    fn bijective_on_long_prefix() {
        for &scheme in &[Scheme::Rectangular, Scheme::Spherical, Scheme::Graded] {
            for dim in 1..=3usize {
                let e = Enumeration::new(dim, scheme).unwrap();
                let n = 3000;
                let mut seen = HashSet::new();
                let mut prev_grading = 0u64;
                for j in 0..n {
                    let a = e.multi_of_index(j);
                    let g = e.grading(&a);
                    assert!(g >= prev_grading, "grading must be nondecreasing");
                    prev_grading = g;
                    assert!(seen.insert(a.clone()), "duplicate at {j}");
                    assert_eq!(e.index_of_multi(&a), j);
                }
            }
        }
    }

    mod properties {
        use super::*;
        use proptest::prelude::*;

        proptest! {
            /// Forward/inverse round trip over arbitrary indices and schemes.
            #[test]
            fn index_roundtrip(
                j in 0usize..20_000,
                scheme_pick in 0usize..3,
                dim in 1usize..4,
            ) {
                let scheme =
                    [Scheme::Rectangular, Scheme::Spherical, Scheme::Graded][scheme_pick];
                let e = Enumeration::new(dim, scheme).unwrap();
                let a = e.multi_of_index(j);
                prop_assert_eq!(e.index_of_multi(&a), j);
            }
        }
    }

    #[test]
    fn block_partition_covers_prefix() {
        for &scheme in &[Scheme::Rectangular, Scheme::Spherical, Scheme::Graded] {
            let e = Enumeration::new(3, scheme).unwrap();
            let mut next = 0usize;
            for b in 0..60u64 {
                match e.block_range(b) {
                    BlockRange::Empty => {}
                    BlockRange::Range { start, end } => {
                        assert_eq!(start, next, "{} block {b}", scheme.name());
                        next = end + 1;
                    }
                }
            }
            assert!(next > 100, "{}: covered only {next}", scheme.name());
        }
    }
}
