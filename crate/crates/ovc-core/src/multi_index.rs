//! Multi-indices: exponent tuples of monomials in `d` complex variables.

use serde::{Deserialize, Serialize};
use std::fmt;

/// An exponent tuple `(a_1, ..., a_d)` with nonnegative entries.
///
/// Ordering is lexicographic (derived from the underlying vector), which is
/// the tie-break order used inside every grading block.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct MultiIndex(Vec<u32>);

impl MultiIndex {
    pub fn new(exponents: Vec<u32>) -> Self {
        MultiIndex(exponents)
    }

    /// The zero index `(0, ..., 0)` in `d` variables.
    pub fn zero(dim: usize) -> Self {
        MultiIndex(vec![0; dim])
    }

    /// Unit index: exponent 1 on `axis`, 0 elsewhere.
    pub fn unit(dim: usize, axis: usize) -> Self {
        let mut v = vec![0; dim];
        v[axis] = 1;
        MultiIndex(v)
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn get(&self, axis: usize) -> u32 {
        self.0[axis]
    }

    pub fn as_slice(&self) -> &[u32] {
        &self.0
    }

    pub fn iter(&self) -> impl Iterator<Item = u32> + '_ {
        self.0.iter().copied()
    }

    /// Total degree `sum a_i`.
    pub fn total_degree(&self) -> u64 {
        self.0.iter().map(|&a| a as u64).sum()
    }

    /// `max_i a_i`.
    pub fn max_degree(&self) -> u64 {
        self.0.iter().map(|&a| a as u64).max().unwrap_or(0)
    }

    /// `sum a_i^2`.
    pub fn squared_norm(&self) -> u64 {
        self.0.iter().map(|&a| (a as u64) * (a as u64)).sum()
    }

    /// Componentwise `self + other`.
    pub fn add(&self, other: &MultiIndex) -> MultiIndex {
        debug_assert_eq!(self.dim(), other.dim());
        MultiIndex(
            self.0
                .iter()
                .zip(other.0.iter())
                .map(|(&a, &b)| a + b)
                .collect(),
        )
    }

    /// Componentwise `self - other`, or `None` if any entry would go negative.
    pub fn checked_sub(&self, other: &MultiIndex) -> Option<MultiIndex> {
        debug_assert_eq!(self.dim(), other.dim());
        let mut out = Vec::with_capacity(self.dim());
        for (&a, &b) in self.0.iter().zip(other.0.iter()) {
            out.push(a.checked_sub(b)?);
        }
        Some(MultiIndex(out))
    }

    /// Exponent bumped by `m` on one axis.
    pub fn with_axis_raised(&self, axis: usize, m: u32) -> MultiIndex {
        let mut v = self.0.clone();
        v[axis] += m;
        MultiIndex(v)
    }

    /// True if `self <= other` componentwise.
    pub fn divides(&self, other: &MultiIndex) -> bool {
        self.0.iter().zip(other.0.iter()).all(|(&a, &b)| a <= b)
    }
}

impl fmt::Display for MultiIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, a) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{a}")?;
        }
        write!(f, ")")
    }
}

impl fmt::Debug for MultiIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

impl From<Vec<u32>> for MultiIndex {
    fn from(v: Vec<u32>) -> Self {
        MultiIndex(v)
    }
}

impl From<&[u32]> for MultiIndex {
    fn from(v: &[u32]) -> Self {
        MultiIndex(v.to_vec())
    }
}
