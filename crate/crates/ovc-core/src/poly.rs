//! Multivariate polynomial algebra: sparse complex coefficients keyed by
//! multi-index, recentering by Horner-style Taylor shifts, partial sums
//! under an enumeration, and exact derivatives.
//!
//! Coefficients are stored against a reference center: the polynomial is
//! `sum c_a (z - center)^a`.  All summation orders are fixed (grading-free
//! lexicographic storage, nested Horner evaluation), so every evaluation is
//! bit-reproducible.

use crate::enumeration::Enumeration;
use crate::error::{Error, Result};
use crate::multi_index::MultiIndex;
use num_complex::Complex64;
use std::collections::BTreeMap;

/// Per-axis degree cap; larger shifts leave the regime where the Horner
/// recurrences are numerically safe.
pub const MAX_AXIS_DEGREE: u32 = 512;

/// A finite complex polynomial in `d` variables around a reference center.
#[derive(Debug, Clone, PartialEq)]
pub struct MultiPolynomial {
    dim: usize,
    center: Vec<Complex64>,
    coeffs: BTreeMap<MultiIndex, Complex64>,
}

impl MultiPolynomial {
    /// The zero polynomial.
    pub fn zero(dim: usize, center: Vec<Complex64>) -> Self {
        assert_eq!(center.len(), dim);
        MultiPolynomial {
            dim,
            center,
            coeffs: BTreeMap::new(),
        }
    }

    /// Build from explicit coefficients; exact zeros are pruned.
    pub fn from_coeffs(
        dim: usize,
        center: Vec<Complex64>,
        coeffs: impl IntoIterator<Item = (MultiIndex, Complex64)>,
    ) -> Result<Self> {
        assert_eq!(center.len(), dim);
        let mut map = BTreeMap::new();
        for (a, c) in coeffs {
            if a.dim() != dim {
                return Err(Error::Dimension {
                    expected: dim,
                    got: a.dim(),
                    context: "polynomial coefficient index".into(),
                });
            }
            if a.max_degree() > MAX_AXIS_DEGREE as u64 {
                return Err(Error::validation(
                    "polynomial.degree",
                    format!("per-axis degree {} exceeds cap {}", a.max_degree(), MAX_AXIS_DEGREE),
                ));
            }
            if c != Complex64::new(0.0, 0.0) {
                map.insert(a, c);
            }
        }
        Ok(MultiPolynomial {
            dim,
            center,
            coeffs: map,
        })
    }

    /// One-variable polynomial from ascending coefficients.
    pub fn univariate(center: Complex64, coeffs: &[Complex64]) -> Result<Self> {
        MultiPolynomial::from_coeffs(
            1,
            vec![center],
            coeffs
                .iter()
                .enumerate()
                .map(|(k, &c)| (MultiIndex::new(vec![k as u32]), c)),
        )
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn center(&self) -> &[Complex64] {
        &self.center
    }

    pub fn num_terms(&self) -> usize {
        self.coeffs.len()
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// Coefficient of `(z - center)^a` (0 when absent).
    pub fn coeff(&self, a: &MultiIndex) -> Complex64 {
        self.coeffs
            .get(a)
            .copied()
            .unwrap_or(Complex64::new(0.0, 0.0))
    }

    /// Stored (index, coefficient) pairs in lexicographic index order.
    pub fn terms(&self) -> impl Iterator<Item = (&MultiIndex, &Complex64)> {
        self.coeffs.iter()
    }

    /// Max exponent per axis (0 for the zero polynomial).
    pub fn per_axis_degree(&self) -> Vec<u32> {
        let mut deg = vec![0u32; self.dim];
        for a in self.coeffs.keys() {
            for (i, e) in a.iter().enumerate() {
                deg[i] = deg[i].max(e);
            }
        }
        deg
    }

    /// Largest enumeration index used by the support, if any.
    pub fn top_index(&self, e: &Enumeration) -> Option<usize> {
        self.coeffs.keys().map(|a| e.index_of_multi(a)).max()
    }

    /// Value at `z` by nested Horner over the axes.
    pub fn evaluate(&self, z: &[Complex64]) -> Complex64 {
        assert_eq!(z.len(), self.dim, "evaluation point dimension");
        if self.coeffs.is_empty() {
            return Complex64::new(0.0, 0.0);
        }
        let w: Vec<Complex64> = z
            .iter()
            .zip(self.center.iter())
            .map(|(&zi, &ci)| zi - ci)
            .collect();
        let terms: Vec<(&MultiIndex, &Complex64)> = self.coeffs.iter().collect();
        horner_rec(&terms, 0, &w)
    }

    /// Recenter: returns the same function written in powers of `(z - new_center)`.
    pub fn taylor_shift(&self, new_center: &[Complex64]) -> MultiPolynomial {
        assert_eq!(new_center.len(), self.dim);
        let mut coeffs = self.coeffs.clone();
        for axis in 0..self.dim {
            let t = new_center[axis] - self.center[axis];
            if t == Complex64::new(0.0, 0.0) {
                continue;
            }
            coeffs = shift_axis(&coeffs, axis, t, self.dim);
        }
        MultiPolynomial {
            dim: self.dim,
            center: new_center.to_vec(),
            coeffs,
        }
    }

    /// Taylor coefficient of `(z - zeta)^a`, computed by recentering
    /// (Horner recurrences) rather than the factorial-quotient formula.
    pub fn taylor_coefficient(&self, zeta: &[Complex64], a: &MultiIndex) -> Complex64 {
        self.taylor_shift(zeta).coeff(a)
    }

    /// Partial sum `S_N`: the monomials of the recentered polynomial whose
    /// enumeration index is `<= n`.
    pub fn partial_sum(&self, zeta: &[Complex64], n: usize, e: &Enumeration) -> MultiPolynomial {
        let shifted = self.taylor_shift(zeta);
        let coeffs = shifted
            .coeffs
            .into_iter()
            .filter(|(a, _)| e.index_of_multi(a) <= n)
            .collect();
        MultiPolynomial {
            dim: self.dim,
            center: zeta.to_vec(),
            coeffs,
        }
    }

    /// Exact mixed partial derivative.
    pub fn derivative(&self, a: &MultiIndex) -> MultiPolynomial {
        assert_eq!(a.dim(), self.dim);
        let mut out = BTreeMap::new();
        for (b, &c) in &self.coeffs {
            if let Some(shifted) = b.checked_sub(a) {
                let mut factor = 1.0f64;
                for (bi, ai) in b.iter().zip(a.iter()) {
                    factor *= falling_factorial(bi, ai);
                }
                let v = c * factor;
                if v != Complex64::new(0.0, 0.0) {
                    out.insert(shifted, v);
                }
            }
        }
        MultiPolynomial {
            dim: self.dim,
            center: self.center.clone(),
            coeffs: out,
        }
    }

    /// Sum of two polynomials sharing dimension; the result keeps `self`'s
    /// center (the other operand is recentered first when needed).
    pub fn add(&self, other: &MultiPolynomial) -> MultiPolynomial {
        assert_eq!(self.dim, other.dim);
        let other = if other.center == self.center {
            other.clone()
        } else {
            other.taylor_shift(&self.center)
        };
        let mut coeffs = self.coeffs.clone();
        for (a, c) in other.coeffs {
            let slot = coeffs.entry(a).or_insert(Complex64::new(0.0, 0.0));
            *slot += c;
            if *slot == Complex64::new(0.0, 0.0) {
                // normal form keeps no exact zeros
            }
        }
        coeffs.retain(|_, c| *c != Complex64::new(0.0, 0.0));
        MultiPolynomial {
            dim: self.dim,
            center: self.center.clone(),
            coeffs,
        }
    }

    /// `self - other` with `self`'s center.
    pub fn sub(&self, other: &MultiPolynomial) -> MultiPolynomial {
        self.add(&other.scale(Complex64::new(-1.0, 0.0)))
    }

    pub fn scale(&self, s: Complex64) -> MultiPolynomial {
        let coeffs = self
            .coeffs
            .iter()
            .filter_map(|(a, &c)| {
                let v = c * s;
                (v != Complex64::new(0.0, 0.0)).then(|| (a.clone(), v))
            })
            .collect();
        MultiPolynomial {
            dim: self.dim,
            center: self.center.clone(),
            coeffs,
        }
    }

    /// Merge coefficients whose indices are disjoint from the current
    /// support, bit-exactly (no recentering, no arithmetic on existing
    /// coefficients).  Panics if the supports overlap or centers differ.
    pub fn merge_disjoint(&mut self, other: &MultiPolynomial) {
        assert_eq!(self.dim, other.dim);
        assert_eq!(self.center, other.center, "centers must match");
        for (a, &c) in &other.coeffs {
            if c == Complex64::new(0.0, 0.0) {
                continue;
            }
            let prev = self.coeffs.insert(a.clone(), c);
            assert!(prev.is_none(), "support overlap at {a}");
        }
    }

    /// Multiply by `(z_axis - center_axis)^m`: a pure exponent raise since
    /// the factor base point equals the polynomial's center on that axis.
    pub fn raise_axis_power(&self, axis: usize, m: u32) -> Result<MultiPolynomial> {
        let mut coeffs = BTreeMap::new();
        for (a, &c) in &self.coeffs {
            let raised = a.with_axis_raised(axis, m);
            if raised.max_degree() > MAX_AXIS_DEGREE as u64 {
                return Err(Error::validation(
                    "polynomial.degree",
                    format!("axis raise exceeds per-axis cap {MAX_AXIS_DEGREE}"),
                ));
            }
            coeffs.insert(raised, c);
        }
        Ok(MultiPolynomial {
            dim: self.dim,
            center: self.center.clone(),
            coeffs,
        })
    }

    /// Coefficients restricted to enumeration indices in `[lo, hi]`.
    pub fn slice_by_index(&self, e: &Enumeration, lo: usize, hi: usize) -> MultiPolynomial {
        let coeffs = self
            .coeffs
            .iter()
            .filter(|(a, _)| {
                let j = e.index_of_multi(a);
                j >= lo && j <= hi
            })
            .map(|(a, &c)| (a.clone(), c))
            .collect();
        MultiPolynomial {
            dim: self.dim,
            center: self.center.clone(),
            coeffs,
        }
    }
}

fn falling_factorial(b: u32, a: u32) -> f64 {
    if a > b {
        return 0.0;
    }
    let mut out = 1.0f64;
    for k in 0..a {
        out *= (b - k) as f64;
    }
    out
}

/// Horner evaluation of lexicographically sorted terms, recursing over axes.
fn horner_rec(terms: &[(&MultiIndex, &Complex64)], axis: usize, w: &[Complex64]) -> Complex64 {
    if terms.is_empty() {
        return Complex64::new(0.0, 0.0);
    }
    if axis == w.len() {
        debug_assert_eq!(terms.len(), 1);
        return *terms[0].1;
    }
    // group contiguous runs sharing the exponent on `axis`
    let mut groups: Vec<(u32, Complex64)> = Vec::new();
    let mut start = 0usize;
    while start < terms.len() {
        let exp = terms[start].0.get(axis);
        let mut end = start + 1;
        while end < terms.len() && terms[end].0.get(axis) == exp {
            end += 1;
        }
        groups.push((exp, horner_rec(&terms[start..end], axis + 1, w)));
        start = end;
    }
    // Horner over ascending exponents with gap powers
    let mut acc = groups[groups.len() - 1].1;
    for i in (0..groups.len() - 1).rev() {
        let gap = groups[i + 1].0 - groups[i].0;
        acc = acc * w[axis].powu(gap) + groups[i].1;
    }
    acc * w[axis].powu(groups[0].0)
}

/// In-place 1-D Taylor shift: rewrites ascending coefficients of `p(x)`
/// into those of `p(x + t)` by repeated synthetic division.
pub(crate) fn shift_1d(c: &mut [Complex64], t: Complex64) {
    let n = c.len();
    if n < 2 || t == Complex64::new(0.0, 0.0) {
        return;
    }
    for k in 0..n {
        for j in (k..n - 1).rev() {
            let carry = c[j + 1] * t;
            c[j] += carry;
        }
    }
}

fn shift_axis(
    coeffs: &BTreeMap<MultiIndex, Complex64>,
    axis: usize,
    t: Complex64,
    dim: usize,
) -> BTreeMap<MultiIndex, Complex64> {
    // bucket by the multi-index with `axis` zeroed, shift each dense fiber
    let mut buckets: BTreeMap<MultiIndex, Vec<(u32, Complex64)>> = BTreeMap::new();
    for (a, &c) in coeffs {
        let mut key = a.as_slice().to_vec();
        let exp = key[axis];
        key[axis] = 0;
        buckets
            .entry(MultiIndex::new(key))
            .or_default()
            .push((exp, c));
    }
    let mut out = BTreeMap::new();
    for (key, fiber) in buckets {
        let max_exp = fiber.iter().map(|&(e, _)| e).max().unwrap_or(0) as usize;
        let mut dense = vec![Complex64::new(0.0, 0.0); max_exp + 1];
        for (e, c) in fiber {
            dense[e as usize] = c;
        }
        shift_1d(&mut dense, t);
        for (e, c) in dense.into_iter().enumerate() {
            if c != Complex64::new(0.0, 0.0) {
                let mut v = key.as_slice().to_vec();
                debug_assert_eq!(v.len(), dim);
                v[axis] = e as u32;
                out.insert(MultiIndex::new(v), c);
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::enumeration::Scheme;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn z_squared() -> MultiPolynomial {
        MultiPolynomial::univariate(c(0.0, 0.0), &[c(0.0, 0.0), c(0.0, 0.0), c(1.0, 0.0)])
            .unwrap()
    }

    /// z1*z2 around the origin.
    fn z1z2() -> MultiPolynomial {
        MultiPolynomial::from_coeffs(
            2,
            vec![c(0.0, 0.0); 2],
            vec![(MultiIndex::new(vec![1, 1]), c(1.0, 0.0))],
        )
        .unwrap()
    }

    #[test]
    fn evaluate_basics() {
        let zero = MultiPolynomial::zero(2, vec![c(0.0, 0.0); 2]);
        assert_eq!(zero.evaluate(&[c(3.0, 1.0), c(-2.0, 0.5)]), c(0.0, 0.0));
        assert_eq!(z1z2().evaluate(&[c(2.0, 0.0), c(3.0, 0.0)]), c(6.0, 0.0));
    }

    #[test]
    fn taylor_coefficient_examples() {
        let f = z_squared();
        assert_eq!(
            f.taylor_coefficient(&[c(0.0, 0.0)], &MultiIndex::new(vec![2])),
            c(1.0, 0.0)
        );
        assert_eq!(
            f.taylor_coefficient(&[c(1.0, 0.0)], &MultiIndex::new(vec![1])),
            c(2.0, 0.0)
        );
        let g = z1z2();
        assert_eq!(
            g.taylor_coefficient(&[c(1.0, 0.0), c(1.0, 0.0)], &MultiIndex::new(vec![1, 1])),
            c(1.0, 0.0)
        );
    }

    #[test]
    fn shift_binomial() {
        // z^2 at center 1 is 1 + 2w + w^2
        let g = z_squared().taylor_shift(&[c(1.0, 0.0)]);
        assert_eq!(g.coeff(&MultiIndex::new(vec![0])), c(1.0, 0.0));
        assert_eq!(g.coeff(&MultiIndex::new(vec![1])), c(2.0, 0.0));
        assert_eq!(g.coeff(&MultiIndex::new(vec![2])), c(1.0, 0.0));
    }

    #[test]
    fn shift_product() {
        // z1 z2 at (1,1): 1 + w1 + w2 + w1 w2
        let g = z1z2().taylor_shift(&[c(1.0, 0.0), c(1.0, 0.0)]);
        for idx in [[0, 0], [0, 1], [1, 0], [1, 1]] {
            assert_eq!(g.coeff(&MultiIndex::new(idx.to_vec())), c(1.0, 0.0));
        }
    }

    #[test]
    fn derivative_examples() {
        // d/dz1 (z1^2 z2) = 2 z1 z2
        let f = MultiPolynomial::from_coeffs(
            2,
            vec![c(0.0, 0.0); 2],
            vec![(MultiIndex::new(vec![2, 1]), c(1.0, 0.0))],
        )
        .unwrap();
        let df = f.derivative(&MultiIndex::new(vec![1, 0]));
        assert_eq!(df.coeff(&MultiIndex::new(vec![1, 1])), c(2.0, 0.0));
        // order above degree kills the polynomial
        let dead = f.derivative(&MultiIndex::new(vec![3, 0]));
        assert!(dead.is_zero());
    }

    #[test]
    fn partial_sum_reduces_to_shift_and_constant() {
        let e = Enumeration::new(1, Scheme::Graded).unwrap();
        let f = z_squared();
        let full = f.partial_sum(&[c(1.0, 0.0)], 10, &e);
        let shifted = f.taylor_shift(&[c(1.0, 0.0)]);
        assert_eq!(full, shifted);
        let constant = f.partial_sum(&[c(1.0, 0.0)], 0, &e);
        assert_eq!(constant.num_terms(), 1);
        assert_eq!(constant.coeff(&MultiIndex::new(vec![0])), c(1.0, 0.0));
        assert_eq!(
            constant.evaluate(&[c(1.0, 0.0)]),
            f.evaluate(&[c(1.0, 0.0)])
        );
    }

    #[test]
    fn degree_cap_enforced() {
        let big = MultiIndex::new(vec![MAX_AXIS_DEGREE + 1]);
        assert!(MultiPolynomial::from_coeffs(
            1,
            vec![c(0.0, 0.0)],
            vec![(big, c(1.0, 0.0))]
        )
        .is_err());
    }

    #[test]
    fn raise_axis_power_shifts_exponents() {
        let f = z1z2();
        let g = f.raise_axis_power(0, 3).unwrap();
        assert_eq!(g.coeff(&MultiIndex::new(vec![4, 1])), c(1.0, 0.0));
        assert_eq!(g.num_terms(), 1);
    }

    #[test]
    fn merge_disjoint_is_bit_exact() {
        let mut f = z_squared();
        let block = MultiPolynomial::from_coeffs(
            1,
            vec![c(0.0, 0.0)],
            vec![(MultiIndex::new(vec![7]), c(0.125, -3.5))],
        )
        .unwrap();
        let before = f.coeff(&MultiIndex::new(vec![2]));
        f.merge_disjoint(&block);
        assert_eq!(f.coeff(&MultiIndex::new(vec![2])), before);
        assert_eq!(f.coeff(&MultiIndex::new(vec![7])), c(0.125, -3.5));
    }

    mod properties {
        use super::*;
        use proptest::prelude::*;

        fn coeffs_strategy() -> impl Strategy<Value = Vec<(f64, f64)>> {
            prop::collection::vec((-1.0..1.0f64, -1.0..1.0f64), 1..10)
        }

        proptest! {
            /// Recentering never changes the function: evaluation agrees
            /// at bounded points regardless of the representation held.
            #[test]
            fn shift_is_center_consistent(
                coeffs in coeffs_strategy(),
                shift in (-1.0..1.0f64, -1.0..1.0f64),
                z in (-1.5..1.5f64, -1.5..1.5f64),
            ) {
                let coeffs: Vec<Complex64> =
                    coeffs.into_iter().map(|(re, im)| c(re, im)).collect();
                let f = MultiPolynomial::univariate(c(0.0, 0.0), &coeffs).unwrap();
                let g = f.taylor_shift(&[c(shift.0, shift.1)]);
                let z = [c(z.0, z.1)];
                let scale = coeffs.iter().map(|v| v.norm()).fold(1.0, f64::max);
                prop_assert!((f.evaluate(&z) - g.evaluate(&z)).norm() <= 1e-10 * scale * 1e2);
            }

            /// Derivative then coefficient agrees with the factorial-scaled
            /// Taylor coefficient.
            #[test]
            fn derivative_coefficient_consistency(
                coeffs in coeffs_strategy(),
                order in 0u32..4,
            ) {
                let coeffs: Vec<Complex64> =
                    coeffs.into_iter().map(|(re, im)| c(re, im)).collect();
                let f = MultiPolynomial::univariate(c(0.0, 0.0), &coeffs).unwrap();
                let a = MultiIndex::new(vec![order]);
                let mut factorial = 1.0;
                for k in 1..=order {
                    factorial *= k as f64;
                }
                let lhs = f.taylor_coefficient(&[c(0.3, -0.2)], &a) * factorial;
                let rhs = f.derivative(&a).evaluate(&[c(0.3, -0.2)]);
                prop_assert!((lhs - rhs).norm() <= 1e-9 * rhs.norm().max(1.0));
            }
        }
    }
}
