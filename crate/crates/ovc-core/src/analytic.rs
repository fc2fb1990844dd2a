//! Closed-form analytic targets: finite sums of separable products of
//! one-variable factors (polynomial, rational with explicit poles, scaled
//! exponential).
//!
//! Everything about these functions is computed exactly factor-wise:
//! values, mixed partial derivatives of any order, and Taylor coefficients
//! at any center away from the poles.  They supply ground truth for fits
//! and targets for series construction.

use crate::enumeration::Enumeration;
use crate::error::{Error, Result};
use crate::multi_index::MultiIndex;
use crate::poly::{shift_1d, MultiPolynomial};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

/// Minimum allowed distance between an expansion center / sample point and
/// a pole of a rational factor.
pub const POLE_TOLERANCE: f64 = 1e-9;

/// A one-variable factor.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum Factor {
    /// `sum coeffs[k] z^k`.
    Poly { coeffs: Vec<Complex64> },
    /// `numer(z) / prod (z - poles[j])`; repeated poles raise multiplicity.
    Rational {
        numer: Vec<Complex64>,
        poles: Vec<Complex64>,
    },
    /// `exp(alpha z + beta)`.
    Exp { alpha: Complex64, beta: Complex64 },
}

impl Factor {
    /// Taylor coefficients at `center`, exact through `order`.
    fn series(&self, center: Complex64, order: usize) -> Result<Vec<Complex64>> {
        match self {
            Factor::Poly { coeffs } => {
                let mut c = coeffs.clone();
                shift_1d(&mut c, center);
                c.resize(order + 1, Complex64::new(0.0, 0.0));
                c.truncate(order + 1);
                Ok(c)
            }
            Factor::Exp { alpha, beta } => {
                let mut out = Vec::with_capacity(order + 1);
                let mut term = (alpha * center + beta).exp();
                out.push(term);
                for k in 0..order {
                    term = term * alpha / (k as f64 + 1.0);
                    out.push(term);
                }
                Ok(out)
            }
            Factor::Rational { numer, poles } => {
                let mut c = numer.clone();
                shift_1d(&mut c, center);
                c.resize(c.len().max(order + 1), Complex64::new(0.0, 0.0));
                c.truncate(order + 1);
                let mut acc = c;
                for &p in poles {
                    let gap = center - p;
                    if gap.norm() <= POLE_TOLERANCE {
                        return Err(Error::geometry(format!(
                            "expansion center within {POLE_TOLERANCE} of pole {p}"
                        )));
                    }
                    // 1/(z - p) = sum_k -(-1)^(k) ... built iteratively:
                    // s_0 = 1/(center - p), s_{k+1} = -s_k / (center - p)
                    let mut pole_series = Vec::with_capacity(order + 1);
                    let mut s = Complex64::new(1.0, 0.0) / gap;
                    pole_series.push(s);
                    for _ in 0..order {
                        s = -s / gap;
                        pole_series.push(s);
                    }
                    acc = convolve_truncated(&acc, &pole_series, order);
                }
                Ok(acc)
            }
        }
    }

    /// Value at `z`.
    fn eval(&self, z: Complex64) -> Result<Complex64> {
        match self {
            Factor::Poly { coeffs } => Ok(horner(coeffs, z)),
            Factor::Exp { alpha, beta } => Ok((alpha * z + beta).exp()),
            Factor::Rational { numer, poles } => {
                let mut denom = Complex64::new(1.0, 0.0);
                for &p in poles {
                    let g = z - p;
                    if g.norm() <= POLE_TOLERANCE {
                        return Err(Error::geometry(format!("evaluation at pole {p}")));
                    }
                    denom *= g;
                }
                Ok(horner(numer, z) / denom)
            }
        }
    }

    /// `k`-th derivative at `z` (k! times the k-th local Taylor coefficient).
    fn deriv(&self, z: Complex64, k: u32) -> Result<Complex64> {
        if k == 0 {
            return self.eval(z);
        }
        let series = self.series(z, k as usize)?;
        let mut fact = 1.0f64;
        for i in 1..=k {
            fact *= i as f64;
        }
        Ok(series[k as usize] * fact)
    }

    fn min_pole_distance(&self, z: Complex64) -> f64 {
        match self {
            Factor::Rational { poles, .. } => poles
                .iter()
                .map(|p| (z - p).norm())
                .fold(f64::INFINITY, f64::min),
            _ => f64::INFINITY,
        }
    }
}

fn horner(coeffs: &[Complex64], z: Complex64) -> Complex64 {
    coeffs
        .iter()
        .rev()
        .fold(Complex64::new(0.0, 0.0), |acc, &c| acc * z + c)
}

fn convolve_truncated(a: &[Complex64], b: &[Complex64], order: usize) -> Vec<Complex64> {
    let mut out = vec![Complex64::new(0.0, 0.0); order + 1];
    for (i, &ai) in a.iter().enumerate().take(order + 1) {
        for (j, &bj) in b.iter().enumerate().take(order + 1 - i) {
            out[i + j] += ai * bj;
        }
    }
    out
}

/// One separable product `scale * prod_i factor_i(z_i)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Term {
    pub scale: Complex64,
    pub factors: Vec<Factor>,
}

/// A finite sum of separable products.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnalyticTestFunction {
    dim: usize,
    terms: Vec<Term>,
}

impl AnalyticTestFunction {
    pub fn new(dim: usize, terms: Vec<Term>) -> Result<Self> {
        if dim == 0 {
            return Err(Error::validation("analytic.dim", "must be >= 1"));
        }
        for (i, t) in terms.iter().enumerate() {
            if t.factors.len() != dim {
                return Err(Error::Dimension {
                    expected: dim,
                    got: t.factors.len(),
                    context: format!("analytic term {i}"),
                });
            }
        }
        Ok(AnalyticTestFunction { dim, terms })
    }

    /// The constant function.
    pub fn constant(dim: usize, value: Complex64) -> Self {
        AnalyticTestFunction {
            dim,
            terms: vec![Term {
                scale: value,
                factors: vec![
                    Factor::Poly {
                        coeffs: vec![Complex64::new(1.0, 0.0)]
                    };
                    dim
                ],
            }],
        }
    }

    /// Single-term separable product with unit scale.
    pub fn product(factors: Vec<Factor>) -> Result<Self> {
        let dim = factors.len();
        AnalyticTestFunction::new(
            dim,
            vec![Term {
                scale: Complex64::new(1.0, 0.0),
                factors,
            }],
        )
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn terms(&self) -> &[Term] {
        &self.terms
    }

    pub fn evaluate(&self, z: &[Complex64]) -> Result<Complex64> {
        assert_eq!(z.len(), self.dim);
        let mut acc = Complex64::new(0.0, 0.0);
        for t in &self.terms {
            let mut prod = t.scale;
            for (f, &zi) in t.factors.iter().zip(z.iter()) {
                prod *= f.eval(zi)?;
            }
            acc += prod;
        }
        Ok(acc)
    }

    /// Mixed partial `d^a` at `z`, factor-wise closed form.
    pub fn derivative_at(&self, z: &[Complex64], a: &MultiIndex) -> Result<Complex64> {
        assert_eq!(z.len(), self.dim);
        assert_eq!(a.dim(), self.dim);
        let mut acc = Complex64::new(0.0, 0.0);
        for t in &self.terms {
            let mut prod = t.scale;
            for ((f, &zi), ai) in t.factors.iter().zip(z.iter()).zip(a.iter()) {
                prod *= f.deriv(zi, ai)?;
            }
            acc += prod;
        }
        Ok(acc)
    }

    /// Distance from a point to the nearest pole over all factors.
    pub fn min_pole_distance(&self, z: &[Complex64]) -> f64 {
        let mut best = f64::INFINITY;
        for t in &self.terms {
            for (f, &zi) in t.factors.iter().zip(z.iter()) {
                best = best.min(f.min_pole_distance(zi));
            }
        }
        best
    }

    /// Exact Taylor coefficients at `zeta` for every multi-index of grading
    /// `<= grading_bound`, returned as a polynomial centered at `zeta`.
    ///
    /// Errors if `zeta` is within [`POLE_TOLERANCE`] of a pole on any axis.
    pub fn exact_series(
        &self,
        zeta: &[Complex64],
        grading_bound: u64,
        e: &Enumeration,
    ) -> Result<MultiPolynomial> {
        assert_eq!(zeta.len(), self.dim);
        assert_eq!(e.dim(), self.dim);
        let support = e.support_through(grading_bound);
        let mut max_order = vec![0usize; self.dim];
        for a in &support {
            for (i, ai) in a.iter().enumerate() {
                max_order[i] = max_order[i].max(ai as usize);
            }
        }
        // per-term, per-axis factor series
        let mut per_term: Vec<Vec<Vec<Complex64>>> = Vec::with_capacity(self.terms.len());
        for t in &self.terms {
            let mut per_axis = Vec::with_capacity(self.dim);
            for (i, f) in t.factors.iter().enumerate() {
                per_axis.push(f.series(zeta[i], max_order[i])?);
            }
            per_term.push(per_axis);
        }
        let mut coeffs = Vec::with_capacity(support.len());
        for a in support {
            let mut total = Complex64::new(0.0, 0.0);
            for (t, per_axis) in self.terms.iter().zip(per_term.iter()) {
                let mut prod = t.scale;
                for (i, ai) in a.iter().enumerate() {
                    prod *= per_axis[i][ai as usize];
                }
                total += prod;
            }
            coeffs.push((a, total));
        }
        MultiPolynomial::from_coeffs(self.dim, zeta.to_vec(), coeffs)
    }
}
