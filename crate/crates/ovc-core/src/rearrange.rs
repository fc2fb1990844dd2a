//! Constructive series rearrangement with non-dense partial sums, and the
//! adversarial-enumeration demonstration built on it.
//!
//! Given a finite prefix of real terms, [`steer_rearrangement`] emits them
//! in an order whose partial sums either converge (absolutely convergent
//! inputs keep their original order) or escape monotonically past a ladder
//! of checkpoints.  The emitted order is the longest prefix of the
//! corresponding infinite schedule that the finite input can realize: for
//! escaping classes the steering stops when the in-prefix positive (or
//! negative) reservoir is exhausted, and the remaining same-sign terms are
//! flushed; opposite-sign terms that can no longer be covered are withheld
//! so every recorded checkpoint stays valid on the whole trace.

use crate::domain::DomainSpec;
use crate::enumeration::{BlockRange, Enumeration};
use crate::error::{Error, Result};
use crate::poly::MultiPolynomial;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

/// Maximum number of checkpoints recorded in a result.
const MAX_CHECKPOINTS: u64 = 16;

/// Known generators, used to extrapolate the limit class beyond the prefix.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Preset {
    /// `(-1)^n / (n+1)`: conditionally convergent, both signed parts diverge.
    AlternatingHarmonic,
    /// `2^-n`: absolutely convergent with sum 2.
    Geometric,
    /// All zeros.
    Zero,
}

/// A finite prefix of real terms, optionally tagged with its generator.
#[derive(Debug, Clone, PartialEq)]
pub struct TermSequence {
    pub terms: Vec<f64>,
    pub preset: Option<Preset>,
}

impl TermSequence {
    pub fn from_values(terms: Vec<f64>) -> Result<Self> {
        if terms.is_empty() {
            return Err(Error::validation("terms", "need at least one term"));
        }
        Ok(TermSequence {
            terms,
            preset: None,
        })
    }

    pub fn preset(preset: Preset, len: usize) -> Result<Self> {
        if len == 0 {
            return Err(Error::validation("terms.length", "need at least one term"));
        }
        let terms = match preset {
            Preset::AlternatingHarmonic => (0..len)
                .map(|n| {
                    let v = 1.0 / (n as f64 + 1.0);
                    if n % 2 == 0 {
                        v
                    } else {
                        -v
                    }
                })
                .collect(),
            Preset::Geometric => (0..len).map(|n| 0.5f64.powi(n as i32)).collect(),
            Preset::Zero => vec![0.0; len],
        };
        Ok(TermSequence {
            terms,
            preset: Some(preset),
        })
    }
}

/// Declared limit of the rearranged partial sums.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum LimitClass {
    PlusInfinity,
    MinusInfinity,
    Finite { estimate: f64 },
}

/// Output of the steering pass.
#[derive(Debug, Clone, PartialEq)]
pub struct RearrangementResult {
    /// Emitted original term indices (duplicate-free; a full permutation of
    /// `0..total_terms` exactly when the class is finite).
    pub permutation: Vec<usize>,
    pub total_terms: usize,
    pub limit: LimitClass,
    /// True when the class was inferred from prefix dominance rather than a
    /// generator tag.
    pub extrapolated: bool,
    /// `(k, t_k)`: every trace position `>= t_k` has partial sum `> k`
    /// (`< -k` for the minus-infinity class).
    pub checkpoints: Vec<(u64, usize)>,
    /// Partial sums along the emission.
    pub trace: Vec<f64>,
}

impl RearrangementResult {
    fn from_emission(
        order: Vec<usize>,
        terms: &[f64],
        limit: LimitClass,
        extrapolated: bool,
    ) -> Self {
        let mut trace = Vec::with_capacity(order.len());
        let mut sum = 0.0;
        for &i in &order {
            sum += terms[i];
            trace.push(sum);
        }
        let negate = matches!(limit, LimitClass::MinusInfinity);
        let checkpoints = if matches!(limit, LimitClass::Finite { .. }) {
            Vec::new()
        } else {
            trace_checkpoints(&trace, negate)
        };
        RearrangementResult {
            permutation: order,
            total_terms: terms.len(),
            limit,
            extrapolated,
            checkpoints,
            trace,
        }
    }
}

/// Checkpoints computed from the finished trace, so they are valid by
/// construction: `t_k` is the first position from which every later sum
/// stays above `k` (below `-k` when `negate`).
fn trace_checkpoints(trace: &[f64], negate: bool) -> Vec<(u64, usize)> {
    let vals: Vec<f64> = if negate {
        trace.iter().map(|v| -v).collect()
    } else {
        trace.to_vec()
    };
    // suffix minima
    let mut suffix_min = vals.clone();
    for i in (0..vals.len().saturating_sub(1)).rev() {
        suffix_min[i] = suffix_min[i].min(suffix_min[i + 1]);
    }
    let mut out = Vec::new();
    for k in 1..=MAX_CHECKPOINTS {
        let thr = k as f64;
        match suffix_min.iter().position(|&m| m > thr) {
            Some(pos) => out.push((k, pos)),
            None => break,
        }
    }
    out
}

/// Rearrange a finite prefix so its partial sums are non-dense.
pub fn steer_rearrangement(terms: &TermSequence) -> RearrangementResult {
    let n = terms.terms.len();
    let (steer_up, finite, extrapolated) = match terms.preset {
        Some(Preset::AlternatingHarmonic) => (true, false, false),
        Some(Preset::Geometric) | Some(Preset::Zero) => (true, true, false),
        None => {
            let p: f64 = terms.terms.iter().filter(|&&b| b > 0.0).sum();
            let q: f64 = -terms.terms.iter().filter(|&&b| b < 0.0).sum::<f64>();
            let margin = 1e-12 * (p + q);
            if (p - q).abs() <= margin || (p == 0.0 && q == 0.0) {
                (true, true, true)
            } else {
                (p > q, false, true)
            }
        }
    };
    if finite {
        let order: Vec<usize> = (0..n).collect();
        let estimate: f64 = terms.terms.iter().sum();
        return RearrangementResult::from_emission(
            order,
            &terms.terms,
            LimitClass::Finite { estimate },
            extrapolated,
        );
    }
    // steering toward the dominant sign: flip once for the -inf case
    let signed: Vec<f64> = if steer_up {
        terms.terms.clone()
    } else {
        terms.terms.iter().map(|v| -v).collect()
    };
    let mut order = Vec::with_capacity(n);
    let mut covering: Vec<usize> = (0..n).filter(|&i| signed[i] >= 0.0).collect();
    let opposing: Vec<usize> = (0..n).filter(|&i| signed[i] < 0.0).collect();
    let mut covering_iter = covering.drain(..);
    let mut next_cover = covering_iter.next();
    let mut sum = 0.0f64;
    let mut k = 1u64;
    'outer: for &j in &opposing {
        let c = -signed[j];
        let target = k as f64 + c;
        while sum <= target {
            match next_cover {
                Some(i) => {
                    order.push(i);
                    sum += signed[i];
                    next_cover = covering_iter.next();
                }
                None => break 'outer,
            }
        }
        order.push(j);
        sum -= c;
        k += 1;
    }
    // flush the remaining same-sign reservoir; sums stay nondecreasing
    while let Some(i) = next_cover {
        order.push(i);
        next_cover = covering_iter.next();
    }
    let limit = if steer_up {
        LimitClass::PlusInfinity
    } else {
        LimitClass::MinusInfinity
    };
    RearrangementResult::from_emission(order, &terms.terms, limit, extrapolated)
}

/// A witness that the tail of a partial-sum trace avoids part of the line.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum NondensityWitness {
    /// All sums after `position` exceed `bound`, which tops the pre-tail range.
    EscapeAbove { bound: f64, position: usize },
    /// Dual: all sums after `position` stay below `bound`.
    EscapeBelow { bound: f64, position: usize },
    /// An interval of length >= 1 between consecutive sorted tail sums.
    AvoidedInterval { lo: f64, hi: f64 },
}

/// Search a trace for a non-density witness.
///
/// Intervals outside the span of the observed sums are not reported: at
/// finite scale they say nothing, so a dithered trace filling its range
/// with small gaps yields `None`.
pub fn check_nondensity(trace: &[f64], tail_start: usize) -> Result<Option<NondensityWitness>> {
    if trace.is_empty() {
        return Err(Error::validation("trace", "must be nonempty"));
    }
    if tail_start == 0 || tail_start >= trace.len() {
        return Err(Error::validation(
            "tail_start",
            "must satisfy 1 <= tail_start < trace length",
        ));
    }
    let pre = &trace[..tail_start];
    let tail = &trace[tail_start..];
    let pre_max = pre.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let pre_min = pre.iter().cloned().fold(f64::INFINITY, f64::min);
    let tail_min = tail.iter().cloned().fold(f64::INFINITY, f64::min);
    let tail_max = tail.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    if tail_min > pre_max {
        return Ok(Some(NondensityWitness::EscapeAbove {
            bound: pre_max,
            position: tail_start - 1,
        }));
    }
    if tail_max < pre_min {
        return Ok(Some(NondensityWitness::EscapeBelow {
            bound: pre_min,
            position: tail_start - 1,
        }));
    }
    let mut sorted = tail.to_vec();
    sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let mut best: Option<(f64, f64, f64)> = None; // (gap, lo, hi)
    for w in sorted.windows(2) {
        let gap = w[1] - w[0];
        if gap >= 1.0 {
            let better = match best {
                None => true,
                Some((g, lo, _)) => gap > g || (gap == g && w[0] < lo),
            };
            if better {
                best = Some((gap, w[0], w[1]));
            }
        }
    }
    Ok(best.map(|(_, lo, hi)| NondensityWitness::AvoidedInterval { lo, hi }))
}

/// Result of the adversarial-enumeration demonstration.
#[derive(Debug, Clone)]
pub struct NonuniversalReport {
    pub rearrangement: RearrangementResult,
    /// Prefix of the adversarial enumeration: original enumeration indices
    /// in emitted order (whole blocks when grouping was requested).
    pub enumeration_prefix: Vec<usize>,
    /// The real parts fed to the steering pass.
    pub terms: Vec<f64>,
}

/// Build the adversarial enumeration prefix for `f` between an interior
/// point `z1` and an exterior point `z2`.
///
/// The terms are `Re[c_{N_j}(f, z1) (z2 - z1)^{N_j}]` for `j` below
/// `prefix_len`; rearranging them with non-dense partial sums exhibits an
/// enumeration under which the partial sums at `z2` avoid part of the line.
#[allow(clippy::too_many_arguments)]
pub fn nonuniversal_enumeration(
    f: &MultiPolynomial,
    complete_through: Option<usize>,
    z1: &[Complex64],
    z2: &[Complex64],
    e: &Enumeration,
    prefix_len: usize,
    group_by_block: bool,
    domain: Option<&DomainSpec>,
) -> Result<NonuniversalReport> {
    if prefix_len == 0 {
        return Err(Error::validation("prefix_len", "must be >= 1"));
    }
    if let Some(limit) = complete_through {
        if prefix_len > limit + 1 {
            return Err(Error::validation(
                "prefix_len",
                format!(
                    "requested {prefix_len} terms but coefficients are complete only through index {limit}"
                ),
            ));
        }
    }
    if let Some(dom) = domain {
        for (i, fac) in dom.factors.iter().enumerate() {
            if fac.interior_distance(z1[i]) <= 0.0 {
                return Err(Error::geometry(format!(
                    "z1 coordinate {} is not interior to domain factor {i}",
                    z1[i]
                )));
            }
        }
        let outside_some = dom
            .factors
            .iter()
            .enumerate()
            .any(|(i, fac)| fac.excludes(z2[i]));
        if !outside_some {
            return Err(Error::geometry(
                "z2 lies inside the product domain".to_string(),
            ));
        }
    }
    let shifted = f.taylor_shift(z1);
    let term_at = |j: usize| -> f64 {
        let a = e.multi_of_index(j);
        let c = shifted.coeff(&a);
        let mut monomial = Complex64::new(1.0, 0.0);
        for (i, ai) in a.iter().enumerate() {
            monomial *= (z2[i] - z1[i]).powu(ai);
        }
        (c * monomial).re
    };

    let (terms, groups): (Vec<f64>, Vec<Vec<usize>>) = if group_by_block {
        // whole grading blocks become single terms; a block cut by the
        // prefix is dropped
        let mut terms = Vec::new();
        let mut groups = Vec::new();
        let mut b = 0u64;
        loop {
            match e.block_range(b) {
                BlockRange::Empty => {}
                BlockRange::Range { start, end } => {
                    if end >= prefix_len {
                        break;
                    }
                    let idx: Vec<usize> = (start..=end).collect();
                    terms.push(idx.iter().map(|&j| term_at(j)).sum());
                    groups.push(idx);
                }
            }
            b += 1;
        }
        (terms, groups)
    } else {
        let terms: Vec<f64> = (0..prefix_len).map(term_at).collect();
        let groups = (0..prefix_len).map(|j| vec![j]).collect();
        (terms, groups)
    };
    if terms.is_empty() {
        return Err(Error::validation(
            "prefix_len",
            "prefix too short to contain one complete block",
        ));
    }
    let sequence = TermSequence::from_values(terms.clone())?;
    let rearrangement = steer_rearrangement(&sequence);
    let enumeration_prefix: Vec<usize> = rearrangement
        .permutation
        .iter()
        .flat_map(|&g| groups[g].iter().copied())
        .collect();
    Ok(NonuniversalReport {
        rearrangement,
        enumeration_prefix,
        terms,
    })
}
