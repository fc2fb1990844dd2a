//! Stagewise construction of truncated universal Taylor series, and
//! independent re-verification of the certificates they carry.
//!
//! The builder walks a schedule of targets.  Each stage fits a correction
//! block that (a) pulls the partial sum within `eps/2` of the stage target
//! on its outside compact, (b) stays below a geometrically shrinking
//! budget `delta_t` on the exhaustion compacta of the domain, and (c) is
//! supported strictly after the current top enumeration block, so earlier
//! recorded partial sums are never disturbed.  Support confinement comes
//! from fitting `q` and multiplying by `(z_i0 - center_i0)^m` with `m`
//! chosen so every resulting monomial out-grades the top block.

use crate::domain::DomainSpec;
use crate::enumeration::Enumeration;
use crate::error::{Error, Result};
use crate::fit::{
    escalate, sup_error, AxisMultiplier, AxisScale, EscalationParams, FitGroup, FitTask,
    TargetSpec,
};
use crate::multi_index::MultiIndex;
use crate::planar::{PlanarCompact, ProductCompact, SampleKind, SampleSet};
use crate::poly::MultiPolynomial;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// Tolerance for replaying recorded certificate values.
pub const REPLAY_TOLERANCE: f64 = 1e-12;

/// Admissible partial-sum indices.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum MuSpec {
    /// Every index.
    All,
    /// Indices congruent to `rem` modulo `modulus`.
    Residue { rem: u64, modulus: u64 },
    /// Explicit strictly increasing head, then a residue class above it.
    ListThen {
        list: Vec<u64>,
        rem: u64,
        modulus: u64,
    },
}

impl MuSpec {
    pub fn validate(&self) -> Result<()> {
        match self {
            MuSpec::All => Ok(()),
            MuSpec::Residue { rem, modulus } | MuSpec::ListThen { rem, modulus, .. } => {
                if *modulus == 0 {
                    return Err(Error::validation("mu.modulus", "must be >= 1"));
                }
                if rem >= modulus {
                    return Err(Error::validation("mu.rem", "must be < modulus"));
                }
                if let MuSpec::ListThen { list, .. } = self {
                    if !list.windows(2).all(|w| w[0] < w[1]) {
                        return Err(Error::validation(
                            "mu.list",
                            "must be strictly increasing",
                        ));
                    }
                }
                Ok(())
            }
        }
    }

    pub fn contains(&self, n: u64) -> bool {
        match self {
            MuSpec::All => true,
            MuSpec::Residue { rem, modulus } => n % modulus == *rem,
            MuSpec::ListThen { list, rem, modulus } => {
                if list.binary_search(&n).is_ok() {
                    return true;
                }
                let threshold = list.last().map_or(0, |&l| l + 1);
                n >= threshold && n % modulus == *rem
            }
        }
    }

    /// Smallest admissible index `>= n`.
    pub fn next_admissible(&self, n: u64) -> u64 {
        match self {
            MuSpec::All => n,
            MuSpec::Residue { rem, modulus } => {
                let r = n % modulus;
                if r <= *rem {
                    n + (rem - r)
                } else {
                    n + (modulus - r) + rem
                }
            }
            MuSpec::ListThen { list, rem, modulus } => {
                if let Some(&hit) = list.iter().find(|&&l| l >= n) {
                    return hit;
                }
                let tail = MuSpec::Residue {
                    rem: *rem,
                    modulus: *modulus,
                };
                let threshold = list.last().map_or(0, |&l| l + 1);
                tail.next_admissible(n.max(threshold))
            }
        }
    }
}

/// Whether all factors of the stage compact sit outside the domain, or
/// only one designated axis does.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum TaskMode {
    /// `K_i` outside `Omega_i` for every axis (checked on samples).
    Outside,
    /// Only `K_axis` is outside `Omega_axis`; the remaining factors are
    /// absorbed into enclosing disks during the fit.
    OneAxisOutside { axis: usize },
}

/// One scheduled approximation target.
#[derive(Debug, Clone, PartialEq)]
pub struct UniversalTask {
    pub id: String,
    pub target: TargetSpec,
    pub compact: ProductCompact,
    pub epsilon: f64,
    /// Exhaustion level on which the correction block must stay small.
    pub level: u32,
    /// Derivative orders whose sup errors the stage must also control.
    pub derivative_orders: Vec<MultiIndex>,
    pub mode: TaskMode,
}

/// Build budgets.
#[derive(Debug, Clone)]
pub struct BuildParams {
    pub escalation: EscalationParams,
    /// Per-factor density of the certificate measurement grids.
    pub cert_density: u32,
    pub cert_cap: usize,
    /// Stage smallness budget `delta_t = eps_t * delta_factor^t`.
    pub delta_factor: f64,
}

impl Default for BuildParams {
    fn default() -> Self {
        BuildParams {
            escalation: EscalationParams::default(),
            cert_density: 16,
            cert_cap: 6000,
            delta_factor: 0.5,
        }
    }
}

/// Per-stage certified errors.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StageRecord {
    pub task_id: String,
    pub lambda: u64,
    /// sup on the K validation grid of `|S_lambda - h|`.
    pub err_k: f64,
    /// sup on the stage-level exhaustion grid of the correction block.
    pub err_l_block: f64,
    /// sup on the stage-level exhaustion grid of `|S_lambda - f_final|`.
    pub err_l_limit: f64,
    /// (order, sup error) pairs when derivative control was scheduled.
    pub deriv_errors: Vec<(MultiIndex, f64)>,
    /// Grading bound used by the correction fit (0 when no block was needed).
    pub grading_bound: u64,
    pub delta: f64,
    pub epsilon: f64,
    pub level: u32,
}

/// Machine-checkable record of a finished build.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Certificate {
    pub scheme: String,
    pub dimension: usize,
    pub mu: MuSpec,
    pub cert_density: u32,
    pub cert_cap: usize,
    pub delta_factor: f64,
    pub stages: Vec<StageRecord>,
}

/// A constructed series: polynomial, enumeration, domain, admissible index
/// filter and the certificate of its build.
#[derive(Debug, Clone)]
pub struct UniversalSeries {
    pub poly: MultiPolynomial,
    pub enumeration: Enumeration,
    pub domain: DomainSpec,
    pub mu: MuSpec,
    pub schedule: Vec<UniversalTask>,
    pub certificate: Certificate,
}

/// Construct a series for the given schedule.
pub fn build_universal(
    domain: &DomainSpec,
    e: &Enumeration,
    mu: &MuSpec,
    schedule: &[UniversalTask],
    params: &BuildParams,
) -> Result<UniversalSeries> {
    mu.validate()?;
    if e.dim() != domain.dim() {
        return Err(Error::Dimension {
            expected: domain.dim(),
            got: e.dim(),
            context: "enumeration vs domain".into(),
        });
    }
    let dim = domain.dim();
    let zeta0 = domain.center.clone();
    for (t, task) in schedule.iter().enumerate() {
        validate_task(domain, task, t, params)?;
    }

    let mut poly = MultiPolynomial::zero(dim, zeta0.clone());
    // index 0 is treated as used (zero constant term), so every correction
    // block out-grades a well-defined top block
    let mut top_index = 0usize;
    let mut prev_lambda: Option<u64> = None;
    let mut stage_meta: Vec<(u64, u64, f64)> = Vec::new(); // (lambda, grading bound, delta)
    let mut max_level_seen = 0u32;

    for (t, task) in schedule.iter().enumerate() {
        let stage_no = t + 1;
        let delta = task.epsilon * params.delta_factor.powi(stage_no as i32);
        max_level_seen = max_level_seen.max(task.level);
        let axis = designated_axis(task);
        let b_top = e.grading(&e.multi_of_index(top_index));
        let m = e.min_power_exceeding_block(axis, b_top);

        // enforcement exhaustion level: cover every level scheduled so far,
        // so earlier stages' interior guarantees survive later corrections
        let enforce_level = max_level_seen;

        let outcome = correction_block(
            domain, e, task, &poly, axis, m, delta, enforce_level, params,
        );
        let block = match outcome {
            Ok(block) => block,
            Err(err) => {
                // abort with the partial certificate
                let certificate =
                    measure_certificate(domain, e, mu, &schedule[..t], &poly, &stage_meta, params)?;
                let partial = UniversalSeries {
                    poly,
                    enumeration: e.clone(),
                    domain: domain.clone(),
                    mu: mu.clone(),
                    schedule: schedule[..t].to_vec(),
                    certificate,
                };
                return Err(Error::BuildAborted {
                    stage: stage_no,
                    message: err.to_string(),
                    partial: Box::new(partial),
                });
            }
        };

        let grading_bound = block.as_ref().map_or(0, |(_, b)| *b);
        if let Some((block_poly, _)) = block {
            debug_assert!(block_poly
                .terms()
                .all(|(a, _)| e.grading(a) > b_top));
            poly.merge_disjoint(&block_poly);
            if let Some(j) = poly.top_index(e) {
                top_index = top_index.max(j);
            }
        }
        let floor = prev_lambda.map_or(top_index as u64, |l| (l + 1).max(top_index as u64));
        let lambda = mu.next_admissible(floor);
        prev_lambda = Some(lambda);
        top_index = lambda as usize;
        stage_meta.push((lambda, grading_bound, delta));
    }

    let certificate = measure_certificate(domain, e, mu, schedule, &poly, &stage_meta, params)?;
    let series = UniversalSeries {
        poly,
        enumeration: e.clone(),
        domain: domain.clone(),
        mu: mu.clone(),
        schedule: schedule.to_vec(),
        certificate,
    };
    Ok(series)
}

fn designated_axis(task: &UniversalTask) -> usize {
    match task.mode {
        TaskMode::Outside => 0,
        TaskMode::OneAxisOutside { axis } => axis,
    }
}

fn validate_task(
    domain: &DomainSpec,
    task: &UniversalTask,
    index: usize,
    params: &BuildParams,
) -> Result<()> {
    let dim = domain.dim();
    let field = format!("schedule[{index}]");
    if !(task.epsilon > 0.0) {
        return Err(Error::validation(format!("{field}.epsilon"), "must be > 0"));
    }
    if task.level == 0 {
        return Err(Error::validation(format!("{field}.level"), "must be >= 1"));
    }
    if task.compact.dim() != dim {
        return Err(Error::Dimension {
            expected: dim,
            got: task.compact.dim(),
            context: format!("{field}.compact"),
        });
    }
    if matches!(task.target, TargetSpec::Raw { .. }) {
        return Err(Error::validation(
            format!("{field}.target"),
            "universal targets must be analytic or polynomial (raw samples cannot be re-evaluated on fresh grids)",
        ));
    }
    for a in &task.derivative_orders {
        if a.dim() != dim {
            return Err(Error::Dimension {
                expected: dim,
                got: a.dim(),
                context: format!("{field}.derivative_orders"),
            });
        }
    }
    let axis = designated_axis(task);
    if axis >= dim {
        return Err(Error::validation(
            format!("{field}.axis"),
            format!("designated axis {axis} out of range for dimension {dim}"),
        ));
    }
    // outside checks are pointwise on samples, per the documented policy
    let check_axes: Vec<usize> = match task.mode {
        TaskMode::Outside => (0..dim).collect(),
        TaskMode::OneAxisOutside { axis } => vec![axis],
    };
    for i in check_axes {
        let pts = task.compact.factors[i].sample(params.cert_density, SampleKind::Fit)?;
        for p in pts {
            if !domain.factors[i].excludes(p) {
                return Err(Error::geometry(format!(
                    "{field}: K factor {i} sample {p} lies inside the domain factor"
                )));
            }
        }
    }
    // the correction divides by (z_axis - center_axis)^m on K
    let clearance = task.compact.factors[axis].distance(domain.center[axis]);
    if clearance <= 1e-6 {
        return Err(Error::geometry(format!(
            "{field}: center coordinate {} is within 1e-6 of K factor {axis}",
            domain.center[axis]
        )));
    }
    Ok(())
}

/// Match-region and zero-region compacts for one stage.
fn stage_regions(
    domain: &DomainSpec,
    task: &UniversalTask,
    enforce_level: u32,
    params: &BuildParams,
) -> Result<(ProductCompact, ProductCompact)> {
    let exhaustion = domain.exhaustion(enforce_level)?;
    match task.mode {
        TaskMode::Outside => Ok((task.compact.clone(), exhaustion)),
        TaskMode::OneAxisOutside { axis } => {
            // enclose K_i and the exhaustion factor in an origin-centered
            // disk on every non-designated axis
            let mut match_factors = Vec::with_capacity(domain.dim());
            let mut zero_factors = Vec::with_capacity(domain.dim());
            for i in 0..domain.dim() {
                if i == axis {
                    match_factors.push(task.compact.factors[i].clone());
                    zero_factors.push(exhaustion.factors[i].clone());
                } else {
                    let rk = task.compact.factors[i]
                        .sampled_radius_from_origin(params.cert_density)?;
                    let rl = exhaustion.factors[i]
                        .sampled_radius_from_origin(params.cert_density)?;
                    let disk = PlanarCompact::disk(ZERO, rk.max(rl) + 0.1)?;
                    match_factors.push(disk.clone());
                    zero_factors.push(disk);
                }
            }
            Ok((
                ProductCompact::new(match_factors)?,
                ProductCompact::new(zero_factors)?,
            ))
        }
    }
}

/// Residual of the stage target against the current partial sum.
fn residual_values(
    task: &UniversalTask,
    current: &MultiPolynomial,
    grid: &SampleSet,
    order: &MultiIndex,
) -> Result<Vec<Complex64>> {
    let current_deriv = current.derivative(order);
    grid.points
        .iter()
        .map(|p| {
            let h = if order.total_degree() == 0 {
                task.target.value_at(p)?
            } else {
                task.target.deriv_at(p, order)?
            };
            Ok(h - current_deriv.evaluate(p))
        })
        .collect()
}

/// Fit one correction block; `None` when the residual is already below the
/// stage budget and no block is needed.
#[allow(clippy::too_many_arguments)]
fn correction_block(
    domain: &DomainSpec,
    e: &Enumeration,
    task: &UniversalTask,
    current: &MultiPolynomial,
    axis: usize,
    m: u32,
    delta: f64,
    enforce_level: u32,
    params: &BuildParams,
) -> Result<Option<(MultiPolynomial, u64)>> {
    let dim = domain.dim();
    let (match_region, zero_region) = stage_regions(domain, task, enforce_level, params)?;
    let half_eps = task.epsilon / 2.0;

    // shortcut: when the residual is already far below the stage budget,
    // no block is needed
    {
        let probe = match_region.sample(
            params.cert_density,
            params.cert_cap,
            SampleKind::Validation,
        )?;
        let mut worst = 0.0f64;
        for v in residual_values(task, current, &probe, &MultiIndex::zero(dim))? {
            worst = worst.max(v.norm());
        }
        for a in &task.derivative_orders {
            for v in residual_values(task, current, &probe, a)? {
                worst = worst.max(v.norm());
            }
        }
        if worst < half_eps * 0.5 {
            return Ok(None);
        }
    }

    let mult = AxisMultiplier {
        axis,
        power: m,
        base: domain.center[axis],
    };
    let report = escalate(e, &params.escalation, |b, support| {
        let scheme = e.scheme();
        let density = params.escalation.density_for(scheme, b);
        let k_fit = match_region.sample(density, params.escalation.fit_cap, SampleKind::Fit)?;
        let k_val = match_region.sample(
            density * params.escalation.validation_factor,
            params.escalation.validation_cap,
            SampleKind::Validation,
        )?;
        let l_fit = zero_region.sample(density, params.escalation.fit_cap, SampleKind::Fit)?;
        let l_val = zero_region.sample(
            density * params.escalation.validation_factor,
            params.escalation.validation_cap,
            SampleKind::Validation,
        )?;
        // pole safety for analytic targets on the (possibly enlarged) region
        for p in k_fit.points.iter().chain(k_val.points.iter()) {
            if task.target.min_pole_distance(p) <= crate::analytic::POLE_TOLERANCE {
                return Err(Error::geometry(format!(
                    "stage target pole within tolerance of fit sample {p:?}"
                )));
            }
        }
        let zero_order = MultiIndex::zero(dim);
        let mut groups = vec![FitGroup {
            label: "K".into(),
            fit_values: residual_values(task, current, &k_fit, &zero_order)?,
            validation_values: residual_values(task, current, &k_val, &zero_order)?,
            fit: k_fit.clone(),
            validation: k_val.clone(),
            weight: 1.0,
            deriv: zero_order.clone(),
            tolerance: half_eps,
        }];
        for a in &task.derivative_orders {
            if a.total_degree() == 0 {
                continue;
            }
            groups.push(FitGroup {
                label: format!("K {}", crate::fit::order_label(a)),
                fit_values: residual_values(task, current, &k_fit, a)?,
                validation_values: residual_values(task, current, &k_val, a)?,
                fit: k_fit.clone(),
                validation: k_val.clone(),
                weight: 1.0,
                deriv: a.clone(),
                tolerance: half_eps,
            });
        }
        groups.push(FitGroup {
            label: "L".into(),
            fit_values: vec![ZERO; l_fit.len()],
            validation_values: vec![ZERO; l_val.len()],
            fit: l_fit,
            validation: l_val,
            weight: 1.0,
            deriv: zero_order,
            tolerance: delta,
        });
        let all_fit: Vec<&[Vec<Complex64>]> =
            groups.iter().map(|g| g.fit.points.as_slice()).collect();
        let scale = AxisScale::enclosing(dim, &all_fit);
        Ok(FitTask {
            dim,
            groups,
            support: support.to_vec(),
            ridge: params.escalation.ridge,
            scale,
            multiplier: Some(mult),
            lawson_iterations: params.escalation.lawson_iterations,
        })
    })?;
    let b = report.grading_bound.unwrap_or(0);
    // recenter the block onto the series center; the designated axis is
    // already there, so exponents on it (all >= m) are preserved
    let block = report.fitted.taylor_shift(&domain.center);
    Ok(Some((block, b)))
}

/// Recompute every certified quantity from the finished polynomial.
fn measure_certificate(
    domain: &DomainSpec,
    e: &Enumeration,
    mu: &MuSpec,
    schedule: &[UniversalTask],
    poly: &MultiPolynomial,
    stage_meta: &[(u64, u64, f64)],
    params: &BuildParams,
) -> Result<Certificate> {
    let mut stages = Vec::with_capacity(schedule.len());
    let mut prev_lambda: Option<u64> = None;
    for (task, &(lambda, grading_bound, delta)) in schedule.iter().zip(stage_meta.iter()) {
        let s_lambda = poly.slice_by_index(e, 0, lambda as usize);
        let k_grid = task.compact.sample(
            params.cert_density,
            params.cert_cap,
            SampleKind::Validation,
        )?;
        let err_k = sup_error(&s_lambda, &task.target, &k_grid, &MultiIndex::zero(poly.dim()))?;
        let mut deriv_errors = Vec::new();
        for a in &task.derivative_orders {
            deriv_errors.push((a.clone(), sup_error(&s_lambda, &task.target, &k_grid, a)?));
        }
        let l_grid = domain.exhaustion(task.level)?.sample(
            params.cert_density,
            params.cert_cap,
            SampleKind::Validation,
        )?;
        let lo = prev_lambda.map_or(0, |l| l as usize + 1);
        let block = poly.slice_by_index(e, lo, lambda as usize);
        let mut err_l_block = 0.0f64;
        let mut err_l_limit = 0.0f64;
        for p in &l_grid.points {
            err_l_block = err_l_block.max(block.evaluate(p).norm());
            err_l_limit = err_l_limit.max((s_lambda.evaluate(p) - poly.evaluate(p)).norm());
        }
        stages.push(StageRecord {
            task_id: task.id.clone(),
            lambda,
            err_k,
            err_l_block,
            err_l_limit,
            deriv_errors,
            grading_bound,
            delta,
            epsilon: task.epsilon,
            level: task.level,
        });
        prev_lambda = Some(lambda);
    }
    Ok(Certificate {
        scheme: e.scheme().name().to_string(),
        dimension: domain.dim(),
        mu: mu.clone(),
        cert_density: params.cert_density,
        cert_cap: params.cert_cap,
        delta_factor: params.delta_factor,
        stages,
    })
}

/// Moving-center verification request: re-expand the series at sampled
/// centers of a compact inside the domain.
#[derive(Debug, Clone)]
pub struct MovingCenterSpec {
    pub compact: ProductCompact,
    pub density: u32,
    pub cap: usize,
}

/// Per-stage moving-center result.
#[derive(Debug, Clone)]
pub struct MovingCenterReport {
    pub task_id: String,
    pub lambda: u64,
    /// Worst over sampled centers of the sup error against the target on K.
    pub worst_k_error: f64,
    pub worst_center: Vec<Complex64>,
    /// sup over centers and points of the re-expanded partial sum against
    /// the series itself on the moving-center compact.
    pub interior_error: f64,
}

/// Verification of a series against its certificate.
#[derive(Debug, Clone)]
pub struct VerificationReport {
    pub stages_checked: usize,
    pub max_discrepancy: f64,
    pub moving_center: Vec<MovingCenterReport>,
}

/// Recompute the certificate from scratch and compare with the recorded
/// one; optionally run the moving-center checks.
pub fn verify_certificate(
    series: &UniversalSeries,
    moving: Option<&MovingCenterSpec>,
) -> Result<VerificationReport> {
    let params = BuildParams {
        cert_density: series.certificate.cert_density,
        cert_cap: series.certificate.cert_cap,
        delta_factor: series.certificate.delta_factor,
        ..BuildParams::default()
    };
    let meta: Vec<(u64, u64, f64)> = series
        .certificate
        .stages
        .iter()
        .map(|s| (s.lambda, s.grading_bound, s.delta))
        .collect();
    if meta.len() != series.schedule.len() {
        return Err(Error::Integrity {
            stage: 0,
            message: format!(
                "certificate has {} stages for {} scheduled tasks",
                meta.len(),
                series.schedule.len()
            ),
        });
    }
    // lambda admissibility and strict growth
    let mut prev: Option<u64> = None;
    for (i, s) in series.certificate.stages.iter().enumerate() {
        if !series.mu.contains(s.lambda) {
            return Err(Error::Integrity {
                stage: i + 1,
                message: format!("lambda {} violates the mu filter", s.lambda),
            });
        }
        if let Some(p) = prev {
            if s.lambda <= p {
                return Err(Error::Integrity {
                    stage: i + 1,
                    message: format!("lambda {} does not increase past {}", s.lambda, p),
                });
            }
        }
        prev = Some(s.lambda);
    }
    if let Some(top) = series.poly.top_index(&series.enumeration) {
        if let Some(last) = prev {
            if (top as u64) > last {
                return Err(Error::Integrity {
                    stage: series.certificate.stages.len(),
                    message: format!("series support index {top} beyond final lambda {last}"),
                });
            }
        } else if !series.poly.is_zero() {
            return Err(Error::Integrity {
                stage: 0,
                message: "nonzero series with empty certificate".into(),
            });
        }
    }

    let fresh = measure_certificate(
        &series.domain,
        &series.enumeration,
        &series.mu,
        &series.schedule,
        &series.poly,
        &meta,
        &params,
    )?;
    let mut max_disc = 0.0f64;
    for (i, (a, b)) in series
        .certificate
        .stages
        .iter()
        .zip(fresh.stages.iter())
        .enumerate()
    {
        let mut fields = vec![
            ("err_k", a.err_k, b.err_k),
            ("err_l_block", a.err_l_block, b.err_l_block),
            ("err_l_limit", a.err_l_limit, b.err_l_limit),
        ];
        for ((ord_a, va), (ord_b, vb)) in a.deriv_errors.iter().zip(b.deriv_errors.iter()) {
            if ord_a != ord_b {
                return Err(Error::Integrity {
                    stage: i + 1,
                    message: "derivative order list mismatch".into(),
                });
            }
            fields.push(("deriv", *va, *vb));
        }
        for (name, recorded, recomputed) in fields {
            let d = (recorded - recomputed).abs();
            max_disc = max_disc.max(d);
            if d > REPLAY_TOLERANCE {
                return Err(Error::Integrity {
                    stage: i + 1,
                    message: format!(
                        "{name}: recorded {recorded:.17e} vs recomputed {recomputed:.17e}"
                    ),
                });
            }
        }
    }

    let mut moving_reports = Vec::new();
    if let Some(spec) = moving {
        let centers = spec.compact.sample(spec.density, spec.cap, SampleKind::Fit)?;
        let interior_grid =
            spec.compact
                .sample(spec.density, spec.cap, SampleKind::Validation)?;
        for (task, s) in series
            .schedule
            .iter()
            .zip(series.certificate.stages.iter())
        {
            let k_grid = task.compact.sample(
                params.cert_density,
                params.cert_cap,
                SampleKind::Validation,
            )?;
            let mut worst_k = 0.0f64;
            let mut worst_center = series.domain.center.clone();
            let mut interior = 0.0f64;
            for zeta in &centers.points {
                let s_moved =
                    series
                        .poly
                        .partial_sum(zeta, s.lambda as usize, &series.enumeration);
                let err =
                    sup_error(&s_moved, &task.target, &k_grid, &MultiIndex::zero(series.poly.dim()))?;
                if err > worst_k {
                    worst_k = err;
                    worst_center = zeta.clone();
                }
                for p in &interior_grid.points {
                    interior =
                        interior.max((s_moved.evaluate(p) - series.poly.evaluate(p)).norm());
                }
            }
            moving_reports.push(MovingCenterReport {
                task_id: task.id.clone(),
                lambda: s.lambda,
                worst_k_error: worst_k,
                worst_center,
                interior_error: interior,
            });
        }
    }

    Ok(VerificationReport {
        stages_checked: series.certificate.stages.len(),
        max_discrepancy: max_disc,
        moving_center: moving_reports,
    })
}

/// Closed-domain seminorm errors `|D^a (S_lambda_t - f)|` per stage and
/// order, measured on a closure grid (boundary included) within `|z| <= radius`.
pub fn ainf_stage_errors(
    series: &UniversalSeries,
    orders: &[MultiIndex],
    radius: u32,
    density: u32,
    cap: usize,
) -> Result<Vec<Vec<f64>>> {
    let closure = series.domain.closure()?;
    let mut out = Vec::with_capacity(series.certificate.stages.len());
    for s in &series.certificate.stages {
        let s_lambda = series
            .poly
            .slice_by_index(&series.enumeration, 0, s.lambda as usize);
        let diff = s_lambda.sub(&series.poly);
        let mut per_order = Vec::with_capacity(orders.len());
        for a in orders {
            per_order.push(crate::fit::a_infinity_seminorm(
                &diff, &closure, radius, a, density, cap,
            )?);
        }
        out.push(per_order);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::analytic::AnalyticTestFunction;
    use crate::domain::DomainFactor;
    use crate::enumeration::Scheme;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn unit_disk_domain() -> DomainSpec {
        DomainSpec::new(
            vec![DomainFactor::Disk {
                center: c(0.0, 0.0),
                radius: 1.0,
            }],
            vec![c(0.0, 0.0)],
        )
        .unwrap()
    }

    fn segment_task(id: &str, value: f64, eps: f64) -> UniversalTask {
        UniversalTask {
            id: id.into(),
            target: TargetSpec::Analytic(AnalyticTestFunction::constant(1, c(value, 0.0))),
            compact: ProductCompact::new(vec![
                PlanarCompact::segment(c(2.0, 0.0), c(3.0, 0.0)).unwrap()
            ])
            .unwrap(),
            epsilon: eps,
            level: 1,
            derivative_orders: vec![],
            mode: TaskMode::Outside,
        }
    }

    #[test]
    fn mu_next_admissible() {
        let all = MuSpec::All;
        assert_eq!(all.next_admissible(7), 7);
        let even = MuSpec::Residue { rem: 0, modulus: 2 };
        assert_eq!(even.next_admissible(7), 8);
        assert_eq!(even.next_admissible(8), 8);
        let listed = MuSpec::ListThen {
            list: vec![3, 5],
            rem: 1,
            modulus: 4,
        };
        assert_eq!(listed.next_admissible(0), 3);
        assert_eq!(listed.next_admissible(4), 5);
        assert_eq!(listed.next_admissible(6), 9);
        assert!(listed.contains(3) && listed.contains(9) && !listed.contains(7));
    }

    #[test]
    fn empty_schedule_gives_zero_series() {
        let domain = unit_disk_domain();
        let e = Enumeration::new(1, Scheme::Graded).unwrap();
        let s = build_universal(&domain, &e, &MuSpec::All, &[], &BuildParams::default()).unwrap();
        assert!(s.poly.is_zero());
        assert!(s.certificate.stages.is_empty());
    }

    #[test]
    fn single_stage_build_and_verify() {
        let domain = unit_disk_domain();
        let e = Enumeration::new(1, Scheme::Graded).unwrap();
        let schedule = vec![segment_task("h1", 1.0, 0.1)];
        let s =
            build_universal(&domain, &e, &MuSpec::All, &schedule, &BuildParams::default())
                .unwrap();
        let cert = &s.certificate.stages[0];
        assert!(cert.err_k < 0.1, "err_k {}", cert.err_k);
        assert!(cert.err_l_block < cert.delta, "block {}", cert.err_l_block);
        // final stage partial sum equals the full series
        assert_eq!(cert.err_l_limit, 0.0);
        let report = verify_certificate(&s, None).unwrap();
        assert_eq!(report.stages_checked, 1);
        assert!(report.max_discrepancy <= REPLAY_TOLERANCE);
    }

    #[test]
    fn two_stage_overconvergence_oscillation() {
        let domain = unit_disk_domain();
        let e = Enumeration::new(1, Scheme::Graded).unwrap();
        let mu = MuSpec::Residue { rem: 0, modulus: 2 };
        let schedule = vec![segment_task("h1", 1.0, 0.1), segment_task("h2", 0.0, 0.1)];
        let s = build_universal(&domain, &e, &mu, &schedule, &BuildParams::default()).unwrap();
        let [s1, s2] = [&s.certificate.stages[0], &s.certificate.stages[1]];
        assert!(s1.lambda < s2.lambda);
        assert_eq!(s1.lambda % 2, 0);
        assert_eq!(s2.lambda % 2, 0);
        assert!(s1.err_k < 0.1 && s2.err_k < 0.1);
        // interior tail after stage 1 is the stage-2 block
        assert!(s1.err_l_limit <= s2.delta + 1e-12);
        verify_certificate(&s, None).unwrap();
    }

    #[test]
    fn prefix_stability_across_schedule_extension() {
        // the certified prefix of a longer schedule is bit-identical to
        // the series built from the shorter one
        let domain = unit_disk_domain();
        let e = Enumeration::new(1, Scheme::Graded).unwrap();
        let one = vec![segment_task("h1", 1.0, 0.1)];
        let two = vec![segment_task("h1", 1.0, 0.1), segment_task("h2", 0.0, 0.1)];
        let a = build_universal(&domain, &e, &MuSpec::All, &one, &BuildParams::default())
            .unwrap();
        let b = build_universal(&domain, &e, &MuSpec::All, &two, &BuildParams::default())
            .unwrap();
        let lambda1 = a.certificate.stages[0].lambda;
        assert_eq!(lambda1, b.certificate.stages[0].lambda);
        let prefix = b.poly.slice_by_index(&e, 0, lambda1 as usize);
        assert_eq!(prefix.num_terms(), a.poly.num_terms());
        for (idx, v) in a.poly.terms() {
            let w = prefix.coeff(idx);
            assert_eq!(v.re.to_bits(), w.re.to_bits(), "at {idx}");
            assert_eq!(v.im.to_bits(), w.im.to_bits(), "at {idx}");
        }
    }

    #[test]
    fn three_variable_build() {
        let domain = DomainSpec::new(
            vec![
                DomainFactor::Disk {
                    center: c(0.0, 0.0),
                    radius: 1.0,
                };
                3
            ],
            vec![c(0.0, 0.0); 3],
        )
        .unwrap();
        let e = Enumeration::new(3, Scheme::Graded).unwrap();
        let seg = PlanarCompact::segment(c(2.0, 0.0), c(3.0, 0.0)).unwrap();
        let task = UniversalTask {
            id: "h1".into(),
            target: TargetSpec::Analytic(AnalyticTestFunction::constant(3, c(1.0, 0.0))),
            compact: ProductCompact::new(vec![seg.clone(), seg.clone(), seg]).unwrap(),
            epsilon: 0.1,
            level: 1,
            derivative_orders: vec![],
            mode: TaskMode::Outside,
        };
        let s = build_universal(&domain, &e, &MuSpec::All, &[task], &BuildParams::default())
            .unwrap();
        assert!(s.certificate.stages[0].err_k < 0.1);
        verify_certificate(&s, None).unwrap();
    }

    #[test]
    fn polygon_domain_build() {
        let domain = DomainSpec::new(
            vec![DomainFactor::Polygon {
                vertices: vec![c(-1.0, -1.0), c(1.0, -1.0), c(1.0, 1.0), c(-1.0, 1.0)],
            }],
            vec![c(0.0, 0.0)],
        )
        .unwrap();
        let e = Enumeration::new(1, Scheme::Graded).unwrap();
        let schedule = vec![segment_task("h1", 1.0, 0.1)];
        let s =
            build_universal(&domain, &e, &MuSpec::All, &schedule, &BuildParams::default())
                .unwrap();
        assert!(s.certificate.stages[0].err_k < 0.1);
        verify_certificate(&s, None).unwrap();
    }

    #[test]
    fn spherical_d1_build() {
        // spherical gradings in one variable are the perfect squares; the
        // support escalation and the block shift must follow them
        let domain = unit_disk_domain();
        let e = Enumeration::new(1, Scheme::Spherical).unwrap();
        let schedule = vec![segment_task("h1", 1.0, 0.1), segment_task("h2", 0.0, 0.1)];
        let s =
            build_universal(&domain, &e, &MuSpec::All, &schedule, &BuildParams::default())
                .unwrap();
        let stages = &s.certificate.stages;
        assert!(stages[0].lambda < stages[1].lambda);
        assert!(stages[0].err_k < 0.1 && stages[1].err_k < 0.1);
        verify_certificate(&s, None).unwrap();
    }

    #[test]
    fn derivative_controlled_stage() {
        // smooth mode: the stage also pins the first derivative on K
        use crate::analytic::Factor;
        let domain = unit_disk_domain();
        let e = Enumeration::new(1, Scheme::Graded).unwrap();
        let target = TargetSpec::Analytic(
            AnalyticTestFunction::product(vec![Factor::Rational {
                numer: vec![c(1.0, 0.0)],
                poles: vec![c(5.0, 0.0)],
            }])
            .unwrap(),
        );
        let task = UniversalTask {
            id: "smooth".into(),
            target,
            compact: ProductCompact::new(vec![
                PlanarCompact::segment(c(2.0, 0.0), c(3.0, 0.0)).unwrap(),
            ])
            .unwrap(),
            epsilon: 0.05,
            level: 1,
            derivative_orders: vec![MultiIndex::new(vec![1])],
            mode: TaskMode::Outside,
        };
        let s = build_universal(&domain, &e, &MuSpec::All, &[task], &BuildParams::default())
            .unwrap();
        let stage = &s.certificate.stages[0];
        assert!(stage.err_k < 0.05);
        assert_eq!(stage.deriv_errors.len(), 1);
        assert!(
            stage.deriv_errors[0].1 < 0.05,
            "derivative error {}",
            stage.deriv_errors[0].1
        );
        verify_certificate(&s, None).unwrap();
    }

    #[test]
    fn repeated_target_skips_correction() {
        let domain = unit_disk_domain();
        let e = Enumeration::new(1, Scheme::Graded).unwrap();
        // the second stage's budget comfortably covers the stage-1 residual,
        // so no correction block is needed
        let schedule = vec![
            segment_task("h1", 1.0, 0.1),
            segment_task("h1_again", 1.0, 0.4),
        ];
        let s =
            build_universal(&domain, &e, &MuSpec::All, &schedule, &BuildParams::default())
                .unwrap();
        let [s1, s2] = [&s.certificate.stages[0], &s.certificate.stages[1]];
        assert!(s2.lambda > s1.lambda, "lambda still advances");
        // the residual was already inside the budget: empty block
        assert_eq!(s2.grading_bound, 0);
        assert_eq!(s2.err_l_block, 0.0);
        assert!(s2.err_k < 0.4);
        verify_certificate(&s, None).unwrap();
    }

    #[test]
    fn tampering_is_detected() {
        let domain = unit_disk_domain();
        let e = Enumeration::new(1, Scheme::Graded).unwrap();
        let schedule = vec![segment_task("h1", 1.0, 0.1)];
        let mut s =
            build_universal(&domain, &e, &MuSpec::All, &schedule, &BuildParams::default())
                .unwrap();
        // perturb one coefficient by 1e-6
        let (idx, val) = {
            let (a, v) = s.poly.terms().last().unwrap();
            (a.clone(), *v)
        };
        let mut coeffs: Vec<(MultiIndex, Complex64)> =
            s.poly.terms().map(|(a, v)| (a.clone(), *v)).collect();
        for (a, v) in coeffs.iter_mut() {
            if *a == idx {
                *v = val + c(1e-6, 0.0);
            }
        }
        s.poly = MultiPolynomial::from_coeffs(1, s.poly.center().to_vec(), coeffs).unwrap();
        let err = verify_certificate(&s, None).unwrap_err();
        assert!(matches!(err, Error::Integrity { .. }), "{err}");
    }

    #[test]
    fn lambda_filter_violation_detected() {
        let domain = unit_disk_domain();
        let e = Enumeration::new(1, Scheme::Graded).unwrap();
        let schedule = vec![segment_task("h1", 1.0, 0.1)];
        let mut s =
            build_universal(&domain, &e, &MuSpec::All, &schedule, &BuildParams::default())
                .unwrap();
        s.mu = MuSpec::Residue {
            rem: 1 - (s.certificate.stages[0].lambda % 2),
            modulus: 2,
        };
        assert!(verify_certificate(&s, None).is_err());
    }

    #[test]
    fn task_inside_domain_rejected() {
        let domain = unit_disk_domain();
        let e = Enumeration::new(1, Scheme::Graded).unwrap();
        let mut task = segment_task("bad", 1.0, 0.1);
        task.compact = ProductCompact::new(vec![
            PlanarCompact::segment(c(0.1, 0.0), c(0.2, 0.0)).unwrap(),
        ])
        .unwrap();
        let err = build_universal(
            &domain,
            &e,
            &MuSpec::All,
            &[task],
            &BuildParams::default(),
        )
        .unwrap_err();
        assert!(err.to_string().contains("inside the domain"), "{err}");
    }
}
