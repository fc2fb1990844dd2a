//! Run configuration: a single TOML document describing the enumeration,
//! domain, budgets and the work each CLI subcommand should do.
//!
//! Parsing validates everything up front and reports the offending field
//! path; the raw document is retained so a validated configuration can be
//! re-emitted verbatim.

use crate::analytic::{AnalyticTestFunction, Term};
use crate::domain::{DomainFactor, DomainSpec};
use crate::enumeration::{Enumeration, Scheme};
use crate::error::{Error, Result};
use crate::fit::TargetSpec;
use crate::multi_index::MultiIndex;
use crate::planar::{PlanarCompact, ProductCompact, Shape};
use crate::poly::MultiPolynomial;
use crate::rearrange::Preset;
use crate::universal::{BuildParams, MovingCenterSpec, MuSpec, TaskMode, UniversalTask};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

fn default_level() -> u32 {
    1
}

/// Serializable target description.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum TargetCfg {
    Constant {
        value: Complex64,
    },
    Analytic {
        terms: Vec<Term>,
    },
    Poly {
        center: Vec<Complex64>,
        coefficients: Vec<super::series::CoeffEntry>,
    },
}

impl TargetCfg {
    fn build(&self, dim: usize, path: &str) -> Result<TargetSpec> {
        let at = |e: Error| prefix_field(e, path);
        match self {
            TargetCfg::Constant { value } => {
                Ok(TargetSpec::Analytic(AnalyticTestFunction::constant(
                    dim, *value,
                )))
            }
            TargetCfg::Analytic { terms } => Ok(TargetSpec::Analytic(
                AnalyticTestFunction::new(dim, terms.clone()).map_err(at)?,
            )),
            TargetCfg::Poly {
                center,
                coefficients,
            } => {
                let coeffs = coefficients.iter().map(|e| {
                    (
                        MultiIndex::new(e.multi.clone()),
                        Complex64::new(e.re, e.im),
                    )
                });
                Ok(TargetSpec::Poly(
                    MultiPolynomial::from_coeffs(dim, center.clone(), coeffs).map_err(at)?,
                ))
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EnumCfg {
    pub scheme: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub prefix: Option<Vec<Vec<u32>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub fallback: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DomainCfg {
    pub center: Vec<Complex64>,
    pub factors: Vec<DomainFactor>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BudgetCfg {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub degree_cap: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub base_density: Option<u32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub validation_factor: Option<u32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub fit_cap: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub validation_cap: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ridge: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lawson_iterations: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cert_density: Option<u32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cert_cap: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub delta_factor: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TaskCfg {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub id: Option<String>,
    pub epsilon: f64,
    #[serde(default = "default_level")]
    pub level: u32,
    /// 1-based designated axis: only this factor must lie outside the
    /// domain (the others are absorbed into enclosing disks).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub axis: Option<usize>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub derivative_orders: Vec<Vec<u32>>,
    pub target: TargetCfg,
    pub compact: Vec<Shape>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ApproxCfg {
    pub mode: String,
    pub epsilon: f64,
    pub target: TargetCfg,
    pub k: Vec<Shape>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub l: Option<Vec<Shape>>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub derivative_orders: Vec<Vec<u32>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EvalCfg {
    pub grid: Vec<Shape>,
    #[serde(default = "default_eval_density")]
    pub density: u32,
    #[serde(default = "default_eval_cap")]
    pub cap: usize,
}

fn default_eval_density() -> u32 {
    8
}

fn default_eval_cap() -> usize {
    2000
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RearrangeCfg {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub preset: Option<Preset>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub length: Option<usize>,
    /// Path to a term file (one real number per line).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub path: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tail_start: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NonuniversalCfg {
    pub z1: Vec<Complex64>,
    pub z2: Vec<Complex64>,
    pub prefix_len: usize,
    #[serde(default)]
    pub group_by_block: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tail_start: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VerifyCfg {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub moving_center: Option<Vec<Shape>>,
    #[serde(default = "default_mc_density")]
    pub density: u32,
    #[serde(default = "default_mc_cap")]
    pub cap: usize,
}

fn default_mc_density() -> u32 {
    4
}

fn default_mc_cap() -> usize {
    200
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AinfCfg {
    pub orders: Vec<Vec<u32>>,
    pub radius: u32,
    #[serde(default = "default_ainf_density")]
    pub density: u32,
    #[serde(default = "default_ainf_cap")]
    pub cap: usize,
}

fn default_ainf_density() -> u32 {
    16
}

fn default_ainf_cap() -> usize {
    4000
}

/// The raw document, as written by the user.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawConfig {
    pub dimension: usize,
    pub enumeration: EnumCfg,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mu: Option<MuSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub domain: Option<DomainCfg>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub budgets: Option<BudgetCfg>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub schedule: Vec<TaskCfg>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub approx: Option<ApproxCfg>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub eval: Option<EvalCfg>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rearrange: Option<RearrangeCfg>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub nonuniversal: Option<NonuniversalCfg>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub verify: Option<VerifyCfg>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ainf: Option<AinfCfg>,
}

/// How the `approx` subcommand should fit.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ApproxMode {
    Simultaneous,
    Derivative,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ApproxRequest {
    pub mode: ApproxMode,
    pub epsilon: f64,
    pub target: TargetSpec,
    pub k: ProductCompact,
    pub l: Option<ProductCompact>,
    pub orders: Vec<MultiIndex>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EvalRequest {
    pub grid: ProductCompact,
    pub density: u32,
    pub cap: usize,
}

/// Term source for the rearrangement subcommand; files are resolved by the
/// caller so parsing stays pure.
#[derive(Debug, Clone, PartialEq)]
pub enum TermSource {
    Preset { preset: Preset, length: usize },
    File { path: String },
}

#[derive(Debug, Clone, PartialEq)]
pub struct RearrangeRequest {
    pub source: TermSource,
    pub tail_start: Option<usize>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct NonuniversalRequest {
    pub z1: Vec<Complex64>,
    pub z2: Vec<Complex64>,
    pub prefix_len: usize,
    pub group_by_block: bool,
    pub tail_start: Option<usize>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct AinfRequest {
    pub orders: Vec<MultiIndex>,
    pub radius: u32,
    pub density: u32,
    pub cap: usize,
}

/// A validated configuration.
#[derive(Debug, Clone)]
pub struct RunConfig {
    pub raw: RawConfig,
    pub dimension: usize,
    pub enumeration: Enumeration,
    pub mu: MuSpec,
    pub domain: Option<DomainSpec>,
    pub build_params: BuildParams,
    pub schedule: Vec<UniversalTask>,
    pub approx: Option<ApproxRequest>,
    pub eval: Option<EvalRequest>,
    pub rearrange: Option<RearrangeRequest>,
    pub nonuniversal: Option<NonuniversalRequest>,
    pub moving_center: Option<MovingCenterSpec>,
    pub ainf: Option<AinfRequest>,
}

fn prefix_field(e: Error, path: &str) -> Error {
    match e {
        Error::Validation { field, message } => Error::Validation {
            field: format!("{path}.{field}"),
            message,
        },
        other => other,
    }
}

fn scheme_of(name: &str, field: &str) -> Result<Scheme> {
    match name {
        "rectangular" => Ok(Scheme::Rectangular),
        "spherical" => Ok(Scheme::Spherical),
        "graded" => Ok(Scheme::Graded),
        other => Err(Error::validation(
            field,
            format!("unknown scheme '{other}' (expected rectangular | spherical | graded | custom)"),
        )),
    }
}

fn compact_from_shapes(shapes: &[Shape], dim: usize, path: &str) -> Result<ProductCompact> {
    if shapes.len() != dim {
        return Err(Error::Dimension {
            expected: dim,
            got: shapes.len(),
            context: path.to_string(),
        });
    }
    let factors = shapes
        .iter()
        .enumerate()
        .map(|(i, s)| {
            PlanarCompact::new(s.clone()).map_err(|e| prefix_field(e, &format!("{path}[{i}]")))
        })
        .collect::<Result<Vec<_>>>()?;
    ProductCompact::new(factors)
}

fn orders_from(raw: &[Vec<u32>], dim: usize, path: &str) -> Result<Vec<MultiIndex>> {
    raw.iter()
        .enumerate()
        .map(|(i, v)| {
            if v.len() != dim {
                Err(Error::Dimension {
                    expected: dim,
                    got: v.len(),
                    context: format!("{path}[{i}]"),
                })
            } else {
                Ok(MultiIndex::new(v.clone()))
            }
        })
        .collect()
}

/// Parse and validate a configuration document.
pub fn parse_config(text: &str) -> Result<RunConfig> {
    let raw: RawConfig =
        toml::from_str(text).map_err(|e| Error::validation("config", e.to_string()))?;
    let dim = raw.dimension;
    if dim == 0 {
        return Err(Error::validation("dimension", "must be >= 1"));
    }

    let enumeration = if raw.enumeration.scheme == "custom" {
        let fallback = raw.enumeration.fallback.as_deref().ok_or_else(|| {
            Error::validation("enumeration.fallback", "required for custom scheme")
        })?;
        let prefix = raw
            .enumeration
            .prefix
            .as_ref()
            .ok_or_else(|| Error::validation("enumeration.prefix", "required for custom scheme"))?
            .iter()
            .map(|v| MultiIndex::new(v.clone()))
            .collect();
        Enumeration::with_custom_prefix(dim, scheme_of(fallback, "enumeration.fallback")?, prefix)?
    } else {
        Enumeration::new(dim, scheme_of(&raw.enumeration.scheme, "enumeration.scheme")?)?
    };

    let mu = raw.mu.clone().unwrap_or(MuSpec::All);
    mu.validate()?;

    let domain = match &raw.domain {
        None => None,
        Some(d) => Some(
            DomainSpec::new(d.factors.clone(), d.center.clone())
                .map_err(|e| prefix_field(e, "domain"))?,
        ),
    };

    let mut build_params = BuildParams::default();
    if let Some(b) = &raw.budgets {
        let esc = &mut build_params.escalation;
        if let Some(v) = b.degree_cap {
            esc.cap = v;
        }
        if let Some(v) = b.base_density {
            esc.base_density = v;
        }
        if let Some(v) = b.validation_factor {
            if v < 3 {
                return Err(Error::validation(
                    "budgets.validation_factor",
                    "must be >= 3 so validation grids are denser than fit grids",
                ));
            }
            esc.validation_factor = v;
        }
        if let Some(v) = b.fit_cap {
            esc.fit_cap = v;
        }
        if let Some(v) = b.validation_cap {
            esc.validation_cap = v;
        }
        if let Some(v) = b.ridge {
            if v < 0.0 {
                return Err(Error::validation("budgets.ridge", "must be >= 0"));
            }
            esc.ridge = v;
        }
        if let Some(v) = b.lawson_iterations {
            esc.lawson_iterations = v;
        }
        if let Some(v) = b.cert_density {
            build_params.cert_density = v;
        }
        if let Some(v) = b.cert_cap {
            build_params.cert_cap = v;
        }
        if let Some(v) = b.delta_factor {
            if !(v > 0.0 && v < 1.0) {
                return Err(Error::validation(
                    "budgets.delta_factor",
                    "must lie in (0, 1) so stage budgets are summable",
                ));
            }
            build_params.delta_factor = v;
        }
    }

    let mut schedule = Vec::with_capacity(raw.schedule.len());
    for (i, t) in raw.schedule.iter().enumerate() {
        let path = format!("schedule[{i}]");
        if !(t.epsilon > 0.0) {
            return Err(Error::validation(format!("{path}.epsilon"), "must be > 0"));
        }
        let compact = compact_from_shapes(&t.compact, dim, &format!("{path}.compact"))?;
        let mode = match t.axis {
            None => TaskMode::Outside,
            Some(a) => {
                if a == 0 || a > dim {
                    return Err(Error::validation(
                        format!("{path}.axis"),
                        format!("must be in 1..={dim}"),
                    ));
                }
                TaskMode::OneAxisOutside { axis: a - 1 }
            }
        };
        schedule.push(UniversalTask {
            id: t.id.clone().unwrap_or_else(|| format!("stage{}", i + 1)),
            target: t.target.build(dim, &format!("{path}.target"))?,
            compact,
            epsilon: t.epsilon,
            level: t.level,
            derivative_orders: orders_from(
                &t.derivative_orders,
                dim,
                &format!("{path}.derivative_orders"),
            )?,
            mode,
        });
    }

    let approx = match &raw.approx {
        None => None,
        Some(a) => {
            let mode = match a.mode.as_str() {
                "simultaneous" => ApproxMode::Simultaneous,
                "derivative" => ApproxMode::Derivative,
                other => {
                    return Err(Error::validation(
                        "approx.mode",
                        format!("unknown mode '{other}' (expected simultaneous | derivative)"),
                    ))
                }
            };
            if !(a.epsilon > 0.0) {
                return Err(Error::validation("approx.epsilon", "must be > 0"));
            }
            Some(ApproxRequest {
                mode,
                epsilon: a.epsilon,
                target: a.target.build(dim, "approx.target")?,
                k: compact_from_shapes(&a.k, dim, "approx.k")?,
                l: a
                    .l
                    .as_ref()
                    .map(|l| compact_from_shapes(l, dim, "approx.l"))
                    .transpose()?,
                orders: orders_from(&a.derivative_orders, dim, "approx.derivative_orders")?,
            })
        }
    };

    let eval = match &raw.eval {
        None => None,
        Some(e) => Some(EvalRequest {
            grid: compact_from_shapes(&e.grid, dim, "eval.grid")?,
            density: e.density,
            cap: e.cap,
        }),
    };

    let rearrange = match &raw.rearrange {
        None => None,
        Some(r) => {
            let source = match (&r.preset, &r.path) {
                (Some(p), None) => TermSource::Preset {
                    preset: *p,
                    length: r.length.ok_or_else(|| {
                        Error::validation("rearrange.length", "required with a preset")
                    })?,
                },
                (None, Some(path)) => TermSource::File { path: path.clone() },
                _ => {
                    return Err(Error::validation(
                        "rearrange",
                        "exactly one of preset/path is required",
                    ))
                }
            };
            Some(RearrangeRequest {
                source,
                tail_start: r.tail_start,
            })
        }
    };

    let nonuniversal = match &raw.nonuniversal {
        None => None,
        Some(n) => {
            for (name, z) in [("z1", &n.z1), ("z2", &n.z2)] {
                if z.len() != dim {
                    return Err(Error::Dimension {
                        expected: dim,
                        got: z.len(),
                        context: format!("nonuniversal.{name}"),
                    });
                }
            }
            Some(NonuniversalRequest {
                z1: n.z1.clone(),
                z2: n.z2.clone(),
                prefix_len: n.prefix_len,
                group_by_block: n.group_by_block,
                tail_start: n.tail_start,
            })
        }
    };

    let moving_center = match &raw.verify {
        None => None,
        Some(v) => match &v.moving_center {
            None => None,
            Some(shapes) => Some(MovingCenterSpec {
                compact: compact_from_shapes(shapes, dim, "verify.moving_center")?,
                density: v.density,
                cap: v.cap,
            }),
        },
    };

    let ainf = match &raw.ainf {
        None => None,
        Some(a) => Some(AinfRequest {
            orders: orders_from(&a.orders, dim, "ainf.orders")?,
            radius: a.radius,
            density: a.density,
            cap: a.cap,
        }),
    };

    Ok(RunConfig {
        dimension: dim,
        enumeration,
        mu,
        domain,
        build_params,
        schedule,
        approx,
        eval,
        rearrange,
        nonuniversal,
        moving_center,
        ainf,
        raw,
    })
}

/// Re-emit a validated configuration.
pub fn emit_config(config: &RunConfig) -> Result<String> {
    toml::to_string_pretty(&config.raw).map_err(|e| Error::Io(format!("config encode: {e}")))
}

/// Apply `OVC_*` environment overrides for grid densities and caps.
pub fn apply_env_overrides(
    params: &mut BuildParams,
    get: impl Fn(&str) -> Option<String>,
) -> Result<()> {
    fn set<T: std::str::FromStr>(
        slot: &mut T,
        name: &str,
        get: &impl Fn(&str) -> Option<String>,
    ) -> Result<()> {
        if let Some(v) = get(name) {
            *slot = v
                .parse()
                .map_err(|_| Error::validation(name, format!("cannot parse '{v}'")))?;
        }
        Ok(())
    }
    set(&mut params.escalation.base_density, "OVC_BASE_DENSITY", &get)?;
    set(
        &mut params.escalation.validation_factor,
        "OVC_VALIDATION_FACTOR",
        &get,
    )?;
    set(&mut params.escalation.fit_cap, "OVC_FIT_CAP", &get)?;
    set(
        &mut params.escalation.validation_cap,
        "OVC_VALIDATION_CAP",
        &get,
    )?;
    set(&mut params.escalation.cap, "OVC_DEGREE_CAP", &get)?;
    set(&mut params.cert_density, "OVC_CERT_DENSITY", &get)?;
    set(&mut params.cert_cap, "OVC_CERT_CAP", &get)?;
    Ok(())
}

/// Resolve a term source, reading term files (one real per line).
pub fn resolve_terms(source: &TermSource) -> Result<crate::rearrange::TermSequence> {
    match source {
        TermSource::Preset { preset, length } => {
            crate::rearrange::TermSequence::preset(*preset, *length)
        }
        TermSource::File { path } => {
            let text = std::fs::read_to_string(path)?;
            let mut terms = Vec::new();
            for (lineno, line) in text.lines().enumerate() {
                let line = line.trim();
                if line.is_empty() {
                    continue;
                }
                terms.push(line.parse::<f64>().map_err(|_| {
                    Error::validation(
                        format!("{path}:{}", lineno + 1),
                        format!("cannot parse '{line}' as a real number"),
                    )
                })?);
            }
            crate::rearrange::TermSequence::from_values(terms)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = r#"
dimension = 1

[enumeration]
scheme = "graded"

[domain]
center = [[0.0, 0.0]]

[[domain.factors]]
kind = "disk"
center = [0.0, 0.0]
radius = 1.0

[[schedule]]
epsilon = 0.1

[schedule.target]
kind = "constant"
value = [1.0, 0.0]

[[schedule.compact]]
kind = "segment"
a = [2.0, 0.0]
b = [3.0, 0.0]
"#;

    #[test]
    fn minimal_config_parses() {
        let cfg = parse_config(MINIMAL).unwrap();
        assert_eq!(cfg.dimension, 1);
        assert_eq!(cfg.schedule.len(), 1);
        assert_eq!(cfg.schedule[0].id, "stage1");
        assert!(cfg.domain.is_some());
    }

    #[test]
    fn misspelled_scheme_names_field() {
        let text = MINIMAL.replace("\"graded\"", "\"sperical\"");
        let err = parse_config(&text).unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("scheme") && msg.contains("sperical"), "{msg}");
    }

    #[test]
    fn wrong_compact_dimension_reported() {
        let text = MINIMAL.to_string()
            + r#"
[[schedule.compact]]
kind = "segment"
a = [5.0, 0.0]
b = [6.0, 0.0]
"#;
        let err = parse_config(&text).unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("schedule[0].compact"), "{msg}");
    }

    #[test]
    fn nonpositive_epsilon_rejected() {
        let text = MINIMAL.replace("epsilon = 0.1", "epsilon = 0.0");
        let err = parse_config(&text).unwrap_err();
        assert!(err.to_string().contains("epsilon"), "{err}");
    }

    #[test]
    fn config_roundtrip_is_identity() {
        let cfg = parse_config(MINIMAL).unwrap();
        let emitted = emit_config(&cfg).unwrap();
        let cfg2 = parse_config(&emitted).unwrap();
        assert_eq!(cfg.raw, cfg2.raw);
        assert_eq!(cfg.enumeration, cfg2.enumeration);
        assert_eq!(cfg.mu, cfg2.mu);
        assert_eq!(cfg.domain, cfg2.domain);
        assert_eq!(cfg.schedule, cfg2.schedule);
    }

    #[test]
    fn env_overrides_apply() {
        let mut params = BuildParams::default();
        apply_env_overrides(&mut params, |name| match name {
            "OVC_BASE_DENSITY" => Some("20".into()),
            "OVC_CERT_CAP" => Some("9000".into()),
            _ => None,
        })
        .unwrap();
        assert_eq!(params.escalation.base_density, 20);
        assert_eq!(params.cert_cap, 9000);
        let err = apply_env_overrides(&mut params, |name| {
            (name == "OVC_FIT_CAP").then(|| "not-a-number".into())
        })
        .unwrap_err();
        assert!(err.to_string().contains("OVC_FIT_CAP"));
    }

    #[test]
    fn custom_enumeration_config() {
        let text = MINIMAL.replace(
            "scheme = \"graded\"",
            "scheme = \"custom\"\nfallback = \"graded\"\nprefix = [[0], [1]]",
        );
        let cfg = parse_config(&text).unwrap();
        assert_eq!(cfg.enumeration.custom_prefix().len(), 2);
    }

    #[test]
    fn remark_axis_mode_parses() {
        let text = MINIMAL.replace("epsilon = 0.1", "epsilon = 0.1\naxis = 1");
        let cfg = parse_config(&text).unwrap();
        assert_eq!(
            cfg.schedule[0].mode,
            TaskMode::OneAxisOutside { axis: 0 }
        );
        let bad = MINIMAL.replace("epsilon = 0.1", "epsilon = 0.1\naxis = 2");
        assert!(parse_config(&bad).is_err());
    }
}
