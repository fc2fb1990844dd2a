//! Lossless text persistence of series and certificates.
//!
//! The on-disk format is TOML with floats printed in shortest-roundtrip
//! decimal, so `load(save(s))` reproduces every coefficient bit-exactly
//! and files diff cleanly.  Coefficients are stored with both their
//! enumeration index and their multi-index; the pair is revalidated on
//! load, which catches reordered or edited records.

use crate::enumeration::{Enumeration, Scheme};
use crate::error::{Error, Result};
use crate::fit::TargetSpec;
use crate::multi_index::MultiIndex;
use crate::planar::ProductCompact;
use crate::poly::MultiPolynomial;
use crate::universal::{Certificate, MuSpec, TaskMode, UniversalSeries, UniversalTask};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::path::Path;

pub const FORMAT_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SeriesCoeff {
    pub index: u64,
    pub multi: Vec<u32>,
    pub re: f64,
    pub im: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoeffEntry {
    pub multi: Vec<u32>,
    pub re: f64,
    pub im: f64,
}

/// Serializable stage target.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum TargetFile {
    Analytic {
        function: crate::analytic::AnalyticTestFunction,
    },
    Poly {
        center: Vec<Complex64>,
        coefficients: Vec<CoeffEntry>,
    },
}

impl TargetFile {
    pub fn from_spec(spec: &TargetSpec) -> Result<Self> {
        match spec {
            TargetSpec::Analytic(f) => Ok(TargetFile::Analytic {
                function: f.clone(),
            }),
            TargetSpec::Poly(p) => Ok(TargetFile::Poly {
                center: p.center().to_vec(),
                coefficients: p
                    .terms()
                    .map(|(a, c)| CoeffEntry {
                        multi: a.as_slice().to_vec(),
                        re: c.re,
                        im: c.im,
                    })
                    .collect(),
            }),
            TargetSpec::Raw { .. } => Err(Error::validation(
                "target",
                "raw-sample targets are not persistable",
            )),
        }
    }

    pub fn into_spec(self, dim: usize) -> Result<TargetSpec> {
        match self {
            TargetFile::Analytic { function } => {
                // revalidate: serde bypasses the constructor
                let function =
                    crate::analytic::AnalyticTestFunction::new(dim, function.terms().to_vec())?;
                Ok(TargetSpec::Analytic(function))
            }
            TargetFile::Poly {
                center,
                coefficients,
            } => {
                let coeffs = coefficients.into_iter().map(|e| {
                    (
                        MultiIndex::new(e.multi),
                        Complex64::new(e.re, e.im),
                    )
                });
                Ok(TargetSpec::Poly(MultiPolynomial::from_coeffs(
                    dim, center, coeffs,
                )?))
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TaskFile {
    pub id: String,
    pub epsilon: f64,
    pub level: u32,
    pub derivative_orders: Vec<Vec<u32>>,
    pub mode: TaskMode,
    pub target: TargetFile,
    pub compact: ProductCompact,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BuildMeta {
    pub tool_version: String,
}

/// The complete series file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SeriesFile {
    pub format_version: u32,
    pub dimension: usize,
    pub scheme: Scheme,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub custom_prefix: Option<Vec<Vec<u32>>>,
    pub center: Vec<Complex64>,
    pub mu: MuSpec,
    pub domain: crate::domain::DomainSpec,
    pub build: BuildMeta,
    pub coefficients: Vec<SeriesCoeff>,
    pub schedule: Vec<TaskFile>,
    pub certificate: Certificate,
}

impl SeriesFile {
    pub fn from_series(series: &UniversalSeries) -> Result<Self> {
        let e = &series.enumeration;
        let mut coefficients: Vec<SeriesCoeff> = series
            .poly
            .terms()
            .map(|(a, c)| SeriesCoeff {
                index: e.index_of_multi(a) as u64,
                multi: a.as_slice().to_vec(),
                re: c.re,
                im: c.im,
            })
            .collect();
        coefficients.sort_by_key(|c| c.index);
        let schedule = series
            .schedule
            .iter()
            .map(|t| {
                Ok(TaskFile {
                    id: t.id.clone(),
                    epsilon: t.epsilon,
                    level: t.level,
                    derivative_orders: t
                        .derivative_orders
                        .iter()
                        .map(|a| a.as_slice().to_vec())
                        .collect(),
                    mode: t.mode.clone(),
                    target: TargetFile::from_spec(&t.target)?,
                    compact: t.compact.clone(),
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(SeriesFile {
            format_version: FORMAT_VERSION,
            dimension: series.poly.dim(),
            scheme: e.scheme(),
            custom_prefix: if e.custom_prefix().is_empty() {
                None
            } else {
                Some(
                    e.custom_prefix()
                        .iter()
                        .map(|a| a.as_slice().to_vec())
                        .collect(),
                )
            },
            center: series.poly.center().to_vec(),
            mu: series.mu.clone(),
            domain: series.domain.clone(),
            build: BuildMeta {
                tool_version: env!("CARGO_PKG_VERSION").to_string(),
            },
            coefficients,
            schedule,
            certificate: series.certificate.clone(),
        })
    }

    pub fn into_series(self) -> Result<UniversalSeries> {
        if self.format_version != FORMAT_VERSION {
            return Err(Error::Io(format!(
                "unsupported series format version {} (expected {FORMAT_VERSION})",
                self.format_version
            )));
        }
        let dim = self.dimension;
        let enumeration = match &self.custom_prefix {
            None => Enumeration::new(dim, self.scheme)?,
            Some(prefix) => Enumeration::with_custom_prefix(
                dim,
                self.scheme,
                prefix
                    .iter()
                    .map(|v| MultiIndex::new(v.clone()))
                    .collect(),
            )?,
        };
        if self.center.len() != dim {
            return Err(Error::Dimension {
                expected: dim,
                got: self.center.len(),
                context: "series center".into(),
            });
        }
        let mut coeffs = Vec::with_capacity(self.coefficients.len());
        for rec in &self.coefficients {
            let a = MultiIndex::new(rec.multi.clone());
            if a.dim() != dim {
                return Err(Error::Io(format!(
                    "coefficient multi-index {a} has wrong dimension"
                )));
            }
            let expected = enumeration.index_of_multi(&a) as u64;
            if expected != rec.index {
                return Err(Error::Io(format!(
                    "coefficient record for {a} claims index {} but the enumeration assigns {expected}",
                    rec.index
                )));
            }
            coeffs.push((a, Complex64::new(rec.re, rec.im)));
        }
        let poly = MultiPolynomial::from_coeffs(dim, self.center.clone(), coeffs)?;
        let schedule = self
            .schedule
            .into_iter()
            .map(|t| {
                Ok(UniversalTask {
                    id: t.id,
                    epsilon: t.epsilon,
                    level: t.level,
                    derivative_orders: t
                        .derivative_orders
                        .into_iter()
                        .map(MultiIndex::new)
                        .collect(),
                    mode: t.mode,
                    target: t.target.into_spec(dim)?,
                    compact: t.compact,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(UniversalSeries {
            poly,
            enumeration,
            domain: self.domain,
            mu: self.mu,
            schedule,
            certificate: self.certificate,
        })
    }
}

/// Serialize a series to the text format.
pub fn save_series(series: &UniversalSeries) -> Result<String> {
    let file = SeriesFile::from_series(series)?;
    toml::to_string_pretty(&file).map_err(|e| Error::Io(format!("series encode: {e}")))
}

/// Parse a series from the text format.
pub fn load_series(text: &str) -> Result<UniversalSeries> {
    let file: SeriesFile =
        toml::from_str(text).map_err(|e| Error::Io(format!("series decode: {e}")))?;
    file.into_series()
}

pub fn write_series(series: &UniversalSeries, path: &Path) -> Result<()> {
    std::fs::write(path, save_series(series)?)?;
    Ok(())
}

pub fn read_series(path: &Path) -> Result<UniversalSeries> {
    let text = std::fs::read_to_string(path)?;
    load_series(&text)
}
