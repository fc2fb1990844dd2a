//! Report and plot-data emission.
//!
//! Column orders and number formatting are fixed: floats print in Rust's
//! shortest-roundtrip decimal form, so every emitted number reparses to
//! the exact value that produced it.

use crate::enumeration::Enumeration;
use crate::fit::FitReport;
use crate::planar::SampleSet;
use crate::poly::MultiPolynomial;
use crate::rearrange::{NondensityWitness, RearrangementResult};
use crate::universal::{Certificate, VerificationReport};
use num_complex::Complex64;
use std::fmt::Write as _;

/// Output shape of a report.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReportFormat {
    Table,
    Csv,
}

impl std::str::FromStr for ReportFormat {
    type Err = crate::error::Error;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "table" => Ok(ReportFormat::Table),
            "csv" => Ok(ReportFormat::Csv),
            other => Err(crate::error::Error::validation(
                "format",
                format!("unknown format '{other}' (expected table | csv)"),
            )),
        }
    }
}

fn render(header: &[&str], rows: &[Vec<String>], format: ReportFormat) -> String {
    let mut out = String::new();
    match format {
        ReportFormat::Csv => {
            let _ = writeln!(out, "{}", header.join(","));
            for row in rows {
                let _ = writeln!(out, "{}", row.join(","));
            }
        }
        ReportFormat::Table => {
            let mut widths: Vec<usize> = header.iter().map(|h| h.len()).collect();
            for row in rows {
                for (w, cell) in widths.iter_mut().zip(row.iter()) {
                    *w = (*w).max(cell.len());
                }
            }
            let line = |cells: &[String]| {
                cells
                    .iter()
                    .zip(widths.iter())
                    .map(|(c, w)| format!("{c:>w$}"))
                    .collect::<Vec<_>>()
                    .join("  ")
            };
            let head: Vec<String> = header.iter().map(|s| s.to_string()).collect();
            let _ = writeln!(out, "{}", line(&head));
            for row in rows {
                let _ = writeln!(out, "{}", line(row));
            }
        }
    }
    out
}

fn f(v: f64) -> String {
    format!("{v}")
}

/// Certificate stages: `stage,lambda,err_K,err_L_block,err_L_limit,degree`.
pub fn certificate_report(cert: &Certificate, format: ReportFormat) -> String {
    let header = ["stage", "lambda", "err_K", "err_L_block", "err_L_limit", "degree"];
    let rows: Vec<Vec<String>> = cert
        .stages
        .iter()
        .enumerate()
        .map(|(i, s)| {
            vec![
                (i + 1).to_string(),
                s.lambda.to_string(),
                f(s.err_k),
                f(s.err_l_block),
                f(s.err_l_limit),
                s.grading_bound.to_string(),
            ]
        })
        .collect();
    render(&header, &rows, format)
}

/// Evaluation grid: per-axis `x_i,y_i` columns then `re,im,abs`.
pub fn evaluation_report(
    grid: &SampleSet,
    values: &[Complex64],
    format: ReportFormat,
) -> String {
    let mut header: Vec<String> = Vec::new();
    for i in 1..=grid.dim {
        header.push(format!("x{i}"));
        header.push(format!("y{i}"));
    }
    header.extend(["re".to_string(), "im".to_string(), "abs".to_string()]);
    let header_refs: Vec<&str> = header.iter().map(|s| s.as_str()).collect();
    let rows: Vec<Vec<String>> = grid
        .points
        .iter()
        .zip(values.iter())
        .map(|(p, v)| {
            let mut row = Vec::with_capacity(2 * grid.dim + 3);
            for z in p {
                row.push(f(z.re));
                row.push(f(z.im));
            }
            row.push(f(v.re));
            row.push(f(v.im));
            row.push(f(v.norm()));
            row
        })
        .collect();
    render(&header_refs, &rows, format)
}

/// Rearrangement trace: `position,term_index,partial_sum`.
pub fn rearrangement_report(r: &RearrangementResult, format: ReportFormat) -> String {
    let header = ["position", "term_index", "partial_sum"];
    let rows: Vec<Vec<String>> = r
        .permutation
        .iter()
        .zip(r.trace.iter())
        .enumerate()
        .map(|(pos, (&idx, &sum))| vec![pos.to_string(), idx.to_string(), f(sum)])
        .collect();
    render(&header, &rows, format)
}

/// Fit outcome: one row per constraint group.
pub fn fit_report(report: &FitReport, format: ReportFormat) -> String {
    let header = ["group", "sup_error", "tolerance", "rows"];
    let rows: Vec<Vec<String>> = report
        .groups
        .iter()
        .map(|g| {
            vec![
                g.label.clone(),
                f(g.sup_error),
                f(g.tolerance),
                g.rows.to_string(),
            ]
        })
        .collect();
    let mut out = render(&header, &rows, format);
    if format == ReportFormat::Table {
        let _ = writeln!(
            out,
            "support {} (grading bound {}), residual 2-norm {}, condition estimate {}",
            report.support_size,
            report
                .grading_bound
                .map_or("-".to_string(), |b| b.to_string()),
            f(report.residual_norm),
            f(report.condition_estimate),
        );
        for w in &report.warnings {
            let _ = writeln!(out, "warning: {w}");
        }
    }
    out
}

/// Enumeration prefix: `index,multi,grading`.
pub fn enumeration_report(e: &Enumeration, count: usize, format: ReportFormat) -> String {
    let header = ["index", "multi", "grading"];
    let rows: Vec<Vec<String>> = (0..count)
        .map(|j| {
            let a = e.multi_of_index(j);
            let multi = a
                .iter()
                .map(|x| x.to_string())
                .collect::<Vec<_>>()
                .join(" ");
            vec![j.to_string(), multi, e.grading(&a).to_string()]
        })
        .collect();
    render(&header, &rows, format)
}

/// Verification outcome, including moving-center rows when present.
pub fn verification_report(report: &VerificationReport, format: ReportFormat) -> String {
    let mut out = format!(
        "stages_checked={} max_discrepancy={}\n",
        report.stages_checked,
        f(report.max_discrepancy)
    );
    if !report.moving_center.is_empty() {
        let header = ["task", "lambda", "worst_k_error", "interior_error", "worst_center"];
        let rows: Vec<Vec<String>> = report
            .moving_center
            .iter()
            .map(|m| {
                let center = m
                    .worst_center
                    .iter()
                    .map(|z| format!("{}+{}i", f(z.re), f(z.im)))
                    .collect::<Vec<_>>()
                    .join(" ");
                vec![
                    m.task_id.clone(),
                    m.lambda.to_string(),
                    f(m.worst_k_error),
                    f(m.interior_error),
                    center,
                ]
            })
            .collect();
        out.push_str(&render(&header, &rows, format));
    }
    out
}

/// One-line witness summary.
pub fn witness_summary(w: &Option<NondensityWitness>) -> String {
    match w {
        None => "no non-density witness at this scale".to_string(),
        Some(NondensityWitness::EscapeAbove { bound, position }) => {
            format!("escape above {} after position {position}", f(*bound))
        }
        Some(NondensityWitness::EscapeBelow { bound, position }) => {
            format!("escape below {} after position {position}", f(*bound))
        }
        Some(NondensityWitness::AvoidedInterval { lo, hi }) => {
            format!("avoided interval ({}, {})", f(*lo), f(*hi))
        }
    }
}

/// Evaluate a polynomial over a grid (deterministic row order).
pub fn evaluate_on_grid(poly: &MultiPolynomial, grid: &SampleSet) -> Vec<Complex64> {
    grid.points.iter().map(|p| poly.evaluate(p)).collect()
}
