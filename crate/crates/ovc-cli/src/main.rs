//! Command-line driver: reads a TOML config and/or a stored series and
//! dispatches to the library.
//!
//! Exit codes: 0 success, 1 validation error, 2 numeric failure (budget
//! exhausted or certificate mismatch).  On a failed build the partial
//! series and its certificate-so-far are still written to `--out`.

use clap::{Parser, Subcommand};
use ovc_core::error::Error as CoreError;
use ovc_core::io::config::{self, ApproxMode, RunConfig};
use ovc_core::io::report::{self, ReportFormat};
use ovc_core::io::series;
use ovc_core::{
    build_universal, verify_certificate, MultiIndex, SampleKind,
};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

#[derive(Parser)]
#[command(name = "ovc", version, about = "Truncated universal Taylor series: construction, verification, demos")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Print the first indices of the configured enumeration.
    Enumerate {
        #[arg(long)]
        config: PathBuf,
        #[arg(long, default_value_t = 20)]
        count: usize,
        #[arg(long, default_value = "table")]
        format: String,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run the approximation task in the config's `[approx]` section.
    Approx {
        #[arg(long)]
        config: PathBuf,
        #[arg(long, default_value = "table")]
        format: String,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Build a universal series from the config's schedule and write it.
    Build {
        #[arg(long)]
        config: PathBuf,
        /// Series output path (certificate included).
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value = "table")]
        format: String,
    },
    /// Recompute a stored certificate and compare it to the recorded one.
    Verify {
        #[arg(long)]
        series: PathBuf,
        /// Optional config supplying `[verify]` / `[ainf]` sections.
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long, default_value = "table")]
        format: String,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Steer a rearrangement of the configured term sequence.
    Rearrange {
        #[arg(long)]
        config: PathBuf,
        #[arg(long, default_value = "csv")]
        format: String,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Exhibit an enumeration under which a stored series is not universal.
    DemoNonuniversal {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        series: PathBuf,
        #[arg(long, default_value = "csv")]
        format: String,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Evaluate a stored series on the config's `[eval]` grid.
    Eval {
        #[arg(long)]
        series: PathBuf,
        #[arg(long)]
        config: PathBuf,
        #[arg(long, default_value = "csv")]
        format: String,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err}");
            match err.downcast_ref::<CoreError>() {
                Some(CoreError::BudgetExhausted { .. })
                | Some(CoreError::BuildAborted { .. })
                | Some(CoreError::Integrity { .. }) => ExitCode::from(2),
                _ => ExitCode::from(1),
            }
        }
    }
}

fn load_config(path: &Path) -> anyhow::Result<RunConfig> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CoreError::Io(format!("{}: {e}", path.display())))?;
    let mut cfg = config::parse_config(&text)?;
    config::apply_env_overrides(&mut cfg.build_params, |name| std::env::var(name).ok())?;
    Ok(cfg)
}

fn emit(text: &str, out: &Option<PathBuf>) -> anyhow::Result<()> {
    match out {
        Some(path) => std::fs::write(path, text)
            .map_err(|e| CoreError::Io(format!("{}: {e}", path.display())))?,
        None => print!("{text}"),
    }
    Ok(())
}

fn run(cli: Cli) -> anyhow::Result<()> {
    match cli.command {
        Command::Enumerate {
            config,
            count,
            format,
            out,
        } => {
            let cfg = load_config(&config)?;
            let format: ReportFormat = format.parse()?;
            emit(
                &report::enumeration_report(&cfg.enumeration, count, format),
                &out,
            )
        }
        Command::Approx {
            config,
            format,
            out,
        } => {
            let cfg = load_config(&config)?;
            let format: ReportFormat = format.parse()?;
            let req = cfg.approx.as_ref().ok_or_else(|| {
                CoreError::validation("approx", "config has no [approx] section")
            })?;
            let params = esc_params(&cfg);
            let result = match req.mode {
                ApproxMode::Simultaneous => ovc_core::simultaneous_approx(
                    &req.target,
                    &req.k,
                    req.l.as_ref(),
                    req.epsilon,
                    &cfg.enumeration,
                    &params,
                ),
                ApproxMode::Derivative => {
                    let orders: Vec<MultiIndex> = if req.orders.is_empty() {
                        vec![MultiIndex::zero(cfg.dimension)]
                    } else {
                        req.orders.clone()
                    };
                    let target = match &req.target {
                        ovc_core::TargetSpec::Analytic(f) => f.clone(),
                        _ => {
                            return Err(CoreError::validation(
                                "approx.target",
                                "derivative mode needs an analytic target",
                            )
                            .into())
                        }
                    };
                    ovc_core::derivative_constrained_approx(
                        &target,
                        &req.k,
                        &orders,
                        req.epsilon,
                        &cfg.enumeration,
                        &params,
                    )
                }
            };
            match result {
                Ok(rep) => emit(&report::fit_report(&rep, format), &out),
                Err(CoreError::BudgetExhausted { message, best }) => {
                    emit(&report::fit_report(&best, format), &out)?;
                    Err(CoreError::BudgetExhausted { message, best }.into())
                }
                Err(e) => Err(e.into()),
            }
        }
        Command::Build {
            config,
            out,
            format,
        } => {
            let cfg = load_config(&config)?;
            let format: ReportFormat = format.parse()?;
            let domain = cfg.domain.clone().ok_or_else(|| {
                CoreError::validation("domain", "config has no [domain] section")
            })?;
            if cfg.schedule.is_empty() {
                return Err(
                    CoreError::validation("schedule", "config has no [[schedule]] tasks").into(),
                );
            }
            match build_universal(
                &domain,
                &cfg.enumeration,
                &cfg.mu,
                &cfg.schedule,
                &cfg.build_params,
            ) {
                Ok(built) => {
                    series::write_series(&built, &out)?;
                    print!(
                        "{}",
                        report::certificate_report(&built.certificate, format)
                    );
                    println!("series written to {}", out.display());
                    Ok(())
                }
                Err(CoreError::BuildAborted {
                    stage,
                    message,
                    partial,
                }) => {
                    series::write_series(&partial, &out)?;
                    eprintln!(
                        "stage {stage} failed; partial series with {} certified stages written to {}",
                        partial.certificate.stages.len(),
                        out.display()
                    );
                    Err(CoreError::BuildAborted {
                        stage,
                        message,
                        partial,
                    }
                    .into())
                }
                Err(e) => Err(e.into()),
            }
        }
        Command::Verify {
            series: series_path,
            config,
            format,
            out,
        } => {
            let s = series::read_series(&series_path)?;
            let format: ReportFormat = format.parse()?;
            let cfg = config.as_deref().map(load_config).transpose()?;
            let moving = cfg.as_ref().and_then(|c| c.moving_center.clone());
            let rep = verify_certificate(&s, moving.as_ref())?;
            let mut text = report::verification_report(&rep, format);
            if let Some(ainf) = cfg.as_ref().and_then(|c| c.ainf.as_ref()) {
                let errs = ovc_core::universal::ainf_stage_errors(
                    &s,
                    &ainf.orders,
                    ainf.radius,
                    ainf.density,
                    ainf.cap,
                )?;
                for (i, per_order) in errs.iter().enumerate() {
                    let cells: Vec<String> = ainf
                        .orders
                        .iter()
                        .zip(per_order.iter())
                        .map(|(o, v)| format!("D{o}={v}"))
                        .collect();
                    text.push_str(&format!("ainf stage {} {}\n", i + 1, cells.join(" ")));
                }
            }
            emit(&text, &out)
        }
        Command::Rearrange {
            config,
            format,
            out,
        } => {
            let cfg = load_config(&config)?;
            let format: ReportFormat = format.parse()?;
            let req = cfg.rearrange.as_ref().ok_or_else(|| {
                CoreError::validation("rearrange", "config has no [rearrange] section")
            })?;
            let terms = config::resolve_terms(&req.source)?;
            let result = ovc_core::steer_rearrangement(&terms);
            let tail = req
                .tail_start
                .unwrap_or_else(|| (result.trace.len() / 2).max(1));
            let witness = ovc_core::check_nondensity(&result.trace, tail)?;
            let checkpoints: Vec<String> = result
                .checkpoints
                .iter()
                .map(|(k, pos)| format!("{k}@{pos}"))
                .collect();
            let mut text = report::rearrangement_report(&result, format);
            text.push_str(&format!(
                "limit: {:?}; emitted {} of {} terms; checkpoints [{}]; {}\n",
                result.limit,
                result.permutation.len(),
                result.total_terms,
                checkpoints.join(" "),
                report::witness_summary(&witness)
            ));
            emit(&text, &out)
        }
        Command::DemoNonuniversal {
            config,
            series: series_path,
            format,
            out,
        } => {
            let cfg = load_config(&config)?;
            let format: ReportFormat = format.parse()?;
            let s = series::read_series(&series_path)?;
            let req = cfg.nonuniversal.as_ref().ok_or_else(|| {
                CoreError::validation("nonuniversal", "config has no [nonuniversal] section")
            })?;
            let rep = ovc_core::nonuniversal_enumeration(
                &s.poly,
                None,
                &req.z1,
                &req.z2,
                &s.enumeration,
                req.prefix_len,
                req.group_by_block,
                Some(&s.domain),
            )?;
            let tail = req
                .tail_start
                .unwrap_or_else(|| (rep.rearrangement.trace.len() / 2).max(1));
            let witness = ovc_core::check_nondensity(&rep.rearrangement.trace, tail)?;
            let mut text = report::rearrangement_report(&rep.rearrangement, format);
            text.push_str(&format!(
                "limit: {:?}; {}\n",
                rep.rearrangement.limit,
                report::witness_summary(&witness)
            ));
            emit(&text, &out)
        }
        Command::Eval {
            series: series_path,
            config,
            format,
            out,
        } => {
            let cfg = load_config(&config)?;
            let format: ReportFormat = format.parse()?;
            let s = series::read_series(&series_path)?;
            let req = cfg.eval.as_ref().ok_or_else(|| {
                CoreError::validation("eval", "config has no [eval] section")
            })?;
            let grid = req.grid.sample(req.density, req.cap, SampleKind::Fit)?;
            let values = report::evaluate_on_grid(&s.poly, &grid);
            emit(&report::evaluation_report(&grid, &values, format), &out)
        }
    }
}

fn esc_params(cfg: &RunConfig) -> ovc_core::EscalationParams {
    cfg.build_params.escalation.clone()
}
