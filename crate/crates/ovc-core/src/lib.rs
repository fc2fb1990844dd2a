//! Numerical construction and verification of truncated universal Taylor
//! series on products of planar domains.

pub mod analytic;
pub mod domain;
pub mod enumeration;
pub mod error;
pub mod fit;
pub mod io;
pub mod multi_index;
pub mod planar;
pub mod poly;
pub mod rearrange;
pub mod universal;

pub use analytic::{AnalyticTestFunction, Factor, Term};
pub use domain::{DomainFactor, DomainSpec};
pub use enumeration::{BlockRange, Enumeration, Scheme};
pub use error::{Error, Result};
pub use fit::{
    a_infinity_seminorm, derivative_constrained_approx, fit_polynomial, simultaneous_approx,
    sup_error, AxisScale, EscalationParams, FitGroup, FitReport, FitTask, TargetSpec,
};
pub use io::config::{parse_config, RunConfig};
pub use io::report::ReportFormat;
pub use io::series::{load_series, read_series, save_series, write_series};
pub use multi_index::MultiIndex;
pub use num_complex::Complex64;
pub use planar::{PlanarCompact, ProductCompact, SampleKind, SampleSet, Shape};
pub use poly::MultiPolynomial;
pub use rearrange::{
    check_nondensity, nonuniversal_enumeration, steer_rearrangement, LimitClass,
    NondensityWitness, Preset, RearrangementResult, TermSequence,
};
pub use universal::{
    build_universal, verify_certificate, BuildParams, Certificate, MovingCenterSpec, MuSpec,
    StageRecord, TaskMode, UniversalSeries, UniversalTask,
};
