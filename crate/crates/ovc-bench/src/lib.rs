//! Shared fixtures for the kernel benchmarks.

use ovc_core::*;

pub fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

/// A dense d=2 polynomial of per-axis degree `deg` with decaying entries.
pub fn dense_poly_d2(deg: u32) -> MultiPolynomial {
    let mut coeffs = Vec::new();
    for a in 0..=deg {
        for b in 0..=deg {
            let v = 1.0 / ((a + b) as f64 + 1.0);
            coeffs.push((MultiIndex::new(vec![a, b]), c(v, -v / 2.0)));
        }
    }
    MultiPolynomial::from_coeffs(2, vec![c(0.0, 0.0); 2], coeffs).unwrap()
}

/// The two-set d=1 fitting scenario used throughout the test suite.
pub fn two_set_fit() -> FitReport {
    let e = Enumeration::new(1, Scheme::Graded).unwrap();
    let k = ProductCompact::new(vec![
        PlanarCompact::segment(c(2.0, 0.0), c(3.0, 0.0)).unwrap(),
    ])
    .unwrap();
    let l = ProductCompact::new(vec![PlanarCompact::disk(c(0.0, 0.0), 0.5).unwrap()]).unwrap();
    let target = TargetSpec::Analytic(AnalyticTestFunction::constant(1, c(1.0, 0.0)));
    simultaneous_approx(&target, &k, Some(&l), 1e-2, &e, &EscalationParams::default()).unwrap()
}
