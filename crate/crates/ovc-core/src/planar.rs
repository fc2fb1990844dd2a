//! Planar compact sets, their cartesian products, and deterministic
//! sampling grids.
//!
//! Fit grids and validation grids for the same compact are distinct point
//! sets: validation grids use a fixed irrational phase offset (and callers
//! use a higher density), so measured validation errors are independent of
//! the fitting constraints.

use crate::error::{Error, Result};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

/// Phase offset (fractional part of the golden ratio) applied to
/// validation grids so they never coincide with fit grids.
const VALIDATION_PHASE: f64 = 0.381_966_011_250_105_15;

/// Whether a grid is used to build constraints or to measure errors.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SampleKind {
    Fit,
    Validation,
}

/// Shape of a planar compact set.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum Shape {
    Disk { center: Complex64, radius: f64 },
    Segment { a: Complex64, b: Complex64 },
    Polygon { vertices: Vec<Complex64> },
    Pointcloud { points: Vec<Complex64> },
}

/// A compact subset of the plane.
///
/// `connected_complement_asserted` records the user's assertion that the
/// complement is connected; it is never computed (deciding it for general
/// polygons is out of scope, and the approximation guarantees assume it as
/// a hypothesis).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlanarCompact {
    pub shape: Shape,
    #[serde(default = "default_true")]
    pub connected_complement_asserted: bool,
}

fn default_true() -> bool {
    true
}

impl PlanarCompact {
    /// Validate a shape description and wrap it as a compact set.
    pub fn new(shape: Shape) -> Result<Self> {
        match &shape {
            Shape::Disk { radius, .. } => {
                if !(*radius > 0.0) {
                    return Err(Error::validation("disk.radius", "must be > 0"));
                }
            }
            Shape::Segment { a, b } => {
                if a == b {
                    return Err(Error::validation(
                        "segment",
                        "endpoints must be distinct",
                    ));
                }
            }
            Shape::Polygon { vertices } => {
                if vertices.len() < 3 {
                    return Err(Error::validation(
                        "polygon.vertices",
                        "polygon needs >=3 vertices",
                    ));
                }
                // self-intersection is documented user responsibility
            }
            Shape::Pointcloud { points } => {
                if points.is_empty() {
                    return Err(Error::validation(
                        "pointcloud.points",
                        "must be nonempty",
                    ));
                }
            }
        }
        Ok(PlanarCompact {
            shape,
            connected_complement_asserted: true,
        })
    }

    pub fn disk(center: Complex64, radius: f64) -> Result<Self> {
        PlanarCompact::new(Shape::Disk { center, radius })
    }

    pub fn segment(a: Complex64, b: Complex64) -> Result<Self> {
        PlanarCompact::new(Shape::Segment { a, b })
    }

    pub fn polygon(vertices: Vec<Complex64>) -> Result<Self> {
        PlanarCompact::new(Shape::Polygon { vertices })
    }

    pub fn point_cloud(points: Vec<Complex64>) -> Result<Self> {
        PlanarCompact::new(Shape::Pointcloud { points })
    }

    /// Distance from `p` to the set (0 inside).
    pub fn distance(&self, p: Complex64) -> f64 {
        match &self.shape {
            Shape::Disk { center, radius } => ((p - center).norm() - radius).max(0.0),
            Shape::Segment { a, b } => point_segment_distance(p, *a, *b),
            Shape::Polygon { vertices } => {
                if point_in_polygon(p, vertices) {
                    0.0
                } else {
                    polygon_boundary_distance(p, vertices)
                }
            }
            Shape::Pointcloud { points } => points
                .iter()
                .map(|q| (p - q).norm())
                .fold(f64::INFINITY, f64::min),
        }
    }

    /// True iff `distance(p) <= tol`.
    pub fn contains(&self, p: Complex64, tol: f64) -> bool {
        self.distance(p) <= tol
    }

    /// Deterministic sample of the set.
    ///
    /// * `Segment`: `density` points uniform on the segment, endpoints
    ///   included (`density == 1` gives the midpoint).  Validation grids
    ///   keep the endpoints and phase-shift the interior points.
    /// * `Disk`: with `R = ceil(density/4)` rings, ring `j` (radius
    ///   `r*j/R`, `j = 1..=R`) carries `max(1, round(density*j/R))`
    ///   equispaced points; ring `R` is the boundary circle with exactly
    ///   `density` points.  Fit grids add the center; validation grids
    ///   rotate every ring by the phase offset and replace the center with
    ///   a half-radius inner ring.
    /// * `Polygon`: `density` boundary points uniform in arclength plus the
    ///   interior points of a square lattice (cell `diam/ceil(density/4)`)
    ///   that pass point-in-polygon.
    /// * `Pointcloud`: the stored points, `density` ignored.
    pub fn sample(&self, density: u32, kind: SampleKind) -> Result<Vec<Complex64>> {
        if density == 0 {
            return Err(Error::validation("density", "must be >= 1"));
        }
        let phase = match kind {
            SampleKind::Fit => 0.0,
            SampleKind::Validation => VALIDATION_PHASE,
        };
        let n = density as usize;
        let mut pts = Vec::new();
        match &self.shape {
            Shape::Segment { a, b } => {
                if n == 1 {
                    pts.push((a + b) / 2.0);
                } else if kind == SampleKind::Fit {
                    for k in 0..n {
                        let t = k as f64 / (n - 1) as f64;
                        pts.push(a + (b - a) * t);
                    }
                } else {
                    pts.push(*a);
                    for k in 0..n {
                        let t = (k as f64 + phase) / n as f64;
                        pts.push(a + (b - a) * t);
                    }
                    pts.push(*b);
                }
            }
            Shape::Disk { center, radius } => {
                let rings = n.div_ceil(4);
                if kind == SampleKind::Fit {
                    pts.push(*center);
                } else {
                    let m = (n as f64 * 0.5 / rings as f64).round().max(1.0) as usize;
                    ring_points(*center, radius * 0.5 / rings as f64, m, phase, &mut pts);
                }
                for j in 1..=rings {
                    let rho = radius * j as f64 / rings as f64;
                    let m = ((n as f64 * j as f64 / rings as f64).round() as usize).max(1);
                    ring_points(*center, rho, m, phase, &mut pts);
                }
            }
            Shape::Polygon { vertices } => {
                let perim = polygon_perimeter(vertices);
                for k in 0..n {
                    let s = perim * (k as f64 + phase) / n as f64;
                    pts.push(polygon_point_at_arclength(vertices, s));
                }
                let (lo_re, lo_im, hi_re, hi_im) = polygon_bbox(vertices);
                let cells = n.div_ceil(4).max(1);
                let h = ((hi_re - lo_re).max(hi_im - lo_im)) / cells as f64;
                if h > 0.0 {
                    let cols = ((hi_re - lo_re) / h).ceil() as usize;
                    let rows = ((hi_im - lo_im) / h).ceil() as usize;
                    for i in 0..cols {
                        for j in 0..rows {
                            let p = Complex64::new(
                                lo_re + (i as f64 + 0.5 + phase * 0.5) * h,
                                lo_im + (j as f64 + 0.5 + phase * 0.5) * h,
                            );
                            if point_in_polygon(p, vertices) {
                                pts.push(p);
                            }
                        }
                    }
                }
            }
            Shape::Pointcloud { points } => {
                pts.extend_from_slice(points);
            }
        }
        debug_assert!(
            pts.iter().all(|&p| self.contains(p, 1e-12)),
            "sampled point escapes the set"
        );
        Ok(pts)
    }

    /// `max |p|` over a fit sample, used to build enclosing disks.
    pub fn sampled_radius_from_origin(&self, density: u32) -> Result<f64> {
        let pts = self.sample(density, SampleKind::Fit)?;
        Ok(pts.iter().map(|p| p.norm()).fold(0.0, f64::max))
    }
}

fn ring_points(center: Complex64, rho: f64, m: usize, phase: f64, out: &mut Vec<Complex64>) {
    for k in 0..m {
        let theta = std::f64::consts::TAU * (k as f64 + phase) / m as f64;
        out.push(center + Complex64::new(rho * theta.cos(), rho * theta.sin()));
    }
}

pub(crate) fn point_segment_distance(p: Complex64, a: Complex64, b: Complex64) -> f64 {
    let ab = b - a;
    let len2 = ab.norm_sqr();
    if len2 == 0.0 {
        return (p - a).norm();
    }
    // projection parameter clamped to the segment
    let t = (((p - a) * ab.conj()).re / len2).clamp(0.0, 1.0);
    (p - (a + ab * t)).norm()
}

pub(crate) fn point_in_polygon(p: Complex64, vertices: &[Complex64]) -> bool {
    // even-odd crossing rule
    let mut inside = false;
    let n = vertices.len();
    for i in 0..n {
        let a = vertices[i];
        let b = vertices[(i + 1) % n];
        if (a.im > p.im) != (b.im > p.im) {
            let x = a.re + (p.im - a.im) / (b.im - a.im) * (b.re - a.re);
            if p.re < x {
                inside = !inside;
            }
        }
    }
    inside
}

pub(crate) fn polygon_boundary_distance(p: Complex64, vertices: &[Complex64]) -> f64 {
    let n = vertices.len();
    (0..n)
        .map(|i| point_segment_distance(p, vertices[i], vertices[(i + 1) % n]))
        .fold(f64::INFINITY, f64::min)
}

fn polygon_perimeter(vertices: &[Complex64]) -> f64 {
    let n = vertices.len();
    (0..n)
        .map(|i| (vertices[(i + 1) % n] - vertices[i]).norm())
        .sum()
}

fn polygon_point_at_arclength(vertices: &[Complex64], s: f64) -> Complex64 {
    let n = vertices.len();
    let mut rem = s;
    for i in 0..n {
        let a = vertices[i];
        let b = vertices[(i + 1) % n];
        let len = (b - a).norm();
        if rem <= len || i == n - 1 {
            let t = if len > 0.0 { (rem / len).min(1.0) } else { 0.0 };
            return a + (b - a) * t;
        }
        rem -= len;
    }
    vertices[0]
}

fn polygon_bbox(vertices: &[Complex64]) -> (f64, f64, f64, f64) {
    let mut lo_re = f64::INFINITY;
    let mut lo_im = f64::INFINITY;
    let mut hi_re = f64::NEG_INFINITY;
    let mut hi_im = f64::NEG_INFINITY;
    for v in vertices {
        lo_re = lo_re.min(v.re);
        lo_im = lo_im.min(v.im);
        hi_re = hi_re.max(v.re);
        hi_im = hi_im.max(v.im);
    }
    (lo_re, lo_im, hi_re, hi_im)
}

/// A cartesian product of planar compacts.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProductCompact {
    pub factors: Vec<PlanarCompact>,
}

impl ProductCompact {
    pub fn new(factors: Vec<PlanarCompact>) -> Result<Self> {
        if factors.is_empty() {
            return Err(Error::validation("product.factors", "need >= 1 factor"));
        }
        Ok(ProductCompact { factors })
    }

    pub fn dim(&self) -> usize {
        self.factors.len()
    }

    /// True iff every coordinate lies in its factor (within `tol`).
    pub fn contains(&self, p: &[Complex64], tol: f64) -> bool {
        p.len() == self.dim()
            && self
                .factors
                .iter()
                .zip(p.iter())
                .all(|(k, &z)| k.contains(z, tol))
    }

    /// Cartesian product of per-factor samples, thinned to at most `cap`
    /// points.
    ///
    /// Thinning is deterministic: while the product exceeds `cap`, the
    /// factor with the most points (lowest axis on ties) is reduced to
    /// `ceil(count/2)` points kept at evenly spread positions
    /// `round(i*(count-1)/(kept-1))`.
    pub fn sample(&self, density: u32, cap: usize, kind: SampleKind) -> Result<SampleSet> {
        let mut per_factor: Vec<Vec<Complex64>> = self
            .factors
            .iter()
            .map(|k| k.sample(density, kind))
            .collect::<Result<_>>()?;
        let cap = cap.max(1);
        loop {
            let total: usize = per_factor.iter().map(|v| v.len()).product();
            if total <= cap {
                break;
            }
            let axis = per_factor
                .iter()
                .enumerate()
                .max_by(|(i, a), (j, b)| a.len().cmp(&b.len()).then(j.cmp(i)))
                .map(|(i, _)| i)
                .unwrap();
            let v = &per_factor[axis];
            if v.len() <= 1 {
                break;
            }
            let kept = v.len().div_ceil(2);
            per_factor[axis] = thin_evenly(v, kept);
        }
        let mut points = Vec::new();
        cartesian(&per_factor, &mut Vec::new(), &mut points);
        Ok(SampleSet {
            dim: self.dim(),
            points,
            kind,
            density,
        })
    }
}

fn thin_evenly(v: &[Complex64], kept: usize) -> Vec<Complex64> {
    if kept >= v.len() {
        return v.to_vec();
    }
    if kept == 1 {
        return vec![v[0]];
    }
    (0..kept)
        .map(|i| {
            let idx = ((i * (v.len() - 1)) as f64 / (kept - 1) as f64).round() as usize;
            v[idx]
        })
        .collect()
}

fn cartesian(
    per_factor: &[Vec<Complex64>],
    prefix: &mut Vec<Complex64>,
    out: &mut Vec<Vec<Complex64>>,
) {
    if prefix.len() == per_factor.len() {
        out.push(prefix.clone());
        return;
    }
    for &z in &per_factor[prefix.len()] {
        prefix.push(z);
        cartesian(per_factor, prefix, out);
        prefix.pop();
    }
}

/// A deterministic grid of points in `C^d` with its provenance.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SampleSet {
    pub dim: usize,
    pub points: Vec<Vec<Complex64>>,
    pub kind: SampleKind,
    pub density: u32,
}

impl SampleSet {
    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Wrap a list of single complex points as a 1-dimensional sample set.
    pub fn from_planar(points: Vec<Complex64>, kind: SampleKind, density: u32) -> Self {
        SampleSet {
            dim: 1,
            points: points.into_iter().map(|z| vec![z]).collect(),
            kind,
            density,
        }
    }
}
