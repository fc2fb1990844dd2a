//! Product domains: open simply connected planar factors with exhaustion
//! compacta and closure samplers.

use crate::error::{Error, Result};
use crate::planar::{PlanarCompact, ProductCompact};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

/// Margin by which the series center must clear every factor boundary.
pub const CENTER_MARGIN: f64 = 1e-6;

/// One open simply connected factor domain.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum DomainFactor {
    Disk { center: Complex64, radius: f64 },
    /// Interior of a simple polygon.
    Polygon { vertices: Vec<Complex64> },
    /// Open axis-aligned rectangle.
    Rect {
        re: (f64, f64),
        im: (f64, f64),
    },
}

impl DomainFactor {
    pub fn validate(&self) -> Result<()> {
        match self {
            DomainFactor::Disk { radius, .. } => {
                if !(*radius > 0.0) {
                    return Err(Error::validation("domain.disk.radius", "must be > 0"));
                }
            }
            DomainFactor::Polygon { vertices } => {
                if vertices.len() < 3 {
                    return Err(Error::validation(
                        "domain.polygon.vertices",
                        "polygon needs >=3 vertices",
                    ));
                }
            }
            DomainFactor::Rect { re, im } => {
                if !(re.1 > re.0) || !(im.1 > im.0) {
                    return Err(Error::validation(
                        "domain.rect",
                        "intervals must have positive length",
                    ));
                }
            }
        }
        Ok(())
    }

    /// Signed clearance of `p` from the complement: positive strictly
    /// inside, negative outside.
    pub fn interior_distance(&self, p: Complex64) -> f64 {
        match self {
            DomainFactor::Disk { center, radius } => radius - (p - center).norm(),
            DomainFactor::Polygon { vertices } => {
                let inside = crate::planar::point_in_polygon(p, vertices);
                let d = crate::planar::polygon_boundary_distance(p, vertices);
                if inside {
                    d
                } else {
                    -d
                }
            }
            DomainFactor::Rect { re, im } => {
                let dre = (p.re - re.0).min(re.1 - p.re);
                let dim = (p.im - im.0).min(im.1 - p.im);
                dre.min(dim)
            }
        }
    }

    /// True when `p` is not in the open domain (so it may belong to an
    /// admissible outside compact; boundary points qualify).
    pub fn excludes(&self, p: Complex64) -> bool {
        self.interior_distance(p) <= 1e-12
    }

    /// Exhaustion compact at level `m >= 1`; levels increase toward the
    /// full domain (factor `1 - 1/(m+1)`).
    pub fn exhaustion(&self, m: u32) -> Result<PlanarCompact> {
        let factor = 1.0 - 1.0 / (m as f64 + 1.0);
        match self {
            DomainFactor::Disk { center, radius } => {
                PlanarCompact::disk(*center, radius * factor)
            }
            DomainFactor::Polygon { vertices } => {
                let centroid = vertices.iter().sum::<Complex64>() / vertices.len() as f64;
                PlanarCompact::polygon(
                    vertices
                        .iter()
                        .map(|v| centroid + (v - centroid) * factor)
                        .collect(),
                )
            }
            DomainFactor::Rect { re, im } => {
                let c = Complex64::new((re.0 + re.1) / 2.0, (im.0 + im.1) / 2.0);
                let corners = [
                    Complex64::new(re.0, im.0),
                    Complex64::new(re.1, im.0),
                    Complex64::new(re.1, im.1),
                    Complex64::new(re.0, im.1),
                ];
                PlanarCompact::polygon(corners.iter().map(|v| c + (v - c) * factor).collect())
            }
        }
    }

    /// The closure of the factor as a compact set (boundary included).
    pub fn closure_compact(&self) -> Result<PlanarCompact> {
        match self {
            DomainFactor::Disk { center, radius } => PlanarCompact::disk(*center, *radius),
            DomainFactor::Polygon { vertices } => PlanarCompact::polygon(vertices.clone()),
            DomainFactor::Rect { re, im } => PlanarCompact::polygon(vec![
                Complex64::new(re.0, im.0),
                Complex64::new(re.1, im.0),
                Complex64::new(re.1, im.1),
                Complex64::new(re.0, im.1),
            ]),
        }
    }
}

/// The product domain with a distinguished expansion center.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DomainSpec {
    pub factors: Vec<DomainFactor>,
    pub center: Vec<Complex64>,
}

impl DomainSpec {
    pub fn new(factors: Vec<DomainFactor>, center: Vec<Complex64>) -> Result<Self> {
        if factors.is_empty() {
            return Err(Error::validation("domain.factors", "need >= 1 factor"));
        }
        if center.len() != factors.len() {
            return Err(Error::Dimension {
                expected: factors.len(),
                got: center.len(),
                context: "domain center".into(),
            });
        }
        for f in &factors {
            f.validate()?;
        }
        let spec = DomainSpec { factors, center };
        for (i, (f, &z)) in spec.factors.iter().zip(spec.center.iter()).enumerate() {
            if f.interior_distance(z) <= CENTER_MARGIN {
                return Err(Error::validation(
                    format!("domain.center[{i}]"),
                    format!("center must be strictly interior (clearance > {CENTER_MARGIN})"),
                ));
            }
        }
        Ok(spec)
    }

    pub fn dim(&self) -> usize {
        self.factors.len()
    }

    /// Product exhaustion compact at level `m`.
    pub fn exhaustion(&self, m: u32) -> Result<ProductCompact> {
        ProductCompact::new(
            self.factors
                .iter()
                .map(|f| f.exhaustion(m))
                .collect::<Result<_>>()?,
        )
    }

    /// Product of factor closures (for closed-domain seminorm grids).
    pub fn closure(&self) -> Result<ProductCompact> {
        ProductCompact::new(
            self.factors
                .iter()
                .map(|f| f.closure_compact())
                .collect::<Result<_>>()?,
        )
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::planar::SampleKind;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn center_must_be_interior() {
        let f = vec![DomainFactor::Disk {
            center: c(0.0, 0.0),
            radius: 1.0,
        }];
        assert!(DomainSpec::new(f.clone(), vec![c(0.0, 0.0)]).is_ok());
        assert!(DomainSpec::new(f, vec![c(1.0, 0.0)]).is_err());
    }

    #[test]
    fn disk_exhaustion_radii() {
        let f = DomainFactor::Disk {
            center: c(0.0, 0.0),
            radius: 1.0,
        };
        match f.exhaustion(1).unwrap().shape {
            crate::planar::Shape::Disk { radius, .. } => assert!((radius - 0.5).abs() < 1e-15),
            _ => panic!("disk expected"),
        }
        match f.exhaustion(3).unwrap().shape {
            crate::planar::Shape::Disk { radius, .. } => assert!((radius - 0.75).abs() < 1e-15),
            _ => panic!("disk expected"),
        }
    }

    #[test]
    fn exhaustion_is_nested_on_samples() {
        let factors = vec![
            DomainFactor::Disk {
                center: c(0.1, 0.0),
                radius: 1.0,
            },
            DomainFactor::Rect {
                re: (-1.0, 1.0),
                im: (-0.5, 0.5),
            },
        ];
        for f in &factors {
            for m in 1..4u32 {
                let inner = f.exhaustion(m).unwrap();
                let outer = f.exhaustion(m + 1).unwrap();
                for p in inner.sample(9, SampleKind::Fit).unwrap() {
                    assert!(outer.contains(p, 1e-9), "level {m}: {p}");
                    assert!(f.interior_distance(p) > 0.0, "exhaustion inside domain");
                }
            }
        }
    }

    #[test]
    fn excludes_boundary_and_outside() {
        let f = DomainFactor::Disk {
            center: c(0.0, 0.0),
            radius: 1.0,
        };
        assert!(f.excludes(c(1.0, 0.0)));
        assert!(f.excludes(c(2.0, 0.0)));
        assert!(!f.excludes(c(0.5, 0.0)));
    }

    #[test]
    fn polygon_interior_distance_signs() {
        let f = DomainFactor::Polygon {
            vertices: vec![c(0.0, 0.0), c(2.0, 0.0), c(2.0, 2.0), c(0.0, 2.0)],
        };
        assert!(f.interior_distance(c(1.0, 1.0)) > 0.9);
        assert!(f.interior_distance(c(3.0, 1.0)) < 0.0);
    }
}
