use serde::Serialize;

use super::{Curve, GeometryError, Vec2};

/// Joint gaps below this are considered closed.
pub const CLOSURE_TOL: f64 = 1e-9;

/// Samples per curve used by the polyline-based checks.
pub const DEFAULT_SAMPLES_PER_CURVE: usize = 64;

/// A closed, counter-clockwise loop of polynomial curves bounding the domain.
///
/// Construction does not validate; call [`Cage::validate`] (or
/// [`Cage::validated`]) to check closure, orientation and simplicity.
#[derive(Debug, Clone, PartialEq)]
pub struct Cage {
    curves: Vec<Curve>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BoundingBox {
    pub min: Vec2,
    pub max: Vec2,
}

impl BoundingBox {
    pub fn size(&self) -> Vec2 {
        self.max - self.min
    }

    pub fn diagonal(&self) -> f64 {
        self.size().norm()
    }
}

/// One violated cage invariant.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Violation {
    /// The end of `curve` does not meet the start of the next curve.
    ClosureGap {
        curve: usize,
        next: usize,
        gap: f64,
    },
    /// Signed area of the control polygon is not positive.
    Orientation {
        signed_area: f64,
    },
    /// Two sampled boundary segments cross.
    SelfIntersection {
        curve_a: usize,
        curve_b: usize,
        at: Vec2,
    },
    Empty,
}

impl std::fmt::Display for Violation {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Violation::ClosureGap { curve, next, gap } => {
                write!(f, "closure gap of {gap:.3e} between curve {curve} and curve {next}")
            }
            Violation::Orientation { signed_area } => write!(
                f,
                "cage is not counter-clockwise (control polygon signed area {signed_area:.6e})"
            ),
            Violation::SelfIntersection { curve_a, curve_b, at } => write!(
                f,
                "boundary self-intersection between curve {curve_a} and curve {curve_b} near ({:.6}, {:.6})",
                at.x, at.y
            ),
            Violation::Empty => write!(f, "cage has no curves"),
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn is_valid(&self) -> bool {
        self.violations.is_empty()
    }
}

impl std::fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        if self.violations.is_empty() {
            return write!(f, "cage is valid");
        }
        for (i, v) in self.violations.iter().enumerate() {
            if i > 0 {
                writeln!(f)?;
            }
            write!(f, "{v}")?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy)]
pub struct ValidationConfig {
    pub closure_tol: f64,
    pub samples_per_curve: usize,
}

impl Default for ValidationConfig {
    fn default() -> Self {
        Self {
            closure_tol: CLOSURE_TOL,
            samples_per_curve: DEFAULT_SAMPLES_PER_CURVE,
        }
    }
}

/// A repaired joint reported by [`Cage::snap_joints`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SnappedJoint {
    pub curve: usize,
    pub gap: f64,
}

impl Cage {
    pub fn new(curves: Vec<Curve>) -> Self {
        Cage { curves }
    }

    /// Builds the cage and rejects it with the full report when invalid.
    pub fn validated(curves: Vec<Curve>) -> Result<Self, ValidationReport> {
        let cage = Cage::new(curves);
        let report = cage.validate();
        if report.is_valid() {
            Ok(cage)
        } else {
            Err(report)
        }
    }

    /// Closed polygon through the given vertices, one straight curve per edge.
    pub fn polygon(vertices: &[Vec2]) -> Result<Self, GeometryError> {
        let n = vertices.len();
        let curves = (0..n)
            .map(|i| Curve::segment(vertices[i], vertices[(i + 1) % n]))
            .collect::<Result<_, _>>()?;
        Ok(Cage::new(curves))
    }

    pub fn curves(&self) -> &[Curve] {
        &self.curves
    }

    pub fn len(&self) -> usize {
        self.curves.len()
    }

    pub fn is_empty(&self) -> bool {
        self.curves.is_empty()
    }

    pub fn max_order(&self) -> usize {
        self.curves.iter().map(Curve::order).max().unwrap_or(0)
    }

    /// Every curve elevated (or reduced) to `order`.
    pub fn with_order(&self, order: usize) -> Result<Cage, GeometryError> {
        Ok(Cage::new(
            self.curves
                .iter()
                .map(|c| c.with_order(order))
                .collect::<Result<_, _>>()?,
        ))
    }

    pub fn map_affine(&self, linear: impl Fn(Vec2) -> Vec2 + Copy, offset: Vec2) -> Cage {
        Cage::new(
            self.curves
                .iter()
                .map(|c| c.map_affine(linear, offset))
                .collect(),
        )
    }

    /// Bounding box of all control points (contains the curves).
    pub fn bounding_box(&self) -> BoundingBox {
        let mut min = Vec2::new(f64::INFINITY, f64::INFINITY);
        let mut max = Vec2::new(f64::NEG_INFINITY, f64::NEG_INFINITY);
        for p in self.curves.iter().flat_map(|c| c.to_bezier()) {
            min = min.min(p);
            max = max.max(p);
        }
        BoundingBox { min, max }
    }

    /// Largest distance between two sampled boundary points.
    pub fn diameter(&self) -> f64 {
        let pts = self.boundary_polyline(16);
        let mut d: f64 = 0.0;
        for (i, a) in pts.iter().enumerate() {
            for b in &pts[i + 1..] {
                d = d.max(a.distance(*b));
            }
        }
        d
    }

    /// Signed area enclosed by the traversal of all Bezier control points.
    pub fn control_polygon_signed_area(&self) -> f64 {
        let pts: Vec<Vec2> = self
            .curves
            .iter()
            .flat_map(|c| {
                let b = c.to_bezier();
                b[..b.len() - 1].to_vec()
            })
            .collect();
        shoelace(&pts)
    }

    /// Closed sampled polyline of the boundary (the first point is not repeated).
    pub fn boundary_polyline(&self, samples_per_curve: usize) -> Vec<Vec2> {
        let s = samples_per_curve.max(1);
        self.curves
            .iter()
            .flat_map(|c| (0..s).map(move |i| c.evaluate(i as f64 / s as f64)))
            .collect()
    }

    pub fn validate(&self) -> ValidationReport {
        self.validate_with(&ValidationConfig::default())
    }

    pub fn validate_with(&self, cfg: &ValidationConfig) -> ValidationReport {
        let mut violations = Vec::new();
        if self.curves.is_empty() {
            violations.push(Violation::Empty);
            return ValidationReport { violations };
        }
        let n = self.curves.len();
        for i in 0..n {
            let next = (i + 1) % n;
            let gap = self.curves[i].end().distance(self.curves[next].start());
            if gap.is_nan() || gap > cfg.closure_tol {
                violations.push(Violation::ClosureGap {
                    curve: i,
                    next,
                    gap,
                });
            }
        }
        let area = self.control_polygon_signed_area();
        if area.is_nan() || area <= 0.0 {
            violations.push(Violation::Orientation { signed_area: area });
        }
        violations.extend(self.self_intersections(cfg.samples_per_curve));
        ValidationReport { violations }
    }

    fn self_intersections(&self, samples: usize) -> Vec<Violation> {
        let s = samples.max(1);
        // (curve, a, b) for every sampled segment, joints closed by the next curve's start
        let n = self.curves.len();
        let mut segments = Vec::with_capacity(n * s);
        for (ci, c) in self.curves.iter().enumerate() {
            let pts = c.sample(s);
            for w in pts.windows(2) {
                segments.push((ci, w[0], w[1]));
            }
        }
        let total = segments.len();
        let mut found = Vec::new();
        for i in 0..total {
            for j in i + 1..total {
                // neighbouring segments share an endpoint
                if j == i + 1 || (i == 0 && j == total - 1) {
                    continue;
                }
                let (ca, a0, a1) = segments[i];
                let (cb, b0, b1) = segments[j];
                if let Some(at) = segment_intersection(a0, a1, b0, b1) {
                    let v = Violation::SelfIntersection {
                        curve_a: ca,
                        curve_b: cb,
                        at,
                    };
                    if !found.iter().any(|f| matches!(f, Violation::SelfIntersection { curve_a, curve_b, .. } if *curve_a == ca && *curve_b == cb)) {
                        found.push(v);
                    }
                }
            }
        }
        found
    }

    /// Winding-number inside test against the sampled boundary.
    ///
    /// Points on the sampled boundary are reported as outside.
    pub fn contains(&self, p: Vec2) -> bool {
        self.contains_with(p, DEFAULT_SAMPLES_PER_CURVE)
    }

    pub fn contains_with(&self, p: Vec2, samples_per_curve: usize) -> bool {
        let poly = self.boundary_polyline(samples_per_curve);
        winding_number(&poly, p) == Some(1)
    }

    /// Inside test that stays exact near the boundary: far from it the
    /// sampled winding number decides, close to it the side of the nearest
    /// curve point does. Also returns the distance to the boundary.
    pub fn locate(&self, p: Vec2) -> (bool, f64) {
        let mut best = (f64::INFINITY, 0.0, 0);
        for (i, c) in self.curves.iter().enumerate() {
            let (d, t) = c.closest_point(p);
            if d < best.0 {
                best = (d, t, i);
            }
        }
        let (d, t, i) = best;
        let near = 1e-2 * self.bounding_box().diagonal();
        if d < near && t > 1e-9 && t < 1.0 - 1e-9 {
            let c = &self.curves[i];
            let side = (p - c.evaluate(t)).dot(c.derivative(t).perp());
            return (side < 0.0, d);
        }
        (self.contains(p), d)
    }

    /// Closes joints whose gap is below `max_gap` by moving both endpoints to
    /// their midpoint (in the Bezier view). Larger gaps are left untouched.
    pub fn snap_joints(&self, max_gap: f64) -> (Cage, Vec<SnappedJoint>) {
        let n = self.curves.len();
        let mut ctrl: Vec<Vec<Vec2>> = self.curves.iter().map(Curve::to_bezier).collect();
        let mut snapped = Vec::new();
        for i in 0..n {
            let next = (i + 1) % n;
            let end = *ctrl[i].last().unwrap();
            let start = ctrl[next][0];
            let gap = end.distance(start);
            if gap > 0.0 && gap < max_gap {
                let mid = end.lerp(start, 0.5);
                *ctrl[i].last_mut().unwrap() = mid;
                ctrl[next][0] = mid;
                snapped.push(SnappedJoint { curve: i, gap });
            }
        }
        if snapped.is_empty() {
            return (self.clone(), snapped);
        }
        let curves = ctrl
            .iter()
            .zip(&self.curves)
            .map(|(b, orig)| Curve::from_bezier(b).unwrap_or_else(|_| orig.clone()))
            .collect();
        (Cage::new(curves), snapped)
    }

    /// Distance from `p` to the nearest curve.
    pub fn distance_to_boundary(&self, p: Vec2) -> f64 {
        self.curves
            .iter()
            .map(|c| c.distance_to(p))
            .fold(f64::INFINITY, f64::min)
    }
}

pub(crate) fn shoelace(pts: &[Vec2]) -> f64 {
    let n = pts.len();
    0.5 * (0..n).map(|i| pts[i].cross(pts[(i + 1) % n])).sum::<f64>()
}

/// Winding number of a closed polyline around `p`; `None` when `p` lies on it.
fn winding_number(poly: &[Vec2], p: Vec2) -> Option<i32> {
    let n = poly.len();
    let mut wn = 0;
    for i in 0..n {
        let a = poly[i];
        let b = poly[(i + 1) % n];
        let side = (b - a).cross(p - a);
        let len = (b - a).norm();
        if side.abs() <= 1e-12 * len.max(1e-300) {
            let t = (p - a).dot(b - a);
            if t >= 0.0 && t <= (b - a).norm_sq() {
                return None;
            }
        }
        if a.y <= p.y {
            if b.y > p.y && side > 0.0 {
                wn += 1;
            }
        } else if b.y <= p.y && side < 0.0 {
            wn -= 1;
        }
    }
    Some(wn)
}

fn segment_intersection(a0: Vec2, a1: Vec2, b0: Vec2, b1: Vec2) -> Option<Vec2> {
    let da = a1 - a0;
    let db = b1 - b0;
    let denom = da.cross(db);
    if denom.abs() < 1e-300 {
        return None;
    }
    let s = (b0 - a0).cross(db) / denom;
    let u = (b0 - a0).cross(da) / denom;
    ((0.0..=1.0).contains(&s) && (0.0..=1.0).contains(&u)).then(|| a0 + da * s)
}
