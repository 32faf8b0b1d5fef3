//! Coordinate fields over point sets and their deformation.
//!
//! A [`CoordinateField`] is built once against a rest cage. Deforming it with
//! a [`DeformedCage`] is a linear combination of the deformed monomial
//! coefficients and involves no root finding.

mod binary;
mod field;
mod grid;

pub use binary::{read_field, write_field, MAGIC};
pub use field::{
    build_field, build_field_with, cage_signature, deform, CoordinateField, FieldOptions,
    DEFAULT_CEILING,
};
pub use grid::{grid_lattice, warp_grid, Lattice, WarpedGrid};

use thiserror::Error;

use crate::engine::EngineError;
use crate::geometry::{binomial, Cage, Curve, GeometryError, SnappedJoint, Vec2, CLOSURE_TOL};

/// Points closer than this to the boundary are left out of fields.
pub const BOUNDARY_MARGIN: f64 = 1e-6;

#[derive(Debug, Error)]
pub enum DeformError {
    #[error("{} point(s) are outside the cage or too close to its boundary", .indices.len())]
    Outside { indices: Vec<usize> },
    #[error("encoding point {point} against curve {curve}: {source}")]
    Engine {
        point: usize,
        curve: usize,
        source: EngineError,
    },
    #[error("shape mismatch: {0}")]
    Shape(String),
    #[error("target order {requested} exceeds the precomputed ceiling {ceiling}; the field must be rebuilt")]
    NeedsRecompute { requested: usize, ceiling: usize },
    #[error(transparent)]
    Geometry(#[from] GeometryError),
    #[error("malformed field data: {0}")]
    Format(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// Deformed cage: one list of monomial coefficients per curve, every curve
/// of the same order `n_t`, in the traversal order of the rest cage.
///
/// Curves may degenerate (for instance a curve dragged to a single point);
/// only closure is required.
#[derive(Debug, Clone, PartialEq)]
pub struct DeformedCage {
    coeffs: Vec<Vec<Vec2>>,
    order: usize,
}

impl DeformedCage {
    pub fn from_monomial(curves: Vec<Vec<Vec2>>) -> Result<Self, DeformError> {
        let order = match curves.first() {
            Some(c) if c.len() >= 2 => c.len() - 1,
            Some(_) => return Err(DeformError::Shape("curves need at least 2 points".into())),
            None => return Err(DeformError::Shape("deformed cage has no curves".into())),
        };
        for (i, c) in curves.iter().enumerate() {
            if c.len() != order + 1 {
                return Err(DeformError::Shape(format!(
                    "curve {i} has order {}, expected {order}",
                    c.len().saturating_sub(1)
                )));
            }
            if c.iter().any(|p| !p.is_finite()) {
                return Err(GeometryError::NonFinite(format!("deformed curve {i}")).into());
            }
        }
        let cage = DeformedCage {
            coeffs: curves,
            order,
        };
        let n = cage.len();
        for i in 0..n {
            let next = (i + 1) % n;
            let gap = cage.end(i).distance(cage.coeffs[next][0]);
            if gap > CLOSURE_TOL {
                return Err(DeformError::Shape(format!(
                    "deformed cage is open: gap {gap:.3e} between curve {i} and curve {next}"
                )));
            }
        }
        Ok(cage)
    }

    /// From Bezier control points, one list per curve.
    pub fn from_bezier(curves: &[Vec<Vec2>]) -> Result<Self, DeformError> {
        let coeffs = curves
            .iter()
            .map(|b| bezier_coefficients(b))
            .collect::<Result<Vec<_>, _>>()?;
        DeformedCage::from_monomial(coeffs)
    }

    /// The rest cage converted to order `n_t`; deforming with it reproduces
    /// the rest points when `n_t` is at least the rest order.
    pub fn from_rest(cage: &Cage, target_order: usize) -> Result<Self, DeformError> {
        let curves = cage
            .curves()
            .iter()
            .map(|c| Ok(c.with_order(target_order)?.coeffs().to_vec()))
            .collect::<Result<Vec<_>, DeformError>>()?;
        DeformedCage::from_monomial(curves)
    }

    pub fn len(&self) -> usize {
        self.coeffs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn order(&self) -> usize {
        self.order
    }

    /// Monomial coefficients of every curve.
    pub fn curves(&self) -> impl ExactSizeIterator<Item = &[Vec2]> {
        self.coeffs.iter().map(Vec::as_slice)
    }

    pub fn curve(&self, index: usize) -> &[Vec2] {
        &self.coeffs[index]
    }

    pub fn to_bezier(&self) -> Vec<Vec<Vec2>> {
        self.coeffs.iter().map(|c| monomial_to_bezier(c)).collect()
    }

    /// Like [`DeformedCage::from_bezier`], but joints open by less than
    /// `max_gap` are first closed at their midpoint.
    pub fn from_bezier_snapped(
        curves: &[Vec<Vec2>],
        max_gap: f64,
    ) -> Result<(Self, Vec<SnappedJoint>), DeformError> {
        let mut ctrl = curves.to_vec();
        let n = ctrl.len();
        let mut snapped = Vec::new();
        for i in 0..n {
            let next = (i + 1) % n;
            let (Some(&end), Some(&start)) = (ctrl[i].last(), ctrl[next].first()) else {
                continue;
            };
            let gap = end.distance(start);
            if gap > 0.0 && gap < max_gap {
                let mid = end.lerp(start, 0.5);
                *ctrl[i].last_mut().unwrap() = mid;
                ctrl[next][0] = mid;
                snapped.push(SnappedJoint { curve: i, gap });
            }
        }
        Ok((DeformedCage::from_bezier(&ctrl)?, snapped))
    }

    /// The same cage with every curve degree-elevated to `order`.
    pub fn elevated(&self, order: usize) -> Result<Self, DeformError> {
        if order < self.order {
            return Err(DeformError::Shape(format!(
                "cannot elevate order {} to {order}",
                self.order
            )));
        }
        let coeffs = self
            .coeffs
            .iter()
            .map(|c| {
                let mut c = c.clone();
                c.resize(order + 1, Vec2::ZERO);
                c
            })
            .collect();
        Ok(DeformedCage { coeffs, order })
    }

    pub fn map_affine(&self, linear: impl Fn(Vec2) -> Vec2, offset: Vec2) -> DeformedCage {
        let coeffs = self
            .coeffs
            .iter()
            .map(|c| {
                let mut m: Vec<Vec2> = c.iter().map(|&p| linear(p)).collect();
                m[0] += offset;
                m
            })
            .collect();
        DeformedCage {
            coeffs,
            order: self.order,
        }
    }

    fn end(&self, index: usize) -> Vec2 {
        self.coeffs[index].iter().copied().sum()
    }
}

pub(crate) fn monomial_to_bezier(c: &[Vec2]) -> Vec<Vec2> {
    let n = c.len() - 1;
    (0..=n)
        .map(|j| {
            (0..=j)
                .map(|k| c[k] * (binomial(j, k) / binomial(n, k)))
                .sum()
        })
        .collect()
}

/// Monomial coefficients of a Bezier curve without requiring a
/// non-degenerate curve.
pub(crate) fn bezier_coefficients(control_points: &[Vec2]) -> Result<Vec<Vec2>, DeformError> {
    if control_points.len() < 2 {
        return Err(DeformError::Shape("curves need at least 2 points".into()));
    }
    match Curve::from_bezier(control_points) {
        Ok(c) => Ok(c.coeffs().to_vec()),
        Err(GeometryError::InvalidCurve(_)) => {
            let mut coeffs = vec![Vec2::ZERO; control_points.len()];
            coeffs[0] = control_points[0];
            Ok(coeffs)
        }
        Err(e) => Err(e.into()),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn square() -> Cage {
        Cage::polygon(&[
            Vec2::new(0.0, 0.0),
            Vec2::new(1.0, 0.0),
            Vec2::new(1.0, 1.0),
            Vec2::new(0.0, 1.0),
        ])
        .unwrap()
    }

    #[test]
    fn from_rest_elevates_every_curve() {
        let d = DeformedCage::from_rest(&square(), 3).unwrap();
        assert_eq!(d.len(), 4);
        assert_eq!(d.order(), 3);
        assert!(d.curves().all(|c| c.len() == 4));
        let b = d.to_bezier();
        assert_eq!(b[0][0], Vec2::new(0.0, 0.0));
        assert!((b[0][1] - Vec2::new(1.0 / 3.0, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn open_deformed_cage_is_rejected() {
        let mut b = DeformedCage::from_rest(&square(), 1).unwrap().to_bezier();
        b[1][0].x += 1e-3;
        assert!(matches!(
            DeformedCage::from_bezier(&b),
            Err(DeformError::Shape(_))
        ));
    }

    #[test]
    fn mixed_orders_are_rejected() {
        let b = vec![
            vec![Vec2::new(0.0, 0.0), Vec2::new(1.0, 0.0)],
            vec![
                Vec2::new(1.0, 0.0),
                Vec2::new(1.0, 0.5),
                Vec2::new(0.0, 0.0),
            ],
        ];
        assert!(matches!(
            DeformedCage::from_bezier(&b),
            Err(DeformError::Shape(_))
        ));
    }

    #[test]
    fn degenerate_curves_are_allowed() {
        let p = Vec2::new(0.3, 0.3);
        let b = vec![vec![p, p, p], vec![p, Vec2::new(1.0, 0.0), p]];
        let d = DeformedCage::from_bezier(&b).unwrap();
        assert_eq!(d.curve(0), &[p, Vec2::ZERO, Vec2::ZERO]);
    }

    #[test]
    fn small_gaps_are_snapped() {
        let mut b = DeformedCage::from_rest(&square(), 1).unwrap().to_bezier();
        b[1][0].x += 4e-7;
        let (d, snapped) = DeformedCage::from_bezier_snapped(&b, 1e-6).unwrap();
        assert_eq!(snapped.len(), 1);
        assert_eq!(snapped[0].curve, 0);
        assert_eq!(d.to_bezier()[0][1], d.to_bezier()[1][0]);
        b[1][0].x += 1e-5;
        assert!(DeformedCage::from_bezier_snapped(&b, 1e-6).is_err());
    }

    #[test]
    fn elevation_keeps_the_shape() {
        let d = DeformedCage::from_rest(&square(), 1).unwrap();
        let e = d.elevated(3).unwrap();
        assert_eq!(e, DeformedCage::from_rest(&square(), 3).unwrap());
        assert_eq!(d.elevated(1).unwrap(), d);
        assert!(e.elevated(2).is_err());
    }
}
