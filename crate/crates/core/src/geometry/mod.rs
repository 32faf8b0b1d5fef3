//! Curves, cages and the basis conversions between monomial and Bezier form.

mod cage;
mod curve;
mod vec2;

pub use cage::{
    BoundingBox, Cage, SnappedJoint, ValidationConfig, ValidationReport, Violation, CLOSURE_TOL,
    DEFAULT_SAMPLES_PER_CURVE,
};
pub(crate) use curve::binomial;
pub use curve::{Curve, TRIM_REL_TOL};
pub use vec2::Vec2;

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum GeometryError {
    #[error("invalid curve: {0}")]
    InvalidCurve(String),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("non-finite coordinate in {0}")]
    NonFinite(String),
}

pub fn bezier_to_monomial(control_points: &[Vec2]) -> Result<Curve, GeometryError> {
    Curve::from_bezier(control_points)
}

pub fn monomial_to_bezier(curve: &Curve) -> Vec<Vec2> {
    curve.to_bezier()
}

pub fn elevate_degree(curve: &Curve, target_order: usize) -> Result<Curve, GeometryError> {
    curve.elevate_degree(target_order)
}

pub fn validate_cage(cage: &Cage) -> ValidationReport {
    cage.validate()
}

pub fn point_in_cage(cage: &Cage, p: Vec2) -> bool {
    cage.contains(p)
}
