//! Ground truth by direct adaptive quadrature.
//!
//! Every integral that the closed-form engine evaluates analytically is
//! integrated here numerically, straight from its defining integrand. The
//! Neumann term is integrated in its log-kernel form, before the integration
//! by parts that the encoder relies on, so the two sides meet only through
//! the identity itself.

mod quadrature;

pub use quadrature::{integrate, Estimate, QuadratureConfig};

use std::f64::consts::PI;

use thiserror::Error;

use crate::deformer::DeformedCage;
use crate::geometry::{Cage, Curve, Vec2};

/// Points closer than this to the curve are rejected.
pub const ON_CURVE_TOL: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum OracleError {
    #[error("quadrature did not converge (estimate {value:e}, error bound {error:e}); the point is probably too close to the curve")]
    NoConvergence { value: f64, error: f64 },
    #[error("integrand produced a non-finite value")]
    NonFinite,
    #[error("query point lies on the curve (distance {distance:e})")]
    OnCurve { distance: f64 },
    #[error("invalid quadrature configuration {0:?}")]
    InvalidConfig(QuadratureConfig),
    #[error("deformed cage has {deformed} curves but the rest cage has {rest}")]
    CurveCount { rest: usize, deformed: usize },
}

/// A vector-valued integral with the larger of the two component error bounds.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VecEstimate {
    pub value: Vec2,
    pub error: f64,
}

fn poly_eval(coeffs: &[Vec2], t: f64) -> Vec2 {
    coeffs.iter().rev().fold(Vec2::ZERO, |acc, &c| acc * t + c)
}

fn poly_derivative(coeffs: &[Vec2], t: f64) -> Vec2 {
    coeffs
        .iter()
        .enumerate()
        .skip(1)
        .rev()
        .fold(Vec2::ZERO, |acc, (k, &c)| acc * t + c * k as f64)
}

fn check_off_curve(curve: &Curve, eta: Vec2) -> Result<(), OracleError> {
    let distance = curve.distance_to(eta);
    if distance <= ON_CURVE_TOL {
        return Err(OracleError::OnCurve { distance });
    }
    Ok(())
}

fn integrate_vec(
    f: impl Fn(f64) -> Vec2,
    cfg: &QuadratureConfig,
) -> Result<VecEstimate, OracleError> {
    let x = integrate(|t| f(t).x, 0.0, 1.0, cfg)?;
    let y = integrate(|t| f(t).y, 0.0, 1.0, cfg)?;
    Ok(VecEstimate {
        value: Vec2::new(x.value, y.value),
        error: x.error.max(y.error),
    })
}

/// `F_m = int_0^1 t^m / (2 pi |eta - c(t)|^2) dt`.
pub fn quad_f_kernel(
    curve: &Curve,
    eta: Vec2,
    m: usize,
    cfg: &QuadratureConfig,
) -> Result<Estimate, OracleError> {
    check_off_curve(curve, eta)?;
    integrate(
        |t| t.powi(m as i32) / (2.0 * PI * (eta - curve.evaluate(t)).norm_sq()),
        0.0,
        1.0,
        cfg,
    )
}

/// Dirichlet term of one curve:
/// `int_0^1 cbar(t) ((c(t) - eta) . c'(t)^perp) / (2 pi |c(t) - eta|^2) dt`.
pub fn quad_dirichlet(
    curve: &Curve,
    deformed: &[Vec2],
    eta: Vec2,
    cfg: &QuadratureConfig,
) -> Result<VecEstimate, OracleError> {
    check_off_curve(curve, eta)?;
    integrate_vec(
        |t| {
            let d = curve.evaluate(t) - eta;
            let w = d.dot(curve.derivative(t).perp()) / (2.0 * PI * d.norm_sq());
            poly_eval(deformed, t) * w
        },
        cfg,
    )
}

/// Neumann term of one curve in log-kernel form:
/// `int_0^1 -(1 / 2 pi) log|c(t) - eta| cbar'(t)^perp dt`.
pub fn quad_neumann(
    curve: &Curve,
    deformed: &[Vec2],
    eta: Vec2,
    cfg: &QuadratureConfig,
) -> Result<VecEstimate, OracleError> {
    check_off_curve(curve, eta)?;
    integrate_vec(
        |t| {
            let g = -(curve.evaluate(t) - eta).norm().ln() / (2.0 * PI);
            poly_derivative(deformed, t).perp() * g
        },
        cfg,
    )
}

/// Image of `eta` under the deformation, summing both terms over the cage.
pub fn quad_full_deform(
    cage: &Cage,
    deformed: &DeformedCage,
    eta: Vec2,
    cfg: &QuadratureConfig,
) -> Result<VecEstimate, OracleError> {
    if cage.len() != deformed.len() {
        return Err(OracleError::CurveCount {
            rest: cage.len(),
            deformed: deformed.len(),
        });
    }
    let mut value = Vec2::ZERO;
    let mut error = 0.0;
    for (curve, bar) in cage.curves().iter().zip(deformed.curves()) {
        let d = quad_dirichlet(curve, bar, eta, cfg)?;
        let n = quad_neumann(curve, bar, eta, cfg)?;
        value += d.value + n.value;
        error += d.error + n.error;
    }
    Ok(VecEstimate { value, error })
}
