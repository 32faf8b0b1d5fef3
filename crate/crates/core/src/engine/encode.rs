use std::f64::consts::PI;

use serde::Serialize;

use super::residue::e_total;
use super::roots::complex_roots_with;
use super::{EngineError, Tolerances};
use crate::geometry::{Curve, Vec2};

/// Coefficients of the two scalar polynomials
/// `alpha(t) = (c(t) - eta) . c'(t)^perp` (degree `2 n_s - 2`) and
/// `beta(t) = (c(t) - eta) . c'(t)` (degree `2 n_s - 1`).
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AlphaBeta {
    pub alpha: Vec<f64>,
    pub beta: Vec<f64>,
}

impl AlphaBeta {
    pub fn order(&self) -> usize {
        self.beta.len() / 2
    }
}

/// Per-curve coordinates of one point: `phi[m]` weighs `cbar_m` and
/// `psi[m]` weighs `cbar_m^perp`, for `m = 0..=n_t`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CurveCoords {
    pub phi: Vec<f64>,
    pub psi: Vec<f64>,
    pub source_order: usize,
    pub target_order: usize,
}

/// Number of kernel values `F_0..F_{n_t + 2 n_s - 1}` needed to encode.
pub fn kernel_len(source_order: usize, target_order: usize) -> usize {
    target_order + 2 * source_order
}

/// Polynomial products by convolution; valid for any order.
pub fn alpha_beta(curve: &Curve, eta: Vec2) -> AlphaBeta {
    let curve = curve.normalized();
    let c = curve.coeffs();
    let n = curve.order();
    let shifted = |i: usize| if i == 0 { c[0] - eta } else { c[i] };
    let velocity: Vec<Vec2> = (1..=n).map(|k| c[k] * k as f64).collect();
    let mut alpha = vec![0.0; 2 * n];
    let mut beta = vec![0.0; 2 * n];
    for i in 0..=n {
        let d = shifted(i);
        for (j, v) in velocity.iter().enumerate() {
            alpha[i + j] += d.dot(v.perp());
            beta[i + j] += d.dot(*v);
        }
    }
    // the top cross term c_n . (n c_n)^perp vanishes identically
    alpha.truncate(2 * n - 1);
    AlphaBeta { alpha, beta }
}

/// `F_0..=F_{m_max}` in closed form.
pub fn f_kernel(curve: &Curve, eta: Vec2, m_max: usize) -> Result<Vec<f64>, EngineError> {
    f_kernel_with(curve, eta, m_max, &Tolerances::default())
}

pub fn f_kernel_with(
    curve: &Curve,
    eta: Vec2,
    m_max: usize,
    tol: &Tolerances,
) -> Result<Vec<f64>, EngineError> {
    let roots = complex_roots_with(curve, eta, tol)?;
    let inv_a = 1.0 / roots.normalization();
    let f: Vec<f64> = e_total(&roots, m_max)?
        .into_iter()
        .map(|e| e * inv_a)
        .collect();
    if f.iter().any(|v| !v.is_finite()) {
        return Err(EngineError::NonFinite);
    }
    Ok(f)
}

/// Boundary term of the integrated-by-parts Neumann integral,
/// `-(1 / 2 pi) log |c(1) - eta|`.
pub fn log_distance_term(curve: &Curve, eta: Vec2) -> Result<f64, EngineError> {
    let d = (curve.end() - eta).norm();
    if d < Tolerances::default().on_curve {
        return Err(EngineError::EndpointSingularity { omega: (1.0, 0.0) });
    }
    Ok(-d.ln() / (2.0 * PI))
}

impl CurveCoords {
    /// Combines kernel values into coordinates:
    /// `phi[m] = sum_i alpha_i F_{m+i}`, `psi[m] = sum_i beta_i F_{m+i} + delta`
    /// for `m >= 1`, and `psi[0] = 0`.
    ///
    /// Only `F_0..F_{n_t + 2 n_s - 1}` are read.
    pub fn assemble(
        coeffs: &AlphaBeta,
        kernel: &[f64],
        delta: f64,
        target_order: usize,
    ) -> Result<CurveCoords, EngineError> {
        let source_order = coeffs.order();
        let needed = kernel_len(source_order, target_order);
        if kernel.len() < needed {
            return Err(EngineError::InvalidArgument(format!(
                "encoding order {source_order} -> {target_order} needs {needed} kernel values, got {}",
                kernel.len()
            )));
        }
        let kernel = &kernel[..needed];
        let dot =
            |w: &[f64], m: usize| -> f64 { w.iter().zip(&kernel[m..]).map(|(a, f)| a * f).sum() };
        let phi = (0..=target_order).map(|m| dot(&coeffs.alpha, m)).collect();
        let psi = (0..=target_order)
            .map(|m| {
                if m == 0 {
                    0.0
                } else {
                    dot(&coeffs.beta, m) + delta
                }
            })
            .collect();
        Ok(CurveCoords {
            phi,
            psi,
            source_order,
            target_order,
        })
    }

    /// `sum_m phi_m cbar_m + psi_m cbar_m^perp`; `deformed` may be shorter
    /// than `n_t + 1` (missing coefficients are zero).
    pub fn apply(&self, deformed: &[Vec2]) -> Vec2 {
        self.phi
            .iter()
            .zip(&self.psi)
            .zip(deformed)
            .map(|((&p, &q), &c)| c * p + c.perp() * q)
            .sum()
    }
}

/// Encodes `eta` against one rest curve for deformed curves of order `n_t`.
pub fn encode_point(
    curve: &Curve,
    eta: Vec2,
    target_order: usize,
) -> Result<CurveCoords, EngineError> {
    encode_point_with(curve, eta, target_order, &Tolerances::default())
}

pub fn encode_point_with(
    curve: &Curve,
    eta: Vec2,
    target_order: usize,
    tol: &Tolerances,
) -> Result<CurveCoords, EngineError> {
    if target_order == 0 {
        return Err(EngineError::InvalidArgument(
            "target order must be at least 1".into(),
        ));
    }
    let curve = curve.normalized();
    let delta = log_distance_term(&curve, eta)?;
    let kernel = f_kernel_with(
        &curve,
        eta,
        kernel_len(curve.order(), target_order) - 1,
        tol,
    )?;
    CurveCoords::assemble(&alpha_beta(&curve, eta), &kernel, delta, target_order)
}
