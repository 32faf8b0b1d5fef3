//! Closed-form evaluation of the per-curve coordinates.
//!
//! For a rest curve `c` of order `n_s` and an interior point `eta`, the
//! contribution of `c` to the deformed position is
//! `sum_m phi_m cbar_m + sum_m psi_m cbar_m^perp`, with `phi`/`psi` linear
//! combinations of the kernels
//! `F_m = int_0^1 t^m / (2 pi |eta - c(t)|^2) dt`.
//! The kernels are sums of residues over the roots of `c(t) = eta`.

mod encode;
mod residue;
mod roots;

pub use encode::{
    alpha_beta, encode_point, encode_point_with, f_kernel, f_kernel_with, kernel_len,
    log_distance_term, AlphaBeta, CurveCoords,
};
pub use residue::{
    e_repeated, e_sequence, e_sequence_real, e_total, g0, pole_contribution,
    residue_with_numerator, ENDPOINT_TOL,
};
pub use roots::{complex_roots, complex_roots_with, ComplexScalar, Root, RootClass, RootSet};

use thiserror::Error;

/// Numerical thresholds of the engine.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tolerances {
    /// Accepted `|p(w)| / sum |p_k| |w|^k` after polishing.
    pub root_residual: f64,
    /// Roots closer than this merge into one cluster.
    pub cluster: f64,
    /// Roots with `|Im w|` below this are treated as real.
    pub real_class: f64,
    /// Points closer than this to the curve are rejected.
    pub on_curve: f64,
    /// Roots closer than this to `0` or `1` mean the point sits on an endpoint.
    pub endpoint: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            root_residual: 1e-10,
            cluster: 1e-7,
            real_class: 1e-9,
            on_curve: 1e-9,
            endpoint: ENDPOINT_TOL,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum EngineError {
    #[error("query point lies on the curve (parameter {parameter})")]
    OnBoundary { parameter: f64 },
    #[error("query point coincides with a curve endpoint (root {omega:?})")]
    EndpointSingularity { omega: (f64, f64) },
    #[error("root finding failed: relative residual {residual:e} for polynomial {coefficients:?}")]
    RootFindingFailure {
        coefficients: Vec<(f64, f64)>,
        residual: f64,
    },
    #[error("root is classified {found:?} but {expected:?} was required")]
    WrongClassification {
        expected: RootClass,
        found: RootClass,
    },
    #[error("non-finite value")]
    NonFinite,
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}
