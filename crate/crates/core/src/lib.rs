//! Polynomial Green coordinates for closed high-order cages.
//!
//! A cage is a closed loop of polynomial curves. Every interior point is
//! encoded once against the rest cage into per-curve coordinate arrays; any
//! deformation of the cage into polynomial curves of order `n_t` is then a
//! linear combination of the deformed monomial coefficients, and the induced
//! map of the interior is conformal.
//!
//! - [`geometry`]: curves, cages, basis conversion, validation.
//! - [`engine`]: roots, residues and the closed-form kernel; per-curve encoding.
//! - [`deformer`]: coordinate fields over point sets, deformation, grid warping.
//! - [`oracle`]: adaptive quadrature of the same integrals, used for checking.
//! - [`io`]: cage and point JSON.

pub mod deformer;
pub mod engine;
pub mod fixtures;
pub mod geometry;
pub mod io;
pub mod oracle;

pub use geometry::{Cage, Curve, Vec2};
