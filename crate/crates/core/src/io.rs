//! Cage and point-list JSON.
//!
//! ```json
//! { "curves": [ { "basis": "bezier", "points": [[0, 0], [1, 0]] } ] }
//! ```
//!
//! A curve of order `n` lists `n + 1` points. Point lists are `[[x, y], ...]`.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::deformer::{bezier_coefficients, monomial_to_bezier, DeformError, DeformedCage};
use crate::geometry::{Cage, Curve, GeometryError, Vec2};

#[derive(Debug, Error)]
pub enum IoError {
    #[error("invalid JSON: {0}")]
    Json(#[from] serde_json::Error),
    #[error("curve {index}: {source}")]
    Curve { index: usize, source: GeometryError },
    #[error("non-finite coordinate in {0}")]
    NonFinite(String),
    #[error(transparent)]
    Deformed(#[from] DeformError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Basis {
    Bezier,
    Monomial,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CurveDocument {
    pub basis: Basis,
    pub points: Vec<Vec2>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CageDocument {
    pub curves: Vec<CurveDocument>,
}

impl CageDocument {
    pub fn parse(text: &str) -> Result<Self, IoError> {
        let doc: CageDocument = serde_json::from_str(text)?;
        for (i, c) in doc.curves.iter().enumerate() {
            if c.points.iter().any(|p| !p.is_finite()) {
                return Err(IoError::NonFinite(format!("curve {i}")));
            }
        }
        Ok(doc)
    }

    pub fn from_cage(cage: &Cage, basis: Basis) -> Self {
        CageDocument {
            curves: cage
                .curves()
                .iter()
                .map(|c| CurveDocument {
                    basis,
                    points: match basis {
                        Basis::Bezier => c.to_bezier(),
                        Basis::Monomial => c.coeffs().to_vec(),
                    },
                })
                .collect(),
        }
    }

    /// The curves as a rest cage (not validated).
    pub fn to_cage(&self) -> Result<Cage, IoError> {
        let curves = self
            .curves
            .iter()
            .enumerate()
            .map(|(index, c)| {
                match c.basis {
                    Basis::Bezier => Curve::from_bezier(&c.points),
                    Basis::Monomial => Curve::from_monomial(c.points.clone()),
                }
                .map_err(|source| IoError::Curve { index, source })
            })
            .collect::<Result<_, _>>()?;
        Ok(Cage::new(curves))
    }

    /// The curves as a deformed cage; every curve must have the same order.
    pub fn to_deformed(&self) -> Result<DeformedCage, IoError> {
        let all_bezier = self.curves.iter().all(|c| c.basis == Basis::Bezier);
        if all_bezier {
            let ctrl: Vec<Vec<Vec2>> = self.curves.iter().map(|c| c.points.clone()).collect();
            return Ok(DeformedCage::from_bezier(&ctrl)?);
        }
        let coeffs = self
            .curves
            .iter()
            .map(|c| match c.basis {
                Basis::Monomial => Ok(c.points.clone()),
                Basis::Bezier => bezier_coefficients(&c.points),
            })
            .collect::<Result<Vec<_>, _>>()?;
        Ok(DeformedCage::from_monomial(coeffs)?)
    }

    /// Bezier control points of every curve, whatever basis it was written in.
    pub fn bezier_points(&self) -> Vec<Vec<Vec2>> {
        self.curves
            .iter()
            .map(|c| match c.basis {
                Basis::Bezier => c.points.clone(),
                Basis::Monomial if c.points.is_empty() => Vec::new(),
                Basis::Monomial => monomial_to_bezier(&c.points),
            })
            .collect()
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("cage documents always serialize")
    }
}

pub fn parse_cage(text: &str) -> Result<Cage, IoError> {
    CageDocument::parse(text)?.to_cage()
}

pub fn cage_to_json(cage: &Cage, basis: Basis) -> String {
    CageDocument::from_cage(cage, basis).to_json()
}

pub fn parse_points(text: &str) -> Result<Vec<Vec2>, IoError> {
    let points: Vec<Vec2> = serde_json::from_str(text)?;
    if let Some(i) = points.iter().position(|p| !p.is_finite()) {
        return Err(IoError::NonFinite(format!("point {i}")));
    }
    Ok(points)
}

pub fn points_to_json(points: &[Vec2]) -> String {
    serde_json::to_string(points).expect("finite points always serialize")
}
