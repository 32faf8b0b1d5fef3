use std::sync::Arc;

use rayon::prelude::*;
use sha2::{Digest, Sha256};

use super::{DeformError, DeformedCage, BOUNDARY_MARGIN};
use crate::engine::{encode_point_with, CurveCoords, Tolerances};
use crate::geometry::{binomial, Cage, GeometryError, Vec2};

/// Highest target order stored by default.
pub const DEFAULT_CEILING: usize = 8;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FieldOptions {
    /// Highest target order the field can be viewed at; defaults to
    /// `max(DEFAULT_CEILING, n_t)`.
    pub ceiling: Option<usize>,
    pub tolerances: Tolerances,
    /// Points closer than this to the boundary are rejected.
    pub boundary_margin: f64,
}

impl Default for FieldOptions {
    fn default() -> Self {
        Self {
            ceiling: None,
            tolerances: Tolerances::default(),
            boundary_margin: BOUNDARY_MARGIN,
        }
    }
}

#[derive(Debug)]
struct FieldData {
    points: Vec<Vec2>,
    source_orders: Vec<usize>,
    ceiling: usize,
    // [point][curve][m = 0..=ceiling]
    phi: Vec<f64>,
    psi: Vec<f64>,
    cage_digest: Option<[u8; 32]>,
}

/// Per-point, per-curve coordinates of a point set against one rest cage.
///
/// Coordinates are stored up to a ceiling order; the field is a view at its
/// target order `n_t`. Cloning shares the data.
#[derive(Debug, Clone)]
pub struct CoordinateField {
    data: Arc<FieldData>,
    target_order: usize,
}

fn cage_digest(cage: &Cage) -> [u8; 32] {
    let mut h = Sha256::new();
    h.update((cage.len() as u64).to_le_bytes());
    for c in cage.curves() {
        h.update((c.order() as u64).to_le_bytes());
        for p in c.coeffs() {
            h.update(p.x.to_le_bytes());
            h.update(p.y.to_le_bytes());
        }
    }
    h.finalize().into()
}

fn signature_of(digest: &[u8; 32], target_order: usize) -> String {
    let mut h = Sha256::new();
    h.update(digest);
    h.update((target_order as u64).to_le_bytes());
    let out: [u8; 32] = h.finalize().into();
    out.iter().map(|b| format!("{b:02x}")).collect()
}

/// Hex digest identifying a rest cage together with a target order.
pub fn cage_signature(cage: &Cage, target_order: usize) -> String {
    signature_of(&cage_digest(cage), target_order)
}

pub fn build_field(
    cage: &Cage,
    points: &[Vec2],
    target_order: usize,
) -> Result<CoordinateField, DeformError> {
    build_field_with(cage, points, target_order, &FieldOptions::default())
}

pub fn build_field_with(
    cage: &Cage,
    points: &[Vec2],
    target_order: usize,
    opts: &FieldOptions,
) -> Result<CoordinateField, DeformError> {
    let ceiling = opts.ceiling.unwrap_or(DEFAULT_CEILING.max(target_order));
    if target_order == 0 || target_order > ceiling {
        return Err(GeometryError::InvalidArgument(format!(
            "target order {target_order} must be in [1, {ceiling}]"
        ))
        .into());
    }
    if cage.is_empty() {
        return Err(DeformError::Shape("cage has no curves".into()));
    }
    let outside: Vec<usize> = points
        .par_iter()
        .enumerate()
        .filter(|(_, &p)| {
            let (inside, d) = cage.locate(p);
            !inside || d < opts.boundary_margin
        })
        .map(|(i, _)| i)
        .collect();
    if !outside.is_empty() {
        return Err(DeformError::Outside { indices: outside });
    }
    let curves: Vec<_> = cage.curves().iter().map(|c| c.normalized()).collect();
    let encoded: Vec<Vec<CurveCoords>> = points
        .par_iter()
        .enumerate()
        .map(|(pi, &p)| {
            curves
                .iter()
                .enumerate()
                .map(|(ci, c)| {
                    encode_point_with(c, p, ceiling, &opts.tolerances).map_err(|source| {
                        DeformError::Engine {
                            point: pi,
                            curve: ci,
                            source,
                        }
                    })
                })
                .collect()
        })
        .collect::<Result<_, _>>()?;
    let stride = ceiling + 1;
    let total = points.len() * curves.len() * stride;
    let mut phi = Vec::with_capacity(total);
    let mut psi = Vec::with_capacity(total);
    for cc in encoded.iter().flatten() {
        phi.extend_from_slice(&cc.phi);
        psi.extend_from_slice(&cc.psi);
    }
    Ok(CoordinateField {
        data: Arc::new(FieldData {
            points: points.to_vec(),
            source_orders: curves.iter().map(|c| c.order()).collect(),
            ceiling,
            phi,
            psi,
            cage_digest: Some(cage_digest(cage)),
        }),
        target_order,
    })
}

/// Image of every field point under the deformation.
pub fn deform(field: &CoordinateField, deformed: &DeformedCage) -> Result<Vec<Vec2>, DeformError> {
    field.deform(deformed)
}

impl CoordinateField {
    pub(crate) fn from_parts(
        points: Vec<Vec2>,
        source_orders: Vec<usize>,
        target_order: usize,
        ceiling: usize,
        phi: Vec<f64>,
        psi: Vec<f64>,
    ) -> Result<Self, DeformError> {
        let expected = points.len() * source_orders.len() * (ceiling + 1);
        if target_order == 0 || target_order > ceiling {
            return Err(DeformError::Format(format!(
                "target order {target_order} outside [1, {ceiling}]"
            )));
        }
        if phi.len() != expected || psi.len() != expected {
            return Err(DeformError::Format(format!(
                "expected {expected} coefficients per array"
            )));
        }
        Ok(CoordinateField {
            data: Arc::new(FieldData {
                points,
                source_orders,
                ceiling,
                phi,
                psi,
                cage_digest: None,
            }),
            target_order,
        })
    }

    pub fn points(&self) -> &[Vec2] {
        &self.data.points
    }

    pub fn len(&self) -> usize {
        self.data.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.data.points.is_empty()
    }

    pub fn curve_count(&self) -> usize {
        self.data.source_orders.len()
    }

    /// Order of each rest curve (after trimming zero leading coefficients).
    pub fn source_orders(&self) -> &[usize] {
        &self.data.source_orders
    }

    pub fn target_order(&self) -> usize {
        self.target_order
    }

    pub fn ceiling(&self) -> usize {
        self.data.ceiling
    }

    /// Rest cage and target order digest; `None` for fields read from disk.
    pub fn signature(&self) -> Option<String> {
        self.data
            .cage_digest
            .as_ref()
            .map(|d| signature_of(d, self.target_order))
    }

    /// True when the field was built from `cage`.
    pub fn matches_cage(&self, cage: &Cage) -> bool {
        self.data.cage_digest == Some(cage_digest(cage))
    }

    fn offset(&self, point: usize, curve: usize) -> usize {
        (point * self.curve_count() + curve) * (self.data.ceiling + 1)
    }

    /// `phi[0..=n_t]` of one point against one curve.
    pub fn phi(&self, point: usize, curve: usize) -> &[f64] {
        let o = self.offset(point, curve);
        &self.data.phi[o..=o + self.target_order]
    }

    pub fn psi(&self, point: usize, curve: usize) -> &[f64] {
        let o = self.offset(point, curve);
        &self.data.psi[o..=o + self.target_order]
    }

    pub fn coords(&self, point: usize, curve: usize) -> CurveCoords {
        CurveCoords {
            phi: self.phi(point, curve).to_vec(),
            psi: self.psi(point, curve).to_vec(),
            source_order: self.data.source_orders[curve],
            target_order: self.target_order,
        }
    }

    /// Stored arrays up to the ceiling, `[point][curve][m]`.
    pub(crate) fn raw(&self) -> (&[f64], &[f64]) {
        (&self.data.phi, &self.data.psi)
    }

    /// The same coordinates viewed at another target order, without
    /// re-encoding.
    pub fn change_target_order(&self, target_order: usize) -> Result<CoordinateField, DeformError> {
        if target_order > self.data.ceiling {
            return Err(DeformError::NeedsRecompute {
                requested: target_order,
                ceiling: self.data.ceiling,
            });
        }
        if target_order == 0 {
            return Err(
                GeometryError::InvalidArgument("target order must be at least 1".into()).into(),
            );
        }
        Ok(CoordinateField {
            data: Arc::clone(&self.data),
            target_order,
        })
    }

    /// Coordinates against the Bezier control points `b_0..b_{n_t}` of the
    /// deformed curve instead of its monomial coefficients.
    pub fn bezier_coords(&self, point: usize, curve: usize) -> (Vec<f64>, Vec<f64>) {
        let n = self.target_order;
        let to_bezier = |w: &[f64]| -> Vec<f64> {
            // c_m = C(n,m) sum_{j<=m} (-1)^(m-j) C(m,j) b_j
            (0..=n)
                .map(|j| {
                    (j..=n)
                        .map(|m| {
                            let sign = if (m - j) % 2 == 0 { 1.0 } else { -1.0 };
                            w[m] * sign * binomial(n, m) * binomial(m, j)
                        })
                        .sum()
                })
                .collect()
        };
        (
            to_bezier(self.phi(point, curve)),
            to_bezier(self.psi(point, curve)),
        )
    }

    fn check_shape(&self, deformed: &DeformedCage) -> Result<(), DeformError> {
        if deformed.len() != self.curve_count() {
            return Err(DeformError::Shape(format!(
                "deformed cage has {} curves, expected {}",
                deformed.len(),
                self.curve_count()
            )));
        }
        if deformed.order() != self.target_order {
            return Err(DeformError::Shape(format!(
                "deformed curves have order {}, expected {}",
                deformed.order(),
                self.target_order
            )));
        }
        Ok(())
    }

    pub fn deform_point(&self, point: usize, deformed: &DeformedCage) -> Vec2 {
        let mut acc = Vec2::ZERO;
        for (ci, bar) in deformed.curves().enumerate() {
            let o = self.offset(point, ci);
            let phi = &self.data.phi[o..];
            let psi = &self.data.psi[o..];
            for (m, &c) in bar.iter().enumerate() {
                acc += c * phi[m] + c.perp() * psi[m];
            }
        }
        acc
    }

    pub fn deform(&self, deformed: &DeformedCage) -> Result<Vec<Vec2>, DeformError> {
        self.check_shape(deformed)?;
        Ok((0..self.len())
            .into_par_iter()
            .with_min_len(256)
            .map(|i| self.deform_point(i, deformed))
            .collect())
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

    fn close(a: Vec2, b: Vec2, tol: f64) -> bool {
        (a - b).norm() <= tol
    }

    #[test]
    fn one_point_field_shape() {
        let f = build_field(&square(), &[Vec2::new(0.3, 0.6)], 1).unwrap();
        assert_eq!(f.len(), 1);
        assert_eq!(f.curve_count(), 4);
        assert_eq!(f.phi(0, 3).len(), 2);
        assert_eq!(f.ceiling(), DEFAULT_CEILING);
        assert_eq!(f.source_orders(), &[1, 1, 1, 1]);
    }

    #[test]
    fn empty_point_list_is_valid() {
        let f = build_field(&square(), &[], 2).unwrap();
        assert!(f.is_empty());
        let d = DeformedCage::from_rest(&square(), 2).unwrap();
        assert!(f.deform(&d).unwrap().is_empty());
    }

    #[test]
    fn outside_points_are_listed() {
        let pts = [
            Vec2::new(0.5, 0.5),
            Vec2::new(2.0, 0.0),
            Vec2::new(0.5, 0.0),
            Vec2::new(0.5, 5e-7),
        ];
        match build_field(&square(), &pts, 1) {
            Err(DeformError::Outside { indices }) => assert_eq!(indices, vec![1, 2, 3]),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn identity_and_translation() {
        let pts = [
            Vec2::new(0.5, 0.5),
            Vec2::new(0.1, 0.9),
            Vec2::new(0.99, 0.02),
        ];
        let f = build_field(&square(), &pts, 2).unwrap();
        let id = DeformedCage::from_rest(&square(), 2).unwrap();
        for (a, b) in f.deform(&id).unwrap().iter().zip(&pts) {
            assert!(close(*a, *b, 1e-9), "{a:?} {b:?}");
        }
        let d = Vec2::new(0.25, -1.5);
        let moved = id.map_affine(|p| p, d);
        for (a, b) in f.deform(&moved).unwrap().iter().zip(&pts) {
            assert!(close(*a, *b + d, 1e-9));
        }
    }

    #[test]
    fn shape_mismatch() {
        let f = build_field(&square(), &[Vec2::new(0.5, 0.5)], 2).unwrap();
        let wrong_order = DeformedCage::from_rest(&square(), 3).unwrap();
        assert!(matches!(f.deform(&wrong_order), Err(DeformError::Shape(_))));
        let tri = Cage::polygon(&[
            Vec2::new(0.0, 0.0),
            Vec2::new(1.0, 0.0),
            Vec2::new(0.0, 1.0),
        ])
        .unwrap();
        let wrong_count = DeformedCage::from_rest(&tri, 2).unwrap();
        assert!(matches!(f.deform(&wrong_count), Err(DeformError::Shape(_))));
    }

    #[test]
    fn target_order_views() {
        let cage = square();
        let f = build_field(&cage, &[Vec2::new(0.4, 0.7)], 3).unwrap();
        let same = f.change_target_order(3).unwrap();
        assert_eq!(same.coords(0, 1), f.coords(0, 1));
        let up = f.change_target_order(8).unwrap();
        let back = up.change_target_order(3).unwrap();
        assert_eq!(back.coords(0, 2), f.coords(0, 2));
        assert!(matches!(
            f.change_target_order(9),
            Err(DeformError::NeedsRecompute {
                requested: 9,
                ceiling: 8
            })
        ));
        let opts = FieldOptions {
            ceiling: Some(12),
            ..FieldOptions::default()
        };
        let tall = build_field_with(&cage, &[Vec2::new(0.4, 0.7)], 3, &opts).unwrap();
        assert!(tall.change_target_order(12).is_ok());
        for m in 0..=3 {
            assert_eq!(tall.phi(0, 0)[m], f.phi(0, 0)[m]);
        }
    }

    #[test]
    fn signature_tracks_cage_and_order() {
        let cage = square();
        let f = build_field(&cage, &[Vec2::new(0.5, 0.5)], 2).unwrap();
        assert_eq!(f.signature().unwrap(), cage_signature(&cage, 2));
        assert_ne!(cage_signature(&cage, 2), cage_signature(&cage, 3));
        assert!(f.matches_cage(&cage));
        let other = cage.map_affine(|p| p * 2.0, Vec2::ZERO);
        assert!(!f.matches_cage(&other));
        assert_eq!(
            f.change_target_order(5).unwrap().signature().unwrap(),
            cage_signature(&cage, 5)
        );
    }

    #[test]
    fn bezier_coords_agree_with_monomial_coords() {
        let cage = square();
        let f = build_field(&cage, &[Vec2::new(0.3, 0.2)], 3).unwrap();
        let d = DeformedCage::from_rest(&cage, 3)
            .unwrap()
            .map_affine(|p| Vec2::new(p.x + 0.3 * p.y, 0.8 * p.y), Vec2::ZERO);
        let bez = d.to_bezier();
        let mut acc = Vec2::ZERO;
        for (ci, b) in bez.iter().enumerate() {
            let (phi, psi) = f.bezier_coords(0, ci);
            for (j, &p) in b.iter().enumerate() {
                acc += p * phi[j] + p.perp() * psi[j];
            }
        }
        assert!(close(acc, f.deform_point(0, &d), 1e-12));
    }
}
