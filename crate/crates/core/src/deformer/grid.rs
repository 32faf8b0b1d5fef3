use rayon::prelude::*;
use serde::Serialize;

use super::{build_field, CoordinateField, DeformError, DeformedCage, BOUNDARY_MARGIN};
use crate::geometry::{Cage, GeometryError, Vec2};

/// Interior points of a regular lattice over the cage bounding box, with a
/// triangulation of the lattice cells they cover.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Lattice {
    pub resolution: usize,
    pub min: Vec2,
    pub spacing: Vec2,
    pub points: Vec<Vec2>,
    /// Lattice position `[i, j]` of every point.
    pub cells: Vec<[usize; 2]>,
    /// Counter-clockwise triangles indexing `points`.
    pub triangles: Vec<[usize; 3]>,
}

#[derive(Debug, Clone)]
pub struct WarpedGrid {
    pub lattice: Lattice,
    pub field: CoordinateField,
    pub deformed: Vec<Vec2>,
}

/// `resolution x resolution` lattice spanning the bounding box, filtered to
/// points strictly inside the cage and at least [`BOUNDARY_MARGIN`] away from
/// it. Each lattice cell is split into two triangles along its diagonal;
/// triangles with a missing corner are dropped.
pub fn grid_lattice(cage: &Cage, resolution: usize) -> Result<Lattice, DeformError> {
    if resolution < 2 {
        return Err(GeometryError::InvalidArgument(format!(
            "grid resolution must be at least 2, got {resolution}"
        ))
        .into());
    }
    if cage.is_empty() {
        return Err(DeformError::Shape("cage has no curves".into()));
    }
    let bb = cage.bounding_box();
    let size = bb.size();
    if !(size.x > 0.0 && size.y > 0.0) || !size.is_finite() {
        return Err(GeometryError::InvalidArgument(format!(
            "degenerate cage bounding box {:?}..{:?}",
            bb.min, bb.max
        ))
        .into());
    }
    let spacing = size * (1.0 / (resolution - 1) as f64);
    let at = |i: usize, j: usize| {
        Vec2::new(
            bb.min.x + spacing.x * i as f64,
            bb.min.y + spacing.y * j as f64,
        )
    };
    let inside: Vec<bool> = (0..resolution * resolution)
        .into_par_iter()
        .map(|k| {
            let (inside, d) = cage.locate(at(k % resolution, k / resolution));
            inside && d >= BOUNDARY_MARGIN
        })
        .collect();
    let mut index = vec![usize::MAX; resolution * resolution];
    let mut points = Vec::new();
    let mut cells = Vec::new();
    for j in 0..resolution {
        for i in 0..resolution {
            let k = j * resolution + i;
            if inside[k] {
                index[k] = points.len();
                points.push(at(i, j));
                cells.push([i, j]);
            }
        }
    }
    let mut triangles = Vec::new();
    for j in 0..resolution - 1 {
        for i in 0..resolution - 1 {
            let a = index[j * resolution + i];
            let b = index[j * resolution + i + 1];
            let c = index[(j + 1) * resolution + i + 1];
            let d = index[(j + 1) * resolution + i];
            for t in [[a, b, c], [a, c, d]] {
                if t.iter().all(|&v| v != usize::MAX) {
                    triangles.push(t);
                }
            }
        }
    }
    Ok(Lattice {
        resolution,
        min: bb.min,
        spacing,
        points,
        cells,
        triangles,
    })
}

/// Lattice of the rest cage pushed through the deformation.
pub fn warp_grid(
    cage: &Cage,
    deformed: &DeformedCage,
    resolution: usize,
) -> Result<WarpedGrid, DeformError> {
    let lattice = grid_lattice(cage, resolution)?;
    let field = build_field(cage, &lattice.points, deformed.order())?;
    let deformed = field.deform(deformed)?;
    Ok(WarpedGrid {
        lattice,
        field,
        deformed,
    })
}
