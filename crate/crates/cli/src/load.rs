//! Reading cages and point lists from disk.

use std::path::Path;

use polygreen::deformer::DeformedCage;
use polygreen::geometry::SnappedJoint;
use polygreen::io::{parse_points, CageDocument};
use polygreen::{Cage, Vec2};

use crate::CliError;

/// Joints open by less than this are closed at load time.
pub const SNAP_GAP: f64 = 1e-6;

fn read(path: &Path) -> Result<String, CliError> {
    std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))
}

fn warn_snapped(path: &Path, snapped: &[SnappedJoint]) {
    for j in snapped {
        eprintln!(
            "warning: {}: closed a gap of {:.3e} after curve {}",
            path.display(),
            j.gap,
            j.curve
        );
    }
}

/// A validated rest cage.
pub fn rest_cage(path: &Path) -> Result<Cage, CliError> {
    let doc = CageDocument::parse(&read(path)?).map_err(|e| CliError::invalid(path, e))?;
    let cage = doc.to_cage().map_err(|e| CliError::invalid(path, e))?;
    let (cage, snapped) = cage.snap_joints(SNAP_GAP);
    warn_snapped(path, &snapped);
    let report = cage.validate();
    if !report.is_valid() {
        let json = serde_json::to_string_pretty(&report).unwrap_or_default();
        return Err(CliError::invalid(
            path,
            format!("invalid cage\n{report}\n{json}"),
        ));
    }
    Ok(cage)
}

pub fn deformed_cage(path: &Path) -> Result<DeformedCage, CliError> {
    let doc = CageDocument::parse(&read(path)?).map_err(|e| CliError::invalid(path, e))?;
    let (cage, snapped) = DeformedCage::from_bezier_snapped(&doc.bezier_points(), SNAP_GAP)
        .map_err(|e| CliError::invalid(path, e))?;
    warn_snapped(path, &snapped);
    Ok(cage)
}

pub fn points(path: &Path) -> Result<Vec<Vec2>, CliError> {
    parse_points(&read(path)?).map_err(|e| CliError::invalid(path, e))
}
