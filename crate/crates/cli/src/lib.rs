//! Command-line front end for `polygreen`.
//!
//! Every command is deterministic given its flags. Exit codes: 0 success,
//! 1 check failure, 2 invalid input, 3 I/O failure.

pub mod args;
pub mod check;
pub mod load;
pub mod render;

use std::fs::File;
use std::io::{BufReader, BufWriter, Write};
use std::path::Path;

use polygreen::deformer::{
    build_field, grid_lattice, read_field, warp_grid, write_field, DeformError,
};
use polygreen::io::points_to_json;
use polygreen::{Cage, Vec2};
use thiserror::Error;

pub use args::{Cli, Command};

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Invalid(String),
    #[error("{0}")]
    Io(String),
    #[error("{failed} check(s) failed")]
    CheckFailed { failed: usize },
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::CheckFailed { .. } => 1,
            CliError::Invalid(_) => 2,
            CliError::Io(_) => 3,
        }
    }

    pub(crate) fn io(path: &Path, e: impl std::fmt::Display) -> Self {
        CliError::Io(format!("{}: {e}", path.display()))
    }

    pub(crate) fn invalid(path: &Path, e: impl std::fmt::Display) -> Self {
        CliError::Invalid(format!("{}: {e}", path.display()))
    }
}

pub fn run(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Encode(a) => encode(&a.cage, &a.points, a.target_order(), &a.out),
        Command::Deform(a) => deform(&a.coords, &a.deformed, &a.out),
        Command::Warp(a) => warp(&a),
        Command::Field(a) => field(&a),
        Command::Check(a) => check::run(&a),
    }
}

fn create(path: &Path) -> Result<BufWriter<File>, CliError> {
    File::create(path)
        .map(BufWriter::new)
        .map_err(|e| CliError::io(path, e))
}

/// Encodes the points, leaving out (and reporting) those outside the cage.
pub fn encode(cage: &Path, points: &Path, target_order: usize, out: &Path) -> Result<(), CliError> {
    let rest = load::rest_cage(cage)?;
    let pts = load::points(points)?;
    let field = match build_field(&rest, &pts, target_order) {
        Err(DeformError::Outside { indices }) => {
            eprintln!(
                "warning: {} point(s) outside the cage were excluded: {:?}",
                indices.len(),
                indices
            );
            let kept: Vec<Vec2> = pts
                .iter()
                .enumerate()
                .filter(|(i, _)| indices.binary_search(i).is_err())
                .map(|(_, p)| *p)
                .collect();
            build_field(&rest, &kept, target_order)
        }
        other => other,
    }
    .map_err(|e| CliError::Invalid(e.to_string()))?;
    let mut w = create(out)?;
    write_field(&field, &mut w).map_err(|e| CliError::io(out, e))?;
    w.flush().map_err(|e| CliError::io(out, e))
}

pub fn deform(coords: &Path, deformed: &Path, out: &Path) -> Result<(), CliError> {
    let file = File::open(coords).map_err(|e| CliError::io(coords, e))?;
    let field = read_field(BufReader::new(file)).map_err(|e| match e {
        DeformError::Io(e) => CliError::io(coords, e),
        e => CliError::invalid(coords, e),
    })?;
    let cage = load::deformed_cage(deformed)?;
    if cage.order() != field.target_order() {
        return Err(CliError::Invalid(format!(
            "order mismatch: the field was encoded with n_t = {}, but the deformed cage has order {}",
            field.target_order(),
            cage.order()
        )));
    }
    let moved = field
        .deform(&cage)
        .map_err(|e| CliError::invalid(deformed, e))?;
    std::fs::write(out, points_to_json(&moved)).map_err(|e| CliError::io(out, e))
}

pub fn warp(a: &args::WarpArgs) -> Result<(), CliError> {
    let rest = load::rest_cage(&a.rest)?;
    let deformed = load::deformed_cage(&a.deformed)?;
    let n_t = a.target_order().unwrap_or(deformed.order());
    if deformed.order() > n_t {
        return Err(CliError::Invalid(format!(
            "deformed cage has order {}, above the target order {n_t}",
            deformed.order()
        )));
    }
    let deformed = deformed
        .elevated(n_t)
        .map_err(|e| CliError::invalid(&a.deformed, e))?;
    let src = image::open(&a.image)
        .map_err(|e| CliError::io(&a.image, e))?
        .to_rgba8();
    let grid =
        warp_grid(&rest, &deformed, a.res()).map_err(|e| CliError::Invalid(e.to_string()))?;
    let img = render::warp_image(
        &src,
        &grid.lattice.points,
        &grid.deformed,
        &grid.lattice.triangles,
    );
    img.save_with_format(&a.out, image::ImageFormat::Png)
        .map_err(|e| CliError::io(&a.out, e))
}

/// Values of one coordinate over a lattice of the cage's interior.
#[derive(Debug, Clone)]
pub struct FieldSamples {
    pub res: usize,
    pub cells: Vec<[usize; 2]>,
    pub points: Vec<Vec2>,
    pub values: Vec<f64>,
}

impl FieldSamples {
    pub fn range(&self) -> (f64, f64) {
        self.values
            .iter()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| {
                (lo.min(v), hi.max(v))
            })
    }
}

/// Samples `Phi[m]` or `Psi[m]` of curve `curve` over a `res x res`
/// lattice of the cage's bounding box.
pub fn sample_field(
    cage: &Cage,
    which: args::Which,
    curve: usize,
    coeff: usize,
    res: usize,
) -> Result<FieldSamples, CliError> {
    if curve >= cage.len() {
        return Err(CliError::Invalid(format!(
            "curve index {curve} is out of range; the cage has {} curves",
            cage.len()
        )));
    }
    if coeff > polygreen::deformer::DEFAULT_CEILING {
        return Err(CliError::Invalid(format!(
            "coefficient index {coeff} is out of range 0..={}",
            polygreen::deformer::DEFAULT_CEILING
        )));
    }
    let lattice = grid_lattice(cage, res).map_err(|e| CliError::Invalid(e.to_string()))?;
    let field = build_field(cage, &lattice.points, coeff.max(1))
        .map_err(|e| CliError::Invalid(e.to_string()))?;
    let values = (0..field.len())
        .map(|p| match which {
            args::Which::Phi => field.phi(p, curve)[coeff],
            args::Which::Psi => field.psi(p, curve)[coeff],
        })
        .collect();
    Ok(FieldSamples {
        res,
        cells: lattice.cells,
        points: lattice.points,
        values,
    })
}

pub fn field(a: &args::FieldArgs) -> Result<(), CliError> {
    let cage = load::rest_cage(&a.cage)?;
    let samples = sample_field(&cage, a.which, a.curve, a.coeff, a.res())?;
    let (lo, hi) = samples.range();
    if samples.values.is_empty() {
        eprintln!("warning: no lattice point lies inside the cage");
    } else {
        println!("min {lo:.6e} max {hi:.6e}");
    }
    render::heatmap(&samples)
        .save_with_format(&a.out, image::ImageFormat::Png)
        .map_err(|e| CliError::io(&a.out, e))
}
