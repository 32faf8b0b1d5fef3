use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Debug, Parser)]
#[command(
    name = "polygreen",
    version,
    about = "Conformal cage deformation with polynomial Green coordinates"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Precompute a coordinate field for a list of points.
    Encode(EncodeArgs),
    /// Apply a deformed cage to a coordinate field.
    Deform(DeformArgs),
    /// Warp a PNG image with a deformed cage.
    Warp(WarpArgs),
    /// Plot one coordinate as a heatmap.
    Field(FieldArgs),
    /// Compare the closed forms against quadrature.
    Check(CheckArgs),
}

#[derive(Debug, Args)]
pub struct EncodeArgs {
    #[arg(long)]
    pub cage: PathBuf,
    /// JSON list of [x, y] points.
    #[arg(long)]
    pub points: PathBuf,
    #[arg(long, value_parser = clap::value_parser!(u8).range(1..=8), value_name = "N_T")]
    target_order: u8,
    #[arg(long)]
    pub out: PathBuf,
}

impl EncodeArgs {
    pub fn target_order(&self) -> usize {
        self.target_order as usize
    }
}

#[derive(Debug, Args)]
pub struct DeformArgs {
    /// Field file written by `encode`.
    #[arg(long)]
    pub coords: PathBuf,
    #[arg(long)]
    pub deformed: PathBuf,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct WarpArgs {
    #[arg(long)]
    pub rest: PathBuf,
    #[arg(long)]
    pub deformed: PathBuf,
    /// Input PNG; cage coordinates are in its pixel units, with pixel
    /// centers at integer coordinates.
    #[arg(long)]
    pub image: PathBuf,
    /// Grid resolution per axis.
    #[arg(long, default_value_t = 256, value_parser = clap::value_parser!(u16).range(2..=4096))]
    res: u16,
    /// Defaults to the order of the deformed cage, which is elevated if lower.
    #[arg(long, value_parser = clap::value_parser!(u8).range(1..=8), value_name = "N_T")]
    target_order: Option<u8>,
    #[arg(long)]
    pub out: PathBuf,
}

impl WarpArgs {
    pub fn res(&self) -> usize {
        self.res as usize
    }

    pub fn target_order(&self) -> Option<usize> {
        self.target_order.map(usize::from)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Which {
    Phi,
    Psi,
}

#[derive(Debug, Args)]
pub struct FieldArgs {
    #[arg(long)]
    pub cage: PathBuf,
    #[arg(long, value_enum)]
    pub which: Which,
    #[arg(long)]
    pub curve: usize,
    #[arg(long)]
    pub coeff: usize,
    #[arg(long, default_value_t = 256, value_parser = clap::value_parser!(u16).range(2..=4096))]
    res: u16,
    #[arg(long)]
    pub out: PathBuf,
}

impl FieldArgs {
    pub fn res(&self) -> usize {
        self.res as usize
    }
}

#[derive(Debug, Args)]
pub struct CheckArgs {
    #[arg(long)]
    pub cage: PathBuf,
    /// Number of random interior points.
    #[arg(long, default_value_t = 50)]
    pub samples: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Perturbs the alpha table to exercise the failure path.
    #[arg(long, hide = true)]
    pub corrupt_alpha: bool,
}
