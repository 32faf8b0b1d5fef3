//! Oracle checks of a cage: closed forms against adaptive quadrature.

use polygreen::deformer::{build_field, DeformedCage};
use polygreen::engine::{alpha_beta, f_kernel, kernel_len, log_distance_term, CurveCoords};
use polygreen::oracle::{quad_dirichlet, quad_f_kernel, quad_neumann, QuadratureConfig};
use polygreen::{Cage, Curve, Vec2};
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};
use serde::Serialize;

use crate::args::CheckArgs;
use crate::{load, CliError};

pub const KERNEL_TOL: f64 = 1e-8;
pub const TERM_TOL: f64 = 1e-7;
pub const REPRODUCTION_TOL: f64 = 1e-6;

/// `n_t` used when comparing kernels, so `m` runs up to `8 + 2 n_s - 1`.
const KERNEL_TARGET_ORDER: usize = 8;
const TERM_TARGET_ORDER: usize = 3;
/// Sample points keep this fraction of the diameter from the boundary.
const SAMPLE_MARGIN: f64 = 0.05;

/// The configuration that produced a check's largest error.
#[derive(Debug, Clone, Serialize)]
pub struct Offender {
    pub check: &'static str,
    pub seed: u64,
    pub sample: usize,
    pub eta: Vec2,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub curve: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub m: Option<usize>,
    /// Deformed monomial coefficients used for the Dirichlet and Neumann terms.
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub deformed: Vec<Vec2>,
    pub error: f64,
    pub tolerance: f64,
}

#[derive(Debug, Clone)]
pub struct CheckRow {
    pub name: &'static str,
    pub evaluations: usize,
    pub worst: f64,
    pub tolerance: f64,
    pub offender: Option<Offender>,
}

impl CheckRow {
    fn new(name: &'static str, tolerance: f64) -> Self {
        CheckRow {
            name,
            evaluations: 0,
            worst: 0.0,
            tolerance,
            offender: None,
        }
    }

    pub fn passed(&self) -> bool {
        self.worst <= self.tolerance
    }

    fn record(&mut self, error: f64, offender: impl FnOnce() -> Offender) {
        self.evaluations += 1;
        let error = if error.is_nan() { f64::INFINITY } else { error };
        if self.offender.is_none() || error > self.worst {
            self.worst = self.worst.max(error);
            let mut o = offender();
            o.error = error;
            o.tolerance = self.tolerance;
            self.offender = Some(o);
        }
    }
}

/// Test hooks for the suite itself.
#[derive(Debug, Clone, Copy, Default)]
pub struct Faults {
    pub corrupt_alpha: bool,
}

fn sample_points(cage: &Cage, rng: &mut StdRng, count: usize) -> Result<Vec<Vec2>, CliError> {
    let bb = cage.bounding_box();
    let diam = cage.diameter();
    let mut pts = Vec::with_capacity(count);
    let mut attempts = 0usize;
    while pts.len() < count {
        attempts += 1;
        if attempts > 1000 * count.max(1) {
            return Err(CliError::Invalid(format!(
                "could not find {count} points at least {SAMPLE_MARGIN} diameters inside the cage"
            )));
        }
        let p = Vec2::new(
            rng.gen_range(bb.min.x..=bb.max.x),
            rng.gen_range(bb.min.y..=bb.max.y),
        );
        let (inside, d) = cage.locate(p);
        if inside && d > SAMPLE_MARGIN * diam {
            pts.push(p);
        }
    }
    Ok(pts)
}

fn term_error(got: Vec2, want: Vec2, floor: f64) -> f64 {
    (got - want).norm() / want.norm().max(floor)
}

/// Per-curve coordinates through the public assembly path, optionally
/// with a corrupted alpha table.
fn curve_coords(curve: &Curve, eta: Vec2, faults: Faults, scale: f64) -> Option<CurveCoords> {
    let mut ab = alpha_beta(curve, eta);
    if faults.corrupt_alpha {
        ab.alpha[0] += 0.1 * scale * scale;
    }
    let kernel = f_kernel(curve, eta, kernel_len(curve.order(), TERM_TARGET_ORDER) - 1).ok()?;
    let delta = log_distance_term(curve, eta).ok()?;
    CurveCoords::assemble(&ab, &kernel, delta, TERM_TARGET_ORDER).ok()
}

/// Runs the kernel, Dirichlet, Neumann and reproduction checks at
/// `samples` seeded interior points.
pub fn run_suite(
    cage: &Cage,
    samples: usize,
    seed: u64,
    faults: Faults,
) -> Result<Vec<CheckRow>, CliError> {
    let cfg = QuadratureConfig::default();
    let mut rng = StdRng::seed_from_u64(seed);
    let diam = cage.diameter();
    let pts = sample_points(cage, &mut rng, samples)?;
    let mut kernel = CheckRow::new("kernel", KERNEL_TOL);
    let mut dirichlet = CheckRow::new("dirichlet", TERM_TOL);
    let mut neumann = CheckRow::new("neumann", TERM_TOL);
    let mut reproduction = CheckRow::new("reproduction", REPRODUCTION_TOL);
    let offender = |check, sample, eta, curve, m, deformed: &[Vec2]| Offender {
        check,
        seed,
        sample,
        eta,
        curve,
        m,
        deformed: deformed.to_vec(),
        error: 0.0,
        tolerance: 0.0,
    };
    for (s, &eta) in pts.iter().enumerate() {
        for (k, curve) in cage.curves().iter().enumerate() {
            let m_max = kernel_len(curve.order(), KERNEL_TARGET_ORDER) - 1;
            let f = f_kernel(curve, eta, m_max).ok();
            for m in 0..=m_max {
                let want = quad_f_kernel(curve, eta, m, &cfg)
                    .map_err(|e| CliError::Invalid(e.to_string()))?
                    .value;
                let err = f
                    .as_ref()
                    .map_or(f64::INFINITY, |f| (f[m] - want).abs() / want.abs());
                kernel.record(err, || offender("kernel", s, eta, Some(k), Some(m), &[]));
            }

            let bar: Vec<Vec2> = (0..=TERM_TARGET_ORDER)
                .map(|_| Vec2::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)) * diam)
                .collect();
            let cc = curve_coords(curve, eta, faults, diam);
            let floor = 1e-3 * diam;
            let want = quad_dirichlet(curve, &bar, eta, &cfg)
                .map_err(|e| CliError::Invalid(e.to_string()))?
                .value;
            let err = cc.as_ref().map_or(f64::INFINITY, |cc| {
                let got: Vec2 = cc.phi.iter().zip(&bar).map(|(p, b)| *b * *p).sum();
                term_error(got, want, floor)
            });
            dirichlet.record(err, || offender("dirichlet", s, eta, Some(k), None, &bar));
            let want = quad_neumann(curve, &bar, eta, &cfg)
                .map_err(|e| CliError::Invalid(e.to_string()))?
                .value;
            let err = cc.as_ref().map_or(f64::INFINITY, |cc| {
                let got: Vec2 = cc.psi.iter().zip(&bar).map(|(p, b)| b.perp() * *p).sum();
                term_error(got, want, floor)
            });
            neumann.record(err, || offender("neumann", s, eta, Some(k), None, &bar));
        }
    }
    let n_t = cage.max_order();
    let rest = DeformedCage::from_rest(cage, n_t).map_err(|e| CliError::Invalid(e.to_string()))?;
    let moved = build_field(cage, &pts, n_t)
        .and_then(|f| f.deform(&rest))
        .map_err(|e| CliError::Invalid(e.to_string()))?;
    for (s, (a, b)) in moved.iter().zip(&pts).enumerate() {
        reproduction.record((*a - *b).norm() / diam, || {
            offender("reproduction", s, *b, None, None, &[])
        });
    }
    Ok(vec![kernel, dirichlet, neumann, reproduction])
}

pub fn format_table(rows: &[CheckRow]) -> String {
    let mut out = format!(
        "{:<14}{:>12}{:>16}{:>12}  result\n",
        "check", "evaluations", "max rel error", "tolerance"
    );
    for r in rows {
        out.push_str(&format!(
            "{:<14}{:>12}{:>16.3e}{:>12.0e}  {}\n",
            r.name,
            r.evaluations,
            r.worst,
            r.tolerance,
            if r.passed() { "pass" } else { "FAIL" }
        ));
    }
    out
}

pub fn run(a: &CheckArgs) -> Result<(), CliError> {
    let cage = load::rest_cage(&a.cage)?;
    let faults = Faults {
        corrupt_alpha: a.corrupt_alpha,
    };
    let rows = run_suite(&cage, a.samples, a.seed, faults)?;
    print!("{}", format_table(&rows));
    let failed: Vec<&CheckRow> = rows.iter().filter(|r| !r.passed()).collect();
    if failed.is_empty() {
        return Ok(());
    }
    let worst = failed
        .iter()
        .filter_map(|r| r.offender.as_ref())
        .max_by(|a, b| (a.error / a.tolerance).total_cmp(&(b.error / b.tolerance)));
    if let Some(o) = worst {
        eprintln!(
            "worst offending configuration (replay with --cage {} --samples {} --seed {}):",
            a.cage.display(),
            a.samples,
            a.seed
        );
        eprintln!("{}", serde_json::to_string(o).unwrap_or_default());
    }
    Err(CliError::CheckFailed {
        failed: failed.len(),
    })
}
