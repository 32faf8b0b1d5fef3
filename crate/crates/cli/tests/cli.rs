use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use image::{Rgba, RgbaImage};
use polygreen::deformer::{read_field, DeformedCage};
use polygreen::io::{cage_to_json, parse_cage, parse_points, Basis};
use polygreen::{Cage, Vec2};
use polygreen_cli::args::Which;
use polygreen_cli::sample_field;
use tempfile::TempDir;

fn fixture(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("../core/fixtures")
        .join(format!("{name}.json"))
}

fn polygreen(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_polygreen"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn write(dir: &TempDir, name: &str, text: &str) -> PathBuf {
    let p = dir.path().join(name);
    std::fs::write(&p, text).unwrap();
    p
}

fn square_cage(lo: f64, hi: f64) -> Cage {
    Cage::polygon(&[
        Vec2::new(lo, lo),
        Vec2::new(hi, lo),
        Vec2::new(hi, hi),
        Vec2::new(lo, hi),
    ])
    .unwrap()
}

fn bezier_json(ctrl: &[Vec<Vec2>]) -> String {
    let curves: Vec<_> = ctrl
        .iter()
        .map(|c| serde_json::json!({ "basis": "bezier", "points": c }))
        .collect();
    serde_json::json!({ "curves": curves }).to_string()
}

fn shifted(cage: &Cage, d: Vec2) -> String {
    cage_to_json(&cage.map_affine(|p| p, d), Basis::Bezier)
}

fn field_header(path: &Path) -> (u32, u32) {
    let bytes = std::fs::read(path).unwrap();
    assert_eq!(&bytes[..4], b"PGC1");
    let n_points = u32::from_le_bytes(bytes[4..8].try_into().unwrap());
    let n_curves = u32::from_le_bytes(bytes[8..12].try_into().unwrap());
    (n_points, n_curves)
}

#[test]
fn encode_writes_one_point_field() {
    let dir = TempDir::new().unwrap();
    let pts = write(&dir, "pts.json", "[[0.5, 0.5]]");
    let out = dir.path().join("f.pgc");
    let o = polygreen(&[
        "encode",
        "--cage",
        s(&fixture("square")),
        "--points",
        s(&pts),
        "--target-order",
        "2",
        "--out",
        s(&out),
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    assert_eq!(field_header(&out), (1, 4));
}

#[test]
fn encode_excludes_outside_points_with_warning() {
    let dir = TempDir::new().unwrap();
    let pts = write(&dir, "pts.json", "[[2, 2], [0.5, 0.5], [0.25, 0.75]]");
    let out = dir.path().join("f.pgc");
    let o = polygreen(&[
        "encode",
        "--cage",
        s(&fixture("square")),
        "--points",
        s(&pts),
        "--target-order",
        "1",
        "--out",
        s(&out),
    ]);
    assert_eq!(o.status.code(), Some(0));
    let err = stderr(&o);
    assert!(err.contains("warning") && err.contains("[0]"), "{err}");
    let field = read_field(std::fs::File::open(&out).unwrap()).unwrap();
    assert_eq!(
        field.points(),
        &[Vec2::new(0.5, 0.5), Vec2::new(0.25, 0.75)]
    );
}

#[test]
fn encode_is_deterministic() {
    let dir = TempDir::new().unwrap();
    let pts = write(&dir, "pts.json", "[[0.5, 0.55], [0.4, 0.5], [0.6, 0.45]]");
    let mut files = Vec::new();
    for name in ["a.pgc", "b.pgc"] {
        let out = dir.path().join(name);
        let o = polygreen(&[
            "encode",
            "--cage",
            s(&fixture("quadratic")),
            "--points",
            s(&pts),
            "--target-order",
            "3",
            "--out",
            s(&out),
        ]);
        assert!(o.status.success(), "{}", stderr(&o));
        files.push(std::fs::read(out).unwrap());
    }
    assert_eq!(files[0], files[1]);
}

#[test]
fn invalid_cages_exit_2_with_report() {
    let dir = TempDir::new().unwrap();
    let pts = write(&dir, "pts.json", "[[0.5, 0.5]]");
    let out = dir.path().join("f.pgc");
    let mut ctrl: Vec<Vec<Vec2>> = square_cage(0.0, 1.0)
        .curves()
        .iter()
        .map(|c| c.to_bezier())
        .collect();
    ctrl[1][0].x += 1e-3;
    let open = write(&dir, "open.json", &bezier_json(&ctrl));
    let o = polygreen(&[
        "encode",
        "--cage",
        s(&open),
        "--points",
        s(&pts),
        "--target-order",
        "1",
        "--out",
        s(&out),
    ]);
    assert_eq!(o.status.code(), Some(2));
    let err = stderr(&o);
    assert!(
        err.contains("closure gap") && err.contains("\"kind\": \"closure_gap\""),
        "{err}"
    );
    assert!(!out.exists());

    ctrl[1][0].x -= 1e-3 - 4e-7;
    let nearly = write(&dir, "nearly.json", &bezier_json(&ctrl));
    let o = polygreen(&[
        "encode",
        "--cage",
        s(&nearly),
        "--points",
        s(&pts),
        "--target-order",
        "1",
        "--out",
        s(&out),
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    assert!(stderr(&o).contains("warning"));

    let bad = write(&dir, "bad.json", "{ \"curves\": 3 }");
    let o = polygreen(&[
        "encode",
        "--cage",
        s(&bad),
        "--points",
        s(&pts),
        "--target-order",
        "1",
        "--out",
        s(&out),
    ]);
    assert_eq!(o.status.code(), Some(2));
    let o = polygreen(&[
        "encode",
        "--cage",
        s(&fixture("square")),
        "--points",
        s(&pts),
        "--target-order",
        "9",
        "--out",
        s(&out),
    ]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn missing_files_exit_3() {
    let dir = TempDir::new().unwrap();
    let pts = write(&dir, "pts.json", "[[0.5, 0.5]]");
    let o = polygreen(&[
        "encode",
        "--cage",
        "/nonexistent/cage.json",
        "--points",
        s(&pts),
        "--target-order",
        "1",
        "--out",
        s(&dir.path().join("f")),
    ]);
    assert_eq!(o.status.code(), Some(3));
    let o = polygreen(&[
        "encode",
        "--cage",
        s(&fixture("square")),
        "--points",
        s(&pts),
        "--target-order",
        "1",
        "--out",
        "/nonexistent/dir/f.pgc",
    ]);
    assert_eq!(o.status.code(), Some(3));
}

fn encode_points(dir: &TempDir, cage: &Path, pts: &str, n_t: usize) -> PathBuf {
    let pts = write(dir, "pts.json", pts);
    let out = dir.path().join("f.pgc");
    let o = polygreen(&[
        "encode",
        "--cage",
        s(cage),
        "--points",
        s(&pts),
        "--target-order",
        &n_t.to_string(),
        "--out",
        s(&out),
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    out
}

#[test]
fn deform_reproduces_and_translates() {
    let dir = TempDir::new().unwrap();
    let pts = vec![
        Vec2::new(0.45, 0.5),
        Vec2::new(0.3, 0.35),
        Vec2::new(0.7, 0.6),
    ];
    let cage_path = fixture("quadratic");
    let cage = parse_cage(&std::fs::read_to_string(&cage_path).unwrap()).unwrap();
    let field = encode_points(&dir, &cage_path, &serde_json::to_string(&pts).unwrap(), 2);
    let out = dir.path().join("out.json");

    let o = polygreen(&[
        "deform",
        "--coords",
        s(&field),
        "--deformed",
        s(&cage_path),
        "--out",
        s(&out),
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    let got = parse_points(&std::fs::read_to_string(&out).unwrap()).unwrap();
    assert_eq!(got.len(), pts.len());
    for (a, b) in got.iter().zip(&pts) {
        assert!((*a - *b).norm() < 1e-6);
    }

    let d = Vec2::new(0.25, -1.5);
    let moved = write(&dir, "moved.json", &shifted(&cage, d));
    let o = polygreen(&[
        "deform",
        "--coords",
        s(&field),
        "--deformed",
        s(&moved),
        "--out",
        s(&out),
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    let got = parse_points(&std::fs::read_to_string(&out).unwrap()).unwrap();
    for (a, b) in got.iter().zip(&pts) {
        assert!((*a - (*b + d)).norm() < 1e-6);
    }
}

#[test]
fn deform_order_mismatch_names_expected_order() {
    let dir = TempDir::new().unwrap();
    let field = encode_points(&dir, &fixture("square"), "[[0.5, 0.5]]", 1);
    let elevated = DeformedCage::from_rest(&square_cage(0.0, 1.0), 2).unwrap();
    let deformed = write(&dir, "d.json", &bezier_json(&elevated.to_bezier()));
    let out = dir.path().join("out.json");
    let o = polygreen(&[
        "deform",
        "--coords",
        s(&field),
        "--deformed",
        s(&deformed),
        "--out",
        s(&out),
    ]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("n_t = 1"), "{}", stderr(&o));

    let garbage = write(&dir, "g.pgc", "not a field");
    let o = polygreen(&[
        "deform",
        "--coords",
        s(&garbage),
        "--deformed",
        s(&fixture("square")),
        "--out",
        s(&out),
    ]);
    assert_eq!(o.status.code(), Some(2));
}

fn texture(w: u32, h: u32) -> RgbaImage {
    RgbaImage::from_fn(w, h, |x, y| {
        let (fx, fy) = (x as f64, y as f64);
        Rgba([
            (128.0 + 100.0 * (fx / 7.0).sin()) as u8,
            (128.0 + 100.0 * (fy / 9.0).cos()) as u8,
            ((x + 2 * y) % 256) as u8,
            255,
        ])
    })
}

/// PSNR over the pixels the warp covered, comparing `out(x + dx, y + dy)`
/// with `input(x, y)`.
fn covered_psnr(input: &RgbaImage, out: &RgbaImage, dx: i64, dy: i64) -> (f64, usize) {
    let mut se = 0.0;
    let mut n = 0usize;
    for (x, y, p) in input.enumerate_pixels() {
        let (ox, oy) = (x as i64 + dx, y as i64 + dy);
        if ox < 0 || oy < 0 || ox >= out.width() as i64 || oy >= out.height() as i64 {
            continue;
        }
        let q = out.get_pixel(ox as u32, oy as u32);
        if q[3] == 0 {
            continue;
        }
        for k in 0..3 {
            let d = p[k] as f64 - q[k] as f64;
            se += d * d;
        }
        n += 3;
    }
    let mse = se / n.max(1) as f64;
    let psnr = if mse == 0.0 {
        f64::INFINITY
    } else {
        10.0 * (255.0f64.powi(2) / mse).log10()
    };
    (psnr, n / 3)
}

fn run_warp(
    dir: &TempDir,
    rest: &Path,
    deformed: &Path,
    image: &Path,
    res: usize,
    order: usize,
) -> RgbaImage {
    let out = dir.path().join("warped.png");
    let o = polygreen(&[
        "warp",
        "--rest",
        s(rest),
        "--deformed",
        s(deformed),
        "--image",
        s(image),
        "--res",
        &res.to_string(),
        "--target-order",
        &order.to_string(),
        "--out",
        s(&out),
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    image::open(out).unwrap().to_rgba8()
}

#[test]
fn identity_warp_preserves_the_image() {
    let dir = TempDir::new().unwrap();
    let input = texture(160, 160);
    let img = dir.path().join("in.png");
    input.save(&img).unwrap();
    let cage = write(
        &dir,
        "cage.json",
        &cage_to_json(&square_cage(16.0, 144.0), Basis::Bezier),
    );
    let out = run_warp(&dir, &cage, &cage, &img, 256, 2);
    let (psnr, covered) = covered_psnr(&input, &out, 0, 0);
    assert!(psnr > 40.0, "{psnr}");
    assert!(covered > 120 * 120, "{covered}");
    assert_eq!(out.get_pixel(5, 5)[3], 0);
}

#[test]
fn translated_warp_shifts_the_image() {
    let dir = TempDir::new().unwrap();
    let input = texture(160, 160);
    let img = dir.path().join("in.png");
    input.save(&img).unwrap();
    let rest = square_cage(16.0, 120.0);
    let cage = write(&dir, "cage.json", &cage_to_json(&rest, Basis::Bezier));
    let moved = write(&dir, "moved.json", &shifted(&rest, Vec2::new(7.0, 4.0)));
    let out = run_warp(&dir, &cage, &moved, &img, 256, 1);
    let (psnr, covered) = covered_psnr(&input, &out, 7, 4);
    assert!(psnr > 40.0, "{psnr}");
    assert!(covered > 90 * 90, "{covered}");
}

#[test]
fn fixtures_warp_without_nan() {
    let dir = TempDir::new().unwrap();
    let img = dir.path().join("in.png");
    texture(140, 140).save(&img).unwrap();
    for name in ["square", "quadratic", "bent_cubic"] {
        let cage = parse_cage(&std::fs::read_to_string(fixture(name)).unwrap()).unwrap();
        let bb = cage.bounding_box();
        let k = 120.0 / bb.size().x.max(bb.size().y);
        let placed = cage.map_affine(|p| p * k, Vec2::new(10.0, 10.0) - bb.min * k);
        let rest = write(&dir, "rest.json", &cage_to_json(&placed, Basis::Bezier));
        let mut ctrl = DeformedCage::from_rest(&placed, 3).unwrap().to_bezier();
        for c in ctrl.iter_mut() {
            c[1] += Vec2::new(3.0, -2.0);
        }
        let deformed = write(&dir, "deformed.json", &bezier_json(&ctrl));
        let out = run_warp(&dir, &rest, &deformed, &img, 64, 3);
        assert!(out.pixels().any(|p| p[3] > 0), "{name}");
    }
}

#[test]
fn unreadable_image_exits_3() {
    let dir = TempDir::new().unwrap();
    let img = write(&dir, "in.png", "not a png");
    let out = dir.path().join("o.png");
    let sq = fixture("square");
    let o = polygreen(&[
        "warp",
        "--rest",
        s(&sq),
        "--deformed",
        s(&sq),
        "--image",
        s(&img),
        "--res",
        "8",
        "--out",
        s(&out),
    ]);
    assert_eq!(o.status.code(), Some(3));
    let o = polygreen(&[
        "warp",
        "--rest",
        s(&sq),
        "--deformed",
        s(&sq),
        "--image",
        s(&img),
        "--res",
        "1",
        "--out",
        s(&out),
    ]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn psi_zero_field_is_blank() {
    let dir = TempDir::new().unwrap();
    let out = dir.path().join("psi.png");
    let o = polygreen(&[
        "field",
        "--cage",
        s(&fixture("quadratic")),
        "--which",
        "psi",
        "--curve",
        "1",
        "--coeff",
        "0",
        "--res",
        "48",
        "--out",
        s(&out),
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    assert!(
        stdout(&o).contains("min 0.000000e0 max 0.000000e0"),
        "{}",
        stdout(&o)
    );
    let img = image::open(out).unwrap().to_rgba8();
    assert!(img.pixels().any(|p| p[3] == 255));
    assert!(img
        .pixels()
        .all(|p| p[3] == 0 || p.0 == [255, 255, 255, 255]));
}

#[test]
fn field_prints_range_and_rejects_bad_indices() {
    let dir = TempDir::new().unwrap();
    let out = dir.path().join("phi.png");
    let cage = fixture("quadratic");
    let o = polygreen(&[
        "field",
        "--cage",
        s(&cage),
        "--which",
        "phi",
        "--curve",
        "0",
        "--coeff",
        "1",
        "--res",
        "32",
        "--out",
        s(&out),
    ]);
    assert!(o.status.success());
    let line = stdout(&o);
    let nums: Vec<f64> = line
        .split_whitespace()
        .filter_map(|t| t.parse().ok())
        .collect();
    assert_eq!(nums.len(), 2);
    assert!(nums[0] < nums[1]);
    for (curve, coeff) in [("4", "0"), ("0", "9")] {
        let o = polygreen(&[
            "field",
            "--cage",
            s(&cage),
            "--which",
            "phi",
            "--curve",
            curve,
            "--coeff",
            coeff,
            "--res",
            "16",
            "--out",
            s(&out),
        ]);
        assert_eq!(o.status.code(), Some(2));
    }
}

#[test]
fn sampled_fields_reconstruct_the_identity() {
    let cage = parse_cage(&std::fs::read_to_string(fixture("quadratic")).unwrap()).unwrap();
    let n_t = cage.max_order();
    let rest = DeformedCage::from_rest(&cage, n_t).unwrap();
    let res = 24;
    let base = sample_field(&cage, Which::Phi, 0, 0, res).unwrap();
    let count = base.points.len().min(100);
    assert_eq!(count, 100);
    let mut sum = vec![Vec2::ZERO; count];
    for k in 0..cage.len() {
        for m in 0..=n_t {
            let c = rest.curve(k)[m];
            let phi = sample_field(&cage, Which::Phi, k, m, res).unwrap();
            let psi = sample_field(&cage, Which::Psi, k, m, res).unwrap();
            for (i, s) in sum.iter_mut().enumerate() {
                *s += c * phi.values[i] + c.perp() * psi.values[i];
            }
        }
    }
    for (got, want) in sum.iter().zip(&base.points) {
        assert!((*got - *want).norm() < 1e-6);
    }
}

#[test]
fn sampled_fields_are_smooth_away_from_the_curve() {
    let cage = parse_cage(&std::fs::read_to_string(fixture("quadratic")).unwrap()).unwrap();
    let res = 64;
    let samples = sample_field(&cage, Which::Phi, 0, 1, res).unwrap();
    let (lo, hi) = samples.range();
    let diam = cage.diameter();
    let h = cage.bounding_box().size().x / (res - 1) as f64;
    let index: std::collections::HashMap<[usize; 2], usize> = samples
        .cells
        .iter()
        .enumerate()
        .map(|(n, c)| (*c, n))
        .collect();
    let mut worst: f64 = 0.0;
    for (n, &[i, j]) in samples.cells.iter().enumerate() {
        let Some(&e) = index.get(&[i + 1, j]) else {
            continue;
        };
        if cage.curves()[0].distance_to(samples.points[n]) < 0.1 * diam {
            continue;
        }
        worst = worst.max((samples.values[e] - samples.values[n]).abs() / h);
    }
    assert!(worst.is_finite() && worst > 0.0);
    assert!(worst < 20.0 * (hi - lo) / diam, "{worst}");
}

#[test]
fn check_passes_on_bundled_cage_and_is_reproducible() {
    let cage = fixture("quadratic");
    let a = polygreen(&[
        "check",
        "--cage",
        s(&cage),
        "--samples",
        "50",
        "--seed",
        "7",
    ]);
    assert_eq!(a.status.code(), Some(0), "{}{}", stdout(&a), stderr(&a));
    let table = stdout(&a);
    for name in ["kernel", "dirichlet", "neumann", "reproduction"] {
        assert!(table.contains(name), "{table}");
    }
    assert!(!table.contains("FAIL"));
    let b = polygreen(&[
        "check",
        "--cage",
        s(&cage),
        "--samples",
        "50",
        "--seed",
        "7",
    ]);
    assert_eq!(a.stdout, b.stdout);
}

#[test]
fn corrupted_alpha_fails_the_check() {
    let cage = fixture("quadratic");
    let o = polygreen(&[
        "check",
        "--cage",
        s(&cage),
        "--samples",
        "5",
        "--seed",
        "1",
        "--corrupt-alpha",
    ]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stdout(&o).contains("FAIL"));
    let err = stderr(&o);
    assert!(
        err.contains("\"check\":\"dirichlet\"") && err.contains("\"seed\":1"),
        "{err}"
    );
}
