//! Rasterization of warped grids and coordinate heatmaps.
//!
//! Image space matches cage space: pixel `(x, y)` has its center at the
//! point `(x, y)`.

use image::{Rgba, RgbaImage};
use polygreen::Vec2;

use crate::FieldSamples;

/// Bilinear lookup at a continuous position, clamped to the image.
pub fn sample_bilinear(img: &RgbaImage, p: Vec2) -> [f64; 4] {
    let (w, h) = img.dimensions();
    let x = p.x.clamp(0.0, (w - 1) as f64);
    let y = p.y.clamp(0.0, (h - 1) as f64);
    let x0 = x.floor() as u32;
    let y0 = y.floor() as u32;
    let x1 = (x0 + 1).min(w - 1);
    let y1 = (y0 + 1).min(h - 1);
    let fx = x - x0 as f64;
    let fy = y - y0 as f64;
    let px = |x, y| img.get_pixel(x, y).0.map(f64::from);
    let (a, b, c, d) = (px(x0, y0), px(x1, y0), px(x0, y1), px(x1, y1));
    std::array::from_fn(|k| {
        let top = a[k] + (b[k] - a[k]) * fx;
        let bottom = c[k] + (d[k] - c[k]) * fx;
        top + (bottom - top) * fy
    })
}

fn to_pixel(c: [f64; 4]) -> Rgba<u8> {
    Rgba(c.map(|v| v.round().clamp(0.0, 255.0) as u8))
}

/// Draws every triangle at its deformed position, texturing it from
/// `src` at the rest position given by the barycentric coordinates of
/// each covered pixel center. Uncovered pixels stay transparent.
pub fn warp_image(
    src: &RgbaImage,
    rest: &[Vec2],
    deformed: &[Vec2],
    triangles: &[[usize; 3]],
) -> RgbaImage {
    const EDGE_EPS: f64 = 1e-9;
    let (w, h) = src.dimensions();
    let mut out = RgbaImage::new(w, h);
    for tri in triangles {
        let [d0, d1, d2] = tri.map(|k| deformed[k]);
        let [r0, r1, r2] = tri.map(|k| rest[k]);
        let area = (d1 - d0).cross(d2 - d0);
        if area.abs() < 1e-12 || !area.is_finite() {
            continue;
        }
        let lo = d0.min(d1).min(d2);
        let hi = d0.max(d1).max(d2);
        let x_start = lo.x.ceil().max(0.0);
        let y_start = lo.y.ceil().max(0.0);
        let x_end = hi.x.floor().min(w as f64 - 1.0);
        let y_end = hi.y.floor().min(h as f64 - 1.0);
        if x_start > x_end || y_start > y_end {
            continue;
        }
        for y in y_start as u32..=y_end as u32 {
            for x in x_start as u32..=x_end as u32 {
                let p = Vec2::new(x as f64, y as f64);
                let l0 = (d1 - p).cross(d2 - p) / area;
                let l1 = (d2 - p).cross(d0 - p) / area;
                let l2 = 1.0 - l0 - l1;
                if l0 < -EDGE_EPS || l1 < -EDGE_EPS || l2 < -EDGE_EPS {
                    continue;
                }
                let q = r0 * l0 + r1 * l1 + r2 * l2;
                out.put_pixel(x, y, to_pixel(sample_bilinear(src, q)));
            }
        }
    }
    out
}

const NEGATIVE: [f64; 3] = [59.0, 76.0, 192.0];
const POSITIVE: [f64; 3] = [180.0, 4.0, 38.0];
const ZERO: [f64; 3] = [255.0, 255.0, 255.0];

/// Diverging colormap: `t` in `[-1, 1]`, white at zero.
pub fn signed_color(t: f64) -> Rgba<u8> {
    let t = t.clamp(-1.0, 1.0);
    let end = if t < 0.0 { NEGATIVE } else { POSITIVE };
    let a = t.abs();
    let rgb: [f64; 3] = std::array::from_fn(|k| ZERO[k] + (end[k] - ZERO[k]) * a);
    to_pixel([rgb[0], rgb[1], rgb[2], 255.0])
}

/// `res x res` heatmap, symmetric about zero; points outside the cage are
/// transparent.
pub fn heatmap(samples: &FieldSamples) -> RgbaImage {
    let res = samples.res as u32;
    let mut img = RgbaImage::new(res, res);
    let scale = samples.values.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    for ([i, j], v) in samples.cells.iter().zip(&samples.values) {
        let t = if scale > 0.0 { v / scale } else { 0.0 };
        img.put_pixel(*i as u32, *j as u32, signed_color(t));
    }
    img
}
