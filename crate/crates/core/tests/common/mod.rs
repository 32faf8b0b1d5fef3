#![allow(dead_code)]

use std::f64::consts::TAU;

use polygreen::deformer::DeformedCage;
use polygreen::{Cage, Curve, Vec2};
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

pub fn rng(seed: u64) -> StdRng {
    StdRng::seed_from_u64(seed)
}

pub fn v(x: f64, y: f64) -> Vec2 {
    Vec2::new(x, y)
}

/// Random Bezier curve with control points in the unit box.
pub fn random_curve(rng: &mut StdRng, order: usize) -> Curve {
    loop {
        let pts: Vec<Vec2> = (0..=order)
            .map(|_| v(rng.gen_range(0.0..1.0), rng.gen_range(0.0..1.0)))
            .collect();
        if let Ok(c) = Curve::from_bezier(&pts) {
            return c;
        }
    }
}

/// Diameter of a single curve from its samples.
pub fn curve_diameter(curve: &Curve) -> f64 {
    let s = curve.sample(64);
    let mut d: f64 = 0.0;
    for a in &s {
        for b in &s {
            d = d.max(a.distance(*b));
        }
    }
    d
}

/// A point at least `margin * diameter` away from the curve, in a box
/// around it.
pub fn point_off_curve(rng: &mut StdRng, curve: &Curve, margin: f64) -> Vec2 {
    let d = curve_diameter(curve);
    loop {
        let p = v(rng.gen_range(-0.5..1.5), rng.gen_range(-0.5..1.5));
        if curve.distance_to(p) > margin * d {
            return p;
        }
    }
}

/// The cage scaled about its bounding-box center to unit diameter.
pub fn unit_diameter(cage: &Cage) -> Cage {
    let bb = cage.bounding_box();
    let center = (bb.min + bb.max) * 0.5;
    let s = 1.0 / cage.diameter();
    cage.map_affine(|p| p * s, center * -s)
}

/// Star-shaped valid cage with `curves` curves of random orders in
/// `1..=max_order`, unit diameter.
pub fn random_cage(rng: &mut StdRng, curves: usize, max_order: usize) -> Cage {
    loop {
        let verts: Vec<Vec2> = (0..curves)
            .map(|i| {
                let a = TAU * (i as f64 + rng.gen_range(-0.3..0.3)) / curves as f64;
                let r = rng.gen_range(0.7..1.0);
                v(r * a.cos(), r * a.sin())
            })
            .collect();
        let built: Vec<Curve> = (0..curves)
            .map(|i| {
                let (a, b) = (verts[i], verts[(i + 1) % curves]);
                let order = rng.gen_range(1..=max_order);
                let chord = b - a;
                let mut ctrl = vec![a];
                for j in 1..order {
                    let t = j as f64 / order as f64;
                    let bulge = rng.gen_range(-0.25..0.25);
                    let slide = rng.gen_range(-0.1..0.1);
                    ctrl.push(a.lerp(b, t) + chord.perp() * bulge + chord * slide);
                }
                ctrl.push(b);
                Curve::from_bezier(&ctrl).unwrap()
            })
            .collect();
        let cage = Cage::new(built);
        if cage.validate().is_valid() {
            return unit_diameter(&cage);
        }
    }
}

/// Random interior point at least `margin * diameter` from the boundary.
pub fn interior_point(rng: &mut StdRng, cage: &Cage, margin: f64) -> Vec2 {
    let bb = cage.bounding_box();
    let d = cage.diameter();
    loop {
        let p = v(
            rng.gen_range(bb.min.x..bb.max.x),
            rng.gen_range(bb.min.y..bb.max.y),
        );
        let (inside, dist) = cage.locate(p);
        if inside && dist > margin * d {
            return p;
        }
    }
}

/// The rest cage at order `n_t` with every control point moved by up to
/// `amount` in each coordinate; joints move together.
pub fn perturbed(rng: &mut StdRng, cage: &Cage, target_order: usize, amount: f64) -> DeformedCage {
    let mut ctrl = DeformedCage::from_rest(cage, target_order)
        .unwrap()
        .to_bezier();
    let n = ctrl.len();
    for c in ctrl.iter_mut() {
        let last = c.len() - 1;
        for p in c[..last].iter_mut() {
            *p += v(
                rng.gen_range(-amount..amount),
                rng.gen_range(-amount..amount),
            );
        }
    }
    for i in 0..n {
        let start = ctrl[(i + 1) % n][0];
        *ctrl[i].last_mut().unwrap() = start;
    }
    DeformedCage::from_bezier(&ctrl).unwrap()
}
