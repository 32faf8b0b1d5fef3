use num_complex::Complex64;
use serde::Serialize;

use super::{EngineError, Tolerances};
use crate::geometry::{Curve, Vec2};

pub type ComplexScalar = Complex64;

/// How a root of `c(t) = eta` (over the complex numbers) enters the residue sum.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum RootClass {
    /// Simple root off the real axis: a conjugate pair of simple poles.
    General,
    /// Simple real root outside `[0, 1]`: the pair collapses into a double pole.
    Real,
    /// A cluster of coincident roots: a conjugate pair of higher-order poles
    /// (or, on the real axis, one pole of twice the multiplicity).
    Repeated,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Root {
    pub omega: ComplexScalar,
    pub multiplicity: usize,
    pub class: RootClass,
}

impl Root {
    /// Order of the pole of `1 / |c(t) - eta|^2` at `omega`.
    pub fn pole_order(&self) -> usize {
        if self.is_real() {
            2 * self.multiplicity
        } else {
            self.multiplicity
        }
    }

    pub fn is_real(&self) -> bool {
        self.omega.im == 0.0
    }
}

/// The roots of `sum_k t^k c_k = eta` for one (curve, point) pair, grouped
/// into clusters, plus the normalization `A = 2 pi |c_n|^2` such that
/// `2 pi |eta - c(t)|^2 = A prod (t - w_i)(t - conj w_i)`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RootSet {
    roots: Vec<Root>,
    normalization: f64,
}

impl RootSet {
    /// Groups raw roots and classifies them. Roots closer than
    /// `tol.cluster` merge into one cluster at their mean.
    pub fn from_roots(
        raw: &[ComplexScalar],
        normalization: f64,
        tol: &Tolerances,
    ) -> Result<Self, EngineError> {
        if raw.iter().any(|z| !(z.re.is_finite() && z.im.is_finite())) {
            return Err(EngineError::NonFinite);
        }
        if !(normalization > 0.0 && normalization.is_finite()) {
            return Err(EngineError::InvalidArgument(format!(
                "normalization must be positive, got {normalization}"
            )));
        }
        let mut sorted = raw.to_vec();
        sorted.sort_by(|a, b| a.re.total_cmp(&b.re).then(a.im.total_cmp(&b.im)));

        // single linkage clustering
        let n = sorted.len();
        let mut label: Vec<usize> = (0..n).collect();
        for i in 0..n {
            for j in i + 1..n {
                if (sorted[i] - sorted[j]).norm() < tol.cluster {
                    let (li, lj) = (label[i], label[j]);
                    for l in label.iter_mut() {
                        if *l == lj {
                            *l = li;
                        }
                    }
                }
            }
        }
        let mut roots = Vec::new();
        let mut seen = Vec::new();
        for i in 0..n {
            if seen.contains(&label[i]) {
                continue;
            }
            seen.push(label[i]);
            let members: Vec<ComplexScalar> = (0..n)
                .filter(|&j| label[j] == label[i])
                .map(|j| sorted[j])
                .collect();
            let multiplicity = members.len();
            let mut omega = members.iter().sum::<ComplexScalar>() / multiplicity as f64;
            let real = omega.im.abs() < tol.real_class;
            if real {
                omega.im = 0.0;
            }
            let class = if multiplicity > 1 {
                RootClass::Repeated
            } else if real {
                RootClass::Real
            } else {
                RootClass::General
            };
            roots.push(Root {
                omega,
                multiplicity,
                class,
            });
        }
        Ok(RootSet {
            roots,
            normalization,
        })
    }

    pub fn roots(&self) -> &[Root] {
        &self.roots
    }

    pub fn len(&self) -> usize {
        self.roots.len()
    }

    pub fn is_empty(&self) -> bool {
        self.roots.is_empty()
    }

    /// `A = 2 pi |c_n|^2`.
    pub fn normalization(&self) -> f64 {
        self.normalization
    }

    /// Sum of multiplicities, i.e. the curve order.
    pub fn degree(&self) -> usize {
        self.roots.iter().map(|r| r.multiplicity).sum()
    }

    pub(crate) fn root(&self, index: usize) -> Result<&Root, EngineError> {
        self.roots
            .get(index)
            .ok_or_else(|| EngineError::InvalidArgument(format!("no root with index {index}")))
    }

    /// `h^i(w)`: the product of `((w - w_j)(w - conj w_j))^{n_j}` over every
    /// cluster except `index`.
    pub fn h_excluding(&self, index: usize, w: ComplexScalar) -> ComplexScalar {
        self.roots
            .iter()
            .enumerate()
            .filter(|(j, _)| *j != index)
            .fold(ComplexScalar::new(1.0, 0.0), |acc, (_, r)| {
                acc * ((w - r.omega) * (w - r.omega.conj())).powu(r.multiplicity as u32)
            })
    }

    /// Logarithmic derivative `(h^i)'/h^i` at `w`.
    pub fn h_excluding_log_derivative(&self, index: usize, w: ComplexScalar) -> ComplexScalar {
        self.roots
            .iter()
            .enumerate()
            .filter(|(j, _)| *j != index)
            .map(|(_, r)| {
                (1.0 / (w - r.omega) + 1.0 / (w - r.omega.conj())) * r.multiplicity as f64
            })
            .sum()
    }
}

/// Coefficients of `p(t) = c(t) - eta` as complex numbers `x + i y`.
pub(crate) fn shifted_polynomial(curve: &Curve, eta: Vec2) -> Vec<ComplexScalar> {
    let mut p: Vec<ComplexScalar> = curve.coeffs().iter().map(|c| c.to_complex()).collect();
    p[0] -= eta.to_complex();
    p
}

fn horner(p: &[ComplexScalar], z: ComplexScalar) -> (ComplexScalar, ComplexScalar) {
    let mut value = ComplexScalar::new(0.0, 0.0);
    let mut deriv = ComplexScalar::new(0.0, 0.0);
    for &c in p.iter().rev() {
        deriv = deriv * z + value;
        value = value * z + c;
    }
    (value, deriv)
}

/// `sum_k |p_k| |z|^k`, the scale against which residuals are judged.
fn residual_scale(p: &[ComplexScalar], z: ComplexScalar) -> f64 {
    let r = z.norm();
    p.iter().rev().fold(0.0, |acc, c| acc * r + c.norm())
}

fn quadratic_roots(p: &[ComplexScalar]) -> [ComplexScalar; 2] {
    let (c, b, a) = (p[0], p[1], p[2]);
    let sq = (b * b - 4.0 * a * c).sqrt();
    // pick the sign that avoids cancellation
    let q = if (b.conj() * sq).re >= 0.0 {
        -0.5 * (b + sq)
    } else {
        -0.5 * (b - sq)
    };
    if q.norm() == 0.0 {
        return [ComplexScalar::new(0.0, 0.0); 2];
    }
    [q / a, c / q]
}

/// Aberth-Ehrlich simultaneous iteration.
fn aberth_roots(p: &[ComplexScalar]) -> Vec<ComplexScalar> {
    const MAX_ITER: usize = 500;
    let n = p.len() - 1;
    let lead = p[n];
    // upper bound on root moduli (Fujiwara), starting circle at half of it
    let bound = (0..n)
        .map(|k| {
            let ratio = (p[k] / lead).norm();
            let e = if k == 0 { 2.0 * ratio } else { ratio };
            e.powf(1.0 / (n - k) as f64)
        })
        .fold(0.0, f64::max)
        * 2.0;
    let center = -p[n - 1] / (lead * n as f64);
    let radius = (0.5 * bound).max(1e-300);
    let mut z: Vec<ComplexScalar> = (0..n)
        .map(|k| {
            let theta = 2.0 * std::f64::consts::PI * k as f64 / n as f64 + 0.4;
            center + ComplexScalar::from_polar(radius, theta)
        })
        .collect();
    for _ in 0..MAX_ITER {
        let mut max_step: f64 = 0.0;
        for i in 0..n {
            let (v, d) = horner(p, z[i]);
            if v.norm() == 0.0 {
                continue;
            }
            let ratio = v / d;
            let repulsion: ComplexScalar = (0..n)
                .filter(|&j| j != i)
                .map(|j| 1.0 / (z[i] - z[j]))
                .sum();
            let step = ratio / (1.0 - ratio * repulsion);
            if step.re.is_finite() && step.im.is_finite() {
                z[i] -= step;
                max_step = max_step.max(step.norm() / z[i].norm().max(1.0));
            }
        }
        if max_step < 4.0 * f64::EPSILON {
            break;
        }
    }
    z
}

/// One Newton step, kept only when it does not increase the residual.
fn polish(p: &[ComplexScalar], z: ComplexScalar) -> ComplexScalar {
    let (v, d) = horner(p, z);
    if d.norm() == 0.0 {
        return z;
    }
    let next = z - v / d;
    let (v_next, _) = horner(p, next);
    if v_next.norm() <= v.norm() && next.re.is_finite() && next.im.is_finite() {
        next
    } else {
        z
    }
}

/// Roots of `c(t) = eta` over the complex numbers, using the closed form for
/// orders one and two and Aberth-Ehrlich iteration above, each polished by a
/// Newton step.
pub fn complex_roots(curve: &Curve, eta: Vec2) -> Result<RootSet, EngineError> {
    complex_roots_with(curve, eta, &Tolerances::default())
}

pub fn complex_roots_with(
    curve: &Curve,
    eta: Vec2,
    tol: &Tolerances,
) -> Result<RootSet, EngineError> {
    let curve = curve.normalized();
    let p = shifted_polynomial(&curve, eta);
    let n = p.len() - 1;
    let raw: Vec<ComplexScalar> = match n {
        1 => vec![-p[0] / p[1]],
        2 => quadratic_roots(&p).to_vec(),
        _ => aberth_roots(&p),
    };
    let raw: Vec<ComplexScalar> = if n == 1 {
        raw
    } else {
        raw.into_iter().map(|z| polish(&p, z)).collect()
    };
    for &z in &raw {
        let (v, _) = horner(&p, z);
        let residual = v.norm() / residual_scale(&p, z).max(f64::MIN_POSITIVE);
        if residual.is_nan() || residual > tol.root_residual {
            return Err(EngineError::RootFindingFailure {
                coefficients: p.iter().map(|c| (c.re, c.im)).collect(),
                residual,
            });
        }
    }
    let leading = curve.leading().norm_sq();
    let set = RootSet::from_roots(&raw, 2.0 * std::f64::consts::PI * leading, tol)?;
    check_off_curve(&curve, &set, tol)?;
    Ok(set)
}

/// Rejects points that lie on the curve: a (near) real root inside `[0, 1]`.
fn check_off_curve(curve: &Curve, set: &RootSet, tol: &Tolerances) -> Result<(), EngineError> {
    for r in set.roots() {
        let w = r.omega;
        if w.norm() < tol.endpoint || (w - 1.0).norm() < tol.endpoint {
            return Err(EngineError::EndpointSingularity {
                omega: (w.re, w.im),
            });
        }
        if (0.0..=1.0).contains(&w.re) {
            let speed = curve.derivative(w.re).norm();
            if w.im.abs() * speed <= tol.on_curve || r.is_real() {
                return Err(EngineError::OnBoundary { parameter: w.re });
            }
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn v(x: f64, y: f64) -> Vec2 {
        Vec2::new(x, y)
    }

    fn parabola() -> Curve {
        Curve::from_monomial(vec![v(0.0, 0.0), v(1.0, 0.0), v(0.0, 1.0)]).unwrap()
    }

    #[test]
    fn segment_root() {
        let c = Curve::from_monomial(vec![v(0.0, 0.0), v(1.0, 0.0)]).unwrap();
        let rs = complex_roots(&c, v(0.5, 1.0)).unwrap();
        assert_eq!(rs.len(), 1);
        let r = rs.roots()[0];
        assert!((r.omega - ComplexScalar::new(0.5, 1.0)).norm() < 1e-15);
        assert_eq!(r.class, RootClass::General);
        assert!((rs.normalization() - 2.0 * std::f64::consts::PI).abs() < 1e-15);
    }

    #[test]
    fn parabola_focus_is_a_double_root() {
        let rs = complex_roots(&parabola(), v(0.0, 0.25)).unwrap();
        assert_eq!(rs.len(), 1);
        let r = rs.roots()[0];
        assert_eq!(r.multiplicity, 2);
        assert_eq!(r.class, RootClass::Repeated);
        assert!((r.omega - ComplexScalar::new(0.0, 0.5)).norm() < 1e-12);
        assert_eq!(rs.degree(), 2);
    }

    #[test]
    fn extension_point_gives_a_real_root() {
        let c = parabola();
        let rs = complex_roots(&c, c.evaluate(-1.0)).unwrap();
        let real: Vec<_> = rs
            .roots()
            .iter()
            .filter(|r| r.class == RootClass::Real)
            .collect();
        assert_eq!(real.len(), 1);
        assert!((real[0].omega.re + 1.0).abs() < 1e-12);
        assert_eq!(real[0].omega.im, 0.0);
    }

    #[test]
    fn on_curve_and_endpoint_are_rejected() {
        let c = parabola();
        assert!(matches!(
            complex_roots(&c, c.evaluate(0.3)),
            Err(EngineError::OnBoundary { .. })
        ));
        assert!(matches!(
            complex_roots(&c, c.evaluate(1.0)),
            Err(EngineError::EndpointSingularity { .. })
        ));
        assert!(matches!(
            complex_roots(&c, c.evaluate(0.0)),
            Err(EngineError::EndpointSingularity { .. })
        ));
    }

    #[test]
    fn aberth_finds_all_roots_of_higher_orders() {
        let c = Curve::from_bezier(&[
            v(0.0, 0.0),
            v(0.3, 0.8),
            v(0.7, -0.5),
            v(1.2, 0.4),
            v(1.0, 1.0),
            v(0.2, 1.3),
        ])
        .unwrap();
        let eta = v(0.45, 0.35);
        let rs = complex_roots(&c, eta).unwrap();
        assert_eq!(rs.degree(), 5);
        let p = shifted_polynomial(&c, eta);
        for r in rs.roots() {
            let (val, _) = horner(&p, r.omega);
            assert!(val.norm() < 1e-13);
        }
    }

    #[test]
    fn elevated_curves_are_trimmed_before_root_finding() {
        let c = Curve::from_bezier(&[v(0.0, 0.0), v(1.0, 0.0)])
            .unwrap()
            .elevate_degree(3)
            .unwrap();
        let rs = complex_roots(&c, v(0.5, 1.0)).unwrap();
        assert_eq!(rs.degree(), 1);
    }

    #[test]
    fn clustering_merges_close_roots_at_their_mean() {
        let tol = Tolerances::default();
        let a = ComplexScalar::new(0.3, 0.7);
        let d = ComplexScalar::new(1e-9, 0.0);
        let rs = RootSet::from_roots(&[a + d, a - d, ComplexScalar::new(2.0, 1e-12)], 1.0, &tol)
            .unwrap();
        assert_eq!(rs.len(), 2);
        let rep = rs
            .roots()
            .iter()
            .find(|r| r.class == RootClass::Repeated)
            .unwrap();
        assert_eq!(rep.multiplicity, 2);
        assert!((rep.omega - a).norm() < 1e-15);
        let real = rs
            .roots()
            .iter()
            .find(|r| r.class == RootClass::Real)
            .unwrap();
        assert_eq!(real.pole_order(), 2);
    }
}
