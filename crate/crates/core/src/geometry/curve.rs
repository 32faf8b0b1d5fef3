use serde::{Deserialize, Serialize};

use super::{GeometryError, Vec2};

/// Coefficients smaller than this fraction of the largest coefficient are
/// treated as zero when a curve is normalized.
pub const TRIM_REL_TOL: f64 = 1e-12;

/// A polynomial curve `c(t) = sum_k t^k c_k` on `t in [0, 1]`.
///
/// Monomial coefficients are the stored form; the Bezier control points are
/// a view computed on demand. A curve produced by degree elevation keeps its
/// zero leading coefficients so that its Bezier view has the requested
/// number of control points. Use [`Curve::normalized`] to drop them.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Curve {
    coeffs: Vec<Vec2>,
}

pub(crate) fn binomial(n: usize, k: usize) -> f64 {
    if k > n {
        return 0.0;
    }
    let k = k.min(n - k);
    let mut acc = 1.0;
    for i in 0..k {
        acc = acc * (n - i) as f64 / (i + 1) as f64;
    }
    acc.round()
}

/// `sum w_i p_i` with compensated products and sums, so that basis
/// conversions stay accurate at high order.
fn weighted_sum(terms: impl Iterator<Item = (f64, Vec2)>) -> Vec2 {
    let (mut sx, mut cx, mut sy, mut cy) = (0.0, 0.0, 0.0, 0.0);
    for (w, p) in terms {
        accumulate(&mut sx, &mut cx, w, p.x);
        accumulate(&mut sy, &mut cy, w, p.y);
    }
    Vec2::new(sx + cx, sy + cy)
}

fn accumulate(sum: &mut f64, comp: &mut f64, a: f64, b: f64) {
    let prod = a * b;
    let prod_err = a.mul_add(b, -prod);
    let t = *sum + prod;
    let z = t - *sum;
    let sum_err = (*sum - (t - z)) + (prod - z);
    *sum = t;
    *comp += sum_err + prod_err;
}

fn check_points(points: &[Vec2]) -> Result<(), GeometryError> {
    if points.len() < 2 {
        return Err(GeometryError::InvalidCurve(format!(
            "a curve needs at least 2 points, got {}",
            points.len()
        )));
    }
    if let Some(i) = points.iter().position(|p| !p.is_finite()) {
        return Err(GeometryError::NonFinite(format!("point {i}")));
    }
    Ok(())
}

impl Curve {
    /// Builds a curve from monomial coefficients `c_0..c_n`.
    pub fn from_monomial(coeffs: Vec<Vec2>) -> Result<Self, GeometryError> {
        check_points(&coeffs)?;
        let curve = Curve { coeffs };
        if curve.normalized_order() == 0 {
            return Err(GeometryError::InvalidCurve(
                "curve collapses to a single point".into(),
            ));
        }
        Ok(curve)
    }

    /// Builds a curve from Bezier control points `b_0..b_n`.
    ///
    /// `c_k = C(n,k) * sum_{j<=k} (-1)^(k-j) C(k,j) b_j`
    pub fn from_bezier(control_points: &[Vec2]) -> Result<Self, GeometryError> {
        check_points(control_points)?;
        let n = control_points.len() - 1;
        let coeffs = (0..=n)
            .map(|k| {
                let scale = binomial(n, k);
                weighted_sum(
                    control_points
                        .iter()
                        .take(k + 1)
                        .enumerate()
                        .map(|(j, &b)| {
                            let sign = if (k - j) % 2 == 0 { 1.0 } else { -1.0 };
                            (sign * scale * binomial(k, j), b)
                        }),
                )
            })
            .collect();
        Curve::from_monomial(coeffs)
    }

    /// Straight segment from `a` to `b`.
    pub fn segment(a: Vec2, b: Vec2) -> Result<Self, GeometryError> {
        Curve::from_monomial(vec![a, b - a])
    }

    pub fn order(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn coeffs(&self) -> &[Vec2] {
        &self.coeffs
    }

    pub fn leading(&self) -> Vec2 {
        self.coeffs[self.order()]
    }

    fn scale(&self) -> f64 {
        self.coeffs.iter().map(|c| c.norm()).fold(0.0, f64::max)
    }

    fn normalized_order(&self) -> usize {
        let tol = TRIM_REL_TOL * self.scale();
        let mut n = self.order();
        while n > 0 && self.coeffs[n].norm() <= tol {
            n -= 1;
        }
        n
    }

    /// True when the leading coefficient is not negligible.
    pub fn is_normalized(&self) -> bool {
        self.normalized_order() == self.order()
    }

    /// The same curve with negligible leading coefficients trimmed.
    pub fn normalized(&self) -> Curve {
        Curve {
            coeffs: self.coeffs[..=self.normalized_order()].to_vec(),
        }
    }

    /// Bezier control points of this curve at its stored order.
    ///
    /// `b_j = sum_{k<=j} C(j,k) / C(n,k) * c_k`
    pub fn to_bezier(&self) -> Vec<Vec2> {
        let n = self.order();
        (0..=n)
            .map(|j| {
                weighted_sum((0..=j).map(|k| (binomial(j, k) / binomial(n, k), self.coeffs[k])))
            })
            .collect()
    }

    pub fn evaluate(&self, t: f64) -> Vec2 {
        self.coeffs
            .iter()
            .rev()
            .fold(Vec2::ZERO, |acc, &c| acc * t + c)
    }

    /// Velocity `c'(t)`.
    pub fn derivative(&self, t: f64) -> Vec2 {
        self.coeffs
            .iter()
            .enumerate()
            .skip(1)
            .rev()
            .fold(Vec2::ZERO, |acc, (k, &c)| acc * t + c * k as f64)
    }

    fn second_derivative(&self, t: f64) -> Vec2 {
        self.coeffs
            .iter()
            .enumerate()
            .skip(2)
            .rev()
            .fold(Vec2::ZERO, |acc, (k, &c)| {
                acc * t + c * (k * (k - 1)) as f64
            })
    }

    pub fn start(&self) -> Vec2 {
        self.coeffs[0]
    }

    pub fn end(&self) -> Vec2 {
        self.coeffs.iter().copied().sum()
    }

    /// `samples + 1` points at uniform parameters including both endpoints.
    pub fn sample(&self, samples: usize) -> Vec<Vec2> {
        let samples = samples.max(1);
        (0..=samples)
            .map(|i| self.evaluate(i as f64 / samples as f64))
            .collect()
    }

    /// Degree elevation. In the monomial basis this only pads with zeros; the
    /// Bezier view of the result is the classical Bernstein elevation.
    pub fn elevate_degree(&self, target_order: usize) -> Result<Curve, GeometryError> {
        if target_order < self.order() {
            return Err(GeometryError::InvalidArgument(format!(
                "cannot elevate a curve of order {} to order {target_order}",
                self.order()
            )));
        }
        let mut coeffs = self.coeffs.clone();
        coeffs.resize(target_order + 1, Vec2::ZERO);
        Ok(Curve { coeffs })
    }

    /// Converts to `target_order`, elevating exactly or reducing by a least
    /// squares fit that keeps both endpoints.
    pub fn with_order(&self, target_order: usize) -> Result<Curve, GeometryError> {
        if target_order >= self.order() {
            self.elevate_degree(target_order)
        } else {
            self.reduce_degree(target_order)
        }
    }

    /// Least squares Bezier fit of lower order with pinned endpoints.
    ///
    /// Reducing to order 1 gives the chord between the endpoints.
    pub fn reduce_degree(&self, target_order: usize) -> Result<Curve, GeometryError> {
        if target_order == 0 || target_order > self.order() {
            return Err(GeometryError::InvalidArgument(format!(
                "cannot reduce a curve of order {} to order {target_order}",
                self.order()
            )));
        }
        if target_order == self.order() {
            return Ok(self.clone());
        }
        let k = target_order;
        let (p0, pk) = (self.start(), self.end());
        let unknowns = k - 1;
        let mut ctrl = vec![Vec2::ZERO; k + 1];
        ctrl[0] = p0;
        ctrl[k] = pk;
        if unknowns > 0 {
            let samples = 16 * (self.order() + 1);
            let mut normal = vec![vec![0.0; unknowns]; unknowns];
            let mut rhs = vec![Vec2::ZERO; unknowns];
            for s in 0..=samples {
                let t = s as f64 / samples as f64;
                let basis: Vec<f64> = (0..=k)
                    .map(|j| binomial(k, j) * t.powi(j as i32) * (1.0 - t).powi((k - j) as i32))
                    .collect();
                let target = self.evaluate(t) - p0 * basis[0] - pk * basis[k];
                for a in 0..unknowns {
                    rhs[a] += target * basis[a + 1];
                    for b in 0..unknowns {
                        normal[a][b] += basis[a + 1] * basis[b + 1];
                    }
                }
            }
            let solved = solve_dense(normal, rhs).ok_or_else(|| {
                GeometryError::InvalidArgument("singular degree reduction system".into())
            })?;
            ctrl[1..k].copy_from_slice(&solved);
        }
        Curve::from_bezier(&ctrl)
    }

    /// Euclidean distance from `p` to the curve restricted to `t in [0, 1]`,
    /// together with the minimizing parameter.
    pub fn closest_point(&self, p: Vec2) -> (f64, f64) {
        const SEED_SAMPLES: usize = 64;
        let mut best_t = 0.0;
        let mut best_d = f64::INFINITY;
        for i in 0..=SEED_SAMPLES {
            let t = i as f64 / SEED_SAMPLES as f64;
            let d = self.evaluate(t).distance(p);
            if d < best_d {
                best_d = d;
                best_t = t;
            }
        }
        // Newton on (c(t) - p) . c'(t) = 0
        let mut t = best_t;
        for _ in 0..32 {
            let diff = self.evaluate(t) - p;
            let d1 = self.derivative(t);
            let g = diff.dot(d1);
            let dg = d1.norm_sq() + diff.dot(self.second_derivative(t));
            if dg <= 0.0 {
                break;
            }
            let next = (t - g / dg).clamp(0.0, 1.0);
            if (next - t).abs() < 1e-15 {
                t = next;
                break;
            }
            t = next;
        }
        let d = self.evaluate(t).distance(p);
        if d < best_d {
            (d, t)
        } else {
            (best_d, best_t)
        }
    }

    pub fn distance_to(&self, p: Vec2) -> f64 {
        self.closest_point(p).0
    }

    /// The curve with every coefficient mapped by an affine map
    /// `x -> linear(x) + offset` (the offset only touches `c_0`).
    pub fn map_affine(&self, linear: impl Fn(Vec2) -> Vec2, offset: Vec2) -> Curve {
        let mut coeffs: Vec<Vec2> = self.coeffs.iter().map(|&c| linear(c)).collect();
        coeffs[0] += offset;
        Curve { coeffs }
    }
}

/// Gaussian elimination with partial pivoting on a small dense system with
/// vector right-hand sides.
fn solve_dense(mut a: Vec<Vec<f64>>, mut b: Vec<Vec2>) -> Option<Vec<Vec2>> {
    let n = b.len();
    for col in 0..n {
        let pivot = (col..n).max_by(|&i, &j| a[i][col].abs().total_cmp(&a[j][col].abs()))?;
        if a[pivot][col].abs() < 1e-300 {
            return None;
        }
        a.swap(col, pivot);
        b.swap(col, pivot);
        for row in col + 1..n {
            let f = a[row][col] / a[col][col];
            let (upper, lower) = a.split_at_mut(row);
            for (dst, src) in lower[0][col..].iter_mut().zip(&upper[col][col..]) {
                *dst -= f * src;
            }
            let bc = b[col];
            b[row] -= bc * f;
        }
    }
    let mut x = vec![Vec2::ZERO; n];
    for row in (0..n).rev() {
        let mut acc = b[row];
        for (k, xk) in x.iter().enumerate().skip(row + 1) {
            acc -= *xk * a[row][k];
        }
        x[row] = acc * (1.0 / a[row][row]);
    }
    Some(x)
}
