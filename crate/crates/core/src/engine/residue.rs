//! Residue evaluation of `E_m = A F_m = int_0^1 t^m / h(t) dt`.
//!
//! `h(w) = prod (w - w_i)(w - conj w_i)` over the roots of `c(t) = eta`. The
//! integral is the sum of the residues of `g_m(w) / h(w)` with
//!
//! ```text
//! g_m(w) = w^m ( log(1 - 1/w) + sum_{k=1}^{m-1} 1 / (k w^k) )
//! ```
//!
//! (the variant whose sum stops at `m - 1`; it differs from the one stopping
//! at `m` by the constant `1/m`, whose residues over all poles cancel). It
//! obeys `g_{m+1} = w (g_m + 1/m)` for `m >= 1`, which drives the recurrences
//! below. All contributions in one sum must use the same variant.

use num_complex::Complex64;

use super::roots::{ComplexScalar, Root, RootClass, RootSet};
use super::EngineError;
use crate::geometry::binomial;

/// Distance to `0` or `1` below which `g_0` is considered singular.
pub const ENDPOINT_TOL: f64 = 1e-12;

/// `log(1 - 1/w)` on the principal branch, evaluated as
/// `0.5 log(1 + (1 - 2 Re w)/|w|^2) + i atan2(Im w, |w|^2 - Re w)`.
pub fn g0(omega: ComplexScalar) -> Result<ComplexScalar, EngineError> {
    if omega.norm() < ENDPOINT_TOL || (omega - 1.0).norm() < ENDPOINT_TOL {
        return Err(EngineError::EndpointSingularity {
            omega: (omega.re, omega.im),
        });
    }
    Ok(g0_unchecked(omega))
}

#[inline]
fn g0_unchecked(omega: ComplexScalar) -> ComplexScalar {
    let n2 = omega.norm_sqr();
    Complex64::new(
        0.5 * ((1.0 - 2.0 * omega.re) / n2).ln_1p(),
        omega.im.atan2(n2 - omega.re),
    )
}

fn expect_class(root: &Root, expected: RootClass) -> Result<(), EngineError> {
    if root.class != expected {
        return Err(EngineError::WrongClassification {
            expected,
            found: root.class,
        });
    }
    Ok(())
}

/// Above this modulus the kernels are evaluated from their tail series and a
/// downward recurrence; the upward recurrence amplifies rounding by `|w|^m`.
const TAIL_RADIUS: f64 = 1.5;

fn tail_terms(w: ComplexScalar, extra: usize) -> usize {
    // |w|^-k below 1e-18
    (41.5 / w.norm().ln()).ceil() as usize + extra
}

/// `g_0..=g_{m_max}` at `w` together with their first derivatives.
///
/// `g_{m+1} = w (g_m + 1/m)` upward for `|w| <= 1.5`; otherwise
/// `g_M = -sum_j w^-j / (M + j)` at the top and `g_m = g_{m+1} / w - 1/m`
/// downward.
fn g_values(w: ComplexScalar, m_max: usize) -> (Vec<ComplexScalar>, Vec<ComplexScalar>) {
    let zero = Complex64::new(0.0, 0.0);
    let mut g = vec![zero; m_max + 1];
    let mut dg = vec![zero; m_max + 1];
    g[0] = g0_unchecked(w);
    dg[0] = 1.0 / (w * (w - 1.0));
    if m_max == 0 {
        return (g, dg);
    }
    if w.norm() <= TAIL_RADIUS {
        g[1] = w * g[0];
        dg[1] = g[0] + w * dg[0];
        for m in 1..m_max {
            let inv_m = 1.0 / m as f64;
            g[m + 1] = w * (g[m] + inv_m);
            dg[m + 1] = g[m] + inv_m + w * dg[m];
        }
        return (g, dg);
    }
    let inv_w = 1.0 / w;
    let top = m_max as f64;
    let (mut sum, mut dsum) = (zero, zero);
    let mut pw = Complex64::new(1.0, 0.0);
    for j in 0..tail_terms(w, 0) {
        let jf = j as f64;
        sum += pw / (top + jf);
        // d/dw w^-j = -j w^-(j+1)
        dsum += pw * inv_w * (jf / (top + jf));
        pw *= inv_w;
    }
    g[m_max] = -sum;
    dg[m_max] = dsum;
    for m in (1..m_max).rev() {
        let inv_m = 1.0 / m as f64;
        g[m] = g[m + 1] * inv_w - inv_m;
        dg[m] = (dg[m + 1] - g[m] - inv_m) * inv_w;
    }
    (g, dg)
}

/// Contribution of a simple conjugate pair `(w, conj w)` to `E_0..=E_{m_max}`:
/// the residues of `g_m / h` at `w` and `conj w` add up to
/// `E_m = Im(g_m(w) / h^i(w)) / Im w`, where `h^i` is `h` without the pair.
/// Equivalently `E_{m+1} = Re(w) E_m + Re W_m + Im(w / h^i(w)) / (m Im w)`
/// with `W_m = g_m(w) / h^i(w)`.
pub fn e_sequence(
    rootset: &RootSet,
    root_index: usize,
    m_max: usize,
) -> Result<Vec<f64>, EngineError> {
    let root = rootset.root(root_index)?;
    expect_class(root, RootClass::General)?;
    let w = root.omega;
    let h = rootset.h_excluding(root_index, w);
    if h.norm() == 0.0 {
        return Err(EngineError::InvalidArgument(
            "h^i vanishes at the root".into(),
        ));
    }
    g0(w)?;
    let inv_h = 1.0 / h;
    let inv_im = 1.0 / w.im;
    let (g, _) = g_values(w, m_max);
    Ok(g.iter().map(|gm| (gm * inv_h).im * inv_im).collect())
}

/// Contribution of a simple real root `r` outside `[0, 1]`, where `r` and
/// its conjugate merge into a double pole:
/// `E_m = (g_m / h^i)'(r) = g_m'(r) / h^i(r) + g_m(r) (1 / h^i)'(r)`.
/// Every quantity is real.
pub fn e_sequence_real(
    rootset: &RootSet,
    root_index: usize,
    m_max: usize,
) -> Result<Vec<f64>, EngineError> {
    let root = rootset.root(root_index)?;
    expect_class(root, RootClass::Real)?;
    let r = root.omega.re;
    if (0.0..=1.0).contains(&r) {
        return Err(EngineError::OnBoundary { parameter: r });
    }
    let rc = Complex64::new(r, 0.0);
    g0(rc)?;
    let h = rootset.h_excluding(root_index, rc).re;
    let log_deriv = rootset.h_excluding_log_derivative(root_index, rc).re;
    let inv_h = 1.0 / h;
    // (1/h)' = -(h'/h) / h
    let d_inv_h = -log_deriv * inv_h;
    let (g, dg) = g_values(rc, m_max);
    Ok(g.iter()
        .zip(&dg)
        .map(|(gm, dgm)| dgm.re * inv_h + gm.re * d_inv_h)
        .collect())
}

/// Contribution of a cluster of multiplicity `n > 1` to `E_m`:
/// `2 Re` of the residue of `g_m / h` at a pole of order `n` (or, for a
/// cluster on the real axis, the residue at the pole of order `2n`).
pub fn e_repeated(rootset: &RootSet, root_index: usize, m: usize) -> Result<f64, EngineError> {
    let root = rootset.root(root_index)?;
    if root.multiplicity < 2 {
        return Err(EngineError::WrongClassification {
            expected: RootClass::Repeated,
            found: root.class,
        });
    }
    pole_contribution(rootset, root_index, m)
}

/// Residue contribution of the pole pair at `root_index` to `E_m`, evaluated
/// directly from Taylor expansions of `g_m` and of the remaining factors of
/// `1/h`. Works for every class; the recurrences are the fast path.
pub fn pole_contribution(
    rootset: &RootSet,
    root_index: usize,
    m: usize,
) -> Result<f64, EngineError> {
    let root = rootset.root(root_index)?;
    let w0 = root.omega;
    g0(w0)?;
    if root.is_real() && (0.0..=1.0).contains(&w0.re) {
        return Err(EngineError::OnBoundary { parameter: w0.re });
    }
    let order = root.pole_order();
    let numerator = g_series(w0, m, order);
    let res = residue_with_numerator(rootset, root_index, &numerator);
    Ok(if root.is_real() { res.re } else { 2.0 * res.re })
}

/// Residue of `N(w) / h(w)` at the cluster `root_index`, where `numerator`
/// holds the Taylor coefficients of `N` around that root (at least as many
/// as the pole order).
pub fn residue_with_numerator(
    rootset: &RootSet,
    root_index: usize,
    numerator: &[ComplexScalar],
) -> ComplexScalar {
    let root = rootset.roots()[root_index];
    let order = root.pole_order();
    let w0 = root.omega;
    let mut q = vec![Complex64::new(0.0, 0.0); order];
    q[0] = Complex64::new(1.0, 0.0);
    if !root.is_real() {
        q = series_mul(
            &q,
            &inverse_power_series(w0 - w0.conj(), root.multiplicity, order),
        );
    }
    for (j, other) in rootset.roots().iter().enumerate() {
        if j == root_index {
            continue;
        }
        let n = other.multiplicity;
        q = series_mul(&q, &inverse_power_series(w0 - other.omega, n, order));
        q = series_mul(&q, &inverse_power_series(w0 - other.omega.conj(), n, order));
    }
    let prod = series_mul(numerator, &q);
    prod[order - 1]
}

/// Taylor coefficients of `(d + x)^{-p}` around `x = 0`.
fn inverse_power_series(d: ComplexScalar, p: usize, len: usize) -> Vec<ComplexScalar> {
    let inv = 1.0 / d;
    let base = inv.powu(p as u32);
    let mut out = Vec::with_capacity(len);
    let mut pw = base;
    for j in 0..len {
        // C(-p, j) = (-1)^j C(p + j - 1, j)
        let sign = if j % 2 == 0 { 1.0 } else { -1.0 };
        out.push(pw * (sign * binomial(p + j - 1, j)));
        pw *= inv;
    }
    out
}

fn series_mul(a: &[ComplexScalar], b: &[ComplexScalar]) -> Vec<ComplexScalar> {
    let len = a.len().min(b.len());
    (0..len)
        .map(|k| (0..=k).map(|i| a[i] * b[k - i]).sum())
        .collect()
}

/// Taylor coefficients of `w^p` around `w0`.
fn power_series(w0: ComplexScalar, p: usize, len: usize) -> Vec<ComplexScalar> {
    (0..len)
        .map(|j| {
            if j > p {
                Complex64::new(0.0, 0.0)
            } else {
                w0.powu((p - j) as u32) * binomial(p, j)
            }
        })
        .collect()
}

/// Taylor coefficients of `g_m` around `w0`.
fn g_series(w0: ComplexScalar, m: usize, len: usize) -> Vec<ComplexScalar> {
    if m > 0 && w0.norm() > TAIL_RADIUS {
        return g_series_tail(w0, m, len);
    }
    let mut log = Vec::with_capacity(len);
    log.push(g0_unchecked(w0));
    let (a, b) = (1.0 / (w0 - 1.0), 1.0 / w0);
    let (mut pa, mut pb) = (a, b);
    for j in 1..len {
        let sign = if j % 2 == 1 { 1.0 } else { -1.0 };
        log.push((pa - pb) * (sign / j as f64));
        pa *= a;
        pb *= b;
    }
    let mut out = series_mul(&power_series(w0, m, len), &log);
    for k in 1..m {
        for (o, t) in out.iter_mut().zip(power_series(w0, m - k, len)) {
            *o += t / k as f64;
        }
    }
    out
}

/// Same coefficients from `g_m(w) = -sum_k w^-k / (m + k)`:
/// the `j`-th one is `-sum_k (-1)^j C(k + j - 1, j) w0^-(k+j) / (m + k)`.
fn g_series_tail(w0: ComplexScalar, m: usize, len: usize) -> Vec<ComplexScalar> {
    let inv = 1.0 / w0;
    let terms = tail_terms(w0, len);
    (0..len)
        .map(|j| {
            let sign = if j % 2 == 0 { -1.0 } else { 1.0 };
            let mut pw = inv.powu(j as u32);
            let mut acc = Complex64::new(0.0, 0.0);
            for k in 0..terms {
                let coeff = if j == 0 {
                    1.0
                } else if k == 0 {
                    0.0
                } else {
                    binomial(k + j - 1, j)
                };
                acc += pw * (coeff / (m + k) as f64);
                pw *= inv;
            }
            acc * sign
        })
        .collect()
}

/// `E_0..=E_{m_max}` summed over every cluster of the root set.
pub fn e_total(rootset: &RootSet, m_max: usize) -> Result<Vec<f64>, EngineError> {
    let mut total = vec![0.0; m_max + 1];
    for (i, root) in rootset.roots().iter().enumerate() {
        let part = match root.class {
            RootClass::General => e_sequence(rootset, i, m_max)?,
            RootClass::Real => e_sequence_real(rootset, i, m_max)?,
            RootClass::Repeated => (0..=m_max)
                .map(|m| e_repeated(rootset, i, m))
                .collect::<Result<_, _>>()?,
        };
        for (t, p) in total.iter_mut().zip(part) {
            *t += p;
        }
    }
    Ok(total)
}
