//! Complex special functions: log Γ, Barnes log G, log Ĝ and the dilogarithm.
//!
//! Branches are fixed by argument-shift recurrences starting from the right
//! half plane, so `log_gamma` and `log_barnes_g` are continuous on the plane
//! cut along (−∞, 0].

use crate::error::{Error, Result};
use num_complex::Complex64;
use std::f64::consts::PI;

/// ½ ln 2π.
pub const HALF_LN_2PI: f64 = 0.918_938_533_204_672_8;
/// ζ′(−1).
pub const ZETA_PRIME_M1: f64 = -0.165_421_143_700_450_93;

const POLE_TOL: f64 = 1e-12;

// B_2 .. B_20
const BERNOULLI_EVEN: [f64; 10] = [
    1.0 / 6.0,
    -1.0 / 30.0,
    1.0 / 42.0,
    -1.0 / 30.0,
    5.0 / 66.0,
    -691.0 / 2730.0,
    7.0 / 6.0,
    -3617.0 / 510.0,
    43867.0 / 798.0,
    -174611.0 / 330.0,
];

fn c(re: f64) -> Complex64 {
    Complex64::new(re, 0.0)
}

/// Distance from z to the nearest non-positive integer, or `None` if Re z > 1/2.
fn nonpositive_integer_distance(z: Complex64) -> Option<f64> {
    if z.re > 0.5 {
        return None;
    }
    let k = z.re.round().min(0.0);
    Some((z - c(k)).norm())
}

/// Principal-branch log Γ(z), continuous on ℂ∖(−∞, 0].
pub fn log_gamma(z: Complex64) -> Result<Complex64> {
    if !z.re.is_finite() || !z.im.is_finite() {
        return Err(Error::InvalidInput(format!("log_gamma argument {z} is not finite")));
    }
    if let Some(d) = nonpositive_integer_distance(z) {
        if d < POLE_TOL {
            return Err(Error::GammaPole(z));
        }
    }
    let mut w = z;
    let mut shift = Complex64::new(0.0, 0.0);
    while w.re < 8.0 {
        shift += w.ln();
        w += 1.0;
    }
    Ok(stirling(w) - shift)
}

fn stirling(w: Complex64) -> Complex64 {
    let inv = w.inv();
    let inv2 = inv * inv;
    let mut series = Complex64::new(0.0, 0.0);
    let mut pow = inv;
    for (k, b) in BERNOULLI_EVEN.iter().enumerate() {
        let n = 2.0 * (k as f64 + 1.0);
        series += pow * (b / (n * (n - 1.0)));
        pow *= inv2;
    }
    (w - 0.5) * w.ln() - w + HALF_LN_2PI + series
}

/// log G(z) for the Barnes G-function, continuous on ℂ∖(−∞, 0].
pub fn log_barnes_g(z: Complex64) -> Result<Complex64> {
    if !z.re.is_finite() || !z.im.is_finite() {
        return Err(Error::InvalidInput(format!("log_barnes_g argument {z} is not finite")));
    }
    if let Some(d) = nonpositive_integer_distance(z) {
        if d < POLE_TOL {
            return Err(Error::BarnesZero(z));
        }
    }
    let mut w = z;
    let mut shift = Complex64::new(0.0, 0.0);
    while w.re < 10.0 {
        shift += log_gamma(w)?;
        w += 1.0;
    }
    Ok(barnes_asymptotic(w - 1.0) - shift)
}

// log G(1+y) for large |y|.
fn barnes_asymptotic(y: Complex64) -> Complex64 {
    let ly = y.ln();
    let y2 = y * y;
    let inv2 = y2.inv();
    let mut series = Complex64::new(0.0, 0.0);
    let mut pow = inv2;
    for k in 1..BERNOULLI_EVEN.len() {
        let kf = k as f64;
        series += pow * (BERNOULLI_EVEN[k] / (4.0 * kf * (kf + 1.0)));
        pow *= inv2;
    }
    y2 * 0.5 * ly - y2 * 0.75 + y * HALF_LN_2PI - ly / 12.0 + ZETA_PRIME_M1 + series
}

/// log Ĝ(z) = log G(1+z) − log G(1−z).
pub fn log_g_hat(z: Complex64) -> Result<Complex64> {
    Ok(log_barnes_g(1.0 + z)? - log_barnes_g(1.0 - z)?)
}

// log a − log b continued along the segment b → a.
fn log_ratio_on_segment(a: Complex64, b: Complex64) -> Result<Complex64> {
    let r = a / b;
    if r.im == 0.0 && r.re <= 0.0 {
        return Err(Error::InvalidInput(format!(
            "segment from {b} to {a} passes through the origin"
        )));
    }
    Ok(r.ln())
}

fn shift_count(z1: Complex64, z2: Complex64) -> usize {
    let m = z1.re.min(z2.re);
    if m >= 1.0 {
        0
    } else {
        (1.0 - m).ceil() as usize
    }
}

// log Γ(z1) − log Γ(z2) continued along the segment z2 → z1.
fn log_gamma_diff_on_segment(z1: Complex64, z2: Complex64) -> Result<Complex64> {
    let m = shift_count(z1, z2);
    let mut acc = log_gamma(z1 + m as f64)? - log_gamma(z2 + m as f64)?;
    for j in 0..m {
        acc -= log_ratio_on_segment(z1 + j as f64, z2 + j as f64)?;
    }
    Ok(acc)
}

// log G(z1) − log G(z2) continued along the segment z2 → z1.
fn log_barnes_diff_on_segment(z1: Complex64, z2: Complex64) -> Result<Complex64> {
    let n = shift_count(z1, z2);
    let mut acc = log_barnes_g(z1 + n as f64)? - log_barnes_g(z2 + n as f64)?;
    for k in 0..n {
        acc -= log_gamma_diff_on_segment(z1 + k as f64, z2 + k as f64)?;
    }
    Ok(acc)
}

/// log(Ĝ(a)/Ĝ(b)) continued along the straight segment from b to a.
///
/// Differs from `log_g_hat(a) - log_g_hat(b)` by a multiple of 2πi when the
/// points 1 − a and 1 − b sit on opposite sides of the negative real axis.
/// Fails if the segment meets a zero or pole of Ĝ.
pub fn log_g_hat_ratio(a: Complex64, b: Complex64) -> Result<Complex64> {
    let plus = log_barnes_diff_on_segment(1.0 + a, 1.0 + b)?;
    let minus = log_barnes_diff_on_segment(1.0 - a, 1.0 - b)?;
    Ok(plus - minus)
}

/// B_{2k}/(2k+1)! for k = 1..=22; tabulated Bernoulli numbers first, then
/// B_{2k} = (−1)^{k+1}·2·(2k)!·ζ(2k)/(2π)^{2k} where ζ(2k) converges fast.
fn bernoulli_series_coefficients() -> [f64; 22] {
    let mut out = [0.0; 22];
    let two_pi = 2.0 * PI;
    let mut fact = 1.0;
    for (idx, slot) in out.iter_mut().enumerate() {
        let k = idx + 1;
        let s = 2 * k as i32;
        fact *= (s as f64) * (s as f64 + 1.0);
        if idx < BERNOULLI_EVEN.len() {
            *slot = BERNOULLI_EVEN[idx] / fact;
            continue;
        }
        let mut zeta = 0.0;
        for n in (1..=20).rev() {
            zeta += (n as f64).powi(-s);
        }
        let sign = if k % 2 == 1 { 1.0 } else { -1.0 };
        *slot = sign * 2.0 * zeta / ((s as f64 + 1.0) * two_pi.powi(s));
    }
    out
}

// Σ_{n≥0} B_n u^{n+1}/(n+1)! with B_1 = −1/2; equals Li₂(1 − e^{−u}).
fn bernoulli_dilog_series(u: Complex64) -> Complex64 {
    let coef = bernoulli_series_coefficients();
    let u2 = u * u;
    let mut sum = u - u2 * 0.25;
    let mut pow = u2 * u;
    for b in coef {
        sum += pow * b;
        pow *= u2;
    }
    sum
}

fn dilog_power_series(z: Complex64) -> Complex64 {
    let mut sum = Complex64::new(0.0, 0.0);
    let mut pow = z;
    for k in 1..=60 {
        let kf = k as f64;
        sum += pow / (kf * kf);
        pow *= z;
        if pow.norm() < 1e-18 {
            break;
        }
    }
    sum
}

/// Principal-branch dilogarithm Li₂(z), cut along [1, ∞).
pub fn dilog(z: Complex64) -> Complex64 {
    let pi2_6 = PI * PI / 6.0;
    if z == c(1.0) {
        return c(pi2_6);
    }
    if z.norm() <= 0.5 {
        return dilog_power_series(z);
    }
    if z.norm() <= 1.0 && z.re <= 0.5 {
        return bernoulli_dilog_series(-(1.0 - z).ln());
    }
    if z.re > 0.5 && z.norm_sqr() <= 2.0 * z.re {
        let lz = z.ln();
        return -bernoulli_dilog_series(-lz) + pi2_6 - lz * (1.0 - z).ln();
    }
    let lmz = (-z).ln();
    -dilog(z.inv()) - pi2_6 - 0.5 * lmz * lmz
}
