//! Derivatives of u and u_x with respect to the Stokes parameters (p, q),
//! by central differences of full re-solves and Richardson extrapolation.

use super::{integrate_with, IntegrateOptions, Sample};
use crate::error::{Error, Result};
use crate::monodromy::{cauchy_from_monodromy, monodromy_from_stokes, stokes_from_monodromy, MonodromyData, StokesData};
use crate::records::complex;
use num_complex::Complex64;
use serde::Serialize;

#[derive(Debug, Clone)]
pub struct SensitivityOptions {
    /// Relative step; the absolute step is h·max(1, |p|, |q|).
    pub h: f64,
    pub tol: f64,
    pub x0: f64,
}

impl Default for SensitivityOptions {
    fn default() -> Self {
        SensitivityOptions { h: 1e-5, tol: super::DEFAULT_TOL, x0: super::DEFAULT_X0 }
    }
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct SensitivitySample {
    pub x: f64,
    #[serde(with = "complex")]
    pub u: Complex64,
    #[serde(with = "complex")]
    pub ux: Complex64,
    #[serde(with = "complex")]
    pub u_p: Complex64,
    #[serde(with = "complex")]
    pub u_q: Complex64,
    #[serde(with = "complex")]
    pub u_px: Complex64,
    #[serde(with = "complex")]
    pub u_qx: Complex64,
    pub error_estimate: f64,
}

/// Absolute finite-difference step for a relative step h at (p, q).
pub fn absolute_step(st: &StokesData, h: f64) -> f64 {
    h * 1f64.max(st.p.norm()).max(st.q.norm())
}

/// Solves at Stokes data `st` and returns the samples at `xs` (sorted, ≥ x0).
pub(crate) fn solve_at_stokes(
    st: &StokesData,
    eta_hint: Complex64,
    xs: &[f64],
    tol: f64,
    x0: f64,
) -> Result<Vec<Sample>> {
    let m = monodromy_from_stokes(st, eta_hint)?;
    solve_at(&m, xs, tol, x0)
}

pub(crate) fn solve_at(m: &MonodromyData, xs: &[f64], tol: f64, x0: f64) -> Result<Vec<Sample>> {
    let c = cauchy_from_monodromy(m)?;
    let x1 = xs.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    if xs.iter().any(|x| *x < x0) {
        return Err(Error::InvalidInput(format!("sample points must not lie below the seed point {x0}")));
    }
    let seed_only = x1 <= x0;
    let opts = IntegrateOptions { tol, x0, stops: xs.to_vec(), record_steps: false, ..Default::default() };
    let traj = if seed_only {
        let (u, ux) = super::seed_series(&c, x0)?;
        let zero = Complex64::new(0.0, 0.0);
        return Ok(xs.iter().map(|&x| Sample { x, u, ux, tau_integral: zero, action_integral: zero }).collect());
    } else {
        integrate_with(&c, x1, &opts)?
    };
    xs.iter()
        .map(|&x| {
            traj.sample_at(x)
                .copied()
                .ok_or_else(|| Error::InvalidInput(format!("no sample recorded at x = {x}")))
        })
        .collect()
}

/// Checks that every point p ± 2h, q ± 2h maps back into the admissible set.
pub(crate) fn check_margin(st: &StokesData, eta_hint: Complex64, h_abs: f64) -> Result<()> {
    for (dp, dq) in [(2.0, 0.0), (-2.0, 0.0), (0.0, 2.0), (0.0, -2.0)] {
        let s = StokesData::new(st.p + dp * h_abs, st.q + dq * h_abs);
        if let Err(e) = monodromy_from_stokes(&s, eta_hint) {
            return Err(Error::Margin(format!("(p, q) + ({dp}h, {dq}h) with h = {h_abs:e}: {e}")));
        }
    }
    Ok(())
}

pub fn sensitivities(m: &MonodromyData, xs: &[f64], h: f64) -> Result<Vec<SensitivitySample>> {
    sensitivities_with(m, xs, &SensitivityOptions { h, ..Default::default() })
}

/// Central differences at steps h, h/2, h/4 combined by Richardson
/// extrapolation. The error estimate is the spread of the two extrapolants
/// (floored at the integration noise level).
pub fn sensitivities_with(
    m: &MonodromyData,
    xs: &[f64],
    opts: &SensitivityOptions,
) -> Result<Vec<SensitivitySample>> {
    if xs.is_empty() {
        return Ok(Vec::new());
    }
    let mut sorted = xs.to_vec();
    sorted.sort_by(f64::total_cmp);
    sorted.dedup();
    let st = stokes_from_monodromy(m)?;
    let h_abs = absolute_step(&st, opts.h);
    check_margin(&st, m.eta, h_abs)?;
    let center = solve_at(m, &sorted, opts.tol, opts.x0)?;

    // diffs[level][dir] = per-x (Δu, Δux)/(2h)
    let mut diffs: Vec<[Vec<(Complex64, Complex64)>; 2]> = Vec::new();
    for level in 0..3 {
        let hk = h_abs / f64::powi(2.0, level);
        let mut per_dir: [Vec<(Complex64, Complex64)>; 2] = [Vec::new(), Vec::new()];
        for (dir, slot) in per_dir.iter_mut().enumerate() {
            let (dp, dq) = if dir == 0 { (hk, 0.0) } else { (0.0, hk) };
            let plus = solve_at_stokes(&StokesData::new(st.p + dp, st.q + dq), m.eta, &sorted, opts.tol, opts.x0)?;
            let minus = solve_at_stokes(&StokesData::new(st.p - dp, st.q - dq), m.eta, &sorted, opts.tol, opts.x0)?;
            *slot = plus
                .iter()
                .zip(&minus)
                .map(|(a, b)| ((a.u - b.u) / (2.0 * hk), (a.ux - b.ux) / (2.0 * hk)))
                .collect();
        }
        diffs.push(per_dir);
    }

    let mut out = Vec::with_capacity(sorted.len());
    for (i, c) in center.iter().enumerate() {
        let mut vals = [Complex64::new(0.0, 0.0); 4];
        let mut err: f64 = 0.0;
        for dir in 0..2 {
            for comp in 0..2 {
                let d: Vec<Complex64> = (0..3)
                    .map(|l| if comp == 0 { diffs[l][dir][i].0 } else { diffs[l][dir][i].1 })
                    .collect();
                let r1 = (4.0 * d[1] - d[0]) / 3.0;
                let r2 = (4.0 * d[2] - d[1]) / 3.0;
                let mag = if comp == 0 { c.u.norm() } else { c.ux.norm() };
                let noise = 10.0 * opts.tol * 1f64.max(mag) / (h_abs / 4.0);
                let spread = (r1 - r2).norm();
                let trunc = (d[1] - d[2]).norm();
                if spread > 10.0 * trunc.max(noise) {
                    return Err(Error::InconsistentExtrapolation { spread, estimate: trunc.max(noise) });
                }
                err = err.max(spread.max(noise));
                vals[2 * dir + comp] = r2;
            }
        }
        out.push(SensitivitySample {
            x: c.x,
            u: c.u,
            ux: c.ux,
            u_p: vals[0],
            u_px: vals[1],
            u_q: vals[2],
            u_qx: vals[3],
            error_estimate: err,
        });
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::monodromy::cauchy_from_monodromy;

    #[test]
    fn poisson_bracket_is_x_independent() {
        let m = MonodromyData::real(0.3, 0.15);
        let s = sensitivities(&m, &[1.0, 5.0, 20.0], 1e-4).unwrap();
        let pb: Vec<Complex64> = s
            .iter()
            .map(|v| {
                let (vp, vq) = (v.x * v.u_px, v.x * v.u_qx);
                vp * v.u_q - vq * v.u_p
            })
            .collect();
        for w in &pb[1..] {
            assert!((w - pb[0]).norm() < 1e-6 * pb[0].norm(), "{pb:?}");
        }
    }

    #[test]
    fn trivial_point_has_finite_derivatives() {
        let m = MonodromyData::real(0.25, 0.25);
        let s = sensitivities(&m, &[1.0, 3.0], 1e-4).unwrap();
        for v in &s {
            assert!(v.u.norm() < 1e-12);
            assert!(v.u_p.norm().is_finite() && v.u_q.norm().is_finite());
            assert!(v.u_p.norm() > 1e-3);
        }
    }

    #[test]
    fn margin_violation_near_boundary() {
        // σ close to 1/2 leaves no room for the stencil
        let m = MonodromyData::real(0.499_999_9, 0.26);
        if cauchy_from_monodromy(&m).is_ok() {
            assert!(matches!(sensitivities(&m, &[1.0], 1e-2), Err(Error::Margin(_))));
        }
    }
}
