//! Hamiltonian, tau-function connection constant ln(C∞/C0) and the χ constant.
//!
//! The regularized constant is
//!
//!   lim [ ∫_{t0}^{t1} (−H/4) dx − t1²/8 − 2ν t1 − ν² ln t1 − (α²/8) ln t0 ]
//!
//! as t0 → 0, t1 → ∞. Three evaluations are provided: direct quadrature of
//! −H/4, the action form ∫ (H − v u_x)/4 dx − (1/4)[xH], and the closed form
//! in Barnes G-functions.

use crate::error::{Error, Result};
use crate::monodromy::{
    amplitudes_from_monodromy, cauchy_from_monodromy, log_gamma_ratio, rho_from_monodromy, AsymptoticData,
    MonodromyData,
};
use crate::ode::seed::{checked_series, SeedSeries, DEFAULT_ORDER};
use crate::ode::{integrate_with, IntegrateOptions, Trajectory, DEFAULT_X0};
use crate::mbform::continued_rho_w;
use crate::quadrature;
use crate::records::complex;
use crate::specfun::{log_barnes_g, log_g_hat_ratio, log_gamma};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

const I: Complex64 = Complex64 { re: 0.0, im: 1.0 };
const LN2: f64 = std::f64::consts::LN_2;

pub const DEFAULT_T0: f64 = 1e-4;
pub const DEFAULT_T1: f64 = 200.0;
/// Spacing of the end-point samples used for the 1/t extrapolation.
const ENDPOINT_SPACING: f64 = 0.25;
const SMALL_X_NODES: usize = 48;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    Quadrature,
    Action,
    ClosedForm,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TauRatioResult {
    #[serde(with = "complex")]
    pub log_ratio: Complex64,
    pub error_estimate: f64,
    pub method: Method,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HamiltonianSample {
    pub x: f64,
    #[serde(with = "complex")]
    pub h: Complex64,
    #[serde(with = "complex")]
    pub v: Complex64,
}

/// H = v²/(2x) − x cos u with v = x u_x.
pub fn hamiltonian(x: f64, u: Complex64, ux: Complex64) -> HamiltonianSample {
    let v = x * ux;
    HamiltonianSample { x, h: v * v / (2.0 * x) - x * u.cos(), v }
}

/// ln c₁ = (3/2) ln 2 − iπ/4 − ln π − 4 ln G(1/2).
pub fn log_c1() -> Complex64 {
    let lg_half = log_barnes_g(Complex64::new(0.5, 0.0)).expect("G(1/2) is finite");
    Complex64::new(1.5 * LN2 - PI.ln(), -PI / 4.0) - 4.0 * lg_half
}

fn closed_parts(m: &MonodromyData) -> Result<(Complex64, Complex64, Complex64)> {
    let nu = crate::monodromy::nu_from_monodromy(m)?;
    let a = m.sigma + m.eta + (1.0 - I * nu) / 2.0;
    let b = m.sigma + m.eta + (1.0 + I * nu) / 2.0;
    Ok((nu, a, b))
}

// ln(Ĝ(a)/Ĝ(b)). On the line σ + η = 1/2 (where ν = 0 and a = b = 1) the
// zeros of G(1−a), G(1−b) are factored out: G(z) = z G(1+z)/Γ(1+z), and
// (1−a)/(1−b) is replaced by its limit (1 − ik/2)/(1 + ik/2), k = ∂ν/∂η = 2 cot 2πη.
fn hat_ratio(m: &MonodromyData, a: Complex64, b: Complex64) -> Result<Complex64> {
    let (za, zb) = (1.0 - a, 1.0 - b);
    if za.norm() > 1e-3 || zb.norm() > 1e-3 {
        return log_g_hat_ratio(a, b);
    }
    let smooth = log_barnes_g(1.0 + a)? - log_barnes_g(1.0 + b)?
        - (log_barnes_g(1.0 + za)? - log_gamma(1.0 + za)? - log_barnes_g(1.0 + zb)? + log_gamma(1.0 + zb)?);
    let lin = if za.norm().max(zb.norm()) < 1e-9 {
        let k = 2.0 * (2.0 * PI * m.eta).cos() / (2.0 * PI * m.eta).sin();
        ((1.0 - I * k / 2.0) / (1.0 + I * k / 2.0)).ln()
    } else {
        (za / zb).ln()
    };
    Ok(smooth - lin)
}

fn check_valid(m: &MonodromyData) -> Result<()> {
    cauchy_from_monodromy(m).map(|_| ())
}

fn barnes_triple(s: Complex64, nu: Complex64) -> Result<Complex64> {
    Ok(log_barnes_g(1.0 + I * nu)? + log_barnes_g(1.0 + 2.0 * s)? + log_barnes_g(1.0 - 2.0 * s)?)
}

/// Closed-form ln(C∞/C0) with log(Ĝ(a)/Ĝ(b)) continued along the segment b → a.
pub fn log_tau_ratio_closed_form(m: &MonodromyData) -> Result<TauRatioResult> {
    check_valid(m)?;
    let (s, e) = (m.sigma, m.eta);
    let (nu, a, b) = closed_parts(m)?;
    let v = log_c1()
        + I * nu * (2.0 * PI).ln()
        + (2.0 * nu * nu + 24.0 * s * s - 12.0 * s) * LN2
        + 2.0 * PI * I * (e * e - 2.0 * s * e - s * s + 2.0 * e - s)
        + log_gamma_ratio(s)?
        + 2.0 * (barnes_triple(s, nu)? + hat_ratio(m, a, b)?);
    Ok(TauRatioResult { log_ratio: v, error_estimate: 1e-13 * (1.0 + v.norm()), method: Method::ClosedForm })
}

/// Same constant written with six explicit Barnes factors, each on its
/// principal branch. Agrees with `log_tau_ratio_closed_form` modulo 4πi.
pub fn log_tau_ratio_explicit_barnes(m: &MonodromyData) -> Result<Complex64> {
    check_valid(m)?;
    let (s, e) = (m.sigma, m.eta);
    let (nu, a, b) = closed_parts(m)?;
    let ratio = log_barnes_g(1.0 + a)? + log_barnes_g(1.0 - b)? - log_barnes_g(1.0 + b)? - log_barnes_g(1.0 - a)?;
    Ok(log_c1()
        + I * nu * (2.0 * PI).ln()
        + (2.0 * nu * nu + 24.0 * s * s - 12.0 * s) * LN2
        + 2.0 * PI * I * (e * e - 2.0 * s * e - s * s + 2.0 * e - s)
        + log_gamma_ratio(s)?
        + 2.0 * (barnes_triple(s, nu)? + ratio))
}

/// Contributions whose sum is the closed form minus ln c₁.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GeneratingTerms {
    /// ν² + 4σ − 8σ² − iν + 2πiη − 12σ ln 2 + 24σ² ln 2 + iπν²/2 + 2ν² ln 2
    #[serde(with = "complex")]
    pub elementary: Complex64,
    /// ∫(1−4σ) d ln[Γ(1−2σ)/Γ(2σ)]
    #[serde(with = "complex")]
    pub gamma_sigma: Complex64,
    /// ∫ 2iν d ln Γ(1+iν)
    #[serde(with = "complex")]
    pub gamma_nu: Complex64,
    /// −8πi ∫(σ dη + iν dρ), through the dilogarithm potential
    #[serde(with = "complex")]
    pub dilog: Complex64,
    #[serde(with = "complex")]
    pub log_c1: Complex64,
}

impl GeneratingTerms {
    /// Sum of all terms except ln c₁.
    pub fn sum(&self) -> Complex64 {
        self.elementary + self.gamma_sigma + self.gamma_nu + self.dilog
    }
}

pub fn generating_function_terms(m: &MonodromyData) -> Result<GeneratingTerms> {
    check_valid(m)?;
    let (s, e) = (m.sigma, m.eta);
    let nu = crate::monodromy::nu_from_monodromy(m)?;
    rho_from_monodromy(m)?;
    let elementary = nu * nu + 4.0 * s - 8.0 * s * s - I * nu + 2.0 * PI * I * e - 12.0 * s * LN2
        + 24.0 * s * s * LN2
        + I * PI * nu * nu / 2.0
        + 2.0 * nu * nu * LN2;
    let gamma_sigma = log_gamma_ratio(s)? - 4.0 * s
        + 8.0 * s * s
        + 2.0 * (log_barnes_g(1.0 - 2.0 * s)? + log_barnes_g(1.0 + 2.0 * s)?);
    let gamma_nu = I * nu - nu * nu - I * nu * (2.0 * PI).ln() + 2.0 * log_barnes_g(1.0 + I * nu)?;
    let (rho, w) = continued_rho_w(s, e);
    let dilog = -8.0 * PI * I * (s * e + I * nu * rho - w) + I * PI / 6.0;
    Ok(GeneratingTerms { elementary, gamma_sigma, gamma_nu, dilog, log_c1: log_c1() })
}

/// ln χ from its closed form.
pub fn log_chi_constant(m: &MonodromyData) -> Result<Complex64> {
    check_valid(m)?;
    let (s, e) = (m.sigma, m.eta);
    let (nu, a, b) = closed_parts(m)?;
    let lg_half = log_barnes_g(Complex64::new(0.5, 0.0))?;
    Ok((I * nu - 0.5) * (2.0 * PI).ln()
        + I * PI * (e * e - 2.0 * s * e - s * s + e - s - nu * nu / 4.0 + 0.125)
        - 0.25 * LN2
        - 2.0 * lg_half
        + hat_ratio(m, a, b)?)
}

pub fn chi_constant(m: &MonodromyData) -> Result<Complex64> {
    Ok(log_chi_constant(m)?.exp())
}

/// ln χ assembled from ln(C∞/C0) and the small/large-x normalizations of the
/// conformal-block tau function.
pub fn log_chi_from_ratio(m: &MonodromyData, log_ratio: Complex64) -> Result<Complex64> {
    check_valid(m)?;
    let (s, e) = (m.sigma, m.eta);
    let nu = crate::monodromy::nu_from_monodromy(m)?;
    Ok(0.5 * log_ratio + I * nu / 2.0 * (2.0 * PI).ln()
        + (-1.5 - nu * nu - 12.0 * s * s + 6.0 * s) * LN2
        - I * PI * nu * nu / 4.0
        - I * PI * e
        + I * PI / 4.0
        - barnes_triple(s, nu)?
        - 0.5 * log_gamma_ratio(s)?)
}

/// χ from the closed-form ratio.
pub fn chi_from_ratio(m: &MonodromyData) -> Result<Complex64> {
    let r = log_tau_ratio_closed_form(m)?.log_ratio;
    Ok(log_chi_from_ratio(m, r)?.exp())
}

// ∫_t^∞ of the oscillatory part (i b₊²/8) e^{2ix} x^{2iν−1} − (i b₋²/8) e^{−2ix} x^{−2iν−1}
// by two integrations by parts.
pub(crate) fn oscillatory_tail(amp: &AsymptoticData, t: f64) -> Complex64 {
    let nu = amp.nu;
    let lt = t.ln();
    let sp = 2.0 * I * nu - 1.0;
    let sm = -2.0 * I * nu - 1.0;
    let ep = (2.0 * I * t + sp * lt).exp();
    let em = (-2.0 * I * t + sm * lt).exp();
    I * amp.b_plus * amp.b_plus / 8.0 * ep * (I / 2.0 - sp / (4.0 * t))
        - I * amp.b_minus * amp.b_minus / 8.0 * em * (-I / 2.0 - sm / (4.0 * t))
}

/// The oscillatory part itself, for checking `oscillatory_tail`.
#[cfg(test)]
fn oscillatory_part(amp: &AsymptoticData, x: f64) -> Complex64 {
    let nu = amp.nu;
    let lx = x.ln();
    I * amp.b_plus * amp.b_plus / 8.0 * (2.0 * I * x + (2.0 * I * nu - 1.0) * lx).exp()
        - I * amp.b_minus * amp.b_minus / 8.0 * (-2.0 * I * x + (-2.0 * I * nu - 1.0) * lx).exp()
}

#[derive(Debug, Clone)]
struct Regularized {
    quad: Vec<(f64, Complex64)>,
    action: Vec<(f64, Complex64)>,
    remainder_quad: f64,
    remainder_action: f64,
}

// ∫_{t0}^{x0} g(x) dx on the series, Gauss–Legendre in ln x.
fn small_x_integral<F: Fn(f64, Complex64, Complex64) -> Complex64>(
    series: &SeedSeries,
    t0: f64,
    x0: f64,
    g: F,
) -> Complex64 {
    if t0 >= x0 {
        return Complex64::new(0.0, 0.0);
    }
    quadrature::integrate(
        |s| {
            let x = s.exp();
            let (u, ux) = series.eval(x);
            g(x, u, ux) * x
        },
        t0.ln(),
        x0.ln(),
        SMALL_X_NODES,
    )
}

fn regularized_run(m: &MonodromyData, t0: f64, t1: f64, tol: f64) -> Result<Regularized> {
    let c = cauchy_from_monodromy(m)?;
    let amp = amplitudes_from_monodromy(m)?;
    let nu = amp.nu;
    let alpha2 = c.alpha * c.alpha;
    let x0 = DEFAULT_X0.max(t0);
    let series = checked_series(&c, x0, DEFAULT_ORDER)?;

    let quad_integrand = |x: f64, u: Complex64, ux: Complex64| -hamiltonian(x, u, ux).h / 4.0 + alpha2 / (8.0 * x);
    let action_integrand = |x: f64, u: Complex64, ux: Complex64| {
        let hs = hamiltonian(x, u, ux);
        (hs.h - hs.v * ux) / 4.0 + alpha2 / (8.0 * x)
    };
    let log_span = alpha2 / 8.0 * (x0 / t0).ln();
    let small_q = small_x_integral(&series, t0, x0, quad_integrand) - log_span;
    let small_a = small_x_integral(&series, t0, x0, action_integrand) - log_span;
    let (u_t0, ux_t0) = series.eval(t0);
    let remainder_quad = t0 * quad_integrand(t0, u_t0, ux_t0).norm();
    let remainder_action = t0 * action_integrand(t0, u_t0, ux_t0).norm();
    let t0_h_t0 = t0 * hamiltonian(t0, u_t0, ux_t0).h;

    let lo = t1 / 4.0;
    let n = ((t1 - lo) / ENDPOINT_SPACING).round() as usize;
    let stops: Vec<f64> = (0..=n).map(|k| lo + (t1 - lo) * k as f64 / n as f64).collect();
    let opts = IntegrateOptions { tol, x0, stops: stops.clone(), record_steps: false, ..Default::default() };
    let traj: Trajectory = integrate_with(&c, t1, &opts)?;

    let common = |t: f64| -2.0 * nu * t - nu * nu * t.ln() - alpha2 / 8.0 * t0.ln() + oscillatory_tail(&amp, t);
    let mut quad = Vec::with_capacity(stops.len());
    let mut action = Vec::with_capacity(stops.len());
    for &t in &stops {
        let s = traj
            .sample_at(t)
            .ok_or_else(|| Error::InvalidInput(format!("missing end-point sample at {t}")))?;
        let fq = small_q + s.tau_integral - x0 * x0 / 8.0 + common(t);
        let th = t * hamiltonian(t, s.u, s.ux).h;
        let fa = small_a + s.action_integral - (t * t - x0 * x0) / 8.0 - 0.25 * (th - t0_h_t0) - t * t / 8.0 + common(t);
        quad.push((t, fq));
        action.push((t, fa));
    }
    Ok(Regularized { quad, action, remainder_quad, remainder_action })
}

// Least-squares F(t) ≈ F∞ + c/t over samples with lo ≤ t ≤ hi; returns F∞.
fn endpoint_fit(samples: &[(f64, Complex64)], lo: f64, hi: f64) -> Complex64 {
    let (mut s00, mut s01, mut s11) = (0.0, 0.0, 0.0);
    let mut r0 = Complex64::new(0.0, 0.0);
    let mut r1 = Complex64::new(0.0, 0.0);
    for &(t, f) in samples.iter().filter(|(t, _)| *t >= lo - 1e-9 && *t <= hi + 1e-9) {
        let g = 1.0 / t;
        s00 += 1.0;
        s01 += g;
        s11 += g * g;
        r0 += f;
        r1 += f * g;
    }
    let det = s00 * s11 - s01 * s01;
    (r0 * s11 - r1 * s01) / det
}

fn extrapolate(samples: &[(f64, Complex64)], t1: f64) -> (Complex64, f64) {
    let far = endpoint_fit(samples, t1 / 2.0, t1);
    let near = endpoint_fit(samples, t1 / 4.0, t1 / 2.0);
    (far, (far - near).norm())
}

fn check_endpoints(t0: f64, t1: f64, tol: f64) -> Result<()> {
    if !(t0 > 0.0 && t0 <= DEFAULT_X0) {
        return Err(Error::InvalidInput(format!("t0 = {t0} must lie in (0, {DEFAULT_X0}]")));
    }
    if !(t1 >= 100.0) {
        return Err(Error::InvalidInput(format!("t1 = {t1} must be at least 100")));
    }
    if !(tol > 0.0) {
        return Err(Error::InvalidInput(format!("tolerance {tol} must be positive")));
    }
    Ok(())
}

fn finish(
    first: &[(f64, Complex64)],
    second: &[(f64, Complex64)],
    remainder: f64,
    t1: f64,
    method: Method,
) -> Result<TauRatioResult> {
    let (v, model) = extrapolate(first, t1);
    let (v2, _) = extrapolate(second, t1);
    let change = (v - v2).norm();
    let estimate = model + remainder;
    if change > 10.0 * estimate.max(1e-12) {
        return Err(Error::NonConvergence { change, estimate });
    }
    Ok(TauRatioResult { log_ratio: v2, error_estimate: estimate + change, method })
}

/// Quadrature and action evaluations from one pair of solves (tol, tol/2).
pub fn log_tau_ratio_numeric(
    m: &MonodromyData,
    t0: f64,
    t1: f64,
    tol: f64,
) -> Result<(TauRatioResult, TauRatioResult)> {
    check_endpoints(t0, t1, tol)?;
    let r1 = regularized_run(m, t0, t1, tol)?;
    let r2 = regularized_run(m, t0, t1, tol / 2.0)?;
    let q = finish(&r1.quad, &r2.quad, r1.remainder_quad, t1, Method::Quadrature)?;
    let a = finish(&r1.action, &r2.action, r1.remainder_action, t1, Method::Action)?;
    Ok((q, a))
}

/// Regularized ∫(−H/4) dx with analytic small-x continuation and the
/// oscillatory large-x tail removed by parts.
pub fn log_tau_ratio_quadrature(m: &MonodromyData, t0: f64, t1: f64, tol: f64) -> Result<TauRatioResult> {
    check_endpoints(t0, t1, tol)?;
    let r1 = regularized_run(m, t0, t1, tol)?;
    let r2 = regularized_run(m, t0, t1, tol / 2.0)?;
    finish(&r1.quad, &r2.quad, r1.remainder_quad, t1, Method::Quadrature)
}

/// Regularized action ∫ (H − v u_x)/4 dx − (1/4)[xH].
pub fn log_tau_ratio_action(m: &MonodromyData, t0: f64, t1: f64, tol: f64) -> Result<TauRatioResult> {
    check_endpoints(t0, t1, tol)?;
    let r1 = regularized_run(m, t0, t1, tol)?;
    let r2 = regularized_run(m, t0, t1, tol / 2.0)?;
    finish(&r1.action, &r2.action, r1.remainder_action, t1, Method::Action)
}
