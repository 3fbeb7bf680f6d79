//! The localized Malgrange–Bertola 1-form
//!
//!   ω = ω_x dx + ω_p dp + ω_q dq,
//!   ω_x = −x u_x²/8 + (x/4)(cos u − 1),
//!   ω_p = −[(x²/4) u_p sin u + (x²/4) u_x u_px + (x/4) u_x u_p],
//!
//! its closure defects, its asymptotic forms at 0 and ∞, and the generating
//! function 𝒲(σ, ν) of the map (σ, η) → (σ, ν).

use crate::error::{Error, Result};
use crate::monodromy::{
    amplitudes_from_monodromy, cauchy_from_monodromy, cauchy_to_monodromy, monodromy_from_stokes,
    nu_from_monodromy, rho_from_monodromy, stokes_from_monodromy, AsymptoticData, CauchyData, MonodromyData, StokesData,
};
use crate::ode::sensitivity::{absolute_step, check_margin, solve_at, SensitivityOptions};
use crate::ode::{sensitivities_with, Sample, DEFAULT_TOL, DEFAULT_X0};
use crate::records::complex;
use crate::specfun::dilog;
use num_complex::Complex64;
use serde::Serialize;
use std::f64::consts::PI;
use std::io::Write;

const I: Complex64 = Complex64 { re: 0.0, im: 1.0 };

/// Relative (p, q) step used by `omega_at`.
pub const FORM_STEP: f64 = 1e-4;

#[derive(Debug, Clone, Copy, Serialize)]
pub struct FormSample {
    pub x: f64,
    #[serde(with = "complex")]
    pub p: Complex64,
    #[serde(with = "complex")]
    pub q: Complex64,
    #[serde(with = "complex")]
    pub omega_x: Complex64,
    #[serde(with = "complex")]
    pub omega_p: Complex64,
    #[serde(with = "complex")]
    pub omega_q: Complex64,
    /// Residual bound of the underlying trajectory.
    pub residual_bound: f64,
    pub error_estimate: f64,
}

/// 1-form components (dx, dp, dq) at a point x.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct OneForm {
    pub x: f64,
    #[serde(with = "complex")]
    pub dx: Complex64,
    #[serde(with = "complex")]
    pub dp: Complex64,
    #[serde(with = "complex")]
    pub dq: Complex64,
}

pub fn omega_x(x: f64, u: Complex64, ux: Complex64) -> Complex64 {
    -x * ux * ux / 8.0 + x / 4.0 * (u.cos() - 1.0)
}

/// ω_p (or ω_q) from u, u_x and the derivatives (u_s, u_sx) in one direction.
pub fn omega_dir(x: f64, u: Complex64, ux: Complex64, us: Complex64, usx: Complex64) -> Complex64 {
    -(x * x / 4.0 * us * u.sin() + x * x / 4.0 * ux * usx + x / 4.0 * ux * us)
}

fn sort_points(xs: &[f64]) -> Result<Vec<f64>> {
    if xs.iter().any(|x| !(x.is_finite() && *x > 0.0)) {
        return Err(Error::InvalidInput("form sample points must be positive and finite".to_string()));
    }
    let mut s = xs.to_vec();
    s.sort_by(f64::total_cmp);
    s.dedup();
    Ok(s)
}

pub fn omega_at(x: f64, m: &MonodromyData) -> Result<FormSample> {
    Ok(omega_on(&[x], m, &SensitivityOptions { h: FORM_STEP, ..Default::default() })?[0])
}

/// Form samples at several x from one set of solves.
pub fn omega_on(xs: &[f64], m: &MonodromyData, opts: &SensitivityOptions) -> Result<Vec<FormSample>> {
    let xs = sort_points(xs)?;
    let st = stokes_from_monodromy(m)?;
    let c = cauchy_from_monodromy(m)?;
    let sens = sensitivities_with(m, &xs, opts)?;
    let traj_bound = crate::ode::integrate_with(
        &c,
        *xs.last().expect("non-empty"),
        &crate::ode::IntegrateOptions { tol: opts.tol, x0: opts.x0, record_steps: false, ..Default::default() },
    )?
    .residual_bound;
    Ok(sens
        .iter()
        .map(|s| FormSample {
            x: s.x,
            p: st.p,
            q: st.q,
            omega_x: omega_x(s.x, s.u, s.ux),
            omega_p: omega_dir(s.x, s.u, s.ux, s.u_p, s.u_px),
            omega_q: omega_dir(s.x, s.u, s.ux, s.u_q, s.u_qx),
            residual_bound: traj_bound,
            error_estimate: s.error_estimate * (s.x * s.x).max(1.0),
        })
        .collect())
}

/// CSV with columns x, re/im of p, q, ω_x, ω_p, ω_q.
pub fn write_form_csv<W: Write>(samples: &[FormSample], w: W) -> std::io::Result<()> {
    let mut out = csv::Writer::from_writer(w);
    out.write_record([
        "x", "re_p", "im_p", "re_q", "im_q", "re_omega_x", "im_omega_x", "re_omega_p", "im_omega_p", "re_omega_q",
        "im_omega_q",
    ])?;
    for s in samples {
        let row: Vec<String> = [s.x, s.p.re, s.p.im, s.q.re, s.q.im]
            .into_iter()
            .chain([s.omega_x, s.omega_p, s.omega_q].into_iter().flat_map(|z| [z.re, z.im]))
            .map(|v| format!("{v:e}"))
            .collect();
        out.write_record(&row)?;
    }
    out.flush()?;
    Ok(())
}

/// ∂f/∂p and ∂f/∂q at m by fourth-order central differences of a closed-form
/// map f of the monodromy data. Returns (f, f_p, f_q).
pub fn stokes_jacobian<F>(m: &MonodromyData, h: f64, f: F) -> Result<(Vec<Complex64>, Vec<Complex64>, Vec<Complex64>)>
where
    F: Fn(&MonodromyData) -> Result<Vec<Complex64>>,
{
    let st = stokes_from_monodromy(m)?;
    let h_abs = absolute_step(&st, h);
    check_margin(&st, m.eta, h_abs)?;
    let center = f(m)?;
    let at = |dp: Complex64, dq: Complex64| -> Result<Vec<Complex64>> {
        f(&monodromy_from_stokes(&StokesData::new(st.p + dp, st.q + dq), m.eta)?)
    };
    let mut grads = Vec::with_capacity(2);
    for dir in 0..2 {
        let step = |k: f64| {
            if dir == 0 {
                (Complex64::new(k * h_abs, 0.0), Complex64::new(0.0, 0.0))
            } else {
                (Complex64::new(0.0, 0.0), Complex64::new(k * h_abs, 0.0))
            }
        };
        let (a1, b1) = step(1.0);
        let (a2, b2) = step(2.0);
        let (p1, m1, p2, m2) = (at(a1, b1)?, at(-a1, -b1)?, at(a2, b2)?, at(-a2, -b2)?);
        grads.push(
            (0..center.len())
                .map(|i| (8.0 * (p1[i] - m1[i]) - (p2[i] - m2[i])) / (12.0 * h_abs))
                .collect::<Vec<_>>(),
        );
    }
    let gq = grads.pop().expect("two directions");
    let gp = grads.pop().expect("two directions");
    Ok((center, gp, gq))
}

const JACOBIAN_STEP: f64 = 1e-4;

fn nu_and_amplitudes(m: &MonodromyData) -> Result<Vec<Complex64>> {
    let a = amplitudes_from_monodromy(m)?;
    Ok(vec![a.nu, a.b_plus, a.b_minus])
}

fn alpha_beta(m: &MonodromyData) -> Result<Vec<Complex64>> {
    let c = cauchy_from_monodromy(m)?;
    Ok(vec![c.alpha, c.beta])
}

/// α_p β_q − α_q β_p from the closed-form maps.
pub fn cauchy_bracket(m: &MonodromyData) -> Result<Complex64> {
    let (_, d_p, d_q) = stokes_jacobian(m, JACOBIAN_STEP, alpha_beta)?;
    Ok(d_p[0] * d_q[1] - d_q[0] * d_p[1])
}

/// dx component of the large-x form.
pub fn omega_infty_dx(x: f64, amp: &AsymptoticData) -> Complex64 {
    let (nu, bp, bm) = (amp.nu, amp.b_plus, amp.b_minus);
    let lx = x.ln();
    2.0 * nu + nu * nu / x + I * bp * bp / 8.0 * (2.0 * I * x + (2.0 * I * nu - 1.0) * lx).exp()
        - I * bm * bm / 8.0 * (-2.0 * I * x + (-2.0 * I * nu - 1.0) * lx).exp()
}

/// Large-x form: dx = 2ν + ν²/x + oscillatory pair,
/// d(p,q) = d(2νx + ν² ln x + ν²) − (i/4)(b₊ db₋ − b₋ db₊).
pub fn omega_asymptotic_infty(x: f64, m: &MonodromyData) -> Result<OneForm> {
    if !(x >= 50.0) {
        return Err(Error::InvalidInput(format!("large-x form requires x >= 50, got {x}")));
    }
    let (v, d_p, d_q) = stokes_jacobian(m, JACOBIAN_STEP, nu_and_amplitudes)?;
    let (nu, bp, bm) = (v[0], v[1], v[2]);
    let lx = x.ln();
    let dx = omega_infty_dx(x, &AsymptoticData { b_plus: bp, b_minus: bm, nu });
    let param = |d: &[Complex64]| {
        2.0 * x * d[0] + 2.0 * nu * d[0] * lx + 2.0 * nu * d[0] - I / 4.0 * (bp * d[2] - bm * d[1])
    };
    Ok(OneForm { x, dx, dp: param(&d_p), dq: param(&d_q) })
}

/// Small-x form: dx = −α²/(8x), d(p,q) = −(α/4)(ln x + 1) dα − (α/4) dβ.
pub fn omega_asymptotic_zero(x: f64, c: &CauchyData) -> Result<OneForm> {
    if !(x > 0.0 && x <= 0.05) {
        return Err(Error::InvalidInput(format!("small-x form requires 0 < x <= 0.05, got {x}")));
    }
    let m = cauchy_to_monodromy(c)?;
    let (_, d_p, d_q) = stokes_jacobian(&m, JACOBIAN_STEP, alpha_beta)?;
    let a = c.alpha;
    let lx = x.ln();
    let param = |d: &[Complex64]| -a * d[0] / 4.0 * (lx + 1.0) - a * d[1] / 4.0;
    Ok(OneForm { x, dx: -a * a / (8.0 * x), dp: param(&d_p), dq: param(&d_q) })
}

#[derive(Debug, Clone, Copy)]
pub struct ClosureOptions {
    /// Relative (p, q) step of the outer stencil.
    pub h: f64,
    /// Relative x step.
    pub hx: f64,
    pub tol: f64,
    pub x0: f64,
}

impl Default for ClosureOptions {
    fn default() -> Self {
        ClosureOptions { h: 5e-4, hx: 1e-3, tol: DEFAULT_TOL, x0: DEFAULT_X0 }
    }
}

/// Scaled defects at one x for one stencil step.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct StencilDefects {
    pub x: f64,
    /// |dω(∂p,∂q) + (v_p u_q − v_q u_p)/4| / |(v_p u_q − v_q u_p)/4|
    pub symplectic: f64,
    /// |dw(∂p,∂q)| / |(α_p β_q − α_q β_p)/4| for w = ω + (x/4)dx + (α/4)dβ
    pub closure_pq: f64,
    /// |dw(∂x,∂p)| / max(|∂x ω_p|, |∂p ω_x|)
    pub closure_xp: f64,
    /// |dw(∂x,∂q)| / max(|∂x ω_q|, |∂q ω_x|)
    pub closure_xq: f64,
}

impl StencilDefects {
    pub fn max(&self) -> f64 {
        self.symplectic.max(self.closure_pq).max(self.closure_xp).max(self.closure_xq)
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct ClosureReport {
    #[serde(with = "complex")]
    pub sigma: Complex64,
    #[serde(with = "complex")]
    pub eta: Complex64,
    pub h: f64,
    pub tol: f64,
    pub at_h: Vec<StencilDefects>,
    pub at_half_h: Vec<StencilDefects>,
    /// v_p u_q − v_q u_p at each x (Richardson sensitivities).
    #[serde(with = "complex_vec")]
    pub bracket: Vec<Complex64>,
    /// α_p β_q − α_q β_p.
    #[serde(with = "complex")]
    pub bracket_limit: Complex64,
    /// max |bracket(x) − bracket(x_first)| / |bracket(x_first)|
    pub bracket_drift: f64,
    /// max |bracket(x) − bracket_limit| / |bracket_limit|
    pub bracket_limit_defect: f64,
    /// Largest scaled defect at step h.
    pub max_defect: f64,
    /// Geometric mean over x and defect kinds of defect(h)/defect(h/2).
    pub shrink_factor: f64,
}

mod complex_vec {
    use num_complex::Complex64;
    use serde::ser::{SerializeSeq, Serializer};

    pub fn serialize<S: Serializer>(v: &[Complex64], s: S) -> Result<S::Ok, S::Error> {
        #[derive(serde::Serialize)]
        struct C {
            re: f64,
            im: f64,
        }
        let mut seq = s.serialize_seq(Some(v.len()))?;
        for z in v {
            seq.serialize_element(&C { re: z.re, im: z.im })?;
        }
        seq.end()
    }
}

// Samples on the 3×3 (p, q) stencil; index [i+1][j+1] for offsets (i, j)·h.
type Grid = [[Vec<Sample>; 3]; 3];

fn solve_grid(m: &MonodromyData, st: &StokesData, h_abs: f64, stops: &[f64], opts: &ClosureOptions) -> Result<Grid> {
    let mut grid: Grid = Default::default();
    for (a, row) in grid.iter_mut().enumerate() {
        for (b, slot) in row.iter_mut().enumerate() {
            let (i, j) = (a as f64 - 1.0, b as f64 - 1.0);
            let s = StokesData::new(st.p + i * h_abs, st.q + j * h_abs);
            let mm = if a == 1 && b == 1 { *m } else { monodromy_from_stokes(&s, m.eta)? };
            *slot = solve_at(&mm, stops, opts.tol, opts.x0)?;
        }
    }
    Ok(grid)
}

fn stencil_defects(grid: &Grid, stops: &[f64], x: f64, hx: f64, h: f64, limit: Complex64) -> StencilDefects {
    let idx = |t: f64| {
        stops
            .iter()
            .position(|s| (s - t).abs() <= 1e-12 * t.max(1.0))
            .expect("stencil point is among the stops")
    };
    let (k0, km, kp, km2, kp2) = (idx(x), idx(x - hx), idx(x + hx), idx(x - 2.0 * hx), idx(x + 2.0 * hx));
    let g = |i: i32, j: i32, k: usize| &grid[(i + 1) as usize][(j + 1) as usize][k];
    // u_p, u_px at (0, j) and u_q, u_qx at (i, 0)
    let dp = |j: i32, k: usize| {
        let (a, b) = (g(1, j, k), g(-1, j, k));
        ((a.u - b.u) / (2.0 * h), (a.ux - b.ux) / (2.0 * h))
    };
    let dq = |i: i32, k: usize| {
        let (a, b) = (g(i, 1, k), g(i, -1, k));
        ((a.u - b.u) / (2.0 * h), (a.ux - b.ux) / (2.0 * h))
    };
    let xs = |k: usize| g(0, 0, k).x;
    let wp = |j: i32, k: usize| {
        let s = g(0, j, k);
        let (up, upx) = dp(j, k);
        omega_dir(xs(k), s.u, s.ux, up, upx)
    };
    let wq = |i: i32, k: usize| {
        let s = g(i, 0, k);
        let (uq, uqx) = dq(i, k);
        omega_dir(xs(k), s.u, s.ux, uq, uqx)
    };
    let wx = |i: i32, j: i32, k: usize| {
        let s = g(i, j, k);
        omega_x(xs(k), s.u, s.ux)
    };

    let d_omega_pq = (wq(1, k0) - wq(-1, k0)) / (2.0 * h) - (wp(1, k0) - wp(-1, k0)) / (2.0 * h);
    let (up, upx) = dp(0, k0);
    let (uq, uqx) = dq(0, k0);
    let bracket = x * upx * uq - x * uqx * up;
    let symplectic = (d_omega_pq + bracket / 4.0).norm() / (bracket / 4.0).norm();
    let closure_pq = (d_omega_pq + limit / 4.0).norm() / (limit / 4.0).norm();

    // fourth-order in x so that the (p, q) step dominates the defect
    let d_x = |f: &dyn Fn(usize) -> Complex64| (8.0 * (f(kp) - f(km)) - (f(kp2) - f(km2))) / (12.0 * hx);
    let dx_wp = d_x(&|k| wp(0, k));
    let dp_wx = (wx(1, 0, k0) - wx(-1, 0, k0)) / (2.0 * h);
    let dx_wq = d_x(&|k| wq(0, k));
    let dq_wx = (wx(0, 1, k0) - wx(0, -1, k0)) / (2.0 * h);
    let rel = |a: Complex64, b: Complex64| (a - b).norm() / a.norm().max(b.norm()).max(1e-300);
    StencilDefects { x, symplectic, closure_pq, closure_xp: rel(dx_wp, dp_wx), closure_xq: rel(dx_wq, dq_wx) }
}

fn defects_for_step(
    m: &MonodromyData,
    st: &StokesData,
    xs: &[f64],
    h: f64,
    opts: &ClosureOptions,
    limit: Complex64,
) -> Result<Vec<StencilDefects>> {
    let h_abs = absolute_step(st, h);
    check_margin(st, m.eta, h_abs)?;
    let mut stops: Vec<f64> = xs.iter().flat_map(|&x| (-2..=2).map(move |k| x * (1.0 + k as f64 * opts.hx))).collect();
    stops.sort_by(f64::total_cmp);
    stops.dedup();
    if stops[0] < opts.x0 {
        return Err(Error::InvalidInput(format!("closure points must lie above the seed point {}", opts.x0)));
    }
    let grid = solve_grid(m, st, h_abs, &stops, opts)?;
    Ok(xs.iter().map(|&x| stencil_defects(&grid, &stops, x, x * opts.hx, h_abs, limit)).collect())
}

/// Closure and symplectic defects of ω at the points `xs`, at steps h and h/2.
pub fn closure_check(xs: &[f64], m: &MonodromyData, h: f64) -> Result<ClosureReport> {
    closure_check_with(xs, m, &ClosureOptions { h, ..Default::default() })
}

pub fn closure_check_with(xs: &[f64], m: &MonodromyData, opts: &ClosureOptions) -> Result<ClosureReport> {
    let xs = sort_points(xs)?;
    if xs.is_empty() {
        return Err(Error::InvalidInput("closure check needs at least one x".to_string()));
    }
    let st = stokes_from_monodromy(m)?;
    let limit = cauchy_bracket(m)?;
    let at_h = defects_for_step(m, &st, &xs, opts.h, opts, limit)?;
    let at_half_h = defects_for_step(m, &st, &xs, opts.h / 2.0, opts, limit)?;

    let sens = sensitivities_with(m, &xs, &SensitivityOptions { h: FORM_STEP, tol: opts.tol, x0: opts.x0 })?;
    let bracket: Vec<Complex64> = sens.iter().map(|s| s.x * s.u_px * s.u_q - s.x * s.u_qx * s.u_p).collect();
    let b0 = bracket[0];
    let bracket_drift = bracket.iter().map(|b| (b - b0).norm() / b0.norm()).fold(0.0, f64::max);
    let bracket_limit_defect = bracket.iter().map(|b| (b - limit).norm() / limit.norm()).fold(0.0, f64::max);

    let max_defect = at_h.iter().map(StencilDefects::max).fold(0.0, f64::max);
    let mut log_sum = 0.0;
    let mut count = 0;
    for (a, b) in at_h.iter().zip(&at_half_h) {
        for (da, db) in [
            (a.symplectic, b.symplectic),
            (a.closure_pq, b.closure_pq),
            (a.closure_xp, b.closure_xp),
            (a.closure_xq, b.closure_xq),
        ] {
            if da > 0.0 && db > 0.0 {
                log_sum += (da / db).ln();
                count += 1;
            }
        }
    }
    let shrink_factor = if count > 0 { (log_sum / count as f64).exp() } else { f64::NAN };
    Ok(ClosureReport {
        sigma: m.sigma,
        eta: m.eta,
        h: opts.h,
        tol: opts.tol,
        at_h,
        at_half_h,
        bracket,
        bracket_limit: limit,
        bracket_drift,
        bracket_limit_defect,
        max_defect,
        shrink_factor,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GeneratingFunctionValue {
    #[serde(with = "complex")]
    pub sigma: Complex64,
    #[serde(with = "complex")]
    pub nu: Complex64,
    #[serde(with = "complex")]
    pub eta: Complex64,
    #[serde(with = "complex")]
    pub w: Complex64,
}

/// 𝒲 at explicit (σ, η, ν) on principal branches:
/// 8π²𝒲 = Li₂(−e^{2πi(σ+η−iν/2)}) + Li₂(−e^{−2πi(σ+η+iν/2)}) − 4π²η² + π²ν².
pub fn generating_function_at(sigma: Complex64, eta: Complex64, nu: Complex64) -> Complex64 {
    let s = sigma + eta;
    let l1 = dilog(-(2.0 * PI * I * (s - I * nu / 2.0)).exp());
    let l2 = dilog(-(-2.0 * PI * I * (s + I * nu / 2.0)).exp());
    (l1 + l2 - 4.0 * PI * PI * eta * eta + PI * PI * nu * nu) / (8.0 * PI * PI)
}

const CONTINUATION_STEPS: usize = 256;

/// ρ and 𝒲 at (σ, η) on branches continued from the normalization region.
/// On the real axis with σ + η > 1/2 the ratio in ρ sits on the negative
/// real axis and Li₂(−e^{−2πi(σ+η+iν/2)}) has crossed its cut; both are continued through Im(σ+η) > 0 from the side
/// σ + η < 1/2. Complex data are reached along the segment from (Re σ, Re η),
/// tracking arg of the ρ ratio and cut crossings of the two Li₂ arguments.
pub fn continued_rho_w(s: Complex64, e: Complex64) -> (Complex64, Complex64) {
    let point = |t: f64| {
        let (ss, ee) = (Complex64::new(s.re, t * s.im), Complex64::new(e.re, t * e.im));
        let nu = ((2.0 * PI * ee).sin() / (2.0 * PI * ss).sin()).ln() / PI;
        let r = (2.0 * PI * (ss + ee)).sin() / (2.0 * PI * ee).sin();
        let z1 = -(2.0 * PI * I * (ss + ee - I * nu / 2.0)).exp();
        let z2 = -(-2.0 * PI * I * (ss + ee + I * nu / 2.0)).exp();
        (r, [z1, z2])
    };
    let (r0, z0) = point(0.0);
    let past_line = s.re + e.re > 0.5;
    let mut arg_r = if past_line { (-r0).arg() - PI } else { r0.arg() };
    let mut crossings = [0i32, i32::from(past_line)];
    let mut log_z = [z0[0].ln(), z0[1].ln()];
    let (mut r_prev, mut z_prev) = (r0, z0);
    if s.im != 0.0 || e.im != 0.0 {
        for k in 1..=CONTINUATION_STEPS {
            let (r, z) = point(k as f64 / CONTINUATION_STEPS as f64);
            arg_r += (r / r_prev).arg();
            for j in 0..2 {
                let (a, b) = (z_prev[j], z[j]);
                if (a.im < 0.0) != (b.im < 0.0) {
                    let x = a.re - a.im * (b.re - a.re) / (b.im - a.im);
                    if x > 1.0 {
                        crossings[j] += if a.im < 0.0 { -1 } else { 1 };
                    }
                }
                log_z[j] += (b / a).ln();
            }
            r_prev = r;
            z_prev = z;
        }
    }
    let (r, z) = (r_prev, z_prev);
    let rho = I / (4.0 * PI) * Complex64::new(r.norm().ln(), arg_r);
    let nu = ((2.0 * PI * e).sin() / (2.0 * PI * s).sin()).ln() / PI;
    let li = (0..2).map(|j| dilog(z[j]) + 2.0 * PI * I * crossings[j] as f64 * log_z[j]).sum::<Complex64>();
    let w = (li - 4.0 * PI * PI * e * e + PI * PI * nu * nu) / (8.0 * PI * PI);
    (rho, w)
}

/// η with sin 2πη = e^{πν} sin 2πσ: the principal inverse sine, or, given a
/// hint, whichever of η and 1/2 − η lies nearer to it.
pub fn eta_from_sigma_nu(sigma: Complex64, nu: Complex64, hint: Option<Complex64>) -> Result<MonodromyData> {
    let fail = || Error::BranchResolution { sigma, nu };
    let z = (PI * nu).exp() * (2.0 * PI * sigma).sin();
    let e0 = z.asin() / (2.0 * PI);
    let mut candidates = vec![e0, 0.5 - e0];
    if let Some(h) = hint {
        candidates.sort_by(|a, b| (a - h).norm().total_cmp(&(b - h).norm()));
    }
    for eta in candidates {
        let m = MonodromyData::new(sigma, eta);
        if cauchy_from_monodromy(&m).is_err() {
            continue;
        }
        let back = nu_from_monodromy(&m).map_err(|_| fail())?;
        if (back - nu).norm() <= 1e-9 * (1.0 + nu.norm()) {
            return Ok(m);
        }
    }
    Err(fail())
}

pub fn generating_function(sigma: Complex64, nu: Complex64) -> Result<GeneratingFunctionValue> {
    generating_function_with_hint(sigma, nu, None)
}

pub fn generating_function_with_hint(
    sigma: Complex64,
    nu: Complex64,
    eta_hint: Option<Complex64>,
) -> Result<GeneratingFunctionValue> {
    let m = eta_from_sigma_nu(sigma, nu, eta_hint)?;
    Ok(GeneratingFunctionValue { sigma, nu, eta: m.eta, w: continued_rho_w(sigma, m.eta).1 })
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct GradientCheck {
    #[serde(with = "complex")]
    pub dw_dsigma: Complex64,
    #[serde(with = "complex")]
    pub dw_dnu: Complex64,
    #[serde(with = "complex")]
    pub eta: Complex64,
    #[serde(with = "complex")]
    pub i_rho: Complex64,
    pub sigma_defect: f64,
    pub nu_defect: f64,
}

/// ∂𝒲/∂σ and ∂𝒲/∂ν by Richardson-extrapolated central differences, against
/// η and iρ.
pub fn generating_function_gradient(sigma: Complex64, nu: Complex64, h: f64) -> Result<GradientCheck> {
    let center = generating_function(sigma, nu)?;
    let w = |s: Complex64, n: Complex64| -> Result<Complex64> {
        Ok(generating_function_with_hint(s, n, Some(center.eta))?.w)
    };
    let diff = |ds: f64, dn: f64| -> Result<Complex64> {
        let d = |k: f64| -> Result<Complex64> {
            Ok((w(sigma + k * ds, nu + k * dn)? - w(sigma - k * ds, nu - k * dn)?) / (2.0 * k * (ds + dn)))
        };
        let (d1, d2) = (d(1.0)?, d(0.5)?);
        Ok((4.0 * d2 - d1) / 3.0)
    };
    let dw_dsigma = diff(h, 0.0)?;
    let dw_dnu = diff(0.0, h)?;
    rho_from_monodromy(&MonodromyData::new(sigma, center.eta))?;
    let rho = continued_rho_w(sigma, center.eta).0;
    Ok(GradientCheck {
        dw_dsigma,
        dw_dnu,
        eta: center.eta,
        i_rho: I * rho,
        sigma_defect: (dw_dsigma - center.eta).norm(),
        nu_defect: (dw_dnu - I * rho).norm(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn trivial_point_form() {
        let m = MonodromyData::real(0.25, 0.25);
        let s = omega_at(2.0, &m).unwrap();
        assert!(s.omega_x.norm() < 1e-13);
        assert!(s.omega_p.norm().is_finite() && s.omega_q.norm().is_finite());
        let a = omega_asymptotic_infty(80.0, &m).unwrap();
        for z in [a.dx, a.dp, a.dq] {
            assert!(z.norm() < 1e-10, "{a:?}");
        }
        let z = omega_asymptotic_zero(0.01, &CauchyData::new(c(0.0, 0.0), c(0.0, 0.0))).unwrap();
        assert!(z.dx.norm() == 0.0);
    }

    #[test]
    fn form_x_component_is_log_tau_derivative_shifted() {
        // ω_x = d ln τ/dx − x/4 = −H/4 − x/4
        let (x, u, ux) = (1.7, c(0.3, -0.1), c(0.2, 0.05));
        let h = crate::tau::hamiltonian(x, u, ux).h;
        assert!((omega_x(x, u, ux) - (-h / 4.0 - x / 4.0)).norm() < 1e-15);
    }

    #[test]
    fn generating_function_relation_and_gradient() {
        let m = MonodromyData::real(0.3, 0.15);
        let nu = nu_from_monodromy(&m).unwrap();
        let g = generating_function(m.sigma, nu).unwrap();
        assert!((g.eta - m.eta).norm() < 1e-13);
        let lhs = 8.0 * PI * PI * g.w;
        let s = g.sigma + g.eta;
        let rhs = dilog(-(2.0 * PI * I * (s - I * nu / 2.0)).exp()) + dilog(-(-2.0 * PI * I * (s + I * nu / 2.0)).exp())
            - 4.0 * PI * PI * g.eta * g.eta
            + PI * PI * nu * nu;
        assert!((lhs - rhs).norm() < 1e-12);
        let gr = generating_function_gradient(m.sigma, nu, 1e-5).unwrap();
        assert!(gr.sigma_defect < 1e-7 && gr.nu_defect < 1e-7, "{gr:?}");
    }

    #[test]
    fn hint_selects_reflected_root() {
        let g = generating_function_with_hint(c(0.3, 0.0), c(0.0, 0.0), Some(c(0.22, 0.0))).unwrap();
        assert!((g.eta - c(0.2, 0.0)).norm() < 1e-13, "{g:?}");
        let g = generating_function(c(0.3, 0.0), c(0.0, 0.0)).unwrap();
        assert!((g.eta - c(0.2, 0.0)).norm() < 1e-13 || (g.eta - c(0.3, 0.0)).norm() < 1e-13);
    }

    #[test]
    fn bracket_limit_matches_trajectory_value() {
        let m = MonodromyData::real(0.3, 0.15);
        let lim = cauchy_bracket(&m).unwrap();
        let s = sensitivities_with(&m, &[2.0], &SensitivityOptions { h: FORM_STEP, ..Default::default() }).unwrap();
        let b = 2.0 * s[0].u_px * s[0].u_q - 2.0 * s[0].u_qx * s[0].u_p;
        assert!((b - lim).norm() < 1e-6 * lim.norm(), "{b} vs {lim}");
    }

    #[test]
    fn small_x_form_matches_sample() {
        let m = MonodromyData::real(0.3, 0.15);
        let cd = cauchy_from_monodromy(&m).unwrap();
        let x = 0.004;
        let s = omega_at(x, &m).unwrap();
        let z = omega_asymptotic_zero(x, &cd).unwrap();
        let im_a = cd.alpha.im.abs();
        assert!((s.omega_x - z.dx).norm() < 10.0 * x.powf(1.0 - im_a), "{} vs {}", s.omega_x, z.dx);
        assert!((s.omega_p - z.dp).norm() < 10.0 * x.powf(2.0 - im_a) * x.ln().abs());
    }
}
