//! End-to-end verification suite. Each criterion returns an outcome with the
//! worst observed value against its limit.

use crate::error::Result;
use crate::mbform::{closure_check, generating_function_gradient, omega_infty_dx, omega_x};
use crate::monodromy::{amplitudes_from_monodromy, cauchy_from_monodromy, nu_from_monodromy, MonodromyData};
use crate::ode::{fit_amplitudes, integrate_with, IntegrateOptions, DEFAULT_TOL};
use crate::specfun::{dilog, log_barnes_g, log_g_hat, log_gamma};
use crate::tau::{
    chi_constant, chi_from_ratio, log_tau_ratio_closed_form, log_tau_ratio_numeric, DEFAULT_T0, DEFAULT_T1,
};
use num_complex::Complex64;
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};
use serde::Serialize;
use std::f64::consts::PI;
use std::time::Instant;

pub const GRID_SIGMA: [f64; 4] = [0.20, 0.25, 0.30, 0.35];
pub const GRID_ETA: [f64; 3] = [0.10, 0.15, 0.20];
const SEED: u64 = 20_240_601;

#[derive(Debug, Clone, Serialize)]
pub struct Outcome {
    pub id: u8,
    pub name: &'static str,
    pub passed: bool,
    /// Worst observed value of the checked quantity.
    pub worst: f64,
    pub limit: f64,
    pub detail: String,
}

impl Outcome {
    fn new(id: u8, name: &'static str, worst: f64, limit: f64, ok: bool, detail: String) -> Self {
        Outcome { id, name, passed: ok && worst.is_finite(), worst, limit, detail }
    }

    fn failed(id: u8, name: &'static str, limit: f64, err: impl std::fmt::Display) -> Self {
        Outcome { id, name, passed: false, worst: f64::NAN, limit, detail: format!("error: {err}") }
    }

    pub fn line(&self) -> String {
        format!(
            "[{}] {}. {}: worst {:.3e} (limit {:.1e}) {}",
            if self.passed { "PASS" } else { "FAIL" },
            self.id,
            self.name,
            self.worst,
            self.limit,
            self.detail
        )
    }
}

pub fn grid() -> Vec<MonodromyData> {
    GRID_SIGMA.iter().flat_map(|&s| GRID_ETA.iter().map(move |&e| MonodromyData::real(s, e))).collect()
}

fn wrap(id: u8, name: &'static str, limit: f64, f: impl FnOnce() -> Result<Outcome>) -> Outcome {
    f().unwrap_or_else(|e| Outcome::failed(id, name, limit, e))
}

/// Quadrature against the closed form on the grid.
pub fn theorem_reproduction() -> Outcome {
    let (name, limit) = ("closed form vs regularized quadrature", 1e-3);
    wrap(1, name, limit, || {
        let (mut worst, mut slowest) = (0.0f64, 0.0f64);
        for m in grid() {
            let start = Instant::now();
            let (q, _) = log_tau_ratio_numeric(&m, DEFAULT_T0, DEFAULT_T1, DEFAULT_TOL)?;
            slowest = slowest.max(start.elapsed().as_secs_f64());
            let cf = log_tau_ratio_closed_form(&m)?;
            worst = worst.max((q.log_ratio - cf.log_ratio).norm());
        }
        Ok(Outcome::new(1, name, worst, limit, worst <= limit && slowest <= 60.0, format!("12 grid points, slowest {slowest:.1}s")))
    })
}

pub fn normalization_point() -> Outcome {
    let (name, limit) = ("normalization point (1/4, 1/4)", 1e-8);
    wrap(2, name, limit, || {
        let m = MonodromyData::real(0.25, 0.25);
        let cf = log_tau_ratio_closed_form(&m)?.log_ratio.norm();
        let (q, _) = log_tau_ratio_numeric(&m, DEFAULT_T0, DEFAULT_T1, DEFAULT_TOL)?;
        let qn = q.log_ratio.norm();
        Ok(Outcome::new(2, name, qn, limit, cf <= 1e-12 && qn <= limit, format!("closed form {cf:.1e} (limit 1e-12)")))
    })
}

/// Amplitudes fitted on [120, 200] against the connection formulae; error
/// relative to |(b₊, b₋)|.
pub fn connection_formulae() -> Outcome {
    let (name, limit) = ("fitted large-x amplitudes vs connection formulae", 1e-4);
    wrap(3, name, limit, || {
        let mut worst = 0.0f64;
        for m in grid() {
            let c = cauchy_from_monodromy(&m)?;
            let amp = amplitudes_from_monodromy(&m)?;
            let t = integrate_with(&c, 200.0, &IntegrateOptions::default())?;
            let fit = fit_amplitudes(&t, amp.nu, (120.0, 200.0))?;
            let scale = amp.b_plus.norm().hypot(amp.b_minus.norm());
            let err = (fit.amplitudes.b_plus - amp.b_plus).norm().hypot((fit.amplitudes.b_minus - amp.b_minus).norm());
            worst = worst.max(err / scale);
        }
        Ok(Outcome::new(3, name, worst, limit, worst <= limit, "12 grid points".to_string()))
    })
}

/// |quadrature − action| against the sum of the two estimates; worst is the ratio.
pub fn action_equivalence() -> Outcome {
    let (name, limit) = ("action vs quadrature within combined estimates", 1.0);
    wrap(4, name, limit, || {
        let (mut worst, mut max_gap) = (0.0f64, 0.0f64);
        for m in grid() {
            let (q, a) = log_tau_ratio_numeric(&m, DEFAULT_T0, DEFAULT_T1, DEFAULT_TOL)?;
            let gap = (q.log_ratio - a.log_ratio).norm();
            max_gap = max_gap.max(gap);
            worst = worst.max(gap / (q.error_estimate + a.error_estimate));
        }
        Ok(Outcome::new(4, name, worst, limit, worst <= limit, format!("largest gap {max_gap:.1e}")))
    })
}

pub fn chi_identity() -> Outcome {
    let (name, limit) = ("chi closed form vs ratio route", 1e-10);
    wrap(5, name, limit, || {
        let start = Instant::now();
        let mut worst = 0.0f64;
        for m in grid() {
            worst = worst.max((chi_constant(&m)? - chi_from_ratio(&m)?).norm());
        }
        let secs = start.elapsed().as_secs_f64();
        Ok(Outcome::new(5, name, worst, limit, worst <= limit && secs < 1.0, "12 grid points".to_string()))
    })
}

pub fn form_closure() -> Outcome {
    let (name, limit) = ("Malgrange-Bertola closure and symplectic defects", 1e-5);
    wrap(6, name, limit, || {
        let r = closure_check(&[1.0, 5.0, 20.0], &MonodromyData::real(0.3, 0.15), crate::mbform::ClosureOptions::default().h)?;
        let worst = r.max_defect.max(r.bracket_limit_defect);
        let ok = worst <= limit && r.bracket_drift <= 1e-6 && (3.0..=5.0).contains(&r.shrink_factor);
        Ok(Outcome::new(
            6,
            name,
            worst,
            limit,
            ok,
            format!("shrink under halving {:.2}, bracket drift {:.1e}", r.shrink_factor, r.bracket_drift),
        ))
    })
}

/// Random valid (σ, ν): σ and η drawn inside the admissible strip, ν from them.
pub fn random_sigma_nu(n: usize, seed: u64) -> Vec<(Complex64, Complex64)> {
    let mut rng = StdRng::seed_from_u64(seed);
    let mut out = Vec::with_capacity(n);
    while out.len() < n {
        let s = Complex64::new(rng.random_range(0.05..0.45), rng.random_range(-0.02..0.02));
        let e = Complex64::new(rng.random_range(0.05..0.45), rng.random_range(-0.02..0.02));
        let m = MonodromyData::new(s, e);
        if (s + e - 0.5).norm() < 0.05 || cauchy_from_monodromy(&m).is_err() {
            continue;
        }
        if let Ok(nu) = nu_from_monodromy(&m) {
            // principal-branch η must reproduce the draw
            if crate::mbform::generating_function(s, nu).is_ok_and(|g| (g.eta - e).norm() < 1e-10) {
                out.push((s, nu));
            }
        }
    }
    out
}

pub fn generating_function_gradients() -> Outcome {
    let (name, limit) = ("generating function gradients", 1e-7);
    wrap(7, name, limit, || {
        let mut worst = 0.0f64;
        for (s, nu) in random_sigma_nu(20, SEED) {
            let g = generating_function_gradient(s, nu, 1e-5)?;
            worst = worst.max(g.sigma_defect).max(g.nu_defect);
        }
        Ok(Outcome::new(7, name, worst, limit, worst <= limit, "20 random points".to_string()))
    })
}

fn loglog_slope(points: &[(f64, f64)]) -> f64 {
    let n = points.len() as f64;
    let (sx, sy) = points.iter().fold((0.0, 0.0), |(a, b), (x, y)| (a + x.ln(), b + y.ln()));
    let (mx, my) = (sx / n, sy / n);
    let (num, den) = points
        .iter()
        .fold((0.0, 0.0), |(a, b), (x, y)| (a + (x.ln() - mx) * (y.ln() - my), b + (x.ln() - mx).powi(2)));
    num / den
}

/// Decay slope of the envelope of |ω_x − ω_x(asymptotic)| on [60, 200].
pub fn large_x_slope(m: &MonodromyData) -> Result<(f64, f64)> {
    let c = cauchy_from_monodromy(m)?;
    let amp = amplitudes_from_monodromy(m)?;
    let stops: Vec<f64> = (0..=2800).map(|k| 60.0 + 0.05 * k as f64).collect();
    let t = integrate_with(&c, 200.0, &IntegrateOptions { stops: stops.clone(), record_steps: false, ..Default::default() })?;
    let mut env = Vec::new();
    let mut lo = 60.0;
    while lo + PI <= 200.0 {
        let hi = lo + PI;
        let peak = t
            .samples_in(lo, hi)
            .iter()
            .map(|s| (omega_x(s.x, s.u, s.ux) - omega_infty_dx(s.x, &amp)).norm())
            .fold(0.0, f64::max);
        env.push(((lo + hi) / 2.0, peak));
        lo = hi;
    }
    Ok((loglog_slope(&env), -2.0 + 6.0 * amp.nu.im.abs()))
}

/// Slope of |u − α ln x − β| on [1e-3, 1e-2] from a solve seeded at 1e-6.
pub fn small_x_slope(m: &MonodromyData) -> Result<(f64, f64)> {
    let c = cauchy_from_monodromy(m)?;
    let stops: Vec<f64> = (0..=20).map(|k| 1e-3 * 10f64.powf(k as f64 / 20.0)).collect();
    let opts = IntegrateOptions { x0: 1e-6, stops: stops.clone(), record_steps: false, ..Default::default() };
    let t = integrate_with(&c, 1e-2, &opts)?;
    let pts: Vec<(f64, f64)> = stops
        .iter()
        .filter_map(|&x| t.sample_at(x))
        .map(|s| (s.x, (s.u - c.alpha * s.x.ln() - c.beta).norm()))
        .collect();
    Ok((loglog_slope(&pts), 2.0 - c.alpha.im.abs()))
}

pub fn asymptotic_orders() -> Outcome {
    let (name, limit) = ("asymptotic-order regressions", 0.3);
    wrap(8, name, limit, || {
        let m = MonodromyData::real(0.3, 0.15);
        let (large, large_want) = large_x_slope(&m)?;
        let (small, small_want) = small_x_slope(&m)?;
        let (dl, ds) = ((large - large_want).abs(), (small - small_want).abs());
        Ok(Outcome::new(
            8,
            name,
            dl,
            limit,
            dl <= 0.3 && ds <= 0.1,
            format!(
                "large-x slope {large:.3} (expected {large_want:.3}), small-x slope {small:.3} (expected {small_want:.3}, limit 0.1)"
            ),
        ))
    })
}

/// Identity residuals of the special functions on random samples.
pub fn special_function_identities(n: usize, seed: u64) -> SpecfunReport {
    let mut rng = StdRng::seed_from_u64(seed);
    let mut r = SpecfunReport::default();
    let per = n / 4;
    let one = Complex64::new(1.0, 0.0);
    for _ in 0..per {
        // |z| < 5 off the negative real axis
        let z = loop {
            let z = Complex64::new(rng.random_range(-5.0..5.0), rng.random_range(-5.0..5.0));
            if z.norm() < 5.0 && !(z.re <= 0.0 && z.im.abs() < 0.1) {
                break z;
            }
        };
        if let (Ok(a), Ok(b), Ok(c)) = (log_barnes_g(z + 1.0), log_gamma(z), log_barnes_g(z)) {
            r.barnes_functional = r.barnes_functional.max((a - b - c).norm());
        }
        let w = Complex64::new(rng.random_range(0.0..1.0), rng.random_range(-0.3..0.3));
        if w.norm() > 1e-3 && (one - w).norm() > 1e-3 {
            let v = dilog(w) + dilog(one - w) - PI * PI / 6.0 + w.ln() * (one - w).ln();
            r.dilog_reflection = r.dilog_reflection.max(v.norm());
        }
        let d = Complex64::new(rng.random_range(0.1..6.0), rng.random_range(-4.0..4.0));
        if let (Ok(a), Ok(b), Ok(c)) = (log_gamma(2.0 * d), log_gamma(d), log_gamma(d + 0.5)) {
            let v = a - (b + c + (2.0 * d - 1.0) * 2f64.ln() - 0.5 * PI.ln());
            r.legendre_duplication = r.legendre_duplication.max(v.norm());
        }
        let b = Complex64::new(rng.random_range(0.02..0.98), rng.random_range(-0.2..0.2));
        if let Ok(g) = log_g_hat(b) {
            let lhs = dilog((2.0 * PI * Complex64::i() * b).exp());
            let rhs = -2.0 * PI * Complex64::i() * g
                - 2.0 * PI * Complex64::i() * b * ((PI * b).sin() / PI).ln()
                - PI * PI * b * (1.0 - b)
                + PI * PI / 6.0;
            r.bridging = r.bridging.max((lhs - rhs).norm());
        }
        r.samples += 4;
    }
    r
}

#[derive(Debug, Clone, Default, Serialize)]
pub struct SpecfunReport {
    pub samples: usize,
    pub barnes_functional: f64,
    pub dilog_reflection: f64,
    pub legendre_duplication: f64,
    pub bridging: f64,
}

pub fn special_functions() -> Outcome {
    let (name, limit) = ("special-function identities", 1e-11);
    let start = Instant::now();
    let r = special_function_identities(10_000, SEED);
    let secs = start.elapsed().as_secs_f64();
    let worst = r.barnes_functional.max(r.dilog_reflection).max(r.legendre_duplication);
    let ok = worst <= limit && r.bridging <= 1e-10 && secs < 5.0;
    Outcome::new(
        9,
        name,
        worst,
        limit,
        ok,
        format!("{} samples, bridging identity {:.1e} (limit 1e-10)", r.samples, r.bridging),
    )
}

pub fn run_all() -> Vec<Outcome> {
    vec![
        theorem_reproduction(),
        normalization_point(),
        connection_formulae(),
        action_equivalence(),
        chi_identity(),
        form_closure(),
        generating_function_gradients(),
        asymptotic_orders(),
        special_functions(),
    ]
}
