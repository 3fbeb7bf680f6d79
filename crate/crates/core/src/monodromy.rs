//! Algebraic maps among Cauchy data (α, β), monodromy data (σ, η), Stokes
//! multipliers (p, q), large-x amplitudes (b₊, b₋), ν and ρ.

use crate::error::{Error, Result};
use crate::records::complex;
use crate::specfun::log_gamma;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

/// Margins at or below this are treated as violations.
pub const VALIDITY_MARGIN: f64 = 1e-10;
const DEGENERATE_SIN: f64 = 1e-14;

const I: Complex64 = Complex64 { re: 0.0, im: 1.0 };

/// Small-x data: u ≈ α ln x + β.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CauchyData {
    #[serde(with = "complex")]
    pub alpha: Complex64,
    #[serde(with = "complex")]
    pub beta: Complex64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MonodromyData {
    #[serde(with = "complex")]
    pub sigma: Complex64,
    #[serde(with = "complex")]
    pub eta: Complex64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StokesData {
    #[serde(with = "complex")]
    pub p: Complex64,
    #[serde(with = "complex")]
    pub q: Complex64,
}

/// Large-x data: u ≈ b₊ e^{ix} x^{iν−1/2} + b₋ e^{−ix} x^{−iν−1/2}.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AsymptoticData {
    #[serde(with = "complex")]
    pub b_plus: Complex64,
    #[serde(with = "complex")]
    pub b_minus: Complex64,
    #[serde(with = "complex")]
    pub nu: Complex64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RhoValue {
    #[serde(with = "complex")]
    pub rho: Complex64,
}

impl MonodromyData {
    pub fn new(sigma: Complex64, eta: Complex64) -> Self {
        MonodromyData { sigma, eta }
    }

    pub fn real(sigma: f64, eta: f64) -> Self {
        MonodromyData::new(Complex64::new(sigma, 0.0), Complex64::new(eta, 0.0))
    }
}

impl CauchyData {
    pub fn new(alpha: Complex64, beta: Complex64) -> Self {
        CauchyData { alpha, beta }
    }
}

impl StokesData {
    pub fn new(p: Complex64, q: Complex64) -> Self {
        StokesData { p, q }
    }
}

fn sin2pi(z: Complex64) -> Complex64 {
    (2.0 * PI * z).sin()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ValidityCheck {
    pub name: String,
    pub margin: f64,
    pub passed: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ValidityReport {
    pub checks: Vec<ValidityCheck>,
    pub all_passed: bool,
}

impl ValidityReport {
    pub fn first_failure(&self) -> Option<&ValidityCheck> {
        self.checks.iter().find(|c| !c.passed)
    }

    fn into_result(self) -> Result<()> {
        match self.first_failure() {
            None => Ok(()),
            Some(c) => Err(Error::Domain { check: c.name.clone(), margin: c.margin }),
        }
    }
}

// Distance from z to {iy : |y| ≥ 2}.
fn distance_to_imaginary_rays(z: Complex64) -> f64 {
    if z.im.abs() >= 2.0 {
        z.re.abs()
    } else {
        z.re.hypot(2.0 - z.im.abs())
    }
}

// Distance from z to (−∞, −1].
fn distance_to_left_ray(z: Complex64) -> f64 {
    if z.re <= -1.0 {
        z.im.abs()
    } else {
        (z + 1.0).norm()
    }
}

/// Reports each admissibility inequality with its margin.
pub fn validate(m: &MonodromyData) -> ValidityReport {
    let mut checks = Vec::new();
    let mut push = |name: &str, margin: f64| {
        let margin = if margin.is_nan() { f64::NEG_INFINITY } else { margin };
        checks.push(ValidityCheck { name: name.to_string(), margin, passed: margin > VALIDITY_MARGIN });
    };
    let finite = m.sigma.re.is_finite()
        && m.sigma.im.is_finite()
        && m.eta.re.is_finite()
        && m.eta.im.is_finite();
    push("finite sigma and eta", if finite { f64::INFINITY } else { f64::NEG_INFINITY });

    push("0 < Re sigma < 1/2", m.sigma.re.min(0.5 - m.sigma.re));

    let s_eta = sin2pi(m.eta);
    push("sin 2 pi eta != 0", s_eta.norm());

    let ratio = s_eta / sin2pi(m.sigma);
    push("|arg(sin 2 pi eta / sin 2 pi sigma)| < pi/2", PI / 2.0 - ratio.arg().abs());

    if s_eta.norm() >= DEGENERATE_SIN {
        let st = stokes_unchecked(m);
        let pq = st.p * st.q;
        push("1 + pq != 0", (1.0 + pq).norm());
        push("p + q outside (-i inf, -2i] U [2i, +i inf)", distance_to_imaginary_rays(st.p + st.q));
        push("pq outside (-inf, -1]", distance_to_left_ray(pq));
    }
    let all_passed = checks.iter().all(|c| c.passed);
    ValidityReport { checks, all_passed }
}

fn check(m: &MonodromyData) -> Result<()> {
    validate(m).into_result()
}

/// log Γ(1−2σ) − log Γ(2σ).
pub(crate) fn log_gamma_ratio(sigma: Complex64) -> Result<Complex64> {
    Ok(log_gamma(1.0 - 2.0 * sigma)? - log_gamma(2.0 * sigma)?)
}

pub fn cauchy_from_monodromy(m: &MonodromyData) -> Result<CauchyData> {
    check(m)?;
    let (s, e) = (m.sigma, m.eta);
    let alpha = I * (2.0 - 8.0 * s);
    let beta = -PI + 4.0 * PI * e - alpha * 8f64.ln() - 2.0 * I * log_gamma_ratio(s)?;
    Ok(CauchyData { alpha, beta })
}

pub fn cauchy_to_monodromy(c: &CauchyData) -> Result<MonodromyData> {
    let margin = 2.0 - c.alpha.im.abs();
    if !(margin > VALIDITY_MARGIN) {
        return Err(Error::Domain { check: "|Im alpha| < 2".to_string(), margin });
    }
    let a = c.alpha;
    let sigma = 0.25 + I * a / 8.0;
    let lg = log_gamma(0.5 - I * a / 4.0)? - log_gamma(0.5 + I * a / 4.0)?;
    let eta = 0.25 + (c.beta + a * 8f64.ln()) / (4.0 * PI) + I / (2.0 * PI) * lg;
    let m = MonodromyData { sigma, eta };
    check(&m)?;
    Ok(m)
}

fn stokes_unchecked(m: &MonodromyData) -> StokesData {
    let s_eta = sin2pi(m.eta);
    StokesData {
        p: -I * sin2pi(m.sigma + m.eta) / s_eta,
        q: I * sin2pi(m.sigma - m.eta) / s_eta,
    }
}

pub fn stokes_from_monodromy(m: &MonodromyData) -> Result<StokesData> {
    let s = sin2pi(m.eta).norm();
    if !(s >= DEGENERATE_SIN) {
        return Err(Error::DegenerateEta(s));
    }
    Ok(stokes_unchecked(m))
}

/// Inverse of `stokes_from_monodromy`. (p, q) fix η only modulo 1/2; the
/// admissible representative nearest `eta_hint` is returned.
pub fn monodromy_from_stokes(st: &StokesData, eta_hint: Complex64) -> Result<MonodromyData> {
    let sigma = (I * (st.p + st.q) / 2.0).acos() / (2.0 * PI);
    let s_sigma = sin2pi(sigma);
    if s_sigma.norm() < DEGENERATE_SIN {
        return Err(Error::Domain { check: "sin 2 pi sigma != 0".to_string(), margin: s_sigma.norm() });
    }
    let cot = I * (st.p - st.q) / (2.0 * s_sigma);
    let base = (PI / 2.0 - cot.atan()) / (2.0 * PI);
    // η + 1/2 flips the sign of sin 2πη, so at most one of two neighbouring
    // representatives is admissible; the hint picks among integer shifts.
    let k0 = ((eta_hint - base).re * 2.0).round();
    let mut candidates: Vec<MonodromyData> = [k0 - 1.0, k0, k0 + 1.0]
        .iter()
        .map(|k| MonodromyData { sigma, eta: base + k / 2.0 })
        .collect();
    candidates.sort_by(|a, b| (a.eta - eta_hint).norm().total_cmp(&(b.eta - eta_hint).norm()));
    let mut last = None;
    for m in candidates {
        match check(&m) {
            Ok(()) => return Ok(m),
            Err(e) => last = Some(e),
        }
    }
    Err(last.expect("three candidates checked"))
}

pub fn nu_from_monodromy(m: &MonodromyData) -> Result<Complex64> {
    let s = sin2pi(m.eta).norm();
    if !(s >= DEGENERATE_SIN) {
        return Err(Error::DegenerateEta(s));
    }
    let ratio = sin2pi(m.eta) / sin2pi(m.sigma);
    let arg = ratio.arg().abs();
    if !(arg < PI / 2.0) {
        return Err(Error::BranchViolation(arg));
    }
    Ok(ratio.ln() / PI)
}

pub fn amplitudes_from_monodromy(m: &MonodromyData) -> Result<AsymptoticData> {
    let nu = nu_from_monodromy(m)?;
    let s_eta = sin2pi(m.eta);
    let pre = (2.0 * PI).powf(-0.5);
    let ln2 = 2f64.ln();
    let b_plus = -(PI * nu / 2.0 - I * PI / 4.0).exp()
        * ((1.0 + 2.0 * I * nu) * ln2).exp()
        * pre
        * log_gamma(1.0 - I * nu)?.exp()
        * sin2pi(m.sigma - m.eta)
        / s_eta;
    let b_minus = -(PI * nu / 2.0 + I * PI / 4.0).exp()
        * ((1.0 - 2.0 * I * nu) * ln2).exp()
        * pre
        * log_gamma(1.0 + I * nu)?.exp()
        * sin2pi(m.sigma + m.eta)
        / s_eta;
    Ok(AsymptoticData { b_plus, b_minus, nu })
}

pub fn rho_from_monodromy(m: &MonodromyData) -> Result<RhoValue> {
    let num = sin2pi(m.sigma + m.eta);
    if !(num.norm() >= DEGENERATE_SIN) {
        return Err(Error::LogSingularity(num.norm()));
    }
    let s_eta = sin2pi(m.eta);
    if !(s_eta.norm() >= DEGENERATE_SIN) {
        return Err(Error::DegenerateEta(s_eta.norm()));
    }
    Ok(RhoValue { rho: I / (4.0 * PI) * (num / s_eta).ln() })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn close(a: Complex64, b: Complex64, tol: f64) -> bool {
        (a - b).norm() <= tol
    }

    const GENERIC: (f64, f64) = (0.3, 0.15);

    #[test]
    fn normalization_point_maps_to_zero() {
        let m = MonodromyData::real(0.25, 0.25);
        let cd = cauchy_from_monodromy(&m).unwrap();
        assert!(close(cd.alpha, c(0.0, 0.0), 1e-15));
        assert!(close(cd.beta, c(0.0, 0.0), 1e-14));
        let st = stokes_from_monodromy(&m).unwrap();
        assert!(st.p.norm() < 1e-15 && st.q.norm() < 1e-15);
        assert!(nu_from_monodromy(&m).unwrap().norm() < 1e-15);
        let amp = amplitudes_from_monodromy(&m).unwrap();
        assert!(amp.b_plus.norm() < 1e-15 && amp.b_minus.norm() < 1e-15);
        assert!(matches!(rho_from_monodromy(&m), Err(Error::LogSingularity(_))));
        assert!(validate(&m).all_passed);
    }

    #[test]
    fn generic_point_matches_high_precision_values() {
        let m = MonodromyData::real(GENERIC.0, GENERIC.1);
        let cd = cauchy_from_monodromy(&m).unwrap();
        assert!(close(cd.alpha, c(0.0, -0.4), 1e-15));
        assert!(close(cd.beta, c(-1.256_637_061_435_917_3, 0.034_888_697_406_836_637), 1e-13));
        let st = stokes_from_monodromy(&m).unwrap();
        assert!(close(st.p, c(0.0, -0.381_966_011_250_105_15), 1e-14));
        assert!(close(st.q, c(0.0, 1.0), 1e-14));
        let nu = nu_from_monodromy(&m).unwrap();
        assert!(close(nu, c(-0.051_487_759_049_185_756, 0.0), 1e-14));
        let amp = amplitudes_from_monodromy(&m).unwrap();
        assert!(close(amp.b_plus, c(-0.464_201_343_481_926_35, 0.568_949_844_442_291_55), 1e-13));
        assert!(close(amp.b_minus, c(-0.177_309_135_586_731_41, -0.217_319_502_682_989_91), 1e-13));
        let rho = rho_from_monodromy(&m).unwrap();
        assert!(close(rho.rho, c(0.0, -0.076_587_240_632_508_28), 1e-14));
    }

    #[test]
    fn nu_agrees_with_stokes_form() {
        let m = MonodromyData::real(GENERIC.0, GENERIC.1);
        let st = stokes_from_monodromy(&m).unwrap();
        let nu = nu_from_monodromy(&m).unwrap();
        let alt = -(1.0 + st.p * st.q).ln() / (2.0 * PI);
        assert!(close(nu, alt, 1e-12));
    }

    #[test]
    fn nu_vanishes_when_sines_coincide() {
        let nu = nu_from_monodromy(&MonodromyData::real(0.3, 0.2)).unwrap();
        assert!(nu.norm() < 1e-14);
    }

    #[test]
    fn alpha_is_linear_in_sigma() {
        let cd = CauchyData::new(c(0.0, -0.4), c(0.3, 0.0));
        let m = cauchy_to_monodromy(&cd).unwrap();
        assert!(close(m.sigma, c(0.3, 0.0), 1e-15));
        let m0 = cauchy_to_monodromy(&CauchyData::new(c(0.0, 0.0), c(0.0, 0.0))).unwrap();
        assert!(close(m0.sigma, c(0.25, 0.0), 1e-15));
        assert!(close(m0.eta, c(0.25, 0.0), 1e-15));
    }

    #[test]
    fn conjugation_relation_for_real_data() {
        // measured, not assumed: for real (σ, η), b₋ / conj(b₊) is real
        for (s, e) in [(0.3, 0.15), (0.2, 0.1), (0.35, 0.12)] {
            let amp = amplitudes_from_monodromy(&MonodromyData::real(s, e)).unwrap();
            let r = amp.b_minus / amp.b_plus.conj();
            assert!(r.im.abs() < 1e-13 * r.norm(), "{r}");
        }
    }

    #[test]
    fn rho_identity_six() {
        let m = MonodromyData::new(c(0.28, 0.02), c(0.17, -0.03));
        let nu = nu_from_monodromy(&m).unwrap();
        let rho = rho_from_monodromy(&m).unwrap().rho;
        for sg in [1.0, -1.0] {
            let lhs = 2.0 * (PI * (m.sigma + m.eta + sg * I * nu / 2.0)).cos();
            let rhs = (I * PI * (sg * m.sigma - sg * m.eta - I * nu / 2.0 - 4.0 * rho)).exp();
            assert!(close(lhs, rhs, 1e-10));
        }
    }

    #[test]
    fn validate_reports_failures() {
        let r = validate(&MonodromyData::real(0.25, 0.5));
        assert!(!r.all_passed);
        assert_eq!(r.first_failure().unwrap().name, "sin 2 pi eta != 0");
        let m = MonodromyData::new(c(0.25, 0.3), c(0.25, 0.0));
        let r = validate(&m);
        let nu = nu_from_monodromy(&m).map(|n| n.im.abs()).unwrap_or(1.0);
        assert_eq!(r.all_passed, nu < 0.5);
        let bad = MonodromyData::real(0.6, 0.1);
        assert!(matches!(cauchy_from_monodromy(&bad), Err(Error::Domain { .. })));
    }

    #[test]
    fn branch_violation_detected() {
        // arg(sin 2πη / sin 2πσ) pushed past π/2
        let m = MonodromyData::new(c(0.25, 0.0), c(0.25, 0.0) + c(0.0, 0.0) + c(-0.3, 0.3));
        let ratio = (2.0 * PI * m.eta).sin() / (2.0 * PI * m.sigma).sin();
        if ratio.arg().abs() >= PI / 2.0 {
            assert!(matches!(nu_from_monodromy(&m), Err(Error::BranchViolation(_))));
        } else {
            assert!(nu_from_monodromy(&m).unwrap().im.abs() < 0.5);
        }
    }

    #[test]
    fn stokes_round_trip_respects_hint() {
        let m = MonodromyData::real(0.3, 0.15);
        let st = stokes_from_monodromy(&m).unwrap();
        let back = monodromy_from_stokes(&st, m.eta).unwrap();
        assert!(close(back.sigma, m.sigma, 1e-13));
        assert!(close(back.eta, m.eta, 1e-13));
        let m2 = MonodromyData::new(c(0.27, 0.03), c(1.12, -0.04));
        let st2 = stokes_from_monodromy(&m2).unwrap();
        let back2 = monodromy_from_stokes(&st2, c(1.3, 0.0)).unwrap();
        assert!(close(back2.eta, m2.eta, 1e-12));
    }
}
