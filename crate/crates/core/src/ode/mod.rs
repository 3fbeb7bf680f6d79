//! Integration of u″ + u′/x + sin u = 0 for complex u.
//!
//! The state carries, besides (u, u_x), two running integrals used by the
//! tau-function code:
//!
//! * `tau_integral`    ∫ [−x u_x²/8 + (x/4)(cos u − 1)] dx, i.e. ∫ (−H/4 − x/4)
//! * `action_integral` ∫ [−x u_x²/8 − (x/4)(cos u − 1)] dx, i.e. ∫ ((H − v u_x)/4 + x/4)
//!
//! both started at the seed point.

pub mod fit;
pub mod rkv98;
pub mod seed;
pub mod sensitivity;

use crate::error::{Error, Result};
use crate::monodromy::CauchyData;
use crate::records::complex;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::io::Write;

pub use fit::{fit_amplitudes, AmplitudeFit};
pub use seed::{seed_series, SeedSeries};
pub use sensitivity::{sensitivities, sensitivities_with, SensitivityOptions, SensitivitySample};

pub const DEFAULT_TOL: f64 = 1e-12;
pub const DEFAULT_X0: f64 = 1e-3;
pub const DEFAULT_IM_GUARD: f64 = 30.0;

const DIM: usize = 8;
type State = [f64; DIM];

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Sample {
    pub x: f64,
    #[serde(with = "complex")]
    pub u: Complex64,
    #[serde(with = "complex")]
    pub ux: Complex64,
    #[serde(with = "complex")]
    pub tau_integral: Complex64,
    #[serde(with = "complex")]
    pub action_integral: Complex64,
}

impl Sample {
    fn from_state(x: f64, y: &State) -> Self {
        Sample {
            x,
            u: Complex64::new(y[0], y[1]),
            ux: Complex64::new(y[2], y[3]),
            tau_integral: Complex64::new(y[4], y[5]),
            action_integral: Complex64::new(y[6], y[7]),
        }
    }
}

#[derive(Debug, Clone)]
pub struct IntegrateOptions {
    pub tol: f64,
    pub x0: f64,
    pub max_step: f64,
    pub im_guard: f64,
    pub max_steps: usize,
    pub seed_order: usize,
    /// Points at which the integrator lands exactly and records a sample.
    pub stops: Vec<f64>,
    /// Record every accepted step (otherwise only the stops and end points).
    pub record_steps: bool,
}

impl Default for IntegrateOptions {
    fn default() -> Self {
        IntegrateOptions {
            tol: DEFAULT_TOL,
            x0: DEFAULT_X0,
            max_step: 1.0,
            im_guard: DEFAULT_IM_GUARD,
            max_steps: 5_000_000,
            seed_order: seed::DEFAULT_ORDER,
            stops: Vec::new(),
            record_steps: true,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct Trajectory {
    pub samples: Vec<Sample>,
    pub cauchy: CauchyData,
    pub tol: f64,
    pub x0: f64,
    /// Largest embedded local-error estimate per unit step (per unit of ln x
    /// below x = 1) over all accepted steps.
    pub residual_bound: f64,
    pub accepted_steps: usize,
    pub rejected_steps: usize,
}

impl Trajectory {
    /// Sample recorded at x (up to rounding of the stop location).
    pub fn sample_at(&self, x: f64) -> Option<&Sample> {
        let i = self.samples.partition_point(|s| s.x < x - 1e-12 * x.abs().max(1.0));
        self.samples.get(i).filter(|s| (s.x - x).abs() <= 1e-12 * x.abs().max(1.0))
    }

    pub fn samples_in(&self, lo: f64, hi: f64) -> &[Sample] {
        let a = self.samples.partition_point(|s| s.x < lo);
        let b = self.samples.partition_point(|s| s.x <= hi);
        &self.samples[a..b]
    }

    pub fn last(&self) -> &Sample {
        self.samples.last().expect("trajectory has at least the seed sample")
    }

    pub fn x_range(&self) -> (f64, f64) {
        (self.samples[0].x, self.last().x)
    }

    /// CSV with columns x, re_u, im_u, re_ux, im_ux.
    pub fn write_csv<W: Write>(&self, w: W) -> std::io::Result<()> {
        let mut wr = csv::Writer::from_writer(w);
        wr.write_record(["x", "re_u", "im_u", "re_ux", "im_ux"])?;
        for s in &self.samples {
            wr.write_record(&[
                format!("{:.17e}", s.x),
                format!("{:.17e}", s.u.re),
                format!("{:.17e}", s.u.im),
                format!("{:.17e}", s.ux.re),
                format!("{:.17e}", s.ux.im),
            ])?;
        }
        wr.flush()
    }
}

fn rhs(x: f64, y: &State) -> State {
    let u = Complex64::new(y[0], y[1]);
    let ux = Complex64::new(y[2], y[3]);
    let uxx = -ux / x - u.sin();
    let kin = -x * ux * ux / 8.0;
    let pot = x / 4.0 * (u.cos() - 1.0);
    let l = kin + pot;
    let a = kin - pot;
    [ux.re, ux.im, uxx.re, uxx.im, l.re, l.im, a.re, a.im]
}

// One RKV98 step; returns (new state, embedded error vector).
fn rk_step(x: f64, y: &State, h: f64) -> (State, State) {
    use rkv98::{A, B_HIGH, B_LOW, C, STAGES};
    let mut k = [[0.0; DIM]; STAGES];
    k[0] = rhs(x, y);
    for s in 1..STAGES {
        let mut ys = *y;
        for (j, kj) in k.iter().enumerate().take(s) {
            let a = A[s][j];
            if a != 0.0 {
                for i in 0..DIM {
                    ys[i] += h * a * kj[i];
                }
            }
        }
        k[s] = rhs(x + C[s] * h, &ys);
    }
    let mut out = *y;
    let mut err = [0.0; DIM];
    for (s, ks) in k.iter().enumerate() {
        let bh = B_HIGH[s];
        let d = bh - B_LOW[s];
        for i in 0..DIM {
            out[i] += h * bh * ks[i];
            err[i] += h * d * ks[i];
        }
    }
    (out, err)
}

/// Integrates from the small-x seed at x0 to x1 with local error per unit
/// step at most `tol` (relative to max(1, |y|)). Below x = 1 the unit is one
/// unit of ln x.
pub fn integrate(c: &CauchyData, x0: f64, x1: f64, tol: f64) -> Result<Trajectory> {
    let opts = IntegrateOptions { tol, x0, ..Default::default() };
    integrate_with(c, x1, &opts)
}

pub fn integrate_with(c: &CauchyData, x1: f64, opts: &IntegrateOptions) -> Result<Trajectory> {
    let x0 = opts.x0;
    if !(x1 > x0) {
        return Err(Error::InvalidInput(format!("end point {x1} must exceed seed point {x0}")));
    }
    if !(opts.tol > 0.0) {
        return Err(Error::InvalidInput(format!("tolerance {} must be positive", opts.tol)));
    }
    let series = seed::checked_series(c, x0, opts.seed_order)?;
    let (u0, ux0) = series.eval(x0);
    let mut y: State = [u0.re, u0.im, ux0.re, ux0.im, 0.0, 0.0, 0.0, 0.0];
    let mut x = x0;

    let mut stops: Vec<f64> = opts.stops.iter().copied().filter(|s| *s > x0 && *s < x1).collect();
    stops.sort_by(f64::total_cmp);
    stops.dedup();
    stops.push(x1);
    let mut next_stop = 0;

    let mut samples = vec![Sample::from_state(x, &y)];
    let mut h = (1e-2 * x0).min(opts.max_step);
    let mut err_prev: f64 = 1e-4;
    let mut residual_bound: f64 = 0.0;
    let (mut accepted, mut rejected) = (0usize, 0usize);
    let (alpha, beta) = (0.7 / 8.0, 0.4 / 8.0);

    while next_stop < stops.len() {
        if accepted + rejected >= opts.max_steps {
            return Err(Error::MaxSteps(opts.max_steps));
        }
        let target = stops[next_stop];
        let mut step = h.min(opts.max_step);
        let landing = x + step >= target - 1e-13 * target;
        if landing {
            step = target - x;
        }
        if step < 1e-14 * x.max(1.0) && !landing {
            return Err(Error::StepUnderflow { x, h: step });
        }
        let (y_new, e) = rk_step(x, &y, step);
        // unit step in x for x ≥ 1, in ln x below
        let unit = step / x.min(1.0);
        let mut err: f64 = 0.0;
        let mut abs_err: f64 = 0.0;
        for i in 0..DIM {
            let scale = 1f64.max(y[i].abs()).max(y_new[i].abs());
            err = err.max(e[i].abs() / (unit * opts.tol * scale));
            abs_err = abs_err.max(e[i].abs() / unit);
        }
        if !err.is_finite() {
            err = 1e10;
        }
        if err <= 1.0 {
            accepted += 1;
            x = if landing { target } else { x + step };
            y = y_new;
            residual_bound = residual_bound.max(abs_err);
            let im_u = y[1].abs();
            if !(im_u <= opts.im_guard) || y.iter().any(|v| !v.is_finite()) {
                return Err(Error::Singularity { x, im_u });
            }
            if landing {
                next_stop += 1;
                samples.push(Sample::from_state(x, &y));
            } else if opts.record_steps {
                samples.push(Sample::from_state(x, &y));
            }
            let fac = 0.9 * err.max(1e-10).powf(-alpha) * err_prev.powf(beta);
            // after a truncated landing step keep the unconstrained proposal
            let grown = step * fac.clamp(0.2, 5.0);
            h = if landing { h.max(grown) } else { grown };
            err_prev = err.max(1e-4);
        } else {
            rejected += 1;
            h = step * (0.9 * err.powf(-1.0 / 8.0)).clamp(0.2, 1.0);
            if h < 1e-14 * x.max(1.0) {
                return Err(Error::StepUnderflow { x, h });
            }
        }
    }

    Ok(Trajectory {
        samples,
        cauchy: *c,
        tol: opts.tol,
        x0,
        residual_bound,
        accepted_steps: accepted,
        rejected_steps: rejected,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::monodromy::{cauchy_from_monodromy, nu_from_monodromy, MonodromyData};

    #[test]
    fn tableau_order_conditions() {
        use rkv98::{A, B_HIGH, B_LOW, C, STAGES};
        for (s, row) in A.iter().enumerate() {
            let sum: f64 = row.iter().sum();
            assert!((sum - C[s]).abs() < 1e-13, "row {s}");
        }
        for k in 0..=8 {
            let hi: f64 = (0..STAGES).map(|i| B_HIGH[i] * C[i].powi(k)).sum();
            assert!((hi - 1.0 / (k as f64 + 1.0)).abs() < 1e-13, "high k={k}");
        }
        for k in 0..=7 {
            let lo: f64 = (0..STAGES).map(|i| B_LOW[i] * C[i].powi(k)).sum();
            assert!((lo - 1.0 / (k as f64 + 1.0)).abs() < 1e-13, "low k={k}");
        }
        // b·A·c^k = 1/((k+1)(k+2))
        for k in 0..=7 {
            let mut v = 0.0;
            for i in 0..STAGES {
                let ac: f64 = (0..STAGES).map(|j| A[i][j] * C[j].powi(k)).sum();
                v += B_HIGH[i] * ac;
            }
            let want = 1.0 / ((k as f64 + 1.0) * (k as f64 + 2.0));
            assert!((v - want).abs() < 1e-12, "bAc k={k}");
        }
    }

    #[test]
    fn integrates_harmonic_limit_accurately() {
        // small real data: compare against a run at a much tighter tolerance
        let cd = cauchy_from_monodromy(&MonodromyData::real(0.3, 0.15)).unwrap();
        let a = integrate(&cd, 1e-3, 100.0, 1e-10).unwrap();
        let b = integrate(&cd, 1e-3, 100.0, 1e-13).unwrap();
        let d = (a.last().u - b.last().u).norm();
        assert!(d < 1e-8, "{d}");
        assert!(a.residual_bound <= 10.0 * 1e-10 * 40.0);
    }

    #[test]
    fn zero_solution_stays_zero() {
        let cd = CauchyData::new(Complex64::new(0.0, 0.0), Complex64::new(0.0, 0.0));
        let t = integrate(&cd, 1e-3, 100.0, 1e-12).unwrap();
        for s in &t.samples {
            assert!(s.u.norm() < 1e-12 && s.ux.norm() < 1e-12);
        }
    }

    #[test]
    fn stops_are_hit_exactly_and_x_increases() {
        let cd = cauchy_from_monodromy(&MonodromyData::real(0.3, 0.15)).unwrap();
        let opts = IntegrateOptions { stops: vec![1.0, 5.0, 2.5], record_steps: false, ..Default::default() };
        let t = integrate_with(&cd, 20.0, &opts).unwrap();
        let xs: Vec<f64> = t.samples.iter().map(|s| s.x).collect();
        assert_eq!(xs, vec![1e-3, 1.0, 2.5, 5.0, 20.0]);
        assert!(t.sample_at(2.5).is_some());
        assert!(t.sample_at(2.6).is_none());
    }

    #[test]
    fn large_x_envelope_is_bounded() {
        let m = MonodromyData::real(0.3, 0.15);
        let cd = cauchy_from_monodromy(&m).unwrap();
        let nu = nu_from_monodromy(&m).unwrap();
        let t = integrate(&cd, 1e-3, 200.0, 1e-12).unwrap();
        let scaled: Vec<f64> = t.samples_in(50.0, 200.0).iter().map(|s| s.u.norm() * s.x.sqrt()).collect();
        let max = scaled.iter().cloned().fold(0.0, f64::max);
        let min = scaled.iter().cloned().fold(f64::INFINITY, f64::min);
        assert!(max < 2.0 && max > 0.1, "{max}");
        // oscillatory: the envelope-scaled values do not stay away from their minimum
        assert!(min < 0.5 * max);
        assert!(nu.im.abs() < 1e-15);
    }

    #[test]
    fn singularity_guard_triggers() {
        let cd = CauchyData::new(Complex64::new(0.0, 0.0), Complex64::new(std::f64::consts::PI, 3.0));
        let opts = IntegrateOptions { im_guard: 3.5, ..Default::default() };
        let r = integrate_with(&cd, 50.0, &opts);
        assert!(matches!(r, Err(Error::Singularity { .. })), "{r:?}");
    }

    #[test]
    fn csv_export_has_header() {
        let cd = CauchyData::new(Complex64::new(0.0, 0.0), Complex64::new(0.1, 0.0));
        let t = integrate(&cd, 1e-3, 2.0, 1e-10).unwrap();
        let mut buf = Vec::new();
        t.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.starts_with("x,re_u,im_u,re_ux,im_ux\n"));
        assert_eq!(text.lines().count(), t.samples.len() + 1);
    }
}
