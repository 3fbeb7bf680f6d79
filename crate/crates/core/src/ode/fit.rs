//! Least-squares extraction of the large-x amplitudes b± from a trajectory.
//!
//! Model for u on the window:
//!
//!   b₊ e₊ (1 + c₊/x) + b₋ e₋ (1 + c₋/x) − (b₊³/48) e^{3ix} x^{3iν−3/2} − (b₋³/48) e^{−3ix} x^{−3iν−3/2}
//!
//! with e± = e^{±ix} x^{±iν−1/2}, c₊ = (i/8)(6ν² + 4iν − 1), c₋ = −(i/8)(6ν² − 4iν − 1).
//! u and u_x are fitted jointly; the cubic terms are handled by fixed-point
//! iteration on (b₊, b₋).

use super::Trajectory;
use crate::error::{Error, Result};
use crate::monodromy::AsymptoticData;
use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use serde::Serialize;

const I: Complex64 = Complex64 { re: 0.0, im: 1.0 };
pub const MIN_WINDOW_START: f64 = 30.0;
pub const MAX_CONDITION: f64 = 1e12;

#[derive(Debug, Clone, Serialize)]
pub struct AmplitudeFit {
    pub amplitudes: AsymptoticData,
    /// Largest absolute misfit over the fitted u and u_x samples.
    pub residual: f64,
    /// Condition number of the normal matrix.
    pub condition: f64,
    pub samples: usize,
}

struct Basis {
    f: [Vec<Complex64>; 2],
    cubic: [Vec<Complex64>; 2],
}

fn basis(xs: &[f64], nu: Complex64) -> Basis {
    let cp = I / 8.0 * (6.0 * nu * nu + 4.0 * I * nu - 1.0);
    let cm = -I / 8.0 * (6.0 * nu * nu - 4.0 * I * nu - 1.0);
    let n = xs.len();
    let mut f = [Vec::with_capacity(2 * n), Vec::with_capacity(2 * n)];
    let mut cubic = [Vec::with_capacity(2 * n), Vec::with_capacity(2 * n)];
    // u rows first, then u_x rows
    for deriv in [false, true] {
        for &x in xs {
            let lx = x.ln();
            for (idx, sg) in [1.0, -1.0].into_iter().enumerate() {
                let c = if idx == 0 { cp } else { cm };
                let e = (sg * I * x + (sg * I * nu - 0.5) * lx).exp();
                let k = sg * I + (sg * I * nu - 0.5) / x;
                let val = e * (1.0 + c / x);
                let dval = e * (k * (1.0 + c / x) - c / (x * x));
                f[idx].push(if deriv { dval } else { val });
                let e3 = (3.0 * sg * I * x + (3.0 * sg * I * nu - 1.5) * lx).exp();
                let k3 = 3.0 * sg * I + (3.0 * sg * I * nu - 1.5) / x;
                cubic[idx].push(if deriv { e3 * k3 } else { e3 });
            }
        }
    }
    Basis { f, cubic }
}

/// Fits (b₊, b₋) on the samples of `t` inside `window`.
pub fn fit_amplitudes(t: &Trajectory, nu: Complex64, window: (f64, f64)) -> Result<AmplitudeFit> {
    let (lo, hi) = window;
    let (a, b) = t.x_range();
    if !(lo >= MIN_WINDOW_START) {
        return Err(Error::InvalidInput(format!("fit window must start at x >= {MIN_WINDOW_START}, got {lo}")));
    }
    if !(lo < hi && lo >= a && hi <= b * (1.0 + 1e-12)) {
        return Err(Error::InvalidInput(format!(
            "fit window [{lo}, {hi}] is not inside the trajectory range [{a}, {b}]"
        )));
    }
    let samples = t.samples_in(lo, hi);
    if samples.len() < 4 {
        return Err(Error::InvalidInput(format!("fit window [{lo}, {hi}] holds only {} samples", samples.len())));
    }
    let xs: Vec<f64> = samples.iter().map(|s| s.x).collect();
    let data: Vec<Complex64> = samples.iter().map(|s| s.u).chain(samples.iter().map(|s| s.ux)).collect();
    let bs = basis(&xs, nu);
    let rows = data.len();
    let mat = DMatrix::from_fn(rows, 2, |r, c| bs.f[c][r]);
    let svd = mat.clone().svd(true, true);
    let smax = svd.singular_values.max();
    let smin = svd.singular_values.min();
    let condition = if smin > 0.0 { (smax / smin).powi(2) } else { f64::INFINITY };
    if !(condition <= MAX_CONDITION) {
        return Err(Error::IllConditioned(condition));
    }

    let mut coef = [Complex64::new(0.0, 0.0); 2];
    for _ in 0..30 {
        let rhs = DVector::from_fn(rows, |r, _| {
            data[r] + coef[0].powi(3) / 48.0 * bs.cubic[0][r] + coef[1].powi(3) / 48.0 * bs.cubic[1][r]
        });
        let sol = svd.solve(&rhs, 0.0).map_err(|e| Error::InvalidInput(e.to_string()))?;
        let next = [sol[0], sol[1]];
        let change = (next[0] - coef[0]).norm() + (next[1] - coef[1]).norm();
        coef = next;
        if change <= 1e-15 * (1.0 + coef[0].norm() + coef[1].norm()) {
            break;
        }
    }
    let mut residual: f64 = 0.0;
    for r in 0..rows {
        let model = coef[0] * bs.f[0][r] + coef[1] * bs.f[1][r]
            - coef[0].powi(3) / 48.0 * bs.cubic[0][r]
            - coef[1].powi(3) / 48.0 * bs.cubic[1][r];
        residual = residual.max((model - data[r]).norm());
    }
    Ok(AmplitudeFit {
        amplitudes: AsymptoticData { b_plus: coef[0], b_minus: coef[1], nu },
        residual,
        condition,
        samples: samples.len(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::monodromy::CauchyData;
    use crate::ode::Sample;

    fn synthetic(bp: Complex64, bm: Complex64, nu: Complex64) -> Trajectory {
        let xs: Vec<f64> = (0..400).map(|k| 120.0 + 0.2 * k as f64).collect();
        let bsis = basis(&xs, nu);
        let n = xs.len();
        let model = |r: usize| {
            bp * bsis.f[0][r] + bm * bsis.f[1][r]
                - bp.powi(3) / 48.0 * bsis.cubic[0][r]
                - bm.powi(3) / 48.0 * bsis.cubic[1][r]
        };
        let samples = (0..n)
            .map(|i| Sample {
                x: xs[i],
                u: model(i),
                ux: model(i + n),
                tau_integral: Complex64::new(0.0, 0.0),
                action_integral: Complex64::new(0.0, 0.0),
            })
            .collect();
        Trajectory {
            samples,
            cauchy: CauchyData::new(Complex64::new(0.0, 0.0), Complex64::new(0.0, 0.0)),
            tol: 0.0,
            x0: 120.0,
            residual_bound: 0.0,
            accepted_steps: 0,
            rejected_steps: 0,
        }
    }

    #[test]
    fn recovers_synthetic_amplitudes() {
        let bp = Complex64::new(0.2, -0.1);
        let nu = Complex64::new(0.03, 0.01);
        let bm = -4.0 * nu / bp;
        let t = synthetic(bp, bm, nu);
        let fit = fit_amplitudes(&t, nu, (120.0, 199.0)).unwrap();
        assert!((fit.amplitudes.b_plus - bp).norm() < 1e-8);
        assert!((fit.amplitudes.b_minus - bm).norm() < 1e-8);
        assert!(fit.condition < 10.0);
    }

    #[test]
    fn zero_trajectory_gives_zero_amplitudes() {
        let zero = Complex64::new(0.0, 0.0);
        let t = synthetic(zero, zero, zero);
        let fit = fit_amplitudes(&t, zero, (120.0, 199.0)).unwrap();
        assert_eq!(fit.amplitudes.b_plus, zero);
        assert_eq!(fit.amplitudes.b_minus, zero);
    }

    #[test]
    fn window_checks() {
        let zero = Complex64::new(0.0, 0.0);
        let t = synthetic(zero, zero, zero);
        assert!(fit_amplitudes(&t, zero, (20.0, 150.0)).is_err());
        assert!(fit_amplitudes(&t, zero, (130.0, 250.0)).is_err());
    }
}
