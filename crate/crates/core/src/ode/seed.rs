//! Small-x expansion u = α ln x + β + w(x).
//!
//! w is a double series Σ c[n][k] x^{2n} x^{ikα} (n ≥ 1, |k| ≤ n, k ≡ n mod 2),
//! obtained by iterating θ²w = −x² sin(α ln x + β + w) with θ = x d/dx.

use crate::error::{Error, Result};
use crate::monodromy::CauchyData;
use num_complex::Complex64;

const I: Complex64 = Complex64 { re: 0.0, im: 1.0 };

/// Default truncation order in x².
pub const DEFAULT_ORDER: usize = 4;
/// Largest admissible seed point.
pub const MAX_SEED_X: f64 = 0.01;
/// Seeds with |w(x0)| above this are rejected.
pub const MAX_CORRECTION: f64 = 1e-4;

// Coefficients indexed [n][k + order].
#[derive(Debug, Clone)]
struct DoubleSeries {
    order: usize,
    c: Vec<Vec<Complex64>>,
}

impl DoubleSeries {
    fn zero(order: usize) -> Self {
        DoubleSeries { order, c: vec![vec![Complex64::new(0.0, 0.0); 2 * order + 1]; order + 1] }
    }

    fn constant(order: usize, v: Complex64) -> Self {
        let mut s = Self::zero(order);
        s.c[0][order] = v;
        s
    }

    fn mul(&self, other: &DoubleSeries) -> DoubleSeries {
        let n_max = self.order;
        let off = n_max as isize;
        let mut out = Self::zero(n_max);
        for n1 in 0..=n_max {
            for (k1, a) in self.c[n1].iter().enumerate() {
                if *a == Complex64::new(0.0, 0.0) {
                    continue;
                }
                for n2 in 0..=(n_max - n1) {
                    for (k2, b) in other.c[n2].iter().enumerate() {
                        let k = k1 as isize + k2 as isize - off;
                        if (0..=2 * off).contains(&k) {
                            out.c[n1 + n2][k as usize] += a * b;
                        }
                    }
                }
            }
        }
        out
    }

    fn scale(&self, s: Complex64) -> DoubleSeries {
        let mut out = self.clone();
        out.c.iter_mut().flatten().for_each(|v| *v *= s);
        out
    }

    fn add(&self, other: &DoubleSeries) -> DoubleSeries {
        let mut out = self.clone();
        for (row, orow) in out.c.iter_mut().zip(&other.c) {
            for (v, o) in row.iter_mut().zip(orow) {
                *v += o;
            }
        }
        out
    }

    // exp(s·w) truncated at the series order; w has no n = 0 part.
    fn exp_of(&self, s: Complex64) -> DoubleSeries {
        let mut term = Self::constant(self.order, Complex64::new(1.0, 0.0));
        let mut sum = term.clone();
        let sw = self.scale(s);
        for j in 1..=self.order {
            term = term.mul(&sw).scale(Complex64::new(1.0 / j as f64, 0.0));
            sum = sum.add(&term);
        }
        sum
    }

    // multiplication by X^{±1} where X = x^{iα}
    fn shift_k(&self, dk: isize) -> DoubleSeries {
        let mut out = Self::zero(self.order);
        let len = 2 * self.order as isize + 1;
        for (n, row) in self.c.iter().enumerate() {
            for (k, v) in row.iter().enumerate() {
                let nk = k as isize + dk;
                if (0..len).contains(&nk) {
                    out.c[n][nk as usize] = *v;
                }
            }
        }
        out
    }

    // multiplication by x²
    fn shift_n(&self) -> DoubleSeries {
        let mut out = Self::zero(self.order);
        for n in (1..=self.order).rev() {
            out.c[n] = self.c[n - 1].clone();
        }
        out
    }
}

/// Truncated small-x series of a solution with given Cauchy data.
#[derive(Debug, Clone)]
pub struct SeedSeries {
    pub cauchy: CauchyData,
    order: usize,
    w: DoubleSeries,
}

impl SeedSeries {
    pub fn new(cauchy: CauchyData, order: usize) -> Result<Self> {
        if !(cauchy.alpha.im.abs() < 2.0) {
            return Err(Error::Domain {
                check: "|Im alpha| < 2".to_string(),
                margin: 2.0 - cauchy.alpha.im.abs(),
            });
        }
        let order = order.max(1);
        let (alpha, beta) = (cauchy.alpha, cauchy.beta);
        let off = order as isize;
        let e_pos = (I * beta).exp();
        let e_neg = (-I * beta).exp();
        let mut w = DoubleSeries::zero(order);
        for _ in 0..order {
            // sin(αL + β + w) = (e^{iβ} X e^{iw} − e^{−iβ} X^{−1} e^{−iw}) / 2i
            let plus = w.exp_of(I).shift_k(1).scale(e_pos);
            let minus = w.exp_of(-I).shift_k(-1).scale(e_neg);
            let sin = plus.add(&minus.scale(Complex64::new(-1.0, 0.0))).scale(1.0 / (2.0 * I));
            let mut rhs = sin.shift_n().scale(Complex64::new(-1.0, 0.0));
            for (n, row) in rhs.c.iter_mut().enumerate() {
                for (k, v) in row.iter_mut().enumerate() {
                    if n == 0 {
                        *v = Complex64::new(0.0, 0.0);
                        continue;
                    }
                    let kk = k as isize - off;
                    let lam = 2.0 * n as f64 + I * alpha * kk as f64;
                    *v /= lam * lam;
                }
            }
            w = rhs;
        }
        Ok(SeedSeries { cauchy, order, w })
    }

    pub fn order(&self) -> usize {
        self.order
    }

    /// (w, θw, θ²w) at x.
    fn correction(&self, x: f64) -> (Complex64, Complex64, Complex64) {
        let lx = x.ln();
        let off = self.order as isize;
        let mut w = Complex64::new(0.0, 0.0);
        let mut tw = w;
        let mut ttw = w;
        for (n, row) in self.w.c.iter().enumerate() {
            for (k, v) in row.iter().enumerate() {
                if *v == Complex64::new(0.0, 0.0) {
                    continue;
                }
                let lam = 2.0 * n as f64 + I * self.cauchy.alpha * (k as isize - off) as f64;
                let term = v * (lam * lx).exp();
                w += term;
                tw += lam * term;
                ttw += lam * lam * term;
            }
        }
        (w, tw, ttw)
    }

    /// |w(x)|, the size of the correction to α ln x + β.
    pub fn correction_size(&self, x: f64) -> f64 {
        self.correction(x).0.norm()
    }

    /// (u, u_x) at x.
    pub fn eval(&self, x: f64) -> (Complex64, Complex64) {
        let (w, tw, _) = self.correction(x);
        let a = self.cauchy.alpha;
        (a * x.ln() + self.cauchy.beta + w, (a + tw) / x)
    }

    /// |u″ + u′/x + sin u| of the truncated series at x.
    pub fn residual(&self, x: f64) -> f64 {
        let (w, _, ttw) = self.correction(x);
        let u = self.cauchy.alpha * x.ln() + self.cauchy.beta + w;
        ((ttw + x * x * u.sin()) / (x * x)).norm()
    }
}

/// Initial values (u, u_x) at x0 from the small-x series.
pub fn seed_series(c: &CauchyData, x0: f64) -> Result<(Complex64, Complex64)> {
    let s = checked_series(c, x0, DEFAULT_ORDER)?;
    Ok(s.eval(x0))
}

pub(crate) fn checked_series(c: &CauchyData, x0: f64, order: usize) -> Result<SeedSeries> {
    if !(x0 > 0.0 && x0 <= MAX_SEED_X) {
        return Err(Error::InvalidInput(format!("seed point x0 = {x0} must lie in (0, {MAX_SEED_X}]")));
    }
    let s = SeedSeries::new(*c, order)?;
    let correction = s.correction_size(x0);
    if !(correction <= MAX_CORRECTION) {
        return Err(Error::SeedTooLarge { x0, correction });
    }
    Ok(s)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::monodromy::{cauchy_from_monodromy, MonodromyData};

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn trivial_data_gives_zero() {
        let (u, ux) = seed_series(&CauchyData::new(c(0.0, 0.0), c(0.0, 0.0)), 1e-3).unwrap();
        assert!(u.norm() < 1e-300 && ux.norm() < 1e-300);
    }

    #[test]
    fn first_order_terms_match_closed_expression() {
        let cd = CauchyData::new(c(0.1, -0.3), c(0.4, 0.2));
        let s = SeedSeries::new(cd, 1).unwrap();
        let x: f64 = 2e-3;
        let (a, b) = (cd.alpha, cd.beta);
        let want = I * (I * b).exp() / (2.0 * (2.0 + I * a).powi(2)) * (x.ln() * (2.0 + I * a)).exp()
            - I * (-I * b).exp() / (2.0 * (2.0 - I * a).powi(2)) * (x.ln() * (2.0 - I * a)).exp();
        assert!((s.correction(x).0 - want).norm() < 1e-18);
    }

    #[test]
    fn zero_alpha_leading_term() {
        // α = 0: w = −(sin β / 4) x² + O(x⁴)
        let beta = c(0.7, 0.1);
        let s = SeedSeries::new(CauchyData::new(c(0.0, 0.0), beta), 1).unwrap();
        let x = 1e-3;
        let want = -beta.sin() / 4.0 * x * x;
        assert!((s.correction(x).0 - want).norm() < 1e-18);
    }

    #[test]
    fn generic_residual_is_small() {
        let cd = cauchy_from_monodromy(&MonodromyData::real(0.3, 0.15)).unwrap();
        let s = SeedSeries::new(cd, DEFAULT_ORDER).unwrap();
        assert!(s.residual(1e-3) < 1e-10, "{}", s.residual(1e-3));
        let cd = cauchy_from_monodromy(&MonodromyData::real(0.35, 0.1)).unwrap();
        let s = SeedSeries::new(cd, DEFAULT_ORDER).unwrap();
        assert!(s.residual(1e-3) < 1e-10, "{}", s.residual(1e-3));
    }

    #[test]
    fn first_order_alone_is_not_enough_at_large_alpha() {
        let cd = cauchy_from_monodromy(&MonodromyData::real(0.35, 0.1)).unwrap();
        let s1 = SeedSeries::new(cd, 1).unwrap();
        let s4 = SeedSeries::new(cd, DEFAULT_ORDER).unwrap();
        assert!(s4.residual(1e-3) < 1e-3 * s1.residual(1e-3));
    }

    #[test]
    fn seed_point_checks() {
        let cd = CauchyData::new(c(0.0, 0.0), c(0.5, 0.0));
        assert!(matches!(seed_series(&cd, 0.02), Err(Error::InvalidInput(_))));
        let big = CauchyData::new(c(0.0, -1.9), c(0.0, 0.0));
        assert!(matches!(seed_series(&big, 0.01), Err(Error::SeedTooLarge { .. })));
    }
}
