use p3tau::monodromy::*;
use p3tau::specfun::{dilog, log_barnes_g, log_g_hat, log_gamma};
use p3tau::tau::hamiltonian;
use p3tau::Complex64;
use proptest::prelude::*;
use std::f64::consts::PI;

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

fn valid_point() -> impl Strategy<Value = MonodromyData> {
    (0.05..0.45f64, -0.03..0.03f64, 0.05..0.45f64, -0.03..0.03f64)
        .prop_map(|(a, b, d, e)| MonodromyData::new(c(a, b), c(d, e)))
        .prop_filter("admissible", |m| validate(m).all_passed && (m.sigma + m.eta - 0.5).norm() > 0.02)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn cauchy_round_trip(m in valid_point()) {
        let back = cauchy_to_monodromy(&cauchy_from_monodromy(&m).unwrap()).unwrap();
        prop_assert!((back.sigma - m.sigma).norm() < 1e-12);
        prop_assert!((back.eta - m.eta).norm() < 1e-12);
    }

    #[test]
    fn nu_relation(m in valid_point()) {
        let nu = nu_from_monodromy(&m).unwrap();
        let lhs = (PI * nu).exp() * (2.0 * PI * m.sigma).sin();
        prop_assert!((lhs - (2.0 * PI * m.eta).sin()).norm() < 1e-12);
        prop_assert!(nu.im.abs() < 0.5);
    }

    #[test]
    fn stokes_product(m in valid_point()) {
        let st = stokes_from_monodromy(&m).unwrap();
        let want = ((2.0 * PI * m.sigma).sin() / (2.0 * PI * m.eta).sin()).powi(2);
        prop_assert!((1.0 + st.p * st.q - want).norm() < 1e-12);
        let back = monodromy_from_stokes(&st, m.eta).unwrap();
        prop_assert!((back.sigma - m.sigma).norm() < 1e-10 && (back.eta - m.eta).norm() < 1e-10);
    }

    #[test]
    fn amplitude_product(m in valid_point()) {
        let a = amplitudes_from_monodromy(&m).unwrap();
        prop_assert!((a.b_plus * a.b_minus + 4.0 * a.nu).norm() < 1e-10);
    }

    #[test]
    fn barnes_functional_equation(r in 0.0..4.9f64, t in -3.1..3.1f64) {
        let z = Complex64::from_polar(r, t);
        prop_assume!(!(z.re <= 0.0 && z.im.abs() < 0.1));
        let v = log_barnes_g(z + 1.0).unwrap() - log_gamma(z).unwrap() - log_barnes_g(z).unwrap();
        prop_assert!(v.norm() < 1e-11, "z = {z}: {v}");
    }

    #[test]
    fn dilog_reflection(x in 0.001..0.999f64, y in -0.3..0.3f64) {
        let z = c(x, y);
        let one = c(1.0, 0.0);
        let v = dilog(z) + dilog(one - z) - PI * PI / 6.0 + z.ln() * (one - z).ln();
        prop_assert!(v.norm() < 1e-11);
    }

    #[test]
    fn legendre_duplication(x in 0.1..6.0f64, y in -4.0..4.0f64) {
        let z = c(x, y);
        let v = log_gamma(2.0 * z).unwrap()
            - (log_gamma(z).unwrap() + log_gamma(z + 0.5).unwrap() + (2.0 * z - 1.0) * 2f64.ln() - 0.5 * PI.ln());
        prop_assert!(v.norm() < 1e-11);
    }

    #[test]
    fn dilog_barnes_bridge(x in 0.02..0.98f64, y in -0.2..0.2f64) {
        let z = c(x, y);
        let i = Complex64::i();
        let lhs = dilog((2.0 * PI * i * z).exp());
        let rhs = -2.0 * PI * i * log_g_hat(z).unwrap() - 2.0 * PI * i * z * ((PI * z).sin() / PI).ln()
            - PI * PI * z * (1.0 - z)
            + PI * PI / 6.0;
        prop_assert!((lhs - rhs).norm() < 1e-10);
    }

    #[test]
    fn hamiltonian_v_is_x_ux(x in 0.01..50.0f64, a in -2.0..2.0f64, b in -2.0..2.0f64) {
        let h = hamiltonian(x, c(a, 0.1 * b), c(b, -0.1 * a));
        prop_assert!((h.v - x * c(b, -0.1 * a)).norm() < 1e-14 * (1.0 + h.v.norm()));
    }
}
