//! Python bindings. Complex arguments and results are Python `complex`.
//! Parameters outside the admissible set raise `ValueError`; numerical
//! failures raise `ArithmeticError`.

use num_complex::Complex64;
use p3tau::mbform;
use p3tau::monodromy::{self as md, CauchyData, MonodromyData};
use p3tau::ode::{integrate_with, IntegrateOptions};
use p3tau::tau::{self, Method};
use p3tau::{specfun, Error};
use pyo3::exceptions::{PyArithmeticError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::PyDict;

fn err(e: Error) -> PyErr {
    if e.is_validation() {
        PyValueError::new_err(e.to_string())
    } else {
        PyArithmeticError::new_err(e.to_string())
    }
}

fn point(sigma: Complex64, eta: Complex64) -> MonodromyData {
    MonodromyData::new(sigma, eta)
}

/// Result of one ln(C∞/C0) evaluation.
#[pyclass(frozen, get_all, skip_from_py_object)]
#[derive(Clone)]
pub struct TauRatio {
    pub log_ratio: Complex64,
    pub error_estimate: f64,
    pub method: String,
}

#[pymethods]
impl TauRatio {
    fn __repr__(&self) -> String {
        format!("TauRatio(log_ratio={}, error_estimate={:e}, method='{}')", self.log_ratio, self.error_estimate, self.method)
    }
}

impl From<tau::TauRatioResult> for TauRatio {
    fn from(r: tau::TauRatioResult) -> Self {
        let method = match r.method {
            Method::Quadrature => "quadrature",
            Method::Action => "action",
            Method::ClosedForm => "closed_form",
        };
        TauRatio { log_ratio: r.log_ratio, error_estimate: r.error_estimate, method: method.into() }
    }
}

#[pyfunction]
fn validate(sigma: Complex64, eta: Complex64) -> Vec<(String, f64, bool)> {
    md::validate(&point(sigma, eta)).checks.into_iter().map(|c| (c.name, c.margin, c.passed)).collect()
}

/// (α, β) from (σ, η).
#[pyfunction]
fn cauchy_from_monodromy(sigma: Complex64, eta: Complex64) -> PyResult<(Complex64, Complex64)> {
    let c = md::cauchy_from_monodromy(&point(sigma, eta)).map_err(err)?;
    Ok((c.alpha, c.beta))
}

/// (σ, η) from (α, β).
#[pyfunction]
fn cauchy_to_monodromy(alpha: Complex64, beta: Complex64) -> PyResult<(Complex64, Complex64)> {
    let m = md::cauchy_to_monodromy(&CauchyData::new(alpha, beta)).map_err(err)?;
    Ok((m.sigma, m.eta))
}

/// Derived parameters α, β, p, q, ν, b₊, b₋ and, when defined, ρ.
#[pyfunction]
fn connect<'py>(py: Python<'py>, sigma: Complex64, eta: Complex64) -> PyResult<Bound<'py, PyDict>> {
    let m = point(sigma, eta);
    let c = md::cauchy_from_monodromy(&m).map_err(err)?;
    let st = md::stokes_from_monodromy(&m).map_err(err)?;
    let a = md::amplitudes_from_monodromy(&m).map_err(err)?;
    let d = PyDict::new(py);
    d.set_item("alpha", c.alpha)?;
    d.set_item("beta", c.beta)?;
    d.set_item("p", st.p)?;
    d.set_item("q", st.q)?;
    d.set_item("nu", a.nu)?;
    d.set_item("b_plus", a.b_plus)?;
    d.set_item("b_minus", a.b_minus)?;
    d.set_item("rho", md::rho_from_monodromy(&m).ok().map(|r| r.rho))?;
    Ok(d)
}

/// ln(C∞/C0) by `method`: "closed_form", "quadrature" or "action".
#[pyfunction]
#[pyo3(signature = (sigma, eta, method = "closed_form", t0 = tau::DEFAULT_T0, t1 = tau::DEFAULT_T1, tol = 1e-12))]
fn log_tau_ratio(
    py: Python<'_>,
    sigma: Complex64,
    eta: Complex64,
    method: &str,
    t0: f64,
    t1: f64,
    tol: f64,
) -> PyResult<TauRatio> {
    let m = point(sigma, eta);
    let r = py.detach(|| match method {
        "closed_form" => Ok(tau::log_tau_ratio_closed_form(&m)),
        "quadrature" => Ok(tau::log_tau_ratio_quadrature(&m, t0, t1, tol)),
        "action" => Ok(tau::log_tau_ratio_action(&m, t0, t1, tol)),
        _ => Err(()),
    });
    match r {
        Ok(r) => r.map(TauRatio::from).map_err(err),
        Err(()) => Err(PyValueError::new_err(format!("unknown method {method:?}"))),
    }
}

/// χ by the closed form and from the closed-form ratio.
#[pyfunction]
fn chi(sigma: Complex64, eta: Complex64) -> PyResult<(Complex64, Complex64)> {
    let m = point(sigma, eta);
    Ok((tau::chi_constant(&m).map_err(err)?, tau::chi_from_ratio(&m).map_err(err)?))
}

/// Samples (x, u, u_x) of the solution with Cauchy data (α, β) at `xs`.
#[pyfunction]
#[pyo3(signature = (alpha, beta, xs, tol = 1e-12))]
fn solve(
    py: Python<'_>,
    alpha: Complex64,
    beta: Complex64,
    xs: Vec<f64>,
    tol: f64,
) -> PyResult<Vec<(f64, Complex64, Complex64)>> {
    let x1 = xs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if !x1.is_finite() {
        return Err(PyValueError::new_err("xs must be a nonempty list of finite points"));
    }
    let opts = IntegrateOptions { tol, stops: xs.clone(), record_steps: false, ..Default::default() };
    let t = py.detach(|| integrate_with(&CauchyData::new(alpha, beta), x1, &opts)).map_err(err)?;
    xs.iter()
        .map(|&x| {
            t.sample_at(x)
                .map(|s| (s.x, s.u, s.ux))
                .ok_or_else(|| PyValueError::new_err(format!("x = {x} is outside the integration range")))
        })
        .collect()
}

/// Closure defects of the one-form; returns a dict of summary figures.
#[pyfunction]
#[pyo3(signature = (sigma, eta, xs = vec![1.0, 5.0, 20.0], h = 5e-4))]
fn closure_check<'py>(
    py: Python<'py>,
    sigma: Complex64,
    eta: Complex64,
    xs: Vec<f64>,
    h: f64,
) -> PyResult<Bound<'py, PyDict>> {
    let m = point(sigma, eta);
    let r = py.detach(|| mbform::closure_check(&xs, &m, h)).map_err(err)?;
    let d = PyDict::new(py);
    d.set_item("max_defect", r.max_defect)?;
    d.set_item("shrink_factor", r.shrink_factor)?;
    d.set_item("bracket_drift", r.bracket_drift)?;
    d.set_item("bracket_limit_defect", r.bracket_limit_defect)?;
    d.set_item("defects", r.at_h.iter().map(|s| (s.x, s.max())).collect::<Vec<_>>())?;
    Ok(d)
}

/// 𝒲(σ, ν) and the resolved η.
#[pyfunction]
fn generating_function(sigma: Complex64, nu: Complex64) -> PyResult<(Complex64, Complex64)> {
    let g = mbform::generating_function(sigma, nu).map_err(err)?;
    Ok((g.w, g.eta))
}

/// Finite-difference (∂𝒲/∂σ, ∂𝒲/∂ν) next to the expected (η, iρ).
#[pyfunction]
#[pyo3(signature = (sigma, nu, h = 1e-5))]
fn generating_function_gradient(
    sigma: Complex64,
    nu: Complex64,
    h: f64,
) -> PyResult<((Complex64, Complex64), (Complex64, Complex64))> {
    let g = mbform::generating_function_gradient(sigma, nu, h).map_err(err)?;
    Ok(((g.dw_dsigma, g.dw_dnu), (g.eta, g.i_rho)))
}

#[pyfunction]
fn log_gamma(z: Complex64) -> PyResult<Complex64> {
    specfun::log_gamma(z).map_err(err)
}

#[pyfunction]
fn log_barnes_g(z: Complex64) -> PyResult<Complex64> {
    specfun::log_barnes_g(z).map_err(err)
}

/// log(G(1+z)/G(1−z)).
#[pyfunction]
fn log_g_hat(z: Complex64) -> PyResult<Complex64> {
    specfun::log_g_hat(z).map_err(err)
}

#[pyfunction]
fn dilog(z: Complex64) -> Complex64 {
    specfun::dilog(z)
}

/// Runs the acceptance suite: list of (id, name, passed, worst, limit, detail).
#[pyfunction]
fn run_acceptance(py: Python<'_>) -> Vec<(u8, String, bool, f64, f64, String)> {
    py.detach(p3tau::acceptance::run_all)
        .into_iter()
        .map(|o| (o.id, o.name.to_string(), o.passed, o.worst, o.limit, o.detail))
        .collect()
}

#[pymodule]
fn p3tau_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add("__version__", env!("CARGO_PKG_VERSION"))?;
    m.add_class::<TauRatio>()?;
    m.add_function(wrap_pyfunction!(validate, m)?)?;
    m.add_function(wrap_pyfunction!(cauchy_from_monodromy, m)?)?;
    m.add_function(wrap_pyfunction!(cauchy_to_monodromy, m)?)?;
    m.add_function(wrap_pyfunction!(connect, m)?)?;
    m.add_function(wrap_pyfunction!(log_tau_ratio, m)?)?;
    m.add_function(wrap_pyfunction!(chi, m)?)?;
    m.add_function(wrap_pyfunction!(solve, m)?)?;
    m.add_function(wrap_pyfunction!(closure_check, m)?)?;
    m.add_function(wrap_pyfunction!(generating_function, m)?)?;
    m.add_function(wrap_pyfunction!(generating_function_gradient, m)?)?;
    m.add_function(wrap_pyfunction!(log_gamma, m)?)?;
    m.add_function(wrap_pyfunction!(log_barnes_g, m)?)?;
    m.add_function(wrap_pyfunction!(log_g_hat, m)?)?;
    m.add_function(wrap_pyfunction!(dilog, m)?)?;
    m.add_function(wrap_pyfunction!(run_acceptance, m)?)?;
    Ok(())
}
