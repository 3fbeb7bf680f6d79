//! Numerics for the Painlevé III (radial sine-Gordon) connection problem.
//!
//! The crate integrates u″ + u′/x + sin u = 0 for complex u, evaluates the
//! tau-function connection constant ln(C∞/C0) by regularized quadrature and in
//! closed form, and checks the localized Malgrange–Bertola 1-form.

// `!(a >= b)` is deliberate throughout: it rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]
#![allow(clippy::excessive_precision, clippy::needless_range_loop)]

pub mod acceptance;
pub mod error;
pub mod mbform;
pub mod monodromy;
pub mod ode;
pub mod quadrature;
pub mod records;
pub mod specfun;
pub mod tau;

pub use error::{Error, Result};
pub use num_complex::Complex64;
