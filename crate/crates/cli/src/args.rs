use clap::{Args, Parser, Subcommand, ValueEnum};
use p3tau::monodromy::{cauchy_to_monodromy, CauchyData, MonodromyData};
use p3tau::{Complex64, Error, Result};
use std::path::PathBuf;

/// Environment variable replacing the default tolerance.
pub const TOL_ENV: &str = "P3TAU_TOL";
pub const DEFAULT_TOL: f64 = 1e-12;

#[derive(Debug, Parser)]
#[command(name = "p3tau", version, about = "Tau-function connection constants for radial sine-Gordon (Painlevé III)")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    #[command(flatten)]
    pub out: OutputArgs,
}

#[derive(Debug, Args)]
pub struct OutputArgs {
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    pub format: Format,
    /// Write to this file instead of stdout.
    #[arg(long, short, global = true)]
    pub output: Option<PathBuf>,
    /// Add wall-clock runtime to the record (breaks bit-identical output).
    #[arg(long, global = true)]
    pub timing: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Derived parameters (α, β, p, q, ν, b±, ρ) and validity margins.
    Connect(PointArgs),
    /// Integrate the ODE and emit the trajectory.
    Solve {
        #[command(flatten)]
        point: PointArgs,
        /// Right end of the integration.
        #[arg(long, default_value_t = 20.0)]
        x1: f64,
        /// Seed point of the small-x series.
        #[arg(long, default_value_t = 1e-3)]
        x0: f64,
        /// Record only these points (comma separated) instead of every step.
        #[arg(long, value_delimiter = ',')]
        at: Vec<f64>,
    },
    /// ln(C∞/C0) by closed form, quadrature and action.
    Ratio(PointArgs),
    /// Run the acceptance suite.
    Verify,
    /// Closure and symplectic defects of the one-form.
    MbCheck {
        #[command(flatten)]
        point: PointArgs,
        #[arg(long, value_delimiter = ',', default_values_t = vec![1.0, 5.0, 20.0])]
        x: Vec<f64>,
        /// Relative (p, q) finite-difference step.
        #[arg(long, default_value_t = 5e-4)]
        h: f64,
    },
    /// χ constant by the closed form and from the closed-form ratio.
    Chi(PointArgs),
    /// Evaluate a grid read from a key=value file.
    Sweep {
        config: PathBuf,
    },
}

#[derive(Debug, Clone, Args)]
pub struct PointArgs {
    /// σ as "re,im" or "re".
    #[arg(long, allow_hyphen_values = true)]
    pub sigma: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    pub eta: Option<String>,
    /// α as "re,im" or "re".
    #[arg(long, allow_hyphen_values = true)]
    pub alpha: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    pub beta: Option<String>,
    #[arg(long, default_value_t = p3tau::tau::DEFAULT_T0)]
    pub t0: f64,
    #[arg(long, default_value_t = p3tau::tau::DEFAULT_T1)]
    pub t1: f64,
    /// Integrator tolerance (default 1e-12, or $P3TAU_TOL).
    #[arg(long)]
    pub tol: Option<f64>,
}

pub fn parse_complex(s: &str) -> Result<Complex64> {
    let bad = || Error::InvalidInput(format!("cannot parse complex number {s:?}; expected \"re,im\""));
    let mut parts = s.split(',').map(str::trim);
    let re = parts.next().ok_or_else(bad)?.parse::<f64>().map_err(|_| bad())?;
    let im = match parts.next() {
        Some(p) => p.parse::<f64>().map_err(|_| bad())?,
        None => 0.0,
    };
    if parts.next().is_some() {
        return Err(bad());
    }
    Ok(Complex64::new(re, im))
}

/// Tolerance from the flag, else the environment, else the default.
pub fn resolve_tol(flag: Option<f64>) -> Result<f64> {
    let tol = match flag {
        Some(t) => t,
        None => match std::env::var(TOL_ENV) {
            Ok(v) => v
                .trim()
                .parse()
                .map_err(|_| Error::InvalidInput(format!("{TOL_ENV}={v:?} is not a number")))?,
            Err(_) => DEFAULT_TOL,
        },
    };
    if !(tol > 0.0 && tol.is_finite()) {
        return Err(Error::InvalidInput(format!("tolerance must be positive, got {tol}")));
    }
    Ok(tol)
}

/// The point as given on the command line.
#[derive(Debug, Clone, Copy)]
pub enum Point {
    Monodromy(MonodromyData),
    Cauchy(CauchyData),
}

impl Point {
    pub fn monodromy(&self) -> Result<MonodromyData> {
        match self {
            Point::Monodromy(m) => Ok(*m),
            Point::Cauchy(c) => cauchy_to_monodromy(c),
        }
    }
}

impl PointArgs {
    pub fn point(&self) -> Result<Point> {
        let pair = |a: &Option<String>, b: &Option<String>| match (a, b) {
            (Some(a), Some(b)) => Ok(Some((parse_complex(a)?, parse_complex(b)?))),
            (None, None) => Ok(None),
            _ => Err(Error::InvalidInput("both members of a parameter pair are required".into())),
        };
        match (pair(&self.sigma, &self.eta)?, pair(&self.alpha, &self.beta)?) {
            (Some((s, e)), None) => Ok(Point::Monodromy(MonodromyData::new(s, e))),
            (None, Some((a, b))) => Ok(Point::Cauchy(CauchyData::new(a, b))),
            (Some(_), Some(_)) => Err(Error::InvalidInput("give either --sigma/--eta or --alpha/--beta, not both".into())),
            (None, None) => Err(Error::InvalidInput("missing parameters: give --sigma/--eta or --alpha/--beta".into())),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn complex_forms() {
        assert_eq!(parse_complex("0.3,0").unwrap(), Complex64::new(0.3, 0.0));
        assert_eq!(parse_complex("-0.1, -2e-3").unwrap(), Complex64::new(-0.1, -2e-3));
        assert_eq!(parse_complex("0.25").unwrap(), Complex64::new(0.25, 0.0));
        assert!(parse_complex("0.1,0,3").is_err());
        assert!(parse_complex("x").is_err());
    }

    #[test]
    fn exactly_one_parameterization() {
        let mut a = PointArgs { sigma: None, eta: None, alpha: None, beta: None, t0: 1e-4, t1: 200.0, tol: None };
        assert!(a.point().is_err());
        a.sigma = Some("0.3".into());
        assert!(a.point().is_err());
        a.eta = Some("0.15".into());
        assert!(matches!(a.point().unwrap(), Point::Monodromy(_)));
        a.alpha = Some("0.1".into());
        a.beta = Some("0.1".into());
        assert!(a.point().is_err());
    }
}
