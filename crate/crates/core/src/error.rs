use num_complex::Complex64;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("Gamma has a pole at z = {0}")]
    GammaPole(Complex64),

    #[error("Barnes G vanishes at z = {0}")]
    BarnesZero(Complex64),

    #[error("parameter domain violation: {check} (margin {margin:e})")]
    Domain { check: String, margin: f64 },

    #[error("degenerate eta: |sin 2πη| = {0:e}")]
    DegenerateEta(f64),

    #[error("branch violation: |arg(sin 2πη / sin 2πσ)| = {0} is not below π/2")]
    BranchViolation(f64),

    #[error("logarithmic singularity: |sin 2π(σ+η)| = {0:e}")]
    LogSingularity(f64),

    #[error("seed point x0 = {x0} is outside the small-x expansion range (|w(x0)| = {correction:e})")]
    SeedTooLarge { x0: f64, correction: f64 },

    #[error("solution approaches a movable singularity near x = {x} (|Im u| = {im_u})")]
    Singularity { x: f64, im_u: f64 },

    #[error("step size underflow at x = {x} (h = {h:e})")]
    StepUnderflow { x: f64, h: f64 },

    #[error("integrator exceeded {0} steps")]
    MaxSteps(usize),

    #[error("ill-conditioned amplitude fit (normal matrix condition number {0:e})")]
    IllConditioned(f64),

    #[error("inconsistent Richardson extrapolation (spread {spread:e} vs estimate {estimate:e})")]
    InconsistentExtrapolation { spread: f64, estimate: f64 },

    #[error("finite-difference stencil leaves the validity set: {0}")]
    Margin(String),

    #[error("quadrature did not converge: tolerance halving changed the result by {change:e} (estimate {estimate:e})")]
    NonConvergence { change: f64, estimate: f64 },

    #[error("cannot resolve the η branch for σ = {sigma}, ν = {nu}")]
    BranchResolution { sigma: Complex64, nu: Complex64 },

    #[error("invalid input: {0}")]
    InvalidInput(String),
}

impl Error {
    /// True for errors caused by parameters outside the admissible set, as
    /// opposed to numerical failures.
    pub fn is_validation(&self) -> bool {
        matches!(
            self,
            Error::GammaPole(_)
                | Error::BarnesZero(_)
                | Error::Domain { .. }
                | Error::DegenerateEta(_)
                | Error::BranchViolation(_)
                | Error::LogSingularity(_)
                | Error::SeedTooLarge { .. }
                | Error::Margin(_)
                | Error::BranchResolution { .. }
                | Error::InvalidInput(_)
        )
    }

    /// Short machine-readable tag used in diagnostic records.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::GammaPole(_) => "gamma_pole",
            Error::BarnesZero(_) => "barnes_zero",
            Error::Domain { .. } => "domain",
            Error::DegenerateEta(_) => "degenerate_eta",
            Error::BranchViolation(_) => "branch_violation",
            Error::LogSingularity(_) => "log_singularity",
            Error::SeedTooLarge { .. } => "seed_too_large",
            Error::Singularity { .. } => "singularity",
            Error::StepUnderflow { .. } => "step_underflow",
            Error::MaxSteps(_) => "max_steps",
            Error::IllConditioned(_) => "ill_conditioned",
            Error::InconsistentExtrapolation { .. } => "inconsistent_extrapolation",
            Error::Margin(_) => "margin",
            Error::NonConvergence { .. } => "non_convergence",
            Error::BranchResolution { .. } => "branch_resolution",
            Error::InvalidInput(_) => "invalid_input",
        }
    }
}
