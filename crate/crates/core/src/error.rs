use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid axis: {0}")]
    InvalidAxis(String),
    #[error("axis mismatch: {0}")]
    AxisMismatch(String),
    #[error("non-finite sample at nu={nu}, E={e} (pole on the grid?)")]
    NonFinite { nu: f64, e: f64 },
    #[error("s={s} outside tau range [{lo}, {hi}]")]
    OutOfRange { s: f64, lo: f64, hi: f64 },
    #[error("state is not normalized: norm^2 = {0}")]
    NotNormalized(f64),
    #[error("moment not converged: boundary bins carry {fraction:.3e} of the moment sum")]
    MomentNotConverged { fraction: f64 },
    #[error("quadrature did not converge: {0}")]
    Quadrature(String),
    #[error("no resonance in search window ({0})")]
    NoResonance(String),
    #[error("aliasing guard: d_omega*t = {0:.4} exceeds pi/2, use a finer omega grid")]
    Aliasing(f64),
    #[error("exponential integral: {0}")]
    Regime(String),
    #[error("closed-form branch mismatch: {0}")]
    FormulaMismatch(String),
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error("config: {0}")]
    Config(String),
    #[error("parse error: {0}")]
    Parse(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    /// True for errors caused by bad user input rather than numerics.
    pub fn is_usage(&self) -> bool {
        matches!(
            self,
            Error::Config(_)
                | Error::InvalidAxis(_)
                | Error::OutOfRange { .. }
                | Error::InvalidInput(_)
                | Error::AxisMismatch(_)
                | Error::Parse(_)
        )
    }
}
