use thiserror::Error;

/// Errors raised by the numerical layer.
///
/// The split into [`Error::is_numerical`] and the rest mirrors the CLI exit
/// codes: numerical precondition failures are distinguishable from bad input.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("kernel evaluated at its singularity (x = 0); use the self-cell correction")]
    Singularity,

    #[error("division by zero: {0}")]
    ZeroDivisor(&'static str),

    #[error("domain contains no quadrature cells")]
    EmptyDomain,

    #[error("empty grid: {0}")]
    EmptyGrid(String),

    #[error("field samples are incompatible: {0}")]
    Mismatch(String),

    #[error("precondition `{check}` violated: residual {residual:.3e} > tolerance {tol:.3e}")]
    Precondition {
        check: String,
        residual: f64,
        tol: f64,
    },

    #[error("compatibility condition violated: |integral| = {defect:.3e} > {tol:.3e} (relative)")]
    Compatibility { defect: f64, tol: f64 },

    #[error("evaluation point {index} lies {distance:.3e} from the surface (minimum {min:.3e})")]
    TooCloseToSurface {
        index: usize,
        distance: f64,
        min: f64,
    },

    #[error("degenerate triangle {0}")]
    DegenerateTriangle(usize),

    #[error("linear solve failed: {0}")]
    Solver(String),

    #[error("io: {0}")]
    Io(#[from] std::io::Error),

    #[error("csv: {0}")]
    Csv(#[from] csv::Error),

    #[error("parse: {0}")]
    Parse(String),
}

impl Error {
    /// True for failures of a numerical precondition (as opposed to malformed input).
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            Error::ZeroDivisor(_)
                | Error::Singularity
                | Error::Precondition { .. }
                | Error::Compatibility { .. }
                | Error::TooCloseToSurface { .. }
                | Error::Solver(_)
                | Error::EmptyGrid(_)
                | Error::EmptyDomain
        )
    }
}

pub type Result<T> = std::result::Result<T, Error>;
