use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("unknown catalog function `{0}`")]
    UnknownBuiltin(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("x = {x} lies outside the half-line domain [0, inf)")]
    OutsideDomain { x: f64 },

    #[error("derivative order {requested} exceeds the supported maximum {max}")]
    OrderOverflow { requested: usize, max: usize },

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("zI - H is numerically singular at z = {re}{im:+}i (condition estimate {condition:.3e})")]
    Singular { re: f64, im: f64, condition: f64 },

    #[error("integral diverges: {0}")]
    Divergent(String),

    #[error("quadrature did not converge: estimated error {estimate:.3e} > tolerance {tol:.3e} after {cells} cells")]
    NonConvergence { estimate: f64, tol: f64, cells: usize },

    #[error("eigen-oracle refused the matrix: {0}")]
    NotDiagonalizable(String),

    #[error("no growth estimate on the lattice satisfies the sampled resolvent bound")]
    GrowthRejected,

    #[error("parse error: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn precondition(msg: impl Into<String>) -> Self {
        Error::Precondition(msg.into())
    }

    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidParameter(msg.into())
    }

    /// True for numerical failures (as opposed to bad inputs).
    pub fn is_numerical(&self) -> bool {
        matches!(self, Error::NonConvergence { .. } | Error::Divergent(_))
    }
}
