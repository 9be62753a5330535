use core::fmt;

/// Failure modes shared by every stage of the pipeline.
#[derive(Debug, Clone, PartialEq)]
pub enum Error {
    /// A NaN or infinite value reached a routine that requires finite input.
    NonFinite,
    /// The matrix deviates from symmetry by more than the accepted tolerance.
    NonSymmetric { max_asymmetry: f64 },
    /// Operand dimensions do not line up.
    ShapeMismatch {
        context: &'static str,
        expected: (usize, usize),
        found: (usize, usize),
    },
    /// The constraint matrix of a generalized problem has a clearly negative eigenvalue.
    NotPsd { min_eigenvalue: f64 },
    /// The constraint matrix of a generalized problem has zero trace.
    DegeneratePencil,
    RankRequestTooLarge { requested: usize, max: usize },
    KTooLarge { k: usize, n: usize },
    /// Automatic bandwidth is undefined because every neighbor distance is zero.
    DegenerateData,
    ClusterCountTooLarge { c: usize, n: usize },
    LengthMismatch { left: usize, right: usize },
    TooFewRows { n: usize, min: usize },
    InvalidParameter(&'static str),
    /// The tridiagonal QL sweep did not converge.
    NoConvergence,
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::NonFinite => write!(f, "input contains NaN or infinite values"),
            Error::NonSymmetric { max_asymmetry } => {
                write!(f, "matrix is not symmetric (max |S - S^T| = {max_asymmetry:e})")
            }
            Error::ShapeMismatch { context, expected, found } => write!(
                f,
                "{context}: expected {}x{}, found {}x{}",
                expected.0, expected.1, found.0, found.1
            ),
            Error::NotPsd { min_eigenvalue } => write!(
                f,
                "constraint matrix is not positive semidefinite (min eigenvalue {min_eigenvalue:e})"
            ),
            Error::DegeneratePencil => write!(f, "constraint matrix has non-positive trace"),
            Error::RankRequestTooLarge { requested, max } => {
                write!(f, "requested rank {requested} exceeds maximum {max}")
            }
            Error::KTooLarge { k, n } => {
                write!(f, "neighborhood size k = {k} must be in [1, n) with n = {n}")
            }
            Error::DegenerateData => write!(
                f,
                "all neighbor distances are zero; supply an explicit bandwidth"
            ),
            Error::ClusterCountTooLarge { c, n } => {
                write!(f, "cluster count {c} exceeds number of instances {n}")
            }
            Error::LengthMismatch { left, right } => {
                write!(f, "length mismatch: {left} vs {right}")
            }
            Error::TooFewRows { n, min } => write!(f, "need at least {min} rows, got {n}"),
            Error::InvalidParameter(msg) => write!(f, "invalid parameter: {msg}"),
            Error::NoConvergence => write!(f, "eigenvalue iteration did not converge"),
        }
    }
}

impl core::error::Error for Error {}

pub type Result<T> = core::result::Result<T, Error>;

/// Non-fatal conditions recorded while fitting.
#[derive(Debug, Clone, PartialEq)]
pub enum Warning {
    /// The sparsification budget is smaller than the number of instances.
    BudgetTooSmall { budget: usize, n: usize },
    /// The requested factor rank exceeded the numerical rank and was truncated.
    RankDeficient { requested: usize, numerical: usize },
    /// A constraint matrix was regularized by `epsilon` on its diagonal.
    Regularized { stage: &'static str, epsilon: f64 },
    /// Signed degrees made the LPP constraint indefinite; degrees were shifted by `shift`.
    DegreeShift { shift: f64 },
}

impl fmt::Display for Warning {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Warning::BudgetTooSmall { budget, n } => {
                write!(f, "sparsification keeps {budget} elements, fewer than n = {n}")
            }
            Warning::RankDeficient { requested, numerical } => {
                write!(f, "rank {requested} requested but numerical rank is {numerical}")
            }
            Warning::Regularized { stage, epsilon } => {
                write!(f, "{stage}: constraint regularized with epsilon = {epsilon:e}")
            }
            Warning::DegreeShift { shift } => {
                write!(f, "signed degrees shifted by {shift:e} to keep the constraint PSD")
            }
        }
    }
}
