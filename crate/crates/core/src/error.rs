use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("matrix is empty")]
    Empty,

    #[error("matrix is not square ({rows}x{cols})")]
    NotSquare { rows: usize, cols: usize },

    #[error("matrix contains a non-finite entry at ({row}, {col})")]
    NonFinite { row: usize, col: usize },

    #[error("matrix is not symmetric: ||M - M^T||_F = {asymmetry:e} exceeds {tolerance:e}")]
    Asymmetric { asymmetry: f64, tolerance: f64 },

    #[error("dimension mismatch: {left} vs {right}")]
    DimensionMismatch { left: usize, right: usize },

    #[error("eigensolver did not converge on {dim}x{dim} matrix {echo}")]
    Computation { dim: usize, echo: String },

    #[error("eigenvalue {eigenvalue} lies outside the domain [{domain_lo}, inf) of {function}")]
    Domain {
        function: String,
        eigenvalue: f64,
        domain_lo: f64,
    },

    #[error("{what} is not positive semi-definite: smallest eigenvalue {min_eigenvalue:e} below -{tolerance:e}")]
    NotPsd {
        what: String,
        min_eigenvalue: f64,
        tolerance: f64,
    },

    #[error("{what} is not positive definite: smallest eigenvalue {min_eigenvalue:e}")]
    NotPositiveDefinite { what: String, min_eigenvalue: f64 },

    #[error("parameter {name} = {value} outside valid range {valid}")]
    Parameter {
        name: String,
        value: f64,
        valid: String,
    },

    #[error("invalid interval [{m}, {big_m}]: need m < M")]
    Interval { m: f64, big_m: f64 },

    #[error("no sign change of the t0 equation on [{m}, {big_m}] ({points}-point scan)")]
    RootBracketing { m: f64, big_m: f64, points: usize },

    #[error("singular constant: {what} = {value:e}")]
    SingularConstant { what: String, value: f64 },

    #[error("eigenvalue order fails at index {index}: {lhs} > {rhs}")]
    Order { index: usize, lhs: f64, rhs: f64 },

    #[error("{function} lacks required class flags: {required}")]
    Classification { function: String, required: String },

    #[error(
        "{what} is numerically singular: smallest singular value {sigma_min:e} below {threshold:e}"
    )]
    Singular {
        what: String,
        sigma_min: f64,
        threshold: f64,
    },

    #[error("map is not unital: ||C^T C + D^T D - I||_F = {residual:e}")]
    NotUnital { residual: f64 },

    #[error("vector is not a unit vector: norm {norm}")]
    NotUnit { norm: f64 },

    #[error("random generation exhausted after {attempts} attempts: {what}")]
    Generation { what: String, attempts: usize },

    #[error("unknown function specifier {0:?}")]
    UnknownFunction(String),

    #[error("cannot parse number {0:?}")]
    Number(String),

    #[error("invalid configuration: {0}")]
    Config(String),
}

impl Error {
    /// Short stable tag, used to bucket skipped trials in suite reports.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::Empty => "empty",
            Error::NotSquare { .. } => "not_square",
            Error::NonFinite { .. } => "non_finite",
            Error::Asymmetric { .. } => "asymmetric",
            Error::DimensionMismatch { .. } => "dimension_mismatch",
            Error::Computation { .. } => "computation",
            Error::Domain { .. } => "domain",
            Error::NotPsd { .. } => "not_psd",
            Error::NotPositiveDefinite { .. } => "not_positive_definite",
            Error::Parameter { .. } => "parameter",
            Error::Interval { .. } => "interval",
            Error::RootBracketing { .. } => "root_bracketing",
            Error::SingularConstant { .. } => "singular_constant",
            Error::Order { .. } => "order",
            Error::Classification { .. } => "classification",
            Error::Singular { .. } => "singular",
            Error::NotUnital { .. } => "not_unital",
            Error::NotUnit { .. } => "not_unit",
            Error::Generation { .. } => "generation",
            Error::UnknownFunction(_) => "unknown_function",
            Error::Number(_) => "number",
            Error::Config(_) => "config",
        }
    }
}
