use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("shape mismatch: {0}")]
    Shape(String),
    #[error("algebra mismatch: {0}")]
    AlgebraMismatch(String),
    #[error("element is not invertible (residual {residual:e})")]
    NotInvertible { residual: f64 },
    #[error("element is not unitary (residual {residual:e})")]
    NotUnitary { residual: f64 },
    #[error("determinant differs from the unit (residual {residual:e})")]
    NotSpecialLinear { residual: f64 },
    #[error("eigenvalue {re}{im:+}i lies on the branch cut (-inf, 0]")]
    SpectrumOnCut { re: f64, im: f64 },
    #[error("{what} did not converge after {iterations} iterations")]
    NonConvergence { what: &'static str, iterations: usize },
    #[error("numeric failure: {0}")]
    Numeric(String),
    #[error("no factorization found: {0}")]
    NoFactorization(String),
    #[error("phase jump {distance} across edge ({0}, {1}) violates the sampling condition", .edge.0, .edge.1)]
    SamplingViolation { edge: (usize, usize), distance: f64 },
    #[error("cycle closed by edge ({0}, {1}) winds {winding} times", .edge.0, .edge.1)]
    NonzeroWinding { edge: (usize, usize), winding: i64 },
    #[error("trace {trace} is not zero")]
    NonzeroTrace { trace: f64 },
    #[error("spectrum outside [-pi, pi]: operator norm {norm}")]
    SpectrumOutOfRange { norm: f64 },
    #[error("precondition violated: {0}")]
    Precondition(String),
    #[error("format error: {0}")]
    Format(String),
}
