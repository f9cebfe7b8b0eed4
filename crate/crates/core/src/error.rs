use thiserror::Error;

/// Errors raised by the solver stack. Times and magnitudes are reported as
/// `f64` regardless of the scalar type the computation ran in.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("basis index {index} out of range for dimension {dim}")]
    IndexOutOfRange { index: usize, dim: usize },

    #[error("non-finite value in {0}")]
    NonFinite(&'static str),

    #[error("unknown algebra `{0}`")]
    UnknownAlgebra(String),

    #[error("invalid algebra definition: {0}")]
    InvalidAlgebra(String),

    #[error("invalid ordering: {0}")]
    InvalidOrdering(String),

    #[error("representation is not a homomorphism (residual {residual:e} at ({alpha},{beta}))")]
    NotAHomomorphism {
        alpha: usize,
        beta: usize,
        residual: f64,
    },

    #[error("no representation available for algebra `{0}`")]
    RepresentationUnavailable(String),

    #[error("Wei-Norman chart breakdown at t={t}: condition number {condition:e}")]
    ChartBreakdown { t: f64, condition: f64 },

    #[error("step size underflow at t={t} (h={h:e})")]
    StepSizeUnderflow { t: f64, h: f64 },

    #[error("coefficient curve undefined at t={t}: {reason}")]
    CurveUndefined { t: f64, reason: String },

    #[error("Wei-Norman system is not triangular under this ordering: {0}")]
    NotTriangular(String),

    #[error("quadrature did not converge on [{a}, {b}] (error estimate {estimate:e})")]
    QuadratureNonConvergence { a: f64, b: f64, estimate: f64 },

    #[error("mass must be positive (got {mass} at t={t})")]
    NonPositiveMass { t: f64, mass: f64 },

    #[error("analytic continuation left imaginary residue {residue:e} at t={t}")]
    ImaginaryResidue { t: f64, residue: f64 },

    #[error("t={t} outside the validity domain: {reason}")]
    OutsideDomain { t: f64, reason: String },

    #[error("could not pull the matrix back to algebra coordinates: {0}")]
    PullbackFailure(String),

    #[error("oscillator solution crosses zero near t={t}")]
    ZeroCrossing { t: f64 },

    #[error("state is not normalizable (Re A = {re_a})")]
    NonNormalizable { re_a: f64 },

    #[error("ordering/algebra mismatch: {0}")]
    OrderingMismatch(String),

    #[error("grid too narrow: {mass_outside:e} of the probability lies outside the domain")]
    GridTooNarrow { mass_outside: f64 },

    #[error("singular linear system")]
    Singular,

    #[error("json: {0}")]
    Json(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
