use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("energy must be finite, got {0}")]
    NonFiniteEnergy(f64),
    #[error("transfer matrix index must be at least 1")]
    ZeroStepIndex,
    #[error("transfer product needs at least one factor")]
    EmptyProduct,
    #[error("L_{0} is singular; eigen-decomposition needs n >= 2")]
    SingularStep(usize),
    #[error("L_{n} has real eigenvalues at E = {energy} (discriminant {discriminant})")]
    RealEigenvalues {
        n: usize,
        energy: f64,
        discriminant: f64,
    },

    #[error("truncation orders differ: {0} vs {1}")]
    OrderMismatch(usize, usize),
    #[error("{0} requires a series with zero constant term")]
    NonzeroConstantTerm(&'static str),
    #[error("cannot parse rational {0:?}")]
    ParseRational(String),
    #[error("malformed correction table: {0}")]
    MalformedTable(String),

    #[error("bootstrap order must be at least 1")]
    ZeroOrder,
    #[error("bootstrap system at order {order} is not solvable: {reason}")]
    InconsistentSystem { order: usize, reason: String },

    #[error("both samples are zero; phase is undetermined")]
    DegenerateSample,
    #[error("cos(alpha) = {0} is too close to zero")]
    SingularAlpha(f64),
    #[error("need at least {needed} points, got {got}")]
    WindowTooShort { needed: usize, got: usize },
    #[error("invalid window [{0}, {1}]")]
    InvalidWindow(usize, usize),
    #[error("indices must be consecutive (got {0} after {1})")]
    NonConsecutive(usize, usize),

    #[error("energies coincide (E = {0}); use the diagonal slope estimator")]
    CoincidentEnergies(f64),
    #[error("truncation list must be strictly increasing and span at least a decade")]
    BadTruncationList,
}
