use thiserror::Error;

/// Errors raised by kernel construction, composition and inference.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("space `{space}` declares duplicate atom `{atom}`")]
    DuplicateAtom { space: String, atom: String },

    #[error("space `{space}` has no atoms")]
    EmptySpace { space: String },

    #[error("atom label `{atom}` contains the reserved separator `|`")]
    ReservedSeparator { atom: String },

    #[error("atom `{atom}` is not a member of space `{space}`")]
    UnknownAtom { space: String, atom: String },

    #[error("map is undefined on atom `{atom}` of space `{space}`")]
    IncompleteMap { space: String, atom: String },

    #[error("spaces `{left}` and `{right}` do not match")]
    DomainMismatch { left: String, right: String },

    #[error("weights do not form a probability distribution: {reason}")]
    InvalidDistribution { reason: String },

    #[error("factor index {index} out of range for product with {factors} factors")]
    BadFactor { index: usize, factors: usize },

    #[error("function space {target}^{base} has {atoms} atoms, above the cap of {cap}")]
    SpaceTooLarge {
        base: String,
        target: String,
        atoms: u128,
        cap: usize,
    },

    #[error("conditioning event has zero mass")]
    ZeroMassEvent,

    #[error("measurement puts mass on zero-evidence atoms: {atoms:?}")]
    NotAbsolutelyContinuous { atoms: Vec<String> },

    #[error("bad time interval: {from} > {to}")]
    BadInterval { from: usize, to: usize },

    #[error("time index {index} out of range for chain of length {len}")]
    BadTimeIndex { index: usize, len: usize },

    #[error("{what} must have consistent dimensions: {detail}")]
    DimensionMismatch { what: String, detail: String },

    #[error("matrix is not symmetric within tolerance")]
    NotSymmetric,

    #[error("matrix is not positive semidefinite (eigenvalue {eigenvalue:.3e})")]
    NotPositiveSemidefinite { eigenvalue: f64 },

    #[error("observed block of the joint Gaussian is singular beyond the jitter policy")]
    SingularBlock,

    #[error("Gram matrix is not positive definite after the jitter policy")]
    DegenerateGram,

    #[error("update is degenerate: effective variance {variance:.3e} is not positive")]
    DegenerateUpdate { variance: f64 },

    #[error("variance must be nonnegative, got {value}")]
    BadVariance { value: f64 },

    #[error("prior covariance on the parameter space is singular")]
    SingularPrior,

    #[error("basis functions are linearly dependent on the probe grid")]
    DegenerateBasis,
}

pub type Result<T> = std::result::Result<T, Error>;
