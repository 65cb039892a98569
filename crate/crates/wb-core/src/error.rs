use thiserror::Error;

/// Error variants shared by all modules.
#[derive(Debug, Error)]
pub enum Error {
    /// Empty input where at least one element is required.
    #[error("empty input: {0}")]
    EmptyInput(&'static str),

    /// A coordinate or weight is NaN or infinite.
    #[error("non-finite value in {what} at index {index}")]
    NonFinite { what: &'static str, index: usize },

    /// A weight is more negative than the tolerance allows.
    #[error("negative weight {value} at index {index}")]
    NegativeWeight { value: f64, index: usize },

    /// All weights are zero; no probability measure can be formed.
    #[error("degenerate weights: total mass is zero")]
    DegenerateWeights,

    /// Point dimensions do not agree.
    #[error("dimension mismatch: {0} vs {1}")]
    DimensionMismatch(usize, usize),

    /// Row counts do not agree where equal sizes are required.
    #[error("size mismatch: {0} vs {1}")]
    SizeMismatch(usize, usize),

    /// The centroid set would exceed the combinatorial cap.
    #[error("centroid set would hold {estimated} points, over the cap of {cap}")]
    CentroidCapExceeded { estimated: u128, cap: u128 },

    /// The assembled LP exceeds the oracle-scale cap.
    #[error("linear program has an estimated {estimated} variables, over the oracle cap of {cap}")]
    LpTooLarge { estimated: String, cap: usize },

    /// The linear program has no feasible point.
    #[error("linear program is infeasible (phase-1 residual {0:.3e})")]
    Infeasible(f64),

    /// The linear program is unbounded below.
    #[error("linear program is unbounded")]
    Unbounded,

    /// A simplex solver exceeded its pivot cap; treated as a cycling guard.
    #[error("simplex did not terminate within {0} pivots")]
    IterationCap(usize),

    /// A basis factorization failed (numerically singular basis).
    #[error("singular basis encountered during factorization")]
    SingularBasis,

    /// SUA requires uniform measures with a common support size.
    #[error("SUA input must be uniform with equal support counts: {0}")]
    NotUniform(String),

    /// Unknown synthetic dataset family name.
    #[error("unknown dataset family `{0}`")]
    UnknownFamily(String),

    /// Dataset parameters outside their documented range.
    #[error("invalid dataset parameter: {0}")]
    InvalidParameter(String),

    /// An image with zero total intensity cannot become a measure.
    #[error("image has zero total intensity after thresholding")]
    BlackImage,

    /// Malformed text input (CSV or PGM).
    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
