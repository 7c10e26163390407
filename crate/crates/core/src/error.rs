use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("antisymmetry fails for [e{i}, e{j}] at component {k}")]
    AntisymmetryViolation { i: usize, j: usize, k: usize },
    #[error("Jacobi identity fails for basis triple ({i}, {j}, {k})")]
    JacobiViolation { i: usize, j: usize, k: usize },
    #[error("subspace is not closed under the bracket")]
    NotASubalgebra,
    #[error("subspace is not an ideal: {0}")]
    NotAnIdeal(String),
    #[error("algebra is not nilpotent")]
    NotNilpotent,
    #[error("algebra is not solvable")]
    NotSolvable,
    #[error("invalid Levi complement: {0}")]
    InvalidLeviComplement(String),
    #[error("exponential radical is not contained in the nilpotent radical")]
    EViolatesContainment,
    #[error("subspace is not between the radicals: {0}")]
    NotBetweenRadicals(String),
    #[error("no regular element found after {trials} trials (seed {seed})")]
    RegularElementNotFound { trials: usize, seed: u64 },
    #[error("internal inconsistency: {0}")]
    InternalInconsistency(String),
    #[error("representation is not a homomorphism on basis pair ({i}, {j})")]
    NotAHomomorphism { i: usize, j: usize },
    #[error("representation is not faithful")]
    NotFaithful,
    #[error("matrix is not nilpotent")]
    NotNilpotentMatrix,
    #[error("matrix is not unipotent")]
    NotUnipotent,
    #[error("matrix logarithm: spectrum meets the branch cut")]
    LogBranchFailure,
    #[error("eta does not lie in the chosen ideal (relative residual {0:e})")]
    EtaNotInNPrime(f64),
    #[error("no projection onto the reductive factor is available")]
    ProjectionUnavailable,
    #[error("function is not in the vetted family: {0}")]
    UnvettedFunction(String),
    #[error("overflow at scale; largest usable t = {0:e}")]
    OverflowAtScale(f64),
    #[error("grid spans {0:.2} decades, at least 4 are needed")]
    GridTooShort(f64),
    #[error("zero input")]
    ZeroInput,
    #[error("witness construction failed: {0}")]
    WitnessConstructionFailed(String),
    #[error("parse error: {0}")]
    Parse(String),
    #[error("configuration error: {0}")]
    Config(String),
}

pub type Result<T> = std::result::Result<T, Error>;
