use num_complex::Complex64;
use thiserror::Error;

#[derive(Error, Debug, Clone)]
pub enum Error {
    #[error("tau must lie in the upper half-plane, got {0}")]
    InvalidTau(Complex64),

    #[error("eisenstein index must satisfy r >= 1")]
    InvalidEisensteinIndex,

    #[error("point {z} lies within {radius:.3e} of lattice translate {nearest}")]
    NearSingularity {
        z: Complex64,
        nearest: Complex64,
        radius: f64,
    },

    #[error("path must contain at least one vertex")]
    EmptyPath,

    #[error("segment {segment} of path passes within {dist:.3e} of puncture translate {point} (minimum {min:.3e})")]
    PathTooClose {
        segment: usize,
        point: Complex64,
        dist: f64,
        min: f64,
    },

    #[error("paths do not share the required endpoint: {0} vs {1}")]
    EndpointMismatch(Complex64, Complex64),

    #[error("quadrature did not converge on segment {segment} (reached depth {depth})")]
    QuadratureFailure { segment: usize, depth: usize },

    #[error("tangential fit residual {residual:.3e} exceeds tolerance {tolerance:.3e}")]
    FitResidual { residual: f64, tolerance: f64 },

    #[error("tangential path must leave 0 along the positive real axis")]
    BadTangentialPath,

    #[error("fit degree cap {cap} is below the word degree {need}")]
    FitDegreeCap { cap: u32, need: u32 },

    #[error("sample set is ill-conditioned (condition number {0:.3e})")]
    IllConditioned(f64),

    #[error("newton iteration failed for lambda target {0}")]
    NewtonFailure(Complex64),

    #[error("branch points must be pairwise distinct")]
    DegenerateBranchPoints,

    #[error("singular linear system during reduction; this contradicts the direct-sum decomposition")]
    SingularReduction,

    #[error("unknown puncture label `{0}`")]
    UnknownPuncture(String),

    #[error("operation requires a configuration with {0}")]
    WrongConfiguration(String),

    #[error("parse error at byte {position}: {message}")]
    Parse { position: usize, message: String },

    #[error("config error: {0}")]
    Config(String),
}

impl Error {
    /// Stable machine-readable code for CLI consumers.
    pub fn code(&self) -> &'static str {
        match self {
            Error::InvalidTau(_) => "invalid-tau",
            Error::InvalidEisensteinIndex => "invalid-eisenstein-index",
            Error::NearSingularity { .. } => "near-singularity",
            Error::EmptyPath => "empty-path",
            Error::PathTooClose { .. } => "path-too-close",
            Error::EndpointMismatch(_, _) => "endpoint-mismatch",
            Error::QuadratureFailure { .. } => "quadrature-failure",
            Error::FitResidual { .. } => "fit-residual",
            Error::BadTangentialPath => "bad-tangential-path",
            Error::FitDegreeCap { .. } => "fit-degree-cap",
            Error::IllConditioned(_) => "ill-conditioned",
            Error::NewtonFailure(_) => "newton-failure",
            Error::DegenerateBranchPoints => "degenerate-branch-points",
            Error::SingularReduction => "singular-reduction",
            Error::UnknownPuncture(_) => "unknown-puncture",
            Error::WrongConfiguration(_) => "wrong-configuration",
            Error::Parse { .. } => "parse-error",
            Error::Config(_) => "config-error",
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
