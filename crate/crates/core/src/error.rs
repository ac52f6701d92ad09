use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("series is not homogeneous of degree {expected}")]
    NotHomogeneous { expected: u32 },

    #[error("Lie generator has a term of degree {degree}; generators must start at degree 3")]
    GeneratorDegree { degree: u32 },

    #[error("Hamiltonian has a term of degree {degree}; expected an equilibrium at the origin")]
    NotAnEquilibrium { degree: u32 },

    #[error("quadratic part does not match the supplied quadratic data")]
    QuadraticMismatch,

    #[error("frequency model inconsistent with the quadratic part: {0}")]
    FrequencyMismatch(String),

    #[error("monomial {monomial} is non-resonant for the frequency model but its eigenvalue vanishes")]
    ZeroDivisor { monomial: String },

    #[error("near resonance: |lambda| = {magnitude:e} below floor {floor:e} for monomial {monomial}")]
    NearResonance {
        monomial: String,
        magnitude: f64,
        floor: f64,
    },

    #[error("homological operator is singular on the non-resonant subspace of degree {degree}")]
    SingularHomological { degree: u32 },

    #[error("eigenvalues cluster ambiguously (gap {gap:e} against tolerance {tol:e})")]
    EigenvalueClustering { gap: f64, tol: f64 },

    #[error("unsupported eigenstructure: {0}")]
    UnsupportedEigenstructure(String),

    #[error("integer lattice is not saturated")]
    NonSaturated,

    #[error("inconsistent linear system: {0}")]
    Inconsistent(String),

    #[error("value {0} does not fit in a 64-bit integer")]
    Overflow(String),

    #[error("point is outside the working radius ({norm:e} > {radius:e})")]
    OutsideRadius { norm: f64, radius: f64 },

    #[error("non-finite value while evaluating a polynomial map")]
    EvaluationOverflow,

    #[error("curve needs an even number of at least 16 samples, found {0}")]
    DegenerateCurve(usize),

    #[error("curve samples are unevenly spaced (max gap {max_gap:e} > 4 x mean gap {mean_gap:e})")]
    UnevenCurve { max_gap: f64, mean_gap: f64 },

    #[error("momentum map is singular near the curve: min singular value {sigma:e} below floor {floor:e}")]
    Singular { sigma: f64, floor: f64 },

    #[error("projection onto the fiber did not converge at sample {sample} (residual {residual:e})")]
    NoConvergence { sample: usize, residual: f64 },

    #[error("momentum map components do not Poisson-commute (residual {0:e})")]
    NotInvolutive(f64),

    #[error("line {line}, column {column}: {message}")]
    Parse {
        line: usize,
        column: usize,
        message: String,
    },

    #[error("internal invariant violated: {0}")]
    Invariant(String),
}

impl Error {
    /// Short stable identifier for machine consumption.
    pub fn code(&self) -> &'static str {
        match self {
            Error::DimensionMismatch { .. } => "E_DIMENSION",
            Error::NotHomogeneous { .. } => "E_NOT_HOMOGENEOUS",
            Error::GeneratorDegree { .. } => "E_GENERATOR_DEGREE",
            Error::NotAnEquilibrium { .. } => "E_NOT_EQUILIBRIUM",
            Error::QuadraticMismatch => "E_QUADRATIC_MISMATCH",
            Error::FrequencyMismatch(_) => "E_FREQUENCY_MISMATCH",
            Error::ZeroDivisor { .. } => "E_ZERO_DIVISOR",
            Error::NearResonance { .. } => "E_NEAR_RESONANCE",
            Error::SingularHomological { .. } => "E_SINGULAR_HOMOLOGICAL",
            Error::EigenvalueClustering { .. } => "E_EIGEN_CLUSTER",
            Error::UnsupportedEigenstructure(_) => "E_EIGENSTRUCTURE",
            Error::NonSaturated => "E_NON_SATURATED",
            Error::Inconsistent(_) => "E_INCONSISTENT",
            Error::Overflow(_) => "E_OVERFLOW",
            Error::OutsideRadius { .. } => "E_RADIUS",
            Error::EvaluationOverflow => "E_EVAL_OVERFLOW",
            Error::DegenerateCurve(_) => "E_DEGENERATE_CURVE",
            Error::UnevenCurve { .. } => "E_UNEVEN_CURVE",
            Error::Singular { .. } => "E_SINGULAR",
            Error::NoConvergence { .. } => "E_NO_CONVERGENCE",
            Error::NotInvolutive(_) => "E_NOT_INVOLUTIVE",
            Error::Parse { .. } => "E_PARSE",
            Error::Invariant(_) => "E_INVARIANT",
        }
    }
}
