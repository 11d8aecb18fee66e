use thiserror::Error;

/// Errors raised while building, validating or simulating codes.
#[derive(Debug, Error)]
pub enum Error {
    #[error("odd real dimension {0}: the complex embedding needs an even dimension")]
    OddRealDimension(usize),

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("non-finite amplitude in point {0}")]
    NonFinite(usize),

    #[error("invalid weights: {0}")]
    InvalidWeights(String),

    #[error("duplicate points {0} and {1} (squared distance {2:e})")]
    DuplicatePoints(usize, usize, f64),

    #[error("unknown catalog code `{name}`; available: {available}")]
    UnknownCode { name: String, available: String },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("need at least {needed} distinct points, found {found}")]
    TooFewPoints { needed: usize, found: usize },

    #[error("need at least {needed} codewords, found {found}")]
    TooFewCodewords { needed: usize, found: usize },

    #[error("constellation has zero energy")]
    ZeroEnergy,

    #[error("logical constellations have different mean photon numbers ({0} vs {1})")]
    UnequalEnergy(f64, f64),

    #[error("matrix is not orthogonal (deviation {0:e})")]
    NotOrthogonal(f64),

    #[error("rotation is not a passive linear-optics transformation (deviation {0:e})")]
    NotPassive(f64),

    #[error("degenerate codewords: Gram matrix is numerically singular (min eigenvalue {0:e})")]
    DegenerateCodewords(f64),

    #[error("empty rotation family")]
    EmptyFamily,

    #[error("no Z-type generator rule for code `{0}`")]
    NoGeneratorRule(String),

    #[error("symmetry does not preserve weighted constellation {0}")]
    SymmetryMismatch(usize),

    #[error("no strict-containment witness: {0}")]
    NoWitness(String),

    #[error("loss probability {0} outside [0, 1)")]
    InvalidGamma(f64),

    #[error("Fock cutoff {cutoff} too small: tail mass {tail:e} exceeds {limit:e}")]
    CutoffTooSmall { cutoff: usize, tail: f64, limit: f64 },

    #[error("Fock space dimension {dim} exceeds budget {budget}")]
    DimensionBudget { dim: usize, budget: usize },

    #[error("channel not trace preserving: completeness deficiency {0:e}")]
    Incomplete(f64),

    #[error("noise image of the code projector is numerically zero")]
    ZeroNoiseImage,

    #[error("no admissible scale in grid")]
    NoAdmissibleScale,

    #[error("integer overflow in {0}")]
    Overflow(&'static str),

    #[error("{path}: {message}")]
    Format { path: String, message: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    /// Input and validation failures, as opposed to numerical breakdowns.
    pub fn is_validation(&self) -> bool {
        !matches!(
            self,
            Error::DegenerateCodewords(_)
                | Error::CutoffTooSmall { .. }
                | Error::Incomplete(_)
                | Error::ZeroNoiseImage
                | Error::NoAdmissibleScale
                | Error::Overflow(_)
        )
    }
}

pub type Result<T> = std::result::Result<T, Error>;
