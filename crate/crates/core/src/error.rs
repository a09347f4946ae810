use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid parameters: {0}")]
    InvalidParams(String),

    #[error("zero-energy mode at h = {h}, k = {k}: Bogoliubov angle undefined")]
    DegenerateMode { h: f64, k: f64 },

    #[error("matrix is not skew-symmetric (max |M + M^T| = {0:e})")]
    NotSkewSymmetric(f64),

    #[error("matrix dimension {dim} exceeds the limit {max}")]
    DimensionTooLarge { dim: usize, max: usize },

    #[error("separation {n} outside 1..={max}")]
    SeparationOutOfRange { n: usize, max: usize },

    #[error("correlator {kind} at n = {n} has imaginary residue {residue:e}")]
    ImaginaryResidue {
        kind: &'static str,
        n: usize,
        residue: f64,
    },

    #[error("squeezing discriminant is negative: {0:e}")]
    NegativeDiscriminant(f64),

    #[error("J_z variance is negative: {0:e}")]
    NegativeVariance(f64),

    #[error("averaging window ends at t = {t_max} but the first revival is predicted near t = {revival}")]
    WindowTooLong { t_max: f64, revival: f64 },

    #[error("no revival found up to t = {horizon}")]
    NoRevivalFound { horizon: f64 },

    #[error("a revival fit needs at least {needed} sizes, got {got}")]
    InsufficientSizes { needed: usize, got: usize },

    #[error("chain of {n_sites} sites is too large for the Fock-space oracle (max {max})")]
    SizeTooLarge { n_sites: usize, max: usize },

    #[error("at t = {time}: {source}")]
    AtTime {
        time: f64,
        #[source]
        source: Box<Error>,
    },
}

impl Error {
    pub(crate) fn at_time(self, time: f64) -> Self {
        match self {
            e @ Error::AtTime { .. } => e,
            e => Error::AtTime {
                time,
                source: Box::new(e),
            },
        }
    }
}
