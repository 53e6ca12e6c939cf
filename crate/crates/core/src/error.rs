use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    /// A peak-list document could not be parsed.
    #[error("{block}: line {line}: {message}")]
    Parse {
        /// Block title, or `block #n` when the title is not yet known.
        block: String,
        line: usize,
        message: String,
    },

    #[error("invalid spectrum {id}: {message}")]
    InvalidSpectrum { id: String, message: String },

    #[error("unknown amino-acid residue {residue:?} in {sequence:?}")]
    UnknownResidue { residue: char, sequence: String },

    #[error("degenerate spectrum {id}: all intensities are zero")]
    DegenerateSpectrum { id: String },

    #[error("component with {theoretical} theoretical and {observed} observed peaks exceeds the enumeration budget of {budget} configurations")]
    EnumerationOverflow {
        theoretical: usize,
        observed: usize,
        budget: usize,
    },

    #[error("emission configuration is infeasible: {0}")]
    InfeasibleConfiguration(String),

    #[error("charge mismatch: parameters trained for charge {expected}, spectrum {id} has charge {found}")]
    ChargeMismatch { expected: u32, found: u32, id: String },

    #[error("invalid parameters: {0}")]
    InvalidParams(String),

    #[error("density estimation failed: {0}")]
    DuplicateEdges(String),

    #[error("non-finite log-likelihood for spectrum {id}")]
    NonFiniteLikelihood { id: String },

    #[error("undefined score: {0}")]
    UndefinedScore(String),

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}
