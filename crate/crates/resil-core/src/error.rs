use thiserror::Error;

/// Errors raised by the analysis library.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("operator is not Hermitian (max deviation {0:e})")]
    NotHermitian(f64),
    #[error("qubit index {index} out of range for {n_qubits} qubits")]
    QubitOutOfRange { index: usize, n_qubits: usize },
    #[error("layer {layer}: gates overlap on qubit {qubit}")]
    OverlappingSupports { layer: usize, qubit: usize },
    #[error("noise realization has {found} angles but the circuit has {expected} noise sites")]
    MissingRealization { expected: usize, found: usize },
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("noise site (layer {layer}, position {position}) is not paired with a gate")]
    UnpairedSite { layer: usize, position: usize },
    #[error("no noise site with sigma > 0 is paired with a gate of nonzero angle")]
    NoFiniteRatio,
    #[error("operator is not a single Pauli string")]
    NotPauli,
    #[error("unknown gate name `{0}`")]
    UnknownGate(String),
    #[error("schema error at `{path}`: {message}")]
    Schema { path: String, message: String },
    #[error("numerical failure: {0}")]
    Numerical(String),
    #[error("at `{path}`: {source}")]
    At { path: String, source: Box<Error> },
}

impl Error {
    /// True for failures of the numerics (as opposed to invalid input).
    pub fn is_numerical(&self) -> bool {
        matches!(self.root(), Error::Numerical(_))
    }

    /// Attaches the document path at which the error was found.
    pub fn at(self, path: impl Into<String>) -> Self {
        Error::At { path: path.into(), source: Box::new(self) }
    }

    /// The innermost error, with any path context removed.
    pub fn root(&self) -> &Error {
        match self {
            Error::At { source, .. } => source.root(),
            e => e,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
