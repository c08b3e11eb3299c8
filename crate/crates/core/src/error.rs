use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid dimension: {0}")]
    InvalidDimension(String),

    #[error("dimension mismatch: {left} vs {right}")]
    DimensionMismatch { left: usize, right: usize },

    #[error("matrix is not unitary (residual {residual:.3e})")]
    NotUnitary { residual: f64 },

    #[error("matrix is not in SU(2): {0}")]
    NotSu2(String),

    #[error("{what} did not converge after {iterations} attempts")]
    NoConvergence {
        what: &'static str,
        iterations: usize,
    },

    #[error("{what} failed: residual {residual:.3e}")]
    Residual { what: &'static str, residual: f64 },

    #[error("capacity exceeded: {0}")]
    Capacity(String),

    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error("gate set is not closed under inversion: {0} has no inverse in the set")]
    NotInverseClosed(String),

    #[error("gate {0} has no inverse in the gate set")]
    NoInverse(String),

    #[error("invalid gate: {0}")]
    InvalidGate(String),

    #[error("token {0:?} is not in the codebook")]
    UnknownToken(String),

    #[error("qubit id {id} out of range for {num_qubits} qubits")]
    QubitOutOfRange { id: usize, num_qubits: usize },

    #[error("codebook mismatch: header expects {expected:016x}, codebook is {actual:016x}")]
    CodebookMismatch { expected: u64, actual: u64 },

    #[error("corrupt data in {stage}: {msg}")]
    Corrupt { stage: &'static str, msg: String },

    #[error("empty frequency table")]
    EmptyFrequencies,

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("malformed {kind} file: {msg}")]
    Format { kind: &'static str, msg: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    /// CLI exit status: 2 usage or input files, 3 parse, 4 capacity, 5 integrity,
    /// 1 numerical failure.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Parse { .. } | Error::QubitOutOfRange { .. } | Error::InvalidGate(_) => 3,
            Error::Capacity(_) => 4,
            Error::CodebookMismatch { .. } | Error::Corrupt { .. } => 5,
            Error::InvalidDimension(_)
            | Error::DimensionMismatch { .. }
            | Error::NotUnitary { .. }
            | Error::NotSu2(_)
            | Error::NoConvergence { .. }
            | Error::Residual { .. } => 1,
            Error::NotInverseClosed(_)
            | Error::NoInverse(_)
            | Error::UnknownToken(_)
            | Error::EmptyFrequencies
            | Error::InvalidArgument(_)
            | Error::Format { .. }
            | Error::Io(_) => 2,
        }
    }

    pub(crate) fn corrupt(stage: &'static str, msg: impl Into<String>) -> Self {
        Error::Corrupt {
            stage,
            msg: msg.into(),
        }
    }

    pub(crate) fn format(kind: &'static str, msg: impl Into<String>) -> Self {
        Error::Format {
            kind,
            msg: msg.into(),
        }
    }
}
