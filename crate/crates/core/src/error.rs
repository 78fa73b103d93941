use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("register of {requested} qubits exceeds the configured maximum of {max}")]
    Capacity { requested: usize, max: usize },

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("qubit index {index} out of range 1..={n_qubits}")]
    QubitOutOfRange { index: usize, n_qubits: usize },

    #[error("operation needs at least {needed} qubits, state has {got}")]
    TooFewQubits { needed: usize, got: usize },

    #[error("invalid state: {0}")]
    InvalidState(String),

    #[error("invalid gate: {0}")]
    InvalidGate(String),

    #[error("invalid channel: {0}")]
    InvalidChannel(String),

    #[error("outcome {outcome} on qubit {qubit} has probability {probability:e}")]
    ImpossibleOutcome {
        qubit: usize,
        outcome: u8,
        probability: f64,
    },

    #[error("protocol order violated: {0}")]
    ProtocolOrder(String),

    #[error("{0}")]
    Domain(String),

    #[error("parse error on line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("fixture error: {0}")]
    Fixture(String),
}
