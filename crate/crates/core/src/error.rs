use thiserror::Error;

use crate::netlist::GateKind;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum Error {
    #[error("illegal dual-rail codeword (1,1): {0}")]
    IllegalCodeword(String),

    #[error("{kind} expects {expected} inputs, got {got}")]
    ArityMismatch {
        kind: GateKind,
        expected: usize,
        got: usize,
    },

    #[error("simulation exceeded the step limit of {limit} committed events (oscillation?)")]
    Oscillation { limit: u64 },

    #[error("handshake stalled: {0}")]
    ProtocolStall(String),

    #[error("malformed netlist: {0}")]
    MalformedNetlist(String),

    #[error("delay calibration is inconsistent: {0}")]
    Inconsistent(String),

    #[error("delay calibration leaves {} undetermined", .0.join(", "))]
    Underdetermined(Vec<String>),

    #[error("operand out of range: {0}")]
    Range(String),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("too many primary inputs for exhaustive classification: {got} > {max}")]
    TooManyInputs { got: usize, max: usize },

    #[error("{0} has no relative-timing assumption")]
    UnsupportedKind(String),

    #[error("parse error at {location}: {message}")]
    Parse { location: String, message: String },

    #[error("unknown {what} `{name}`")]
    Unknown { what: &'static str, name: String },

    #[error("i/o error: {0}")]
    Io(String),
}

impl Error {
    pub(crate) fn parse(location: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Parse {
            location: location.into(),
            message: message.into(),
        }
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}
