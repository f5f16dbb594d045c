//! Crate-wide error type.

use thiserror::Error;

use crate::sparse::Stage;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected} features, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },

    #[error("a pattern must have at least one feature")]
    EmptyPattern,

    #[error("a training set must contain at least one member")]
    EmptyTrainingSet,

    #[error("class label {label} out of range for {class_count} classes")]
    LabelOutOfRange { label: usize, class_count: usize },

    #[error("cannot apply {op} at stage {actual}")]
    WrongStage { op: &'static str, actual: Stage },

    #[error("invalid parameter {name}: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    /// Every training pattern sits exactly on a cosine zero, so the
    /// ancilla can never be measured in |0>.
    #[error("postselection impossible: ancilla-zero probability is {probability:.3e}")]
    PostselectionImpossible { probability: f64 },

    /// Statistical failure: the ancilla-zero outcome has nonzero
    /// probability but none of the shots hit it.
    #[error("postselection exhausted: all {shots} shots measured ancilla |1>")]
    PostselectionExhausted { shots: u32 },

    #[error("instance needs {required} qubits, the dense simulator is capped at {cap}")]
    QubitCapExceeded { required: usize, cap: usize },

    #[error("members {first} and {second} share (pattern, class); the dense simulator requires distinct basis kets")]
    DuplicateTrainingKet { first: usize, second: usize },

    #[error("index {index} out of range ({len} available)")]
    IndexOutOfRange { index: usize, len: usize },

    #[error("bad IDX magic: expected {expected}, found {found}")]
    IdxMagic { expected: u32, found: u32 },

    #[error("IDX length mismatch: expected {expected} bytes, found {found}")]
    IdxLength { expected: usize, found: usize },

    #[error("IDX label byte {value} exceeds 9")]
    IdxLabelValue { value: u8 },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}
