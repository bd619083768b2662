use std::io;

use thiserror::Error;

/// Errors produced while parsing inputs, training, or loading models.
#[derive(Debug, Error)]
pub enum NluError {
    #[error("I/O error: {0}")]
    Io(#[from] io::Error),

    #[error("malformed XML at line {line}: {message}")]
    Xml { line: u32, message: String },

    #[error("invalid corpus: {0}")]
    Corpus(String),

    #[error("invalid corpus: interaction {index}: {message}")]
    Interaction { index: usize, message: String },

    #[error("dictionary line {line}: {message}")]
    Dictionary { line: usize, message: String },

    #[error("answers line {line}: {message}")]
    Answers { line: usize, message: String },

    #[error("unknown category `{0}`")]
    UnknownCategory(String),

    #[error("malformed template `{template}`: {message}")]
    Template { template: String, message: String },

    #[error("training set is empty")]
    EmptyTrainingSet,

    #[error("invalid hyperparameters: {0}")]
    Hyperparams(String),

    #[error("feature dimension mismatch: model expects {expected}, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },

    #[error("model format error: {0}")]
    ModelFormat(String),

    #[error("model file corrupted: {0}")]
    ModelCorrupt(String),

    #[error("gazetteer mismatch: {0}")]
    Gazetteer(String),

    #[error("evaluation error: {0}")]
    Eval(String),

    #[error("missing answers for category `{0}`")]
    MissingAnswers(String),
}

pub type Result<T> = std::result::Result<T, NluError>;
