use thiserror::Error;

use crate::exactnum::QNum;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("division by zero")]
    DivisionByZero,

    #[error("parse error at position {pos}: {msg}")]
    Parse { pos: usize, msg: String },

    #[error("invalid function: {0}")]
    InvalidFunction(String),

    #[error("point ({0}, {1}) is not a vertex of the face")]
    NotAVertex(QNum, QNum),

    #[error("face {0} is not additive for the function")]
    FaceNotAdditive(String),

    #[error("function is not minimal: {0}")]
    NotMinimal(String),

    #[error("perturbation is not piecewise linear over the complex of the function")]
    NotOverComplex,

    #[error("perturbation is not piecewise linear")]
    NotPiecewiseLinear,

    #[error("perturbation violates a prescribed (limit) additivity: {0}")]
    NotInPerturbationSpace(String),

    #[error("no vertex with positive perturbation slack")]
    NoPositiveSlack,

    #[error("{0}")]
    Other(String),
}

pub type Result<T> = std::result::Result<T, Error>;
