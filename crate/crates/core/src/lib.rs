//! Exact verification toolkit for piecewise linear cut-generating functions
//! of the one-dimensional Gomory–Johnson infinite group problem.

pub mod additivity;
pub mod catalog;
pub mod complex2d;
pub mod covering;
pub mod error;
pub mod exactnum;
pub mod perturbation;
pub mod pwl;
pub mod verify;

pub use error::{Error, Result};
pub use exactnum::{parse_qnum, q, QNum, Rat};
