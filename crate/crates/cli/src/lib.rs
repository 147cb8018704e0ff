//! Support code for the `gjf` binary: loading functions and rendering
//! diagrams of the complex ΔP.

pub mod diagram;
pub mod input;
