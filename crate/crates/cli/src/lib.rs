//! Support library for the mkstat binary: experiment-file model and
//! report rendering.

pub mod model;
pub mod report;
