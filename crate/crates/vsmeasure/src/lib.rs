//! File formats, batch orchestration, SVG rendering and the `vsmeasure`
//! command line, built on `vsmeasure-core`.

pub mod agree;
pub mod atomic;
pub mod batch;
pub mod canonical;
pub mod cli;
pub mod error;
pub mod nifti;
pub mod report;
pub mod svg;

pub use error::{Error, Result};
