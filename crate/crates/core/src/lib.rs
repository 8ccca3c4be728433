//! Measurement core for labelled vestibular schwannoma masks.
//!
//! Voxel labels are `0` background, `1` intrameatal and `2` extrameatal.
//! The crate is `no_std` (it needs `alloc`) and does no IO; file formats,
//! rendering and the command line live in the `vsmeasure` crate.

#![no_std]

extern crate alloc;
#[cfg(test)]
extern crate std;

pub mod agreement;
pub mod geometry;
pub mod measurement;
pub mod morphology;
pub mod phantom;
pub mod stats;
pub mod volume;

pub use geometry::{Hull, Point2, Segment2D, UnitDir2D};
pub use measurement::{measure_session, ChosenKind, Diameter, DiameterKind, MeasureError, MeasurementReport};
pub use morphology::BoundaryConvention;
pub use volume::{LabelSelector, LabelVolume, Modality, OperativeStatus, SessionMeta};
