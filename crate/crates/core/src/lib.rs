//! Analytics core for multimodal recordings of collaborative design workshops.
//!
//! Everything in this crate is a pure function over in-memory values: gaze
//! fixations and AOI hit testing, per-AOI attention and activity series,
//! penalized change-point segmentation refined by dialogue embeddings,
//! note-snapshot diffing, and topic-card authoring. File formats, the CLI and
//! the HTTP service live in the `recapit` crate.
//!
//! The crate is `no_std` and only needs `alloc`.
#![no_std]
#![warn(missing_debug_implementations)]
// `!(x > 0.0)` deliberately rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

extern crate alloc;

#[cfg(test)]
extern crate std;

pub mod activity;
pub mod attention;
pub mod cards;
pub mod geometry;
pub mod model;
pub mod notes;
pub mod segmentation;
pub mod series;
pub mod stream;
mod text;

pub use geometry::{Homography, Point};
pub use model::{
    Aoi, AuthoringState, Participant, Rgb, Role, SegmentationConfig, SignalKind, SourceDescriptor, SourceKind,
    TimeSpan, WorkshopProject,
};
pub use series::{HeatGrid, MultivariateSeries};
