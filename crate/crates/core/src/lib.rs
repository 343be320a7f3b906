//! Geometric training targets, auxiliary losses, instance splitters and a
//! COCO-style mask evaluator for semantic-to-instance segmentation on 2-D
//! grids.
//!
//! The typical flow is: derive distance and boundary targets from ground
//! truth instances ([`targets::gen_targets`]), score predictions with the
//! losses in [`losses`], turn a semantic mask plus predicted fields into
//! instances with one of the [`split`] methods, and score the result with
//! [`eval::map_report`].

pub mod config;
pub mod edt;
pub mod error;
pub mod eval;
pub mod gradcheck;
pub mod grid;
pub mod io;
pub mod labeling;
pub mod losses;
pub mod morphology;
pub mod split;
pub mod synth;
pub mod targets;

pub use error::{Error, Result};
pub use grid::{Connectivity, EmbeddingField, GridShape, InstanceGrid, LabelGrid, Mask, ScalarField};
