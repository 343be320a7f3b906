//! File formats: 16-bit binary PGM for label and instance grids, `MGF1`
//! for float fields.

pub mod mgf;
pub mod pgm;
