//! Geometric supervision targets derived from an instance map.
//!
//! Two fields are produced per image:
//!
//! * a distance field: each instance's exact distance-to-boundary,
//!   normalized by that instance's own maximum and reshaped with
//!   `(exp(alpha * x) - 1) / (exp(alpha) - 1)`;
//! * a boundary band: the per-instance morphological gradient
//!   (dilation minus erosion), OR-ed over all instances.

use serde::{Deserialize, Serialize};

use crate::edt;
use crate::error::{Error, Result};
use crate::grid::{InstanceGrid, Mask, ScalarField};
use crate::labeling::on_boundary;
use crate::morphology::{morphological_gradient, StructuringElement};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DistanceConfig {
    /// Sharpness of the exponential reshaping.
    pub alpha: f64,
    /// Guard added to the per-instance maximum.
    pub epsilon: f64,
}

impl Default for DistanceConfig {
    fn default() -> Self {
        Self {
            alpha: 3.0,
            epsilon: 1e-6,
        }
    }
}

impl DistanceConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.alpha > 0.0 && self.alpha.is_finite()) {
            return Err(Error::invalid(format!("alpha must be > 0, got {}", self.alpha)));
        }
        if !(self.epsilon > 0.0 && self.epsilon.is_finite()) {
            return Err(Error::invalid(format!("epsilon must be > 0, got {}", self.epsilon)));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct BoundaryConfig {
    pub band_half_width: usize,
    pub se_shape: StructuringElement,
}

impl Default for BoundaryConfig {
    fn default() -> Self {
        Self {
            band_half_width: 2,
            se_shape: StructuringElement::Square,
        }
    }
}

impl BoundaryConfig {
    pub fn validate(&self) -> Result<()> {
        if self.band_half_width == 0 {
            return Err(Error::invalid("band width must be >= 1"));
        }
        Ok(())
    }
}

/// Per-instance distance to the instance's inner boundary, divided by the
/// instance maximum plus `epsilon`. Background stays 0.
pub fn normalized_distance_field(inst: &InstanceGrid, cfg: &DistanceConfig) -> Result<ScalarField> {
    cfg.validate()?;
    let shape = inst.shape();
    let ids = inst.as_slice();
    let mut out = ScalarField::zeros(shape);
    for (k, bbox) in inst.bounding_boxes().into_iter().enumerate() {
        let id = (k + 1) as u16;
        let crop = crate::grid::GridShape::new(bbox.height(), bbox.width())?;
        let mut features = vec![false; crop.len()];
        for r in 0..crop.height {
            for c in 0..crop.width {
                let g = shape.index(bbox.row0 + r, bbox.col0 + c);
                features[crop.index(r, c)] = ids[g] == id && on_boundary(shape, ids, g);
            }
        }
        if !features.iter().any(|&f| f) {
            return Err(Error::DegenerateRegion);
        }
        let dist = edt::distance_to(crop, &features);
        let mut max = 0.0f64;
        for r in 0..crop.height {
            for c in 0..crop.width {
                if ids[shape.index(bbox.row0 + r, bbox.col0 + c)] == id {
                    max = max.max(dist[crop.index(r, c)]);
                }
            }
        }
        let denom = max + cfg.epsilon;
        let values = out.as_mut_slice();
        for r in 0..crop.height {
            for c in 0..crop.width {
                let g = shape.index(bbox.row0 + r, bbox.col0 + c);
                if ids[g] == id {
                    values[g] = dist[crop.index(r, c)] / denom;
                }
            }
        }
    }
    Ok(out)
}

/// `(exp(alpha * x) - 1) / (exp(alpha) - 1)`.
#[inline]
pub fn reparameterize(x: f64, alpha: f64) -> f64 {
    (alpha * x).exp_m1() / alpha.exp_m1()
}

pub fn exp_reparameterize(x: &ScalarField, alpha: f64) -> Result<ScalarField> {
    if !(alpha > 0.0 && alpha.is_finite()) {
        return Err(Error::invalid(format!("alpha must be > 0, got {alpha}")));
    }
    if let Some(v) = x.as_slice().iter().find(|v| !(0.0..=1.0).contains(*v)) {
        return Err(Error::invalid(format!("normalized distance {v} outside [0, 1]")));
    }
    Ok(x.map(|v| reparameterize(v, alpha)))
}

/// Binary band map: union over instances of `dilate(M_i) - erode(M_i)`.
pub fn boundary_band(inst: &InstanceGrid, cfg: &BoundaryConfig) -> Result<ScalarField> {
    cfg.validate()?;
    let shape = inst.shape();
    let ids = inst.as_slice();
    let w = cfg.band_half_width;
    let mut out = ScalarField::zeros(shape);
    for (k, bbox) in inst.bounding_boxes().into_iter().enumerate() {
        let id = (k + 1) as u16;
        let win = bbox.padded(w, shape);
        let crop = crate::grid::GridShape::new(win.height(), win.width())?;
        let mut region = Mask::new(crop);
        for r in 0..crop.height {
            for c in 0..crop.width {
                if ids[shape.index(win.row0 + r, win.col0 + c)] == id {
                    region.set(r, c, true);
                }
            }
        }
        let band = morphological_gradient(&region, cfg.se_shape, w);
        let values = out.as_mut_slice();
        for (r, c) in band.pixels() {
            values[shape.index(win.row0 + r, win.col0 + c)] = 1.0;
        }
    }
    Ok(out)
}

/// Distance target and boundary band for one instance map.
#[derive(Debug, Clone, PartialEq)]
pub struct Targets {
    pub distance: ScalarField,
    pub boundary: ScalarField,
}

pub fn gen_targets(inst: &InstanceGrid, dcfg: &DistanceConfig, bcfg: &BoundaryConfig) -> Result<Targets> {
    let x = normalized_distance_field(inst, dcfg)?;
    let distance = exp_reparameterize(&x, dcfg.alpha)?;
    let boundary = boundary_band(inst, bcfg)?;
    Ok(Targets { distance, boundary })
}
