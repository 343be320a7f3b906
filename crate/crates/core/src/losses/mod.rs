//! Auxiliary training losses with analytic gradients.
//!
//! Every loss returns its value together with the gradient with respect to
//! the predicted input (raw embeddings, distance predictions or boundary
//! logits). Accumulations run in raster order so results are
//! bit-reproducible.

mod boundary;
mod disentangle;
mod distance;

use serde::{Deserialize, Serialize};

pub use boundary::{auto_pos_weight, boundary_bce};
pub use disentangle::{
    disentangle_loss, instance_prototypes, neighbor_pairs, normalize_embeddings, NeighborPairSet, PrototypeSet,
};
pub use distance::bal_wmse;

/// Loss value and its gradient, shaped like the differentiated input.
#[derive(Debug, Clone, PartialEq)]
pub struct LossResult<G> {
    pub value: f64,
    pub gradient: G,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LossWeights {
    pub lambda_sep: f64,
    pub lambda_feature: f64,
    pub lambda_reg: f64,
    pub lambda_bd: f64,
}

impl Default for LossWeights {
    fn default() -> Self {
        Self {
            lambda_sep: 1.0,
            lambda_feature: 1.0,
            lambda_reg: 1.0,
            lambda_bd: 1.0,
        }
    }
}

impl LossWeights {
    pub fn validate(&self) -> crate::Result<()> {
        for (name, v) in [
            ("lambda_sep", self.lambda_sep),
            ("lambda_feature", self.lambda_feature),
            ("lambda_reg", self.lambda_reg),
            ("lambda_bd", self.lambda_bd),
        ] {
            if !(v >= 0.0 && v.is_finite()) {
                return Err(crate::Error::InvalidInput(format!(
                    "{name} must be a finite value >= 0, got {v}"
                )));
            }
        }
        Ok(())
    }
}

/// Detector loss plus the weighted auxiliary terms. The detector loss is
/// an opaque scalar supplied by the caller.
pub fn total_loss(l_det: f64, l_dis: f64, l_dist: f64, l_bnd: f64, w: &LossWeights) -> f64 {
    l_det + w.lambda_feature * l_dis + w.lambda_reg * l_dist + w.lambda_bd * l_bnd
}
