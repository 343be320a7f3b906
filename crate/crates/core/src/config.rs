//! Flat JSON experiment configuration.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::Connectivity;
use crate::losses::LossWeights;
use crate::morphology::StructuringElement;
use crate::split::SplitConfig;
use crate::targets::{BoundaryConfig, DistanceConfig};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Config {
    pub alpha: f64,
    pub epsilon: f64,
    pub band_width: usize,
    pub se_shape: StructuringElement,
    pub connectivity: Connectivity,
    pub neighbor_distance: f64,
    pub lambda_sep: f64,
    pub lambda_feature: f64,
    pub lambda_reg: f64,
    pub lambda_bd: f64,
    /// `None` selects the automatic negative/positive ratio.
    pub pos_weight: Option<f64>,
    pub seed_threshold: f64,
    pub min_seed_area: usize,
    pub min_instance_area: usize,
    pub boundary_suppression: f64,
    pub opening_radius: usize,
}

impl Default for Config {
    fn default() -> Self {
        let d = DistanceConfig::default();
        let b = BoundaryConfig::default();
        let w = LossWeights::default();
        let s = SplitConfig::default();
        Self {
            alpha: d.alpha,
            epsilon: d.epsilon,
            band_width: b.band_half_width,
            se_shape: b.se_shape,
            connectivity: Connectivity::Eight,
            neighbor_distance: 10.0,
            lambda_sep: w.lambda_sep,
            lambda_feature: w.lambda_feature,
            lambda_reg: w.lambda_reg,
            lambda_bd: w.lambda_bd,
            pos_weight: None,
            seed_threshold: s.seed_threshold,
            min_seed_area: s.min_seed_area,
            min_instance_area: s.min_instance_area,
            boundary_suppression: s.boundary_suppression,
            opening_radius: s.opening_radius,
        }
    }
}

impl Config {
    pub fn from_json(text: &str) -> std::result::Result<Self, serde_json::Error> {
        serde_json::from_str(text)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|source| Error::Io {
            path: path.to_path_buf(),
            source,
        })?;
        Self::from_json(&text).map_err(|e| Error::Format {
            path: path.to_path_buf(),
            reason: e.to_string(),
        })
    }

    pub fn validate(&self) -> Result<()> {
        self.distance().validate()?;
        self.boundary().validate()?;
        self.weights().validate()?;
        self.split().validate()?;
        if !(self.neighbor_distance >= 0.0 && self.neighbor_distance.is_finite()) {
            return Err(Error::invalid("neighbor_distance must be >= 0"));
        }
        if let Some(w) = self.pos_weight {
            if !(w >= 0.0 && w.is_finite()) {
                return Err(Error::invalid("pos_weight must be >= 0"));
            }
        }
        Ok(())
    }

    pub fn distance(&self) -> DistanceConfig {
        DistanceConfig {
            alpha: self.alpha,
            epsilon: self.epsilon,
        }
    }

    pub fn boundary(&self) -> BoundaryConfig {
        BoundaryConfig {
            band_half_width: self.band_width,
            se_shape: self.se_shape,
        }
    }

    pub fn weights(&self) -> LossWeights {
        LossWeights {
            lambda_sep: self.lambda_sep,
            lambda_feature: self.lambda_feature,
            lambda_reg: self.lambda_reg,
            lambda_bd: self.lambda_bd,
        }
    }

    pub fn split(&self) -> SplitConfig {
        SplitConfig {
            seed_threshold: self.seed_threshold,
            min_seed_area: self.min_seed_area,
            min_instance_area: self.min_instance_area,
            boundary_suppression: self.boundary_suppression,
            opening_radius: self.opening_radius,
            connectivity: self.connectivity,
        }
    }
}
