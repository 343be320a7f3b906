use super::{keep_large, nearest_region, split_components, SplitConfig};
use crate::error::Result;
use crate::grid::{InstanceGrid, LabelGrid, Mask};
use crate::labeling::label_mask;

/// Erosion-based splitting: erode each component with a Euclidean disc of
/// `opening_radius`, keep cores of at least `min_seed_area` pixels and
/// hand every pixel to its nearest core.
pub fn morphology_split(mask: &LabelGrid, class_id: u16, cfg: &SplitConfig) -> Result<InstanceGrid> {
    cfg.validate()?;
    let radius = cfg.opening_radius as f64;
    split_components(mask, class_id, cfg.connectivity, |comp| {
        let dist = comp.interior_distance();
        let core: Vec<bool> = comp.member.iter().zip(&dist).map(|(&m, &d)| m && d > radius).collect();
        let core = Mask::from_vec(comp.shape, core).expect("crop shape");
        let (labels, count) = label_mask(&core, cfg.connectivity);
        let (cores, kept) = keep_large(labels, count, cfg.min_seed_area);
        if kept <= 1 {
            return Ok(comp.whole());
        }
        Ok(nearest_region(comp, &cores))
    })
}
