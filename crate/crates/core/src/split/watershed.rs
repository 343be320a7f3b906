use super::{extract_seeds, flood, split_components, SplitConfig};
use crate::error::Result;
use crate::grid::{InstanceGrid, LabelGrid};

/// Distance-transform watershed: seeds are the plateaus of the interior
/// distance above `seed_threshold` of its peak; the rest of the component
/// is flooded from them.
pub fn watershed_split(mask: &LabelGrid, class_id: u16, cfg: &SplitConfig) -> Result<InstanceGrid> {
    cfg.validate()?;
    split_components(mask, class_id, cfg.connectivity, |comp| {
        let dist = comp.interior_distance();
        let (seeds, count) = extract_seeds(comp, &dist, cfg.seed_threshold, cfg.min_seed_area, cfg.connectivity);
        if count <= 1 {
            return Ok(comp.whole());
        }
        Ok(flood(comp, &dist, seeds, cfg.connectivity))
    })
}
