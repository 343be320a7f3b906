use std::collections::BTreeMap;

use super::{extract_seeds, flood, split_components, Component, SplitConfig};
use crate::error::{Error, Result};
use crate::grid::{Connectivity, InstanceGrid, LabelGrid, ScalarField};

/// Field-driven splitter. The relief `dist - boundary_suppression * bnd`
/// is seeded at `seed_threshold` of each component's peak and flooded;
/// pieces below `min_instance_area` are then merged into the neighbor
/// sharing the longest border.
pub fn geometry_split(
    mask: &LabelGrid,
    class_id: u16,
    dist: &ScalarField,
    bnd: &ScalarField,
    cfg: &SplitConfig,
) -> Result<InstanceGrid> {
    cfg.validate()?;
    mask.shape().check_same(&dist.shape())?;
    mask.shape().check_same(&bnd.shape())?;
    if dist.as_slice().iter().chain(bnd.as_slice()).any(|v| !v.is_finite()) {
        return Err(Error::invalid(
            "distance or boundary field contains NaN or infinite values",
        ));
    }
    split_components(mask, class_id, cfg.connectivity, |comp| {
        let d = comp.gather(dist);
        let b = comp.gather(bnd);
        let relief: Vec<f64> = d
            .iter()
            .zip(&b)
            .map(|(&d, &b)| d - cfg.boundary_suppression * b)
            .collect();
        let (seeds, count) = extract_seeds(comp, &relief, cfg.seed_threshold, 1, cfg.connectivity);
        if count <= 1 {
            return Ok(comp.whole());
        }
        let mut labels = flood(comp, &relief, seeds, cfg.connectivity);
        merge_small(comp, &mut labels, cfg.min_instance_area, cfg.connectivity);
        Ok(labels)
    })
}

/// Repeatedly merges the lowest-labeled piece smaller than `min_area`
/// into the neighbor with the longest shared border (lowest label on
/// ties). Pieces with no neighbor are left alone.
fn merge_small(comp: &Component, labels: &mut [u32], min_area: usize, conn: Connectivity) {
    let shape = comp.shape;
    loop {
        let mut area: BTreeMap<u32, usize> = BTreeMap::new();
        for &l in labels.iter().filter(|&&l| l != 0) {
            *area.entry(l).or_default() += 1;
        }
        // border[(a, b)] counts adjacent pixel pairs between labels a and b
        let mut border: BTreeMap<(u32, u32), usize> = BTreeMap::new();
        for p in 0..shape.len() {
            let a = labels[p];
            if a == 0 {
                continue;
            }
            for &(dr, dc) in conn.offsets() {
                if let Some(q) = shape.offset(p, dr, dc) {
                    let b = labels[q];
                    if b != 0 && b != a && p < q {
                        *border.entry((a, b)).or_default() += 1;
                        *border.entry((b, a)).or_default() += 1;
                    }
                }
            }
        }
        let target = area.iter().filter(|&(_, &n)| n < min_area).find_map(|(&small, _)| {
            border
                .range((small, 0)..=(small, u32::MAX))
                .map(|(&(_, other), &len)| (other, len))
                .max_by(|x, y| x.1.cmp(&y.1).then(y.0.cmp(&x.0)))
                .map(|(other, _)| (small, other))
        });
        let Some((small, into)) = target else { break };
        for l in labels.iter_mut() {
            if *l == small {
                *l = into;
            }
        }
    }
}
