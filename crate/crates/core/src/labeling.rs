//! Connected-component labeling and region boundaries.

use crate::error::{Error, Result};
use crate::grid::{four_neighbors, Connectivity, GridShape, InstanceGrid, LabelGrid, Mask, MAX_INSTANCES};

/// Labels the connected components of `mask`.
///
/// Returns one label per pixel (0 = not in mask) and the number of
/// components. Labels follow raster order of each component's first pixel.
pub fn label_mask(mask: &Mask, conn: Connectivity) -> (Vec<u32>, usize) {
    let shape = mask.shape();
    let data = mask.as_slice();
    let mut labels = vec![0u32; shape.len()];
    let mut count = 0u32;
    let mut stack = Vec::new();
    for start in 0..shape.len() {
        if !data[start] || labels[start] != 0 {
            continue;
        }
        count += 1;
        labels[start] = count;
        stack.push(start);
        while let Some(p) = stack.pop() {
            for &(dr, dc) in conn.offsets() {
                if let Some(q) = shape.offset(p, dr, dc) {
                    if data[q] && labels[q] == 0 {
                        labels[q] = count;
                        stack.push(q);
                    }
                }
            }
        }
    }
    (labels, count as usize)
}

/// Splits the pixels of `class_id` into connected instances.
pub fn connected_components(mask: &LabelGrid, class_id: u16, conn: Connectivity) -> Result<InstanceGrid> {
    let (labels, count) = label_mask(&mask.class_mask(class_id), conn);
    if count > MAX_INSTANCES {
        return Err(Error::TooManyInstances(count));
    }
    let ids = labels.into_iter().map(|l| l as u16).collect();
    InstanceGrid::from_vec(mask.shape(), ids)
}

/// Inner boundary of instance `id`: its pixels with at least one
/// 4-neighbor outside the instance or outside the grid.
pub fn region_boundary(inst: &InstanceGrid, id: u16) -> Result<Mask> {
    inst.check_id(id)?;
    let shape = inst.shape();
    let ids = inst.as_slice();
    let mut out = Mask::new(shape);
    for (i, slot) in out.as_mut_slice().iter_mut().enumerate() {
        *slot = ids[i] == id && on_boundary(shape, ids, i);
    }
    Ok(out)
}

/// Union of the inner boundaries of all instances, in one pass.
pub fn instance_boundaries(inst: &InstanceGrid) -> Mask {
    let shape = inst.shape();
    let ids = inst.as_slice();
    let mut out = Mask::new(shape);
    for (i, slot) in out.as_mut_slice().iter_mut().enumerate() {
        *slot = ids[i] != 0 && on_boundary(shape, ids, i);
    }
    out
}

#[inline]
pub(crate) fn on_boundary<T: PartialEq + Copy>(shape: GridShape, ids: &[T], i: usize) -> bool {
    four_neighbors()
        .iter()
        .any(|&(dr, dc)| shape.offset(i, dr, dc).is_none_or(|q| ids[q] != ids[i]))
}

/// Collapses every instance into a single semantic class.
pub fn merge_to_semantic(inst: &InstanceGrid, class_id: u16) -> LabelGrid {
    let labels = inst
        .as_slice()
        .iter()
        .map(|&id| if id != 0 { class_id } else { 0 })
        .collect();
    LabelGrid::from_vec(inst.shape(), labels).expect("same shape")
}
