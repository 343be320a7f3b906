//! Splitting merged semantic regions into instances.
//!
//! Each connected component of the requested class is cut out (with a
//! one-pixel background ring), split independently, and written back in
//! component order. Within a component, output ids follow raster order of
//! each piece's first pixel, so results are deterministic.

mod geometry;
mod morphology;
mod skeleton;
mod watershed;

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use serde::{Deserialize, Serialize};

pub use geometry::geometry_split;
pub use morphology::morphology_split;
pub use skeleton::{skeleton_split, zhang_suen};
pub use watershed::watershed_split;

use crate::error::{Error, Result};
use crate::grid::{BBox, Connectivity, GridShape, InstanceGrid, LabelGrid, Mask, ScalarField, MAX_INSTANCES};
use crate::labeling::{label_mask, on_boundary};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SplitConfig {
    /// Seeds are the regions at or above this fraction of the component's
    /// peak relief.
    pub seed_threshold: f64,
    pub min_seed_area: usize,
    /// Geometry splitter only: smaller pieces are merged into a neighbor.
    pub min_instance_area: usize,
    /// Weight of the boundary band subtracted from the distance field.
    pub boundary_suppression: f64,
    pub opening_radius: usize,
    pub connectivity: Connectivity,
}

impl Default for SplitConfig {
    fn default() -> Self {
        Self {
            seed_threshold: 0.5,
            min_seed_area: 4,
            min_instance_area: 16,
            boundary_suppression: 1.0,
            opening_radius: 3,
            connectivity: Connectivity::Eight,
        }
    }
}

impl SplitConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.seed_threshold > 0.0 && self.seed_threshold < 1.0) {
            return Err(Error::invalid(format!(
                "seed_threshold must lie in (0, 1), got {}",
                self.seed_threshold
            )));
        }
        if self.min_seed_area == 0 || self.min_instance_area == 0 {
            return Err(Error::invalid("minimum areas must be >= 1"));
        }
        if !(0.0..=1.0).contains(&self.boundary_suppression) {
            return Err(Error::invalid(format!(
                "boundary_suppression must lie in [0, 1], got {}",
                self.boundary_suppression
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SplitMethod {
    Watershed,
    Skeleton,
    Morphology,
    Geometry,
}

impl std::str::FromStr for SplitMethod {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "watershed" => Ok(SplitMethod::Watershed),
            "skeleton" => Ok(SplitMethod::Skeleton),
            "morphology" => Ok(SplitMethod::Morphology),
            "geometry" => Ok(SplitMethod::Geometry),
            other => Err(Error::invalid(format!("unknown split method `{other}`"))),
        }
    }
}

/// Runs `method` on the `class_id` pixels of `mask`. Only the geometry
/// method reads `fields`, given as (distance, boundary) predictions.
pub fn split(
    method: SplitMethod,
    mask: &LabelGrid,
    class_id: u16,
    fields: Option<(&ScalarField, &ScalarField)>,
    cfg: &SplitConfig,
) -> Result<InstanceGrid> {
    match method {
        SplitMethod::Watershed => watershed_split(mask, class_id, cfg),
        SplitMethod::Skeleton => skeleton_split(mask, class_id, cfg),
        SplitMethod::Morphology => morphology_split(mask, class_id, cfg),
        SplitMethod::Geometry => {
            let (dist, bnd) =
                fields.ok_or_else(|| Error::invalid("the geometry method needs distance and boundary fields"))?;
            geometry_split(mask, class_id, dist, bnd, cfg)
        }
    }
}

/// One connected component, cropped to its bounding box plus a one-pixel
/// ring of non-member pixels.
pub(crate) struct Component {
    pub shape: GridShape,
    pub member: Vec<bool>,
    /// Grid coordinates of crop pixel (0, 0).
    origin: (isize, isize),
    grid: GridShape,
}

impl Component {
    fn new(labels: &[u32], label: u32, bbox: BBox, grid: GridShape) -> Self {
        let shape = GridShape::new(bbox.height() + 2, bbox.width() + 2).expect("nonempty box");
        let origin = (bbox.row0 as isize - 1, bbox.col0 as isize - 1);
        let mut comp = Self {
            shape,
            member: vec![false; shape.len()],
            origin,
            grid,
        };
        for r in 0..shape.height {
            for c in 0..shape.width {
                if let Some(g) = comp.grid_index(r, c) {
                    comp.member[shape.index(r, c)] = labels[g] == label;
                }
            }
        }
        comp
    }

    fn grid_index(&self, r: usize, c: usize) -> Option<usize> {
        let gr = r as isize + self.origin.0;
        let gc = c as isize + self.origin.1;
        if gr < 0 || gc < 0 || gr >= self.grid.height as isize || gc >= self.grid.width as isize {
            None
        } else {
            Some(self.grid.index(gr as usize, gc as usize))
        }
    }

    /// Field values over the crop; 0 off the grid.
    pub fn gather(&self, field: &ScalarField) -> Vec<f64> {
        let mut out = vec![0.0; self.shape.len()];
        for r in 0..self.shape.height {
            for c in 0..self.shape.width {
                if let Some(g) = self.grid_index(r, c) {
                    out[self.shape.index(r, c)] = field.as_slice()[g];
                }
            }
        }
        out
    }

    /// All members under one label.
    pub fn whole(&self) -> Vec<u32> {
        self.member.iter().map(|&m| m as u32).collect()
    }

    /// Euclidean distance from each pixel to the nearest non-member.
    pub fn interior_distance(&self) -> Vec<f64> {
        let outside: Vec<bool> = self.member.iter().map(|&m| !m).collect();
        crate::edt::distance_to(self.shape, &outside)
    }
}

/// Runs `split` on every component of `class_id` and assembles the result.
pub(crate) fn split_components(
    mask: &LabelGrid,
    class_id: u16,
    conn: Connectivity,
    mut split: impl FnMut(&Component) -> Result<Vec<u32>>,
) -> Result<InstanceGrid> {
    let grid = mask.shape();
    let (labels, count) = label_mask(&mask.class_mask(class_id), conn);
    let mut boxes = vec![BBox::EMPTY; count];
    for (i, &l) in labels.iter().enumerate() {
        if l != 0 {
            let (r, c) = grid.coords(i);
            boxes[l as usize - 1].include(r, c);
        }
    }
    let mut ids = vec![0u16; grid.len()];
    let mut next: usize = 1;
    for (k, bbox) in boxes.into_iter().enumerate() {
        let comp = Component::new(&labels, (k + 1) as u32, bbox, grid);
        let local = split(&comp)?;
        debug_assert_eq!(local.len(), comp.shape.len());
        let mut map = std::collections::HashMap::new();
        for r in 0..comp.shape.height {
            for c in 0..comp.shape.width {
                let i = comp.shape.index(r, c);
                if !comp.member[i] {
                    continue;
                }
                let l = local[i];
                if l == 0 {
                    return Err(Error::invalid("splitter left a foreground pixel unlabeled"));
                }
                let id = *map.entry(l).or_insert_with(|| {
                    next += 1;
                    next - 1
                });
                if id > MAX_INSTANCES {
                    return Err(Error::TooManyInstances(id));
                }
                let g = comp.grid_index(r, c).expect("members lie on the grid");
                ids[g] = id as u16;
            }
        }
    }
    InstanceGrid::from_vec(grid, ids)
}

/// Seed regions: connected sets of members with `relief >= frac * peak`,
/// at least `min_area` pixels each. Returns per-pixel seed labels and the
/// seed count; no seeds when the peak is not positive.
pub(crate) fn extract_seeds(
    comp: &Component,
    relief: &[f64],
    frac: f64,
    min_area: usize,
    conn: Connectivity,
) -> (Vec<u32>, usize) {
    let peak = comp
        .member
        .iter()
        .zip(relief)
        .filter(|(&m, _)| m)
        .map(|(_, &v)| v)
        .fold(f64::NEG_INFINITY, f64::max);
    if peak.is_nan() || peak <= 0.0 {
        return (vec![0; comp.shape.len()], 0);
    }
    let level = frac * peak;
    let above: Vec<bool> = comp.member.iter().zip(relief).map(|(&m, &v)| m && v >= level).collect();
    let above = Mask::from_vec(comp.shape, above).expect("crop shape");
    let (labels, count) = label_mask(&above, conn);
    keep_large(labels, count, min_area)
}

/// Drops labels smaller than `min_area` and renumbers the rest in order.
pub(crate) fn keep_large(mut labels: Vec<u32>, count: usize, min_area: usize) -> (Vec<u32>, usize) {
    let mut area = vec![0usize; count + 1];
    for &l in &labels {
        area[l as usize] += 1;
    }
    let mut remap = vec![0u32; count + 1];
    let mut kept = 0;
    for l in 1..=count {
        if area[l] >= min_area {
            kept += 1;
            remap[l] = kept as u32;
        }
    }
    for l in &mut labels {
        *l = remap[*l as usize];
    }
    (labels, kept)
}

#[derive(PartialEq)]
struct FloodItem {
    relief: f64,
    index: usize,
    label: u32,
}

impl Eq for FloodItem {}

impl Ord for FloodItem {
    // Max-heap: highest relief first, then lowest raster index, then
    // lowest label.
    fn cmp(&self, other: &Self) -> Ordering {
        self.relief
            .total_cmp(&other.relief)
            .then_with(|| other.index.cmp(&self.index))
            .then_with(|| other.label.cmp(&self.label))
    }
}

impl PartialOrd for FloodItem {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Marker-based watershed: grows `markers` over the members, visiting the
/// highest relief first.
pub(crate) fn flood(comp: &Component, relief: &[f64], markers: Vec<u32>, conn: Connectivity) -> Vec<u32> {
    let shape = comp.shape;
    let mut labels = markers;
    let mut heap = BinaryHeap::new();
    // A pixel enters the queue once, carrying the label of the first
    // region to reach it.
    let mut queued: Vec<bool> = labels.iter().map(|&l| l != 0).collect();
    let mut push_neighbors = |heap: &mut BinaryHeap<FloodItem>, labels: &[u32], p: usize| {
        for &(dr, dc) in conn.offsets() {
            if let Some(q) = shape.offset(p, dr, dc) {
                if comp.member[q] && !queued[q] {
                    queued[q] = true;
                    heap.push(FloodItem {
                        relief: relief[q],
                        index: q,
                        label: labels[p],
                    });
                }
            }
        }
    };
    for p in 0..shape.len() {
        if labels[p] != 0 {
            push_neighbors(&mut heap, &labels, p);
        }
    }
    while let Some(FloodItem { index, label, .. }) = heap.pop() {
        labels[index] = label;
        push_neighbors(&mut heap, &labels, index);
    }
    labels
}

/// Assigns each member to the nearest labeled region (Euclidean, ties to
/// the lowest label). Only region boundary pixels need to be compared.
pub(crate) fn nearest_region(comp: &Component, regions: &[u32]) -> Vec<u32> {
    let shape = comp.shape;
    let sources: Vec<(isize, isize, u32)> = (0..shape.len())
        .filter(|&i| regions[i] != 0 && on_boundary(shape, regions, i))
        .map(|i| {
            let (r, c) = shape.coords(i);
            (r as isize, c as isize, regions[i])
        })
        .collect();
    let mut out = vec![0u32; shape.len()];
    for i in 0..shape.len() {
        if !comp.member[i] {
            continue;
        }
        if regions[i] != 0 {
            out[i] = regions[i];
            continue;
        }
        let (r, c) = shape.coords(i);
        let (r, c) = (r as isize, c as isize);
        let mut best = (isize::MAX, u32::MAX);
        for &(sr, sc, l) in &sources {
            let d = (sr - r) * (sr - r) + (sc - c) * (sc - c);
            if (d, l) < best {
                best = (d, l);
            }
        }
        out[i] = best.1;
    }
    out
}
