//! Grid containers shared by every module.
//!
//! All grids are stored row-major; pixel `(row, col)` lives at
//! `row * width + col`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

const MAX_PIXELS: usize = i32::MAX as usize;

/// Largest number of instances an [`InstanceGrid`] can hold.
pub const MAX_INSTANCES: usize = u16::MAX as usize - 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct GridShape {
    pub height: usize,
    pub width: usize,
}

impl GridShape {
    pub fn new(height: usize, width: usize) -> Result<Self> {
        if height == 0 || width == 0 || height.saturating_mul(width) > MAX_PIXELS {
            return Err(Error::InvalidShape { height, width });
        }
        Ok(Self { height, width })
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.height * self.width
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    #[inline]
    pub fn index(&self, row: usize, col: usize) -> usize {
        row * self.width + col
    }

    #[inline]
    pub fn coords(&self, index: usize) -> (usize, usize) {
        (index / self.width, index % self.width)
    }

    /// Offset neighbor of `index`, or `None` when it falls off the grid.
    #[inline]
    pub fn offset(&self, index: usize, dr: isize, dc: isize) -> Option<usize> {
        let (r, c) = self.coords(index);
        let r = r as isize + dr;
        let c = c as isize + dc;
        if r < 0 || c < 0 || r >= self.height as isize || c >= self.width as isize {
            None
        } else {
            Some(r as usize * self.width + c as usize)
        }
    }

    pub(crate) fn check_same(&self, other: &GridShape) -> Result<()> {
        if self != other {
            return Err(Error::ShapeMismatch {
                expected: self.to_string(),
                actual: other.to_string(),
            });
        }
        Ok(())
    }
}

impl std::fmt::Display for GridShape {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}x{}", self.height, self.width)
    }
}

/// Pixel adjacency used for components, seeds and skeletons.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Connectivity {
    Four,
    #[default]
    Eight,
}

const N4: [(isize, isize); 4] = [(-1, 0), (0, -1), (0, 1), (1, 0)];
const N8: [(isize, isize); 8] = [(-1, -1), (-1, 0), (-1, 1), (0, -1), (0, 1), (1, -1), (1, 0), (1, 1)];

impl Connectivity {
    pub fn offsets(self) -> &'static [(isize, isize)] {
        match self {
            Connectivity::Four => &N4,
            Connectivity::Eight => &N8,
        }
    }
}

impl std::str::FromStr for Connectivity {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "four" | "4" => Ok(Connectivity::Four),
            "eight" | "8" => Ok(Connectivity::Eight),
            other => Err(Error::invalid(format!("unknown connectivity `{other}`"))),
        }
    }
}

/// 4-neighborhood offsets, used for inner boundaries.
pub(crate) fn four_neighbors() -> &'static [(isize, isize)] {
    &N4
}

/// Binary pixel set over a grid.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Mask {
    shape: GridShape,
    data: Vec<bool>,
}

impl Mask {
    pub fn new(shape: GridShape) -> Self {
        Self {
            shape,
            data: vec![false; shape.len()],
        }
    }

    pub fn from_vec(shape: GridShape, data: Vec<bool>) -> Result<Self> {
        if data.len() != shape.len() {
            return Err(Error::invalid(format!(
                "mask buffer has {} pixels, shape {shape} needs {}",
                data.len(),
                shape.len()
            )));
        }
        Ok(Self { shape, data })
    }

    pub fn from_pixels(shape: GridShape, pixels: &[(usize, usize)]) -> Result<Self> {
        let mut mask = Self::new(shape);
        for &(r, c) in pixels {
            if r >= shape.height || c >= shape.width {
                return Err(Error::invalid(format!("pixel ({r}, {c}) outside {shape}")));
            }
            mask.data[shape.index(r, c)] = true;
        }
        Ok(mask)
    }

    pub fn shape(&self) -> GridShape {
        self.shape
    }

    pub fn as_slice(&self) -> &[bool] {
        &self.data
    }

    pub fn as_mut_slice(&mut self) -> &mut [bool] {
        &mut self.data
    }

    #[inline]
    pub fn get(&self, row: usize, col: usize) -> bool {
        self.data[self.shape.index(row, col)]
    }

    #[inline]
    pub fn set(&mut self, row: usize, col: usize, value: bool) {
        let i = self.shape.index(row, col);
        self.data[i] = value;
    }

    pub fn count(&self) -> usize {
        self.data.iter().filter(|&&b| b).count()
    }

    pub fn is_empty(&self) -> bool {
        !self.data.iter().any(|&b| b)
    }

    /// Set pixels in raster order.
    pub fn pixels(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        let shape = self.shape;
        self.data
            .iter()
            .enumerate()
            .filter(|(_, &b)| b)
            .map(move |(i, _)| shape.coords(i))
    }

    pub fn is_subset_of(&self, other: &Mask) -> bool {
        self.shape == other.shape && self.data.iter().zip(&other.data).all(|(&a, &b)| !a || b)
    }
}

/// Semantic mask: one class id per pixel, 0 is background.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LabelGrid {
    shape: GridShape,
    labels: Vec<u16>,
}

impl LabelGrid {
    pub fn new(shape: GridShape) -> Self {
        Self {
            shape,
            labels: vec![0; shape.len()],
        }
    }

    pub fn from_vec(shape: GridShape, labels: Vec<u16>) -> Result<Self> {
        if labels.len() != shape.len() {
            return Err(Error::invalid(format!(
                "label buffer has {} pixels, shape {shape} needs {}",
                labels.len(),
                shape.len()
            )));
        }
        Ok(Self { shape, labels })
    }

    pub fn shape(&self) -> GridShape {
        self.shape
    }

    pub fn as_slice(&self) -> &[u16] {
        &self.labels
    }

    #[inline]
    pub fn get(&self, row: usize, col: usize) -> u16 {
        self.labels[self.shape.index(row, col)]
    }

    #[inline]
    pub fn set(&mut self, row: usize, col: usize, value: u16) {
        let i = self.shape.index(row, col);
        self.labels[i] = value;
    }

    /// Pixels carrying `class_id`.
    pub fn class_mask(&self, class_id: u16) -> Mask {
        Mask {
            shape: self.shape,
            data: self.labels.iter().map(|&l| l == class_id).collect(),
        }
    }
}

/// Instance map: ids `1..=num_instances`, 0 is background.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct InstanceGrid {
    shape: GridShape,
    ids: Vec<u16>,
    num_instances: usize,
}

impl InstanceGrid {
    pub fn empty(shape: GridShape) -> Self {
        Self {
            shape,
            ids: vec![0; shape.len()],
            num_instances: 0,
        }
    }

    /// Wraps an id buffer, checking that the ids form the contiguous set
    /// `{0, 1, ..., M}`.
    pub fn from_vec(shape: GridShape, ids: Vec<u16>) -> Result<Self> {
        if ids.len() != shape.len() {
            return Err(Error::invalid(format!(
                "id buffer has {} pixels, shape {shape} needs {}",
                ids.len(),
                shape.len()
            )));
        }
        let max = ids.iter().copied().max().unwrap_or(0) as usize;
        if max > MAX_INSTANCES {
            return Err(Error::TooManyInstances(max));
        }
        let mut seen = vec![false; max + 1];
        for &id in &ids {
            seen[id as usize] = true;
        }
        if let Some(missing) = seen.iter().skip(1).position(|&s| !s) {
            return Err(Error::invalid(format!(
                "instance ids are not contiguous: id {} missing below max {max}",
                missing + 1
            )));
        }
        Ok(Self {
            shape,
            ids,
            num_instances: max,
        })
    }

    /// Renumbers arbitrary ids to `1..=M` in raster order of first
    /// appearance.
    pub fn relabel(shape: GridShape, raw: &[u32]) -> Result<Self> {
        if raw.len() != shape.len() {
            return Err(Error::invalid("raw id buffer does not match shape"));
        }
        let mut map = std::collections::HashMap::new();
        let mut ids = Vec::with_capacity(raw.len());
        for &r in raw {
            if r == 0 {
                ids.push(0);
                continue;
            }
            let next = map.len() + 1;
            let id = *map.entry(r).or_insert(next);
            if id > MAX_INSTANCES {
                return Err(Error::TooManyInstances(id));
            }
            ids.push(id as u16);
        }
        Ok(Self {
            shape,
            ids,
            num_instances: map.len(),
        })
    }

    pub fn shape(&self) -> GridShape {
        self.shape
    }

    pub fn as_slice(&self) -> &[u16] {
        &self.ids
    }

    pub fn num_instances(&self) -> usize {
        self.num_instances
    }

    #[inline]
    pub fn get(&self, row: usize, col: usize) -> u16 {
        self.ids[self.shape.index(row, col)]
    }

    pub fn foreground(&self) -> Mask {
        Mask {
            shape: self.shape,
            data: self.ids.iter().map(|&i| i != 0).collect(),
        }
    }

    pub fn instance_mask(&self, id: u16) -> Result<Mask> {
        self.check_id(id)?;
        Ok(Mask {
            shape: self.shape,
            data: self.ids.iter().map(|&i| i == id).collect(),
        })
    }

    /// Pixel count of every instance, indexed by id (entry 0 is background).
    pub fn areas(&self) -> Vec<usize> {
        let mut areas = vec![0; self.num_instances + 1];
        for &id in &self.ids {
            areas[id as usize] += 1;
        }
        areas
    }

    /// Tight bounding boxes `(row0, col0, row1, col1)` (inclusive), indexed
    /// by `id - 1`.
    pub fn bounding_boxes(&self) -> Vec<BBox> {
        let mut boxes = vec![BBox::EMPTY; self.num_instances];
        for (i, &id) in self.ids.iter().enumerate() {
            if id != 0 {
                let (r, c) = self.shape.coords(i);
                boxes[id as usize - 1].include(r, c);
            }
        }
        boxes
    }

    pub(crate) fn check_id(&self, id: u16) -> Result<()> {
        if id == 0 || id as usize > self.num_instances {
            return Err(Error::UnknownInstance(id));
        }
        Ok(())
    }
}

/// Inclusive pixel bounding box.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BBox {
    pub row0: usize,
    pub col0: usize,
    pub row1: usize,
    pub col1: usize,
}

impl BBox {
    pub(crate) const EMPTY: BBox = BBox {
        row0: usize::MAX,
        col0: usize::MAX,
        row1: 0,
        col1: 0,
    };

    pub(crate) fn include(&mut self, r: usize, c: usize) {
        self.row0 = self.row0.min(r);
        self.col0 = self.col0.min(c);
        self.row1 = self.row1.max(r);
        self.col1 = self.col1.max(c);
    }

    /// Grows the box by `pad` pixels on each side, clipped to `shape`.
    pub(crate) fn padded(&self, pad: usize, shape: GridShape) -> BBox {
        BBox {
            row0: self.row0.saturating_sub(pad),
            col0: self.col0.saturating_sub(pad),
            row1: (self.row1 + pad).min(shape.height - 1),
            col1: (self.col1 + pad).min(shape.width - 1),
        }
    }

    pub fn height(&self) -> usize {
        self.row1 - self.row0 + 1
    }

    pub fn width(&self) -> usize {
        self.col1 - self.col0 + 1
    }
}

/// Real-valued per-pixel field, held in `f64`.
#[derive(Debug, Clone, PartialEq)]
pub struct ScalarField {
    shape: GridShape,
    values: Vec<f64>,
}

impl ScalarField {
    pub fn zeros(shape: GridShape) -> Self {
        Self {
            shape,
            values: vec![0.0; shape.len()],
        }
    }

    pub fn from_vec(shape: GridShape, values: Vec<f64>) -> Result<Self> {
        if values.len() != shape.len() {
            return Err(Error::invalid(format!(
                "field buffer has {} values, shape {shape} needs {}",
                values.len(),
                shape.len()
            )));
        }
        Ok(Self { shape, values })
    }

    pub fn shape(&self) -> GridShape {
        self.shape
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.values
    }

    pub fn as_mut_slice(&mut self) -> &mut [f64] {
        &mut self.values
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.values
    }

    #[inline]
    pub fn get(&self, row: usize, col: usize) -> f64 {
        self.values[self.shape.index(row, col)]
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> ScalarField {
        ScalarField {
            shape: self.shape,
            values: self.values.iter().map(|&v| f(v)).collect(),
        }
    }

    /// Values rounded to `f32`, the on-disk precision.
    pub fn to_f32(&self) -> Vec<f32> {
        self.values.iter().map(|&v| v as f32).collect()
    }
}

/// Per-pixel `D`-dimensional vectors, stored pixel-major.
#[derive(Debug, Clone, PartialEq)]
pub struct EmbeddingField {
    shape: GridShape,
    dim: usize,
    values: Vec<f64>,
}

impl EmbeddingField {
    pub fn zeros(shape: GridShape, dim: usize) -> Result<Self> {
        Self::from_vec(shape, dim, vec![0.0; shape.len() * dim])
    }

    pub fn from_vec(shape: GridShape, dim: usize, values: Vec<f64>) -> Result<Self> {
        if dim < 2 {
            return Err(Error::invalid(format!("embedding dimension {dim} < 2")));
        }
        if values.len() != shape.len() * dim {
            return Err(Error::invalid(format!(
                "embedding buffer has {} values, {shape}x{dim} needs {}",
                values.len(),
                shape.len() * dim
            )));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::invalid("embedding contains NaN or infinite values"));
        }
        Ok(Self { shape, dim, values })
    }

    pub fn shape(&self) -> GridShape {
        self.shape
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.values
    }

    #[inline]
    pub fn pixel(&self, index: usize) -> &[f64] {
        &self.values[index * self.dim..(index + 1) * self.dim]
    }

    #[inline]
    pub fn pixel_mut(&mut self, index: usize) -> &mut [f64] {
        &mut self.values[index * self.dim..(index + 1) * self.dim]
    }
}
