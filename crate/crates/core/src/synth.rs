//! Synthetic scenes of touching ellipses for closed-loop split/recover
//! experiments.
//!
//! Each scene holds the ground-truth instance grid and its merged semantic
//! mask (class 1). A pixel belongs to a shape iff its center satisfies the
//! ellipse inequality. With probability `touch_probability` a new shape is
//! slid against a randomly chosen earlier one until the two no longer
//! overlap but still share a 4-adjacent edge; otherwise it is placed with
//! at least one pixel of clearance from everything else. Instance ids are
//! numbered in raster order of each shape's first pixel.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{GridShape, InstanceGrid, LabelGrid};
use crate::labeling::merge_to_semantic;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ShapeKind {
    Disc,
    Ellipse,
    Mixed,
}

impl std::str::FromStr for ShapeKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "disc" => Ok(ShapeKind::Disc),
            "ellipse" => Ok(ShapeKind::Ellipse),
            "mixed" => Ok(ShapeKind::Mixed),
            other => Err(Error::invalid(format!("unknown shape kind `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SynthConfig {
    pub num_scenes: usize,
    pub height: usize,
    pub width: usize,
    pub shapes: ShapeKind,
    pub min_instances: usize,
    pub max_instances: usize,
    pub touch_probability: f64,
    /// Semi-major axis range in pixels.
    pub min_radius: f64,
    pub max_radius: f64,
    pub rng_seed: u64,
}

impl Default for SynthConfig {
    fn default() -> Self {
        Self {
            num_scenes: 10,
            height: 128,
            width: 128,
            shapes: ShapeKind::Ellipse,
            min_instances: 2,
            max_instances: 5,
            touch_probability: 0.5,
            min_radius: 7.0,
            max_radius: 14.0,
            rng_seed: 0,
        }
    }
}

impl SynthConfig {
    pub fn validate(&self) -> Result<()> {
        GridShape::new(self.height, self.width)?;
        if self.min_instances == 0 || self.min_instances > self.max_instances {
            return Err(Error::invalid(format!(
                "instance range {}..={} is empty",
                self.min_instances, self.max_instances
            )));
        }
        if !(0.0..=1.0).contains(&self.touch_probability) {
            return Err(Error::invalid("touch_probability must lie in [0, 1]"));
        }
        if !(self.min_radius >= 1.0 && self.min_radius <= self.max_radius) {
            return Err(Error::invalid("radius range must satisfy 1 <= min <= max"));
        }
        if 2.0 * self.max_radius + 4.0 > self.height.min(self.width) as f64 {
            return Err(Error::invalid("grid too small for the largest shape"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Scene {
    pub semantic: LabelGrid,
    pub instances: InstanceGrid,
}

#[derive(Debug, Clone, Copy)]
struct Ellipse {
    row: f64,
    col: f64,
    major: f64,
    minor: f64,
    angle: f64,
}

impl Ellipse {
    fn contains(&self, r: f64, c: f64) -> bool {
        let (s, k) = self.angle.sin_cos();
        let dy = r - self.row;
        let dx = c - self.col;
        let u = dx * k + dy * s;
        let v = -dx * s + dy * k;
        (u / self.major).powi(2) + (v / self.minor).powi(2) <= 1.0
    }

    /// Pixel indices, or `None` if any part would leave the grid's one
    /// pixel margin.
    fn raster(&self, shape: GridShape) -> Option<Vec<usize>> {
        let reach = self.major.ceil() as isize + 1;
        let (r0, c0) = (self.row.round() as isize, self.col.round() as isize);
        if r0 - reach < 1
            || c0 - reach < 1
            || r0 + reach > shape.height as isize - 2
            || c0 + reach > shape.width as isize - 2
        {
            return None;
        }
        let mut px = Vec::new();
        for r in r0 - reach..=r0 + reach {
            for c in c0 - reach..=c0 + reach {
                if self.contains(r as f64, c as f64) {
                    px.push(shape.index(r as usize, c as usize));
                }
            }
        }
        (!px.is_empty()).then_some(px)
    }
}

const ATTEMPTS: usize = 64;
const RESTARTS: usize = 256;

fn random_shape(cfg: &SynthConfig, rng: &mut ChaCha8Rng, row: f64, col: f64) -> Ellipse {
    let major = rng.gen_range(cfg.min_radius..=cfg.max_radius);
    let disc = match cfg.shapes {
        ShapeKind::Disc => true,
        ShapeKind::Ellipse => false,
        ShapeKind::Mixed => rng.gen_bool(0.5),
    };
    let (minor, angle) = if disc {
        (major, 0.0)
    } else {
        (
            rng.gen_range(0.6 * major..=major),
            rng.gen_range(0.0..std::f64::consts::PI),
        )
    };
    Ellipse {
        row,
        col,
        major,
        minor,
        angle,
    }
}

fn place_isolated(cfg: &SynthConfig, rng: &mut ChaCha8Rng, shape: GridShape, ids: &[u16]) -> Option<Vec<usize>> {
    for _ in 0..ATTEMPTS {
        let row = rng.gen_range(0.0..shape.height as f64);
        let col = rng.gen_range(0.0..shape.width as f64);
        let e = random_shape(cfg, rng, row, col);
        let Some(px) = e.raster(shape) else { continue };
        let clear = px.iter().all(|&p| {
            ids[p] == 0
                && crate::grid::Connectivity::Eight
                    .offsets()
                    .iter()
                    .all(|&(dr, dc)| shape.offset(p, dr, dc).is_none_or(|q| ids[q] == 0))
        });
        if clear {
            return Some(px);
        }
    }
    None
}

fn place_touching(
    cfg: &SynthConfig,
    rng: &mut ChaCha8Rng,
    shape: GridShape,
    ids: &[u16],
    centers: &[(f64, f64, f64)],
) -> Option<Vec<usize>> {
    for _ in 0..ATTEMPTS {
        let partner = rng.gen_range(0..centers.len());
        let (pr, pc, preach) = centers[partner];
        let theta = rng.gen_range(0.0..std::f64::consts::TAU);
        let mut e = random_shape(cfg, rng, pr, pc);
        let (dr, dc) = (theta.sin(), theta.cos());
        let max_t = preach + e.major + 2.0;
        let mut t = 0.0;
        let placed = loop {
            t += 0.25;
            if t > max_t {
                break None;
            }
            e.row = pr + t * dr;
            e.col = pc + t * dc;
            let Some(px) = e.raster(shape) else { break None };
            if px.iter().any(|&p| ids[p] != 0) {
                continue;
            }
            let id = (partner + 1) as u16;
            let touches = px.iter().any(|&p| {
                crate::grid::four_neighbors()
                    .iter()
                    .any(|&(a, b)| shape.offset(p, a, b).is_some_and(|q| ids[q] == id))
            });
            break touches.then_some(px);
        };
        if placed.is_some() {
            return placed;
        }
    }
    None
}

/// Scene `index` of the dataset described by `cfg`. Every scene draws from
/// its own stream of the seeded generator, so scenes can be produced in any
/// order or in parallel.
pub fn generate_scene(cfg: &SynthConfig, index: usize) -> Result<Scene> {
    cfg.validate()?;
    let shape = GridShape::new(cfg.height, cfg.width)?;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.rng_seed);
    rng.set_stream(index as u64);
    'scene: for _ in 0..RESTARTS {
        let count = rng.gen_range(cfg.min_instances..=cfg.max_instances);
        let mut ids = vec![0u16; shape.len()];
        let mut centers: Vec<(f64, f64, f64)> = Vec::new();
        for k in 0..count {
            let touch = !centers.is_empty() && rng.gen_bool(cfg.touch_probability);
            let px = if touch {
                place_touching(cfg, &mut rng, shape, &ids, &centers)
            } else {
                place_isolated(cfg, &mut rng, shape, &ids)
            };
            let Some(px) = px else { continue 'scene };
            let (mut sr, mut sc, mut reach) = (0.0, 0.0, 0.0f64);
            for &p in &px {
                ids[p] = (k + 1) as u16;
                let (r, c) = shape.coords(p);
                sr += r as f64;
                sc += c as f64;
            }
            sr /= px.len() as f64;
            sc /= px.len() as f64;
            for &p in &px {
                let (r, c) = shape.coords(p);
                reach = reach.max(((r as f64 - sr).powi(2) + (c as f64 - sc).powi(2)).sqrt());
            }
            centers.push((sr, sc, reach));
        }
        let raw: Vec<u32> = ids.iter().map(|&v| u32::from(v)).collect();
        let instances = InstanceGrid::relabel(shape, &raw)?;
        let semantic = merge_to_semantic(&instances, 1);
        return Ok(Scene { semantic, instances });
    }
    Err(Error::invalid(format!(
        "could not place shapes for scene {index} after {RESTARTS} restarts"
    )))
}

pub fn synth(cfg: &SynthConfig) -> Result<Vec<Scene>> {
    (0..cfg.num_scenes).map(|i| generate_scene(cfg, i)).collect()
}
