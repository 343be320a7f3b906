//! Exact Euclidean distance transform.
//!
//! Separable lower-envelope-of-parabolas algorithm (Felzenszwalb and
//! Huttenlocher): one 1-D pass over columns, then one over rows. Squared
//! distances between pixel centers are integers, so the result is exact.

use crate::error::{Error, Result};
use crate::grid::{GridShape, Mask, ScalarField};

/// Squared Euclidean distance from every pixel to the nearest `true` pixel
/// of `features`. Pixels get `f64::INFINITY` when there are no features.
pub fn squared_distance_to(shape: GridShape, features: &[bool]) -> Vec<f64> {
    assert_eq!(features.len(), shape.len());
    let (h, w) = (shape.height, shape.width);
    let mut grid: Vec<f64> = features.iter().map(|&f| if f { 0.0 } else { f64::INFINITY }).collect();

    let n = h.max(w);
    let mut line = vec![0.0; n];
    let mut out = vec![0.0; n];
    let mut env = Envelope::with_capacity(n);

    for c in 0..w {
        for r in 0..h {
            line[r] = grid[r * w + c];
        }
        env.transform(&line[..h], &mut out[..h]);
        for r in 0..h {
            grid[r * w + c] = out[r];
        }
    }
    for r in 0..h {
        let row = &mut grid[r * w..(r + 1) * w];
        line[..w].copy_from_slice(row);
        env.transform(&line[..w], &mut out[..w]);
        row.copy_from_slice(&out[..w]);
    }
    grid
}

/// Euclidean distance from each pixel to the nearest `true` pixel.
pub fn distance_to(shape: GridShape, features: &[bool]) -> Vec<f64> {
    let mut d = squared_distance_to(shape, features);
    for v in &mut d {
        *v = v.sqrt();
    }
    d
}

/// Distance from every pixel of `region` to the nearest pixel of
/// `boundary`; zero outside the region.
pub fn exact_edt(region: &Mask, boundary: &Mask) -> Result<ScalarField> {
    region.shape().check_same(&boundary.shape())?;
    if !boundary.is_subset_of(region) {
        return Err(Error::invalid("boundary is not contained in region"));
    }
    if boundary.is_empty() {
        if region.is_empty() {
            return Ok(ScalarField::zeros(region.shape()));
        }
        return Err(Error::DegenerateRegion);
    }
    let mut d = distance_to(region.shape(), boundary.as_slice());
    for (v, &inside) in d.iter_mut().zip(region.as_slice()) {
        if !inside {
            *v = 0.0;
        }
    }
    ScalarField::from_vec(region.shape(), d)
}

/// Scratch space for the 1-D lower envelope.
struct Envelope {
    vertices: Vec<usize>,
    bounds: Vec<f64>,
}

impl Envelope {
    fn with_capacity(n: usize) -> Self {
        Self {
            vertices: vec![0; n],
            bounds: vec![0.0; n + 1],
        }
    }

    /// `out[q] = min_p (q - p)^2 + f[p]` over finite `f[p]`.
    fn transform(&mut self, f: &[f64], out: &mut [f64]) {
        let n = f.len();
        let v = &mut self.vertices;
        let z = &mut self.bounds;
        let mut k: isize = -1;
        for q in 0..n {
            if !f[q].is_finite() {
                continue;
            }
            let fq = f[q] + (q * q) as f64;
            loop {
                if k < 0 {
                    k = 0;
                    v[0] = q;
                    z[0] = f64::NEG_INFINITY;
                    z[1] = f64::INFINITY;
                    break;
                }
                let p = v[k as usize];
                let s = (fq - (f[p] + (p * p) as f64)) / (2.0 * (q as f64 - p as f64));
                if s <= z[k as usize] {
                    k -= 1;
                    continue;
                }
                k += 1;
                v[k as usize] = q;
                z[k as usize] = s;
                z[k as usize + 1] = f64::INFINITY;
                break;
            }
        }
        if k < 0 {
            out.fill(f64::INFINITY);
            return;
        }
        let mut j = 0usize;
        for (q, slot) in out.iter_mut().enumerate() {
            while z[j + 1] < q as f64 {
                j += 1;
            }
            let p = v[j];
            let d = q as f64 - p as f64;
            *slot = d * d + f[p];
        }
    }
}
