//! Binary dilation and erosion with square or diamond structuring elements.
//!
//! A square element of radius `r` is the Chebyshev ball, a diamond the
//! Manhattan ball. Both are computed from a two-pass chamfer distance, so
//! the cost does not depend on `r`. Pixels outside the grid count as
//! background: dilation never extends past the border and erosion eats
//! inward from it.

use serde::{Deserialize, Serialize};

use crate::error::Error;
use crate::grid::{GridShape, Mask};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum StructuringElement {
    #[default]
    Square,
    Diamond,
}

impl StructuringElement {
    /// Whether offset `(dr, dc)` lies in the element of the given radius.
    pub fn contains(self, dr: isize, dc: isize, radius: usize) -> bool {
        let r = radius as isize;
        match self {
            StructuringElement::Square => dr.abs() <= r && dc.abs() <= r,
            StructuringElement::Diamond => dr.abs() + dc.abs() <= r,
        }
    }
}

impl std::str::FromStr for StructuringElement {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Error> {
        match s {
            "square" => Ok(StructuringElement::Square),
            "diamond" => Ok(StructuringElement::Diamond),
            other => Err(Error::invalid(format!("unknown structuring element `{other}`"))),
        }
    }
}

const FAR: u32 = u32::MAX / 2;

/// Chamfer distance (L-inf for square, L1 for diamond) to the nearest
/// `seed` pixel. With `outside_is_seed`, the virtual ring around the grid
/// also counts as seed.
fn chamfer(shape: GridShape, seed: impl Fn(usize) -> bool, se: StructuringElement, outside_is_seed: bool) -> Vec<u32> {
    let (h, w) = (shape.height, shape.width);
    let mut d = vec![FAR; shape.len()];
    for r in 0..h {
        for c in 0..w {
            let i = r * w + c;
            d[i] = if seed(i) {
                0
            } else if outside_is_seed {
                (r + 1).min(c + 1).min(h - r).min(w - c) as u32
            } else {
                FAR
            };
        }
    }
    let diag = se == StructuringElement::Square;
    // forward
    for r in 0..h {
        for c in 0..w {
            let i = r * w + c;
            let mut best = d[i];
            if r > 0 {
                best = best.min(d[i - w] + 1);
                if diag {
                    if c > 0 {
                        best = best.min(d[i - w - 1] + 1);
                    }
                    if c + 1 < w {
                        best = best.min(d[i - w + 1] + 1);
                    }
                }
            }
            if c > 0 {
                best = best.min(d[i - 1] + 1);
            }
            d[i] = best;
        }
    }
    // backward
    for r in (0..h).rev() {
        for c in (0..w).rev() {
            let i = r * w + c;
            let mut best = d[i];
            if r + 1 < h {
                best = best.min(d[i + w] + 1);
                if diag {
                    if c + 1 < w {
                        best = best.min(d[i + w + 1] + 1);
                    }
                    if c > 0 {
                        best = best.min(d[i + w - 1] + 1);
                    }
                }
            }
            if c + 1 < w {
                best = best.min(d[i + 1] + 1);
            }
            d[i] = best;
        }
    }
    d
}

pub fn dilate(mask: &Mask, se: StructuringElement, radius: usize) -> Mask {
    let data = mask.as_slice();
    let d = chamfer(mask.shape(), |i| data[i], se, false);
    let out = d.into_iter().map(|v| v as usize <= radius).collect();
    Mask::from_vec(mask.shape(), out).expect("same shape")
}

pub fn erode(mask: &Mask, se: StructuringElement, radius: usize) -> Mask {
    let data = mask.as_slice();
    let d = chamfer(mask.shape(), |i| !data[i], se, true);
    let out = d.into_iter().map(|v| v as usize > radius).collect();
    Mask::from_vec(mask.shape(), out).expect("same shape")
}

/// Dilation minus erosion.
pub fn morphological_gradient(mask: &Mask, se: StructuringElement, radius: usize) -> Mask {
    let dil = dilate(mask, se, radius);
    let ero = erode(mask, se, radius);
    let out = dil
        .as_slice()
        .iter()
        .zip(ero.as_slice())
        .map(|(&a, &b)| a && !b)
        .collect();
    Mask::from_vec(mask.shape(), out).expect("same shape")
}
