//! Embedding disentanglement: pull each pixel toward its instance
//! prototype, push neighboring prototypes toward orthogonality.

use std::collections::BTreeSet;

use super::LossResult;
use crate::error::{Error, Result};
use crate::grid::{EmbeddingField, InstanceGrid};
use crate::labeling::on_boundary;

const MIN_NORM: f64 = 1e-12;

/// Unit-normalized foreground embeddings; background is zeroed.
pub fn normalize_embeddings(r: &EmbeddingField, fg: &InstanceGrid) -> Result<EmbeddingField> {
    Ok(normalize_with_norms(r, fg)?.0)
}

fn normalize_with_norms(r: &EmbeddingField, fg: &InstanceGrid) -> Result<(EmbeddingField, Vec<f64>)> {
    fg.shape().check_same(&r.shape())?;
    let shape = r.shape();
    let mut psi = EmbeddingField::zeros(shape, r.dim())?;
    let mut norms = vec![0.0; shape.len()];
    for (i, &id) in fg.as_slice().iter().enumerate() {
        if id == 0 {
            continue;
        }
        let v = r.pixel(i);
        let n = norm(v);
        if n < MIN_NORM {
            let (row, col) = shape.coords(i);
            return Err(Error::DegenerateEmbedding { row, col });
        }
        norms[i] = n;
        for (o, &x) in psi.pixel_mut(i).iter_mut().zip(v) {
            *o = x / n;
        }
    }
    Ok((psi, norms))
}

/// One unit vector per instance, indexed by `id - 1`.
#[derive(Debug, Clone, PartialEq)]
pub struct PrototypeSet {
    dim: usize,
    vectors: Vec<f64>,
}

impl PrototypeSet {
    pub fn len(&self) -> usize {
        self.vectors.len() / self.dim
    }

    pub fn is_empty(&self) -> bool {
        self.vectors.is_empty()
    }

    pub fn get(&self, id: u16) -> &[f64] {
        let k = id as usize - 1;
        &self.vectors[k * self.dim..(k + 1) * self.dim]
    }
}

/// Unnormalized prototype sums and their norms.
struct PrototypeSums {
    sums: Vec<f64>,
    norms: Vec<f64>,
    counts: Vec<usize>,
}

fn prototype_sums(psi: &EmbeddingField, inst: &InstanceGrid) -> Result<PrototypeSums> {
    inst.shape().check_same(&psi.shape())?;
    let dim = psi.dim();
    let m = inst.num_instances();
    let mut sums = vec![0.0; m * dim];
    let mut counts = vec![0usize; m];
    for (i, &id) in inst.as_slice().iter().enumerate() {
        if id == 0 {
            continue;
        }
        let k = id as usize - 1;
        counts[k] += 1;
        for (s, &x) in sums[k * dim..(k + 1) * dim].iter_mut().zip(psi.pixel(i)) {
            *s += x;
        }
    }
    let mut norms = Vec::with_capacity(m);
    for k in 0..m {
        let n = norm(&sums[k * dim..(k + 1) * dim]);
        if counts[k] == 0 || n < MIN_NORM {
            return Err(Error::DegeneratePrototype((k + 1) as u16));
        }
        norms.push(n);
    }
    Ok(PrototypeSums { sums, norms, counts })
}

pub fn instance_prototypes(psi: &EmbeddingField, inst: &InstanceGrid) -> Result<PrototypeSet> {
    let PrototypeSums { mut sums, norms, .. } = prototype_sums(psi, inst)?;
    let dim = psi.dim();
    for (k, n) in norms.iter().enumerate() {
        for s in &mut sums[k * dim..(k + 1) * dim] {
            *s /= n;
        }
    }
    Ok(PrototypeSet { dim, vectors: sums })
}

/// Unordered instance pairs whose closest pixels lie within `radius`.
#[derive(Debug, Clone, PartialEq)]
pub struct NeighborPairSet {
    pub radius: f64,
    /// Pairs `(m, n)` with `m < n`, sorted.
    pub pairs: Vec<(u16, u16)>,
}

impl NeighborPairSet {
    pub fn new(radius: f64, pairs: impl IntoIterator<Item = (u16, u16)>) -> Result<Self> {
        let mut set = BTreeSet::new();
        for (a, b) in pairs {
            if a == b {
                return Err(Error::invalid(format!("self pair ({a}, {b})")));
            }
            set.insert((a.min(b), a.max(b)));
        }
        Ok(Self {
            radius,
            pairs: set.into_iter().collect(),
        })
    }

    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }
}

/// Pairs of instances at minimum pixel-center distance `<= radius`.
///
/// The closest pixel of one instance to another always lies on its inner
/// 4-boundary, so only boundary pixels are scanned against a disc of
/// offsets.
pub fn neighbor_pairs(inst: &InstanceGrid, radius: f64) -> Result<NeighborPairSet> {
    if radius.is_nan() || radius < 0.0 || radius.is_infinite() {
        return Err(Error::invalid(format!("neighbor radius must be >= 0, got {radius}")));
    }
    let shape = inst.shape();
    let ids = inst.as_slice();
    let reach = radius.floor() as isize;
    let r2 = radius * radius;
    let disc: Vec<(isize, isize)> = (-reach..=reach)
        .flat_map(|dr| (-reach..=reach).map(move |dc| (dr, dc)))
        .filter(|&(dr, dc)| ((dr * dr + dc * dc) as f64) <= r2 && (dr, dc) != (0, 0))
        .collect();
    let mut set = BTreeSet::new();
    for i in 0..shape.len() {
        let a = ids[i];
        if a == 0 || !on_boundary(shape, ids, i) {
            continue;
        }
        for &(dr, dc) in &disc {
            if let Some(q) = shape.offset(i, dr, dc) {
                let b = ids[q];
                if b != 0 && b != a {
                    set.insert((a.min(b), a.max(b)));
                }
            }
        }
    }
    Ok(NeighborPairSet {
        radius,
        pairs: set.into_iter().collect(),
    })
}

/// Pull-to-prototype term plus `lambda_sep` times the mean absolute cosine
/// between neighboring prototypes. The gradient is taken with respect to
/// the raw embeddings and flows through the prototypes.
pub fn disentangle_loss(
    r: &EmbeddingField,
    inst: &InstanceGrid,
    pairs: &NeighborPairSet,
    lambda_sep: f64,
) -> Result<LossResult<EmbeddingField>> {
    if !(lambda_sep >= 0.0 && lambda_sep.is_finite()) {
        return Err(Error::invalid(format!("lambda_sep must be >= 0, got {lambda_sep}")));
    }
    let shape = r.shape();
    let dim = r.dim();
    let m = inst.num_instances();
    for &(a, b) in &pairs.pairs {
        inst.check_id(a)?;
        inst.check_id(b)?;
    }
    let mut gradient = EmbeddingField::zeros(shape, dim)?;
    if m == 0 {
        return Ok(LossResult { value: 0.0, gradient });
    }

    let (psi, rnorms) = normalize_with_norms(r, inst)?;
    let PrototypeSums { sums, norms, counts } = prototype_sums(&psi, inst)?;
    let proto: Vec<f64> = (0..m)
        .flat_map(|k| {
            let n = norms[k];
            sums[k * dim..(k + 1) * dim].iter().map(move |&s| s / n)
        })
        .collect();
    let proto_of = |k: usize| &proto[k * dim..(k + 1) * dim];

    // pull term
    let mut pull = vec![0.0; m];
    for (i, &id) in inst.as_slice().iter().enumerate() {
        if id != 0 {
            let k = id as usize - 1;
            pull[k] += 1.0 - dot(psi.pixel(i), proto_of(k));
        }
    }
    let mut value = pull.iter().zip(&counts).map(|(p, &n)| p / n as f64).sum::<f64>() / m as f64;

    // d/d(pi_m), accumulated from both terms
    let mut g_proto = vec![0.0; m * dim];
    for k in 0..m {
        let scale = -1.0 / (m as f64 * counts[k] as f64);
        for (g, &s) in g_proto[k * dim..(k + 1) * dim]
            .iter_mut()
            .zip(&sums[k * dim..(k + 1) * dim])
        {
            *g += scale * s;
        }
    }

    if !pairs.is_empty() {
        let weight = lambda_sep / pairs.len() as f64;
        let mut sep = 0.0;
        for &(a, b) in &pairs.pairs {
            let (ka, kb) = (a as usize - 1, b as usize - 1);
            let c = dot(proto_of(ka), proto_of(kb));
            sep += c.abs();
            let sgn = if c > 0.0 {
                1.0
            } else if c < 0.0 {
                -1.0
            } else {
                0.0
            };
            for j in 0..dim {
                g_proto[ka * dim + j] += weight * sgn * proto[kb * dim + j];
                g_proto[kb * dim + j] += weight * sgn * proto[ka * dim + j];
            }
        }
        value += weight * sep;
    }

    // through pi = s / |s|
    let mut g_sum = vec![0.0; m * dim];
    for k in 0..m {
        let p = proto_of(k);
        let g = &g_proto[k * dim..(k + 1) * dim];
        let pg = dot(p, g);
        for j in 0..dim {
            g_sum[k * dim + j] = (g[j] - p[j] * pg) / norms[k];
        }
    }

    let mut g_psi = vec![0.0; dim];
    for (i, &id) in inst.as_slice().iter().enumerate() {
        if id == 0 {
            continue;
        }
        let k = id as usize - 1;
        let scale = -1.0 / (m as f64 * counts[k] as f64);
        for j in 0..dim {
            g_psi[j] = scale * proto[k * dim + j] + g_sum[k * dim + j];
        }
        // through psi = r / |r|
        let u = psi.pixel(i);
        let ug = dot(u, &g_psi);
        let out = gradient.pixel_mut(i);
        for j in 0..dim {
            out[j] = (g_psi[j] - u[j] * ug) / rnorms[i];
        }
    }

    Ok(LossResult { value, gradient })
}

#[inline]
fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

#[inline]
fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}
