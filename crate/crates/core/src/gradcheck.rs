//! Finite-difference verification of the analytic loss gradients.
//!
//! Each trial draws a small random instance grid and random inputs, then
//! compares every analytic partial derivative with a central difference.
//! Components whose magnitude is below `abs_floor` are judged by absolute
//! error, the rest by relative error.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{EmbeddingField, GridShape, InstanceGrid, ScalarField};
use crate::losses::{bal_wmse, boundary_bce, disentangle_loss, neighbor_pairs};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LossKind {
    Disentangle,
    #[serde(rename = "dist")]
    Distance,
    Boundary,
}

impl LossKind {
    pub const ALL: [LossKind; 3] = [LossKind::Disentangle, LossKind::Distance, LossKind::Boundary];

    pub fn name(self) -> &'static str {
        match self {
            LossKind::Disentangle => "disentangle",
            LossKind::Distance => "dist",
            LossKind::Boundary => "boundary",
        }
    }
}

impl std::str::FromStr for LossKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "disentangle" => Ok(LossKind::Disentangle),
            "dist" | "distance" => Ok(LossKind::Distance),
            "boundary" => Ok(LossKind::Boundary),
            other => Err(Error::invalid(format!("unknown loss `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GradCheckConfig {
    pub trials: usize,
    /// Grid sides are drawn from `1..=max_size`.
    pub max_size: usize,
    /// Embedding widths are drawn from `2..=max_dim`.
    pub max_dim: usize,
    pub step: f64,
    pub rel_tol: f64,
    pub abs_tol: f64,
    pub abs_floor: f64,
    pub seed: u64,
}

impl Default for GradCheckConfig {
    fn default() -> Self {
        Self {
            trials: 50,
            max_size: 16,
            max_dim: 8,
            step: 1e-4,
            rel_tol: 1e-3,
            abs_tol: 1e-6,
            abs_floor: 1e-3,
            seed: 0,
        }
    }
}

impl GradCheckConfig {
    pub fn validate(&self) -> Result<()> {
        let positive = |v: f64| v > 0.0 && v.is_finite();
        if self.trials == 0 || !positive(self.step) || !positive(self.rel_tol) || !positive(self.abs_tol) {
            return Err(Error::invalid(
                "grad-check needs trials >= 1 and positive step and tolerances",
            ));
        }
        if self.max_size == 0 || self.max_dim < 2 {
            return Err(Error::invalid("grad-check needs max_size >= 1 and max_dim >= 2"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GradCheckReport {
    pub loss: LossKind,
    pub trials: usize,
    pub coordinates: usize,
    pub max_rel_error: f64,
    pub max_abs_error: f64,
    pub failures: usize,
    pub passed: bool,
}

struct Tally {
    coordinates: usize,
    max_rel: f64,
    max_abs: f64,
    failures: usize,
}

impl Tally {
    fn record(&mut self, analytic: f64, numeric: f64, cfg: &GradCheckConfig) {
        self.coordinates += 1;
        let diff = (analytic - numeric).abs();
        let scale = analytic.abs().max(numeric.abs());
        let ok = if scale < cfg.abs_floor {
            self.max_abs = self.max_abs.max(diff);
            diff <= cfg.abs_tol
        } else {
            let rel = diff / scale;
            self.max_rel = self.max_rel.max(rel);
            rel <= cfg.rel_tol
        };
        if !ok {
            self.failures += 1;
        }
    }
}

/// Random instance grid with between one and four instances, generated as
/// axis-aligned rectangles painted over each other and then relabeled.
fn random_instances(rng: &mut ChaCha8Rng, max_size: usize) -> Result<InstanceGrid> {
    let shape = GridShape::new(rng.gen_range(1..=max_size), rng.gen_range(1..=max_size))?;
    loop {
        let mut raw = vec![0u32; shape.len()];
        for k in 1..=rng.gen_range(1..=4u32) {
            let r0 = rng.gen_range(0..shape.height);
            let c0 = rng.gen_range(0..shape.width);
            let r1 = rng.gen_range(r0..shape.height);
            let c1 = rng.gen_range(c0..shape.width);
            for r in r0..=r1 {
                for c in c0..=c1 {
                    raw[shape.index(r, c)] = k;
                }
            }
        }
        let inst = InstanceGrid::relabel(shape, &raw)?;
        if inst.num_instances() > 0 {
            return Ok(inst);
        }
    }
}

fn scalar(shape: GridShape, values: Vec<f64>) -> Result<ScalarField> {
    ScalarField::from_vec(shape, values)
}

/// Perturbs every coordinate of `x` and compares `eval`'s analytic gradient
/// with the central difference.
fn compare<F>(x: &[f64], eval: F, cfg: &GradCheckConfig, tally: &mut Tally) -> Result<()>
where
    F: Fn(&[f64]) -> Result<(f64, Vec<f64>)>,
{
    let (_, grad) = eval(x)?;
    let mut probe = x.to_vec();
    for i in 0..x.len() {
        probe[i] = x[i] + cfg.step;
        let (up, _) = eval(&probe)?;
        probe[i] = x[i] - cfg.step;
        let (down, _) = eval(&probe)?;
        probe[i] = x[i];
        tally.record(grad[i], (up - down) / (2.0 * cfg.step), cfg);
    }
    Ok(())
}

fn trial(kind: LossKind, rng: &mut ChaCha8Rng, cfg: &GradCheckConfig, tally: &mut Tally) -> Result<()> {
    let inst = random_instances(rng, cfg.max_size)?;
    let shape = inst.shape();
    match kind {
        LossKind::Disentangle => {
            let dim = rng.gen_range(2..=cfg.max_dim);
            // a per-instance offset keeps prototypes well away from zero
            let offsets: Vec<Vec<f64>> = (0..=inst.num_instances())
                .map(|_| (0..dim).map(|_| rng.gen_range(-1.0..1.0)).collect())
                .collect();
            let mut x = Vec::with_capacity(shape.len() * dim);
            for &id in inst.as_slice() {
                for &o in &offsets[id as usize] {
                    x.push(o * 2.0 + rng.gen_range(-0.5..0.5));
                }
            }
            let pairs = neighbor_pairs(&inst, rng.gen_range(1.0..6.0))?;
            let lambda = rng.gen_range(0.0..2.0);
            compare(
                &x,
                |v| {
                    let r = EmbeddingField::from_vec(shape, dim, v.to_vec())?;
                    let out = disentangle_loss(&r, &inst, &pairs, lambda)?;
                    Ok((out.value, out.gradient.as_slice().to_vec()))
                },
                cfg,
                tally,
            )
        }
        LossKind::Distance => {
            let target = scalar(shape, (0..shape.len()).map(|_| rng.gen_range(0.0..=1.0)).collect())?;
            let x: Vec<f64> = (0..shape.len()).map(|_| rng.gen_range(-0.5..1.5)).collect();
            compare(
                &x,
                |v| {
                    let out = bal_wmse(&scalar(shape, v.to_vec())?, &target, &inst)?;
                    Ok((out.value, out.gradient.into_vec()))
                },
                cfg,
                tally,
            )
        }
        LossKind::Boundary => {
            let target = scalar(
                shape,
                (0..shape.len()).map(|_| f64::from(rng.gen_bool(0.3) as u8)).collect(),
            )?;
            let pos_weight = rng.gen_bool(0.5).then(|| rng.gen_range(0.5..5.0));
            let x: Vec<f64> = (0..shape.len()).map(|_| rng.gen_range(-4.0..4.0)).collect();
            compare(
                &x,
                |v| {
                    let out = boundary_bce(&scalar(shape, v.to_vec())?, &target, pos_weight)?;
                    Ok((out.value, out.gradient.into_vec()))
                },
                cfg,
                tally,
            )
        }
    }
}

pub fn check_loss(kind: LossKind, cfg: &GradCheckConfig) -> Result<GradCheckReport> {
    cfg.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    rng.set_stream(kind as u64);
    let mut tally = Tally {
        coordinates: 0,
        max_rel: 0.0,
        max_abs: 0.0,
        failures: 0,
    };
    for _ in 0..cfg.trials {
        trial(kind, &mut rng, cfg, &mut tally)?;
    }
    Ok(GradCheckReport {
        loss: kind,
        trials: cfg.trials,
        coordinates: tally.coordinates,
        max_rel_error: tally.max_rel,
        max_abs_error: tally.max_abs,
        failures: tally.failures,
        passed: tally.failures == 0,
    })
}

pub fn grad_check(cfg: &GradCheckConfig) -> Result<Vec<GradCheckReport>> {
    LossKind::ALL.iter().map(|&k| check_loss(k, cfg)).collect()
}
