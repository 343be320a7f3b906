use super::LossResult;
use crate::error::{Error, Result};
use crate::grid::ScalarField;

/// Positive-class weight used when none is given: negatives / positives,
/// clamped to `[1, 100]`; 1 when either class is absent.
pub fn auto_pos_weight(target: &ScalarField) -> f64 {
    let pos = target.as_slice().iter().filter(|&&y| y == 1.0).count();
    let neg = target.as_slice().len() - pos;
    if pos == 0 || neg == 0 {
        1.0
    } else {
        (neg as f64 / pos as f64).clamp(1.0, 100.0)
    }
}

/// `log(1 + exp(z))` without overflow.
#[inline]
fn softplus(z: f64) -> f64 {
    z.max(0.0) + (-z.abs()).exp().ln_1p()
}

#[inline]
fn sigmoid(z: f64) -> f64 {
    if z >= 0.0 {
        1.0 / (1.0 + (-z).exp())
    } else {
        let e = z.exp();
        e / (1.0 + e)
    }
}

/// Mean binary cross-entropy on logits with the positive class weighted
/// by `pos_weight` (automatic when `None`).
pub fn boundary_bce(
    logits: &ScalarField,
    target: &ScalarField,
    pos_weight: Option<f64>,
) -> Result<LossResult<ScalarField>> {
    let shape = logits.shape();
    shape.check_same(&target.shape())?;
    if logits.as_slice().iter().any(|v| !v.is_finite()) {
        return Err(Error::invalid("logits contain NaN or infinite values"));
    }
    if let Some(y) = target.as_slice().iter().find(|&&y| y != 0.0 && y != 1.0) {
        return Err(Error::invalid(format!("boundary target {y} is not binary")));
    }
    let pw = match pos_weight {
        Some(w) if !(w >= 0.0 && w.is_finite()) => {
            return Err(Error::invalid(format!("pos_weight must be >= 0, got {w}")))
        }
        Some(w) => w,
        None => auto_pos_weight(target),
    };

    let n = shape.len() as f64;
    let mut total = 0.0;
    let mut grad = ScalarField::zeros(shape);
    for ((&z, &y), g) in logits.as_slice().iter().zip(target.as_slice()).zip(grad.as_mut_slice()) {
        // -log(sigmoid(z)) = softplus(-z); -log(1 - sigmoid(z)) = softplus(z)
        if y == 1.0 {
            total += pw * softplus(-z);
            *g = pw * (sigmoid(z) - 1.0) / n;
        } else {
            total += softplus(z);
            *g = sigmoid(z) / n;
        }
    }
    Ok(LossResult {
        value: total / n,
        gradient: grad,
    })
}
