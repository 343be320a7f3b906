use super::LossResult;
use crate::error::{Error, Result};
use crate::grid::{InstanceGrid, ScalarField};

/// Foreground/background balanced mean squared error.
///
/// The value is the average of the foreground-mean and background-mean
/// squared errors, so neither set outweighs the other regardless of its
/// pixel count. When one set is empty the other carries the full weight.
pub fn bal_wmse(pred: &ScalarField, target: &ScalarField, inst: &InstanceGrid) -> Result<LossResult<ScalarField>> {
    let shape = pred.shape();
    shape.check_same(&target.shape())?;
    shape.check_same(&inst.shape())?;
    if pred.as_slice().iter().any(|v| !v.is_finite()) {
        return Err(Error::invalid("prediction contains NaN or infinite values"));
    }
    if let Some(v) = target.as_slice().iter().find(|v| !(0.0..=1.0).contains(*v)) {
        return Err(Error::invalid(format!("distance target {v} outside [0, 1]")));
    }

    let ids = inst.as_slice();
    let n_fg = ids.iter().filter(|&&id| id != 0).count();
    let n_bg = ids.len() - n_fg;
    let (w_fg, w_bg) = match (n_fg, n_bg) {
        (0, b) => (0.0, 1.0 / b as f64),
        (f, 0) => (1.0 / f as f64, 0.0),
        (f, b) => (0.5 / f as f64, 0.5 / b as f64),
    };

    let mut sum_fg = 0.0;
    let mut sum_bg = 0.0;
    let mut grad = ScalarField::zeros(shape);
    for (((&p, &t), &id), g) in pred
        .as_slice()
        .iter()
        .zip(target.as_slice())
        .zip(ids)
        .zip(grad.as_mut_slice())
    {
        let e = p - t;
        let w = if id != 0 {
            sum_fg += e * e;
            w_fg
        } else {
            sum_bg += e * e;
            w_bg
        };
        *g = 2.0 * w * e;
    }
    Ok(LossResult {
        value: w_fg * sum_fg + w_bg * sum_bg,
        gradient: grad,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::GridShape;

    #[test]
    fn perfect_prediction_is_zero() {
        let shape = GridShape::new(2, 2).unwrap();
        let inst = InstanceGrid::from_vec(shape, vec![1, 0, 0, 0]).unwrap();
        let t = ScalarField::from_vec(shape, vec![0.7, 0.0, 0.0, 0.0]).unwrap();
        let out = bal_wmse(&t, &t, &inst).unwrap();
        assert_eq!(out.value, 0.0);
        assert!(out.gradient.as_slice().iter().all(|&g| g == 0.0));
    }

    #[test]
    fn single_foreground_error() {
        let shape = GridShape::new(2, 2).unwrap();
        let inst = InstanceGrid::from_vec(shape, vec![1, 0, 0, 0]).unwrap();
        let t = ScalarField::zeros(shape);
        let p = ScalarField::from_vec(shape, vec![1.0, 0.0, 0.0, 0.0]).unwrap();
        let out = bal_wmse(&p, &t, &inst).unwrap();
        assert_eq!(out.value, 0.5);
        assert_eq!(out.gradient.as_slice(), &[1.0, 0.0, 0.0, 0.0]);
    }

    #[test]
    fn swapping_sets_with_equal_means() {
        let shape = GridShape::new(1, 4).unwrap();
        let t = ScalarField::zeros(shape);
        let p = ScalarField::from_vec(shape, vec![0.5, 0.5, 0.5, 0.5]).unwrap();
        let a = InstanceGrid::from_vec(shape, vec![1, 0, 0, 0]).unwrap();
        let b = InstanceGrid::from_vec(shape, vec![0, 1, 1, 1]).unwrap();
        assert_eq!(bal_wmse(&p, &t, &a).unwrap().value, bal_wmse(&p, &t, &b).unwrap().value);
    }

    #[test]
    fn single_set_gets_full_weight() {
        let shape = GridShape::new(1, 2).unwrap();
        let t = ScalarField::zeros(shape);
        let p = ScalarField::from_vec(shape, vec![1.0, 0.0]).unwrap();
        let all_bg = InstanceGrid::empty(shape);
        assert_eq!(bal_wmse(&p, &t, &all_bg).unwrap().value, 0.5);
        let all_fg = InstanceGrid::from_vec(shape, vec![1, 1]).unwrap();
        assert_eq!(bal_wmse(&p, &t, &all_fg).unwrap().value, 0.5);
    }

    #[test]
    fn shape_mismatch() {
        let a = ScalarField::zeros(GridShape::new(2, 2).unwrap());
        let b = ScalarField::zeros(GridShape::new(2, 3).unwrap());
        let inst = InstanceGrid::empty(GridShape::new(2, 2).unwrap());
        assert!(matches!(bal_wmse(&a, &b, &inst), Err(Error::ShapeMismatch { .. })));
    }
}
