//! Finite-difference verification of analytic gradients.

use crate::error::{Error, Result};
use crate::nn::mlp::{MlpParams, ParamGrads};

/// Compare the analytic gradient of an arbitrary scalar loss against central
/// finite differences, perturbing every parameter in turn.
///
/// `eval` must return the loss and its analytic parameter gradients at the
/// given parameters; only the loss value is used at perturbed points. The
/// result is the worst relative error, with the denominator floored at 1 so
/// near-zero gradients are compared absolutely.
pub fn grad_check<F>(params: &MlpParams, h: f64, mut eval: F) -> Result<f64>
where
    F: FnMut(&MlpParams) -> Result<(f64, ParamGrads)>,
{
    if !h.is_finite() || h <= 0.0 {
        return Err(Error::InvalidArgument(format!(
            "finite-difference step must be positive and finite, got {h}"
        )));
    }
    let (loss0, analytic) = eval(params)?;
    if !loss0.is_finite() {
        return Err(Error::NonFinite(format!("loss at base point: {loss0}")));
    }
    let analytic = analytic.flatten();
    let n_params = params.param_count();
    if analytic.len() != n_params {
        return Err(Error::ShapeMismatch(format!(
            "analytic gradient has {} entries for {} parameters",
            analytic.len(),
            n_params
        )));
    }

    let mut max_rel = 0.0_f64;
    for (i, &ga) in analytic.iter().enumerate() {
        let loss_plus = eval(&perturbed(params, i, h))?.0;
        let loss_minus = eval(&perturbed(params, i, -h))?.0;
        if !loss_plus.is_finite() || !loss_minus.is_finite() {
            return Err(Error::NonFinite(format!(
                "loss at perturbation of parameter {i}"
            )));
        }
        let numeric = (loss_plus - loss_minus) / (2.0 * h);
        let rel = (ga - numeric).abs() / ga.abs().max(numeric.abs()).max(1.0);
        if rel > max_rel {
            max_rel = rel;
        }
    }
    Ok(max_rel)
}

fn perturbed(params: &MlpParams, index: usize, delta: f64) -> MlpParams {
    let mut out = params.clone();
    let mut i = 0;
    out.for_each_param_mut(|v| {
        if i == index {
            *v += delta;
        }
        i += 1;
    });
    out
}
