use crate::error::{Error, Result};
use crate::tensor::Tensor2D;

/// Mean squared error: mean over samples of the per-sample squared
/// Frobenius norm scaled by 1/d, where d is the feature count.
///
/// Returns the loss together with its analytic gradient with respect to
/// `pred`, so averaging over the batch keeps the learning-rate scale
/// independent of batch size.
pub fn mse_loss(pred: &Tensor2D, target: &Tensor2D) -> Result<(f64, Tensor2D)> {
    if pred.rows() != target.rows() || pred.cols() != target.cols() {
        return Err(Error::ShapeMismatch(format!(
            "pred {}x{} vs target {}x{}",
            pred.rows(),
            pred.cols(),
            target.rows(),
            target.cols()
        )));
    }
    let n = pred.rows() as f64;
    let d = pred.cols() as f64;
    let diff = pred.sub(target)?;
    let loss = diff.sq_frobenius() / (n * d);
    let grad = diff.scale(2.0 / (n * d));
    Ok((loss, grad))
}
