use crate::error::{Error, Result};
use crate::nn::mlp::{MlpParams, ParamGrads};

/// Adam optimizer state: step count plus first/second moment buffers shaped
/// like the parameters they update.
#[derive(Debug, Clone, PartialEq)]
pub struct AdamState {
    pub lr: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub eps: f64,
    pub t: u64,
    m: MlpParams,
    v: MlpParams,
}

impl AdamState {
    /// Standard defaults: beta1 = 0.9, beta2 = 0.999, eps = 1e-8.
    pub fn new(lr: f64, params: &MlpParams) -> Self {
        AdamState::with_moments(lr, 0.9, 0.999, 1e-8, params)
    }

    pub fn with_moments(lr: f64, beta1: f64, beta2: f64, eps: f64, params: &MlpParams) -> Self {
        assert!(
            (0.0..1.0).contains(&beta1) && (0.0..1.0).contains(&beta2),
            "moment coefficients must lie in (0, 1), got beta1={beta1} beta2={beta2}"
        );
        let zero = MlpParams {
            weights: params
                .weights
                .iter()
                .map(|w| crate::tensor::Tensor2D::zeros(w.rows(), w.cols()))
                .collect(),
            biases: params.biases.iter().map(|b| vec![0.0; b.len()]).collect(),
        };
        AdamState {
            lr,
            beta1,
            beta2,
            eps,
            t: 0,
            m: zero.clone(),
            v: zero,
        }
    }

    /// One Adam update with bias correction. Increments the step counter.
    pub fn step(&mut self, params: &mut MlpParams, grads: &ParamGrads) -> Result<()> {
        if grads.weights.len() != params.weights.len() || grads.biases.len() != params.biases.len()
        {
            return Err(Error::ShapeMismatch("gradient layer count".into()));
        }
        self.t += 1;
        let (b1, b2) = (self.beta1, self.beta2);
        let bias1 = 1.0 - b1.powi(self.t as i32);
        let bias2 = 1.0 - b2.powi(self.t as i32);
        for l in 0..params.weights.len() {
            if grads.weights[l].rows() != params.weights[l].rows()
                || grads.weights[l].cols() != params.weights[l].cols()
                || grads.biases[l].len() != params.biases[l].len()
            {
                return Err(Error::ShapeMismatch(format!("gradient shape at layer {l}")));
            }
            let pw = params.weights[l].data_mut();
            let mw = self.m.weights[l].data_mut();
            let vw = self.v.weights[l].data_mut();
            let gw = grads.weights[l].data();
            for i in 0..pw.len() {
                mw[i] = b1 * mw[i] + (1.0 - b1) * gw[i];
                vw[i] = b2 * vw[i] + (1.0 - b2) * gw[i] * gw[i];
                let m_hat = mw[i] / bias1;
                let v_hat = vw[i] / bias2;
                pw[i] -= self.lr * m_hat / (v_hat.sqrt() + self.eps);
            }
            let pb = &mut params.biases[l];
            let mb = &mut self.m.biases[l];
            let vb = &mut self.v.biases[l];
            let gb = &grads.biases[l];
            for i in 0..pb.len() {
                mb[i] = b1 * mb[i] + (1.0 - b1) * gb[i];
                vb[i] = b2 * vb[i] + (1.0 - b2) * gb[i] * gb[i];
                let m_hat = mb[i] / bias1;
                let v_hat = vb[i] / bias2;
                pb[i] -= self.lr * m_hat / (v_hat.sqrt() + self.eps);
            }
        }
        Ok(())
    }
}
