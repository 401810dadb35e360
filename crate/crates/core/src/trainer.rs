//! Alternating training of the main autoencoder F and the noise generator G.
//!
//! F minimizes reconstruction error against the normal data, both when fed
//! normal batches and when fed pseudo-anomalous batches (which it must map
//! back to their normal sources). G minimizes the reconstruction error of
//! its pseudo anomalies through a frozen F while maximizing the noise
//! amplitude, weighted by lambda.

use crate::error::{Error, Result};
use crate::models::AeConfig;
use crate::nn::{
    backward, forward, init_params, mse_loss, AdamState, MlpParams, MlpSpec, ParamGrads,
};
use crate::pseudo::{clip_and_recompute, make_pseudo_gaussian, GaussianNoiseConfig, PseudoBatch};
use crate::rng::RngState;
use crate::tensor::Tensor2D;

// Independent RNG streams per purpose, so e.g. initializing G never shifts
// the draws that drive F's trajectory.
const STREAM_F_INIT: u64 = 1;
const STREAM_G_INIT: u64 = 2;
const STREAM_SHUFFLE: u64 = 3;
const STREAM_CHOICE: u64 = 4;
const STREAM_NOISE: u64 = 5;

/// How pseudo-anomaly batches are produced during training.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum PseudoMode {
    /// Noise from the trained generator G.
    Learned,
    /// Non-learnable Gaussian noise with the given sigma.
    Gaussian(f64),
    /// No pseudo anomalies: plain autoencoder training.
    Baseline,
}

/// Training hyperparameters.
#[derive(Debug, Clone, PartialEq)]
pub struct TrainConfig {
    /// Probability that an iteration trains on pseudo anomalies.
    pub p: f64,
    /// Noise-amplitude weight in the generator loss.
    pub lambda: f64,
    pub batch_size: usize,
    pub lr_f: f64,
    pub lr_g: f64,
    pub epochs: usize,
    pub seed: u64,
    pub pseudo_mode: PseudoMode,
}

impl TrainConfig {
    /// Defaults for tabular network-intrusion data: p = 0.5, lambda = 1,
    /// batch 1024, both learning rates 1e-4.
    pub fn network_defaults(seed: u64) -> Self {
        TrainConfig {
            p: 0.5,
            lambda: 1.0,
            batch_size: 1024,
            lr_f: 1e-4,
            lr_g: 1e-4,
            epochs: 20,
            seed,
            pseudo_mode: PseudoMode::Learned,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(0.0..=1.0).contains(&self.p) {
            return Err(Error::InvalidArgument(format!(
                "p must be in [0, 1], got {}",
                self.p
            )));
        }
        if self.lambda < 0.0 || !self.lambda.is_finite() {
            return Err(Error::InvalidArgument(format!(
                "lambda must be finite and >= 0, got {}",
                self.lambda
            )));
        }
        if self.batch_size == 0 {
            return Err(Error::InvalidArgument("batch_size must be >= 1".into()));
        }
        if self.epochs == 0 {
            return Err(Error::InvalidArgument("epochs must be >= 1".into()));
        }
        if let PseudoMode::Gaussian(sigma) = self.pseudo_mode {
            GaussianNoiseConfig::new(sigma)?;
        }
        Ok(())
    }

    fn effective_p(&self) -> f64 {
        match self.pseudo_mode {
            PseudoMode::Baseline => 0.0,
            _ => self.p,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BatchKind {
    Normal,
    Pseudo,
}

/// One telemetry record per training iteration. Generator loss and noise
/// norm are present exactly on pseudo iterations of a learned-noise run.
#[derive(Debug, Clone, PartialEq)]
pub struct TelemetryRow {
    pub iteration: usize,
    pub batch_kind: BatchKind,
    pub loss_f: f64,
    pub loss_g: Option<f64>,
    pub noise_norm: Option<f64>,
}

/// Receives telemetry rows as they are produced, so partial telemetry
/// survives an aborted run.
pub trait TelemetrySink {
    fn record(&mut self, row: &TelemetryRow) -> Result<()>;
}

/// Discards all rows.
pub struct NullSink;

impl TelemetrySink for NullSink {
    fn record(&mut self, _row: &TelemetryRow) -> Result<()> {
        Ok(())
    }
}

impl TelemetrySink for Vec<TelemetryRow> {
    fn record(&mut self, row: &TelemetryRow) -> Result<()> {
        self.push(row.clone());
        Ok(())
    }
}

/// A network bundled with its optimizer state.
#[derive(Debug, Clone)]
pub struct NetState {
    pub spec: MlpSpec,
    pub params: MlpParams,
    pub opt: AdamState,
}

impl NetState {
    pub fn new(spec: MlpSpec, params: MlpParams, lr: f64) -> Self {
        let opt = AdamState::new(lr, &params);
        NetState { spec, params, opt }
    }
}

/// The result of a training run.
#[derive(Debug, Clone)]
pub struct TrainedModel {
    pub f_params: MlpParams,
    pub g_params: Option<MlpParams>,
    pub ae_config: AeConfig,
    pub train_config: TrainConfig,
    pub telemetry: Vec<TelemetryRow>,
}

/// One Adam update of F on a normal batch: input and target are both X^N.
pub fn f_step_normal(f: &mut NetState, x_normal: &Tensor2D) -> Result<f64> {
    let (out, cache) = forward(&f.params, &f.spec, x_normal)?;
    let (loss, grad) = mse_loss(&out, x_normal)?;
    if !loss.is_finite() {
        return Err(Error::NonFinite(format!("F loss on normal batch: {loss}")));
    }
    let (grads, _) = backward(&f.params, &f.spec, &cache, &grad)?;
    f.opt.step(&mut f.params, &grads)?;
    Ok(loss)
}

/// One Adam update of F on a pseudo batch: input is X^P, target is the
/// normal source X^N. The pseudo batch is a constant; nothing flows into G.
pub fn f_step_pseudo(f: &mut NetState, pseudo: &PseudoBatch) -> Result<f64> {
    let (out, cache) = forward(&f.params, &f.spec, &pseudo.x_pseudo)?;
    let (loss, grad) = mse_loss(&out, &pseudo.x_normal)?;
    if !loss.is_finite() {
        return Err(Error::NonFinite(format!("F loss on pseudo batch: {loss}")));
    }
    let (grads, _) = backward(&f.params, &f.spec, &cache, &grad)?;
    f.opt.step(&mut f.params, &grads)?;
    Ok(loss)
}

/// Generator loss, noise norm, and analytic gradients with respect to G's
/// parameters, differentiated through the frozen F and the clip mask.
///
/// Loss per batch: mean over samples of (1/d) (||F(X^P) - X^P||^2 -
/// lambda ||dX||^2), with dX the recomputed post-clip noise in both terms.
pub fn g_loss_and_grads(
    g_params: &MlpParams,
    g_spec: &MlpSpec,
    f_params: &MlpParams,
    f_spec: &MlpSpec,
    x_normal: &Tensor2D,
    lambda: f64,
    range: crate::models::DataRange,
) -> Result<(f64, f64, ParamGrads)> {
    let (raw_noise, g_cache) = forward(g_params, g_spec, x_normal)?;
    let (batch, saturated) = clip_and_recompute(x_normal, &raw_noise, range)?;

    let (f_out, f_cache) = forward(f_params, f_spec, &batch.x_pseudo)?;
    let (recon_term, grad_f_out) = mse_loss(&f_out, &batch.x_pseudo)?;
    let zeros = Tensor2D::zeros(batch.delta.rows(), batch.delta.cols());
    let (noise_term, grad_delta) = mse_loss(&batch.delta, &zeros)?;
    let loss = recon_term - lambda * noise_term;

    // dLoss/dX^P: through F's input, minus the direct target path, minus
    // the noise-amplitude term (dX moves one-for-one with X^P).
    let (_, grad_through_f) = backward(f_params, f_spec, &f_cache, &grad_f_out)?;
    let mut grad_xp = grad_through_f
        .sub(&grad_f_out)?
        .sub(&grad_delta.scale(lambda))?;

    // Saturated entries are constants of G's output.
    for (g, &sat) in grad_xp.data_mut().iter_mut().zip(&saturated) {
        if sat {
            *g = 0.0;
        }
    }
    let (g_grads, _) = backward(g_params, g_spec, &g_cache, &grad_xp)?;
    Ok((loss, batch.mean_noise_norm(), g_grads))
}

/// One Adam update of G against a frozen F. Returns the pre-update loss and
/// the mean per-sample noise norm. F's parameters are not touched.
pub fn g_step(
    g: &mut NetState,
    f_frozen: &NetState,
    x_normal: &Tensor2D,
    lambda: f64,
    range: crate::models::DataRange,
) -> Result<(f64, f64)> {
    let (loss, noise_norm, grads) = g_loss_and_grads(
        &g.params,
        &g.spec,
        &f_frozen.params,
        &f_frozen.spec,
        x_normal,
        lambda,
        range,
    )?;
    if !loss.is_finite() {
        return Err(Error::NonFinite(format!("G loss: {loss}")));
    }
    g.opt.step(&mut g.params, &grads)?;
    Ok((loss, noise_norm))
}

/// Run the full alternating training loop.
///
/// Each iteration draws a batch from the epoch's shuffled order and decides
/// with probability p whether it is a pseudo iteration. On a learned-noise
/// pseudo iteration G updates first on the batch, then F trains on fresh
/// noise from the just-updated G.
pub fn train(
    dataset: &Tensor2D,
    ae_config: &AeConfig,
    config: &TrainConfig,
    sink: &mut dyn TelemetrySink,
) -> Result<TrainedModel> {
    config.validate()?;
    if dataset.rows() == 0 {
        return Err(Error::InvalidArgument("training dataset is empty".into()));
    }
    if dataset.cols() != ae_config.input_dim() {
        return Err(Error::ShapeMismatch(format!(
            "dataset has {} features, model expects {}",
            dataset.cols(),
            ae_config.input_dim()
        )));
    }

    let root = RngState::new(config.seed);
    let mut f = NetState::new(
        ae_config.f_spec.clone(),
        init_params(&ae_config.f_spec, &mut root.fork(STREAM_F_INIT))?,
        config.lr_f,
    );
    let mut g = match config.pseudo_mode {
        PseudoMode::Learned => Some(NetState::new(
            ae_config.g_spec.clone(),
            init_params(&ae_config.g_spec, &mut root.fork(STREAM_G_INIT))?,
            config.lr_g,
        )),
        _ => None,
    };
    let mut rng_shuffle = root.fork(STREAM_SHUFFLE);
    let mut rng_choice = root.fork(STREAM_CHOICE);
    let mut rng_noise = root.fork(STREAM_NOISE);

    let effective_p = config.effective_p();
    let mut telemetry = Vec::new();
    let mut iteration = 0;
    let mut order: Vec<usize> = (0..dataset.rows()).collect();

    for _epoch in 0..config.epochs {
        rng_shuffle.shuffle(&mut order);
        for chunk in order.chunks(config.batch_size) {
            iteration += 1;
            let batch = dataset.select_rows(chunk);
            let is_pseudo = rng_choice.bernoulli(effective_p);
            let row = if !is_pseudo {
                let loss_f = f_step_normal(&mut f, &batch)?;
                TelemetryRow {
                    iteration,
                    batch_kind: BatchKind::Normal,
                    loss_f,
                    loss_g: None,
                    noise_norm: None,
                }
            } else {
                match config.pseudo_mode {
                    PseudoMode::Learned => {
                        let g = g.as_mut().unwrap();
                        let (loss_g, noise_norm) =
                            g_step(g, &f, &batch, config.lambda, ae_config.data_range)?;
                        let (pseudo, _) = crate::pseudo::make_pseudo_learned(
                            &g.params,
                            &g.spec,
                            &batch,
                            ae_config.data_range,
                        )?;
                        let loss_f = f_step_pseudo(&mut f, &pseudo)?;
                        TelemetryRow {
                            iteration,
                            batch_kind: BatchKind::Pseudo,
                            loss_f,
                            loss_g: Some(loss_g),
                            noise_norm: Some(noise_norm),
                        }
                    }
                    PseudoMode::Gaussian(sigma) => {
                        let cfg = GaussianNoiseConfig::new(sigma)?;
                        let pseudo = make_pseudo_gaussian(
                            &batch,
                            cfg,
                            ae_config.data_range,
                            &mut rng_noise,
                        )?;
                        let loss_f = f_step_pseudo(&mut f, &pseudo)?;
                        TelemetryRow {
                            iteration,
                            batch_kind: BatchKind::Pseudo,
                            loss_f,
                            loss_g: None,
                            noise_norm: None,
                        }
                    }
                    PseudoMode::Baseline => unreachable!("effective_p is 0 for Baseline"),
                }
            };
            sink.record(&row)?;
            telemetry.push(row);
        }
    }

    Ok(TrainedModel {
        f_params: f.params,
        g_params: g.take().map(|net| net.params),
        ae_config: ae_config.clone(),
        train_config: config.clone(),
        telemetry,
    })
}
