//! Pseudo-anomaly construction: learned noise from the generator G and the
//! non-learnable Gaussian baseline, both sharing the clip-and-recompute
//! pipeline so the stored noise always equals pseudo minus normal.

use crate::error::{Error, Result};
use crate::models::DataRange;
use crate::nn::{forward_output, MlpParams, MlpSpec};
use crate::rng::RngState;
use crate::tensor::Tensor2D;

/// Gaussian baseline noise, mean zero.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GaussianNoiseConfig {
    sigma: f64,
}

impl GaussianNoiseConfig {
    pub fn new(sigma: f64) -> Result<Self> {
        if !sigma.is_finite() || sigma <= 0.0 {
            return Err(Error::InvalidArgument(format!(
                "sigma must be positive and finite, got {sigma}"
            )));
        }
        Ok(GaussianNoiseConfig { sigma })
    }

    pub fn sigma(&self) -> f64 {
        self.sigma
    }
}

/// A batch of pseudo anomalies together with its source and the recomputed
/// noise. `x_pseudo == x_normal + delta` holds exactly: delta is recomputed
/// as clipped-minus-normal and x_pseudo is then rebuilt as normal-plus-delta.
#[derive(Debug, Clone, PartialEq)]
pub struct PseudoBatch {
    pub x_normal: Tensor2D,
    pub x_pseudo: Tensor2D,
    pub delta: Tensor2D,
}

impl PseudoBatch {
    /// Mean per-sample Frobenius norm of the noise.
    pub fn mean_noise_norm(&self) -> f64 {
        let norms = self.delta.row_sq_norms();
        norms.iter().map(|n| n.sqrt()).sum::<f64>() / norms.len().max(1) as f64
    }
}

/// Pseudo anomalies from the generator: delta_raw = G(x), then clip the sum
/// into the data range and recompute the noise from the clipped values.
/// The returned mask flags entries where clipping changed the value; those
/// entries must not pass gradient back into G.
pub fn make_pseudo_learned(
    g_params: &MlpParams,
    g_spec: &MlpSpec,
    x_normal: &Tensor2D,
    range: DataRange,
) -> Result<(PseudoBatch, Vec<bool>)> {
    let raw = forward_output(g_params, g_spec, x_normal)?;
    clip_and_recompute(x_normal, &raw, range)
}

/// Pseudo anomalies from i.i.d. Gaussian noise, through the same
/// clip-and-recompute pipeline as the learned path.
pub fn make_pseudo_gaussian(
    x_normal: &Tensor2D,
    cfg: GaussianNoiseConfig,
    range: DataRange,
    rng: &mut RngState,
) -> Result<PseudoBatch> {
    let mut raw = Tensor2D::zeros(x_normal.rows(), x_normal.cols());
    for v in raw.data_mut() {
        *v = cfg.sigma * rng.next_gaussian();
    }
    clip_and_recompute(x_normal, &raw, range).map(|(batch, _)| batch)
}

/// Shared pipeline: x_pseudo = clip(x + raw), delta = x_pseudo - x,
/// x_pseudo rebuilt as x + delta so the additive invariant is exact.
pub fn clip_and_recompute(
    x_normal: &Tensor2D,
    raw_noise: &Tensor2D,
    range: DataRange,
) -> Result<(PseudoBatch, Vec<bool>)> {
    if x_normal.rows() != raw_noise.rows() || x_normal.cols() != raw_noise.cols() {
        return Err(Error::ShapeMismatch(format!(
            "normal {}x{} vs noise {}x{}",
            x_normal.rows(),
            x_normal.cols(),
            raw_noise.rows(),
            raw_noise.cols()
        )));
    }
    let n = x_normal.data().len();
    let mut pseudo = vec![0.0; n];
    let mut delta = vec![0.0; n];
    let mut saturated = vec![false; n];
    for i in 0..n {
        let x = x_normal.data()[i];
        let sum = x + raw_noise.data()[i];
        let clipped = range.clip(sum);
        saturated[i] = clipped != sum;
        let (p, d) = recompose(x, clipped, range)?;
        pseudo[i] = p;
        delta[i] = d;
    }
    let batch = PseudoBatch {
        x_normal: x_normal.clone(),
        x_pseudo: Tensor2D::from_vec(x_normal.rows(), x_normal.cols(), pseudo)?,
        delta: Tensor2D::from_vec(x_normal.rows(), x_normal.cols(), delta)?,
    };
    Ok((batch, saturated))
}

/// delta = clipped - x and pseudo = x + delta. Rounding can push the rebuilt
/// value one ulp past a bound; nudge delta toward zero until it fits.
fn recompose(x: f64, clipped: f64, range: DataRange) -> Result<(f64, f64)> {
    let mut d = clipped - x;
    for _ in 0..8 {
        let p = x + d;
        if range.clip(p) == p {
            return Ok((p, d));
        }
        d = nextafter_toward_zero(d);
    }
    Err(Error::NonFinite(format!(
        "could not place {x} plus recomputed noise inside {range:?}"
    )))
}

fn nextafter_toward_zero(v: f64) -> f64 {
    if v == 0.0 {
        return 0.0;
    }
    let bits = v.to_bits();
    f64::from_bits(bits - 1)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::models::{build_generic_ae, AeRole};
    use crate::nn::init_params;

    fn unit_range() -> DataRange {
        DataRange::bounded(0.0, 1.0).unwrap()
    }

    #[test]
    fn zero_generator_produces_identity_batch() {
        let g_spec = build_generic_ae(3, &[2], unit_range(), AeRole::NoiseG).unwrap();
        let g = MlpParams::zeros(&g_spec);
        let x = Tensor2D::from_vec(2, 3, vec![0.1, 0.5, 0.9, 0.2, 0.4, 0.6]).unwrap();
        let (batch, mask) = make_pseudo_learned(&g, &g_spec, &x, unit_range()).unwrap();
        assert_eq!(batch.x_pseudo, x);
        assert!(batch.delta.data().iter().all(|&d| d == 0.0));
        assert!(mask.iter().all(|&m| !m));
    }

    #[test]
    fn clip_recomputes_noise() {
        let x = Tensor2D::from_vec(1, 1, vec![0.9]).unwrap();
        let raw = Tensor2D::from_vec(1, 1, vec![0.5]).unwrap();
        let (batch, mask) = clip_and_recompute(&x, &raw, unit_range()).unwrap();
        assert_eq!(batch.x_pseudo.get(0, 0), 1.0);
        assert_eq!(batch.delta.get(0, 0), 1.0 - 0.9);
        assert!((batch.delta.get(0, 0) - 0.1).abs() < 1e-15);
        assert!(mask[0]);
    }

    #[test]
    fn unbounded_never_clips() {
        let x = Tensor2D::from_vec(1, 1, vec![0.2]).unwrap();
        let raw = Tensor2D::from_vec(1, 1, vec![-3.7]).unwrap();
        let (batch, mask) = clip_and_recompute(&x, &raw, DataRange::Unbounded).unwrap();
        assert!((batch.x_pseudo.get(0, 0) - (-3.5)).abs() < 1e-15);
        assert_eq!(batch.delta.get(0, 0), -3.7);
        assert!(!mask[0]);
    }

    #[test]
    fn gaussian_same_seed_same_batch() {
        let x = Tensor2D::from_vec(4, 3, vec![0.5; 12]).unwrap();
        let cfg = GaussianNoiseConfig::new(0.3).unwrap();
        let a = make_pseudo_gaussian(&x, cfg, unit_range(), &mut RngState::new(9)).unwrap();
        let b = make_pseudo_gaussian(&x, cfg, unit_range(), &mut RngState::new(9)).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn gaussian_moments_at_scale() {
        let x = Tensor2D::zeros(1000, 1000);
        let cfg = GaussianNoiseConfig::new(1.0).unwrap();
        let batch =
            make_pseudo_gaussian(&x, cfg, DataRange::Unbounded, &mut RngState::new(77)).unwrap();
        let n = batch.delta.data().len() as f64;
        let mean = batch.delta.data().iter().sum::<f64>() / n;
        let std = (batch
            .delta
            .data()
            .iter()
            .map(|v| (v - mean) * (v - mean))
            .sum::<f64>()
            / n)
            .sqrt();
        assert!(mean.abs() < 0.005, "mean {mean}");
        assert!((std - 1.0).abs() < 0.005, "std {std}");
    }

    #[test]
    fn gaussian_respects_clipping() {
        let x = Tensor2D::from_vec(100, 10, vec![0.5; 1000]).unwrap();
        let cfg = GaussianNoiseConfig::new(0.1).unwrap();
        let batch = make_pseudo_gaussian(&x, cfg, unit_range(), &mut RngState::new(5)).unwrap();
        assert!(batch
            .x_pseudo
            .data()
            .iter()
            .all(|&v| (0.0..=1.0).contains(&v)));
    }

    #[test]
    fn sigma_must_be_positive() {
        assert!(GaussianNoiseConfig::new(0.0).is_err());
        assert!(GaussianNoiseConfig::new(-1.0).is_err());
    }

    #[test]
    fn tiny_sigma_degenerates_to_the_input() {
        let x = Tensor2D::from_vec(100, 10, vec![0.5; 1000]).unwrap();
        let cfg = GaussianNoiseConfig::new(1e-3).unwrap();
        let batch =
            make_pseudo_gaussian(&x, cfg, DataRange::Unbounded, &mut RngState::new(3)).unwrap();
        let max_delta = batch
            .delta
            .data()
            .iter()
            .fold(0.0_f64, |m, d| m.max(d.abs()));
        assert!(max_delta < 6.0 * cfg.sigma(), "max |delta| {max_delta}");
    }

    #[test]
    fn learned_noise_with_random_generator_keeps_invariants() {
        let range = DataRange::bounded(-1.0, 1.0).unwrap();
        let g_spec = build_generic_ae(4, &[3], range, AeRole::NoiseG).unwrap();
        let mut rng = RngState::new(13);
        let g = init_params(&g_spec, &mut rng).unwrap();
        let x =
            Tensor2D::from_vec(8, 4, (0..32).map(|_| rng.next_range(-1.0, 1.0)).collect()).unwrap();
        let (batch, mask) = make_pseudo_learned(&g, &g_spec, &x, range).unwrap();
        for i in 0..32 {
            let rebuilt = batch.x_normal.data()[i] + batch.delta.data()[i];
            assert_eq!(rebuilt.to_bits(), batch.x_pseudo.data()[i].to_bits());
            assert!((-1.0..=1.0).contains(&batch.x_pseudo.data()[i]));
        }
        assert_eq!(mask.len(), 32);
    }
}
