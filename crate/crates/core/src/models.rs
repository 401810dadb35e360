//! Autoencoder architectures for the main network F and the noise
//! generator G, including the KDDCUP presets and the output-activation
//! pairing rules between the two.

use crate::error::{Error, Result};
use crate::nn::{ActivationKind, MlpSpec};

/// Value range of the data a model operates on. Bounded data gets a
/// saturating final activation on F and a doubled-range one on G; the range
/// also supplies the peak value M for PSNR scoring and the clipping bounds
/// for pseudo anomalies.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum DataRange {
    Bounded { lo: f64, hi: f64 },
    Unbounded,
}

impl DataRange {
    pub fn bounded(lo: f64, hi: f64) -> Result<Self> {
        if !lo.is_finite() || !hi.is_finite() || lo >= hi {
            return Err(Error::InvalidArgument(format!(
                "bounded range needs lo < hi, got [{lo}, {hi}]"
            )));
        }
        Ok(DataRange::Bounded { lo, hi })
    }

    pub fn clip(&self, v: f64) -> f64 {
        match *self {
            DataRange::Bounded { lo, hi } => v.clamp(lo, hi),
            DataRange::Unbounded => v,
        }
    }
}

/// Which side of the pair a network plays: the deployed reconstruction
/// model or the noise generator feeding it pseudo anomalies.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AeRole {
    MainF,
    NoiseG,
}

/// Paired F/G architecture plus the data range both operate in.
#[derive(Debug, Clone, PartialEq)]
pub struct AeConfig {
    pub f_spec: MlpSpec,
    pub g_spec: MlpSpec,
    pub data_range: DataRange,
}

impl AeConfig {
    pub fn new(f_spec: MlpSpec, g_spec: MlpSpec, data_range: DataRange) -> Result<Self> {
        let dim = f_spec.input_dim();
        if f_spec.output_dim() != dim || g_spec.input_dim() != dim || g_spec.output_dim() != dim {
            return Err(Error::InvalidArgument(
                "F and G must map the data dimension to itself".into(),
            ));
        }
        let expect_f = final_activation(data_range, AeRole::MainF)?;
        let expect_g = final_activation(data_range, AeRole::NoiseG)?;
        if f_spec.final_activation() != expect_f {
            return Err(Error::InvalidArgument(format!(
                "F final activation {:?} does not match range {:?} (expected {:?})",
                f_spec.final_activation(),
                data_range,
                expect_f
            )));
        }
        if g_spec.final_activation() != expect_g {
            return Err(Error::InvalidArgument(format!(
                "G final activation {:?} does not match range {:?} (expected {:?})",
                g_spec.final_activation(),
                data_range,
                expect_g
            )));
        }
        Ok(AeConfig {
            f_spec,
            g_spec,
            data_range,
        })
    }

    pub fn input_dim(&self) -> usize {
        self.f_spec.input_dim()
    }
}

/// Final activation imposed by the role/range pairing. F saturates to the
/// data range; G spans (-(hi-lo), +(hi-lo)) so one noise application can
/// move a value from either extreme to the other. Unbounded data takes a
/// bare linear layer on both.
fn final_activation(range: DataRange, role: AeRole) -> Result<ActivationKind> {
    match (range, role) {
        (DataRange::Unbounded, _) => Ok(ActivationKind::Identity),
        (DataRange::Bounded { lo, hi }, AeRole::MainF) if lo == -1.0 && hi == 1.0 => {
            Ok(ActivationKind::Tanh)
        }
        (DataRange::Bounded { lo, hi }, AeRole::NoiseG) if lo == -1.0 && hi == 1.0 => {
            Ok(ActivationKind::TanhTimes2)
        }
        (DataRange::Bounded { lo, hi }, AeRole::MainF) if lo == 0.0 && hi == 1.0 => {
            Ok(ActivationKind::Sigmoid)
        }
        (DataRange::Bounded { lo, hi }, AeRole::NoiseG) if lo == 0.0 && hi == 1.0 => {
            Ok(ActivationKind::Tanh)
        }
        (DataRange::Bounded { lo, hi }, _) => Err(Error::InvalidArgument(format!(
            "no activation pairing defined for range [{lo}, {hi}]; supported bounded ranges are [-1, 1] and [0, 1]"
        ))),
    }
}

/// The KDDCUP main autoencoder: 118-60-30-10-3-10-30-60-118 with tanh after
/// every affine layer except the final linear one. Returns the spec together
/// with the latent width.
pub fn build_kddcup_f() -> (MlpSpec, usize) {
    let dims = vec![118, 60, 30, 10, 3, 10, 30, 60, 118];
    let mut activations = vec![ActivationKind::Tanh; dims.len() - 1];
    *activations.last_mut().unwrap() = ActivationKind::Identity;
    (MlpSpec::new(dims, activations).unwrap(), 3)
}

/// The KDDCUP noise generator: 118-60-30-10-30-60-118, tanh except the
/// final linear layer.
pub fn build_kddcup_g() -> MlpSpec {
    let dims = vec![118, 60, 30, 10, 30, 60, 118];
    let mut activations = vec![ActivationKind::Tanh; dims.len() - 1];
    *activations.last_mut().unwrap() = ActivationKind::Identity;
    MlpSpec::new(dims, activations).unwrap()
}

/// Symmetric autoencoder: `hidden_dims` describes the encoder down to the
/// bottleneck; the decoder mirrors it back up. Hidden layers use tanh; the
/// final activation follows the role/range pairing.
pub fn build_generic_ae(
    input_dim: usize,
    hidden_dims: &[usize],
    range: DataRange,
    role: AeRole,
) -> Result<MlpSpec> {
    if input_dim == 0 {
        return Err(Error::InvalidArgument("input_dim must be >= 1".into()));
    }
    if hidden_dims.is_empty() {
        return Err(Error::InvalidArgument(
            "hidden_dims must be nonempty".into(),
        ));
    }
    let mut dims = Vec::with_capacity(2 * hidden_dims.len() + 1);
    dims.push(input_dim);
    dims.extend_from_slice(hidden_dims);
    dims.extend(hidden_dims.iter().rev().skip(1));
    dims.push(input_dim);
    let mut activations = vec![ActivationKind::Tanh; dims.len() - 1];
    *activations.last_mut().unwrap() = final_activation(range, role)?;
    MlpSpec::new(dims, activations)
}
