//! Labeled synthetic datasets for desk-scale experiments and acceptance
//! tests. Normal rows come first, anomalous rows after, deterministically
//! from the seed.

use crate::data::encode::EncodedDataset;
use crate::error::{Error, Result};
use crate::rng::RngState;
use crate::tensor::Tensor2D;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SynthKind {
    /// Normal: tight Gaussian blob at the origin. Anomalous: uniform in
    /// [-1, 1]^dim.
    GaussianBlob,
    /// Normal: radius-1 circle in the first two coordinates, embedded in
    /// `dim` dimensions with sigma = 0.05 jitter on every coordinate.
    /// Anomalous: uniform inside the ring, i.e. over the in-plane disk of
    /// radius 0.5, with the same jitter.
    Ring,
    /// Normal: two Gaussian blobs at +/-0.75 along the first axis.
    /// Anomalous: a tight blob between them at the origin.
    TwoBlobs,
}

impl SynthKind {
    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "blob" | "gaussian-blob" => Ok(SynthKind::GaussianBlob),
            "ring" => Ok(SynthKind::Ring),
            "two-blobs" => Ok(SynthKind::TwoBlobs),
            other => Err(Error::InvalidArgument(format!(
                "unknown synthetic kind {other:?} (expected blob, ring, or two-blobs)"
            ))),
        }
    }
}

pub fn synth_generate(
    kind: SynthKind,
    n_normal: usize,
    n_anomalous: usize,
    dim: usize,
    seed: u64,
) -> Result<EncodedDataset> {
    if dim < 2 {
        return Err(Error::InvalidArgument(format!(
            "dim must be >= 2, got {dim}"
        )));
    }
    if n_normal == 0 || n_anomalous == 0 {
        return Err(Error::InvalidArgument(format!(
            "counts must be >= 1, got {n_normal} normal / {n_anomalous} anomalous"
        )));
    }
    let mut rng = RngState::new(seed);
    let mut data = Vec::with_capacity((n_normal + n_anomalous) * dim);
    for _ in 0..n_normal {
        data.extend(sample_normal(kind, dim, &mut rng));
    }
    for _ in 0..n_anomalous {
        data.extend(sample_anomalous(kind, dim, &mut rng));
    }
    let mut labels = vec![false; n_normal];
    labels.extend(vec![true; n_anomalous]);
    Ok(EncodedDataset {
        features: Tensor2D::from_vec(n_normal + n_anomalous, dim, data)?,
        labels: Some(labels),
        feature_names: (0..dim).map(|i| format!("f{i}")).collect(),
        norm_stats: None,
    })
}

fn sample_normal(kind: SynthKind, dim: usize, rng: &mut RngState) -> Vec<f64> {
    match kind {
        SynthKind::GaussianBlob => (0..dim).map(|_| 0.1 * rng.next_gaussian()).collect(),
        SynthKind::Ring => {
            let theta = rng.next_range(0.0, std::f64::consts::TAU);
            let mut v: Vec<f64> = (0..dim).map(|_| 0.05 * rng.next_gaussian()).collect();
            v[0] += theta.cos();
            v[1] += theta.sin();
            v
        }
        SynthKind::TwoBlobs => {
            let center = if rng.bernoulli(0.5) { 0.75 } else { -0.75 };
            let mut v: Vec<f64> = (0..dim).map(|_| 0.1 * rng.next_gaussian()).collect();
            v[0] += center;
            v
        }
    }
}

fn sample_anomalous(kind: SynthKind, dim: usize, rng: &mut RngState) -> Vec<f64> {
    match kind {
        SynthKind::GaussianBlob => (0..dim).map(|_| rng.next_range(-1.0, 1.0)).collect(),
        SynthKind::Ring => {
            // uniform over the in-plane disk: radius ~ 0.5 * sqrt(u)
            let radius = 0.5 * rng.next_f64().sqrt();
            let phi = rng.next_range(0.0, std::f64::consts::TAU);
            let mut v: Vec<f64> = (0..dim).map(|_| 0.05 * rng.next_gaussian()).collect();
            v[0] += radius * phi.cos();
            v[1] += radius * phi.sin();
            v
        }
        SynthKind::TwoBlobs => (0..dim).map(|_| 0.05 * rng.next_gaussian()).collect(),
    }
}
