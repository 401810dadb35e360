//! The attack-as-normal split protocol for labeled tabular data: train on a
//! random half of the normal samples; test on the remaining normal half plus
//! a random half of the anomalous samples. The label polarity is already
//! handled by the schema, which declares the anomalous class positive.

use crate::data::encode::EncodedDataset;
use crate::error::{Error, Result};
use crate::rng::RngState;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SplitSpec {
    /// Fraction of normal samples assigned to the training set.
    pub train_fraction_normal: f64,
    /// Fraction of anomalous samples assigned to the test set; the rest are
    /// discarded.
    pub test_anomaly_fraction: f64,
    pub seed: u64,
}

impl SplitSpec {
    pub fn new(train_fraction_normal: f64, test_anomaly_fraction: f64, seed: u64) -> Result<Self> {
        for (name, f) in [
            ("train_fraction_normal", train_fraction_normal),
            ("test_anomaly_fraction", test_anomaly_fraction),
        ] {
            if !(f > 0.0 && f < 1.0) {
                return Err(Error::InvalidArgument(format!(
                    "{name} must be in (0, 1), got {f}"
                )));
            }
        }
        Ok(SplitSpec {
            train_fraction_normal,
            test_anomaly_fraction,
            seed,
        })
    }
}

impl Default for SplitSpec {
    fn default() -> Self {
        SplitSpec {
            train_fraction_normal: 0.5,
            test_anomaly_fraction: 0.5,
            seed: 0,
        }
    }
}

/// Split a labeled dataset per the protocol. Selection is seeded and
/// deterministic; floor rounding applies to both fractions and the normal
/// remainder stays in the test set.
pub fn kddcup_split(
    ds: &EncodedDataset,
    spec: &SplitSpec,
) -> Result<(EncodedDataset, EncodedDataset)> {
    let labels = ds.labels_or_err()?;
    let mut normal: Vec<usize> = Vec::new();
    let mut anomalous: Vec<usize> = Vec::new();
    for (i, &l) in labels.iter().enumerate() {
        if l {
            anomalous.push(i);
        } else {
            normal.push(i);
        }
    }
    if normal.is_empty() || anomalous.is_empty() {
        return Err(Error::InvalidArgument(format!(
            "split needs both classes, found {} normal and {} anomalous",
            normal.len(),
            anomalous.len()
        )));
    }

    let mut rng = RngState::new(spec.seed);
    rng.shuffle(&mut normal);
    rng.shuffle(&mut anomalous);

    let n_train = (spec.train_fraction_normal * normal.len() as f64).floor() as usize;
    let n_anom_test = (spec.test_anomaly_fraction * anomalous.len() as f64).floor() as usize;

    let mut train_idx: Vec<usize> = normal[..n_train].to_vec();
    let mut test_normal: Vec<usize> = normal[n_train..].to_vec();
    let mut test_anom: Vec<usize> = anomalous[..n_anom_test].to_vec();
    train_idx.sort_unstable();
    test_normal.sort_unstable();
    test_anom.sort_unstable();
    let test_idx: Vec<usize> = test_normal.into_iter().chain(test_anom).collect();

    let subset = |indices: &[usize]| EncodedDataset {
        features: ds.features.select_rows(indices),
        labels: Some(indices.iter().map(|&i| labels[i]).collect()),
        feature_names: ds.feature_names.clone(),
        norm_stats: ds.norm_stats.clone(),
    };
    Ok((subset(&train_idx), subset(&test_idx)))
}
