//! Min-max feature normalization with statistics fitted on the training set
//! only. Test values may leave [0, 1]; they are deliberately not clipped.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use crate::data::encode::EncodedDataset;
use crate::error::{Error, Result};

/// Per-feature (min, max) fitted on training data.
#[derive(Debug, Clone, PartialEq)]
pub struct NormStats {
    pub per_feature: Vec<(f64, f64)>,
}

impl NormStats {
    /// Features whose training column was constant; these normalize to 0.
    pub fn constant_features(&self) -> Vec<usize> {
        self.per_feature
            .iter()
            .enumerate()
            .filter(|(_, (lo, hi))| lo == hi)
            .map(|(i, _)| i)
            .collect()
    }

    pub fn save(&self, path: &Path, feature_names: &[String]) -> Result<()> {
        let file = File::create(path).map_err(|e| Error::io(path, e))?;
        let mut w = BufWriter::new(file);
        writeln!(w, "feature,min,max").map_err(|e| Error::io(path, e))?;
        for (name, (lo, hi)) in feature_names.iter().zip(&self.per_feature) {
            writeln!(w, "{name},{lo},{hi}").map_err(|e| Error::io(path, e))?;
        }
        w.flush().map_err(|e| Error::io(path, e))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let file = File::open(path).map_err(|e| Error::io(path, e))?;
        let reader = BufReader::new(file);
        let mut per_feature = Vec::new();
        for (i, line) in reader.lines().enumerate() {
            let line = line.map_err(|e| Error::io(path, e))?;
            if i == 0 {
                continue;
            }
            let parts: Vec<&str> = line.split(',').collect();
            if parts.len() != 3 {
                return Err(Error::Config(format!(
                    "{}: bad stats line {}",
                    path.display(),
                    i + 1
                )));
            }
            let lo: f64 = parts[1].parse().map_err(|_| {
                Error::Config(format!("{}: bad min on line {}", path.display(), i + 1))
            })?;
            let hi: f64 = parts[2].parse().map_err(|_| {
                Error::Config(format!("{}: bad max on line {}", path.display(), i + 1))
            })?;
            per_feature.push((lo, hi));
        }
        Ok(NormStats { per_feature })
    }
}

/// Column-wise min and max of the training features.
pub fn fit_minmax(train: &EncodedDataset) -> Result<NormStats> {
    if train.n_samples() == 0 {
        return Err(Error::InvalidArgument(
            "cannot fit stats on an empty dataset".into(),
        ));
    }
    let d = train.n_features();
    let mut per_feature = vec![(f64::INFINITY, f64::NEG_INFINITY); d];
    for r in 0..train.n_samples() {
        for (stat, &v) in per_feature.iter_mut().zip(train.features.row(r)) {
            stat.0 = stat.0.min(v);
            stat.1 = stat.1.max(v);
        }
    }
    Ok(NormStats { per_feature })
}

/// x' = (x - min) / (max - min) per feature. Constant training features map
/// to 0. Values outside the training range scale past [0, 1] untouched.
pub fn apply_minmax(ds: &EncodedDataset, stats: &NormStats) -> Result<EncodedDataset> {
    if stats.per_feature.len() != ds.n_features() {
        return Err(Error::ShapeMismatch(format!(
            "{} features vs {} stats",
            ds.n_features(),
            stats.per_feature.len()
        )));
    }
    let mut out = ds.clone();
    let d = ds.n_features();
    for r in 0..ds.n_samples() {
        for c in 0..d {
            let (lo, hi) = stats.per_feature[c];
            let v = ds.features.get(r, c);
            let scaled = if hi > lo { (v - lo) / (hi - lo) } else { 0.0 };
            out.features.data_mut()[r * d + c] = scaled;
        }
    }
    out.norm_stats = Some(stats.per_feature.clone());
    Ok(out)
}
