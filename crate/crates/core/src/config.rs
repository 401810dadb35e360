//! Flat key=value training configuration files.
//!
//! ```text
//! # hyperparameters (defaults: network-intrusion column)
//! p = 0.5
//! lambda = 1
//! batch_size = 1024
//! lr_f = 1e-4
//! lr_g = 1e-4
//! epochs = 20
//!
//! # architecture
//! arch = kddcup            # or generic
//! hidden = 10,5,3          # generic F encoder widths down to the bottleneck
//! g_hidden = 10,5          # generic G widths; default drops F's bottleneck
//! range = unbounded        # or 0,1 / -1,1
//! ```
//!
//! Unknown keys are errors.

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use crate::error::{Error, Result};
use crate::models::{
    build_generic_ae, build_kddcup_f, build_kddcup_g, AeConfig, AeRole, DataRange,
};
use crate::trainer::{PseudoMode, TrainConfig};

/// Parsed but unresolved settings; unset keys fall back to defaults at
/// [`TrainSettings::resolve`] time.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct TrainSettings {
    pub p: Option<f64>,
    pub lambda: Option<f64>,
    pub batch_size: Option<usize>,
    pub lr_f: Option<f64>,
    pub lr_g: Option<f64>,
    pub epochs: Option<usize>,
    pub arch: Option<String>,
    pub hidden: Option<Vec<usize>>,
    pub g_hidden: Option<Vec<usize>>,
    pub range: Option<DataRange>,
}

impl TrainSettings {
    pub fn parse(text: &str) -> Result<Self> {
        let mut pairs = BTreeMap::new();
        for (lineno, line) in text.lines().enumerate() {
            let line = line.split('#').next().unwrap().trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| {
                Error::Config(format!("line {}: expected key = value", lineno + 1))
            })?;
            let key = key.trim().to_owned();
            if pairs.insert(key.clone(), value.trim().to_owned()).is_some() {
                return Err(Error::Config(format!("duplicate key {key:?}")));
            }
        }
        let mut settings = TrainSettings::default();
        for (key, value) in pairs {
            match key.as_str() {
                "p" => settings.p = Some(parse_f64(&key, &value)?),
                "lambda" => settings.lambda = Some(parse_f64(&key, &value)?),
                "batch_size" => settings.batch_size = Some(parse_usize(&key, &value)?),
                "lr_f" => settings.lr_f = Some(parse_f64(&key, &value)?),
                "lr_g" => settings.lr_g = Some(parse_f64(&key, &value)?),
                "epochs" => settings.epochs = Some(parse_usize(&key, &value)?),
                "arch" => match value.as_str() {
                    "kddcup" | "generic" => settings.arch = Some(value),
                    other => {
                        return Err(Error::Config(format!(
                            "arch must be kddcup or generic, got {other:?}"
                        )))
                    }
                },
                "hidden" => settings.hidden = Some(parse_dims(&key, &value)?),
                "g_hidden" => settings.g_hidden = Some(parse_dims(&key, &value)?),
                "range" => settings.range = Some(parse_range(&value)?),
                other => return Err(Error::Config(format!("unknown key {other:?}"))),
            }
        }
        Ok(settings)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        TrainSettings::parse(&text)
    }

    /// Resolve against the data width into a concrete architecture and
    /// training configuration. `mode` comes from the command line; baseline
    /// forces p to zero.
    pub fn resolve(
        &self,
        data_dim: usize,
        seed: u64,
        mode: PseudoMode,
    ) -> Result<(AeConfig, TrainConfig)> {
        let arch = match self.arch.as_deref() {
            Some(a) => a.to_owned(),
            None => {
                if data_dim == 118 && self.hidden.is_none() {
                    "kddcup".to_owned()
                } else {
                    "generic".to_owned()
                }
            }
        };
        let range = self.range.unwrap_or(DataRange::Unbounded);
        let ae_config = if arch == "kddcup" {
            if data_dim != 118 {
                return Err(Error::Config(format!(
                    "kddcup architecture expects 118 features, data has {data_dim}"
                )));
            }
            if range != DataRange::Unbounded {
                return Err(Error::Config(
                    "kddcup architecture uses unbounded data (linear output layers)".into(),
                ));
            }
            AeConfig::new(build_kddcup_f().0, build_kddcup_g(), DataRange::Unbounded)?
        } else {
            let hidden = match &self.hidden {
                Some(h) => h.clone(),
                None => default_hidden(data_dim),
            };
            let g_hidden = match &self.g_hidden {
                Some(h) => h.clone(),
                None if hidden.len() > 1 => hidden[..hidden.len() - 1].to_vec(),
                None => hidden.clone(),
            };
            let f_spec = build_generic_ae(data_dim, &hidden, range, AeRole::MainF)?;
            let g_spec = build_generic_ae(data_dim, &g_hidden, range, AeRole::NoiseG)?;
            AeConfig::new(f_spec, g_spec, range)?
        };

        let p = match mode {
            PseudoMode::Baseline => 0.0,
            _ => self.p.unwrap_or(0.5),
        };
        let config = TrainConfig {
            p,
            lambda: self.lambda.unwrap_or(1.0),
            batch_size: self.batch_size.unwrap_or(1024),
            lr_f: self.lr_f.unwrap_or(1e-4),
            lr_g: self.lr_g.unwrap_or(1e-4),
            epochs: self.epochs.unwrap_or(20),
            seed,
            pseudo_mode: mode,
        };
        config.validate()?;
        Ok((ae_config, config))
    }
}

/// Halving chain from the data width, at most three hidden layers.
fn default_hidden(dim: usize) -> Vec<usize> {
    let mut dims = Vec::new();
    let mut h = dim / 2;
    while h >= 2 && dims.len() < 3 {
        dims.push(h);
        h /= 2;
    }
    if dims.is_empty() {
        dims.push(2);
    }
    dims
}

fn parse_f64(key: &str, value: &str) -> Result<f64> {
    value
        .parse()
        .map_err(|_| Error::Config(format!("{key}: not a number: {value:?}")))
}

fn parse_usize(key: &str, value: &str) -> Result<usize> {
    value
        .parse()
        .map_err(|_| Error::Config(format!("{key}: not a count: {value:?}")))
}

fn parse_dims(key: &str, value: &str) -> Result<Vec<usize>> {
    value
        .split(',')
        .map(|part| {
            part.trim()
                .parse()
                .map_err(|_| Error::Config(format!("{key}: bad dimension {part:?}")))
        })
        .collect()
}

fn parse_range(value: &str) -> Result<DataRange> {
    if value == "unbounded" {
        return Ok(DataRange::Unbounded);
    }
    let (lo, hi) = value
        .split_once(',')
        .ok_or_else(|| Error::Config(format!("range must be unbounded or lo,hi, got {value:?}")))?;
    let lo: f64 = lo
        .trim()
        .parse()
        .map_err(|_| Error::Config(format!("range: bad lower bound {lo:?}")))?;
    let hi: f64 = hi
        .trim()
        .parse()
        .map_err(|_| Error::Config(format!("range: bad upper bound {hi:?}")))?;
    DataRange::bounded(lo, hi)
}

/// Parse the CLI `--mode` value: `learned`, `gaussian:SIGMA`, or `baseline`.
pub fn parse_mode(value: &str) -> Result<PseudoMode> {
    if value == "learned" {
        return Ok(PseudoMode::Learned);
    }
    if value == "baseline" {
        return Ok(PseudoMode::Baseline);
    }
    if let Some(sigma) = value.strip_prefix("gaussian:") {
        let sigma: f64 = sigma
            .parse()
            .map_err(|_| Error::InvalidArgument(format!("bad sigma in mode {value:?}")))?;
        return Ok(PseudoMode::Gaussian(sigma));
    }
    Err(Error::InvalidArgument(format!(
        "mode must be learned, gaussian:SIGMA, or baseline; got {value:?}"
    )))
}
